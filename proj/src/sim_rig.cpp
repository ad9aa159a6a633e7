#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kincal/harness.hpp"

namespace kincal::harness {

SimRig::SimRig(kin::DhChain chain, kin::ParamVector true_params, NoiseScales noise,
               std::uint64_t seed)
    : chain_(std::move(chain)),
      true_params_(std::move(true_params)),
      noise_(noise),
      rng_(seed) {
    chain_.validate();
    if (true_params_.size() != chain_.num_params()) {
        throw std::invalid_argument("SimRig: true parameter vector length mismatch");
    }
    if (noise_.pos < 0.0 || noise_.rot < 0.0 || noise_.joint < 0.0) {
        throw std::invalid_argument("SimRig: noise scales must be >= 0");
    }
}

bo::Measurement SimRig::command(const bo::Candidate& target) {
    if (target.joints.size() != chain_.num_joints()) {
        throw std::invalid_argument(
            "SimRig: target carries no joint vector for this chain; candidates "
            "must come from generate_candidates");
    }

    kin::JointVector theta = target.joints;
    if (noise_.joint > 0.0) {
        for (int i = 0; i < theta.size(); ++i) {
            theta[i] = std::clamp(rng_.gaussian(theta[i], noise_.joint),
                                  chain_.joints[i].limits.lo, chain_.joints[i].limits.hi);
        }
    }

    geom::Pose measured = kin::forward_kinematics(chain_, true_params_, theta);
    if (noise_.pos > 0.0) {
        measured.p += noise_.pos * Eigen::Vector3d(rng_.gaussian(), rng_.gaussian(),
                                                   rng_.gaussian());
    }
    if (noise_.rot > 0.0) {
        const Eigen::Vector3d axis = rng_.unit_vector3();
        const double angle = std::abs(rng_.gaussian(0.0, noise_.rot));
        measured.q = geom::quat_multiply(geom::quat_from_axis_angle(axis, angle),
                                         measured.q);
    }
    return {theta, measured};
}

}  // namespace kincal::harness
