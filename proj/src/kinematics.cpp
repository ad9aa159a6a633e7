#include "kincal/kinematics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

#include "kincal/errors.hpp"
#include "kincal/rng.hpp"

namespace kincal::kin {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

Eigen::Matrix4d dh_matrix(double angle, double twist, double length, double offset) {
    const double cp = std::cos(angle), sp = std::sin(angle);
    const double ca = std::cos(twist), sa = std::sin(twist);
    Eigen::Matrix4d T;
    T << cp, -sp * ca, sp * sa, length * cp,
         sp, cp * ca, -cp * sa, length * sp,
         0.0, sa, ca, offset,
         0.0, 0.0, 0.0, 1.0;
    return T;
}

Eigen::Matrix4d chain_transform(const DhChain& c, const ParamVector& params,
                                const JointVector& theta) {
    const int n = c.num_joints();
    Eigen::Matrix4d T = c.base.to_homogeneous();
    for (int i = 0; i < n; ++i) {
        const bool revolute = c.joints[i].kind == JointKind::Revolute;
        const double phi = params[i];
        const double alpha = params[n + i];
        const double a = params[2 * n + i];
        const double d = params[3 * n + i];
        const double angle = revolute ? phi + theta[i] : phi;
        const double offset = revolute ? d : d + theta[i];
        T = T * dh_matrix(angle, alpha, a, offset);
    }
    return T * c.tool.to_homogeneous();
}

Eigen::Matrix<double, 7, 1> pose_vector(const geom::Pose& pose) {
    Eigen::Matrix<double, 7, 1> v;
    v << pose.q.w(), pose.q.x(), pose.q.y(), pose.q.z(), pose.p.x(), pose.p.y(), pose.p.z();
    return v;
}

void check_dims(const DhChain& c, const ParamVector& params, const JointVector& theta) {
    if (params.size() != c.num_params()) {
        throw std::invalid_argument("forward_kinematics: params length " +
                                    std::to_string(params.size()) + ", expected " +
                                    std::to_string(c.num_params()));
    }
    if (theta.size() != c.num_joints()) {
        throw std::invalid_argument("forward_kinematics: theta length " +
                                    std::to_string(theta.size()) + ", expected " +
                                    std::to_string(c.num_joints()));
    }
}

}  // namespace

ParamVector DhChain::nominal_params() const {
    const int n = num_joints();
    ParamVector p(4 * n);
    for (int i = 0; i < n; ++i) {
        p[i] = joints[i].phi;
        p[n + i] = joints[i].alpha;
        p[2 * n + i] = joints[i].a;
        p[3 * n + i] = joints[i].d;
    }
    return p;
}

void DhChain::validate() const {
    if (joints.empty()) {
        throw std::invalid_argument("DhChain: at least one joint required");
    }
    for (std::size_t i = 0; i < joints.size(); ++i) {
        const auto& j = joints[i];
        const std::string where = "DhChain joint " + std::to_string(i);
        if (!(j.limits.lo <= j.limits.hi)) {
            throw std::invalid_argument(where + ": limits.lo > limits.hi");
        }
        if (j.kind == JointKind::Revolute &&
            (j.limits.lo < -kTwoPi || j.limits.hi > kTwoPi)) {
            throw std::invalid_argument(where + ": revolute limits outside [-2pi, 2pi]");
        }
    }
}

Eigen::Matrix4d dh_link_transform(const DhJoint& j, double theta) {
    if (!std::isfinite(theta)) {
        throw std::invalid_argument("dh_link_transform: theta must be finite");
    }
    const bool revolute = j.kind == JointKind::Revolute;
    return dh_matrix(revolute ? j.phi + theta : j.phi, j.alpha, j.a,
                     revolute ? j.d : j.d + theta);
}

geom::Pose forward_kinematics(const DhChain& c, const ParamVector& params,
                              const JointVector& theta) {
    check_dims(c, params, theta);
    return geom::pose_from_homogeneous(chain_transform(c, params, theta));
}

Eigen::MatrixXd identification_jacobian(const DhChain& c, const ParamVector& params,
                                        const JointVector& theta, double h) {
    check_dims(c, params, theta);
    const geom::Pose center = forward_kinematics(c, params, theta);

    Eigen::MatrixXd J(7, params.size());
    ParamVector perturbed = params;
    for (int k = 0; k < params.size(); ++k) {
        perturbed[k] = params[k] + h;
        geom::Pose plus = forward_kinematics(c, perturbed, theta);
        perturbed[k] = params[k] - h;
        geom::Pose minus = forward_kinematics(c, perturbed, theta);
        perturbed[k] = params[k];

        plus.q = geom::align_sign(center.q, plus.q);
        minus.q = geom::align_sign(center.q, minus.q);
        J.col(k) = (pose_vector(plus) - pose_vector(minus)) / (2.0 * h);
    }
    return J;
}

Eigen::MatrixXd stacked_jacobian(const DhChain& c, const ParamVector& params,
                                 const std::vector<JointVector>& theta_list, double h) {
    if (theta_list.empty()) {
        throw std::invalid_argument("stacked_jacobian: empty joint-vector list");
    }
    Eigen::MatrixXd Jn(7 * static_cast<int>(theta_list.size()), params.size());
    for (std::size_t i = 0; i < theta_list.size(); ++i) {
        Jn.middleRows<7>(7 * static_cast<int>(i)) =
            identification_jacobian(c, params, theta_list[i], h);
    }
    return Jn;
}

IdentifiabilityResult identifiability_check(const Eigen::MatrixXd& Jn,
                                            const ColumnMask& mask) {
    if (static_cast<int>(mask.size()) != Jn.cols()) {
        throw std::invalid_argument("identifiability_check: mask length mismatch");
    }
    const int m = mask_count(mask);
    if (m == 0) {
        return {0, false};
    }
    if (Jn.rows() < m) {
        const int required = (m + 6) / 7;
        throw TooFewMeasurementsError(
            "identifiability_check: " + std::to_string(Jn.rows() / 7) +
                " measurements give " + std::to_string(Jn.rows()) + " rows for " +
                std::to_string(m) + " masked columns; need at least " +
                std::to_string(required) + " measurements",
            required);
    }

    Eigen::MatrixXd sub(Jn.rows(), m);
    int col = 0;
    for (int k = 0; k < Jn.cols(); ++k) {
        if (mask[k]) sub.col(col++) = Jn.col(k);
    }

    const Eigen::VectorXd sv = sub.jacobiSvd().singularValues();
    const double tol = kRankTolerance * sv[0];
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv[i] > tol) ++rank;
    }
    return {rank, rank == m};
}

ColumnMask detect_dependent_columns(const DhChain& c, const ParamVector& params,
                                    int n_probe, std::uint64_t seed) {
    const int np = static_cast<int>(params.size());
    if (7 * n_probe < np) {
        throw std::invalid_argument("detect_dependent_columns: n_probe * 7 < 4 n_j");
    }

    rng::Engine engine(seed);
    std::vector<JointVector> probes;
    probes.reserve(n_probe);
    for (int i = 0; i < n_probe; ++i) {
        JointVector theta(c.num_joints());
        for (int j = 0; j < c.num_joints(); ++j) {
            theta[j] = engine.uniform(c.joints[j].limits.lo, c.joints[j].limits.hi);
        }
        probes.push_back(theta);
    }
    const Eigen::MatrixXd Jn = stacked_jacobian(c, params, probes);
    const double sigma_max = Jn.jacobiSvd().singularValues()[0];
    const double tol = kRankTolerance * sigma_max;

    // Greedy admission: a column stays only if the admitted set keeps its
    // smallest singular value above the rank tolerance.
    ColumnMask mask(np, false);
    Eigen::MatrixXd admitted(Jn.rows(), 0);
    for (int k = 0; k < np; ++k) {
        Eigen::MatrixXd trial(Jn.rows(), admitted.cols() + 1);
        trial.leftCols(admitted.cols()) = admitted;
        trial.rightCols<1>() = Jn.col(k);
        const Eigen::VectorXd sv = trial.jacobiSvd().singularValues();
        if (sv[sv.size() - 1] > tol) {
            admitted = std::move(trial);
            mask[k] = true;
        }
    }
    return mask;
}

}  // namespace kincal::kin
