#pragma once

#include <cstdint>
#include <vector>

#include "kincal/calibration.hpp"
#include "kincal/geom.hpp"
#include "kincal/gp.hpp"
#include "kincal/kinematics.hpp"

namespace kincal::bo {

/// Weights and normalizers of the pose-error objective. alpha1 + alpha2 = 1;
/// sup_p (meters) and sup_q (radians) scale both error terms into [0, 1].
struct ObjectiveWeights {
    double alpha1 = 0.5;
    double alpha2 = 0.5;
    double sup_p = 1.0;
    double sup_q = 3.14159265358979323846;

    void validate() const;
};

enum class UcbMode { Fixed, Srinivas };

struct UcbSchedule {
    UcbMode mode = UcbMode::Fixed;
    double beta_fixed = 4.0;
    double delta_conf = 0.1;  // confidence parameter of the srinivas schedule
    int candidate_count = 2000;

    void validate() const;
};

struct ObjectiveValue {
    double f;     // in [-1, 0]
    double f_p;   // position error [m]
    double f_q;   // rotation error [rad]
    bool clipped; // a normalized term exceeded 1 and was clamped
};

/// f = -(alpha1 f_p / sup_p + alpha2 f_q / sup_q), each term clamped at 1.
ObjectiveValue evaluate_objective(const geom::Pose& measured, const geom::Pose& computed,
                                  const ObjectiveWeights& w);

inline double objective(const geom::Pose& measured, const geom::Pose& computed,
                        const ObjectiveWeights& w) {
    return evaluate_objective(measured, computed, w).f;
}

/// Exploration weight beta_k of iteration k (1-based).
double ucb_beta(int k, const UcbSchedule& s);

/// mean + sqrt(beta_k) * sqrt(variance)
double ucb(double mean, double variance, int k, const UcbSchedule& s);

/// A reachable target: the pose together with the joint vector that produced
/// it, so the rig never needs inverse kinematics.
struct Candidate {
    geom::Pose pose;
    kin::JointVector joints;
};

/// Seeded uniform joint-space sampling mapped through forward kinematics at
/// the given parameters; every candidate is reachable by construction.
std::vector<Candidate> generate_candidates(const kin::DhChain& c,
                                           const kin::ParamVector& params, int count,
                                           std::uint64_t seed);

/// Index of the candidate with maximal UCB; ties break to the lowest index.
std::size_t select_next(const gp::GpModel& m, const std::vector<Candidate>& candidates,
                        int k, const UcbSchedule& s);

struct Measurement {
    kin::JointVector joints;
    geom::Pose pose;
};

/// Port to the measurement hardware: command a target, read back the joint
/// vector and the externally measured end-effector pose. The simulated rig
/// lives in the harness; a hardware rig would implement the same interface.
class MeasurementRig {
public:
    virtual ~MeasurementRig() = default;
    virtual Measurement command(const Candidate& target) = 0;
};

struct DesignRecord {
    int iteration = 0;
    geom::Pose target;
    geom::Pose measured;
    geom::Pose computed;
    kin::JointVector joints;
    double objective = 0.0;
    double f_p = 0.0;
    double f_q = 0.0;
    bool clipped = false;
    double ucb_value = 0.0;
    double gp_mean = 0.0;
    double gp_variance = 0.0;
};

/// Everything run_design needs beyond the chain and its parameters.
struct DesignConfig {
    ObjectiveWeights weights;
    UcbSchedule ucb;
    kernels::ProductKernelParams kernel;
    double sigma_eps = 0.0;
    double prior_mean = 0.0;
    std::uint64_t seed = 0;
    bool interleaved_calibration = true;
    calib::BoxBounds bounds;  // for the interleaved solve
    kin::ColumnMask mask;
    int calib_max_iters = 20;
    double calib_tol = 1e-10;
};

/// The experimental-design loop: per iteration select the max-UCB candidate,
/// command the rig, compute the pose the current model predicts at the
/// measured joints, score the discrepancy, and update the GP. With
/// interleaved calibration on, the working parameters are re-estimated from
/// the data collected so far once the identifiability conditions hold.
std::vector<DesignRecord> run_design(MeasurementRig& rig, const kin::DhChain& c,
                                     const kin::ParamVector& psi, int n,
                                     const DesignConfig& cfg);

/// Same loop with uniform-random candidate selection instead of UCB.
std::vector<DesignRecord> run_random_baseline(MeasurementRig& rig, const kin::DhChain& c,
                                              const kin::ParamVector& psi, int n,
                                              const DesignConfig& cfg);

}  // namespace kincal::bo
