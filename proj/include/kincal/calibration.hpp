#pragma once

#include <vector>

#include <Eigen/Core>

#include "kincal/errors.hpp"
#include "kincal/geom.hpp"
#include "kincal/kinematics.hpp"

namespace kincal::calib {

/// Box on the DH correction vector; zero must always be feasible.
struct BoxBounds {
    Eigen::VectorXd lb;
    Eigen::VectorXd ub;

    void validate() const;
};

struct PoseMeasurement {
    kin::JointVector theta;
    geom::Pose measured;
};

/// Everything needed to recover DH errors from a recorded measurement set.
struct CalibrationProblem {
    kin::DhChain chain;
    kin::ParamVector psi;  // working nominal parameters
    std::vector<PoseMeasurement> measurements;
    BoxBounds bounds;
    kin::ColumnMask mask;
};

/// Stacked residual, one 7-block per measurement: sign-aligned quaternion
/// difference (4 entries) followed by the position difference (3 entries).
Eigen::VectorXd build_residual(const std::vector<geom::Pose>& measured,
                               const std::vector<geom::Pose>& computed);

/// Box-constrained least squares over the masked columns by a primal
/// active-set method: solve the free coordinates, clamp violators to their
/// bounds, release clamped coordinates whose gradient points back inside,
/// repeat to the KKT fixpoint. Masked-out entries of the result are zero.
/// Throws NotIdentifiableError when the masked columns are rank deficient.
Eigen::VectorXd solve_box_ls(const Eigen::MatrixXd& Jn, const Eigen::VectorXd& delta_n,
                             const BoxBounds& bounds, const kin::ColumnMask& mask);

struct CalibrationResult {
    kin::ParamVector psi_star;
    Eigen::VectorXd delta;  // cumulative correction, zero on masked-out entries
    std::vector<CalibrationIteration> history;
    bool converged = false;
};

/// Iterative relinearization of the box-constrained solve. The per-iteration
/// box shrinks by the correction already applied, so the cumulative delta
/// stays inside the original bounds. Stops when the step norm drops below
/// tol; throws NonConvergenceError when the residual norm grows for three
/// consecutive iterations.
CalibrationResult calibrate(const CalibrationProblem& p, int max_iters = 20,
                            double tol = 1e-10);

}  // namespace kincal::calib
