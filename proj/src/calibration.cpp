#include "kincal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace kincal::calib {

namespace {

enum class CoordState { Free, AtLower, AtUpper };

std::vector<int> masked_indices(const kin::ColumnMask& mask) {
    std::vector<int> idx;
    for (int k = 0; k < static_cast<int>(mask.size()); ++k) {
        if (mask[k]) idx.push_back(k);
    }
    return idx;
}

/// Columns of the masked set whose admission makes the set rank deficient.
std::vector<int> deficient_columns(const Eigen::MatrixXd& Jn,
                                   const std::vector<int>& idx) {
    Eigen::MatrixXd sub(Jn.rows(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) sub.col(i) = Jn.col(idx[i]);
    const double tol = kin::kRankTolerance * sub.jacobiSvd().singularValues()[0];

    std::vector<int> deficient;
    Eigen::MatrixXd admitted(Jn.rows(), 0);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        Eigen::MatrixXd trial(Jn.rows(), admitted.cols() + 1);
        trial.leftCols(admitted.cols()) = admitted;
        trial.rightCols<1>() = sub.col(i);
        if (trial.jacobiSvd().singularValues().minCoeff() > tol) {
            admitted = std::move(trial);
        } else {
            deficient.push_back(idx[i]);
        }
    }
    return deficient;
}

}  // namespace

void BoxBounds::validate() const {
    if (lb.size() != ub.size()) {
        throw std::invalid_argument("BoxBounds: lb/ub length mismatch");
    }
    for (int i = 0; i < lb.size(); ++i) {
        if (!(lb[i] <= 0.0 && 0.0 <= ub[i])) {
            throw std::invalid_argument(
                "BoxBounds: entry " + std::to_string(i) +
                " does not bracket zero (zero correction must stay feasible)");
        }
    }
}

Eigen::VectorXd build_residual(const std::vector<geom::Pose>& measured,
                               const std::vector<geom::Pose>& computed) {
    if (measured.empty() || measured.size() != computed.size()) {
        throw std::invalid_argument("build_residual: lists empty or of different length");
    }
    Eigen::VectorXd r(7 * static_cast<int>(measured.size()));
    for (std::size_t i = 0; i < measured.size(); ++i) {
        const geom::UnitQuaternion qm = geom::align_sign(computed[i].q, measured[i].q);
        const int row = 7 * static_cast<int>(i);
        r.segment<4>(row) = qm.coeffs() - computed[i].q.coeffs();
        r.segment<3>(row + 4) = measured[i].p - computed[i].p;
    }
    return r;
}

Eigen::VectorXd solve_box_ls(const Eigen::MatrixXd& Jn, const Eigen::VectorXd& delta_n,
                             const BoxBounds& bounds, const kin::ColumnMask& mask) {
    if (Jn.rows() != delta_n.size()) {
        throw std::invalid_argument("solve_box_ls: residual length mismatch");
    }
    if (static_cast<int>(mask.size()) != Jn.cols() || bounds.lb.size() != Jn.cols()) {
        throw std::invalid_argument("solve_box_ls: mask/bounds length mismatch");
    }
    bounds.validate();

    const auto check = kin::identifiability_check(Jn, mask);
    const std::vector<int> idx = masked_indices(mask);
    if (!check.ok) {
        throw NotIdentifiableError(
            "solve_box_ls: masked Jacobian columns are rank deficient (rank " +
                std::to_string(check.rank) + " of " + std::to_string(idx.size()) + ")",
            deficient_columns(Jn, idx));
    }

    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd A(Jn.rows(), m);
    Eigen::VectorXd lo(m), hi(m);
    for (int i = 0; i < m; ++i) {
        A.col(i) = Jn.col(idx[i]);
        lo[i] = bounds.lb[idx[i]];
        hi[i] = bounds.ub[idx[i]];
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    std::vector<CoordState> state(m, CoordState::Free);
    const double kkt_tol = 1e-10 * std::max(1.0, (A.transpose() * delta_n).lpNorm<Eigen::Infinity>());

    const int max_passes = 50 * (m + 1);
    for (int pass = 0; pass < max_passes; ++pass) {
        // Least squares over the free set, with clamped coordinates on the RHS.
        std::vector<int> free_idx;
        Eigen::VectorXd rhs = delta_n;
        for (int i = 0; i < m; ++i) {
            if (state[i] == CoordState::Free) {
                free_idx.push_back(i);
            } else {
                rhs -= A.col(i) * x[i];
            }
        }
        if (!free_idx.empty()) {
            Eigen::MatrixXd Af(A.rows(), free_idx.size());
            for (std::size_t i = 0; i < free_idx.size(); ++i) Af.col(i) = A.col(free_idx[i]);
            const Eigen::VectorXd xf = Af.colPivHouseholderQr().solve(rhs);
            for (std::size_t i = 0; i < free_idx.size(); ++i) x[free_idx[i]] = xf[i];
        }

        // Clamp every violated coordinate to its bound.
        bool clamped = false;
        for (int i = 0; i < m; ++i) {
            if (state[i] != CoordState::Free) continue;
            if (x[i] < lo[i]) {
                x[i] = lo[i];
                state[i] = CoordState::AtLower;
                clamped = true;
            } else if (x[i] > hi[i]) {
                x[i] = hi[i];
                state[i] = CoordState::AtUpper;
                clamped = true;
            }
        }
        if (clamped) continue;

        // KKT: release the clamped coordinate whose gradient points back into
        // the box the most; at a bound the gradient must push outward.
        const Eigen::VectorXd grad = A.transpose() * (A * x - delta_n);
        int release = -1;
        double worst = kkt_tol;
        for (int i = 0; i < m; ++i) {
            if (state[i] == CoordState::AtUpper && grad[i] > worst) {
                worst = grad[i];
                release = i;
            } else if (state[i] == CoordState::AtLower && -grad[i] > worst) {
                worst = -grad[i];
                release = i;
            }
        }
        if (release < 0) {
            Eigen::VectorXd full = Eigen::VectorXd::Zero(Jn.cols());
            for (int i = 0; i < m; ++i) full[idx[i]] = x[i];
            return full;
        }
        state[release] = CoordState::Free;
    }
    throw std::runtime_error("solve_box_ls: active-set iteration cap reached");
}

CalibrationResult calibrate(const CalibrationProblem& p, int max_iters, double tol) {
    p.chain.validate();
    p.bounds.validate();
    if (p.measurements.empty()) {
        throw std::invalid_argument("calibrate: no measurements");
    }
    const int m = kin::mask_count(p.mask);
    const int n_meas = static_cast<int>(p.measurements.size());
    if (7 * n_meas < m) {
        const int required = (m + 6) / 7;
        throw TooFewMeasurementsError(
            "calibrate: " + std::to_string(n_meas) + " measurements for " +
                std::to_string(m) + " identifiable parameters; need at least " +
                std::to_string(required),
            required);
    }

    std::vector<kin::JointVector> thetas;
    std::vector<geom::Pose> measured;
    thetas.reserve(p.measurements.size());
    measured.reserve(p.measurements.size());
    for (const auto& meas : p.measurements) {
        thetas.push_back(meas.theta);
        measured.push_back(meas.measured);
    }

    CalibrationResult result;
    result.delta = Eigen::VectorXd::Zero(p.psi.size());

    double prev_residual = std::numeric_limits<double>::infinity();
    int grow_streak = 0;
    for (int it = 1; it <= max_iters; ++it) {
        const kin::ParamVector current = p.psi + result.delta;
        std::vector<geom::Pose> computed;
        computed.reserve(thetas.size());
        for (const auto& theta : thetas) {
            computed.push_back(kin::forward_kinematics(p.chain, current, theta));
        }
        const Eigen::VectorXd residual = build_residual(measured, computed);
        const double residual_norm = residual.norm();

        if (residual_norm > prev_residual) {
            if (++grow_streak >= 3) {
                throw NonConvergenceError(
                    "calibrate: residual norm grew for 3 consecutive iterations",
                    result.history);
            }
        } else {
            grow_streak = 0;
        }
        prev_residual = residual_norm;

        const Eigen::MatrixXd Jn = kin::stacked_jacobian(p.chain, current, thetas);
        BoxBounds remaining{p.bounds.lb - result.delta, p.bounds.ub - result.delta};
        // Cumulative bookkeeping can leave a bound on the wrong side of zero
        // by roundoff once a coordinate sits on it; snap that to zero.
        for (int i = 0; i < remaining.lb.size(); ++i) {
            remaining.lb[i] = std::min(remaining.lb[i], 0.0);
            remaining.ub[i] = std::max(remaining.ub[i], 0.0);
        }
        const Eigen::VectorXd step = solve_box_ls(Jn, residual, remaining, p.mask);
        result.delta += step;

        result.history.push_back({it, residual_norm, step.norm()});
        if (step.norm() <= tol) {
            result.converged = true;
            break;
        }
    }

    result.psi_star = p.psi + result.delta;
    return result;
}

}  // namespace kincal::calib
