#include "kincal/gp.hpp"

#include <cmath>
#include <stdexcept>

#include "kincal/errors.hpp"

namespace kincal::gp {

GpModel::GpModel(const kernels::ProductKernelParams& kernel, double sigma_eps,
                 double prior_mean)
    : params_(kernel),
      kernel_(std::make_shared<kernels::ProductKernel>(kernel)),
      sigma_eps_(sigma_eps),
      prior_mean_(prior_mean) {
    if (sigma_eps < 0.0) {
        throw std::invalid_argument("GpModel: sigma_eps must be >= 0");
    }
}

GpModel GpModel::add_observation(const geom::Pose& x, double y) const {
    if (!std::isfinite(y)) {
        throw std::invalid_argument("GpModel::add_observation: non-finite observation");
    }
    GpModel next = *this;
    next.data_.emplace_back(x, y);
    next.refactorize();
    return next;
}

void GpModel::refactorize() {
    const int n = size();
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            K(i, j) = (*kernel_)(data_[i].first, data_[j].first);
            K(j, i) = K(i, j);
        }
    }
    K.diagonal().array() += sigma_eps_ * sigma_eps_;

    // Duplicate or near-duplicate poses from the selection loop can make the
    // Gram numerically singular; escalate jitter 1e-10 -> 1e-6 before giving up.
    jitter_ = 0.0;
    for (;;) {
        Eigen::MatrixXd Kj = K;
        Kj.diagonal().array() += jitter_;
        llt_.compute(Kj);
        if (llt_.info() == Eigen::Success) break;
        if (jitter_ == 0.0) {
            jitter_ = 1e-10;
        } else if (jitter_ < 1e-6) {
            jitter_ *= 10.0;
        } else {
            throw IllConditionedModelError(
                "GpModel: Gram factorization failed after jitter escalation to 1e-6");
        }
    }

    Eigen::VectorXd centered(n);
    for (int i = 0; i < n; ++i) centered[i] = data_[i].second - prior_mean_;
    alpha_ = llt_.solve(centered);
}

Posterior GpModel::posterior(const geom::Pose& x) const {
    const double k_star_star = (*kernel_)(x, x);
    if (data_.empty()) {
        return {prior_mean_, k_star_star};
    }
    const int n = size();
    Eigen::VectorXd k_star(n);
    for (int i = 0; i < n; ++i) k_star[i] = (*kernel_)(x, data_[i].first);

    const double mean = prior_mean_ + k_star.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(k_star);
    double variance = k_star_star - v.squaredNorm();
    if (variance < 0.0) variance = 0.0;
    return {mean, variance};
}

}  // namespace kincal::gp
