#pragma once

#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "kincal/geom.hpp"
#include "kincal/kernels.hpp"

namespace kincal::gp {

struct Posterior {
    double mean;
    double variance;
};

/// Exact GP regression over poses with the product kernel. A model is an
/// immutable value: add_observation returns a new model with a refreshed
/// factorization (full refactorization; training sets stay small).
class GpModel {
public:
    GpModel(const kernels::ProductKernelParams& kernel, double sigma_eps,
            double prior_mean = 0.0);

    /// Returns the model extended by one (pose, value) observation.
    /// Throws std::invalid_argument for non-finite y and
    /// IllConditionedModelError when the Gram factorization fails even
    /// after jitter escalation.
    GpModel add_observation(const geom::Pose& x, double y) const;

    /// Posterior mean and variance at a query pose. With no data this is the
    /// prior (prior_mean, k(x,x)). Variance is clamped at zero from below.
    Posterior posterior(const geom::Pose& x) const;

    int size() const { return static_cast<int>(data_.size()); }
    const std::vector<std::pair<geom::Pose, double>>& data() const { return data_; }
    double sigma_eps() const { return sigma_eps_; }
    double prior_mean() const { return prior_mean_; }
    const kernels::ProductKernelParams& kernel_params() const { return params_; }

    /// Jitter that had to be added to factorize the current Gram (0 if none).
    double applied_jitter() const { return jitter_; }

private:
    void refactorize();

    kernels::ProductKernelParams params_;
    std::shared_ptr<const kernels::ProductKernel> kernel_;
    double sigma_eps_;
    double prior_mean_;
    std::vector<std::pair<geom::Pose, double>> data_;

    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;  // solve(K + sigma_eps^2 I, y - prior_mean)
    double jitter_ = 0.0;
};

}  // namespace kincal::gp
