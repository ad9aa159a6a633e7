#include "kincal/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace kincal::kernels {

namespace {

double gegenbauer_recurrence(int n, double t) {
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = 2.0 * t;
    for (int k = 2; k <= n; ++k) {
        const double next = 2.0 * t * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

}  // namespace

void SeKernelParams::validate() const {
    if (!(beta > 0.0)) throw std::invalid_argument("SeKernelParams: beta must be > 0");
    if (!(sigma_f > 0.0)) throw std::invalid_argument("SeKernelParams: sigma_f must be > 0");
    if (sigma_n < 0.0) throw std::invalid_argument("SeKernelParams: sigma_n must be >= 0");
}

void S3KernelParams::validate() const {
    if (!(kappa > 0.0)) throw std::invalid_argument("S3KernelParams: kappa must be > 0");
    if (!(sigma > 0.0)) throw std::invalid_argument("S3KernelParams: sigma must be > 0");
    if (series_order < 1) throw std::invalid_argument("S3KernelParams: series order must be >= 1");
}

void ProductKernelParams::validate() const {
    s3.validate();
    se.validate();
    if (!(sigma_s > 0.0)) throw std::invalid_argument("ProductKernelParams: sigma_s must be > 0");
}

double k_se(const Eigen::VectorXd& p1, const Eigen::VectorXd& p2,
            const SeKernelParams& params) {
    if (p1.size() != p2.size()) {
        throw std::invalid_argument("k_se: input dimensions differ");
    }
    const double sq = (p1 - p2).squaredNorm();
    double value = params.sigma_f * params.sigma_f *
                   std::exp(-sq / (2.0 * params.beta * params.beta));
    if ((p1.array() == p2.array()).all()) {
        value += params.sigma_n * params.sigma_n;
    }
    return value;
}

double k_naive_se3(const geom::Pose& x1, const geom::Pose& x2, double beta,
                   const geom::Se3Metric& m) {
    if (!(beta > 0.0)) throw std::invalid_argument("k_naive_se3: beta must be > 0");
    const double d = geom::se3_distance(x1, x2, m);
    return std::exp(-d * d / (2.0 * beta * beta));
}

double gegenbauer_c1(int n, double t) {
    if (n < 0) throw std::invalid_argument("gegenbauer_c1: order must be >= 0");
    if (std::abs(t) > 1.0 + 1e-12) {
        throw std::invalid_argument("gegenbauer_c1: argument outside [-1, 1]");
    }
    t = std::clamp(t, -1.0, 1.0);
    const double theta = std::acos(t);
    const double s = std::sin(theta);
    if (std::abs(s) < 1e-6) {
        return gegenbauer_recurrence(n, t);
    }
    return std::sin((n + 1) * theta) / s;
}

S3Series::S3Series(const S3KernelParams& params) {
    params.validate();
    weights_.resize(params.series_order + 1);
    for (int n = 0; n <= params.series_order; ++n) {
        weights_[n] = (n + 1) *
                      std::exp(-params.kappa * params.kappa * n * (n + 2.0) / 2.0);
    }
    sigma_sq_ = params.sigma * params.sigma;

    // Normalize with the truncated series itself so the diagonal is exactly
    // sigma^2: at cos_d = 1 the recurrence gives C_n(1) = n + 1.
    normalizer_ = 0.0;
    for (int n = 0; n <= params.series_order; ++n) {
        normalizer_ += weights_[n] * (n + 1);
    }
}

double S3Series::at_cos_distance(double cos_d) const {
    // One pass of the three-term recurrence over all orders.
    double sum = weights_[0];
    if (weights_.size() > 1) {
        double prev = 1.0;
        double cur = 2.0 * cos_d;
        sum += weights_[1] * cur;
        for (std::size_t n = 2; n < weights_.size(); ++n) {
            const double next = 2.0 * cos_d * cur - prev;
            prev = cur;
            cur = next;
            sum += weights_[n] * cur;
        }
    }
    return sigma_sq_ * sum / normalizer_;
}

double S3Series::operator()(const geom::UnitQuaternion& q1,
                            const geom::UnitQuaternion& q2) const {
    return at_cos_distance(std::cos(geom::geodesic_distance_s3(q1, q2)));
}

double k_s3(const geom::UnitQuaternion& q1, const geom::UnitQuaternion& q2,
            const S3KernelParams& params) {
    return S3Series(params)(q1, q2);
}

ProductKernel::ProductKernel(const ProductKernelParams& params)
    : s3_(params.s3),
      beta_(params.se.beta),
      sigma_f_sq_(params.se.sigma_f * params.se.sigma_f),
      sigma_s_sq_(params.sigma_s * params.sigma_s) {
    params.validate();
}

double ProductKernel::operator()(const geom::Pose& x1, const geom::Pose& x2) const {
    const double sq = (x1.p - x2.p).squaredNorm();
    const double se = sigma_f_sq_ * std::exp(-sq / (2.0 * beta_ * beta_));
    return sigma_s_sq_ * s3_(x1.q, x2.q) * se;
}

double k_product(const geom::Pose& x1, const geom::Pose& x2,
                 const ProductKernelParams& params) {
    return ProductKernel(params)(x1, x2);
}

}  // namespace kincal::kernels
