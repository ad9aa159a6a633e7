#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "kincal/geom.hpp"

namespace kincal::kernels {

/// Squared-exponential hyperparameters: length scale, signal scale, and the
/// same-point (Kronecker delta) term scale.
struct SeKernelParams {
    double beta = 1.0;
    double sigma_f = 1.0;
    double sigma_n = 0.0;

    void validate() const;
};

/// Hyperparameters of the series kernel on the 3-sphere. series_order is the
/// truncation N; the normalizer is computed from the truncated series so the
/// kernel's diagonal is exactly sigma^2.
struct S3KernelParams {
    double kappa = 1.0;
    double sigma = 1.0;
    int series_order = 128;

    void validate() const;
};

/// Product kernel on S^3 x R^3: sigma_s^2 * k_s3(q,q') * k_se(p,p').
/// The Kronecker term of the position factor is ignored inside the product;
/// observation noise belongs to the GP.
struct ProductKernelParams {
    S3KernelParams s3;
    SeKernelParams se;
    double sigma_s = 1.0;

    void validate() const;
};

/// sigma_f^2 exp(-|p1-p2|^2 / (2 beta^2)) + sigma_n^2 [p1 == p2 bitwise]
double k_se(const Eigen::VectorXd& p1, const Eigen::VectorXd& p2,
            const SeKernelParams& params);

/// Squared exponential of the SE(3) distance, sigma_f fixed to 1. This is NOT
/// a valid kernel (its Gram matrices can be indefinite); it is kept only to
/// reproduce that failure. Do not model with it.
double k_naive_se3(const geom::Pose& x1, const geom::Pose& x2, double beta,
                   const geom::Se3Metric& m);

/// Gegenbauer polynomial C_n^{(1)}(t) = sin((n+1) acos t) / sin(acos t),
/// the Chebyshev polynomial of the second kind. Closed form away from
/// t = +-1, three-term recurrence near the endpoints.
double gegenbauer_c1(int n, double t);

/// Series kernel on S^3 with precomputed term weights; use this form when
/// evaluating many pairs under fixed hyperparameters.
class S3Series {
public:
    explicit S3Series(const S3KernelParams& params);

    double operator()(const geom::UnitQuaternion& q1,
                      const geom::UnitQuaternion& q2) const;

    /// Series value (normalized by C_inf and scaled by sigma^2) as a function
    /// of cos of the geodesic distance.
    double at_cos_distance(double cos_d) const;

private:
    std::vector<double> weights_;  // (n+1) exp(-kappa^2 n (n+2) / 2)
    double normalizer_;            // series at cos_d = 1
    double sigma_sq_;
};

/// One-shot form of the S^3 series kernel.
double k_s3(const geom::UnitQuaternion& q1, const geom::UnitQuaternion& q2,
            const S3KernelParams& params);

/// Product kernel functor; precomputes the S^3 series weights.
class ProductKernel {
public:
    explicit ProductKernel(const ProductKernelParams& params);

    double operator()(const geom::Pose& x1, const geom::Pose& x2) const;

private:
    S3Series s3_;
    double beta_;
    double sigma_f_sq_;
    double sigma_s_sq_;
};

/// One-shot form of the product kernel.
double k_product(const geom::Pose& x1, const geom::Pose& x2,
                 const ProductKernelParams& params);

/// Gram matrix K[i][j] = kernel(points[i], points[j]); the upper triangle is
/// computed and mirrored, so symmetry is exact.
template <typename Point, typename Kernel>
Eigen::MatrixXd gram(const std::vector<Point>& points, Kernel&& kernel) {
    if (points.empty()) {
        throw std::invalid_argument("gram: empty point list");
    }
    const int n = static_cast<int>(points.size());
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            K(i, j) = kernel(points[i], points[j]);
            K(j, i) = K(i, j);
        }
    }
    return K;
}

}  // namespace kincal::kernels
