#include "kincal/geom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/LU>

namespace kincal::geom {

namespace {

constexpr double kUnitTol = 1e-9;
constexpr double kOrthoTol = 1e-8;

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z) {
    const double norm = std::sqrt(w * w + x * x + y * y + z * z);
    if (!(norm > 1e-12) || !std::isfinite(norm)) {
        throw std::invalid_argument("UnitQuaternion: components do not normalize");
    }
    w_ = w / norm;
    x_ = x / norm;
    y_ = y / norm;
    z_ = z / norm;
}

UnitQuaternion UnitQuaternion::negated() const {
    UnitQuaternion q = *this;
    q.w_ = -q.w_;
    q.x_ = -q.x_;
    q.y_ = -q.y_;
    q.z_ = -q.z_;
    return q;
}

bool UnitQuaternion::equiv_rotation(const UnitQuaternion& other, double tol) const {
    const Eigen::Vector4d a = coeffs();
    const Eigen::Vector4d b = other.coeffs();
    return std::min((a - b).norm(), (a + b).norm()) <= tol;
}

Eigen::Matrix4d Pose::to_homogeneous() const {
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
    T.block<3, 3>(0, 0) = quat_to_rotmat(q);
    T.block<3, 1>(0, 3) = p;
    return T;
}

Se3Metric::Se3Metric(double g1, double g2) : gamma1(g1), gamma2(g2) {
    if (!(g1 > 0.0) || !(g2 > 0.0)) {
        throw std::invalid_argument("Se3Metric: gamma1 and gamma2 must be positive");
    }
    if (std::abs(g1 + g2 - 1.0) > 1e-12) {
        throw std::invalid_argument("Se3Metric: gamma1 + gamma2 must equal 1");
    }
}

Eigen::Matrix3d quat_to_rotmat(const UnitQuaternion& q) {
    const double norm = q.coeffs().norm();
    if (std::abs(norm - 1.0) > kUnitTol) {
        throw std::invalid_argument("quat_to_rotmat: quaternion is not unit norm");
    }
    // I + 2w[v]x + 2[v]x[v]x
    const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
    Eigen::Matrix3d vx;
    vx << 0, -z, y,
          z, 0, -x,
          -y, x, 0;
    return Eigen::Matrix3d::Identity() + 2.0 * w * vx + 2.0 * vx * vx;
}

UnitQuaternion rotmat_to_quat(const Eigen::Matrix3d& R) {
    if ((R.transpose() * R - Eigen::Matrix3d::Identity()).norm() > kOrthoTol ||
        std::abs(R.determinant() - 1.0) > kOrthoTol) {
        throw std::invalid_argument("rotmat_to_quat: matrix is not a rotation");
    }

    // Square-root extraction, pivoted on the largest of the four squared
    // components; tiny negative square-root arguments are clamped to 0.
    const auto mag = [](double s) { return s < 1e-12 ? 0.0 : s; };
    const double ww = mag(1.0 + R(0, 0) + R(1, 1) + R(2, 2));
    const double xx = mag(1.0 + R(0, 0) - R(1, 1) - R(2, 2));
    const double yy = mag(1.0 - R(0, 0) + R(1, 1) - R(2, 2));
    const double zz = mag(1.0 - R(0, 0) - R(1, 1) + R(2, 2));

    double w, x, y, z;
    if (ww >= xx && ww >= yy && ww >= zz) {
        w = 0.5 * std::sqrt(ww);
        x = (R(2, 1) - R(1, 2)) / (4.0 * w);
        y = (R(0, 2) - R(2, 0)) / (4.0 * w);
        z = (R(1, 0) - R(0, 1)) / (4.0 * w);
    } else if (xx >= yy && xx >= zz) {
        x = 0.5 * std::sqrt(xx);
        w = (R(2, 1) - R(1, 2)) / (4.0 * x);
        y = (R(0, 1) + R(1, 0)) / (4.0 * x);
        z = (R(0, 2) + R(2, 0)) / (4.0 * x);
    } else if (yy >= zz) {
        y = 0.5 * std::sqrt(yy);
        w = (R(0, 2) - R(2, 0)) / (4.0 * y);
        x = (R(0, 1) + R(1, 0)) / (4.0 * y);
        z = (R(1, 2) + R(2, 1)) / (4.0 * y);
    } else {
        z = 0.5 * std::sqrt(zz);
        w = (R(1, 0) - R(0, 1)) / (4.0 * z);
        x = (R(0, 2) + R(2, 0)) / (4.0 * z);
        y = (R(1, 2) + R(2, 1)) / (4.0 * z);
    }

    // Canonical sign: w >= 0; at w == 0 the first nonzero of (x, y, z) positive.
    double lead = w;
    if (lead == 0.0) lead = x;
    if (lead == 0.0) lead = y;
    if (lead == 0.0) lead = z;
    if (lead < 0.0) {
        w = -w;
        x = -x;
        y = -y;
        z = -z;
    }
    return UnitQuaternion(w, x, y, z);
}

double geodesic_distance_s3(const UnitQuaternion& q1, const UnitQuaternion& q2) {
    // The self inner product of a normalized quaternion is 1 only up to
    // roundoff; acos would then report ~1e-8 for identical rotations. Catch
    // componentwise equality (either sign) so d(q, +-q) is exactly zero.
    const Eigen::Vector4d a = q1.coeffs();
    const Eigen::Vector4d b = q2.coeffs();
    if ((a.array() == b.array()).all() || (a.array() == (-b).array()).all()) {
        return 0.0;
    }
    return 2.0 * std::acos(clamp_unit(std::abs(q1.dot(q2))));
}

UnitQuaternion align_sign(const UnitQuaternion& q_ref, const UnitQuaternion& q) {
    return q_ref.dot(q) >= 0.0 ? q : q.negated();
}

double se3_distance(const Pose& x1, const Pose& x2, const Se3Metric& m) {
    const double dp = m.gamma1 * (x1.p - x2.p).norm();
    const double dq = m.gamma2 * geodesic_distance_s3(x1.q, x2.q);
    return std::sqrt(dp * dp + dq * dq);
}

UnitQuaternion quat_from_axis_angle(const Eigen::Vector3d& axis, double angle) {
    if (std::abs(axis.norm() - 1.0) > 1e-9) {
        throw std::invalid_argument("quat_from_axis_angle: axis must be unit length");
    }
    const double half = 0.5 * angle;
    const double s = std::sin(half);
    return UnitQuaternion(std::cos(half), s * axis.x(), s * axis.y(), s * axis.z());
}

UnitQuaternion quat_multiply(const UnitQuaternion& q1, const UnitQuaternion& q2) {
    const double w1 = q1.w(), x1 = q1.x(), y1 = q1.y(), z1 = q1.z();
    const double w2 = q2.w(), x2 = q2.x(), y2 = q2.y(), z2 = q2.z();
    return UnitQuaternion(w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
                          w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
                          w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
                          w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2);
}

Pose pose_from_homogeneous(const Eigen::Matrix4d& T) {
    return Pose{rotmat_to_quat(T.block<3, 3>(0, 0)), T.block<3, 1>(0, 3)};
}

}  // namespace kincal::geom
