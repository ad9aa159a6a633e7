#pragma once

#include <Eigen/Core>

namespace kincal::geom {

/// Rotation as a point on the unit 3-sphere, components ordered (w, x, y, z).
/// q and -q represent the same rotation; functions that care about the sign
/// say so explicitly.
class UnitQuaternion {
public:
    /// Normalizes the input. Throws std::invalid_argument on a (near-)zero vector.
    UnitQuaternion(double w, double x, double y, double z);

    /// Identity rotation (1, 0, 0, 0).
    UnitQuaternion() : w_(1.0), x_(0.0), y_(0.0), z_(0.0) {}

    double w() const { return w_; }
    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }

    Eigen::Vector4d coeffs() const { return {w_, x_, y_, z_}; }

    double dot(const UnitQuaternion& other) const {
        return w_ * other.w_ + x_ * other.x_ + y_ * other.y_ + z_ * other.z_;
    }

    UnitQuaternion negated() const;

    /// Same rotation? True for q vs -q.
    bool equiv_rotation(const UnitQuaternion& other, double tol = 1e-9) const;

private:
    double w_, x_, y_, z_;
};

/// Pose on S^3 x R^3: rotation quaternion plus position in meters.
struct Pose {
    UnitQuaternion q;
    Eigen::Vector3d p{0.0, 0.0, 0.0};

    Eigen::Matrix4d to_homogeneous() const;
};

/// Weights of the SE(3) distance; gamma1 + gamma2 = 1, both positive.
struct Se3Metric {
    double gamma1;
    double gamma2;

    Se3Metric(double g1, double g2);
};

/// Rotation matrix of q. Identical result for q and -q.
Eigen::Matrix3d quat_to_rotmat(const UnitQuaternion& q);

/// Quaternion of R with canonical sign: nonnegative scalar part, and when
/// w = 0 the first nonzero of (x, y, z) is made positive. Throws
/// std::invalid_argument if R is not orthonormal with det 1 (tol 1e-8).
UnitQuaternion rotmat_to_quat(const Eigen::Matrix3d& R);

/// Geodesic distance on rotations, 2*acos(|<q1,q2>|), in [0, pi].
/// Invariant to independent sign flips of either argument.
double geodesic_distance_s3(const UnitQuaternion& q1, const UnitQuaternion& q2);

/// Returns q or -q, whichever has nonnegative inner product with q_ref.
/// Tie at <q_ref,q> = 0 keeps the input sign.
UnitQuaternion align_sign(const UnitQuaternion& q_ref, const UnitQuaternion& q);

/// sqrt((gamma1*|p1-p2|)^2 + (gamma2*d_S3(q1,q2))^2)
double se3_distance(const Pose& x1, const Pose& x2, const Se3Metric& m);

/// Quaternion of the rotation by angle (radians) about a unit axis.
UnitQuaternion quat_from_axis_angle(const Eigen::Vector3d& axis, double angle);

/// Hamilton product q1 * q2 (composition of rotations, q1 applied last).
UnitQuaternion quat_multiply(const UnitQuaternion& q1, const UnitQuaternion& q2);

/// Pose from a homogeneous transform; rotation gets the canonical sign.
Pose pose_from_homogeneous(const Eigen::Matrix4d& T);

}  // namespace kincal::geom
