#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "kincal/geom.hpp"
#include "kincal/rng.hpp"

using namespace kincal;
using geom::UnitQuaternion;

namespace {

constexpr double kPi = 3.14159265358979323846;

UnitQuaternion random_quat(rng::Engine& e) {
    return UnitQuaternion(e.gaussian(), e.gaussian(), e.gaussian(), e.gaussian());
}

}  // namespace

TEST_CASE("quat_to_rotmat on the reference rotations") {
    CHECK(geom::quat_to_rotmat(UnitQuaternion(1, 0, 0, 0))
              .isApprox(Eigen::Matrix3d::Identity(), 1e-15));

    Eigen::Matrix3d flip = Eigen::Vector3d(1, -1, -1).asDiagonal();
    CHECK(geom::quat_to_rotmat(UnitQuaternion(0, 1, 0, 0)).isApprox(flip, 1e-15));

    Eigen::Matrix3d z90;
    z90 << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    const double s = 1 / std::sqrt(2.0);
    CHECK(geom::quat_to_rotmat(UnitQuaternion(s, 0, 0, s)).isApprox(z90, 1e-12));
}

TEST_CASE("quat_to_rotmat is sign invariant") {
    rng::Engine e(11);
    for (int i = 0; i < 50; ++i) {
        const UnitQuaternion q = random_quat(e);
        CHECK(geom::quat_to_rotmat(q).isApprox(geom::quat_to_rotmat(q.negated()), 1e-14));
    }
}

TEST_CASE("degenerate quaternion input is rejected") {
    CHECK_THROWS_AS(UnitQuaternion(0, 0, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(UnitQuaternion(1e-13, 0, 0, 0), std::invalid_argument);
}

TEST_CASE("rotmat_to_quat reference values and canonical sign") {
    const UnitQuaternion qi = geom::rotmat_to_quat(Eigen::Matrix3d::Identity());
    CHECK(qi.w() == doctest::Approx(1.0));

    Eigen::Matrix3d z90;
    z90 << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    const UnitQuaternion qz = geom::rotmat_to_quat(z90);
    const double s = 1 / std::sqrt(2.0);
    CHECK(qz.w() == doctest::Approx(s).epsilon(1e-12));
    CHECK(qz.z() == doctest::Approx(s).epsilon(1e-12));
    CHECK(qz.x() == doctest::Approx(0.0));

    Eigen::Matrix3d bad = Eigen::Matrix3d::Ones();
    CHECK_THROWS_AS(geom::rotmat_to_quat(bad), std::invalid_argument);

    // det = -1 reflections are rejected too
    Eigen::Matrix3d reflect = Eigen::Vector3d(1, 1, -1).asDiagonal();
    CHECK_THROWS_AS(geom::rotmat_to_quat(reflect), std::invalid_argument);
}

TEST_CASE("quaternion round trips agree up to sign") {
    rng::Engine e(42);
    for (int i = 0; i < 1000; ++i) {
        const UnitQuaternion q = random_quat(e);
        const UnitQuaternion back = geom::rotmat_to_quat(geom::quat_to_rotmat(q));
        const double err = std::min((back.coeffs() - q.coeffs()).norm(),
                                    (back.coeffs() + q.coeffs()).norm());
        CHECK(err <= 1e-9);
        // and the matrix round trip is the identity without sign caveats
        CHECK((geom::quat_to_rotmat(back) - geom::quat_to_rotmat(q)).norm() <= 1e-9);
    }
}

TEST_CASE("rotmat_to_quat handles 180-degree rotations") {
    rng::Engine e(7);
    for (int i = 0; i < 200; ++i) {
        const Eigen::Vector3d axis = e.unit_vector3();
        const UnitQuaternion q(0.0, axis.x(), axis.y(), axis.z());
        const Eigen::Matrix3d R = geom::quat_to_rotmat(q);
        const UnitQuaternion back = geom::rotmat_to_quat(R);
        CHECK((geom::quat_to_rotmat(back) - R).norm() <= 1e-9);
        CHECK(back.equiv_rotation(q, 1e-9));
    }
}

TEST_CASE("geodesic distance reference values") {
    const UnitQuaternion e1(1, 0, 0, 0);
    CHECK(geom::geodesic_distance_s3(e1, e1) == 0.0);
    CHECK(geom::geodesic_distance_s3(e1, UnitQuaternion(0, 1, 0, 0)) ==
          doctest::Approx(kPi).epsilon(1e-12));
    const double s = 1 / std::sqrt(2.0);
    CHECK(geom::geodesic_distance_s3(e1, UnitQuaternion(s, s, 0, 0)) ==
          doctest::Approx(kPi / 2).epsilon(1e-12));
}

TEST_CASE("geodesic distance is a metric on rotations") {
    rng::Engine e(1234);
    for (int i = 0; i < 1000; ++i) {
        const UnitQuaternion a = random_quat(e);
        const UnitQuaternion b = random_quat(e);
        const UnitQuaternion c = random_quat(e);
        const double dab = geom::geodesic_distance_s3(a, b);
        const double dba = geom::geodesic_distance_s3(b, a);
        const double dac = geom::geodesic_distance_s3(a, c);
        const double dcb = geom::geodesic_distance_s3(c, b);

        CHECK(dab == dba);  // symmetry, bitwise
        CHECK(dab >= 0.0);
        CHECK(dab <= kPi + 1e-15);
        CHECK(geom::geodesic_distance_s3(a, a) == 0.0);
        CHECK(geom::geodesic_distance_s3(a, a.negated()) == 0.0);
        CHECK(dab <= dac + dcb + 1e-12);  // triangle inequality

        // sign flips of either argument change nothing
        CHECK(geom::geodesic_distance_s3(a.negated(), b) == dab);
        CHECK(geom::geodesic_distance_s3(a, b.negated()) == dab);
    }
}

TEST_CASE("geodesic distance equals the rotation angle of R1^T R2") {
    rng::Engine e(99);
    for (int i = 0; i < 200; ++i) {
        const UnitQuaternion a = random_quat(e);
        const UnitQuaternion b = random_quat(e);
        const Eigen::Matrix3d rel =
            geom::quat_to_rotmat(a).transpose() * geom::quat_to_rotmat(b);
        const double cos_angle = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
        const double angle = std::acos(cos_angle);
        CHECK(geom::geodesic_distance_s3(a, b) == doctest::Approx(angle).epsilon(1e-9));
    }
}

TEST_CASE("align_sign conventions") {
    const UnitQuaternion ref(1, 0, 0, 0);
    const UnitQuaternion flipped = geom::align_sign(ref, UnitQuaternion(-1, 0, 0, 0));
    CHECK(flipped.w() == doctest::Approx(1.0));

    const double s = 1 / std::sqrt(2.0);
    const UnitQuaternion kept = geom::align_sign(ref, UnitQuaternion(s, s, 0, 0));
    CHECK(kept.w() == doctest::Approx(s));

    // tie: orthogonal quaternions keep the input sign
    const UnitQuaternion tie = geom::align_sign(ref, UnitQuaternion(0, -1, 0, 0));
    CHECK(tie.x() == doctest::Approx(-1.0));

    rng::Engine e(5);
    for (int i = 0; i < 100; ++i) {
        const UnitQuaternion a = random_quat(e);
        const UnitQuaternion b = random_quat(e);
        CHECK(geom::geodesic_distance_s3(a, geom::align_sign(a, b)) ==
              geom::geodesic_distance_s3(a, b));
        CHECK(a.dot(geom::align_sign(a, b)) >= 0.0);
    }
}

TEST_CASE("se3_distance reference values") {
    const geom::Se3Metric m(0.5, 0.5);
    geom::Pose x1{UnitQuaternion(1, 0, 0, 0), {0, 0, 0}};
    geom::Pose x2 = x1;
    CHECK(geom::se3_distance(x1, x2, m) == 0.0);

    x2.p = {2, 0, 0};
    CHECK(geom::se3_distance(x1, x2, m) == doctest::Approx(1.0).epsilon(1e-15));

    const geom::Se3Metric m2(0.1, 0.9);
    geom::Pose x3{UnitQuaternion(0, 1, 0, 0), {0, 0, 0}};
    CHECK(geom::se3_distance(x1, x3, m2) == doctest::Approx(0.9 * kPi).epsilon(1e-12));
}

TEST_CASE("se3_distance satisfies the metric axioms") {
    const geom::Se3Metric m(0.3, 0.7);
    rng::Engine e(77);
    const auto random_pose = [&] {
        return geom::Pose{random_quat(e),
                          Eigen::Vector3d(e.uniform(-2, 2), e.uniform(-2, 2), e.uniform(-2, 2))};
    };
    for (int i = 0; i < 1000; ++i) {
        const geom::Pose a = random_pose();
        const geom::Pose b = random_pose();
        const geom::Pose c = random_pose();
        const double dab = geom::se3_distance(a, b, m);
        CHECK(dab == geom::se3_distance(b, a, m));
        CHECK(dab >= 0.0);
        CHECK(geom::se3_distance(a, a, m) == 0.0);
        CHECK(dab <= geom::se3_distance(a, c, m) + geom::se3_distance(c, b, m) + 1e-12);
    }
}

TEST_CASE("Se3Metric validates its weights") {
    CHECK_THROWS_AS(geom::Se3Metric(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(geom::Se3Metric(0.5, 0.6), std::invalid_argument);
    CHECK_NOTHROW(geom::Se3Metric(0.1, 0.9));
}

TEST_CASE("pose homogeneous round trip") {
    rng::Engine e(3);
    for (int i = 0; i < 50; ++i) {
        const geom::Pose pose{random_quat(e),
                              Eigen::Vector3d(e.gaussian(), e.gaussian(), e.gaussian())};
        const geom::Pose back = geom::pose_from_homogeneous(pose.to_homogeneous());
        CHECK((back.p - pose.p).norm() <= 1e-12);
        CHECK(back.q.equiv_rotation(pose.q, 1e-9));
    }
}

TEST_CASE("quaternion multiplication matches rotation composition") {
    rng::Engine e(8);
    for (int i = 0; i < 50; ++i) {
        const UnitQuaternion a = random_quat(e);
        const UnitQuaternion b = random_quat(e);
        const Eigen::Matrix3d composed =
            geom::quat_to_rotmat(a) * geom::quat_to_rotmat(b);
        CHECK((geom::quat_to_rotmat(geom::quat_multiply(a, b)) - composed).norm() <= 1e-12);
    }
}
