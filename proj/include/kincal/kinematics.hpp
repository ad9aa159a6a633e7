#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "kincal/geom.hpp"

namespace kincal::kin {

enum class JointKind : std::uint8_t { Revolute, Prismatic };

/// Closed interval for a joint variable (radians or meters).
struct JointLimits {
    double lo;
    double hi;
};

/// One Denavit-Hartenberg record. phi is the joint variable for revolute
/// joints, d for prismatic ones; the stored values are offsets.
struct DhJoint {
    JointKind kind = JointKind::Revolute;
    double phi = 0.0;    // joint angle offset [rad]
    double alpha = 0.0;  // twist angle [rad]
    double a = 0.0;      // link length [m]
    double d = 0.0;      // link offset [m]
    JointLimits limits{-3.14159265358979323846, 3.14159265358979323846};
};

/// Flat DH parameter vector, layout [phi_1..phi_n, alpha_1.., a_1.., d_1..].
using ParamVector = Eigen::VectorXd;

/// Joint variables, one entry per joint.
using JointVector = Eigen::VectorXd;

/// Serial chain: ordered joints plus fixed base and tool transforms.
struct DhChain {
    std::vector<DhJoint> joints;
    geom::Pose base;
    geom::Pose tool;

    int num_joints() const { return static_cast<int>(joints.size()); }
    int num_params() const { return 4 * num_joints(); }

    /// The chain's own DH records flattened into the parameter layout.
    ParamVector nominal_params() const;

    /// Validates joint count >= 1, limit ordering, revolute limit range.
    void validate() const;
};

/// 4x4 DH link transform at joint variable theta.
Eigen::Matrix4d dh_link_transform(const DhJoint& j, double theta);

/// End-effector pose: base * product of link transforms * tool, with the
/// chain's DH records overridden by `params`.
geom::Pose forward_kinematics(const DhChain& c, const ParamVector& params,
                              const JointVector& theta);

/// 7 x 4n Jacobian of the pose [qw qx qy qz px py pz] with respect to the DH
/// parameters, by central finite differences with step h. Perturbed
/// quaternions are sign-aligned to the unperturbed pose before differencing.
Eigen::MatrixXd identification_jacobian(const DhChain& c, const ParamVector& params,
                                        const JointVector& theta, double h = 1e-6);

/// Vertical stack of identification Jacobians, one 7-row block per joint vector.
Eigen::MatrixXd stacked_jacobian(const DhChain& c, const ParamVector& params,
                                 const std::vector<JointVector>& theta_list,
                                 double h = 1e-6);

struct IdentifiabilityResult {
    int rank = 0;
    bool ok = false;
};

/// Mask over parameter columns; true = column participates in identification.
using ColumnMask = std::vector<bool>;

inline int mask_count(const ColumnMask& mask) {
    int n = 0;
    for (bool b : mask) n += b ? 1 : 0;
    return n;
}

/// Numerical rank of the masked columns of Jn (singular values above
/// 1e-8 * sigma_max); ok iff rank equals the masked-in column count.
/// Throws TooFewMeasurementsError when Jn has fewer rows than masked columns.
IdentifiabilityResult identifiability_check(const Eigen::MatrixXd& Jn,
                                            const ColumnMask& mask);

/// Greedy selection of an independent parameter-column subset from the
/// Jacobian stacked at n_probe seeded random in-limit configurations.
/// Deterministic for a fixed seed.
ColumnMask detect_dependent_columns(const DhChain& c, const ParamVector& params,
                                    int n_probe, std::uint64_t seed);

/// Relative tolerance of the numerical-rank convention used throughout.
inline constexpr double kRankTolerance = 1e-8;

}  // namespace kincal::kin
