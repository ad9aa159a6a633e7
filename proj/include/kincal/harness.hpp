#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kincal/bayesopt.hpp"
#include "kincal/calibration.hpp"
#include "kincal/geom.hpp"
#include "kincal/kinematics.hpp"
#include "kincal/rng.hpp"

namespace kincal::harness {

struct NoiseScales {
    double pos = 0.0;    // isotropic position noise [m]
    double rot = 0.0;    // rotation angle noise [rad]
    double joint = 0.0;  // per-joint encoder noise [rad or m]
};

/// Simulated measurement rig. Holds the chain with the injected parameter
/// errors; commanded joints are executed on that true chain and the resulting
/// pose is reported with seeded measurement noise.
class SimRig : public bo::MeasurementRig {
public:
    SimRig(kin::DhChain chain, kin::ParamVector true_params, NoiseScales noise,
           std::uint64_t seed);

    bo::Measurement command(const bo::Candidate& target) override;

    const kin::ParamVector& true_params() const { return true_params_; }

private:
    kin::DhChain chain_;
    kin::ParamVector true_params_;
    NoiseScales noise_;
    rng::Engine rng_;
};

/// Full experiment description; every constraint of the housed types is
/// re-validated on load with a field-path error message.
struct ExperimentConfig {
    kin::DhChain chain;
    Eigen::VectorXd injected_delta;  // parameter layout, length 4 n_j

    double alpha1 = 0.5;
    double alpha2 = 0.5;
    double gamma1 = 0.1;
    double gamma2 = 0.9;
    std::optional<double> sup_p;  // default: chain reach diameter
    double sup_q = 3.14159265358979323846;

    kernels::ProductKernelParams kernel;
    double sigma_eps = 1e-3;
    double prior_mean = 0.0;

    bo::UcbSchedule ucb;
    int iterations = 20;

    double bound_angle = 2.0;   // half-width of the correction box [rad]
    double bound_length = 0.3;  // half-width of the correction box [m]

    NoiseScales noise;
    std::uint64_t seed = 0;
    bool interleaved_calibration = true;
    int n_probe = 8;  // configurations for dependent-column detection

    /// Normalizer default: twice the summed link extents.
    double effective_sup_p() const;

    bo::ObjectiveWeights objective_weights() const;
    calib::BoxBounds box_bounds() const;
};

/// Parses and validates the JSON config. Throws ConfigError naming the
/// offending field.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parse from an already-loaded JSON text (used by load_config and tests).
ExperimentConfig parse_config(const std::string& json_text);

/// Serializes a config back to the documented schema (the summary echo).
std::string config_to_json(const ExperimentConfig& cfg);

enum class RunMode { Bo, Random, Both };

struct ModeResult {
    std::string mode;  // "bo" | "random"
    std::vector<bo::DesignRecord> records;
    calib::CalibrationResult calibration;
    kin::ColumnMask mask;
    double wall_time_s = 0.0;
};

struct ResultsBundle {
    std::vector<ModeResult> runs;
};

/// Runs the configured experiment, then the final calibration, and writes
/// history_<mode>.csv and summary_<mode>.json into out_dir.
ResultsBundle run_experiment(const ExperimentConfig& cfg, RunMode mode,
                             const std::filesystem::path& out_dir);

struct KernelCheckReport {
    std::vector<double> naive_eigs_beta12;  // expected (-0.0001, 0.0083, 0.0355, 3.9561)
    std::vector<double> naive_eigs_beta1;   // expected (0.4725, 0.6940, 1.1404, 1.6929)
    bool naive_indefinite_detected = false;
    double s3_min_eigenvalue = 0.0;
    double product_min_eigenvalue = 0.0;
    bool s3_suite_ok = false;
    bool product_suite_ok = false;
    bool pass = false;
};

/// Reproduces the indefiniteness counterexample of the naive SE(3) kernel and
/// runs the seeded positive-definiteness suites for the valid kernels.
KernelCheckReport kernel_check(const ExperimentConfig& cfg);

/// Serializes the report (and writes kernel_check.json when out_dir is set).
std::string kernel_check_json(const KernelCheckReport& report);

/// Measurements from a recorded CSV with columns
/// theta_1..theta_nj, qw, qx, qy, qz, px, py, pz (header row optional).
std::vector<calib::PoseMeasurement> load_measurement_csv(
    const std::filesystem::path& path, int num_joints);

/// Offline calibration from a measurement CSV; writes summary_offline.json.
calib::CalibrationResult calibrate_offline(const ExperimentConfig& cfg,
                                           const std::filesystem::path& data_csv,
                                           const std::filesystem::path& out_dir);

}  // namespace kincal::harness
