#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "kincal/errors.hpp"
#include "kincal/harness.hpp"

namespace kincal::harness {

namespace {

using nlohmann::json;

// Stream tags; candidate/selection tags live in the design loop.
constexpr std::uint64_t kRigStream = 1;
constexpr std::uint64_t kMaskProbeStream = 3;

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string timestamp_utc() {
    const std::time_t now = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

bo::DesignConfig make_design_config(const ExperimentConfig& cfg,
                                    const kin::ColumnMask& mask) {
    bo::DesignConfig dc;
    dc.weights = cfg.objective_weights();
    dc.ucb = cfg.ucb;
    dc.kernel = cfg.kernel;
    dc.sigma_eps = cfg.sigma_eps;
    dc.prior_mean = cfg.prior_mean;
    dc.seed = cfg.seed;
    dc.interleaved_calibration = cfg.interleaved_calibration;
    dc.bounds = cfg.box_bounds();
    dc.mask = mask;
    return dc;
}

void write_history_csv(const std::filesystem::path& path, const std::string& mode,
                       const std::vector<bo::DesignRecord>& records, int num_joints) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());

    out << "# kincal history generated " << timestamp_utc() << "\n";
    out << "iter,mode,f,f_p_m,f_q_rad,qw,qx,qy,qz,px,py,pz";
    for (int i = 1; i <= num_joints; ++i) out << ",theta_" << i;
    out << ",ucb_value,gp_mean,gp_var\n";

    for (const auto& r : records) {
        out << r.iteration << ',' << mode << ',' << fmt_double(r.objective) << ','
            << fmt_double(r.f_p) << ',' << fmt_double(r.f_q) << ','
            << fmt_double(r.measured.q.w()) << ',' << fmt_double(r.measured.q.x()) << ','
            << fmt_double(r.measured.q.y()) << ',' << fmt_double(r.measured.q.z()) << ','
            << fmt_double(r.measured.p.x()) << ',' << fmt_double(r.measured.p.y()) << ','
            << fmt_double(r.measured.p.z());
        for (int i = 0; i < r.joints.size(); ++i) out << ',' << fmt_double(r.joints[i]);
        out << ',' << fmt_double(r.ucb_value) << ',' << fmt_double(r.gp_mean) << ','
            << fmt_double(r.gp_variance) << '\n';
    }
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

void write_summary_json(const std::filesystem::path& path, const ExperimentConfig& cfg,
                        const ModeResult& result, double final_objective) {
    Eigen::VectorXd abs_error =
        (result.calibration.delta - cfg.injected_delta).cwiseAbs();
    json mask = json::array();
    for (bool b : result.mask) mask.push_back(b);

    json j{
        {"mode", result.mode},
        {"generated_at", timestamp_utc()},
        {"config_echo", json::parse(config_to_json(cfg))},
        {"final_objective", final_objective},
        {"recovered_delta", vector_to_json(result.calibration.delta)},
        {"injected_delta", vector_to_json(cfg.injected_delta)},
        {"per_param_abs_error", vector_to_json(abs_error)},
        {"identifiable_mask", mask},
        {"iterations", cfg.iterations},
        {"wall_time_s", result.wall_time_s},
    };
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace

ResultsBundle run_experiment(const ExperimentConfig& cfg, RunMode mode,
                             const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const kin::ParamVector nominal = cfg.chain.nominal_params();
    const kin::ColumnMask mask = kin::detect_dependent_columns(
        cfg.chain, nominal, cfg.n_probe, rng::derive_seed(cfg.seed, kMaskProbeStream));
    const bo::DesignConfig design = make_design_config(cfg, mask);

    std::vector<std::string> modes;
    if (mode == RunMode::Bo || mode == RunMode::Both) modes.push_back("bo");
    if (mode == RunMode::Random || mode == RunMode::Both) modes.push_back("random");

    ResultsBundle bundle;
    for (const std::string& m : modes) {
        const auto start = std::chrono::steady_clock::now();

        SimRig rig(cfg.chain, nominal + cfg.injected_delta, cfg.noise,
                   rng::derive_seed(cfg.seed, kRigStream));
        std::vector<bo::DesignRecord> records =
            m == "bo" ? bo::run_design(rig, cfg.chain, nominal, cfg.iterations, design)
                      : bo::run_random_baseline(rig, cfg.chain, nominal, cfg.iterations,
                                                design);

        std::vector<calib::PoseMeasurement> measurements;
        measurements.reserve(records.size());
        for (const auto& r : records) measurements.push_back({r.joints, r.measured});
        calib::CalibrationProblem problem{cfg.chain, nominal, measurements,
                                          cfg.box_bounds(), mask};
        ModeResult result;
        result.mode = m;
        result.mask = mask;
        result.calibration = calib::calibrate(problem);
        result.records = std::move(records);
        result.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();

        write_history_csv(out_dir / ("history_" + m + ".csv"), m, result.records,
                          cfg.chain.num_joints());
        write_summary_json(out_dir / ("summary_" + m + ".json"), cfg, result,
                           result.records.back().objective);
        bundle.runs.push_back(std::move(result));
    }
    return bundle;
}

KernelCheckReport kernel_check(const ExperimentConfig& cfg) {
    KernelCheckReport report;
    const geom::Se3Metric metric(cfg.gamma1, cfg.gamma2);

    // The four-rotation counterexample: identical positions, quaternions
    // 1, i, (1+i)/sqrt(2), (1+j)/sqrt(2).
    const double s = 1.0 / std::sqrt(2.0);
    const std::vector<geom::Pose> fixture = {
        {geom::UnitQuaternion(1, 0, 0, 0), Eigen::Vector3d::Zero()},
        {geom::UnitQuaternion(0, 1, 0, 0), Eigen::Vector3d::Zero()},
        {geom::UnitQuaternion(s, s, 0, 0), Eigen::Vector3d::Zero()},
        {geom::UnitQuaternion(s, 0, s, 0), Eigen::Vector3d::Zero()},
    };
    for (double beta : {12.0, 1.0}) {
        const Eigen::MatrixXd K =
            kernels::gram(fixture, [&](const geom::Pose& a, const geom::Pose& b) {
                return kernels::k_naive_se3(a, b, beta, metric);
            });
        const Eigen::VectorXd eigs =
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues();
        auto& out = beta == 12.0 ? report.naive_eigs_beta12 : report.naive_eigs_beta1;
        out.assign(eigs.data(), eigs.data() + eigs.size());
    }
    report.naive_indefinite_detected = report.naive_eigs_beta12.front() < -1e-8;

    // Seeded validity suites per Definition-1: Gram matrices of 10 random
    // points, 100 seeds, at kappas spanning the useful range.
    report.s3_min_eigenvalue = 1e300;
    report.product_min_eigenvalue = 1e300;
    for (double kappa : {0.1, 0.5, 1.0, 2.0}) {
        kernels::S3KernelParams s3{kappa, cfg.kernel.s3.sigma, cfg.kernel.s3.series_order};
        kernels::ProductKernelParams product{s3, cfg.kernel.se, cfg.kernel.sigma_s};
        const kernels::S3Series series(s3);
        const kernels::ProductKernel pk(product);
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            rng::Engine engine(rng::derive_seed(0xC0FFEE, 1000 * seed +
                                                          static_cast<std::uint64_t>(kappa * 10)));
            std::vector<geom::Pose> poses;
            std::vector<geom::UnitQuaternion> quats;
            for (int i = 0; i < 10; ++i) {
                geom::UnitQuaternion q(engine.gaussian(), engine.gaussian(),
                                       engine.gaussian(), engine.gaussian());
                Eigen::Vector3d p(engine.uniform(-1, 1), engine.uniform(-1, 1),
                                  engine.uniform(-1, 1));
                quats.push_back(q);
                poses.push_back({q, p});
            }
            const Eigen::MatrixXd Ks = kernels::gram(quats, series);
            const Eigen::MatrixXd Kp = kernels::gram(poses, pk);
            report.s3_min_eigenvalue = std::min(
                report.s3_min_eigenvalue,
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Ks).eigenvalues().minCoeff());
            report.product_min_eigenvalue = std::min(
                report.product_min_eigenvalue,
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Kp).eigenvalues().minCoeff());
        }
    }
    report.s3_suite_ok = report.s3_min_eigenvalue >= -1e-8;
    report.product_suite_ok = report.product_min_eigenvalue >= -1e-8;

    const std::vector<double> expected12 = {-0.0001, 0.0083, 0.0355, 3.9561};
    const std::vector<double> expected1 = {0.4725, 0.6940, 1.1404, 1.6929};
    bool eigs_ok = true;
    for (int i = 0; i < 4; ++i) {
        eigs_ok = eigs_ok && std::abs(report.naive_eigs_beta12[i] - expected12[i]) < 1e-3 &&
                  std::abs(report.naive_eigs_beta1[i] - expected1[i]) < 1e-3;
    }
    report.pass = eigs_ok && report.naive_indefinite_detected && report.s3_suite_ok &&
                  report.product_suite_ok;
    return report;
}

std::string kernel_check_json(const KernelCheckReport& report) {
    json j{
        {"naive_se3_eigenvalues_beta_12", report.naive_eigs_beta12},
        {"naive_se3_eigenvalues_beta_1", report.naive_eigs_beta1},
        {"naive_se3_indefinite_detected", report.naive_indefinite_detected},
        {"s3_suite_min_eigenvalue", report.s3_min_eigenvalue},
        {"product_suite_min_eigenvalue", report.product_min_eigenvalue},
        {"s3_suite_ok", report.s3_suite_ok},
        {"product_suite_ok", report.product_suite_ok},
        {"pass", report.pass},
    };
    return j.dump(2);
}

std::vector<calib::PoseMeasurement> load_measurement_csv(
    const std::filesystem::path& path, int num_joints) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    std::vector<calib::PoseMeasurement> out;
    std::string line;
    const int expected = num_joints + 7;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream row(line);
        std::vector<double> values;
        std::string cell;
        bool numeric = true;
        while (std::getline(row, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) continue;  // header row
        if (static_cast<int>(values.size()) != expected) {
            throw std::runtime_error("measurement CSV row has " +
                                     std::to_string(values.size()) + " fields, expected " +
                                     std::to_string(expected));
        }
        kin::JointVector theta(num_joints);
        for (int i = 0; i < num_joints; ++i) theta[i] = values[i];
        geom::UnitQuaternion q(values[num_joints], values[num_joints + 1],
                               values[num_joints + 2], values[num_joints + 3]);
        Eigen::Vector3d p(values[num_joints + 4], values[num_joints + 5],
                          values[num_joints + 6]);
        out.push_back({theta, geom::Pose{q, p}});
    }
    if (out.empty()) throw std::runtime_error("measurement CSV has no data rows");
    return out;
}

calib::CalibrationResult calibrate_offline(const ExperimentConfig& cfg,
                                           const std::filesystem::path& data_csv,
                                           const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto start = std::chrono::steady_clock::now();

    const kin::ParamVector nominal = cfg.chain.nominal_params();
    const auto measurements = load_measurement_csv(data_csv, cfg.chain.num_joints());
    const kin::ColumnMask mask = kin::detect_dependent_columns(
        cfg.chain, nominal, cfg.n_probe, rng::derive_seed(cfg.seed, kMaskProbeStream));

    calib::CalibrationProblem problem{cfg.chain, nominal, measurements, cfg.box_bounds(),
                                      mask};
    ModeResult result;
    result.mode = "offline";
    result.mask = mask;
    result.calibration = calib::calibrate(problem);
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    // The post-fit quality report: mean objective across the measurement set.
    const bo::ObjectiveWeights weights = cfg.objective_weights();
    double mean_objective = 0.0;
    for (const auto& meas : measurements) {
        const geom::Pose computed =
            kin::forward_kinematics(cfg.chain, result.calibration.psi_star, meas.theta);
        mean_objective += bo::objective(meas.measured, computed, weights);
    }
    mean_objective /= static_cast<double>(measurements.size());

    write_summary_json(out_dir / "summary_offline.json", cfg, result, mean_objective);
    return result.calibration;
}

}  // namespace kincal::harness
