#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kincal/errors.hpp"
#include "kincal/harness.hpp"

namespace kincal::harness {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

const json& require(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) {
        throw ConfigError(path.empty() ? key : path + "." + key, "missing field");
    }
    return j.at(key);
}

double require_number(const json& j, const std::string& path, const char* key) {
    const json& v = require(j, path, key);
    if (!v.is_number()) {
        throw ConfigError(path.empty() ? key : path + "." + key, "expected a number");
    }
    return v.get<double>();
}

Eigen::VectorXd require_array(const json& j, const std::string& path, const char* key,
                              int expected_size) {
    const std::string full = path.empty() ? key : path + "." + key;
    const json& v = require(j, path, key);
    if (!v.is_array() || static_cast<int>(v.size()) != expected_size) {
        throw ConfigError(full, "expected an array of length " + std::to_string(expected_size));
    }
    Eigen::VectorXd out(expected_size);
    for (int i = 0; i < expected_size; ++i) {
        if (!v[i].is_number()) throw ConfigError(full, "expected numeric entries");
        out[i] = v[i].get<double>();
    }
    return out;
}

geom::Pose parse_pose(const json& j, const std::string& path) {
    const Eigen::VectorXd q = require_array(j, path, "quaternion", 4);
    const Eigen::VectorXd p = require_array(j, path, "position", 3);
    if (std::abs(q.norm() - 1.0) > 1e-6) {
        throw ConfigError(path + ".quaternion", "not unit norm");
    }
    return geom::Pose{geom::UnitQuaternion(q[0], q[1], q[2], q[3]),
                      Eigen::Vector3d(p[0], p[1], p[2])};
}

kin::DhChain parse_chain(const json& j) {
    const json& jc = require(j, "", "chain");
    const json& joints = require(jc, "chain", "joints");
    if (!joints.is_array() || joints.empty()) {
        throw ConfigError("chain.joints", "expected a nonempty array");
    }

    kin::DhChain chain;
    for (std::size_t i = 0; i < joints.size(); ++i) {
        const std::string path = "chain.joints[" + std::to_string(i) + "]";
        const json& jj = joints[i];
        kin::DhJoint joint;
        const std::string kind = require(jj, path, "kind").get<std::string>();
        if (kind == "revolute") {
            joint.kind = kin::JointKind::Revolute;
        } else if (kind == "prismatic") {
            joint.kind = kin::JointKind::Prismatic;
        } else {
            throw ConfigError(path + ".kind", "expected \"revolute\" or \"prismatic\"");
        }
        joint.phi = require_number(jj, path, "phi");
        joint.alpha = require_number(jj, path, "alpha");
        joint.a = require_number(jj, path, "a");
        joint.d = require_number(jj, path, "d");
        const Eigen::VectorXd lim = require_array(jj, path, "limits", 2);
        joint.limits = {lim[0], lim[1]};
        chain.joints.push_back(joint);
    }
    chain.base = parse_pose(require(jc, "chain", "base"), "chain.base");
    chain.tool = parse_pose(require(jc, "chain", "tool"), "chain.tool");
    try {
        chain.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("chain", e.what());
    }
    return chain;
}

json pose_to_json(const geom::Pose& pose) {
    return json{{"quaternion", {pose.q.w(), pose.q.x(), pose.q.y(), pose.q.z()}},
                {"position", {pose.p.x(), pose.p.y(), pose.p.z()}}};
}

}  // namespace

double ExperimentConfig::effective_sup_p() const {
    if (sup_p) return *sup_p;
    double extent = 0.0;
    for (const auto& j : chain.joints) extent += std::abs(j.a) + std::abs(j.d);
    const double diameter = 2.0 * extent;
    return diameter > 0.0 ? diameter : 1.0;
}

bo::ObjectiveWeights ExperimentConfig::objective_weights() const {
    return {alpha1, alpha2, effective_sup_p(), sup_q};
}

calib::BoxBounds ExperimentConfig::box_bounds() const {
    const int n = chain.num_joints();
    Eigen::VectorXd ub(4 * n);
    ub.head(2 * n).setConstant(bound_angle);    // phi, alpha
    ub.tail(2 * n).setConstant(bound_length);   // a, d
    return {-ub, ub};
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }

    ExperimentConfig cfg;
    cfg.chain = parse_chain(j);
    const int nj = cfg.chain.num_joints();

    const json& err = require(j, "", "injected_errors");
    cfg.injected_delta.resize(4 * nj);
    cfg.injected_delta << require_array(err, "injected_errors", "phi", nj),
        require_array(err, "injected_errors", "alpha", nj),
        require_array(err, "injected_errors", "a", nj),
        require_array(err, "injected_errors", "d", nj);

    const json& w = require(j, "", "weights");
    cfg.alpha1 = require_number(w, "weights", "alpha1");
    cfg.alpha2 = require_number(w, "weights", "alpha2");
    cfg.gamma1 = require_number(w, "weights", "gamma1");
    cfg.gamma2 = require_number(w, "weights", "gamma2");
    if (!(cfg.alpha1 > 0.0) || !(cfg.alpha2 > 0.0) ||
        std::abs(cfg.alpha1 + cfg.alpha2 - 1.0) > 1e-12) {
        throw ConfigError("weights.alpha", "alpha1 and alpha2 must be positive and sum to 1");
    }
    if (!(cfg.gamma1 > 0.0) || !(cfg.gamma2 > 0.0) ||
        std::abs(cfg.gamma1 + cfg.gamma2 - 1.0) > 1e-12) {
        throw ConfigError("weights.gamma", "gamma1 and gamma2 must be positive and sum to 1");
    }

    if (j.contains("objective")) {
        const json& obj = j.at("objective");
        if (obj.contains("sup_p")) {
            cfg.sup_p = require_number(obj, "objective", "sup_p");
            if (!(*cfg.sup_p > 0.0)) throw ConfigError("objective.sup_p", "must be > 0");
        }
        if (obj.contains("sup_q")) {
            cfg.sup_q = require_number(obj, "objective", "sup_q");
            if (!(cfg.sup_q > 0.0) || cfg.sup_q > kPi) {
                throw ConfigError("objective.sup_q", "must be in (0, pi]");
            }
        }
    }

    const json& k = require(j, "", "kernel");
    cfg.kernel.s3.kappa = require_number(k, "kernel", "kappa");
    cfg.kernel.s3.sigma = require_number(k, "kernel", "sigma");
    cfg.kernel.s3.series_order = static_cast<int>(require_number(k, "kernel", "series_order"));
    cfg.kernel.se.beta = require_number(k, "kernel", "beta");
    cfg.kernel.se.sigma_f = require_number(k, "kernel", "sigma_f");
    cfg.kernel.se.sigma_n = 0.0;
    cfg.kernel.sigma_s = require_number(k, "kernel", "sigma_s");
    if (!(cfg.kernel.s3.kappa > 0.0)) throw ConfigError("kernel.kappa", "must be > 0");
    if (!(cfg.kernel.s3.sigma > 0.0)) throw ConfigError("kernel.sigma", "must be > 0");
    if (cfg.kernel.s3.series_order < 1) throw ConfigError("kernel.series_order", "must be >= 1");
    if (!(cfg.kernel.se.beta > 0.0)) throw ConfigError("kernel.beta", "must be > 0");
    if (!(cfg.kernel.se.sigma_f > 0.0)) throw ConfigError("kernel.sigma_f", "must be > 0");
    if (!(cfg.kernel.sigma_s > 0.0)) throw ConfigError("kernel.sigma_s", "must be > 0");

    const json& g = require(j, "", "gp");
    cfg.sigma_eps = require_number(g, "gp", "sigma_eps");
    if (cfg.sigma_eps < 0.0) throw ConfigError("gp.sigma_eps", "must be >= 0");
    if (g.contains("prior_mean")) cfg.prior_mean = require_number(g, "gp", "prior_mean");

    const json& u = require(j, "", "ucb");
    const std::string mode = require(u, "ucb", "mode").get<std::string>();
    if (mode == "fixed") {
        cfg.ucb.mode = bo::UcbMode::Fixed;
    } else if (mode == "srinivas") {
        cfg.ucb.mode = bo::UcbMode::Srinivas;
    } else {
        throw ConfigError("ucb.mode", "expected \"fixed\" or \"srinivas\"");
    }
    cfg.ucb.beta_fixed = require_number(u, "ucb", "beta_fixed");
    cfg.ucb.delta_conf = require_number(u, "ucb", "delta_conf");
    cfg.ucb.candidate_count = static_cast<int>(require_number(u, "ucb", "candidate_count"));
    try {
        cfg.ucb.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("ucb", e.what());
    }

    cfg.iterations = static_cast<int>(require_number(j, "", "iterations"));
    if (cfg.iterations < 1) throw ConfigError("iterations", "must be >= 1");

    const json& b = require(j, "", "bounds");
    cfg.bound_angle = require_number(b, "bounds", "angle_rad");
    cfg.bound_length = require_number(b, "bounds", "length_m");
    if (!(cfg.bound_angle > 0.0)) throw ConfigError("bounds.angle_rad", "must be > 0");
    if (!(cfg.bound_length > 0.0)) throw ConfigError("bounds.length_m", "must be > 0");

    const json& noise = require(j, "", "noise");
    cfg.noise.pos = require_number(noise, "noise", "pos_m");
    cfg.noise.rot = require_number(noise, "noise", "rot_rad");
    cfg.noise.joint = require_number(noise, "noise", "joint_rad");
    if (cfg.noise.pos < 0.0) throw ConfigError("noise.pos_m", "must be >= 0");
    if (cfg.noise.rot < 0.0) throw ConfigError("noise.rot_rad", "must be >= 0");
    if (cfg.noise.joint < 0.0) throw ConfigError("noise.joint_rad", "must be >= 0");

    const json& seed = require(j, "", "seed");
    if (!seed.is_number_unsigned()) throw ConfigError("seed", "expected a nonnegative integer");
    cfg.seed = seed.get<std::uint64_t>();

    const json& il = require(j, "", "interleaved_calibration");
    if (!il.is_boolean()) throw ConfigError("interleaved_calibration", "expected a boolean");
    cfg.interleaved_calibration = il.get<bool>();

    if (j.contains("identifiability")) {
        cfg.n_probe = static_cast<int>(
            require_number(j.at("identifiability"), "identifiability", "n_probe"));
        if (7 * cfg.n_probe < 4 * nj) {
            throw ConfigError("identifiability.n_probe",
                              "n_probe * 7 must cover the 4 n_j parameters");
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("<file>", "cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    const int nj = cfg.chain.num_joints();
    json joints = json::array();
    for (const auto& joint : cfg.chain.joints) {
        joints.push_back(
            {{"kind", joint.kind == kin::JointKind::Revolute ? "revolute" : "prismatic"},
             {"phi", joint.phi},
             {"alpha", joint.alpha},
             {"a", joint.a},
             {"d", joint.d},
             {"limits", {joint.limits.lo, joint.limits.hi}}});
    }
    const auto slice = [&](int offset) {
        json arr = json::array();
        for (int i = 0; i < nj; ++i) arr.push_back(cfg.injected_delta[offset + i]);
        return arr;
    };
    json j{
        {"seed", cfg.seed},
        {"iterations", cfg.iterations},
        {"interleaved_calibration", cfg.interleaved_calibration},
        {"chain",
         {{"joints", joints},
          {"base", pose_to_json(cfg.chain.base)},
          {"tool", pose_to_json(cfg.chain.tool)}}},
        {"injected_errors",
         {{"phi", slice(0)}, {"alpha", slice(nj)}, {"a", slice(2 * nj)}, {"d", slice(3 * nj)}}},
        {"weights",
         {{"alpha1", cfg.alpha1}, {"alpha2", cfg.alpha2}, {"gamma1", cfg.gamma1}, {"gamma2", cfg.gamma2}}},
        {"objective", {{"sup_p", cfg.effective_sup_p()}, {"sup_q", cfg.sup_q}}},
        {"kernel",
         {{"kappa", cfg.kernel.s3.kappa},
          {"sigma", cfg.kernel.s3.sigma},
          {"series_order", cfg.kernel.s3.series_order},
          {"beta", cfg.kernel.se.beta},
          {"sigma_f", cfg.kernel.se.sigma_f},
          {"sigma_s", cfg.kernel.sigma_s}}},
        {"gp", {{"sigma_eps", cfg.sigma_eps}, {"prior_mean", cfg.prior_mean}}},
        {"ucb",
         {{"mode", cfg.ucb.mode == bo::UcbMode::Fixed ? "fixed" : "srinivas"},
          {"beta_fixed", cfg.ucb.beta_fixed},
          {"delta_conf", cfg.ucb.delta_conf},
          {"candidate_count", cfg.ucb.candidate_count}}},
        {"bounds", {{"angle_rad", cfg.bound_angle}, {"length_m", cfg.bound_length}}},
        {"noise",
         {{"pos_m", cfg.noise.pos}, {"rot_rad", cfg.noise.rot}, {"joint_rad", cfg.noise.joint}}},
        {"identifiability", {{"n_probe", cfg.n_probe}}},
    };
    return j.dump(2);
}

}  // namespace kincal::harness
