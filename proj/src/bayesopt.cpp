#include "kincal/bayesopt.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "kincal/errors.hpp"
#include "kincal/rng.hpp"

namespace kincal::bo {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Stream tags for deriving independent RNG streams from the run seed.
constexpr std::uint64_t kSelectionStream = 2;
constexpr std::uint64_t kCandidateStreamBase = 1000;

enum class SelectionPolicy { Ucb, Random };

std::vector<DesignRecord> run_loop(MeasurementRig& rig, const kin::DhChain& c,
                                   const kin::ParamVector& psi, int n,
                                   const DesignConfig& cfg, SelectionPolicy policy) {
    if (n < 1) throw std::invalid_argument("run_design: iteration count must be >= 1");
    cfg.weights.validate();
    cfg.ucb.validate();
    c.validate();

    gp::GpModel model(cfg.kernel, cfg.sigma_eps, cfg.prior_mean);
    rng::Engine selector(rng::derive_seed(cfg.seed, kSelectionStream));

    kin::ParamVector working = psi;
    std::vector<calib::PoseMeasurement> collected;
    std::vector<DesignRecord> records;
    records.reserve(n);

    for (int k = 1; k <= n; ++k) {
        const auto candidates = generate_candidates(
            c, working, cfg.ucb.candidate_count,
            rng::derive_seed(cfg.seed, kCandidateStreamBase + static_cast<std::uint64_t>(k)));

        std::size_t pick = 0;
        if (policy == SelectionPolicy::Ucb) {
            pick = select_next(model, candidates, k, cfg.ucb);
        } else {
            pick = selector.index(candidates.size());
        }
        const Candidate& target = candidates[pick];
        const gp::Posterior stats = model.posterior(target.pose);

        Measurement meas;
        try {
            meas = rig.command(target);
        } catch (const std::exception& e) {
            throw std::runtime_error("run_design: rig failure at iteration " +
                                     std::to_string(k) + ": " + e.what());
        }

        const geom::Pose computed = kin::forward_kinematics(c, working, meas.joints);
        const ObjectiveValue obj = evaluate_objective(meas.pose, computed, cfg.weights);
        model = model.add_observation(meas.pose, obj.f);
        collected.push_back({meas.joints, meas.pose});

        DesignRecord record;
        record.iteration = k;
        record.target = target.pose;
        record.measured = meas.pose;
        record.computed = computed;
        record.joints = meas.joints;
        record.objective = obj.f;
        record.f_p = obj.f_p;
        record.f_q = obj.f_q;
        record.clipped = obj.clipped;
        record.ucb_value = ucb(stats.mean, stats.variance, k, cfg.ucb);
        record.gp_mean = stats.mean;
        record.gp_variance = stats.variance;
        records.push_back(std::move(record));

        if (cfg.interleaved_calibration) {
            const int m = kin::mask_count(cfg.mask);
            if (7 * static_cast<int>(collected.size()) >= m) {
                std::vector<kin::JointVector> thetas;
                thetas.reserve(collected.size());
                for (const auto& pm : collected) thetas.push_back(pm.theta);
                const auto check = kin::identifiability_check(
                    kin::stacked_jacobian(c, psi, thetas), cfg.mask);
                if (check.ok) {
                    calib::CalibrationProblem problem{c, psi, collected, cfg.bounds,
                                                      cfg.mask};
                    try {
                        working = calib::calibrate(problem, cfg.calib_max_iters,
                                                   cfg.calib_tol)
                                      .psi_star;
                        // The objective is defined against the working
                        // parameters, so past observations go stale whenever
                        // they change; rebuild the GP on re-scored values.
                        gp::GpModel refreshed(cfg.kernel, cfg.sigma_eps, cfg.prior_mean);
                        for (const auto& pm : collected) {
                            const geom::Pose re =
                                kin::forward_kinematics(c, working, pm.theta);
                            refreshed = refreshed.add_observation(
                                pm.measured,
                                evaluate_objective(pm.measured, re, cfg.weights).f);
                        }
                        model = std::move(refreshed);
                    } catch (const NonConvergenceError&) {
                        // Keep the previous estimate; later data usually fixes it.
                    }
                }
            }
        }
    }
    return records;
}

}  // namespace

void ObjectiveWeights::validate() const {
    if (!(alpha1 > 0.0) || !(alpha2 > 0.0)) {
        throw std::invalid_argument("ObjectiveWeights: alpha1 and alpha2 must be positive");
    }
    if (std::abs(alpha1 + alpha2 - 1.0) > 1e-12) {
        throw std::invalid_argument("ObjectiveWeights: alpha1 + alpha2 must equal 1");
    }
    if (!(sup_p > 0.0)) {
        throw std::invalid_argument("ObjectiveWeights: sup_p must be positive");
    }
    if (!(sup_q > 0.0) || sup_q > kPi) {
        throw std::invalid_argument("ObjectiveWeights: sup_q must be in (0, pi]");
    }
}

void UcbSchedule::validate() const {
    if (candidate_count < 1) {
        throw std::invalid_argument("UcbSchedule: candidate_count must be >= 1");
    }
    if (mode == UcbMode::Fixed && !(beta_fixed > 0.0)) {
        throw std::invalid_argument("UcbSchedule: beta_fixed must be positive");
    }
    if (mode == UcbMode::Srinivas && !(delta_conf > 0.0 && delta_conf < 1.0)) {
        throw std::invalid_argument("UcbSchedule: delta_conf must be in (0, 1)");
    }
}

ObjectiveValue evaluate_objective(const geom::Pose& measured, const geom::Pose& computed,
                                  const ObjectiveWeights& w) {
    const double f_p = (measured.p - computed.p).norm();
    const double f_q = geom::geodesic_distance_s3(measured.q, computed.q);

    double term_p = f_p / w.sup_p;
    double term_q = f_q / w.sup_q;
    const bool clipped = term_p > 1.0 || term_q > 1.0;
    term_p = std::min(term_p, 1.0);
    term_q = std::min(term_q, 1.0);

    // + 0.0 turns the -0.0 of perfect agreement into a plain zero.
    const double f = -(w.alpha1 * term_p + w.alpha2 * term_q) + 0.0;
    return {f, f_p, f_q, clipped};
}

double ucb_beta(int k, const UcbSchedule& s) {
    if (s.mode == UcbMode::Fixed) {
        return s.beta_fixed;
    }
    const double kk = static_cast<double>(k);
    return 2.0 * std::log(static_cast<double>(s.candidate_count) * kk * kk * kPi * kPi /
                          (6.0 * s.delta_conf));
}

double ucb(double mean, double variance, int k, const UcbSchedule& s) {
    if (variance < 0.0) {
        throw std::invalid_argument("ucb: negative variance");
    }
    return mean + std::sqrt(ucb_beta(k, s)) * std::sqrt(variance);
}

std::vector<Candidate> generate_candidates(const kin::DhChain& c,
                                           const kin::ParamVector& params, int count,
                                           std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("generate_candidates: count must be >= 1");
    rng::Engine engine(seed);
    std::vector<Candidate> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        kin::JointVector theta(c.num_joints());
        for (int j = 0; j < c.num_joints(); ++j) {
            theta[j] = engine.uniform(c.joints[j].limits.lo, c.joints[j].limits.hi);
        }
        out.push_back({kin::forward_kinematics(c, params, theta), theta});
    }
    return out;
}

std::size_t select_next(const gp::GpModel& m, const std::vector<Candidate>& candidates,
                        int k, const UcbSchedule& s) {
    if (candidates.empty()) {
        throw std::invalid_argument("select_next: empty candidate list");
    }
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const gp::Posterior post = m.posterior(candidates[i].pose);
        const double value = ucb(post.mean, post.variance, k, s);
        if (value > best_value) {
            best_value = value;
            best = i;
        }
    }
    return best;
}

std::vector<DesignRecord> run_design(MeasurementRig& rig, const kin::DhChain& c,
                                     const kin::ParamVector& psi, int n,
                                     const DesignConfig& cfg) {
    return run_loop(rig, c, psi, n, cfg, SelectionPolicy::Ucb);
}

std::vector<DesignRecord> run_random_baseline(MeasurementRig& rig, const kin::DhChain& c,
                                              const kin::ParamVector& psi, int n,
                                              const DesignConfig& cfg) {
    return run_loop(rig, c, psi, n, cfg, SelectionPolicy::Random);
}

}  // namespace kincal::bo
