#include <doctest.h>

#include <cmath>

#include "kincal/bayesopt.hpp"
#include "kincal/harness.hpp"
#include "kincal/rng.hpp"

using namespace kincal;
using geom::Pose;
using geom::UnitQuaternion;

namespace {

constexpr double kPi = 3.14159265358979323846;

kin::DhChain small_chain() {
    kin::DhChain chain;
    chain.joints = {
        {kin::JointKind::Revolute, 0, -kPi / 2, 0.1, 0.3, {-2.0, 2.0}},
        {kin::JointKind::Revolute, 0, kPi / 2, 0.0, 0.0, {-2.0, 2.0}},
        {kin::JointKind::Revolute, 0, 0, 0.2, 0.1, {-2.0, 2.0}},
    };
    return chain;
}

bo::DesignConfig design_config(const kin::DhChain& chain, std::uint64_t seed) {
    bo::DesignConfig cfg;
    cfg.weights = {0.5, 0.5, 1.0, kPi};
    cfg.ucb = {bo::UcbMode::Fixed, 4.0, 0.1, 200};
    cfg.kernel.s3 = {1.0, 1.0, 128};
    cfg.kernel.se = {1.0, 1.0, 0.0};
    cfg.sigma_eps = 1e-3;
    cfg.seed = seed;
    const int n = chain.num_params();
    cfg.bounds.ub = Eigen::VectorXd::Constant(n, 2.0);
    cfg.bounds.ub.tail(n / 2).setConstant(0.3);
    cfg.bounds.lb = -cfg.bounds.ub;
    cfg.mask = kin::ColumnMask(n, true);
    return cfg;
}

}  // namespace

TEST_CASE("objective reference values") {
    const bo::ObjectiveWeights w{0.5, 0.5, 1.0, kPi};
    rng::Engine e(1);
    const Pose x{UnitQuaternion(e.gaussian(), e.gaussian(), e.gaussian(), e.gaussian()),
                 Eigen::Vector3d(0.3, -0.2, 0.5)};
    CHECK(bo::objective(x, x, w) == 0.0);

    // |dp| = 0.1, d_q = pi/2 -> -(0.05 + 0.25)
    Pose measured = x;
    measured.p += Eigen::Vector3d(0.1, 0, 0);
    const double s = 1 / std::sqrt(2.0);
    measured.q = geom::quat_multiply(UnitQuaternion(s, s, 0, 0), x.q);
    CHECK(bo::objective(measured, x, w) == doctest::Approx(-0.30).epsilon(1e-12));

    // saturating both terms gives exactly -1
    Pose far = x;
    far.p += Eigen::Vector3d(5.0, 0, 0);
    far.q = geom::quat_multiply(UnitQuaternion(0, 1, 0, 0), x.q);
    const auto value = bo::evaluate_objective(far, x, w);
    CHECK(value.f == doctest::Approx(-1.0));
    CHECK(value.clipped);

    // sign-flipped rotation agreement still scores zero
    Pose flipped = x;
    flipped.q = x.q.negated();
    CHECK(bo::objective(flipped, x, w) == 0.0);
}

TEST_CASE("objective stays within [-1, 0] on random pose pairs") {
    const bo::ObjectiveWeights w{0.3, 0.7, 0.5, kPi / 2};
    rng::Engine e(2);
    for (int i = 0; i < 200; ++i) {
        const Pose a{UnitQuaternion(e.gaussian(), e.gaussian(), e.gaussian(), e.gaussian()),
                     Eigen::Vector3d(e.uniform(-3, 3), e.uniform(-3, 3), e.uniform(-3, 3))};
        const Pose b{UnitQuaternion(e.gaussian(), e.gaussian(), e.gaussian(), e.gaussian()),
                     Eigen::Vector3d(e.uniform(-3, 3), e.uniform(-3, 3), e.uniform(-3, 3))};
        const double f = bo::objective(a, b, w);
        CHECK(f <= 0.0);
        CHECK(f >= -1.0);
    }
}

TEST_CASE("objective weight validation") {
    CHECK_THROWS_AS(bo::ObjectiveWeights({0.5, 0.4, 1.0, kPi}).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(bo::ObjectiveWeights({0.5, 0.5, 0.0, kPi}).validate(),
                    std::invalid_argument);
    CHECK_THROWS_AS(bo::ObjectiveWeights({0.5, 0.5, 1.0, 4.0}).validate(),
                    std::invalid_argument);
}

TEST_CASE("ucb reference values") {
    bo::UcbSchedule fixed{bo::UcbMode::Fixed, 4.0, 0.1, 1000};
    CHECK(bo::ucb(0.3, 0.0, 1, fixed) == doctest::Approx(0.3));
    CHECK(bo::ucb(0.0, 1.0, 7, fixed) == doctest::Approx(2.0));
    CHECK_THROWS_AS(bo::ucb(0.0, -1.0, 1, fixed), std::invalid_argument);

    bo::UcbSchedule srinivas{bo::UcbMode::Srinivas, 4.0, 0.1, 1000};
    const double beta1 = 2.0 * std::log(1000.0 * 1.0 * kPi * kPi / (6.0 * 0.1));
    CHECK(beta1 == doctest::Approx(19.42).epsilon(1e-3));
    CHECK(bo::ucb_beta(1, srinivas) == doctest::Approx(beta1).epsilon(1e-12));
    // beta grows with the iteration
    CHECK(bo::ucb_beta(5, srinivas) > bo::ucb_beta(2, srinivas));
}

TEST_CASE("generate_candidates is reachable, in-limit, and deterministic") {
    const kin::DhChain chain = small_chain();
    const kin::ParamVector params = chain.nominal_params();
    const auto candidates = bo::generate_candidates(chain, params, 100, 99);
    CHECK(candidates.size() == 100);
    for (const auto& c : candidates) {
        for (int j = 0; j < chain.num_joints(); ++j) {
            CHECK(c.joints[j] >= chain.joints[j].limits.lo);
            CHECK(c.joints[j] <= chain.joints[j].limits.hi);
        }
        const Pose pose = kin::forward_kinematics(chain, params, c.joints);
        CHECK((pose.p - c.pose.p).norm() <= 1e-12);
        CHECK(pose.q.equiv_rotation(c.pose.q, 1e-12));
    }

    const auto again = bo::generate_candidates(chain, params, 100, 99);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        CHECK((candidates[i].joints - again[i].joints).norm() == 0.0);
    }
    const auto other = bo::generate_candidates(chain, params, 100, 100);
    CHECK((candidates[0].joints - other[0].joints).norm() != 0.0);
}

TEST_CASE("select_next prefers high variance on an empty model and breaks ties low") {
    const kin::DhChain chain = small_chain();
    const auto candidates = bo::generate_candidates(chain, chain.nominal_params(), 50, 7);
    bo::DesignConfig cfg = design_config(chain, 7);
    gp::GpModel model(cfg.kernel, cfg.sigma_eps);

    // empty model: all means and variances equal, lowest index wins
    CHECK(bo::select_next(model, candidates, 1, cfg.ucb) == 0);

    const std::vector<bo::Candidate> single = {candidates[3]};
    CHECK(bo::select_next(model, single, 1, cfg.ucb) == 0);

    // after observing candidate 0, some other candidate must win
    model = model.add_observation(candidates[0].pose, -0.5);
    CHECK(bo::select_next(model, candidates, 2, cfg.ucb) != 0);

    CHECK_THROWS_AS(bo::select_next(model, {}, 1, cfg.ucb), std::invalid_argument);
}

TEST_CASE("select_next is invariant to shifting data and prior together") {
    const kin::DhChain chain = small_chain();
    const auto candidates = bo::generate_candidates(chain, chain.nominal_params(), 80, 13);
    bo::DesignConfig cfg = design_config(chain, 13);

    rng::Engine e(14);
    const double shift = 0.37;
    gp::GpModel base(cfg.kernel, cfg.sigma_eps, 0.0);
    gp::GpModel shifted(cfg.kernel, cfg.sigma_eps, shift);
    for (int i = 0; i < 8; ++i) {
        const auto& c = candidates[static_cast<std::size_t>(e.uniform(0, 79))];
        const double y = e.uniform(-1, 0);
        base = base.add_observation(c.pose, y);
        shifted = shifted.add_observation(c.pose, y + shift);
    }
    for (int k = 1; k <= 3; ++k) {
        CHECK(bo::select_next(base, candidates, k, cfg.ucb) ==
              bo::select_next(shifted, candidates, k, cfg.ucb));
    }
}

TEST_CASE("select_next is permutation equivariant") {
    const kin::DhChain chain = small_chain();
    auto candidates = bo::generate_candidates(chain, chain.nominal_params(), 40, 21);
    bo::DesignConfig cfg = design_config(chain, 21);
    gp::GpModel model(cfg.kernel, cfg.sigma_eps);
    rng::Engine e(22);
    for (int i = 0; i < 5; ++i) {
        model = model.add_observation(candidates[i].pose, e.uniform(-1, 0));
    }

    const std::size_t pick = bo::select_next(model, candidates, 2, cfg.ucb);
    std::vector<bo::Candidate> rotated(candidates.begin() + 10, candidates.end());
    rotated.insert(rotated.end(), candidates.begin(), candidates.begin() + 10);
    const std::size_t rotated_pick = bo::select_next(model, rotated, 2, cfg.ucb);
    CHECK((rotated_pick + 10) % candidates.size() == pick);
}

TEST_CASE("run_design with a perfect rig keeps the objective at zero") {
    const kin::DhChain chain = small_chain();
    const kin::ParamVector nominal = chain.nominal_params();
    bo::DesignConfig cfg = design_config(chain, 31);

    harness::SimRig rig(chain, nominal, {0, 0, 0}, 5);
    const auto records = bo::run_design(rig, chain, nominal, 6, cfg);
    REQUIRE(records.size() == 6);
    for (const auto& r : records) {
        CHECK(r.objective == 0.0);
        CHECK(r.f_p == 0.0);
        CHECK(r.f_q == 0.0);
        // GP trained on zeros keeps a zero posterior mean
        CHECK(std::abs(r.gp_mean) <= 1e-10);
    }
}

TEST_CASE("run_design history is identical for identical seeds") {
    const kin::DhChain chain = small_chain();
    const kin::ParamVector nominal = chain.nominal_params();
    kin::ParamVector truth = nominal;
    truth[2] += 0.2;  // phi_3 error
    bo::DesignConfig cfg = design_config(chain, 47);

    harness::SimRig rig_a(chain, truth, {1e-4, 1e-4, 0}, 6);
    harness::SimRig rig_b(chain, truth, {1e-4, 1e-4, 0}, 6);
    const auto a = bo::run_design(rig_a, chain, nominal, 5, cfg);
    const auto b = bo::run_design(rig_b, chain, nominal, 5, cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].objective == b[i].objective);
        CHECK((a[i].joints - b[i].joints).norm() == 0.0);
        CHECK(a[i].ucb_value == b[i].ucb_value);
    }
}

TEST_CASE("random baseline shares the record format and is deterministic") {
    const kin::DhChain chain = small_chain();
    const kin::ParamVector nominal = chain.nominal_params();
    bo::DesignConfig cfg = design_config(chain, 53);

    harness::SimRig rig_a(chain, nominal, {0, 0, 0}, 7);
    const auto a = bo::run_random_baseline(rig_a, chain, nominal, 5, cfg);
    REQUIRE(a.size() == 5);
    for (const auto& r : a) CHECK(r.objective == 0.0);

    harness::SimRig rig_b(chain, nominal, {0, 0, 0}, 7);
    const auto b = bo::run_random_baseline(rig_b, chain, nominal, 5, cfg);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK((a[i].joints - b[i].joints).norm() == 0.0);
    }
}

TEST_CASE("interleaved calibration drives the objective toward zero without noise") {
    const kin::DhChain chain = small_chain();
    const kin::ParamVector nominal = chain.nominal_params();
    kin::ParamVector truth = nominal;
    truth[0] += 0.15;   // phi_1
    truth[8] += 0.05;   // a_3
    bo::DesignConfig cfg = design_config(chain, 61);
    cfg.mask = kin::detect_dependent_columns(chain, nominal, 6, 71);

    harness::SimRig rig(chain, truth, {0, 0, 0}, 8);
    const auto records = bo::run_design(rig, chain, nominal, 10, cfg);
    // once enough identifiable data has arrived, the working parameters match
    // the truth and the objective collapses to ~0
    const double final_f = std::abs(records.back().objective);
    CHECK(final_f <= 1e-9);
    // the final objective ties the best of the run
    double best = 1e300;
    for (const auto& r : records) best = std::min(best, std::abs(r.objective));
    CHECK(final_f <= best + 1e-9);
}

TEST_CASE("rig errors carry iteration context") {
    struct FailingRig : bo::MeasurementRig {
        bo::Measurement command(const bo::Candidate&) override {
            throw std::runtime_error("actuator fault");
        }
    };
    const kin::DhChain chain = small_chain();
    FailingRig rig;
    bo::DesignConfig cfg = design_config(chain, 67);
    try {
        bo::run_design(rig, chain, chain.nominal_params(), 3, cfg);
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        CHECK(what.find("iteration 1") != std::string::npos);
        CHECK(what.find("actuator fault") != std::string::npos);
    }
}
