#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "kincal/bayesopt.hpp"
#include "kincal/calibration.hpp"
#include "kincal/geom.hpp"
#include "kincal/gp.hpp"
#include "kincal/harness.hpp"
#include "kincal/kernels.hpp"
#include "kincal/kinematics.hpp"

namespace py = pybind11;

using namespace kincal;

namespace {

kin::DhChain make_chain(const std::vector<kin::DhJoint>& joints, const geom::Pose& base,
                        const geom::Pose& tool) {
    kin::DhChain chain{joints, base, tool};
    chain.validate();
    return chain;
}

}  // namespace

PYBIND11_MODULE(_kincal, m) {
    m.doc() = "Geometry-aware Bayesian experimental design for kinematic calibration";

    // ---- geom ----
    py::class_<geom::UnitQuaternion>(m, "UnitQuaternion")
        .def(py::init<double, double, double, double>(), py::arg("w"), py::arg("x"),
             py::arg("y"), py::arg("z"))
        .def_property_readonly("w", &geom::UnitQuaternion::w)
        .def_property_readonly("x", &geom::UnitQuaternion::x)
        .def_property_readonly("y", &geom::UnitQuaternion::y)
        .def_property_readonly("z", &geom::UnitQuaternion::z)
        .def("coeffs", &geom::UnitQuaternion::coeffs)
        .def("negated", &geom::UnitQuaternion::negated)
        .def("equiv_rotation", &geom::UnitQuaternion::equiv_rotation, py::arg("other"),
             py::arg("tol") = 1e-9)
        .def("__repr__", [](const geom::UnitQuaternion& q) {
            return "UnitQuaternion(" + std::to_string(q.w()) + ", " + std::to_string(q.x()) +
                   ", " + std::to_string(q.y()) + ", " + std::to_string(q.z()) + ")";
        });

    py::class_<geom::Pose>(m, "Pose")
        .def(py::init([](const geom::UnitQuaternion& q, const Eigen::Vector3d& p) {
                 return geom::Pose{q, p};
             }),
             py::arg("q"), py::arg("p"))
        .def_readonly("q", &geom::Pose::q)
        .def_readonly("p", &geom::Pose::p)
        .def("to_homogeneous", &geom::Pose::to_homogeneous);

    py::class_<geom::Se3Metric>(m, "Se3Metric")
        .def(py::init<double, double>(), py::arg("gamma1"), py::arg("gamma2"))
        .def_readonly("gamma1", &geom::Se3Metric::gamma1)
        .def_readonly("gamma2", &geom::Se3Metric::gamma2);

    m.def("quat_to_rotmat", &geom::quat_to_rotmat, py::arg("q"));
    m.def("rotmat_to_quat", &geom::rotmat_to_quat, py::arg("R"));
    m.def("geodesic_distance_s3", &geom::geodesic_distance_s3, py::arg("q1"), py::arg("q2"));
    m.def("align_sign", &geom::align_sign, py::arg("q_ref"), py::arg("q"));
    m.def("se3_distance", &geom::se3_distance, py::arg("x1"), py::arg("x2"), py::arg("metric"));
    m.def("quat_from_axis_angle", &geom::quat_from_axis_angle, py::arg("axis"), py::arg("angle"));
    m.def("quat_multiply", &geom::quat_multiply, py::arg("q1"), py::arg("q2"));

    // ---- kinematics ----
    py::enum_<kin::JointKind>(m, "JointKind")
        .value("Revolute", kin::JointKind::Revolute)
        .value("Prismatic", kin::JointKind::Prismatic);

    py::class_<kin::JointLimits>(m, "JointLimits")
        .def(py::init<double, double>(), py::arg("lo"), py::arg("hi"))
        .def_readonly("lo", &kin::JointLimits::lo)
        .def_readonly("hi", &kin::JointLimits::hi);

    py::class_<kin::DhJoint>(m, "DhJoint")
        .def(py::init([](kin::JointKind kind, double phi, double alpha, double a, double d,
                         const kin::JointLimits& limits) {
                 return kin::DhJoint{kind, phi, alpha, a, d, limits};
             }),
             py::arg("kind"), py::arg("phi"), py::arg("alpha"), py::arg("a"), py::arg("d"),
             py::arg("limits"))
        .def_readonly("kind", &kin::DhJoint::kind)
        .def_readonly("phi", &kin::DhJoint::phi)
        .def_readonly("alpha", &kin::DhJoint::alpha)
        .def_readonly("a", &kin::DhJoint::a)
        .def_readonly("d", &kin::DhJoint::d)
        .def_readonly("limits", &kin::DhJoint::limits);

    py::class_<kin::DhChain>(m, "DhChain")
        .def(py::init(&make_chain), py::arg("joints"), py::arg("base") = geom::Pose{},
             py::arg("tool") = geom::Pose{})
        .def_readonly("joints", &kin::DhChain::joints)
        .def_readonly("base", &kin::DhChain::base)
        .def_readonly("tool", &kin::DhChain::tool)
        .def("num_joints", &kin::DhChain::num_joints)
        .def("nominal_params", &kin::DhChain::nominal_params);

    m.def("dh_link_transform", &kin::dh_link_transform, py::arg("joint"), py::arg("theta"));
    m.def("forward_kinematics", &kin::forward_kinematics, py::arg("chain"), py::arg("params"),
          py::arg("theta"));
    m.def("identification_jacobian", &kin::identification_jacobian, py::arg("chain"),
          py::arg("params"), py::arg("theta"), py::arg("h") = 1e-6);
    m.def("stacked_jacobian", &kin::stacked_jacobian, py::arg("chain"), py::arg("params"),
          py::arg("theta_list"), py::arg("h") = 1e-6);
    m.def(
        "identifiability_check",
        [](const Eigen::MatrixXd& Jn, const kin::ColumnMask& mask) {
            const auto r = kin::identifiability_check(Jn, mask);
            return py::make_tuple(r.rank, r.ok);
        },
        py::arg("Jn"), py::arg("mask"));
    m.def("detect_dependent_columns", &kin::detect_dependent_columns, py::arg("chain"),
          py::arg("params"), py::arg("n_probe"), py::arg("seed"));

    // ---- kernels ----
    py::class_<kernels::SeKernelParams>(m, "SeKernelParams")
        .def(py::init([](double beta, double sigma_f, double sigma_n) {
                 kernels::SeKernelParams p{beta, sigma_f, sigma_n};
                 p.validate();
                 return p;
             }),
             py::arg("beta") = 1.0, py::arg("sigma_f") = 1.0, py::arg("sigma_n") = 0.0)
        .def_readonly("beta", &kernels::SeKernelParams::beta)
        .def_readonly("sigma_f", &kernels::SeKernelParams::sigma_f)
        .def_readonly("sigma_n", &kernels::SeKernelParams::sigma_n);

    py::class_<kernels::S3KernelParams>(m, "S3KernelParams")
        .def(py::init([](double kappa, double sigma, int series_order) {
                 kernels::S3KernelParams p{kappa, sigma, series_order};
                 p.validate();
                 return p;
             }),
             py::arg("kappa") = 1.0, py::arg("sigma") = 1.0, py::arg("series_order") = 128)
        .def_readonly("kappa", &kernels::S3KernelParams::kappa)
        .def_readonly("sigma", &kernels::S3KernelParams::sigma)
        .def_readonly("series_order", &kernels::S3KernelParams::series_order);

    py::class_<kernels::ProductKernelParams>(m, "ProductKernelParams")
        .def(py::init([](const kernels::S3KernelParams& s3, const kernels::SeKernelParams& se,
                         double sigma_s) {
                 kernels::ProductKernelParams p{s3, se, sigma_s};
                 p.validate();
                 return p;
             }),
             py::arg("s3") = kernels::S3KernelParams{}, py::arg("se") = kernels::SeKernelParams{},
             py::arg("sigma_s") = 1.0)
        .def_readonly("s3", &kernels::ProductKernelParams::s3)
        .def_readonly("se", &kernels::ProductKernelParams::se)
        .def_readonly("sigma_s", &kernels::ProductKernelParams::sigma_s);

    m.def("k_se", &kernels::k_se, py::arg("p1"), py::arg("p2"), py::arg("params"));
    m.def("k_naive_se3", &kernels::k_naive_se3, py::arg("x1"), py::arg("x2"), py::arg("beta"),
          py::arg("metric"),
          "Known-invalid SE(3) kernel, kept only to reproduce its indefiniteness");
    m.def("gegenbauer_c1", &kernels::gegenbauer_c1, py::arg("n"), py::arg("t"));
    m.def("k_s3", &kernels::k_s3, py::arg("q1"), py::arg("q2"), py::arg("params"));
    m.def("k_product", &kernels::k_product, py::arg("x1"), py::arg("x2"), py::arg("params"));
    m.def(
        "gram_s3",
        [](const std::vector<geom::UnitQuaternion>& qs, const kernels::S3KernelParams& p) {
            return kernels::gram(qs, kernels::S3Series(p));
        },
        py::arg("quaternions"), py::arg("params"));
    m.def(
        "gram_product",
        [](const std::vector<geom::Pose>& poses, const kernels::ProductKernelParams& p) {
            return kernels::gram(poses, kernels::ProductKernel(p));
        },
        py::arg("poses"), py::arg("params"));

    // ---- gp ----
    py::class_<gp::Posterior>(m, "Posterior")
        .def_readonly("mean", &gp::Posterior::mean)
        .def_readonly("variance", &gp::Posterior::variance);

    py::class_<gp::GpModel>(m, "GpModel")
        .def(py::init<const kernels::ProductKernelParams&, double, double>(),
             py::arg("kernel"), py::arg("sigma_eps"), py::arg("prior_mean") = 0.0)
        .def("add_observation", &gp::GpModel::add_observation, py::arg("x"), py::arg("y"))
        .def("posterior", &gp::GpModel::posterior, py::arg("x"))
        .def("size", &gp::GpModel::size);

    // ---- bayesopt ----
    py::class_<bo::ObjectiveWeights>(m, "ObjectiveWeights")
        .def(py::init([](double a1, double a2, double sup_p, double sup_q) {
                 bo::ObjectiveWeights w{a1, a2, sup_p, sup_q};
                 w.validate();
                 return w;
             }),
             py::arg("alpha1") = 0.5, py::arg("alpha2") = 0.5, py::arg("sup_p") = 1.0,
             py::arg("sup_q") = 3.14159265358979323846)
        .def_readonly("alpha1", &bo::ObjectiveWeights::alpha1)
        .def_readonly("alpha2", &bo::ObjectiveWeights::alpha2)
        .def_readonly("sup_p", &bo::ObjectiveWeights::sup_p)
        .def_readonly("sup_q", &bo::ObjectiveWeights::sup_q);

    py::enum_<bo::UcbMode>(m, "UcbMode")
        .value("Fixed", bo::UcbMode::Fixed)
        .value("Srinivas", bo::UcbMode::Srinivas);

    py::class_<bo::UcbSchedule>(m, "UcbSchedule")
        .def(py::init([](bo::UcbMode mode, double beta_fixed, double delta_conf,
                         int candidate_count) {
                 bo::UcbSchedule s{mode, beta_fixed, delta_conf, candidate_count};
                 s.validate();
                 return s;
             }),
             py::arg("mode") = bo::UcbMode::Fixed, py::arg("beta_fixed") = 4.0,
             py::arg("delta_conf") = 0.1, py::arg("candidate_count") = 2000)
        .def_readonly("mode", &bo::UcbSchedule::mode)
        .def_readonly("beta_fixed", &bo::UcbSchedule::beta_fixed)
        .def_readonly("delta_conf", &bo::UcbSchedule::delta_conf)
        .def_readonly("candidate_count", &bo::UcbSchedule::candidate_count);

    m.def("objective", &bo::objective, py::arg("measured"), py::arg("computed"),
          py::arg("weights"));
    m.def("ucb_beta", &bo::ucb_beta, py::arg("k"), py::arg("schedule"));
    m.def("ucb", &bo::ucb, py::arg("mean"), py::arg("variance"), py::arg("k"),
          py::arg("schedule"));

    py::class_<bo::Candidate>(m, "Candidate")
        .def_readonly("pose", &bo::Candidate::pose)
        .def_readonly("joints", &bo::Candidate::joints);

    m.def("generate_candidates", &bo::generate_candidates, py::arg("chain"), py::arg("params"),
          py::arg("count"), py::arg("seed"));
    m.def("select_next", &bo::select_next, py::arg("model"), py::arg("candidates"),
          py::arg("k"), py::arg("schedule"));

    py::class_<bo::DesignRecord>(m, "DesignRecord")
        .def_readonly("iteration", &bo::DesignRecord::iteration)
        .def_readonly("target", &bo::DesignRecord::target)
        .def_readonly("measured", &bo::DesignRecord::measured)
        .def_readonly("computed", &bo::DesignRecord::computed)
        .def_readonly("joints", &bo::DesignRecord::joints)
        .def_readonly("objective", &bo::DesignRecord::objective)
        .def_readonly("f_p", &bo::DesignRecord::f_p)
        .def_readonly("f_q", &bo::DesignRecord::f_q)
        .def_readonly("ucb_value", &bo::DesignRecord::ucb_value)
        .def_readonly("gp_mean", &bo::DesignRecord::gp_mean)
        .def_readonly("gp_variance", &bo::DesignRecord::gp_variance);

    // ---- calibration ----
    py::class_<calib::BoxBounds>(m, "BoxBounds")
        .def(py::init([](const Eigen::VectorXd& lb, const Eigen::VectorXd& ub) {
                 calib::BoxBounds b{lb, ub};
                 b.validate();
                 return b;
             }),
             py::arg("lb"), py::arg("ub"))
        .def_readonly("lb", &calib::BoxBounds::lb)
        .def_readonly("ub", &calib::BoxBounds::ub);

    py::class_<calib::PoseMeasurement>(m, "PoseMeasurement")
        .def(py::init([](const kin::JointVector& theta, const geom::Pose& measured) {
                 return calib::PoseMeasurement{theta, measured};
             }),
             py::arg("theta"), py::arg("measured"))
        .def_readonly("theta", &calib::PoseMeasurement::theta)
        .def_readonly("measured", &calib::PoseMeasurement::measured);

    py::class_<calib::CalibrationResult>(m, "CalibrationResult")
        .def_readonly("psi_star", &calib::CalibrationResult::psi_star)
        .def_readonly("delta", &calib::CalibrationResult::delta)
        .def_readonly("converged", &calib::CalibrationResult::converged);

    m.def("build_residual", &calib::build_residual, py::arg("measured"), py::arg("computed"));
    m.def("solve_box_ls", &calib::solve_box_ls, py::arg("Jn"), py::arg("delta_n"),
          py::arg("bounds"), py::arg("mask"));
    m.def(
        "calibrate",
        [](const kin::DhChain& chain, const kin::ParamVector& psi,
           const std::vector<calib::PoseMeasurement>& measurements,
           const calib::BoxBounds& bounds, const kin::ColumnMask& mask, int max_iters,
           double tol) {
            return calib::calibrate({chain, psi, measurements, bounds, mask}, max_iters, tol);
        },
        py::arg("chain"), py::arg("psi"), py::arg("measurements"), py::arg("bounds"),
        py::arg("mask"), py::arg("max_iters") = 20, py::arg("tol") = 1e-10);

    // ---- harness ----
    py::class_<harness::NoiseScales>(m, "NoiseScales")
        .def(py::init([](double pos, double rot, double joint) {
                 return harness::NoiseScales{pos, rot, joint};
             }),
             py::arg("pos") = 0.0, py::arg("rot") = 0.0, py::arg("joint") = 0.0)
        .def_readonly("pos", &harness::NoiseScales::pos)
        .def_readonly("rot", &harness::NoiseScales::rot)
        .def_readonly("joint", &harness::NoiseScales::joint);

    py::class_<harness::SimRig>(m, "SimRig")
        .def(py::init<kin::DhChain, kin::ParamVector, harness::NoiseScales, std::uint64_t>(),
             py::arg("chain"), py::arg("true_params"), py::arg("noise"), py::arg("seed"))
        .def(
            "command",
            [](harness::SimRig& rig, const bo::Candidate& target) {
                const auto meas = rig.command(target);
                return py::make_tuple(meas.joints, meas.pose);
            },
            py::arg("target"));

    py::class_<harness::ExperimentConfig>(m, "ExperimentConfig")
        .def_readonly("chain", &harness::ExperimentConfig::chain)
        .def_readonly("injected_delta", &harness::ExperimentConfig::injected_delta)
        .def_readonly("iterations", &harness::ExperimentConfig::iterations)
        .def_readonly("seed", &harness::ExperimentConfig::seed)
        .def_readonly("kernel", &harness::ExperimentConfig::kernel)
        .def("objective_weights", &harness::ExperimentConfig::objective_weights);

    py::enum_<harness::RunMode>(m, "RunMode")
        .value("Bo", harness::RunMode::Bo)
        .value("Random", harness::RunMode::Random)
        .value("Both", harness::RunMode::Both);

    m.def("load_config", &harness::load_config, py::arg("path"));
    m.def("parse_config", &harness::parse_config, py::arg("json_text"));
    m.def(
        "run_experiment",
        [](const harness::ExperimentConfig& cfg, harness::RunMode mode,
           const std::filesystem::path& out_dir) {
            const auto bundle = harness::run_experiment(cfg, mode, out_dir);
            py::dict out;
            for (const auto& run : bundle.runs) {
                py::dict entry;
                entry["records"] = run.records;
                entry["recovered_delta"] = run.calibration.delta;
                entry["converged"] = run.calibration.converged;
                out[py::str(run.mode)] = entry;
            }
            return out;
        },
        py::arg("config"), py::arg("mode"), py::arg("out_dir"));
    m.def(
        "kernel_check",
        [](const harness::ExperimentConfig& cfg) {
            const auto report = harness::kernel_check(cfg);
            py::dict out;
            out["naive_eigs_beta12"] = report.naive_eigs_beta12;
            out["naive_eigs_beta1"] = report.naive_eigs_beta1;
            out["naive_indefinite_detected"] = report.naive_indefinite_detected;
            out["s3_min_eigenvalue"] = report.s3_min_eigenvalue;
            out["product_min_eigenvalue"] = report.product_min_eigenvalue;
            out["pass"] = report.pass;
            return out;
        },
        py::arg("config"));
}
