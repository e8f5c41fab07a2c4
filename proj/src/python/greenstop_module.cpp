#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "greenstop/kernel.hpp"
#include "greenstop/kernel_fourier.hpp"
#include "greenstop/model.hpp"
#include "greenstop/montecarlo.hpp"
#include "greenstop/solver.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace greenstop;

PYBIND11_MODULE(_greenstop, m) {
    m.doc() = "threshold solver for discounted stopping of a jump mean-reverting process";

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](double gamma, double sigma, double lambda, double beta) {
                 ModelParams p{gamma, sigma, lambda, beta};
                 p.validate();
                 return p;
             }),
             "gamma"_a, "sigma"_a, "lambda_"_a, "beta"_a)
        .def_readonly("gamma", &ModelParams::gamma)
        .def_readonly("sigma", &ModelParams::sigma)
        .def_readonly("lambda_", &ModelParams::lambda)
        .def_readonly("beta", &ModelParams::beta);

    py::class_<Problem>(m, "Problem")
        .def_static("jump_ou", &Problem::jump_ou, "params"_a, "alpha"_a)
        .def_static("custom", &Problem::custom, "params"_a, "alpha"_a, "reward"_a,
                    "smooth_reward"_a, "excess"_a)
        .def_readonly("params", &Problem::params)
        .def_readonly("alpha", &Problem::alpha)
        .def("reward", [](const Problem& p, double x) { return p.reward(x); })
        .def("smooth_reward", [](const Problem& p, double x) { return p.smooth_reward(x); })
        .def("excess", [](const Problem& p, double y) { return p.excess(y); });

    m.def("excess_function", &excess_function, "params"_a, "alpha"_a, "y"_a);
    m.def("excess_root", &excess_root, "params"_a, "alpha"_a);

    m.def("homogeneous_h", &homogeneous_H, "params"_a, "alpha"_a, "z"_a);
    m.def("ghat", &ghat, "params"_a, "alpha"_a, "x"_a, "z"_a, "quad_tol"_a = 1e-9);
    m.def("ghat_tail_estimate", &ghat_tail_estimate, "params"_a, "alpha"_a, "z"_a);
    m.def("ode_residual", &ode_residual, "params"_a, "alpha"_a, "x"_a, "z"_a, "h"_a,
          "quad_tol"_a = 1e-10);

    py::class_<FourierGrid>(m, "FourierGrid")
        .def(py::init<>())
        .def_readwrite("n_z", &FourierGrid::n_z)
        .def_readwrite("z_max", &FourierGrid::z_max)
        .def_readwrite("x_values", &FourierGrid::x_values)
        .def_readwrite("quad_tol", &FourierGrid::quad_tol)
        .def_readwrite("mass_tol", &FourierGrid::mass_tol)
        .def_readwrite("identity_tol", &FourierGrid::identity_tol)
        .def_readwrite("clip_tol", &FourierGrid::clip_tol)
        .def_readwrite("tail_tol", &FourierGrid::tail_tol)
        .def("dz", &FourierGrid::dz)
        .def("dy", &FourierGrid::dy);

    py::class_<KernelRow>(m, "KernelRow")
        .def_readonly("x", &KernelRow::x)
        .def_readonly("density", &KernelRow::density)
        .def_readonly("mass", &KernelRow::mass)
        .def_readonly("identity_residual", &KernelRow::identity_residual)
        .def_readonly("clipped_mass", &KernelRow::clipped_mass)
        .def_readonly("tail_mass", &KernelRow::tail_mass);

    py::class_<KernelGrid>(m, "KernelGrid")
        .def_readonly("alpha", &KernelGrid::alpha)
        .def_readonly("y_values", &KernelGrid::y_values)
        .def_readonly("rows", &KernelGrid::rows);

    m.def("build_kernel_grid", &build_kernel_grid, "problem"_a, "grid"_a, "threads"_a = 1);

    py::class_<GreenKernel, std::shared_ptr<GreenKernel>>(m, "GreenKernel")
        .def("density", &GreenKernel::density, "x"_a, "y"_a)
        .def("integrate_tail", &GreenKernel::integrate_tail, "x"_a, "b"_a, "f"_a);

    m.def("bm_kernel_density", &bm_kernel_density, "alpha"_a, "x"_a, "y"_a);

    py::class_<BrownianKernel, GreenKernel, std::shared_ptr<BrownianKernel>>(m, "BrownianKernel")
        .def(py::init<double>(), "alpha"_a);

    py::class_<FourierGreenKernel, GreenKernel, std::shared_ptr<FourierGreenKernel>>(
        m, "FourierGreenKernel")
        .def(py::init<Problem, FourierGrid>(), "problem"_a, "settings"_a)
        .def("rows_built", &FourierGreenKernel::rows_built)
        .def("y_values", &FourierGreenKernel::y_values)
        .def("materialize", &FourierGreenKernel::materialize, "xs"_a);

    py::class_<SolveConfig>(m, "SolveConfig")
        .def(py::init<>())
        .def_readwrite("bracket_lo", &SolveConfig::bracket_lo)
        .def_readwrite("bracket_hi", &SolveConfig::bracket_hi)
        .def_readwrite("root_tol", &SolveConfig::root_tol)
        .def_readwrite("scan_points", &SolveConfig::scan_points)
        .def_readwrite("max_expansions", &SolveConfig::max_expansions)
        .def_readwrite("check_grid", &SolveConfig::check_grid)
        .def_readwrite("majorant_tol", &SolveConfig::majorant_tol)
        .def_readwrite("identity_tol", &SolveConfig::identity_tol);

    py::class_<SolveReport>(m, "SolveReport")
        .def_readonly("threshold", &SolveReport::threshold)
        .def_readonly("residual_at_threshold", &SolveReport::residual_at_threshold)
        .def_readonly("residual_bound", &SolveReport::residual_bound)
        .def_readonly("f_nonneg_ok", &SolveReport::f_nonneg_ok)
        .def_readonly("majorant_ok", &SolveReport::majorant_ok)
        .def_readonly("identity_ok", &SolveReport::identity_ok)
        .def_readonly("root_equation_ok", &SolveReport::root_equation_ok)
        .def_readonly("reward_match_ok", &SolveReport::reward_match_ok)
        .def_readonly("multiple_sign_changes", &SolveReport::multiple_sign_changes)
        .def_readonly("sign_changes", &SolveReport::sign_changes)
        .def_readonly("value_samples", &SolveReport::value_samples)
        .def("verified", &SolveReport::verified);

    m.def("threshold_residual", &threshold_residual, "problem"_a, "kernel"_a, "b"_a);
    m.def("solve_threshold", &solve_threshold, "problem"_a, "kernel"_a, "cfg"_a);
    m.def("value_function", &value_function, "problem"_a, "kernel"_a, "threshold"_a, "x"_a);
    m.def("verify_hypotheses", &verify_hypotheses, "problem"_a, "kernel"_a, "threshold"_a,
          "cfg"_a);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("dt", &SimConfig::dt)
        .def_readwrite("horizon_eps", &SimConfig::horizon_eps)
        .def_readwrite("n_paths", &SimConfig::n_paths)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("threads", &SimConfig::threads)
        .def("horizon", &SimConfig::horizon, "alpha"_a);

    py::class_<PolicyEstimate>(m, "PolicyEstimate")
        .def_readonly("mean", &PolicyEstimate::mean)
        .def_readonly("std_error", &PolicyEstimate::std_error)
        .def_readonly("n_paths", &PolicyEstimate::n_paths)
        .def_readonly("ci95", &PolicyEstimate::ci95)
        .def_readonly("truncated_fraction", &PolicyEstimate::truncated_fraction);

    py::class_<Interval>(m, "Interval")
        .def(py::init([](double lo, double hi) { return Interval{lo, hi}; }), "lo"_a, "hi"_a)
        .def_readwrite("lo", &Interval::lo)
        .def_readwrite("hi", &Interval::hi);

    py::class_<RatioCheck>(m, "RatioCheck")
        .def_readonly("ratio1", &RatioCheck::ratio1)
        .def_readonly("ratio2", &RatioCheck::ratio2)
        .def_readonly("se_diff", &RatioCheck::se_diff)
        .def_readonly("conclusive", &RatioCheck::conclusive)
        .def_readonly("occupations", &RatioCheck::occupations)
        .def_readonly("occupation_se", &RatioCheck::occupation_se);

    py::class_<ScanResult>(m, "ScanResult")
        .def_readonly("thresholds", &ScanResult::thresholds)
        .def_readonly("estimates", &ScanResult::estimates)
        .def("paired_difference", &ScanResult::paired_difference, "i"_a, "j"_a);

    py::class_<HarmonicityResult>(m, "HarmonicityResult")
        .def_readonly("value", &HarmonicityResult::value)
        .def_readonly("mc_mean", &HarmonicityResult::mc_mean)
        .def_readonly("mc_se", &HarmonicityResult::mc_se)
        .def_readonly("diff", &HarmonicityResult::diff);

    m.def("step_exact",
          [](const ModelParams& params, double x, double dt, std::uint64_t seed) {
              std::mt19937_64 rng(seed);
              return step_exact(params, x, dt, rng);
          },
          "params"_a, "x"_a, "dt"_a, "seed"_a,
          "One exact-in-law step driven by a fresh generator with the given seed.");
    m.def("sample_marginal", &sample_marginal, "params"_a, "x0"_a, "t"_a, "dt"_a, "n"_a,
          "seed"_a);
    m.def("estimate_policy_value",
          [](const Problem& problem, double x0, double b, const SimConfig& cfg) {
              return estimate_policy_value(problem, x0, b, cfg);
          },
          "problem"_a, "x0"_a, "b"_a, "cfg"_a);
    m.def("optimality_scan", &optimality_scan, "problem"_a, "x0"_a, "b_list"_a, "cfg"_a);
    m.def("green_ratio_check", &green_ratio_check, "params"_a, "alpha"_a, "x"_a, "z"_a,
          "h1"_a, "h2"_a, "cfg"_a);
    m.def("discounted_occupation", &discounted_occupation, "params"_a, "alpha"_a, "x0"_a,
          "h"_a, "cfg"_a);
    m.def("harmonicity_check", &harmonicity_check, "problem"_a, "kernel"_a, "threshold"_a,
          "x"_a, "cfg"_a);

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
