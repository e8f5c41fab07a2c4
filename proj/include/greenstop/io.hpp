#pragma once

#include <string>
#include <vector>

#include "greenstop/kernel_fourier.hpp"
#include "greenstop/model.hpp"
#include "greenstop/montecarlo.hpp"
#include "greenstop/solver.hpp"

namespace greenstop {

/// Equispaced verification grid, materialized as explicit points.
struct CheckGridSpec {
    double lo = -2.0;
    double hi = 3.0;
    int n = 21;

    std::vector<double> points() const;
    void validate() const;
};

/// One batch run: problem, kernel, solver and simulation settings plus the
/// output directory.  Loaded from a flat-section JSON file; unknown keys
/// are rejected.
struct RunConfig {
    ModelParams params;
    double alpha = 1.0;
    FourierGrid kernel;
    SolveConfig solver;
    CheckGridSpec check_grid;
    SimConfig sim;
    std::string out_dir = "./out";

    Problem problem() const { return Problem::jump_ou(params, alpha); }
};

RunConfig load_run_config(const std::string& path);

// -- JSON outputs (deterministic for identical inputs) --

std::string solve_report_to_json(const SolveReport& report);
std::string policy_estimate_to_json(const PolicyEstimate& est);

void write_text_file(const std::string& path, const std::string& content);

// -- CSV outputs, 12 significant digits, versioned '#' header line --

void write_kernel_csv(const std::string& path, const KernelGrid& grid);
void write_value_csv(const std::string& path,
                     const std::vector<double>& xs,
                     const std::vector<double>& values,
                     const std::vector<double>& rewards);
void write_paths_csv(const std::string& path, const std::vector<PathRecord>& records);

// -- binary kernel cache (versioned magic header) --

void save_kernel_cache(const std::string& path, const KernelGrid& grid);
KernelGrid load_kernel_cache(const std::string& path);

} // namespace greenstop
