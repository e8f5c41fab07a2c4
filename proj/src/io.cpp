#include "greenstop/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "greenstop/errors.hpp"

namespace greenstop {

using nlohmann::json;

std::vector<double> CheckGridSpec::points() const {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return out;
}

void CheckGridSpec::validate() const {
    if (n < 1) throw ConfigError("check_grid.n must be at least 1");
    if (!(lo <= hi)) throw ConfigError("check_grid.lo must not exceed check_grid.hi");
}

namespace {

void reject_unknown_keys(const json& obj, const char* section,
                         std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) { ok = true; break; }
        if (!ok)
            throw ConfigError(std::string("unknown key '") + it.key() + "' in section '" +
                              section + "'");
    }
}

double get_number(const json& obj, const char* section, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number())
        throw ConfigError(std::string(section) + "." + key + " must be a number");
    return obj[key].get<double>();
}

long long get_integer(const json& obj, const char* section, const char* key, long long fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer())
        throw ConfigError(std::string(section) + "." + key + " must be an integer");
    return obj[key].get<long long>();
}

} // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown_keys(doc, "<root>", {"problem", "kernel", "solver", "sim", "out"});

    RunConfig cfg;

    if (!doc.contains("problem") || !doc["problem"].is_object())
        throw ConfigError("config requires a 'problem' section");
    {
        const json& p = doc["problem"];
        reject_unknown_keys(p, "problem", {"gamma", "sigma", "lambda", "beta", "alpha"});
        cfg.params.gamma = get_number(p, "problem", "gamma", cfg.params.gamma);
        cfg.params.sigma = get_number(p, "problem", "sigma", cfg.params.sigma);
        cfg.params.lambda = get_number(p, "problem", "lambda", cfg.params.lambda);
        cfg.params.beta = get_number(p, "problem", "beta", cfg.params.beta);
        cfg.alpha = get_number(p, "problem", "alpha", cfg.alpha);
        cfg.params.validate();
        if (!(cfg.alpha > 0.0)) throw ConfigError("problem.alpha must be positive");
    }

    if (doc.contains("kernel")) {
        const json& k = doc["kernel"];
        if (!k.is_object()) throw ConfigError("'kernel' must be an object");
        reject_unknown_keys(k, "kernel",
                            {"n_z", "z_max", "quad_tol", "mass_tol", "identity_tol",
                             "clip_tol", "tail_tol"});
        cfg.kernel.n_z = static_cast<int>(get_integer(k, "kernel", "n_z", cfg.kernel.n_z));
        cfg.kernel.z_max = get_number(k, "kernel", "z_max", cfg.kernel.z_max);
        cfg.kernel.quad_tol = get_number(k, "kernel", "quad_tol", cfg.kernel.quad_tol);
        cfg.kernel.mass_tol = get_number(k, "kernel", "mass_tol", cfg.kernel.mass_tol);
        cfg.kernel.identity_tol = get_number(k, "kernel", "identity_tol", cfg.kernel.identity_tol);
        cfg.kernel.clip_tol = get_number(k, "kernel", "clip_tol", cfg.kernel.clip_tol);
        cfg.kernel.tail_tol = get_number(k, "kernel", "tail_tol", cfg.kernel.tail_tol);
    }
    cfg.kernel.validate();

    if (doc.contains("solver")) {
        const json& s = doc["solver"];
        if (!s.is_object()) throw ConfigError("'solver' must be an object");
        reject_unknown_keys(s, "solver",
                            {"root_tol", "bracket_lo", "bracket_hi", "check_grid",
                             "majorant_tol", "identity_tol"});
        cfg.solver.root_tol = get_number(s, "solver", "root_tol", cfg.solver.root_tol);
        cfg.solver.bracket_lo = get_number(s, "solver", "bracket_lo", cfg.solver.bracket_lo);
        cfg.solver.bracket_hi = get_number(s, "solver", "bracket_hi", cfg.solver.bracket_hi);
        cfg.solver.majorant_tol = get_number(s, "solver", "majorant_tol", cfg.solver.majorant_tol);
        cfg.solver.identity_tol = get_number(s, "solver", "identity_tol", cfg.solver.identity_tol);
        if (s.contains("check_grid")) {
            const json& g = s["check_grid"];
            if (!g.is_object()) throw ConfigError("solver.check_grid must be an object");
            reject_unknown_keys(g, "solver.check_grid", {"lo", "hi", "n"});
            cfg.check_grid.lo = get_number(g, "check_grid", "lo", cfg.check_grid.lo);
            cfg.check_grid.hi = get_number(g, "check_grid", "hi", cfg.check_grid.hi);
            cfg.check_grid.n = static_cast<int>(get_integer(g, "check_grid", "n", cfg.check_grid.n));
        }
    }
    cfg.check_grid.validate();
    cfg.solver.check_grid = cfg.check_grid.points();
    cfg.solver.validate();

    if (doc.contains("sim")) {
        const json& s = doc["sim"];
        if (!s.is_object()) throw ConfigError("'sim' must be an object");
        reject_unknown_keys(s, "sim", {"dt", "n_paths", "seed", "horizon_eps", "threads"});
        cfg.sim.dt = get_number(s, "sim", "dt", cfg.sim.dt);
        cfg.sim.n_paths = get_integer(s, "sim", "n_paths", cfg.sim.n_paths);
        cfg.sim.seed = static_cast<std::uint64_t>(
            get_integer(s, "sim", "seed", static_cast<long long>(cfg.sim.seed)));
        cfg.sim.horizon_eps = get_number(s, "sim", "horizon_eps", cfg.sim.horizon_eps);
        cfg.sim.threads = static_cast<int>(get_integer(s, "sim", "threads", cfg.sim.threads));
    }
    cfg.sim.validate();

    if (doc.contains("out")) {
        const json& o = doc["out"];
        if (!o.is_object()) throw ConfigError("'out' must be an object");
        reject_unknown_keys(o, "out", {"dir"});
        if (o.contains("dir")) {
            if (!o["dir"].is_string()) throw ConfigError("out.dir must be a string");
            cfg.out_dir = o["dir"].get<std::string>();
        }
    }
    return cfg;
}

std::string solve_report_to_json(const SolveReport& report) {
    json flags;
    flags["f_nonneg"] = report.f_nonneg_ok;
    flags["majorant"] = report.majorant_ok;
    flags["identity"] = report.identity_ok;
    flags["root_equation"] = report.root_equation_ok;
    flags["reward_match"] = report.reward_match_ok;
    flags["multiple_sign_changes"] = report.multiple_sign_changes;

    json doc;
    doc["threshold"] = report.threshold;
    doc["residual"] = report.residual_at_threshold;
    doc["residual_bound"] = report.residual_bound;
    doc["verified"] = report.verified();
    doc["flags"] = flags;
    doc["sign_changes"] = json::array();
    for (const auto& [a, b] : report.sign_changes)
        doc["sign_changes"].push_back(json::array({a, b}));
    doc["value_samples"] = json::array();
    for (const auto& [x, v] : report.value_samples)
        doc["value_samples"].push_back(json::array({x, v}));
    return doc.dump(2) + "\n";
}

std::string policy_estimate_to_json(const PolicyEstimate& est) {
    json doc;
    doc["mean"] = est.mean;
    doc["se"] = est.std_error;
    doc["n"] = est.n_paths;
    doc["ci95"] = json::array({est.ci95.first, est.ci95.second});
    doc["truncated_fraction"] = est.truncated_fraction;
    return doc.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
}

namespace {

std::string fmt12(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace

void write_kernel_csv(const std::string& path, const KernelGrid& grid) {
    std::ostringstream os;
    os << "# greenstop kernel-grid v1: columns x,y,density; density in 1/state\n";
    os << "x,y,density\n";
    for (const KernelRow& row : grid.rows)
        for (std::size_t m = 0; m < grid.y_values.size(); ++m)
            os << fmt12(row.x) << ',' << fmt12(grid.y_values[m]) << ','
               << fmt12(row.density[m]) << '\n';
    write_text_file(path, os.str());
}

void write_value_csv(const std::string& path,
                     const std::vector<double>& xs,
                     const std::vector<double>& values,
                     const std::vector<double>& rewards) {
    if (xs.size() != values.size() || xs.size() != rewards.size())
        throw ConfigError("write_value_csv: column size mismatch");
    std::ostringstream os;
    os << "# greenstop value-function v1: columns x,V,g\n";
    os << "x,V,g\n";
    for (std::size_t i = 0; i < xs.size(); ++i)
        os << fmt12(xs[i]) << ',' << fmt12(values[i]) << ',' << fmt12(rewards[i]) << '\n';
    write_text_file(path, os.str());
}

void write_paths_csv(const std::string& path, const std::vector<PathRecord>& records) {
    std::ostringstream os;
    os << "# greenstop paths v1: columns path_id,tau,payoff,crossing_type\n";
    os << "path_id,tau,payoff,crossing_type\n";
    for (const PathRecord& r : records) {
        const char* type = r.crossing == CrossingType::jump        ? "jump"
                           : r.crossing == CrossingType::diffusive ? "diffusive"
                           : r.crossing == CrossingType::immediate ? "immediate"
                                                                   : "none";
        os << r.path_id << ',' << fmt12(r.tau) << ',' << fmt12(r.payoff) << ',' << type << '\n';
    }
    write_text_file(path, os.str());
}

namespace {

constexpr char kCacheMagic[8] = {'G', 'S', 'K', 'C', 'H', 'E', '0', '1'};

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void get(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

} // namespace

void save_kernel_cache(const std::string& path, const KernelGrid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write cache file: " + path);
    out.write(kCacheMagic, sizeof(kCacheMagic));
    put(out, grid.params.gamma);
    put(out, grid.params.sigma);
    put(out, grid.params.lambda);
    put(out, grid.params.beta);
    put(out, grid.alpha);
    put(out, grid.grid.z_max);
    put(out, grid.grid.quad_tol);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(grid.grid.n_z));
    put<std::uint64_t>(out, grid.rows.size());
    put<std::uint64_t>(out, grid.y_values.size());
    out.write(reinterpret_cast<const char*>(grid.y_values.data()),
              static_cast<std::streamsize>(grid.y_values.size() * sizeof(double)));
    for (const KernelRow& r : grid.rows) {
        put(out, r.x);
        put(out, r.mass);
        put(out, r.identity_residual);
        put(out, r.clipped_mass);
        put(out, r.tail_mass);
        put(out, r.ref_rate);
        put(out, r.ref_scale);
        put(out, r.ref_dipole);
        out.write(reinterpret_cast<const char*>(r.density.data()),
                  static_cast<std::streamsize>(r.density.size() * sizeof(double)));
    }
    if (!out) throw ConfigError("failed while writing cache file: " + path);
}

KernelGrid load_kernel_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open cache file: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0)
        throw ConfigError("not a greenstop kernel cache (bad magic): " + path);

    KernelGrid grid;
    get(in, grid.params.gamma);
    get(in, grid.params.sigma);
    get(in, grid.params.lambda);
    get(in, grid.params.beta);
    get(in, grid.alpha);
    get(in, grid.grid.z_max);
    get(in, grid.grid.quad_tol);
    std::uint64_t n_z = 0, n_rows = 0, n_y = 0;
    get(in, n_z);
    get(in, n_rows);
    get(in, n_y);
    if (!in || n_y == 0 || n_y > (1u << 26) || n_rows > (1u << 20))
        throw ConfigError("corrupt kernel cache header: " + path);
    grid.grid.n_z = static_cast<int>(n_z);

    grid.y_values.resize(n_y);
    in.read(reinterpret_cast<char*>(grid.y_values.data()),
            static_cast<std::streamsize>(n_y * sizeof(double)));
    grid.rows.resize(n_rows);
    grid.grid.x_values.clear();
    for (KernelRow& r : grid.rows) {
        get(in, r.x);
        get(in, r.mass);
        get(in, r.identity_residual);
        get(in, r.clipped_mass);
        get(in, r.tail_mass);
        get(in, r.ref_rate);
        get(in, r.ref_scale);
        get(in, r.ref_dipole);
        r.density.resize(n_y);
        in.read(reinterpret_cast<char*>(r.density.data()),
                static_cast<std::streamsize>(n_y * sizeof(double)));
        grid.grid.x_values.push_back(r.x);
    }
    if (!in) throw ConfigError("truncated kernel cache: " + path);
    return grid;
}

} // namespace greenstop
