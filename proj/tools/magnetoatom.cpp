// magnetoatom: ground state of a moving neutral two-charge planar system in
// a perpendicular magnetic field. Subcommands reproduce the coefficient
// tables, effective-potential profiles, variational energy tables, critical
// momentum scans and the finite-difference cross-check as CSV.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "magnetoatom/config_file.hpp"
#include "magnetoatom/effective_potential.hpp"
#include "magnetoatom/fd_oracle.hpp"
#include "magnetoatom/perturbation.hpp"
#include "magnetoatom/units.hpp"
#include "magnetoatom/variational.hpp"

namespace ma = magnetoatom;

namespace {

constexpr const char* kVersion = "magnetoatom 1.0.0";

int thread_budget() {
    if (const char* env = std::getenv("MAGNETOATOM_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) throw ma::InvalidParameter("empty numeric list: '" + csv + "'");
    return out;
}

std::string fmt(double v, int digits = 10) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file.open(path);
            if (!file) throw ma::InvalidParameter("cannot open output file " + path);
            os = &file;
        }
    }
    std::ostream& stream() { return *os; }
};

void print_manifest(const std::string& subcommand, const ma::RunConfig& cfg,
                    const std::string& out_path, int threads) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char ts[32];
    std::strftime(ts, sizeof(ts), "%F %T", std::gmtime(&now));
    std::cerr << "# " << kVersion << " | " << subcommand << " | " << ts << "Z\n"
              << "# config: e=" << cfg.e << " m1=" << cfg.m1
              << " m2=" << (cfg.m2_infinite ? std::string("inf") : fmt(cfg.m2))
              << " B_eff=" << cfg.B_eff << " P_eff=" << cfg.P_eff << " d=" << cfg.d
              << " | threads=" << threads
              << " | out=" << (out_path.empty() ? "stdout" : out_path) << "\n";
}

ma::QuadratureSpec quad_for_level(int level) {
    ma::QuadratureSpec q;
    if (level <= 0) {
        q.radial_panels = 9;
        q.radial_order = 8;
        q.angular = 28;
    } else if (level == 1) {
        q.radial_panels = 10;
        q.radial_order = 8;
        q.angular = 32;
    } else {
        q.radial_panels = 12;
        q.radial_order = 10;
        q.angular = 48;
    }
    return q;
}

std::string class_letter(ma::StateClass c) {
    switch (c) {
        case ma::StateClass::Centered: return "c";
        case ma::StateClass::Decentered: return "d";
        case ma::StateClass::Mixed: return "m";
    }
    return "?";
}

// ---------------------------------------------------------------------------

int cmd_pt_coeffs(const ma::RunConfig& cfg, const std::string& out_path,
                  const std::string& b_list, const std::string& p_list) {
    Output out(out_path);
    const auto sys = cfg.system();
    const auto table = ma::energy_coefficients(sys);
    const auto rs = ma::rational_system(sys);

    out.stream() << "n,k,value (Hartree per (internal a.u.)^(n+k))"
                 << (rs ? ",exact\n" : "\n");
    for (const auto& c : table.coeffs) {
        out.stream() << c.n << "," << c.k << "," << fmt(c.value(sys), 6);
        if (rs) {
            try {
                out.stream() << "," << ma::pt_coefficient_exact(c, *rs).str();
            } catch (const std::overflow_error&) {
                out.stream() << ","; // exact form exceeds 64-bit rationals
            }
        }
        out.stream() << "\n";
    }

    if (!b_list.empty() && !p_list.empty()) {
        out.stream() << "B_eff (effective a.u.),P_eff (effective a.u.),"
                        "E_hat (Hartree),E (Hartree),truncation_warning\n";
        for (double b : parse_list(b_list)) {
            for (double p : parse_list(p_list)) {
                const auto f = ma::make_fields(sys, b, p, cfg.d);
                const auto r = ma::energy_series_eval(table, f.B_int, f.P_int);
                out.stream() << fmt(b) << "," << fmt(p) << "," << fmt(r.E_hat) << ","
                             << fmt(r.E) << "," << (r.truncation_warning ? 1 : 0) << "\n";
            }
        }
    }
    return 0;
}

int cmd_potential(const ma::RunConfig& cfg, const std::string& out_path, double x_min,
                  double x_max, int steps) {
    Output out(out_path);
    const auto sys = cfg.system();
    const auto fields = cfg.fields(sys);
    const auto cp = ma::stationary_points(sys, fields);

    out.stream() << "# p_saddle (a.u. momentum) = " << fmt(cp.p_saddle, 6)
                 << ", x_saddle (internal a.u.) = " << fmt(cp.x_saddle, 6);
    if (cp.x_min) {
        out.stream() << ", x_min = " << fmt(*cp.x_min, 6) << ", x_max = " << fmt(*cp.x_max, 6)
                     << ", V(x_min) (Hartree) = " << fmt(*cp.v_min, 6)
                     << ", V(x_max) = " << fmt(*cp.v_max, 6)
                     << ", barrier = " << fmt(*cp.barrier, 6);
    }
    out.stream() << "\n";

    if (x_max <= x_min) {
        x_min = 0.05 * cp.x_saddle;
        x_max = cp.x_min ? 1.6 * *cp.x_min : 4.0 * cp.x_saddle;
    }
    out.stream() << "x (internal a.u.),V_eff (Hartree)\n";
    for (int i = 0; i <= steps; ++i) {
        const double x = x_min + (x_max - x_min) * i / steps;
        if (x == 0.0) continue;
        out.stream() << fmt(x) << "," << fmt(ma::v_eff_axis(x, sys, fields)) << "\n";
    }
    return 0;
}

ma::OptimizeOptions make_opts(int restarts, int quad_level, const std::string& family,
                              int threads) {
    ma::OptimizeOptions opts;
    opts.restarts = restarts;
    opts.quad = quad_for_level(quad_level);
    opts.threads = threads;
    if (family == "centered") opts.family = ma::OptimizeOptions::Family::Centered;
    else if (family == "decentered") opts.family = ma::OptimizeOptions::Family::Decentered;
    else opts.family = ma::OptimizeOptions::Family::Both;
    return opts;
}

int cmd_variational(const ma::RunConfig& cfg, const std::string& csv_path,
                    const std::string& params_path, int restarts, int quad_level,
                    const std::string& family, int threads) {
    const auto sys = cfg.system();
    const auto fields = cfg.fields(sys);
    const auto opts = make_opts(restarts, quad_level, family, threads);
    const auto r = ma::optimize(sys, fields, opts);

    Output out(csv_path);
    out.stream() << "B_eff (effective a.u.),P_eff (effective a.u.),E (Hartree),"
                    "rho_mean (internal a.u.),class,d,C1,C2,E_centered,E_decentered,"
                    "quad_error,gauge_residual\n";
    out.stream() << fmt(fields.B_eff) << "," << fmt(fields.P_eff) << "," << fmt(r.E) << ","
                 << fmt(r.rho_mean) << "," << class_letter(r.classification) << ","
                 << fmt(r.params.d) << "," << fmt(r.C1) << "," << fmt(r.C2) << ","
                 << fmt(r.E_centered) << "," << fmt(r.E_decentered) << ","
                 << fmt(r.quad_error) << "," << fmt(r.gauge_residual) << "\n";

    if (!params_path.empty()) {
        Output pout(params_path);
        const auto& p = r.params;
        pout.stream() << "# optimal trial parameters (internal a.u.)\n";
        pout.stream() << "A0 " << fmt(p.A0) << "\nA1 " << fmt(p.A1) << "\nA2 " << fmt(p.A2)
                      << "\nA3 " << fmt(p.A3) << "\nA4 " << fmt(p.A4) << "\nA5 " << fmt(p.A5)
                      << "\nalpha_c " << fmt(p.alpha_c) << "\nD0 " << fmt(p.D0) << "\nD1 "
                      << fmt(p.D1) << "\nD2 " << fmt(p.D2) << "\nD3 " << fmt(p.D3) << "\nD4 "
                      << fmt(p.D4) << "\nD5 " << fmt(p.D5) << "\nD6 " << fmt(p.D6) << "\nx_m "
                      << fmt(p.x_m) << "\nd " << fmt(p.d) << "\nC1 " << fmt(r.C1) << "\nC2 "
                      << fmt(r.C2) << "\nE " << fmt(r.E) << "\n";
    }
    return 0;
}

int cmd_table2(const ma::RunConfig& cfg, const std::string& out_path,
               const std::string& b_list, const std::string& p_list, int restarts,
               int quad_level, int threads) {
    Output out(out_path);
    const auto sys = cfg.system();
    out.stream() << "B_eff (effective a.u.),P_eff (effective a.u.),E (Hartree),class,"
                    "rho_mean (internal a.u.),d\n";
    for (double b : parse_list(b_list)) {
        std::optional<ma::TrialParams> warm;
        for (double p : parse_list(p_list)) {
            auto opts = make_opts(restarts, quad_level, "both", threads);
            opts.warm_start = warm;
            const auto fields = ma::make_fields(sys, b, p, cfg.d);
            const auto r = ma::optimize(sys, fields, opts);
            warm = r.params;
            out.stream() << fmt(b) << "," << fmt(p) << "," << fmt(r.E) << ","
                         << class_letter(r.classification) << "," << fmt(r.rho_mean) << ","
                         << fmt(r.params.d) << "\n";
        }
    }
    return 0;
}

int cmd_scan_pc(const ma::RunConfig& cfg, const std::string& out_path,
                const std::string& b_list, const std::string& p_list, int restarts,
                int quad_level, int threads) {
    Output out(out_path);
    const auto sys = cfg.system();
    const auto grid = parse_list(p_list);
    out.stream() << "B_eff (effective a.u.),P_c (effective a.u.),bracket_lo,bracket_hi,"
                    "crossing_lo,crossing_hi\n";
    for (double b : parse_list(b_list)) {
        const auto opts = make_opts(restarts, quad_level, "both", threads);
        const auto r = ma::scan_pc(sys, b, grid, opts);
        out.stream() << fmt(b) << "," << fmt(r.P_c) << "," << fmt(r.bracket_lo) << ","
                     << fmt(r.bracket_hi) << "," << fmt(r.crossing_lo) << ","
                     << fmt(r.crossing_hi) << "\n";
    }
    return 0;
}

int cmd_oracle(const ma::RunConfig& cfg, const std::string& out_path, int grid_n, int levels,
               const std::string& d_spec, int restarts, int quad_level, int threads) {
    const auto sys = cfg.system();
    auto fields = cfg.fields(sys);

    double d = cfg.d;
    if (d_spec == "from-variational") {
        const auto opts = make_opts(restarts, quad_level, "both", threads);
        d = ma::optimize(sys, fields, opts).params.d;
    } else if (!d_spec.empty()) {
        d = std::stod(d_spec);
    }

    const auto sol = ma::solve_ground(sys, fields, d, grid_n, levels);
    Output out(out_path);
    out.stream() << "level,N,h (internal a.u.),E (Hartree),residual\n";
    int level = 1;
    for (const auto& l : sol.levels) {
        out.stream() << level++ << "," << l.N << "," << fmt(l.h) << "," << fmt(l.E) << ","
                     << fmt(l.residual) << "\n";
    }
    out.stream() << "extrapolated,," << "," << fmt(sol.E) << ","
                 << (sol.extrap_warning ? "warning" : "") << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"moving neutral two-charge planar system in a magnetic field"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path, system_name = "hydrogen";
    std::string out_path, csv_path, params_path;
    std::string b_list = "1", p_list = "0,25,50,75,100,125,150,175,200";
    std::string family = "both", d_spec;
    double b_flag = -1.0, p_flag = -1.0, d_flag = -1.0;
    double x_lo = 0.0, x_hi = -1.0;
    int steps = 400, restarts = 6, quad_level = 1, grid_n = 256, levels = 2;
    const int threads = thread_budget();

    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--system", system_name, "preset: hydrogen|hydrogen-inf|positronium");
    app.add_option("--B", b_flag, "magnetic field (effective a.u.)");
    app.add_option("--P", p_flag, "CMS momentum (effective a.u.)");
    app.add_option("--d", d_flag, "gauge parameter in [0,1]");

    auto* pt = app.add_subcommand("pt-coeffs", "double perturbation series coefficients");
    pt->add_option("--out", out_path, "output CSV (default stdout)");
    pt->add_option("--B-list", b_list, "grid of B for the series CSV")->capture_default_str();
    pt->add_option("--P-list", p_list, "grid of P for the series CSV")->capture_default_str();

    auto* pot = app.add_subcommand("potential", "effective-potential profile and critical points");
    pot->add_option("--out", out_path, "output CSV (default stdout)");
    pot->add_option("--x-min", x_lo, "profile start");
    pot->add_option("--x-max", x_hi, "profile end (auto when <= x-min)");
    pot->add_option("--steps", steps, "profile steps")->capture_default_str();

    auto* var = app.add_subcommand("variational", "gauge-optimized variational ground state");
    var->add_option("--restarts", restarts, "multi-starts per family")->capture_default_str();
    var->add_option("--quad-level", quad_level, "quadrature level 0..2")->capture_default_str();
    var->add_option("--seed-family", family, "centered|decentered|both")->capture_default_str();
    var->add_option("--emit-params", params_path, "write optimal parameter report");
    var->add_option("--csv", csv_path, "output CSV (default stdout)");

    auto* t2 = app.add_subcommand("table2", "energy table over a (B,P) grid");
    t2->add_option("--out", out_path, "output CSV (default stdout)");
    t2->add_option("--B-list", b_list, "B values")->capture_default_str();
    t2->add_option("--P-list", p_list, "P values")->capture_default_str();
    t2->add_option("--restarts", restarts)->capture_default_str();
    t2->add_option("--quad-level", quad_level)->capture_default_str();

    auto* scan = app.add_subcommand("scan-pc", "critical momentum bracket per field value");
    scan->add_option("--out", out_path, "output CSV (default stdout)");
    scan->add_option("--B-list", b_list, "B values")->capture_default_str();
    scan->add_option("--P-list", p_list, "ascending P grid")->capture_default_str();
    scan->add_option("--restarts", restarts)->capture_default_str();
    scan->add_option("--quad-level", quad_level)->capture_default_str();

    auto* orc = app.add_subcommand("oracle", "finite-difference eigensolver cross-check");
    orc->add_option("--out", out_path, "output CSV (default stdout)");
    orc->add_option("--grid", grid_n, "target nodes per side")->capture_default_str();
    orc->add_option("--levels", levels, "reported nested levels (1 or 2)")->capture_default_str();
    orc->add_option("--d", d_spec, "gauge parameter value or 'from-variational'");
    orc->add_option("--restarts", restarts)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        ma::RunConfig cfg = ma::preset_config(system_name);
        if (!config_path.empty()) cfg = ma::parse_config_file(config_path);
        if (b_flag >= 0.0) cfg.B_eff = b_flag;
        if (p_flag >= 0.0) cfg.P_eff = p_flag;
        if (d_flag >= 0.0) cfg.d = d_flag;

        const std::string sub = app.get_subcommands().front()->get_name();
        print_manifest(sub, cfg, out_path.empty() ? csv_path : out_path, threads);

        if (sub == "pt-coeffs")
            return cmd_pt_coeffs(cfg, out_path, pt->count("--B-list") ? b_list : "",
                                 pt->count("--P-list") ? p_list : "");
        if (sub == "potential") return cmd_potential(cfg, out_path, x_lo, x_hi, steps);
        if (sub == "variational")
            return cmd_variational(cfg, csv_path, params_path, restarts, quad_level, family,
                                   threads);
        if (sub == "table2")
            return cmd_table2(cfg, out_path, b_list, p_list, restarts, quad_level, threads);
        if (sub == "scan-pc")
            return cmd_scan_pc(cfg, out_path, b_list, p_list, restarts, quad_level, threads);
        if (sub == "oracle")
            return cmd_oracle(cfg, out_path, grid_n, levels, d_spec, restarts, quad_level,
                              threads);
        std::cerr << "unknown subcommand\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
