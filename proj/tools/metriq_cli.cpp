// metriq — command-line front end for the coherent-state quantization engine.
//
// Subcommands: quantize, spectrum, symbols, metric, bohr-sommerfeld,
// propagate, spin-check, verify. JSON is the canonical output (complex
// numbers as {re, im}); CSV only for tabular grids, with a manifest sidecar.
// Exit codes: 0 success, 1 failed verify rows (or unexpected internal error),
// 2 validation error, 3 numerical failure — the failure reason is emitted as
// {"error": kind, "message": ...}. The METRIQ_SEED environment variable
// overrides --seed; a --config JSON file merges under explicit flags.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metriq/metriq.hpp"

using namespace metriq;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 42;
    int threads = 1;
    bool emit_plot = false;
    double hbar = 1.0;
    int fock_dim = 64;
    double tail_fraction = 0.5;
    double omega = 1.0;
    double radius_sigmas = 0.0; // 0 = choose from observable degree
    int nodes_radial = 120;
    int nodes_angular = 120;

    // option handles for merge-under-flags logic
    CLI::Option *o_seed = nullptr, *o_threads = nullptr, *o_hbar = nullptr,
                *o_fock = nullptr, *o_tail = nullptr, *o_omega = nullptr,
                *o_radius = nullptr, *o_nr = nullptr, *o_na = nullptr;

    GlobalConfig cfg() const {
        GlobalConfig c;
        c.hbar = hbar;
        c.fock_dim = fock_dim;
        c.tail_fraction = tail_fraction;
        c.validate();
        return c;
    }
    FiducialSpec fid() const {
        FiducialSpec f;
        f.omega = omega;
        f.validate();
        return f;
    }
};

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("cannot open file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw InvalidParameter("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

// --config merges *under* explicit flags: a knob keeps its command-line value
// when the flag was given, otherwise takes the config-file value.
void merge_config_file(CommonOpts& o) {
    if (o.config_path.empty()) return;
    const Json j = load_json_file(o.config_path);
    auto take = [&](const CLI::Option* opt, const char* key, auto& slot) {
        using T = std::decay_t<decltype(slot)>;
        if ((!opt || opt->count() == 0) && j.contains(key)) slot = j.at(key).get<T>();
    };
    take(o.o_hbar, "hbar", o.hbar);
    take(o.o_fock, "fock_dim", o.fock_dim);
    take(o.o_tail, "tail_fraction", o.tail_fraction);
    take(o.o_omega, "omega", o.omega);
    take(o.o_seed, "seed", o.seed);
    take(o.o_threads, "threads", o.threads);
    take(o.o_radius, "radius_sigmas", o.radius_sigmas);
    take(o.o_nr, "nodes_radial", o.nodes_radial);
    take(o.o_na, "nodes_angular", o.nodes_angular);
}

void apply_env_seed(CommonOpts& o) {
    if (const char* env = std::getenv("METRIQ_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || (end && *end != '\0'))
            throw InvalidParameter("METRIQ_SEED is not an unsigned integer");
        o.seed = static_cast<std::uint64_t>(v);
    }
}

std::string join_command(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

RunManifest make_manifest(const std::string& command, const Json& resolved, std::uint64_t seed,
                          std::vector<std::string> outputs) {
    RunManifest m;
    m.command = command;
    m.config_digest = config_hash(resolved);
    m.seed = seed;
    m.outputs = std::move(outputs);
    return m;
}

void emit_json(const CommonOpts& o, const Json& payload) {
    const std::string s = payload.dump(2) + "\n";
    if (!o.out_path.empty())
        write_text_file(o.out_path, s);
    else
        std::cout << s;
}

// CSV either to --out (with a manifest sidecar) or to stdout.
void emit_csv(const CommonOpts& o, const std::vector<std::string>& header,
              const std::vector<std::vector<double>>& rows, const RunManifest& manifest) {
    if (!o.out_path.empty()) {
        write_csv(o.out_path, header, rows);
        write_text_file(o.out_path + ".manifest.json", manifest_to_json(manifest).dump(2) + "\n");
        if (o.emit_plot) {
            std::string s;
            for (const auto& row : rows) {
                for (std::size_t i = 0; i < row.size(); ++i)
                    s += (i ? " " : "") + format_double(row[i]);
                s += "\n";
            }
            write_text_file(o.out_path + ".dat", s);
        }
    } else {
        std::string s;
        for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
        s += "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                s += (i ? "," : "") + format_double(row[i]);
            s += "\n";
        }
        std::cout << s;
    }
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw InvalidParameter(std::string(what) + ": cannot parse number '" + tok + "'");
        }
    }
    if (out.empty()) throw InvalidParameter(std::string(what) + ": empty value");
    return out;
}

const Chart& chart_by_alias(const std::string& name) {
    std::string id = name;
    if (id == "polar") id = "polar_action_angle";
    if (id == "rotated") id = "rotated_45";
    return find_chart(id); // throws ChartMismatch for unknown ids
}

ClassicalObservable load_observable(const std::string& path) {
    return observable_from_json(load_json_file(path));
}

ClassicalObservable to_cartesian_observable(const ClassicalObservable& h) {
    if (h.chart_id == "cartesian") return h;
    return transport(h, find_chart(h.chart_id), find_chart("cartesian"));
}

// Degree-aware quadrature: radius 10 + 2·deg sigmas (floor 8), clipped to
// what the truncation can hold. Returns the quadrature and whether clipping
// occurred.
std::pair<PhaseSpaceQuadrature, bool> auto_quadrature(const ClassicalObservable& h_cart,
                                                      const CommonOpts& o,
                                                      const GlobalConfig& cfg,
                                                      const FiducialSpec& fid) {
    const double cap = toeplitz_radius_capacity_sigmas(cfg.fock_dim);
    double want = o.radius_sigmas;
    if (!(want > 0.0)) {
        const int deg = h_cart.is_polynomial() ? poly_total_degree(h_cart.terms) : 2;
        want = std::max(8.0, 10.0 + 2.0 * deg);
    }
    bool clipped = false;
    double r = want;
    if (r > cap - 1e-9) {
        r = cap - 1e-9;
        clipped = true;
    }
    if (r < 8.0)
        throw TailTruncation("fock_dim " + std::to_string(cfg.fock_dim) +
                             " cannot hold an 8-sigma quadrature disk; increase --fock-dim");
    return {default_quadrature(cfg, fid, r, o.nodes_radial, o.nodes_angular), clipped};
}

// ---------------------------------------------------------------- quantize
int run_quantize(const CommonOpts& o, const std::string& obs_path,
                 const std::string& command) {
    const GlobalConfig cfg = o.cfg();
    const FiducialSpec fid = o.fid();
    const ClassicalObservable h_in = load_observable(obs_path);
    const ClassicalObservable h = to_cartesian_observable(h_in);
    const auto [quad, clipped] = auto_quadrature(h, o, cfg, fid);
    const AdmissibilityReport adm = admissibility(h);
    const FockOperator op = toeplitz_quantize(h, quad, fid, cfg);

    Json resolved = config_to_json(cfg, fid);
    resolved["observable"] = observable_to_json(h_in);
    resolved["quadrature"] = quadrature_to_json(quad);
    Json out{{"operator", operator_to_json(op)},
             {"admissibility",
              {{"square_integrable_weighted", adm.cond1},
               {"quartic_integrable_weighted", adm.cond2},
               {"growth_class", to_string(adm.cond3)},
               {"notes", adm.notes}}},
             {"quadrature", quadrature_to_json(quad)},
             {"config", config_to_json(cfg, fid)}};
    out["quadrature"]["radius_clipped"] = clipped;
    if (h_in.chart_id != "cartesian") out["transported_from"] = h_in.chart_id;
    std::vector<std::string> outputs;
    if (!o.out_path.empty()) outputs.push_back(o.out_path);
    out["manifest"] = manifest_to_json(make_manifest(command, resolved, o.seed, outputs));
    emit_json(o, out);
    return 0;
}

// ---------------------------------------------------------------- spectrum
int run_spectrum(const CommonOpts& o, const std::string& obs_path, int levels,
                 const std::string& command) {
    if (levels < 1) throw InvalidParameter("--levels must be >= 1");
    const GlobalConfig cfg = o.cfg();
    const FiducialSpec fid = o.fid();
    const ClassicalObservable h = to_cartesian_observable(load_observable(obs_path));
    const auto [quad, clipped] = auto_quadrature(h, o, cfg, fid);

    // Eigenvalues are taken on the disk-trusted block: past it the quantized
    // entries sink toward zero (cutoff artifacts masquerading as low levels).
    // The doubled-dimension run re-derives its quadrature, so its disk can
    // grow with the capacity; that is the axis along which levels converge.
    GlobalConfig cfg2 = cfg;
    cfg2.fock_dim = 2 * cfg.fock_dim;
    const auto [quad2, clipped2] = auto_quadrature(h, o, cfg2, fid);
    const auto trusted_levels = [&](const PhaseSpaceQuadrature& qd, const GlobalConfig& c) {
        const FockOperator full = toeplitz_quantize(h, qd, fid, c);
        FockOperator block;
        block.dim = toeplitz_trusted_dim(qd.radius_sigmas(), c.fock_dim);
        if (levels > block.dim)
            throw InvalidParameter("--levels " + std::to_string(levels) +
                                   " exceeds the trusted block (" +
                                   std::to_string(block.dim) + " states at radius " +
                                   std::to_string(qd.radius_sigmas()) +
                                   " sigma); increase --fock-dim");
        block.entries = full.entries.topLeftCorner(block.dim, block.dim);
        block.label = full.label;
        return std::make_pair(spectrum(block, levels, c), block.dim);
    };
    const auto [e1, m1] = trusted_levels(quad, cfg);
    const auto [e2, m2] = trusted_levels(quad2, cfg2);
    double conv = 0.0;
    for (int i = 0; i < levels; ++i) conv = std::max(conv, std::abs(e1[i] - e2[i]));

    Json resolved = config_to_json(cfg, fid);
    resolved["observable"] = observable_to_json(load_observable(obs_path));
    resolved["quadrature"] = quadrature_to_json(quad);
    resolved["levels"] = levels;
    Json out{{"levels", e1},
             {"levels_at_double_dim", e2},
             {"convergence", conv},
             {"fock_dim", cfg.fock_dim},
             {"trusted_dim", m1},
             {"trusted_dim_at_double_dim", m2},
             {"quadrature", quadrature_to_json(quad)},
             {"config", config_to_json(cfg, fid)}};
    out["quadrature"]["radius_clipped"] = clipped;
    out["quadrature_at_double_dim"] = quadrature_to_json(quad2);
    out["quadrature_at_double_dim"]["radius_clipped"] = clipped2;
    std::vector<std::string> outputs;
    if (!o.out_path.empty()) outputs.push_back(o.out_path);
    out["manifest"] = manifest_to_json(make_manifest(command, resolved, o.seed, outputs));
    emit_json(o, out);
    if (o.emit_plot && !o.out_path.empty()) {
        std::string s;
        for (std::size_t n = 0; n < e1.size(); ++n)
            s += std::to_string(n) + " " + format_double(e1[n]) + "\n";
        write_text_file(o.out_path + ".dat", s);
    }
    return 0;
}

// ----------------------------------------------------------------- symbols
int run_symbols(const CommonOpts& o, const std::string& obs_path, int grid_n,
                double grid_range, const std::string& command) {
    if (grid_n < 2 || !(grid_range > 0.0))
        throw InvalidParameter("--grid needs >= 2 points and --range > 0");
    const GlobalConfig cfg = o.cfg();
    const FiducialSpec fid = o.fid();
    const ClassicalObservable h = to_cartesian_observable(load_observable(obs_path));
    const auto [quad, clipped] = auto_quadrature(h, o, cfg, fid);

    std::vector<PhaseSpacePoint> pts;
    for (int i = 0; i < grid_n; ++i)
        for (int j = 0; j < grid_n; ++j) {
            const double p = -grid_range + 2.0 * grid_range * i / (grid_n - 1);
            const double q = -grid_range + 2.0 * grid_range * j / (grid_n - 1);
            pts.push_back({p, q, "cartesian"});
        }
    const auto samples = upper_of_toeplitz_gap(h, quad, fid, cfg, pts);
    std::vector<std::vector<double>> rows;
    rows.reserve(samples.size());
    for (const auto& s : samples) rows.push_back({s.p, s.q, s.lower, s.upper, s.gap});

    Json resolved = config_to_json(cfg, fid);
    resolved["observable"] = observable_to_json(load_observable(obs_path));
    resolved["quadrature"] = quadrature_to_json(quad);
    resolved["grid"] = grid_n;
    resolved["range"] = grid_range;
    std::vector<std::string> outputs;
    if (!o.out_path.empty()) outputs.push_back(o.out_path);
    emit_csv(o, {"p", "q", "lower", "upper", "gap"}, rows,
             make_manifest(command, resolved, o.seed, outputs));
    return 0;
}

// ------------------------------------------------------------------ metric
int run_metric(const CommonOpts& o, const std::string& chart_name,
               const std::string& points_path, const std::string& command) {
    const GlobalConfig cfg = o.cfg();
    const FiducialSpec fid = o.fid();
    const Chart& chart = chart_by_alias(chart_name);

    std::ifstream in(points_path);
    if (!in) throw InvalidParameter("cannot open points file: " + points_path);
    std::vector<std::array<double, 2>> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) continue;
        try {
            std::size_t pa = 0, pb = 0;
            const double c1 = std::stod(a, &pa), c2 = std::stod(b, &pb);
            pts.push_back({c1, c2});
        } catch (const std::exception&) {
            continue; // header or comment line
        }
    }
    if (pts.empty())
        throw InvalidParameter("no parsable c1,c2 rows in " + points_path);

    // Gauge expressed on the Cartesian plane, so dG enters the pulled-back
    // one-form exactly as the chart demands.
    GaugeFn gauge_cart = nullptr;
    if (chart.gauge) {
        const Chart chart_copy = chart;
        gauge_cart = [chart_copy](double p, double q) {
            const auto c = chart_copy.from_cartesian(p, q);
            return chart_copy.gauge(c[0], c[1]);
        };
    }

    std::vector<std::vector<double>> rows;
    for (const auto& [c1, c2] : pts) {
        const PhaseSpacePoint pt{c1, c2, chart.id};
        const Eigen::Matrix2d g = metric_in_chart(chart, pt, fid, cfg);
        const auto x = chart.to_cartesian(c1, c2);
        const PhaseSpacePoint px{x[0], x[1], "cartesian"};
        const auto theta_cart = one_form(px, fid, cfg, 0.0, gauge_cart);
        const auto jac = chart_jacobian(chart, c1, c2);
        const double th1 = theta_cart[0] * jac[0][0] + theta_cart[1] * jac[1][0];
        const double th2 = theta_cart[0] * jac[0][1] + theta_cart[1] * jac[1][1];
        const double om = symplectic_form(px, fid, cfg) * chart_jacobian_det(chart, c1, c2);
        rows.push_back({c1, c2, g(0, 0), g(0, 1), g(1, 1), th1, th2, om});
    }

    Json resolved = config_to_json(cfg, fid);
    resolved["chart"] = chart.id;
    resolved["points_file"] = points_path;
    std::vector<std::string> outputs;
    if (!o.out_path.empty()) outputs.push_back(o.out_path);
    emit_csv(o, {"c1", "c2", "g11", "g12", "g22", "theta1", "theta2", "omega"}, rows,
             make_manifest(command, resolved, o.seed, outputs));
    return 0;
}

// --------------------------------------------------------- bohr-sommerfeld
int run_bohr_sommerfeld(const CommonOpts& o, const std::string& obs_path, int levels,
                        const std::string& command) {
    if (levels < 1) throw InvalidParameter("--levels must be >= 1");
    const GlobalConfig cfg = o.cfg();
    const ClassicalObservable h = load_observable(obs_path);
    const std::vector<double> es = bohr_sommerfeld_levels(h, levels - 1, cfg);
    std::vector<std::vector<double>> rows;
    for (std::size_t n = 0; n < es.size(); ++n) {
        const double target = (n + 0.5) * 2.0 * M_PI * cfg.hbar;
        const double residual = orbit_area(h, es[n]).area - target;
        rows.push_back({static_cast<double>(n), es[n], residual});
    }
    Json resolved = config_to_json(cfg, o.fid());
    resolved["observable"] = observable_to_json(h);
    resolved["levels"] = levels;
    std::vector<std::string> outputs;
    if (!o.out_path.empty()) outputs.push_back(o.out_path);
    emit_csv(o, {"n", "E_n", "area_residual"}, rows,
             make_manifest(command, resolved, o.seed, outputs));
    return 0;
}

// --------------------------------------------------------------- propagate
int run_propagate(const CommonOpts& o, const std::string& method,
                  const std::string& obs_path, const std::string& from_s,
                  const std::string& to_s, double T, double nu, long long samples,
                  int steps, int batches, bool no_antithetic, int lattice_n,
                  const std::string& command) {
    const GlobalConfig cfg = o.cfg();
    const FiducialSpec fid = o.fid();
    const ClassicalObservable h = to_cartesian_observable(load_observable(obs_path));
    const auto from = parse_number_list(from_s, "--from");
    const auto to = parse_number_list(to_s, "--to");

    PropagatorEstimate est;
    if (method == "exact" || method == "wiener") {
        if (from.size() != 2 || to.size() != 2)
            throw InvalidParameter("--from/--to must be 'p,q' pairs for method " + method);
        const PhaseSpacePoint a{from[0], from[1], "cartesian"};
        const PhaseSpacePoint b{to[0], to[1], "cartesian"};
        const auto [quad, clipped] = auto_quadrature(h, o, cfg, fid);
        (void)clipped;
        if (method == "exact") {
            est = exact_propagator(h, a, b, T, quad, fid, cfg);
        } else {
            WienerConfig w;
            w.nu = nu;
            w.n_steps = steps;
            w.n_samples = samples;
            w.seed = o.seed;
            w.antithetic = !no_antithetic;
            w.n_batches = batches;
            w.threads = o.threads;
            est = wiener_propagator(h, a, b, T, w, quad, fid, cfg);
        }
    } else if (method == "lattice") {
        if (from.size() != 1 || to.size() != 1)
            throw InvalidParameter(
                "--from/--to must be single position values for method lattice");
        LatticeConfig lat;
        lat.T = T;
        lat.N = lattice_n;
        est = lattice_weyl_propagator(h, from[0], to[0], lat, cfg);
    } else {
        throw InvalidParameter("unknown method '" + method + "' (exact|lattice|wiener)");
    }

    Json resolved = config_to_json(cfg, fid);
    resolved["observable"] = observable_to_json(load_observable(obs_path));
    resolved["method"] = method;
    resolved["T"] = T;
    resolved["from"] = from;
    resolved["to"] = to;
    resolved["params"] = est.params;
    Json out{{"re", est.value.real()},
             {"im", est.value.imag()},
             {"stderr", est.stderr_},
             {"method", to_string(est.method)},
             {"params", est.params}};
    std::vector<std::string> outputs;
    if (!o.out_path.empty()) outputs.push_back(o.out_path);
    out["manifest"] = manifest_to_json(make_manifest(command, resolved, o.seed, outputs));
    emit_json(o, out);
    return 0;
}

// -------------------------------------------------------------- spin-check
int run_spin_check(const CommonOpts& o, double s, int nodes, const std::string& command) {
    SpinSpec spec{s, o.hbar};
    spec.validate();
    if (nodes < 1) throw InvalidParameter("--nodes must be >= 1");
    const double casimir = spin_casimir_defect(spec);
    const double resolution = spin_resolution_defect(spec, nodes, nodes);
    const SpinRotator rot(spec);
    double roundness = 0.0;
    for (const double theta : {0.4, 0.8, 1.2, 1.6, 2.0, 2.4, 2.8}) {
        const Eigen::Matrix2d g = spin_induced_metric(theta, 0.3, spec, &rot);
        const double s2 = std::sin(theta) * std::sin(theta);
        roundness = std::max(roundness, std::abs(g(1, 1) / (g(0, 0) * s2) - 1.0));
    }
    Json resolved{{"spin", s}, {"nodes", nodes}, {"hbar", o.hbar}};
    Json out{{"casimir_defect", casimir},
             {"resolution_defect", resolution},
             {"metric_roundness", roundness},
             {"spin", s},
             {"nodes", nodes},
             {"hbar", o.hbar}};
    std::vector<std::string> outputs;
    if (!o.out_path.empty()) outputs.push_back(o.out_path);
    out["manifest"] = manifest_to_json(make_manifest(command, resolved, o.seed, outputs));
    emit_json(o, out);
    return 0;
}

// ------------------------------------------------------------------ verify
struct VerifyRow {
    std::string name;
    bool pass = false;
    std::string detail;
};

void add_row(std::vector<VerifyRow>& rows, const std::string& name, bool pass,
             const std::string& detail) {
    rows.push_back({name, pass, detail});
}

void add_tol_row(std::vector<VerifyRow>& rows, const std::string& name, double measured,
                 double tol) {
    std::ostringstream d;
    d << "measured " << measured << " (tol " << tol << ")";
    rows.push_back({name, measured <= tol, d.str()});
}

void verify_core(const CommonOpts& o, std::vector<VerifyRow>& rows) {
    const GlobalConfig cfg = o.cfg();
    const FiducialSpec fid = o.fid();
    const Kinematics kin = build_kinematics(cfg, fid.omega);
    add_tol_row(rows, "core/commutator-interior", commutator_block_defect(kin), 1e-10);

    double fdef = 0.0;
    for (const double om : {0.5, 1.0, 4.0})
        fdef = std::max(fdef, fiducial_condition_defect(build_kinematics(cfg, om)));
    add_tol_row(rows, "core/fiducial-condition", fdef, 1e-12);

    // Closed-form kernel against the numeric overlap on random pairs.
    std::mt19937_64 gen(12345);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const double r3 = 3.0 * std::sqrt(cfg.hbar);
    const WeylOps ops(cfg, fid);
    double kerr = 0.0;
    for (int k = 0; k < 50; ++k) {
        const double pa = r3 * unif(gen), qa = r3 * unif(gen);
        const double pb = r3 * unif(gen), qb = r3 * unif(gen);
        const Complex num = ops.displace(pb, qb).dot(ops.displace(pa, qa));
        const Complex cf = overlap_kernel(cfg, fid, pb, qb, pa, qa);
        kerr = std::max(kerr, std::abs(num - cf));
    }
    add_tol_row(rows, "core/kernel-closed-form", kerr, 1e-9);

    const PhaseSpaceQuadrature quad = default_quadrature(cfg, fid, 10.0, 120, 120);
    add_tol_row(rows, "core/quadrature-selftest", std::abs(quadrature_self_test(quad, cfg, fid)),
                1e-10);
    // The resolution defect is asserted on the quarter block (16-dim at the
    // default truncation): a 10-sigma disk concentrates around occupation 50,
    // so the half block would be dominated by honest disk-truncation mass.
    GlobalConfig cfg_res = cfg;
    cfg_res.tail_fraction = 0.25;
    add_tol_row(rows, "core/resolution-of-unity",
                resolution_of_unity_defect(quad, fid, cfg_res), 1e-8);
    add_tol_row(rows, "core/kernel-chain",
                kernel_chain_defect({0.4, -0.3, "cartesian"}, {-0.2, 0.5, "cartesian"}, quad,
                                    fid, cfg),
                1e-8);
}

void verify_symbols(const CommonOpts& o, std::vector<VerifyRow>& rows) {
    const GlobalConfig cfg = o.cfg();
    const FiducialSpec fid = o.fid();
    const ClassicalObservable h =
        make_polynomial_observable({{0.5, 2, 0}, {0.5, 0, 2}}, "cartesian");
    const AdmissibilityReport a1 = admissibility(h);
    add_row(rows, "symbols/admissibility-harmonic",
            a1.cond3 == AdmissibilityReport::Cond3::semibounded_even_leading,
            std::string("growth class ") + to_string(a1.cond3));
    const AdmissibilityReport a2 =
        admissibility(make_polynomial_observable({{1.0, 0, 3}}, "cartesian"));
    add_row(rows, "symbols/admissibility-odd-cubic",
            a2.cond3 == AdmissibilityReport::Cond3::indefinite,
            std::string("growth class ") + to_string(a2.cond3));

    // Operator-identity rows use a doubled reference dimension so a 14-sigma
    // disk fits the capacity: at 64 dimensions the disk is capped at 9.39
    // sigma and the interior-block identity only holds to ~1e-3.
    GlobalConfig cfg_q = cfg;
    cfg_q.fock_dim = std::max(2 * cfg.fock_dim, 128);
    cfg_q.tail_fraction = 0.25;
    const PhaseSpaceQuadrature quad = default_quadrature(cfg_q, fid, 14.0, 160, 160);
    const FockOperator top = toeplitz_quantize(h, quad, fid, cfg_q);
    const Kinematics kin = build_kinematics(cfg_q, fid.omega);
    const int m = cfg_q.interior_dim();
    const CMatrix expect = 0.5 * (kin.P.entries * kin.P.entries +
                                  kin.Q.entries * kin.Q.entries) +
                           0.5 * cfg_q.hbar * CMatrix::Identity(cfg_q.fock_dim, cfg_q.fock_dim);
    const double tdef =
        (top.entries.topLeftCorner(m, m) - expect.topLeftCorner(m, m)).cwiseAbs().maxCoeff();
    add_tol_row(rows, "symbols/toeplitz-harmonic-identity", tdef, 1e-8);

    FockOperator hm;
    hm.dim = cfg_q.fock_dim;
    hm.entries = 0.5 * (kin.P.entries * kin.P.entries + kin.Q.entries * kin.Q.entries) -
                 0.5 * cfg_q.hbar * CMatrix::Identity(cfg_q.fock_dim, cfg_q.fock_dim);
    hm.label = "(P^2+Q^2-hbar)/2";
    const WeylOps ops(cfg_q, fid);
    double uerr = 0.0, gerr = 0.0;
    for (double p = -2.0; p <= 2.0; p += 1.0)
        for (double q = -2.0; q <= 2.0; q += 1.0) {
            const PhaseSpacePoint pt{p, q, "cartesian"};
            uerr = std::max(uerr, std::abs(upper_symbol(hm, pt, fid, cfg_q, &ops) -
                                           0.5 * (p * p + q * q)));
            gerr = std::max(gerr, std::abs(upper_symbol(top, pt, fid, cfg_q, &ops) -
                                           0.5 * (p * p + q * q) - cfg_q.hbar));
        }
    add_tol_row(rows, "symbols/upper-symbol-identity", uerr, 1e-7);
    add_tol_row(rows, "symbols/upper-minus-lower-gap", gerr, 1e-7);
}

void verify_semiclassical(const CommonOpts& o, std::vector<VerifyRow>& rows) {
    const GlobalConfig cfg = o.cfg();
    const ClassicalObservable h =
        make_polynomial_observable({{0.5, 2, 0}, {0.5, 0, 2}}, "cartesian");
    const auto es = bohr_sommerfeld_levels(h, 5, cfg);
    double herr = 0.0;
    for (std::size_t n = 0; n < es.size(); ++n)
        herr = std::max(herr, std::abs(es[n] - (n + 0.5) * cfg.hbar));
    add_tol_row(rows, "semiclassical/harmonic-cartesian", herr, 1e-8);

    const ClassicalObservable hp =
        transport(h, find_chart("cartesian"), find_chart("polar_action_angle"));
    const auto esp = bohr_sommerfeld_levels(hp, 5, cfg);
    double perr = 0.0;
    for (std::size_t n = 0; n < esp.size(); ++n)
        perr = std::max(perr, std::abs(esp[n] - (n + 0.5) * cfg.hbar));
    add_tol_row(rows, "semiclassical/harmonic-polar", perr, 1e-8);

    double mono = 1.0;
    for (std::size_t n = 1; n < es.size(); ++n) mono = std::min(mono, es[n] - es[n - 1]);
    add_row(rows, "semiclassical/levels-monotone", mono > 0.0,
            "min level spacing " + std::to_string(mono));

    add_tol_row(rows, "semiclassical/area-invariance-harmonic",
                area_invariance_check(h, find_chart("cartesian"),
                                      find_chart("polar_action_angle"), 1.0),
                1e-6);
    const ClassicalObservable quartic = make_polynomial_observable(
        {{0.5, 2, 0}, {0.5, 0, 2}, {1.0, 0, 4}}, "cartesian");
    add_tol_row(rows, "semiclassical/area-invariance-quartic",
                area_invariance_check(quartic, find_chart("cartesian"),
                                      find_chart("rotated_45"), 2.0),
                1e-6);
}

void verify_dynamics(const CommonOpts& o, std::vector<VerifyRow>& rows) {
    const GlobalConfig cfg = o.cfg();
    const FiducialSpec fid = o.fid();
    const Complex target = std::sqrt(M_PI) * Complex(1.0, 1.0);
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    double last = 0.0;
    for (const double nu : {1.0, 10.0, 100.0, 1000.0}) {
        last = std::abs(fresnel_toy(nu) - target);
        monotone = monotone && (last < prev);
        prev = last;
    }
    add_row(rows, "dynamics/fresnel-monotone", monotone && last < 2e-3,
            "final error " + std::to_string(last));

    const ClassicalObservable free_h = make_polynomial_observable({{0.5, 2, 0}}, "cartesian");
    LatticeConfig lat1{1.0, 1, "weyl_midpoint"};
    const Complex k_free = lattice_weyl_propagator(free_h, 0.0, 0.0, lat1, cfg).value;
    const Complex k_free_exact = std::sqrt(1.0 / (2.0 * M_PI * cfg.hbar * Complex(0.0, 1.0)));
    add_tol_row(rows, "dynamics/lattice-free-exact", std::abs(k_free - k_free_exact), 1e-10);

    // Midpoint-rule convergence against the closed-form oscillator kernel
    // (T=π/2): K = √(1/2πiℏ sin T)·exp{i[(q'²+q″²)cos T − 2q'q″]/2ℏ sin T}.
    const ClassicalObservable harm =
        make_polynomial_observable({{0.5, 2, 0}, {0.5, 0, 2}}, "cartesian");
    const double T = M_PI / 2.0, q0 = 0.3, q1 = -0.2;
    const Complex mehler =
        std::sqrt(1.0 / (2.0 * M_PI * cfg.hbar * Complex(0.0, 1.0) * std::sin(T))) *
        std::exp(Complex(0.0, ((q0 * q0 + q1 * q1) * std::cos(T) - 2.0 * q0 * q1) /
                                  (2.0 * cfg.hbar * std::sin(T))));
    const double e100 =
        std::abs(lattice_weyl_propagator(harm, q0, q1, {T, 100, "weyl_midpoint"}, cfg).value -
                 mehler);
    const double e200 =
        std::abs(lattice_weyl_propagator(harm, q0, q1, {T, 200, "weyl_midpoint"}, cfg).value -
                 mehler);
    // First-order scheme with a small slack: halving dt must shrink the
    // error by at least 1.9x (order 0.926), the same gate the exact-kernel
    // convergence comparison uses.
    const double order = std::log2(e100 / e200);
    add_row(rows, "dynamics/lattice-midpoint-order", e100 / e200 >= 1.9,
            "observed order " + std::to_string(order));

    // Wiener at finite ν against its closed form (h = 0).
    WienerConfig w;
    w.nu = 8.0;
    w.n_steps = 256;
    w.n_samples = 20000;
    w.seed = o.seed;
    w.threads = o.threads;
    const PhaseSpacePoint a{0.0, 0.0, "cartesian"}, b{0.3, 0.0, "cartesian"};
    const PhaseSpaceQuadrature quad = default_quadrature(cfg, fid, 8.0, 60, 60);
    const ClassicalObservable zero = make_polynomial_observable({}, "cartesian");
    const PropagatorEstimate west = wiener_propagator(zero, a, b, 0.3, w, quad, fid, cfg);
    const Complex gnu = wiener_free_kernel_finite_nu(0.3, 0.0, 0.0, 0.0, 0.3, 8.0, cfg);
    const double dev = std::abs(west.value - gnu) / west.stderr_;
    add_row(rows, "dynamics/wiener-matches-finite-nu-form", dev < 3.0,
            "deviation " + std::to_string(dev) + " stderr units");

    const ClassicalObservable q2 = make_polynomial_observable({{1.0, 0, 2}}, "cartesian");
    const double ratio =
        chart_covariance_check(q2, find_chart("rotated_45"), a, b, 0.3, w, quad, fid, cfg);
    add_row(rows, "dynamics/wiener-chart-covariance", ratio < 3.0,
            "ratio " + std::to_string(ratio));

    const auto [quad2, clipped2] = auto_quadrature(harm, o, cfg, fid);
    (void)clipped2;
    const PropagatorEstimate e0 = exact_propagator(harm, a, b, 0.0, quad2, fid, cfg);
    const WeylOps ops(cfg, fid);
    const Complex ov = ops.displace(b.c1, b.c2).dot(ops.displace(a.c1, a.c2));
    add_tol_row(rows, "dynamics/exact-T0-is-overlap", std::abs(e0.value - ov), 1e-12);
}

void verify_spin(const CommonOpts& o, std::vector<VerifyRow>& rows) {
    double cmax = 0.0;
    for (double s = 0.5; s <= 3.0; s += 0.5)
        cmax = std::max(cmax, spin_casimir_defect({s, o.hbar}));
    add_tol_row(rows, "spin/casimir", cmax, 1e-12);
    add_tol_row(rows, "spin/resolution-s2", spin_resolution_defect({2.0, o.hbar}, 32, 32),
                1e-10);
    const SpinSpec spec{1.0, o.hbar};
    const SpinRotator rot(spec);
    double round = 0.0, cons = 0.0;
    for (const double theta : {0.5, 1.0, 1.5, 2.0, 2.5}) {
        const Eigen::Matrix2d g = spin_induced_metric(theta, 0.7, spec, &rot);
        round = std::max(round,
                         std::abs(g(1, 1) / (g(0, 0) * std::sin(theta) * std::sin(theta)) - 1.0));
        cons = std::max(cons, std::abs(g(0, 0) / (o.hbar * o.hbar * spec.s) - 1.0));
    }
    add_tol_row(rows, "spin/metric-roundness", round, 1e-5);
    add_tol_row(rows, "spin/metric-constant", cons, 1e-5);
}

int run_verify(const CommonOpts& o, const std::string& suite, const std::string& command) {
    std::vector<VerifyRow> rows;
    if (suite == "core") verify_core(o, rows);
    else if (suite == "symbols") verify_symbols(o, rows);
    else if (suite == "semiclassical") verify_semiclassical(o, rows);
    else if (suite == "dynamics") verify_dynamics(o, rows);
    else if (suite == "spin") verify_spin(o, rows);
    else
        throw InvalidParameter("unknown suite '" + suite +
                               "' (core|symbols|semiclassical|dynamics|spin)");
    int failures = 0;
    for (const auto& r : rows) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
        if (!r.pass) ++failures;
    }
    std::cout << (failures == 0 ? "all " : "") << rows.size() - failures << "/" << rows.size()
              << " rows passed\n";
    if (!o.out_path.empty()) {
        Json jrows = Json::array();
        for (const auto& r : rows)
            jrows.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
        Json resolved{{"suite", suite}, {"hbar", o.hbar}, {"fock_dim", o.fock_dim}};
        Json out{{"suite", suite}, {"rows", jrows}, {"failures", failures}};
        out["manifest"] =
            manifest_to_json(make_manifest(command, resolved, o.seed, {o.out_path}));
        write_text_file(o.out_path, out.dump(2) + "\n");
    }
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"metriq: coherent-state (metrical) quantization engine"};
    app.set_version_flag("--version", "metriq 1.0.0");
    CommonOpts o;
    o.o_hbar = app.add_option("--hbar", o.hbar, "Planck parameter");
    o.o_fock = app.add_option("--fock-dim", o.fock_dim, "Fock truncation dimension");
    o.o_tail = app.add_option("--tail-fraction", o.tail_fraction,
                              "interior block fraction for invariant checks");
    o.o_omega = app.add_option("--omega", o.omega, "fiducial frequency");
    o.o_seed = app.add_option("--seed", o.seed, "RNG seed (env METRIQ_SEED overrides)");
    o.o_threads = app.add_option("--threads", o.threads, "parallelism cap");
    o.o_radius = app.add_option("--radius-sigmas", o.radius_sigmas,
                                "quadrature disk radius in sigma units (0 = auto)");
    o.o_nr = app.add_option("--nodes-radial", o.nodes_radial, "radial quadrature nodes");
    o.o_na = app.add_option("--nodes-angular", o.nodes_angular, "angular quadrature nodes");
    app.add_option("--config", o.config_path, "JSON config merged under explicit flags");
    app.add_option("--out", o.out_path, "output file (default stdout)");
    app.add_flag("--emit-plot-data", o.emit_plot, "write gnuplot-ready .dat next to --out");
    app.require_subcommand(1);

    std::string obs_path, chart_name = "cartesian", points_path, method = "exact";
    std::string from_s = "0,0", to_s = "0,0", suite = "core";
    int levels = 8, grid_n = 9, lattice_n = 200, steps = 256, batches = 20, nodes = 32;
    long long samples = 100000;
    double grid_range = 2.0, T = 0.5, nu = 8.0, spin_s = 0.5;
    bool no_antithetic = false;

    CLI::App* c_quant = app.add_subcommand("quantize", "Toeplitz-quantize an observable");
    c_quant->add_option("--observable", obs_path, "observable JSON file")->required();

    CLI::App* c_spec = app.add_subcommand("spectrum", "low spectrum of the quantized observable");
    c_spec->add_option("--observable", obs_path)->required();
    c_spec->add_option("--levels", levels, "number of eigenvalues");

    CLI::App* c_symb = app.add_subcommand("symbols", "lower/upper symbol gap on a grid");
    c_symb->add_option("--observable", obs_path)->required();
    c_symb->add_option("--grid", grid_n, "grid points per axis");
    c_symb->add_option("--range", grid_range, "grid half-width");

    CLI::App* c_metr = app.add_subcommand("metric", "phase-space geometry at given points");
    c_metr->add_option("--chart", chart_name, "chart id (cartesian|polar|rotated_45)");
    c_metr->add_option("--points", points_path, "CSV of c1,c2 rows")->required();

    CLI::App* c_bs = app.add_subcommand("bohr-sommerfeld", "semiclassical levels");
    c_bs->add_option("--observable", obs_path)->required();
    c_bs->add_option("--levels", levels, "number of levels");

    CLI::App* c_prop = app.add_subcommand("propagate", "propagator by exact/lattice/wiener");
    c_prop->add_option("--method", method, "exact|lattice|wiener")->required();
    c_prop->add_option("--observable", obs_path)->required();
    c_prop->add_option("--from", from_s, "initial point p,q (lattice: position only)");
    c_prop->add_option("--to", to_s, "final point p,q (lattice: position only)");
    c_prop->add_option("--T", T, "total time")->required();
    c_prop->add_option("--nu", nu, "Wiener diffusion constant");
    c_prop->add_option("--samples", samples, "Monte Carlo paths");
    c_prop->add_option("--steps", steps, "bridge time steps");
    c_prop->add_option("--batches", batches, "error-bar batches");
    c_prop->add_flag("--no-antithetic", no_antithetic, "disable antithetic pairing");
    c_prop->add_option("--lattice-n", lattice_n, "interior lattice points N");

    CLI::App* c_spin = app.add_subcommand("spin-check", "SU(2) kinematics checks");
    c_spin->add_option("--spin", spin_s, "spin s (half-integer)")->required();
    c_spin->add_option("--nodes", nodes, "quadrature nodes per sphere axis");

    CLI::App* c_ver = app.add_subcommand("verify", "run a module invariant suite");
    c_ver->add_option("--suite", suite, "core|symbols|semiclassical|dynamics|spin")->required();

    for (CLI::App* sub : {c_quant, c_spec, c_symb, c_metr, c_bs, c_prop, c_spin, c_ver})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string command = join_command(argc, argv);
    try {
        merge_config_file(o);
        apply_env_seed(o);
        if (app.got_subcommand(c_quant)) return run_quantize(o, obs_path, command);
        if (app.got_subcommand(c_spec)) return run_spectrum(o, obs_path, levels, command);
        if (app.got_subcommand(c_symb))
            return run_symbols(o, obs_path, grid_n, grid_range, command);
        if (app.got_subcommand(c_metr)) return run_metric(o, chart_name, points_path, command);
        if (app.got_subcommand(c_bs)) return run_bohr_sommerfeld(o, obs_path, levels, command);
        if (app.got_subcommand(c_prop))
            return run_propagate(o, method, obs_path, from_s, to_s, T, nu, samples, steps,
                                 batches, no_antithetic, lattice_n, command);
        if (app.got_subcommand(c_spin)) return run_spin_check(o, spin_s, nodes, command);
        if (app.got_subcommand(c_ver)) return run_verify(o, suite, command);
        throw InvalidParameter("no subcommand given");
    } catch (const MetriqError& e) {
        Json err{{"error", e.kind()}, {"message", e.what()}};
        std::cout << err.dump(2) << "\n";
        return e.error_class() == ErrorClass::validation ? 2 : 3;
    } catch (const Json::exception& e) {
        Json err{{"error", "InvalidParameter"}, {"message", e.what()}};
        std::cout << err.dump(2) << "\n";
        return 2;
    } catch (const std::exception& e) {
        Json err{{"error", "Internal"}, {"message", e.what()}};
        std::cout << err.dump(2) << "\n";
        return 1;
    }
}
