// emflow: command-line front end for the charged-particle toolkit.
//
//   emflow integrate --scene s.toml --system lfe --qm 1 --span 1
//   emflow connect   --scene s.toml --kind lfe --qm 1
//   emflow scan      --scene s.toml --qm-grid 0.1:1.0:10
//   emflow action    --scene s.toml --which J --extremize
//   emflow check     --scene s.toml
//   emflow schema
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "scene.hpp"

namespace fs = std::filesystem;
using namespace emflow;
using nlohmann::json;
using cli::Scene;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

// A failure whose partial output has already been written.
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string scene;
    std::string out_dir;
    std::string name;
    std::string system;
    std::string kind;
    std::string which;
    std::string grid;
    std::string curve;
    std::optional<double> qm, Q, eps, beta, span, dlambda;
    std::optional<std::int64_t> seed;
    std::optional<std::size_t> nodes;
    std::size_t workers = 0;
    bool extremize = false;
    bool with_trajectories = false;
};

// ---------------------------------------------------------------------------
// Output helpers

fs::path output_dir(const Options& o) {
    std::string dir = o.out_dir;
    if (dir.empty())
        if (const char* env = std::getenv("EMFLOW_OUTPUT_DIR")) dir = env;
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    return dir;
}

std::string stem(const Options& o, const std::string& command) {
    if (!o.name.empty()) return o.name;
    return fs::path(o.scene).stem().string() + "_" + command;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigurationError("cannot write " + p.string());
    out << content;
}

std::string csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(9) << v;
    return os.str();
}

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string trajectory_csv(const MetricModel& m, const Worldline& w) {
    std::ostringstream os;
    const int n = w.dimension();
    os << "lambda";
    for (int i = 0; i < n; ++i) os << ",x" << i;
    for (int i = 0; i < n; ++i) os << ",v" << i;
    os << ",norm\n";
    for (const auto& s : w.samples()) {
        os << csv_number(s.lambda);
        for (int i = 0; i < n; ++i) os << "," << csv_number(s.x[i]);
        for (int i = 0; i < n; ++i) os << "," << csv_number(s.v[i]);
        os << "," << csv_number(inner(m.metric(s.x), s.v, s.v)) << "\n";
    }
    return os.str();
}

json trajectory_json(const Worldline& w) {
    json j;
    j["system"] = w.metadata().system;
    j["parameters"] = w.metadata().parameters;
    j["diagnostics"] = w.metadata().diagnostics;
    j["parametrization"] = {{"kind", to_string(w.parametrization().kind)}, {"speed", w.parametrization().speed}};
    json samples = json::array();
    for (const auto& s : w.samples()) samples.push_back({{"lambda", s.lambda}, {"x", vec_json(s.x.coords())}, {"v", vec_json(s.v)}});
    j["samples"] = std::move(samples);
    return j;
}

void write_trajectory(const Options& o, const std::string& command, const Scene& s, const Worldline& w, json extra = {}) {
    const fs::path dir = output_dir(o);
    const std::string base = stem(o, command);
    write_file(dir / (base + ".csv"), trajectory_csv(*s.metric, w));
    json j = trajectory_json(w);
    j["scene"] = s.path;
    if (!extra.is_null()) j["report"] = std::move(extra);
    write_file(dir / (base + ".json"), j.dump(2) + "\n");
    std::cout << "wrote " << (dir / (base + ".csv")).string() << " and " << (dir / (base + ".json")).string() << "\n";
}

// ---------------------------------------------------------------------------
// Scene access

Scene open_scene(const Options& o) {
    if (o.scene.empty()) throw ConfigurationError("--scene is required");
    Scene s = cli::load_scene(o.scene);
    if (o.seed) s.seed = static_cast<std::uint64_t>(*o.seed);
    const auto check = cli::check_scene(s, 20);
    if (!check.ok) {
        std::string why;
        for (const auto& f : check.failures) why += (why.empty() ? "" : "; ") + f;
        throw ConfigurationError(o.scene + ": scene fails its invariant checks: " + why);
    }
    return s;
}

double pick(const std::optional<double>& flag, const Scene& s, const char* key, std::optional<double> fallback = {}) {
    if (flag) return *flag;
    if (auto v = s.get<double>(key)) return *v;
    if (fallback) return *fallback;
    throw ConfigurationError(std::string("missing parameter '") + key + "' (flag or [run] key)");
}

std::string pick_string(const std::string& flag, const Scene& s, const char* key, const std::string& fallback) {
    if (!flag.empty()) return flag;
    return s.get<std::string>(key).value_or(fallback);
}

IntegratorConfig integrator_config(const Scene& s) {
    IntegratorConfig c;
    const std::string method = s.get<std::string>("method").value_or("rk45");
    if (method == "rk45")
        c.method = Method::Rk45;
    else if (method == "rk4")
        c.method = Method::Rk4;
    else
        throw ConfigurationError("method must be rk45 or rk4");
    c.step = s.get<double>("step").value_or(c.step);
    c.abs_tol = s.get<double>("abs_tol").value_or(c.abs_tol);
    c.rel_tol = s.get<double>("rel_tol").value_or(c.rel_tol);
    if (auto v = s.get<std::int64_t>("samples")) c.samples = static_cast<std::size_t>(std::max<std::int64_t>(*v, 0));
    if (auto v = s.get<std::int64_t>("max_steps")) c.max_steps = static_cast<std::size_t>(std::max<std::int64_t>(*v, 0));
    try {
        c.validate();
    } catch (const ArgumentError& e) {
        throw ConfigurationError(e.what());
    }
    return c;
}

SolverTolerances solver_tolerances(const Scene& s) {
    SolverTolerances t;
    t.integrator = integrator_config(s);
    t.seed = s.seed;
    t.bvp_tol = s.get<double>("bvp_tol").value_or(t.bvp_tol);
    if (auto v = s.get<std::int64_t>("max_iterations")) t.max_iterations = static_cast<std::size_t>(std::max<std::int64_t>(*v, 1));
    if (auto v = s.get<std::int64_t>("restarts")) t.restarts = static_cast<std::size_t>(std::max<std::int64_t>(*v, 0));
    if (!(t.bvp_tol > 0.0)) throw ConfigurationError("bvp_tol must be positive");
    return t;
}

// a:b:steps, inclusive on both ends
std::vector<double> parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ConfigurationError("grid '" + text + "' must have the form a:b:steps");
    double a = 0, b = 0;
    long steps = 0;
    try {
        std::size_t used = 0;
        a = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("a");
        b = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("b");
        steps = std::stol(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument("steps");
    } catch (const std::exception&) {
        throw ConfigurationError("grid '" + text + "' must have the form a:b:steps");
    }
    if (steps < 1 || !std::isfinite(a) || !std::isfinite(b)) throw ConfigurationError("grid needs finite ends and steps >= 1");
    std::vector<double> g;
    for (long i = 0; i < steps; ++i) g.push_back(steps == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(steps - 1));
    return g;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_integrate(const Options& o) {
    const Scene s = open_scene(o);
    const std::string sys = pick_string(o.system, s, "system", "lfe");
    SystemSpec spec;
    if (sys == "lfe")
        spec = SystemSpec::lfe(pick(o.qm, s, "qm"));
    else if (sys == "efe")
        spec = SystemSpec::efe(o.Q || s.get<double>("Q") ? pick(o.Q, s, "Q") : pick(o.eps, s, "eps"));
    else if (sys == "cotangent")
        spec = SystemSpec::cotangent(pick(o.eps, s, "eps", 1.0));
    else if (sys == "twisted")
        spec = SystemSpec::twisted(pick(o.Q, s, "Q", 1.0));
    else if (sys == "magnetic")
        spec = SystemSpec::magnetic(pick(o.qm, s, "qm"));
    else
        throw ConfigurationError("unknown system '" + sys + "'");
    if (sys == "cotangent" && spec.coupling != 1.0 && spec.coupling != -1.0)
        throw ConfigurationError("eps must be +1 or -1");

    const Event x0 = s.event(s.initial_event.value_or("x0"));
    if (!s.initial_velocity) throw ConfigurationError(s.path + ": [initial] velocity is required for integrate");
    Vector v0 = *s.initial_velocity;
    if (spec.cotangent_state()) v0 = lower(*s.metric, x0, v0); // scene velocities are tangents
    const double span = pick(o.span, s, "span", 1.0);
    if (!(span > 0.0)) throw ConfigurationError("span must be positive");

    Worldline w;
    try {
        w = integrate(*s.metric, *s.field, spec, {x0, v0}, 0.0, span, integrator_config(s));
    } catch (const IntegrationError& e) {
        if (!e.partial().empty()) write_trajectory(o, "integrate", s, e.partial(), {{"error", e.what()}});
        throw NumericalFailure(e.what());
    }
    write_trajectory(o, "integrate", s, w);

    const auto& d = w.metadata().diagnostics;
    std::cout << std::setprecision(10);
    std::cout << "system " << w.metadata().system << ", " << spec.coupling_name() << " = " << spec.coupling << "\n";
    std::cout << "endpoint";
    for (int i = 0; i < w.dimension(); ++i) std::cout << " " << w.back().x[i];
    std::cout << "\n";
    std::cout << std::setprecision(3) << std::scientific;
    std::cout << "norm drift " << d.at("norm_drift") << " (relative " << d.at("norm_drift_relative") << ")\n";
    if (spec.cotangent_state())
        std::cout << "H drift " << d.at("hamiltonian_drift") << " (per unit parameter " << d.at("hamiltonian_drift_rate") << ")\n";
    std::cout << std::defaultfloat;
    return 0;
}

int cmd_connect(const Options& o) {
    const Scene s = open_scene(o);
    const std::string kind = pick_string(o.kind, s, "kind", "lfe");
    ConnectionProblem p{s.metric, s.field, s.event(pick_string("", s, "from", "x0")),
                        s.event(pick_string("", s, "to", "x1")), ProblemKind::Lfe, 0.0, solver_tolerances(s)};
    if (kind == "lfe") {
        p.coupling = pick(o.qm, s, "qm");
    } else if (kind == "efe") {
        p.kind = ProblemKind::Efe;
        p.coupling = pick(o.eps, s, "eps", 1.0);
        if (p.coupling != 1.0 && p.coupling != -1.0) throw ConfigurationError("eps must be +1 or -1");
    } else {
        throw ConfigurationError("kind must be lfe or efe");
    }
    const ConnectionResult r = solve_connection(p);

    json report{{"converged", r.converged},    {"miss_norm", r.miss_norm}, {"iterations", r.iterations},
                {"restarts_used", r.restarts_used}, {"message", r.message}, {"kind", kind},
                {"coupling", p.coupling}};
    if (!r.trajectory.empty()) {
        report["initial_velocity"] = vec_json(r.initial_velocity);
        try {
            report["proper_length"] = proper_length(*s.metric, r.trajectory);
        } catch (const CausalityError&) {
        }
        if (p.kind == ProblemKind::Lfe) report["span"] = r.variables.span;
        else {
            report["speed"] = r.variables.speed;
            report["ratio_Q_over_C"] = p.coupling / r.variables.speed;
        }
        write_trajectory(o, "connect", s, r.trajectory, report);
    }
    std::cout << report.dump(2) << "\n";
    if (!r.converged) throw NumericalFailure("connection solver did not converge: " + r.message);
    return 0;
}

int cmd_scan(const Options& o) {
    const Scene s = open_scene(o);
    const std::string grid_text = pick_string(o.grid, s, "qm_grid", "");
    if (grid_text.empty()) throw ConfigurationError("scan needs --qm-grid or [run] qm_grid");
    const auto grid = parse_grid(grid_text);
    ScanOptions opt;
    opt.tol = solver_tolerances(s);
    opt.workers = o.workers;
    const auto r = scan_charge_to_mass(s.metric, s.field, s.event(pick_string("", s, "from", "x0")),
                                       s.event(pick_string("", s, "to", "x1")), grid, opt);

    std::ostringstream csv;
    csv << "qm,converged,miss_norm,proper_length,action_I\n";
    for (const auto& e : r.entries)
        csv << csv_number(e.qm) << "," << (e.converged ? 1 : 0) << "," << csv_number(e.miss_norm) << ","
            << csv_number(e.proper_length) << "," << csv_number(e.action_I) << "\n";
    const fs::path dir = output_dir(o);
    const std::string base = stem(o, "scan");
    write_file(dir / (base + ".csv"), csv.str());

    json j{{"scene", s.path}, {"grid", grid}, {"successes", r.successes}, {"min_length", r.min_length},
           {"max_length", r.max_length}};
    if (std::isfinite(r.min_pairwise_separation)) j["min_pairwise_separation"] = r.min_pairwise_separation;
    json rows = json::array();
    for (const auto& e : r.entries) {
        json row{{"qm", e.qm}, {"converged", e.converged}, {"kernel", e.kernel}, {"message", e.message}};
        if (std::isfinite(e.miss_norm)) row["miss_norm"] = e.miss_norm;
        if (std::isfinite(e.proper_length)) row["proper_length"] = e.proper_length;
        if (std::isfinite(e.action_I)) row["action_I"] = e.action_I;
        if (e.initial_velocity.size() > 0) row["initial_velocity"] = vec_json(e.initial_velocity);
        if (o.with_trajectories && !e.trajectory.empty()) row["trajectory"] = trajectory_json(e.trajectory);
        rows.push_back(std::move(row));
    }
    j["entries"] = std::move(rows);
    write_file(dir / (base + ".json"), j.dump(2) + "\n");

    std::cout << csv.str();
    std::cout << "summary: " << r.successes << "/" << r.entries.size() << " converged, proper length min "
              << csv_number(r.min_length) << " max " << csv_number(r.max_length);
    if (std::isfinite(r.min_pairwise_separation)) std::cout << ", min separation " << csv_number(r.min_pairwise_separation);
    std::cout << "\n";
    std::cout << "wrote " << (dir / (base + ".csv")).string() << "\n";
    return 0;
}

PolylineCurve read_curve(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot read curve file " + path);
    std::vector<Event> nodes;
    std::vector<double> grid;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
        std::stringstream ss(line);
        std::vector<double> vals;
        for (std::string cell; std::getline(ss, cell, ',');) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigurationError(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
            }
        }
        if (static_cast<int>(vals.size()) < n + 1)
            throw ConfigurationError(path + ":" + std::to_string(lineno) + ": expected lambda and " + std::to_string(n) + " coordinates");
        grid.push_back(vals[0]);
        nodes.emplace_back(Vector(Eigen::Map<Vector>(vals.data() + 1, n)));
    }
    try {
        return PolylineCurve(std::move(nodes), std::move(grid));
    } catch (const ArgumentError& e) {
        throw ConfigurationError(path + ": " + e.what());
    }
}

json report_json(const ActionReport& r) {
    json j{{"which", to_string(r.which)}, {"value", r.value}, {"parameters", r.parameters},
           {"gradient_norm", r.gradient_norm}, {"potential_integral", r.potential_integral}};
    if (std::isfinite(r.length)) j["length"] = r.length;
    return j;
}

int cmd_action(const Options& o) {
    const Scene s = open_scene(o);
    const std::string which = pick_string(o.which, s, "which", "I");
    const Event x0 = s.event(pick_string("", s, "from", "x0"));
    const std::size_t nodes = o.nodes ? *o.nodes : static_cast<std::size_t>(s.get<std::int64_t>("nodes").value_or(200));
    if (nodes < 3) throw ConfigurationError("nodes must be at least 3");
    const double dl = pick(o.dlambda, s, "dlambda", 1.0);
    if (!(dl > 0.0)) throw ConfigurationError("dlambda must be positive");

    PolylineCurve curve = o.curve.empty() ? PolylineCurve::straight(x0, s.event(pick_string("", s, "to", "x1")), nodes, 0.0, dl)
                                          : read_curve(o.curve, s.dimension);
    json out;
    if (o.extremize) {
        if (which != "J" && which != "Jtilde") throw ConfigurationError("--extremize applies to J and Jtilde");
        const bool half = which == "J";
        const double Q = pick(o.Q, s, "Q", 1.0);
        OptimizerConfig opt;
        opt.g_tol = s.get<double>("g_tol").value_or(opt.g_tol);
        const ExtremalResult r = extremize_J(*s.metric, *s.field, Q, curve, half, opt);
        out = report_json(r.report);
        out["converged"] = r.converged;
        out["iterations"] = r.iterations;
        out["gradient_max"] = r.gradient_max;
        const double span = curve.lambda_span();
        const NeoReport neo = check_neo(*s.metric, *s.field, r.curve, Q, span);
        json nj{{"beta", neo.beta}, {"length", neo.length}, {"kernel_degenerate", neo.kernel_degenerate}};
        if (!neo.kernel_degenerate) {
            nj["ratio"] = neo.ratio.value();
            nj["product"] = neo.product;
            nj["relative_error"] = neo.rel_error;
            std::cout << "constraint (q/m) length = Q dlambda: relative error " << std::scientific << std::setprecision(3)
                      << neo.rel_error << std::defaultfloat << (half ? "" : " (J~ carries half the J ratio)") << "\n";
            try {
                const Event x1 = r.curve.nodes().back();
                const auto est = lorentzian_distance_estimate(s.metric, x0, x1, {}, solver_tolerances(s));
                const double bound = charge_bound(neo.beta, est.lower_bound);
                nj["distance_estimate"] = est.lower_bound;
                nj["charge_bound"] = bound;
                nj["bound_satisfied"] = std::abs(neo.ratio.value()) >= bound - 1e-3;
                std::cout << "bound |q/m| >= |beta|/l: " << std::abs(neo.ratio.value()) << " vs " << bound << "\n";
            } catch (const Error& e) {
                nj["charge_bound_error"] = e.what();
            }
        }
        out["neo"] = nj;
        write_trajectory(o, "action", s, to_worldline(r.curve, "extremal"), out);
        std::cout << out.dump(2) << "\n";
        if (!r.converged) throw NumericalFailure("extremize_J did not converge");
        return 0;
    }

    ActionReport r;
    if (which == "I")
        r = action_I(*s.metric, *s.field, pick(o.qm, s, "qm"), curve);
    else if (which == "J" || which == "Jtilde")
        r = action_J(*s.metric, *s.field, pick(o.Q, s, "Q", 1.0), curve, which == "J");
    else if (which == "K")
        r = action_K(*s.metric, *s.field, pick(o.beta, s, "beta"), curve);
    else
        throw ConfigurationError("which must be I, J, Jtilde or K");
    out = report_json(r);
    const fs::path dir = output_dir(o);
    write_file(dir / (stem(o, "action") + ".json"), out.dump(2) + "\n");
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_check(const Options& o) {
    if (o.scene.empty()) throw ConfigurationError("--scene is required");
    Scene s = cli::load_scene(o.scene);
    if (o.seed) s.seed = static_cast<std::uint64_t>(*o.seed);
    const auto c = cli::check_scene(s, 100);
    json j{{"scene", s.path},
           {"metric", s.metric->name()},
           {"field", s.field->name()},
           {"points", c.points},
           {"metric_inverse_defect", c.metric_inverse},
           {"metric_symmetry_defect", c.metric_symmetry},
           {"christoffel_fd_defect", c.christoffel_fd},
           {"signature_ok", c.signature_ok},
           {"field_antisymmetry_defect", c.field_antisymmetry},
           {"field_closedness_defect", c.field_closedness},
           {"field_potential_defect", c.field_potential},
           {"ok", c.ok},
           {"failures", c.failures}};
    std::cout << j.dump(2) << "\n";
    return c.ok ? 0 : kConfigError;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Charged-particle worldlines: Lorentz force, electromagnetic flow and variational tools"};
    app.require_subcommand(1);
    Options o;

    auto scene = [&](CLI::App* c) {
        c->add_option("--scene", o.scene, "scene TOML file")->required();
        c->add_option("--out-dir", o.out_dir, "output directory (default: $EMFLOW_OUTPUT_DIR or .)");
        c->add_option("--name", o.name, "output file stem");
        c->add_option("--seed", o.seed, "override the scene seed");
    };

    auto* integ = app.add_subcommand("integrate", "integrate one of the five systems from [initial]");
    scene(integ);
    integ->add_option("--system", o.system, "lfe | efe | cotangent | twisted | magnetic");
    integ->add_option("--qm", o.qm, "charge-to-mass ratio (lfe, magnetic)");
    integ->add_option("--Q", o.Q, "flow coefficient (efe, twisted)");
    integ->add_option("--eps", o.eps, "normalized sign (efe, cotangent)");
    integ->add_option("--span", o.span, "parameter range [0, span]");

    auto* conn = app.add_subcommand("connect", "solve a connection problem between [run] from and to events");
    scene(conn);
    conn->add_option("--kind", o.kind, "lfe | efe");
    conn->add_option("--qm", o.qm, "charge-to-mass ratio (lfe)");
    conn->add_option("--eps", o.eps, "normalized sign (efe)");

    auto* scan = app.add_subcommand("scan", "connect the events for every ratio of a grid");
    scene(scan);
    scan->add_option("--qm-grid", o.grid, "a:b:steps");
    scan->add_option("--workers", o.workers, "worker threads (0: available parallelism)");
    scan->add_flag("--trajectories", o.with_trajectories, "embed trajectories in the JSON output");

    auto* act = app.add_subcommand("action", "evaluate or extremize a functional");
    scene(act);
    act->add_option("--which", o.which, "I | J | Jtilde | K");
    act->add_option("--curve", o.curve, "CSV curve (lambda, x0..); default: straight segment between the events");
    act->add_flag("--extremize", o.extremize, "extremize J or Jtilde from the curve");
    act->add_option("--qm", o.qm, "ratio for I");
    act->add_option("--Q", o.Q, "coupling for J");
    act->add_option("--beta", o.beta, "coefficient for K");
    act->add_option("--dlambda", o.dlambda, "parameter span of the straight initial curve");
    act->add_option("--nodes", o.nodes, "nodes of the straight initial curve");

    auto* chk = app.add_subcommand("check", "run the metric and field invariant suite on a scene");
    chk->add_option("--scene", o.scene, "scene TOML file")->required();
    chk->add_option("--seed", o.seed, "override the scene seed");

    auto* sch = app.add_subcommand("schema", "print the scene schema as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (integ->parsed()) return cmd_integrate(o);
        if (conn->parsed()) return cmd_connect(o);
        if (scan->parsed()) return cmd_scan(o);
        if (act->parsed()) return cmd_action(o);
        if (chk->parsed()) return cmd_check(o);
        if (sch->parsed()) {
            std::cout << cli::schema_json().dump(2) << "\n";
            return 0;
        }
    } catch (const ConfigurationError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ArgumentError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfigError;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericalError;
    }
    return 0;
}
