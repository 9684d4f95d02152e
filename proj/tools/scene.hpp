#pragma once

// Scene files: TOML tables describing a chart, a field, named events and run
// parameters. Every key is checked against the schema below; unknown keys and
// wrong types are configuration errors carrying the line of the offending node.

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <toml.hpp>

#include "emflow/connect.hpp"

namespace emflow::cli {

enum class Kind { Integer, Number, String, Boolean, NumberArray, NumberTable, Table, EventMap };

struct KeySpec {
    const char* name;
    Kind kind;
    const char* help;
};

struct TableSpec {
    const char* name;
    std::vector<KeySpec> keys;
};

inline const std::vector<TableSpec>& schema() {
    static const std::vector<TableSpec> s{
        {"",
         {{"dimension", Kind::Integer, "chart dimension n >= 2"},
          {"seed", Kind::Integer, "seed for randomized restarts and check sampling"},
          {"metric", Kind::Table, "metric model"},
          {"field", Kind::Table, "field model"},
          {"events", Kind::EventMap, "named events, each an array of n coordinates"},
          {"initial", Kind::Table, "initial data for integrate"},
          {"run", Kind::Table, "run parameters"}}},
        {"metric",
         {{"name", Kind::String, "minkowski | euclidean | schwarzschild | table"},
          {"mass", Kind::Number, "Schwarzschild mass M > 0"},
          {"table", Kind::NumberTable, "constant metric coefficients g_{mu nu}"},
          {"signature", Kind::String, "lorentzian | riemannian (table metrics)"}}},
        {"field",
         {{"name", Kind::String, "none | uniform | magnetic | coulomb | table | potential"},
          {"E", Kind::NumberArray, "uniform electric field, n-1 components"},
          {"B", Kind::NumberArray, "uniform magnetic field (3 components for n=4, 1 for two spatial dimensions)"},
          {"charge", Kind::Number, "Coulomb charge"},
          {"table", Kind::NumberTable, "constant antisymmetric F_{mu nu}"},
          {"omega", Kind::NumberArray, "constant potential one-form"}}},
        {"initial",
         {{"event", Kind::String, "name of the starting event"},
          {"velocity", Kind::NumberArray, "initial tangent dx/dlambda"}}},
        {"run",
         {{"system", Kind::String, "lfe | efe | cotangent | twisted | magnetic"},
          {"kind", Kind::String, "lfe | efe (connect)"},
          {"qm", Kind::Number, "charge-to-mass ratio"},
          {"Q", Kind::Number, "electromagnetic flow coefficient / J coupling"},
          {"eps", Kind::Number, "normalized coupling +1 or -1"},
          {"beta", Kind::Number, "K functional coefficient"},
          {"span", Kind::Number, "parameter range length"},
          {"method", Kind::String, "rk45 | rk4"},
          {"step", Kind::Number, "initial (rk45) or fixed (rk4) step"},
          {"abs_tol", Kind::Number, "absolute tolerance"},
          {"rel_tol", Kind::Number, "relative tolerance"},
          {"samples", Kind::Integer, "output samples"},
          {"max_steps", Kind::Integer, "step budget"},
          {"from", Kind::String, "start event name for connect/scan/action"},
          {"to", Kind::String, "end event name for connect/scan/action"},
          {"bvp_tol", Kind::Number, "endpoint miss tolerance"},
          {"max_iterations", Kind::Integer, "Newton iterations per attempt"},
          {"restarts", Kind::Integer, "random restarts"},
          {"qm_grid", Kind::String, "a:b:steps"},
          {"which", Kind::String, "I | J | Jtilde | K"},
          {"nodes", Kind::Integer, "polyline nodes"},
          {"dlambda", Kind::Number, "parameter span of J curves"},
          {"g_tol", Kind::Number, "J optimizer gradient tolerance"}}},
    };
    return s;
}

inline std::string kind_name(Kind k) {
    switch (k) {
        case Kind::Integer: return "integer";
        case Kind::Number: return "number";
        case Kind::String: return "string";
        case Kind::Boolean: return "boolean";
        case Kind::NumberArray: return "array of numbers";
        case Kind::NumberTable: return "array of arrays of numbers";
        case Kind::Table: return "table";
        case Kind::EventMap: return "table of events";
    }
    return "?";
}

inline nlohmann::json schema_json() {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& t : schema()) {
        nlohmann::json keys = nlohmann::json::object();
        for (const auto& k : t.keys) keys[k.name] = {{"type", kind_name(k.kind)}, {"description", k.help}};
        j[t.name[0] ? t.name : "(top level)"] = keys;
    }
    return j;
}

struct Scene {
    std::string path;
    int dimension = 4;
    std::uint64_t seed = 1;
    MetricPtr metric;
    FieldPtr field;
    std::map<std::string, Event> events;
    std::optional<std::string> initial_event;
    std::optional<Vector> initial_velocity;
    toml::table run; // validated run table

    const Event& event(const std::string& name) const {
        auto it = events.find(name);
        if (it == events.end()) throw ConfigurationError(path + ": event '" + name + "' is not defined in [events]");
        return it->second;
    }

    template <typename T>
    std::optional<T> get(const char* key) const {
        return run[key].value<T>();
    }
};

namespace detail {

inline std::string where(const std::string& path, const toml::node& n) {
    return path + ":" + std::to_string(n.source().begin.line);
}

inline bool number(const toml::node& n) { return n.is_integer() || n.is_floating_point(); }

inline void check_kind(const std::string& path, const std::string& key, const toml::node& n, Kind k) {
    bool ok = false;
    switch (k) {
        case Kind::Integer: ok = n.is_integer(); break;
        case Kind::Number: ok = number(n) && std::isfinite(*n.value<double>()); break;
        case Kind::String: ok = n.is_string(); break;
        case Kind::Boolean: ok = n.is_boolean(); break;
        case Kind::NumberArray:
            ok = n.is_array();
            if (ok)
                for (const auto& e : *n.as_array()) ok = ok && number(e) && std::isfinite(*e.value<double>());
            break;
        case Kind::NumberTable:
            ok = n.is_array();
            if (ok)
                for (const auto& row : *n.as_array()) {
                    ok = ok && row.is_array();
                    if (ok)
                        for (const auto& e : *row.as_array()) ok = ok && number(e) && std::isfinite(*e.value<double>());
                }
            break;
        case Kind::Table:
        case Kind::EventMap: ok = n.is_table(); break;
    }
    if (!ok) throw ConfigurationError(where(path, n) + ": key '" + key + "' must be a finite " + kind_name(k));
}

inline void validate_table(const std::string& path, const toml::table& t, const TableSpec& spec) {
    for (auto&& [k, v] : t) {
        const std::string key(k.str());
        const KeySpec* found = nullptr;
        for (const auto& ks : spec.keys)
            if (key == ks.name) found = &ks;
        if (!found) {
            const std::string scope = spec.name[0] ? std::string("[") + spec.name + "]" : std::string("top level");
            throw ConfigurationError(where(path, v) + ": unknown key '" + key + "' in " + scope);
        }
        check_kind(path, key, v, found->kind);
    }
}

inline const TableSpec& spec_for(const char* name) {
    for (const auto& t : schema())
        if (std::string(t.name) == name) return t;
    throw std::logic_error("no schema table");
}

inline Vector to_vector(const toml::array& a) {
    Vector v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = *a[i].value<double>();
    return v;
}

inline Matrix to_matrix(const std::string& path, const toml::node& n) {
    const auto& rows = *n.as_array();
    const auto r = static_cast<Eigen::Index>(rows.size());
    if (r == 0) throw ConfigurationError(where(path, n) + ": empty table");
    Matrix m(r, r);
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto& row = *rows[static_cast<std::size_t>(i)].as_array();
        if (static_cast<Eigen::Index>(row.size()) != r) throw ConfigurationError(where(path, n) + ": table must be square");
        m.row(i) = to_vector(row).transpose();
    }
    return m;
}

inline std::string require_string(const std::string& path, const toml::table& t, const char* key, const char* scope) {
    const auto* n = t.get(key);
    if (!n) throw ConfigurationError(path + ": [" + scope + "] requires '" + key + "'");
    return *n->value<std::string>();
}

inline Vector sized(const std::string& path, const toml::node& n, Eigen::Index size, const std::string& what) {
    Vector v = to_vector(*n.as_array());
    if (v.size() != size)
        throw ConfigurationError(where(path, n) + ": " + what + " needs " + std::to_string(size) + " components");
    return v;
}

inline MetricPtr build_metric(const std::string& path, const toml::table& t, int n) {
    validate_table(path, t, spec_for("metric"));
    const std::string name = require_string(path, t, "name", "metric");
    if (name == "minkowski") return std::make_shared<Minkowski>(n);
    if (name == "euclidean") return std::make_shared<Euclidean>(n);
    if (name == "schwarzschild") {
        if (n != 4) throw ConfigurationError(path + ": schwarzschild requires dimension = 4");
        const auto mass = t["mass"].value<double>();
        if (!mass || !(*mass > 0.0)) throw ConfigurationError(path + ": schwarzschild requires mass > 0");
        return std::make_shared<Schwarzschild>(*mass);
    }
    if (name == "table") {
        const auto* node = t.get("table");
        if (!node) throw ConfigurationError(path + ": table metric requires 'table'");
        const Matrix g = to_matrix(path, *node);
        if (g.rows() != n) throw ConfigurationError(where(path, *node) + ": metric table must be n x n");
        const std::string sig = t["signature"].value_or<std::string>("lorentzian");
        if (sig != "lorentzian" && sig != "riemannian")
            throw ConfigurationError(path + ": signature must be lorentzian or riemannian");
        auto m = std::make_shared<ConstantMetric>(g, sig == "lorentzian" ? Signature::Lorentzian : Signature::Riemannian);
        if (!has_expected_signature(*m, g))
            throw ConfigurationError(where(path, *node) + ": metric table does not have the declared signature");
        return m;
    }
    throw ConfigurationError(where(path, *t.get("name")) + ": unknown metric '" + name + "'");
}

inline FieldPtr build_field(const std::string& path, const toml::table& t, int n) {
    validate_table(path, t, spec_for("field"));
    const std::string name = require_string(path, t, "name", "field");
    auto vec = [&](const char* key, Eigen::Index size) -> Vector {
        const auto* node = t.get(key);
        return node ? sized(path, *node, size, key) : Vector::Zero(size);
    };
    const Eigen::Index b_size = n == 4 ? 3 : n == 3 ? 1 : 0;
    if (name == "none") return std::make_shared<ZeroField>(n);
    if (name == "uniform") return uniform_field(n, vec("E", n - 1), vec("B", b_size));
    if (name == "magnetic") {
        const Eigen::Index size = n == 3 ? 3 : n == 2 ? 1 : -1;
        if (size < 0) throw ConfigurationError(path + ": magnetic field on a space chart needs dimension 2 or 3");
        return spatial_magnetic_field(n, vec("B", size));
    }
    if (name == "coulomb") {
        if (n != 4) throw ConfigurationError(path + ": coulomb field requires dimension = 4");
        return std::make_shared<CoulombField>(t["charge"].value_or(0.0));
    }
    if (name == "table") {
        const auto* node = t.get("table");
        if (!node) throw ConfigurationError(path + ": table field requires 'table'");
        const Matrix F = to_matrix(path, *node);
        if (F.rows() != n) throw ConfigurationError(where(path, *node) + ": field table must be n x n");
        return field_from_table(F);
    }
    if (name == "potential") return constant_potential(vec("omega", n));
    throw ConfigurationError(where(path, *t.get("name")) + ": unknown field '" + name + "'");
}

} // namespace detail

inline Scene load_scene(const std::string& path) {
    toml::table root;
    try {
        root = toml::parse_file(path);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << path << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
        throw ConfigurationError(os.str());
    }
    detail::validate_table(path, root, detail::spec_for(""));

    Scene s;
    s.path = path;
    if (auto d = root["dimension"].value<std::int64_t>()) {
        if (*d < 2 || *d > 16) throw ConfigurationError(detail::where(path, *root.get("dimension")) + ": dimension out of range");
        s.dimension = static_cast<int>(*d);
    }
    if (auto seed = root["seed"].value<std::int64_t>()) s.seed = static_cast<std::uint64_t>(*seed);

    const auto* metric = root["metric"].as_table();
    if (!metric) throw ConfigurationError(path + ": missing [metric] table");
    s.metric = detail::build_metric(path, *metric, s.dimension);

    const auto* field = root["field"].as_table();
    s.field = field ? detail::build_field(path, *field, s.dimension) : std::make_shared<ZeroField>(s.dimension);

    if (const auto* ev = root["events"].as_table()) {
        for (auto&& [k, v] : *ev) {
            detail::check_kind(path, std::string(k.str()), v, Kind::NumberArray);
            const Vector x = detail::sized(path, v, s.dimension, "event '" + std::string(k.str()) + "'");
            const Event e(x);
            if (!s.metric->in_domain(e))
                throw ConfigurationError(detail::where(path, v) + ": event '" + std::string(k.str()) +
                                         "' lies outside the chart domain");
            s.events.emplace(std::string(k.str()), e);
        }
    }

    if (const auto* init = root["initial"].as_table()) {
        detail::validate_table(path, *init, detail::spec_for("initial"));
        s.initial_event = (*init)["event"].value<std::string>();
        if (const auto* v = init->get("velocity")) s.initial_velocity = detail::sized(path, *v, s.dimension, "velocity");
    }

    if (const auto* run = root["run"].as_table()) {
        detail::validate_table(path, *run, detail::spec_for("run"));
        s.run = *run;
    }
    return s;
}

/// Field invariants (antisymmetry, closedness, potential consistency) and metric
/// invariants at the scene's events plus seeded random points around them.
struct SceneCheck {
    bool ok = true;
    std::size_t points = 0;
    double metric_inverse = 0, metric_symmetry = 0, christoffel_fd = 0;
    double field_antisymmetry = 0, field_closedness = 0, field_potential = 0;
    bool signature_ok = true;
    std::vector<std::string> failures;
};

inline std::vector<Event> sample_points(const Scene& s, std::size_t random_points) {
    std::vector<Event> pts;
    for (const auto& [name, e] : s.events) pts.push_back(e);
    if (pts.empty()) pts.emplace_back(Vector::Zero(s.dimension));
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t anchors = pts.size();
    for (std::size_t k = 0; k < random_points * 20 && pts.size() < anchors + random_points; ++k) {
        Vector x = pts[k % anchors].coords();
        for (int i = 0; i < s.dimension; ++i) x[i] += u(rng);
        if (!x.allFinite()) continue;
        Event e(x);
        if (s.metric->in_domain(e) && s.field->dimension() == s.dimension) pts.push_back(e);
    }
    return pts;
}

inline SceneCheck check_scene(const Scene& s, std::size_t random_points = 100) {
    SceneCheck c;
    constexpr double inverse_tol = 1e-10, fd_tol = 1e-6;
    if (s.field->dimension() != s.dimension) {
        c.ok = false;
        c.failures.push_back("field dimension does not match the chart");
        return c;
    }
    for (const Event& x : sample_points(s, random_points)) {
        ++c.points;
        const MetricCheck m = check_metric(*s.metric, x);
        c.metric_inverse = std::max(c.metric_inverse, m.inverse_defect);
        c.metric_symmetry = std::max(c.metric_symmetry, m.symmetry_defect);
        c.christoffel_fd = std::max(c.christoffel_fd, m.christoffel_fd_defect);
        c.signature_ok = c.signature_ok && m.signature_ok;
        const FieldCheck f = check_field(*s.field, x);
        c.field_antisymmetry = std::max(c.field_antisymmetry, f.antisymmetry_defect);
        c.field_closedness = std::max(c.field_closedness, f.closedness_defect);
        c.field_potential = std::max(c.field_potential, f.potential_defect);
    }
    auto fail = [&](bool bad, const std::string& what) {
        if (bad) {
            c.ok = false;
            c.failures.push_back(what);
        }
    };
    fail(c.metric_inverse > inverse_tol, "metric inverse defect");
    fail(c.metric_symmetry > 0.0, "metric not symmetric");
    fail(c.christoffel_fd > fd_tol, "Christoffel symbols disagree with finite differences");
    fail(!c.signature_ok, "metric signature");
    fail(c.field_antisymmetry > 0.0, "field not antisymmetric");
    fail(c.field_closedness > fd_tol, "field not closed");
    fail(c.field_potential > fd_tol, "potential does not generate the field");
    return c;
}

} // namespace emflow::cli
