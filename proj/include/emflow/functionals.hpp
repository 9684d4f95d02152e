#pragma once

// Discrete actions on polylines:
//   I  = sum (|dx| + (q/m) omega[dx])                          node-only
//   J  = sum (k g(dx/dl, dx/dl) + Q omega[dx/dl]) dl,  k = 1/2   parametrized
//   J~ = J with k = 1
//   K  = 1/2 (sum |dx|)^2 + beta sum omega[dx]                   node-only
// Metric and potential are evaluated at segment midpoints.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "emflow/dynamics.hpp"
#include "emflow/geometry.hpp"
#include "emflow/worldline.hpp"

namespace emflow {

/// Nodes x_0..x_N on a parameter grid; the first and last node are fixed.
class PolylineCurve {
public:
    PolylineCurve(std::vector<Event> nodes, std::vector<double> grid)
        : nodes_(std::move(nodes)), grid_(std::move(grid)) {
        if (nodes_.size() < 2) throw ArgumentError("PolylineCurve: at least two nodes required");
        if (grid_.size() != nodes_.size()) throw ArgumentError("PolylineCurve: grid and node counts differ");
        for (std::size_t i = 1; i < grid_.size(); ++i)
            if (!(grid_[i] > grid_[i - 1])) throw ArgumentError("PolylineCurve: grid must be strictly increasing");
        for (const auto& x : nodes_)
            if (x.dimension() != nodes_.front().dimension()) throw ArgumentError("PolylineCurve: mixed dimensions");
    }

    /// Straight coordinate segment with `count` nodes on a uniform grid over [lambda0, lambda1].
    static PolylineCurve straight(const Event& from, const Event& to, std::size_t count, double lambda0 = 0.0,
                                  double lambda1 = 1.0) {
        if (count < 2) throw ArgumentError("PolylineCurve: at least two nodes required");
        std::vector<Event> nodes;
        std::vector<double> grid;
        for (std::size_t i = 0; i < count; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(count - 1);
            nodes.emplace_back(Vector((1.0 - t) * from.coords() + t * to.coords()));
            grid.push_back(lambda0 + t * (lambda1 - lambda0));
        }
        return {std::move(nodes), std::move(grid)};
    }

    /// Nodes of a sampled worldline, keeping its parameter values.
    static PolylineCurve from_worldline(const Worldline& w) {
        std::vector<Event> nodes;
        std::vector<double> grid;
        for (const auto& s : w.samples()) {
            nodes.push_back(s.x);
            grid.push_back(s.lambda);
        }
        return {std::move(nodes), std::move(grid)};
    }

    std::size_t size() const { return nodes_.size(); }
    std::size_t segments() const { return nodes_.size() - 1; }
    int dimension() const { return nodes_.front().dimension(); }
    const std::vector<Event>& nodes() const { return nodes_; }
    const std::vector<double>& grid() const { return grid_; }
    const Event& node(std::size_t i) const { return nodes_[i]; }
    double lambda_span() const { return grid_.back() - grid_.front(); }

    PolylineCurve with_nodes(std::vector<Event> nodes) const { return {std::move(nodes), grid_}; }
    PolylineCurve with_grid(std::vector<double> grid) const { return {nodes_, std::move(grid)}; }

private:
    std::vector<Event> nodes_;
    std::vector<double> grid_;
};

/// Tangents by high-order differences of the nodes with respect to the grid.
inline Worldline to_worldline(const PolylineCurve& c, std::string system = "polyline") {
    std::vector<Vector> xs;
    for (const auto& x : c.nodes()) xs.push_back(x.coords());
    const auto vs = differentiate(c.grid(), xs, 7);
    std::vector<WorldlineSample> samples;
    for (std::size_t i = 0; i < c.size(); ++i) samples.push_back({c.grid()[i], c.node(i), vs[i]});
    WorldlineMetadata meta;
    meta.system = std::move(system);
    return Worldline(std::move(samples), Parametrization::generic(), std::move(meta));
}

enum class ActionKind { I, J, Jtilde, K };

inline std::string to_string(ActionKind k) {
    switch (k) {
        case ActionKind::I: return "I";
        case ActionKind::J: return "J";
        case ActionKind::Jtilde: return "Jtilde";
        case ActionKind::K: return "K";
    }
    return "?";
}

struct ActionReport {
    ActionKind which = ActionKind::I;
    double value = 0.0;
    std::map<std::string, double> parameters;
    double gradient_norm = 0.0;     // max |dA/dx| over interior node coordinates (central differences)
    double length = 0.0;            // sum of segment proper lengths
    double potential_integral = 0.0; // sum omega[dx]
};

namespace detail {

struct Segment {
    Event mid;
    Vector delta;
};

inline Segment segment(const Vector& a, const Vector& b) { return {Event(Vector(0.5 * (a + b))), b - a}; }

/// Node-only causal check of one chord at its midpoint metric.
inline double segment_length(const MetricModel& m, const Segment& s) {
    const auto c = causal_character(m, s.mid, s.delta);
    if (!c.future_causal())
        throw CausalityError("polyline segment is " + to_string(c.type) +
                             (c.type == CausalType::Spacelike ? "" : " and not future directed"));
    return std::sqrt(std::max(inner(m.metric(s.mid), s.delta, s.delta), 0.0));
}

inline double segment_potential(const FieldModel& f, const Segment& s) { return f.potential(s.mid).dot(s.delta); }

/// Which functional and its coefficients, evaluated segment by segment.
struct Lagrangian {
    ActionKind kind;
    double coupling; // q/m for I, Q for J and J~, beta for K

    double kinetic_factor() const { return kind == ActionKind::Jtilde ? 1.0 : 0.5; }

    /// Local contribution of one segment (for K: only the potential part, the
    /// length enters through the global square).
    double local(const MetricModel& m, const FieldModel& f, const Vector& a, const Vector& b, double dl) const {
        const Segment s = segment(a, b);
        switch (kind) {
            case ActionKind::I: return segment_length(m, s) + coupling * segment_potential(f, s);
            case ActionKind::J:
            case ActionKind::Jtilde:
                return kinetic_factor() * inner(m.metric(s.mid), s.delta, s.delta) / dl + coupling * segment_potential(f, s);
            case ActionKind::K: return coupling * segment_potential(f, s);
        }
        return 0.0;
    }
};

inline Vector node_vector(const PolylineCurve& c, std::size_t i) { return c.node(i).coords(); }

} // namespace detail

inline void require_potential(const FieldModel& f) {
    if (!f.has_potential()) throw ConfigurationError("action requires a field with a potential one-form");
}

/// Sum of segment proper lengths; every chord must be future-directed causal.
inline double polyline_length(const MetricModel& m, const PolylineCurve& c) {
    double L = 0.0;
    for (std::size_t i = 0; i < c.segments(); ++i)
        L += detail::segment_length(m, detail::segment(detail::node_vector(c, i), detail::node_vector(c, i + 1)));
    return L;
}

inline double polyline_potential_integral(const FieldModel& f, const PolylineCurve& c) {
    double W = 0.0;
    for (std::size_t i = 0; i < c.segments(); ++i)
        W += detail::segment_potential(f, detail::segment(detail::node_vector(c, i), detail::node_vector(c, i + 1)));
    return W;
}

/// Central-difference first variation: max over interior nodes and coordinates
/// of |dA/dx_i^mu|, perturbing by h = 1e-6 (1 + |x_i^mu|).
inline double first_variation_norm(const MetricModel& m, const FieldModel& f, const PolylineCurve& c,
                                   detail::Lagrangian lag) {
    const int n = c.dimension();
    const auto& grid = c.grid();
    double total_length = 0.0;
    if (lag.kind == ActionKind::K) total_length = polyline_length(m, c);

    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < c.size(); ++i) {
        const Vector prev = detail::node_vector(c, i - 1), next = detail::node_vector(c, i + 1);
        const Vector here = detail::node_vector(c, i);
        const double dl0 = grid[i] - grid[i - 1], dl1 = grid[i + 1] - grid[i];
        const double base_len = lag.kind == ActionKind::K
                                    ? detail::segment_length(m, detail::segment(prev, here)) +
                                          detail::segment_length(m, detail::segment(here, next))
                                    : 0.0;
        for (int mu = 0; mu < n; ++mu) {
            const double h = 1e-6 * (1.0 + std::abs(here[mu]));
            double val[2];
            for (int side = 0; side < 2; ++side) {
                Vector p = here;
                p[mu] += side == 0 ? h : -h;
                double local = lag.local(m, f, prev, p, dl0) + lag.local(m, f, p, next, dl1);
                if (lag.kind == ActionKind::K) {
                    const double len = total_length - base_len + detail::segment_length(m, detail::segment(prev, p)) +
                                       detail::segment_length(m, detail::segment(p, next));
                    local += 0.5 * len * len;
                }
                val[side] = local;
            }
            worst = std::max(worst, std::abs(val[0] - val[1]) / (2.0 * h));
        }
    }
    return worst;
}

inline ActionReport action_I(const MetricModel& m, const FieldModel& f, double ratio, const PolylineCurve& c) {
    require_potential(f);
    ActionReport r;
    r.which = ActionKind::I;
    r.parameters["qm"] = ratio;
    r.length = polyline_length(m, c);
    r.potential_integral = polyline_potential_integral(f, c);
    r.value = r.length + ratio * r.potential_integral;
    r.gradient_norm = first_variation_norm(m, f, c, {ActionKind::I, ratio});
    return r;
}

/// J (half = true) or J~ (half = false) on the curve's own parameter grid.
inline ActionReport action_J(const MetricModel& m, const FieldModel& f, double Q, const PolylineCurve& c,
                             bool half = true) {
    require_potential(f);
    const detail::Lagrangian lag{half ? ActionKind::J : ActionKind::Jtilde, Q};
    ActionReport r;
    r.which = lag.kind;
    r.parameters["Q"] = Q;
    r.parameters["dlambda"] = c.lambda_span();
    r.parameters["beta"] = Q * c.lambda_span();
    for (std::size_t i = 0; i < c.segments(); ++i)
        r.value += lag.local(m, f, detail::node_vector(c, i), detail::node_vector(c, i + 1), c.grid()[i + 1] - c.grid()[i]);
    r.potential_integral = polyline_potential_integral(f, c);
    try {
        r.length = polyline_length(m, c);
    } catch (const CausalityError&) {
        r.length = std::nan(""); // J is defined for any curve, the length only for causal ones
    }
    r.gradient_norm = first_variation_norm(m, f, c, lag);
    return r;
}

inline ActionReport action_K(const MetricModel& m, const FieldModel& f, double beta, const PolylineCurve& c) {
    require_potential(f);
    ActionReport r;
    r.which = ActionKind::K;
    r.parameters["beta"] = beta;
    r.length = polyline_length(m, c);
    r.potential_integral = polyline_potential_integral(f, c);
    r.value = 0.5 * r.length * r.length + beta * r.potential_integral;
    r.gradient_norm = first_variation_norm(m, f, c, {ActionKind::K, beta});
    return r;
}

// ---------------------------------------------------------------------------
// Extremization of J

struct OptimizerConfig {
    double g_tol = 1e-11;        // max-norm of the discrete gradient
    std::size_t max_iterations = 60;
    std::size_t max_halvings = 40;
};

struct ExtremalResult {
    PolylineCurve curve;
    ActionReport report;
    bool converged = false;
    std::size_t iterations = 0;
    double gradient_max = 0.0; // analytic discrete gradient at exit
};

namespace detail {

/// d/da and d/db of k g(m)(D, D)/dl + Q omega(m)[D], m = (a+b)/2, D = b - a.
inline std::pair<Vector, Vector> j_segment_gradient(const MetricModel& m, const FieldModel& f, double k, double Q,
                                                    const Vector& a, const Vector& b, double dl) {
    const Segment s = segment(a, b);
    const Matrix g = m.metric(s.mid);
    const Vector half_dg = 0.5 * m.metric_gradient(s.mid).contract(s.delta);
    const Vector gd = 2.0 * (g * s.delta);
    const Vector w = f.potential(s.mid);
    const Vector half_dw = 0.5 * (f.potential_gradient(s.mid) * s.delta);
    Vector da = k * (-gd + half_dg) / dl + Q * (-w + half_dw);
    Vector db = k * (gd + half_dg) / dl + Q * (w + half_dw);
    return {std::move(da), std::move(db)};
}

inline bool all_future_timelike(const MetricModel& m, const std::vector<Vector>& x) {
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const Segment s = segment(x[i], x[i + 1]);
        if (!m.in_domain(s.mid) || !m.in_domain(Event(x[i + 1]))) return false;
        if (!causal_character(m, s.mid, s.delta).future_timelike()) return false;
    }
    return true;
}

struct JProblem {
    const MetricModel& m;
    const FieldModel& f;
    double k;
    double Q;
    std::vector<double> grid;

    /// Gradient with respect to interior nodes, stacked node-major.
    Vector gradient(const std::vector<Vector>& x) const {
        const int n = static_cast<int>(x.front().size());
        const std::size_t interior = x.size() - 2;
        Vector G = Vector::Zero(static_cast<Eigen::Index>(interior) * n);
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            const auto [da, db] = j_segment_gradient(m, f, k, Q, x[i], x[i + 1], grid[i + 1] - grid[i]);
            if (i >= 1) G.segment(static_cast<Eigen::Index>(i - 1) * n, n) += da;
            if (i + 1 <= interior) G.segment(static_cast<Eigen::Index>(i) * n, n) += db;
        }
        return G;
    }

    /// Block-tridiagonal Hessian from central differences of the segment gradients.
    Eigen::SparseMatrix<double> hessian(const std::vector<Vector>& x) const {
        const int n = static_cast<int>(x.front().size());
        const std::size_t interior = x.size() - 2;
        std::vector<Eigen::Triplet<double>> trip;
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            const double dl = grid[i + 1] - grid[i];
            // local variables: (x_i, x_{i+1}), global rows only for interior nodes
            for (int side = 0; side < 2; ++side) {
                const std::size_t node = i + static_cast<std::size_t>(side);
                if (node == 0 || node == x.size() - 1) continue;
                for (int mu = 0; mu < n; ++mu) {
                    Vector ap = x[i], bp = x[i + 1], am = x[i], bm = x[i + 1];
                    const double h = 1e-6 * (1.0 + std::abs(x[node][mu]));
                    (side == 0 ? ap : bp)[mu] += h;
                    (side == 0 ? am : bm)[mu] -= h;
                    const auto plus = j_segment_gradient(m, f, k, Q, ap, bp, dl);
                    const auto minus = j_segment_gradient(m, f, k, Q, am, bm, dl);
                    const Vector dda = (plus.first - minus.first) / (2.0 * h);
                    const Vector ddb = (plus.second - minus.second) / (2.0 * h);
                    const auto col = static_cast<int>((node - 1) * static_cast<std::size_t>(n)) + mu;
                    for (int nu = 0; nu < n; ++nu) {
                        if (i >= 1) trip.emplace_back(static_cast<int>((i - 1) * static_cast<std::size_t>(n)) + nu, col, dda[nu]);
                        if (i + 1 <= interior) trip.emplace_back(static_cast<int>(i * static_cast<std::size_t>(n)) + nu, col, ddb[nu]);
                    }
                }
            }
        }
        const auto dim = static_cast<Eigen::Index>(interior) * n;
        Eigen::SparseMatrix<double> H(dim, dim);
        H.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseMatrix<double> Ht = H.transpose();
        return 0.5 * (H + Ht);
    }
};

} // namespace detail

/// Newton iteration on the discrete stationarity conditions of J (or J~) over the
/// interior nodes, with step halving until every chord is future timelike and the
/// gradient norm decreases.
inline ExtremalResult extremize_J(const MetricModel& m, const FieldModel& f, double Q, const PolylineCurve& init,
                                  bool half = true, const OptimizerConfig& opt = {}) {
    require_potential(f);
    if (init.size() < 3) throw ArgumentError("extremize_J: at least one interior node required");
    std::vector<Vector> x;
    for (const auto& e : init.nodes()) x.push_back(e.coords());
    if (!detail::all_future_timelike(m, x)) throw CausalityError("extremize_J: initial curve is not future timelike");

    const detail::JProblem prob{m, f, half ? 0.5 : 1.0, Q, init.grid()};
    const int n = init.dimension();
    const std::size_t interior = x.size() - 2;

    auto apply = [&](const std::vector<Vector>& base, const Vector& step, double t) {
        std::vector<Vector> out = base;
        for (std::size_t i = 0; i < interior; ++i) out[i + 1] += t * step.segment(static_cast<Eigen::Index>(i) * n, n);
        return out;
    };

    ExtremalResult res{init, {}, false, 0, 0.0};
    Vector G = prob.gradient(x);
    double gnorm = G.cwiseAbs().maxCoeff();
    std::size_t it = 0;
    for (; it < opt.max_iterations && gnorm >= opt.g_tol; ++it) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(prob.hessian(x));
        if (lu.info() != Eigen::Success) throw StuckError("extremize_J: singular Hessian (conjugate points?)");
        const Vector step = lu.solve(-G);
        if (!step.allFinite()) throw StuckError("extremize_J: non-finite Newton step");

        bool accepted = false;
        double t = 1.0;
        for (std::size_t k = 0; k <= opt.max_halvings; ++k, t *= 0.5) {
            const auto trial = apply(x, step, t);
            if (!detail::all_future_timelike(m, trial)) continue;
            const Vector Gt = prob.gradient(trial);
            const double gt = Gt.cwiseAbs().maxCoeff();
            if (gt < gnorm || gt < opt.g_tol) {
                x = trial;
                G = Gt;
                gnorm = gt;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (gnorm < 1e3 * opt.g_tol) break; // round-off floor reached
            throw StuckError("extremize_J: no causal descent step after " + std::to_string(opt.max_halvings) +
                             " halvings (gradient " + std::to_string(gnorm) + ")");
        }
    }

    std::vector<Event> nodes;
    for (auto& v : x) nodes.emplace_back(std::move(v));
    res.curve = init.with_nodes(std::move(nodes));
    res.iterations = it;
    res.gradient_max = gnorm;
    res.converged = gnorm < opt.g_tol || gnorm < 1e3 * opt.g_tol;
    res.report = action_J(m, f, Q, res.curve, half);
    return res;
}

// ---------------------------------------------------------------------------
// Constraint identities

struct NeoReport {
    ChargeToMass ratio = ChargeToMass::symbol_r();
    double length = 0.0;  // proper length of the extremal
    double beta = 0.0;    // Q * dlambda
    double product = 0.0; // (q/m) * length
    double abs_error = 0.0;
    double rel_error = 0.0;
    bool kernel_degenerate = false;
};

/// Checks (q/m) * length = Q * dlambda on an extremal of J.
inline NeoReport check_neo(const MetricModel& m, const FieldModel& f, const PolylineCurve& c, double Q,
                           double dlambda, const RecoveryOptions& opt = {}) {
    NeoReport r;
    const Worldline w = to_worldline(c, "extremal");
    r.beta = Q * dlambda;
    r.length = proper_length(m, w);
    const auto fit = recover_charge_to_mass(m, f, w, opt);
    r.ratio = fit.ratio;
    if (fit.ratio.is_symbol_r()) {
        r.kernel_degenerate = true;
        return r;
    }
    r.product = fit.ratio.value() * r.length;
    r.abs_error = std::abs(r.product - r.beta);
    r.rel_error = r.beta != 0.0 ? r.abs_error / std::abs(r.beta) : r.abs_error;
    return r;
}

/// Lower bound |beta| / l for the charge-to-mass ratio of any timelike extremal of
/// J or K, given a positive estimate l_est of the Lorentzian distance.
inline double charge_bound(double beta, double l_est) {
    if (!(l_est > 0.0))
        throw CausalityError("charge_bound: events not chronologically related at the available resolution");
    return std::abs(beta) / l_est;
}

} // namespace emflow
