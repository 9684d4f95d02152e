#pragma once

// Two-point connection problems solved by shooting.
//
// Lorentz force problem: unknowns are a point of the unit future hyperboloid
// (rapidity vector in an orthonormal frame at the start event) and the proper
// time span. The mass-shell condition g(u,u) = 1 is built into the chart.
// Flow problem: same direction chart plus a speed C > 0 with the parameter span
// fixed to 1 (any other span is absorbed by rescaling the coefficient).

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "emflow/dynamics.hpp"
#include "emflow/functionals.hpp"
#include "emflow/geometry.hpp"
#include "emflow/worldline.hpp"

namespace emflow {

enum class ProblemKind { Lfe, Efe };

struct SolverTolerances {
    double bvp_tol = 1e-8;        // chart distance; 1e-6 is appropriate on curved charts
    double jacobian_step = 1e-6;  // relative
    std::size_t max_iterations = 40;
    std::size_t max_halvings = 30;
    std::size_t restarts = 8;
    std::uint64_t seed = 1;
    IntegratorConfig integrator{};
};

struct ConnectionProblem {
    MetricPtr metric;
    FieldPtr field;
    Event from;
    Event to;
    ProblemKind kind = ProblemKind::Lfe;
    double coupling = 0.0; // q/m for Lfe, eps = +-1 for Efe
    SolverTolerances tol{};

    void validate() const {
        if (!metric || !field) throw ConfigurationError("connection problem needs a metric and a field");
        metric->require_domain(from);
        metric->require_domain(to);
        if ((from.coords() - to.coords()).norm() == 0.0) throw ArgumentError("connection problem: x0 == x1");
        if (kind == ProblemKind::Efe) require_unit_sign(coupling);
    }
};

/// Unknowns of the shooting map. `direction` is the rapidity vector (its norm is
/// the rapidity, its direction the spatial direction in the frame at x0).
struct ShootingVariables {
    Vector direction;
    double span = 1.0;  // proper time s1 (Lfe)
    double speed = 1.0; // C (Efe)
};

/// Orthonormal frame at x: column 0 future timelike unit, columns 1.. unit spacelike.
inline Matrix orthonormal_frame(const MetricModel& m, const Event& x) {
    const Matrix g = m.metric(x);
    const int n = m.dimension();
    if (!(g(0, 0) > 0.0)) throw ConfigurationError("orthonormal_frame: coordinate 0 is not timelike at this event");
    Matrix e = Matrix::Zero(n, n);
    std::vector<double> sign(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        Vector w = Vector::Unit(n, a);
        for (int b = 0; b < a; ++b) w -= (inner(g, w, e.col(b)) / sign[static_cast<std::size_t>(b)]) * e.col(b);
        const double q = inner(g, w, w);
        if (a == 0 ? !(q > 0.0) : !(q < 0.0)) throw ConfigurationError("orthonormal_frame: degenerate metric");
        sign[static_cast<std::size_t>(a)] = a == 0 ? 1.0 : -1.0;
        e.col(a) = w / std::sqrt(std::abs(q));
    }
    return e;
}

/// Future unit timelike vector cosh|w| e0 + sinh|w| (w/|w|) . e.
inline Vector unit_velocity(const Matrix& frame, const Vector& rapidity) {
    const double r = rapidity.norm();
    const double sinhc = r < 1e-8 ? 1.0 + r * r / 6.0 : std::sinh(r) / r;
    const auto n = frame.cols();
    return std::cosh(r) * frame.col(0) + sinhc * (frame.rightCols(n - 1) * rapidity);
}

/// Inverse of unit_velocity for a future timelike vector (any normalization);
/// returns the rapidity vector and the norm sqrt(g(v,v)).
inline std::pair<Vector, double> rapidity_of(const MetricModel& m, const Event& x, const Matrix& frame, const Vector& v) {
    const Matrix g = m.metric(x);
    const auto n = frame.cols();
    Vector c(n);
    for (Eigen::Index a = 0; a < n; ++a) c[a] = inner(g, v, frame.col(a)) * (a == 0 ? 1.0 : -1.0);
    const double norm2 = c[0] * c[0] - c.tail(n - 1).squaredNorm();
    if (!(norm2 > 0.0) || !(c[0] > 0.0)) throw CausalityError("rapidity_of: vector is not future timelike");
    const double norm = std::sqrt(norm2);
    const Vector spatial = c.tail(n - 1);
    const double s = spatial.norm();
    if (s == 0.0) return {Vector::Zero(n - 1), norm};
    return {Vector(std::asinh(s / norm) * spatial / s), norm};
}

struct ShotResult {
    Vector miss;
    Worldline trajectory;
};

namespace detail {

inline InitialState shot_initial(const ConnectionProblem& p, const Matrix& frame, const ShootingVariables& v) {
    Vector u = unit_velocity(frame, v.direction);
    if (p.kind == ProblemKind::Efe) u *= v.speed;
    return {p.from, u};
}

inline double shot_end(const ConnectionProblem& p, const ShootingVariables& v) {
    return p.kind == ProblemKind::Lfe ? v.span : 1.0;
}

inline SystemSpec shot_system(const ConnectionProblem& p) {
    return p.kind == ProblemKind::Lfe ? SystemSpec::lfe(p.coupling) : SystemSpec::efe(p.coupling);
}

/// Unconstrained coordinates of the shooting variables: (direction, log span|speed).
inline Vector to_unknowns(const ConnectionProblem& p, const ShootingVariables& v) {
    const auto k = v.direction.size();
    Vector z(k + 1);
    z.head(k) = v.direction;
    z[k] = std::log(p.kind == ProblemKind::Lfe ? v.span : v.speed);
    return z;
}

inline ShootingVariables from_unknowns(const ConnectionProblem& p, const Vector& z) {
    const auto k = z.size() - 1;
    ShootingVariables v;
    v.direction = z.head(k);
    if (p.kind == ProblemKind::Lfe)
        v.span = std::exp(z[k]);
    else
        v.speed = std::exp(z[k]);
    return v;
}

} // namespace detail

/// Integrate from x0 with the initial velocity encoded by `v`; miss = x(end) - x1.
inline ShotResult shoot(const ConnectionProblem& p, const ShootingVariables& v) {
    p.validate();
    if (v.direction.size() != p.metric->dimension() - 1) throw ArgumentError("shoot: direction needs n-1 components");
    if (!(v.span > 0.0) || !(v.speed > 0.0)) throw ArgumentError("shoot: span and speed must be positive");
    const Matrix frame = orthonormal_frame(*p.metric, p.from);
    const InitialState init = detail::shot_initial(p, frame, v);
    Worldline w = integrate(*p.metric, *p.field, detail::shot_system(p), init, 0.0, detail::shot_end(p, v),
                            p.tol.integrator);
    Vector miss = w.back().x.coords() - p.to.coords();
    return {std::move(miss), std::move(w)};
}

/// Straight-chord guess: the chord direction at x0 and its interval as span.
inline ShootingVariables chord_guess(const ConnectionProblem& p) {
    const Matrix frame = orthonormal_frame(*p.metric, p.from);
    const Vector chord = p.to.coords() - p.from.coords();
    ShootingVariables v;
    try {
        auto [rap, norm] = rapidity_of(*p.metric, p.from, frame, chord);
        v.direction = rap;
        v.span = norm;
        v.speed = norm;
    } catch (const CausalityError&) {
        v.direction = Vector::Zero(p.metric->dimension() - 1);
        v.span = std::max(std::abs(chord[0]), 1e-3);
        v.speed = v.span;
    }
    return v;
}

struct ConnectionResult {
    bool converged = false;
    Worldline trajectory;
    ShootingVariables variables;
    Vector initial_velocity;
    double miss_norm = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    std::size_t restarts_used = 0;
    std::string message;
};

namespace detail {

struct Attempt {
    bool converged = false;
    Vector z;
    double miss = std::numeric_limits<double>::infinity();
    std::optional<ShotResult> shot;
    std::size_t iterations = 0;
    std::string message;
};

inline std::optional<ShotResult> try_shoot(const ConnectionProblem& p, const Vector& z) {
    try {
        return shoot(p, from_unknowns(p, z));
    } catch (const IntegrationError&) {
        return std::nullopt;
    } catch (const ChartDomainError&) {
        return std::nullopt;
    } catch (const ArgumentError&) { // span or speed underflow
        return std::nullopt;
    }
}

/// Damped Newton on the miss map with a forward-difference Jacobian.
inline Attempt newton(const ConnectionProblem& p, Vector z) {
    Attempt a;
    auto shot = try_shoot(p, z);
    if (!shot) {
        a.message = "initial shot failed";
        return a;
    }
    double miss = shot->miss.norm();
    const auto dim = z.size();
    for (std::size_t it = 0; it < p.tol.max_iterations; ++it) {
        a.iterations = it;
        if (miss < p.tol.bvp_tol) break;
        Matrix J(dim, dim);
        bool ok = true;
        for (Eigen::Index j = 0; j < dim && ok; ++j) {
            Vector zp = z;
            const double h = p.tol.jacobian_step * (1.0 + std::abs(z[j]));
            zp[j] += h;
            const auto sp = try_shoot(p, zp);
            if (!sp) {
                ok = false;
                break;
            }
            J.col(j) = (sp->miss - shot->miss) / h;
        }
        if (!ok) {
            a.message = "Jacobian evaluation left the chart";
            break;
        }
        const Vector step = J.colPivHouseholderQr().solve(-shot->miss);
        if (!step.allFinite()) {
            a.message = "singular shooting Jacobian";
            break;
        }
        bool accepted = false;
        double t = 1.0;
        for (std::size_t k = 0; k <= p.tol.max_halvings; ++k, t *= 0.5) {
            const Vector zt = z + t * step;
            auto st = try_shoot(p, zt);
            if (st && st->miss.norm() < miss) {
                z = zt;
                shot = std::move(st);
                miss = shot->miss.norm();
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            a.message = "no decrease along the Newton direction";
            break;
        }
        a.iterations = it + 1;
    }
    a.converged = miss < p.tol.bvp_tol;
    a.z = z;
    a.miss = miss;
    a.shot = std::move(shot);
    if (a.converged) a.message = "converged";
    else if (a.message.empty()) a.message = "iteration limit reached";
    return a;
}

} // namespace detail

/// Solve the connection problem, starting from `guess` (or the chord guess) and
/// restarting from seeded random perturbations of it on failure.
inline ConnectionResult solve_connection(const ConnectionProblem& p, std::optional<ShootingVariables> guess = {}) {
    p.validate();
    const ShootingVariables start = guess ? *guess : chord_guess(p);
    const Vector z0 = detail::to_unknowns(p, start);

    std::mt19937_64 rng(p.tol.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    ConnectionResult best;
    detail::Attempt best_attempt;
    for (std::size_t r = 0; r <= p.tol.restarts; ++r) {
        Vector z = z0;
        if (r > 0) {
            for (Eigen::Index j = 0; j + 1 < z.size(); ++j) z[j] += 0.3 * normal(rng);
            z[z.size() - 1] += 0.2 * normal(rng);
        }
        detail::Attempt a = detail::newton(p, z);
        const bool better = a.shot && a.miss < best_attempt.miss;
        if (better) best_attempt = a;
        best.restarts_used = r;
        if (a.converged) break;
    }

    best.iterations = best_attempt.iterations;
    best.message = best_attempt.message.empty() ? "no admissible shot" : best_attempt.message;
    if (!best_attempt.shot) return best;
    best.converged = best_attempt.converged;
    best.miss_norm = best_attempt.miss;
    best.variables = detail::from_unknowns(p, best_attempt.z);
    best.trajectory = std::move(best_attempt.shot->trajectory);
    best.initial_velocity = best.trajectory.front().v;
    return best;
}

inline ConnectionResult solve_connection_lfe(const ConnectionProblem& p, std::optional<ShootingVariables> guess = {}) {
    if (p.kind != ProblemKind::Lfe) throw ArgumentError("solve_connection_lfe: problem kind is not lfe");
    return solve_connection(p, std::move(guess));
}

inline ConnectionResult solve_connection_efe(const ConnectionProblem& p, std::optional<ShootingVariables> guess = {}) {
    if (p.kind != ProblemKind::Efe) throw ArgumentError("solve_connection_efe: problem kind is not efe");
    return solve_connection(p, std::move(guess));
}

// ---------------------------------------------------------------------------
// Charge-to-mass scans

struct ScanOptions {
    SolverTolerances tol{};
    std::size_t workers = 0;      // 0: hardware concurrency
    double continuation_step = 0.25;
};

struct ScanEntry {
    double qm = 0.0;
    bool converged = false;
    double miss_norm = std::numeric_limits<double>::infinity();
    double proper_length = std::numeric_limits<double>::quiet_NaN();
    double action_I = std::numeric_limits<double>::quiet_NaN();
    bool kernel = false; // recovered ratio is the symbol R
    Worldline trajectory;
    Vector initial_velocity;
    std::string message;
};

struct ScanResult {
    std::vector<ScanEntry> entries;
    std::size_t successes = 0;
    double min_pairwise_separation = std::numeric_limits<double>::infinity(); // over non-kernel converged pairs
    double min_length = std::numeric_limits<double>::quiet_NaN();
    double max_length = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline ScanEntry scan_one(const ConnectionProblem& base, const ShootingVariables& geodesic, double qm,
                          double continuation_step) {
    ScanEntry e;
    e.qm = qm;
    ConnectionProblem p = base;
    p.coupling = qm;
    // continuation in q/m from the geodesic solution
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(std::abs(qm) / continuation_step)));
    ShootingVariables guess = geodesic;
    ConnectionResult r;
    for (std::size_t k = 1; k <= steps; ++k) {
        p.coupling = qm * static_cast<double>(k) / static_cast<double>(steps);
        r = solve_connection(p, guess);
        if (!r.converged) break;
        guess = r.variables;
    }
    e.converged = r.converged;
    e.miss_norm = r.miss_norm;
    e.message = r.message;
    if (!r.converged) return e;
    e.trajectory = r.trajectory;
    e.initial_velocity = r.initial_velocity;
    e.proper_length = proper_length(*p.metric, r.trajectory);
    if (p.field->has_potential()) {
        const PolylineCurve c = PolylineCurve::from_worldline(r.trajectory);
        e.action_I = polyline_length(*p.metric, c) + qm * polyline_potential_integral(*p.field, c);
    }
    try {
        e.kernel = recover_charge_to_mass(*p.metric, *p.field, r.trajectory).ratio.is_symbol_r();
    } catch (const NotLfeSolutionError&) {
        e.kernel = false;
    }
    return e;
}

} // namespace detail

/// Solve the Lorentz force connection problem for every ratio of `grid`.
/// Entries are independent: each one continues from the geodesic solution, so
/// results do not depend on the number of workers or their scheduling.
inline ScanResult scan_charge_to_mass(MetricPtr metric, FieldPtr field, const Event& x0, const Event& x1,
                                      std::span<const double> grid, const ScanOptions& opt = {}) {
    ConnectionProblem base{std::move(metric), std::move(field), x0, x1, ProblemKind::Lfe, 0.0, opt.tol};
    base.validate();
    const ConnectionResult geo = solve_connection(base);
    const ShootingVariables geodesic = geo.converged ? geo.variables : chord_guess(base);

    ScanResult out;
    out.entries.resize(grid.size());
    std::size_t workers = opt.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opt.workers;
    workers = std::min(workers, std::max<std::size_t>(grid.size(), 1));
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next++; i < grid.size(); i = next++)
            out.entries[i] = detail::scan_one(base, geodesic, grid[i], opt.continuation_step);
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    for (std::size_t i = 0; i < out.entries.size(); ++i) {
        const auto& a = out.entries[i];
        if (!a.converged) continue;
        ++out.successes;
        if (std::isnan(out.min_length) || a.proper_length < out.min_length) out.min_length = a.proper_length;
        if (std::isnan(out.max_length) || a.proper_length > out.max_length) out.max_length = a.proper_length;
        for (std::size_t j = i + 1; j < out.entries.size(); ++j) {
            const auto& b = out.entries[j];
            if (!b.converged || a.kernel || b.kernel) continue;
            out.min_pairwise_separation = std::min(out.min_pairwise_separation, max_separation(a.trajectory, b.trajectory));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lorentzian distance

struct DistanceEstimate {
    double lower_bound = 0.0;
    Worldline witness;
    std::size_t candidates = 0;
};

/// Largest proper length among connecting causal curves: the geodesic solution
/// plus any `extra` worldlines that connect x0 to x1 within `endpoint_tol`.
inline DistanceEstimate lorentzian_distance_estimate(MetricPtr metric, const Event& x0, const Event& x1,
                                                     std::span<const Worldline> extra = {},
                                                     const SolverTolerances& tol = {}, double endpoint_tol = 1e-6) {
    DistanceEstimate est;
    bool found = false;
    auto consider = [&](const Worldline& w) {
        if (w.size() < 2) return;
        if ((w.front().x.coords() - x0.coords()).norm() > endpoint_tol) return;
        if ((w.back().x.coords() - x1.coords()).norm() > endpoint_tol) return;
        double len = 0.0;
        try {
            len = proper_length(*metric, w);
        } catch (const CausalityError&) {
            return;
        }
        ++est.candidates;
        if (!found || len > est.lower_bound) {
            est.lower_bound = len;
            est.witness = w;
            found = true;
        }
    };

    const auto none = std::make_shared<ZeroField>(metric->dimension());
    ConnectionProblem geo{metric, none, x0, x1, ProblemKind::Lfe, 0.0, tol};
    const ConnectionResult g = solve_connection(geo);
    if (g.converged) consider(g.trajectory);
    for (const auto& w : extra) consider(w);
    if (!found) throw UnknownDistanceError("no connecting causal curve found between the events");
    return est;
}

} // namespace emflow
