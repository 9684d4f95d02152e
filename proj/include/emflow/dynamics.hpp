#pragma once

// Right-hand sides and integration of the five dynamical systems:
//   lfe        D_s u = (q/m) F^[u]              proper-time parametrized
//   efe        D_l v = Q F^[v]  (Q = eps = +-1 for the normalized flow)
//   cotangent  D_l p = eps F^[p], dx/dl = p^#   on T*M
//   twisted    Hamiltonian flow of H = 1/2 g^{mn} p_m p_n for Omega + Q pi*F
//   magnetic   D_t v = (q/m) F^[v] on a Riemannian space
// plus charge-to-mass recovery and reparametrization maps between them.

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emflow/geometry.hpp"
#include "emflow/worldline.hpp"

namespace emflow {

/// Time derivative of a phase-space state (x, v) or (x, p).
struct PhaseRate {
    Vector dx;
    Vector dv;
};

struct CotangentState {
    Event x;
    Vector p; // covector, index down
};

inline Vector lower(const MetricModel& m, const Event& x, const Vector& v) { return m.metric(x) * v; }
inline Vector raise(const MetricModel& m, const Event& x, const Vector& p) { return m.inverse_metric(x) * p; }

/// H = 1/2 g^{mn} p_m p_n
inline double hamiltonian(const MetricModel& m, const CotangentState& s) {
    return 0.5 * s.p.dot(m.inverse_metric(s.x) * s.p);
}

inline PhaseRate lfe_rhs(const MetricModel& m, const FieldModel& f, double ratio, const Event& x, const Vector& u) {
    const Vector du = -m.christoffel(x).quadratic(u) + ratio * (raise_field(m, f, x) * u);
    return {u, du};
}

/// Electromagnetic flow with a general coefficient Q (Q = +-1 is the normalized flow).
inline PhaseRate efe_rhs_q(const MetricModel& m, const FieldModel& f, double Q, const Event& x, const Vector& v) {
    const Vector dv = -m.christoffel(x).quadratic(v) + Q * (raise_field(m, f, x) * v);
    return {v, dv};
}

inline void require_unit_sign(double eps) {
    if (eps != 1.0 && eps != -1.0) throw ArgumentError("eps must be +1 or -1");
}

inline PhaseRate efe_rhs(const MetricModel& m, const FieldModel& f, double eps, const Event& x, const Vector& v) {
    require_unit_sign(eps);
    return efe_rhs_q(m, f, eps, x, v);
}

/// dx^a = p^a, dp_m = Gamma^s_{m b} p_s p^b + eps F_{m n} p^n
inline PhaseRate cotangent_flow_rhs(const MetricModel& m, const FieldModel& f, double eps, const CotangentState& s) {
    const Vector p_up = raise(m, s.x, s.p);
    const Connection gamma = m.christoffel(s.x);
    const int n = m.dimension();
    Vector dp = eps * (f.field(s.x) * p_up);
    for (int mu = 0; mu < n; ++mu) {
        double acc = 0.0;
        for (int sig = 0; sig < n; ++sig)
            for (int b = 0; b < n; ++b) acc += gamma(sig, mu, b) * s.p[sig] * p_up[b];
        dp[mu] += acc;
    }
    return {p_up, dp};
}

/// Solves i_X (Omega + Q pi*F) = -dH: dx^m = dH/dp_m, dp_m = -dH/dx^m + Q F_{mn} dx^n.
/// dH/dx^m = 1/2 d_m g^{ab} p_a p_b = -1/2 (d_m g_{rs}) p^r p^s.
inline PhaseRate twisted_hamiltonian_rhs(const MetricModel& m, const FieldModel& f, double Q, const CotangentState& s) {
    const Vector dx = raise(m, s.x, s.p);
    const MetricGradient dg = m.metric_gradient(s.x);
    const Vector dH_dx = -0.5 * dg.contract(dx);
    const Vector dp = -dH_dx + Q * (f.field(s.x) * dx);
    return {dx, dp};
}

inline PhaseRate magnetic_flow_rhs(const MetricModel& space, const FieldModel& f, double ratio, const Event& x,
                                   const Vector& v) {
    if (space.signature() != Signature::Riemannian)
        throw ConfigurationError("magnetic flow requires a positive-definite space metric, got " + space.name());
    const Vector dv = -space.christoffel(x).quadratic(v) + ratio * (raise_field(space, f, x) * v);
    return {v, dv};
}

// ---------------------------------------------------------------------------
// Integration

enum class System { Lfe, Efe, Cotangent, Twisted, Magnetic };

inline std::string to_string(System s) {
    switch (s) {
        case System::Lfe: return "lfe";
        case System::Efe: return "efe";
        case System::Cotangent: return "cotangent";
        case System::Twisted: return "twisted";
        case System::Magnetic: return "magnetic";
    }
    return "?";
}

/// Which equation to integrate and its single coupling constant:
/// q/m for lfe and magnetic, Q for efe and twisted, eps for cotangent.
struct SystemSpec {
    System kind;
    double coupling;

    static SystemSpec lfe(double ratio) { return {System::Lfe, ratio}; }
    static SystemSpec efe(double Q) { return {System::Efe, Q}; }
    static SystemSpec cotangent(double eps) { return {System::Cotangent, eps}; }
    static SystemSpec twisted(double Q) { return {System::Twisted, Q}; }
    static SystemSpec magnetic(double ratio) { return {System::Magnetic, ratio}; }

    bool cotangent_state() const { return kind == System::Cotangent || kind == System::Twisted; }
    std::string coupling_name() const {
        switch (kind) {
            case System::Lfe:
            case System::Magnetic: return "qm";
            case System::Efe:
            case System::Twisted: return "Q";
            case System::Cotangent: return "eps";
        }
        return "coupling";
    }
};

enum class Method { Rk4, Rk45 };

struct IntegratorConfig {
    Method method = Method::Rk45;
    double step = 1e-3;       // Rk4 step, initial step for Rk45
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    std::size_t max_steps = 2'000'000;
    std::size_t samples = 401; // output samples including both ends

    void validate() const {
        if (!(step > 0.0)) throw ArgumentError("integrator: step must be positive");
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw ArgumentError("integrator: tolerances must be positive");
        if (max_steps < 1) throw ArgumentError("integrator: max_steps must be at least 1");
        if (samples < 2) throw ArgumentError("integrator: at least two output samples required");
    }
};

/// Initial data: the tangent dx/dlambda, or the covector p for cotangent systems.
struct InitialState {
    Event x;
    Vector velocity;
};

/// Integration failure; carries whatever part of the trajectory was computed.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, Worldline partial) : Error(what), partial_(std::move(partial)) {}
    const Worldline& partial() const { return partial_; }

private:
    Worldline partial_;
};

namespace detail {

using OdeState = std::vector<double>;

inline OdeState pack(const Vector& a, const Vector& b) {
    OdeState s(static_cast<std::size_t>(a.size() + b.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) s[static_cast<std::size_t>(i)] = a[i];
    for (Eigen::Index i = 0; i < b.size(); ++i) s[static_cast<std::size_t>(a.size() + i)] = b[i];
    return s;
}

inline std::pair<Vector, Vector> unpack(const OdeState& s, int n) {
    Vector a(n), b(n);
    for (int i = 0; i < n; ++i) {
        a[i] = s[static_cast<std::size_t>(i)];
        b[i] = s[static_cast<std::size_t>(n + i)];
    }
    return {a, b};
}

struct Rhs {
    const MetricModel& m;
    const FieldModel& f;
    SystemSpec spec;

    PhaseRate operator()(const Event& x, const Vector& w) const {
        switch (spec.kind) {
            case System::Lfe: return lfe_rhs(m, f, spec.coupling, x, w);
            case System::Efe: return efe_rhs_q(m, f, spec.coupling, x, w);
            case System::Cotangent: return cotangent_flow_rhs(m, f, spec.coupling, {x, w});
            case System::Twisted: return twisted_hamiltonian_rhs(m, f, spec.coupling, {x, w});
            case System::Magnetic: return magnetic_flow_rhs(m, f, spec.coupling, x, w);
        }
        throw ArgumentError("unknown system");
    }

    void operator()(const OdeState& s, OdeState& ds, double /*lambda*/) const {
        const int n = m.dimension();
        auto [x, w] = unpack(s, n);
        if (!x.allFinite() || !w.allFinite()) throw ChartDomainError("state became non-finite");
        const PhaseRate r = (*this)(Event(std::move(x)), w);
        ds = pack(r.dx, r.dv);
    }
};

} // namespace detail

/// Integrate one of the five systems over [lambda0, lambda1].
inline Worldline integrate(const MetricModel& m, const FieldModel& f, SystemSpec spec, const InitialState& init,
                           double lambda0, double lambda1, const IntegratorConfig& cfg = {}) {
    namespace odeint = boost::numeric::odeint;
    using detail::OdeState;

    cfg.validate();
    if (!(lambda1 > lambda0)) throw ArgumentError("integrate: empty parameter range");
    const int n = m.dimension();
    if (init.x.dimension() != n || init.velocity.size() != n || f.dimension() != n)
        throw ArgumentError("integrate: dimension mismatch between chart, field and initial data");
    if (spec.kind == System::Cotangent) require_unit_sign(spec.coupling);
    if (spec.kind == System::Magnetic && m.signature() != Signature::Riemannian)
        throw ConfigurationError("magnetic flow requires a positive-definite space metric, got " + m.name());
    if (spec.kind != System::Magnetic && m.signature() != Signature::Lorentzian)
        throw ConfigurationError(to_string(spec.kind) + " requires a Lorentzian metric");
    m.require_domain(init.x);

    const detail::Rhs rhs{m, f, spec};
    const bool cotangent = spec.cotangent_state();

    std::vector<WorldlineSample> samples;
    samples.reserve(cfg.samples);
    double norm0 = 0.0, h0 = 0.0;
    double norm_drift = 0.0, h_drift = 0.0;

    auto record = [&](double lambda, const OdeState& s) {
        auto [x, w] = detail::unpack(s, n);
        Event ev(std::move(x));
        const Matrix g = m.metric(ev);
        const Vector v = cotangent ? Vector(m.inverse_metric(ev) * w) : w;
        const double q = inner(g, v, v);
        if (samples.empty()) {
            norm0 = q;
            if (cotangent) h0 = 0.5 * w.dot(v);
        } else {
            norm_drift = std::max(norm_drift, std::abs(q - norm0));
            if (cotangent) h_drift = std::max(h_drift, std::abs(0.5 * w.dot(v) - h0));
        }
        samples.push_back({lambda, std::move(ev), v});
    };

    auto partial = [&](const std::string& why) {
        std::vector<WorldlineSample> kept = samples;
        return IntegrationError(why, kept.empty() ? Worldline() : Worldline(std::move(kept), Parametrization::generic()));
    };

    OdeState state = detail::pack(init.x.coords(), init.velocity);
    const double span = lambda1 - lambda0;
    std::size_t steps = 0;
    const auto sample_lambda = [&](std::size_t k) {
        return k + 1 == cfg.samples ? lambda1
                                    : lambda0 + span * static_cast<double>(k) / static_cast<double>(cfg.samples - 1);
    };

    try {
        record(lambda0, state);
        if (cfg.method == Method::Rk45) {
            // Controlled steps that land exactly on every sample point; dense-output
            // interpolation would add step-to-step noise to the stored tangents.
            auto stepper = odeint::make_controlled(cfg.abs_tol, cfg.rel_tol, odeint::runge_kutta_dopri5<OdeState>());
            double t = lambda0;
            double dt = std::min(cfg.step, span);
            for (std::size_t k = 1; k < cfg.samples; ++k) {
                const double target = sample_lambda(k);
                while (t < target) {
                    if (++steps > cfg.max_steps) throw partial("integrate: max_steps exceeded");
                    const bool last = t + dt >= target;
                    double h = last ? target - t : dt;
                    const double before = t;
                    if (stepper.try_step(std::cref(rhs), state, t, h) == odeint::success) {
                        if (last) t = target;
                        if (!last || h > dt) dt = h;
                    } else {
                        t = before;
                        dt = h;
                    }
                    if (!(dt > 1e-14 * (1.0 + std::abs(t)))) throw partial("integrate: step size underflow");
                }
                record(target, state);
            }
        } else {
            odeint::runge_kutta4<OdeState> stepper;
            const auto total = static_cast<std::size_t>(std::ceil(span / cfg.step - 1e-9));
            if (total > cfg.max_steps) throw partial("integrate: max_steps exceeded");
            const double h = span / static_cast<double>(total);
            const std::size_t stride = std::max<std::size_t>(1, total / (cfg.samples - 1));
            for (std::size_t k = 1; k <= total; ++k) {
                stepper.do_step(std::cref(rhs), state, lambda0 + static_cast<double>(k - 1) * h, h);
                ++steps;
                if (k % stride == 0 || k == total) record(k == total ? lambda1 : lambda0 + static_cast<double>(k) * h, state);
            }
        }
    } catch (const IntegrationError&) {
        throw;
    } catch (const ChartDomainError& e) {
        throw partial(std::string("integrate: left the chart domain: ") + e.what());
    } catch (const ArgumentError& e) {
        throw partial(std::string("integrate: ") + e.what());
    }

    WorldlineMetadata meta;
    meta.system = to_string(spec.kind);
    meta.parameters[spec.coupling_name()] = spec.coupling;
    meta.diagnostics["norm_initial"] = norm0;
    meta.diagnostics["norm_drift"] = norm_drift;
    meta.diagnostics["norm_drift_relative"] = norm0 != 0.0 ? norm_drift / std::abs(norm0) : norm_drift;
    meta.diagnostics["norm_drift_rate"] = norm_drift / span;
    if (cotangent) {
        meta.diagnostics["hamiltonian_initial"] = h0;
        meta.diagnostics["hamiltonian_drift"] = h_drift;
        meta.diagnostics["hamiltonian_drift_rate"] = h_drift / span;
    }
    meta.diagnostics["steps"] = static_cast<double>(steps);

    Parametrization param = Parametrization::generic();
    if (spec.kind == System::Magnetic) {
        if (norm0 > 0.0) param = Parametrization::affine(std::sqrt(norm0));
    } else if (norm0 > kNullTolerance) {
        if (spec.kind == System::Lfe && std::abs(norm0 - 1.0) <= 1e-10)
            param = Parametrization::proper_time();
        else
            param = Parametrization::affine(std::sqrt(norm0));
    }
    return Worldline(std::move(samples), param, std::move(meta));
}

/// Largest |g(v,v) - C^2| over the samples for the declared parametrization.
inline double parametrization_defect(const MetricModel& m, const Worldline& w) {
    const auto& p = w.parametrization();
    if (p.kind == ParamKind::Generic) return 0.0;
    const double c2 = p.kind == ParamKind::ProperTime ? 1.0 : p.speed * p.speed;
    double worst = 0.0;
    for (double q : squared_norms(m, w)) worst = std::max(worst, std::abs(q - c2));
    return worst;
}

// ---------------------------------------------------------------------------
// Charge-to-mass recovery

/// A real ratio q/m or the symbol R (trajectory in the kernel of F^, ratio unobservable).
class ChargeToMass {
public:
    static ChargeToMass real(double value) { return ChargeToMass(false, value); }
    static ChargeToMass symbol_r() { return ChargeToMass(true, 0.0); }

    bool is_symbol_r() const { return symbol_r_; }
    double value() const {
        if (symbol_r_) throw ArgumentError("charge-to-mass ratio is the symbol R");
        return value_;
    }
    std::string to_string() const { return symbol_r_ ? "R" : std::to_string(value_); }

private:
    ChargeToMass(bool r, double v) : symbol_r_(r), value_(v) {}
    bool symbol_r_;
    double value_;
};

inline constexpr double kKernelTolerance = 1e-9;

struct RecoveryOptions {
    double kernel_tol = kKernelTolerance;
    double fit_tol = 1e-3; // residual must stay below fit_tol * max |a|
    std::size_t stencil = 7;
};

/// Per-sample terms of the proper-time Lorentz force equation:
/// acceleration a = D_s u and field term b = F^[u], u = v / |v|.
struct ForceTerms {
    std::vector<Vector> acceleration;
    std::vector<Vector> field_term;
};

/// Covariant derivative D_lambda v at every sample, from the stored tangents.
inline std::vector<Vector> covariant_acceleration(const MetricModel& m, const Worldline& w, std::size_t stencil = 7) {
    std::vector<double> lambdas;
    std::vector<Vector> vs;
    lambdas.reserve(w.size());
    vs.reserve(w.size());
    for (const auto& s : w.samples()) {
        lambdas.push_back(s.lambda);
        vs.push_back(s.v);
    }
    auto dv = differentiate(lambdas, vs, stencil);
    for (std::size_t i = 0; i < w.size(); ++i) dv[i] += m.christoffel(w[i].x).quadratic(w[i].v);
    return dv;
}

/// D_s u = (D_l v - u g(D_l v, u)) / g(v, v) holds for any parametrization, so no
/// resampling is required to obtain proper-time quantities.
inline ForceTerms force_terms(const MetricModel& m, const FieldModel& f, const Worldline& w, std::size_t stencil = 7) {
    if (w.size() < 3) throw ArgumentError("charge-to-mass recovery needs at least three samples");
    const auto dv = covariant_acceleration(m, w, stencil);
    ForceTerms t;
    t.acceleration.reserve(w.size());
    t.field_term.reserve(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto& s = w[i];
        const Matrix g = m.metric(s.x);
        const double q = inner(g, s.v, s.v);
        if (!(q > kNullTolerance))
            throw CausalityError("charge-to-mass recovery: non-timelike tangent at lambda = " + std::to_string(s.lambda));
        const Vector u = s.v / std::sqrt(q);
        t.acceleration.push_back((dv[i] - u * inner(g, dv[i], u)) / q);
        t.field_term.push_back(raise_field(m, f, s.x) * u);
    }
    return t;
}

struct ChargeToMassFit {
    ChargeToMass ratio = ChargeToMass::symbol_r();
    double residual = 0.0;       // max |a - (q/m) b|
    double max_acceleration = 0.0;
    double max_field_term = 0.0;
};

inline ChargeToMassFit recover_charge_to_mass(const MetricModel& m, const FieldModel& f, const Worldline& w,
                                              const RecoveryOptions& opt = {}) {
    const ForceTerms t = force_terms(m, f, w, opt.stencil);
    ChargeToMassFit fit;
    double ab = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < t.acceleration.size(); ++i) {
        fit.max_acceleration = std::max(fit.max_acceleration, t.acceleration[i].norm());
        fit.max_field_term = std::max(fit.max_field_term, t.field_term[i].norm());
        ab += t.acceleration[i].dot(t.field_term[i]);
        bb += t.field_term[i].squaredNorm();
    }
    if (fit.max_field_term < opt.kernel_tol) {
        if (fit.max_acceleration < opt.kernel_tol) {
            fit.ratio = ChargeToMass::symbol_r();
            fit.residual = fit.max_acceleration;
            return fit;
        }
        throw NotLfeSolutionError("trajectory accelerates while F^[u] vanishes: not a Lorentz force solution");
    }
    const double k = ab / bb;
    for (std::size_t i = 0; i < t.acceleration.size(); ++i)
        fit.residual = std::max(fit.residual, (t.acceleration[i] - k * t.field_term[i]).norm());
    fit.ratio = ChargeToMass::real(k);
    if (fit.residual > opt.fit_tol * std::max(fit.max_acceleration, opt.kernel_tol))
        throw NotLfeSolutionError("least-squares charge-to-mass fit residual " + std::to_string(fit.residual) +
                                  " exceeds tolerance");
    return fit;
}

/// max |D_s u - (q/m) F^[u]| along the worldline.
inline double lfe_residual(const MetricModel& m, const FieldModel& f, const Worldline& w, double ratio,
                           std::size_t stencil = 7) {
    const ForceTerms t = force_terms(m, f, w, stencil);
    double worst = 0.0;
    for (std::size_t i = 0; i < t.acceleration.size(); ++i)
        worst = std::max(worst, (t.acceleration[i] - ratio * t.field_term[i]).norm());
    return worst;
}

/// max |D_l v - Q F^[v]| in the worldline's own parametrization.
inline double efe_residual(const MetricModel& m, const FieldModel& f, const Worldline& w, double Q,
                           std::size_t stencil = 7) {
    const auto dv = covariant_acceleration(m, w, stencil);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        worst = std::max(worst, (dv[i] - Q * (raise_field(m, f, w[i].x) * w[i].v)).norm());
    return worst;
}

/// Parametrize a proper-time LFE solution with ratio q/m as a solution of the
/// Q-EFE: d(lambda) = (q/(Q m)) ds, so that C = Q / (q/m).
inline Worldline lfe_to_efe(const Worldline& w, double ratio, double Q) {
    if (w.parametrization().kind != ParamKind::ProperTime)
        throw ArgumentError("lfe_to_efe: worldline must be proper-time parametrized");
    if (ratio == 0.0 || Q == 0.0 || (ratio > 0.0) != (Q > 0.0))
        throw ArgumentError("lfe_to_efe: q/m and Q must be nonzero with equal signs");
    Worldline out = scale_parameter(w, ratio / Q, Parametrization::affine(Q / ratio));
    auto meta = out.metadata();
    meta.system = "efe";
    meta.parameters["Q"] = Q;
    return out.with_metadata(std::move(meta));
}

/// Map a Q-EFE solution x to the Q'-EFE solution lambda' -> x((Q'/Q) lambda').
inline Worldline efe_rescale(const Worldline& w, double Q, double Qp) {
    if (Q == 0.0 || Qp == 0.0 || (Q > 0.0) != (Qp > 0.0))
        throw ArgumentError("efe_rescale: Q and Q' must be nonzero with equal signs");
    const double factor = Q / Qp;
    Parametrization p = w.parametrization();
    if (p.kind == ParamKind::AffineConstantSpeed || p.kind == ParamKind::ProperTime)
        p = Parametrization::affine(p.speed / factor);
    Worldline out = scale_parameter(w, factor, p);
    auto meta = out.metadata();
    meta.parameters["Q"] = Qp;
    return out.with_metadata(std::move(meta));
}

} // namespace emflow
