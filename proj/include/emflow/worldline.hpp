#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emflow/geometry.hpp"

namespace emflow {

enum class ParamKind { ProperTime, AffineConstantSpeed, Generic };

struct Parametrization {
    ParamKind kind = ParamKind::Generic;
    double speed = 0.0; // C for AffineConstantSpeed, 1 for ProperTime

    static Parametrization proper_time() { return {ParamKind::ProperTime, 1.0}; }
    static Parametrization affine(double c) { return {ParamKind::AffineConstantSpeed, c}; }
    static Parametrization generic() { return {ParamKind::Generic, 0.0}; }
};

inline std::string to_string(ParamKind k) {
    switch (k) {
        case ParamKind::ProperTime: return "proper_time";
        case ParamKind::AffineConstantSpeed: return "affine";
        case ParamKind::Generic: return "generic";
    }
    return "?";
}

struct WorldlineSample {
    double lambda;
    Event x;
    Vector v; // dx/dlambda
};

/// Generating equation, its parameters and integration diagnostics.
struct WorldlineMetadata {
    std::string system;
    std::map<std::string, double> parameters;
    std::map<std::string, double> diagnostics;
};

/// An immutable sampled parametrized curve.
class Worldline {
public:
    Worldline() = default;
    Worldline(std::vector<WorldlineSample> samples, Parametrization param, WorldlineMetadata meta = {})
        : samples_(std::move(samples)), param_(param), meta_(std::move(meta)) {
        for (std::size_t i = 1; i < samples_.size(); ++i)
            if (!(samples_[i].lambda > samples_[i - 1].lambda))
                throw ArgumentError("Worldline: parameter values must be strictly increasing");
        for (const auto& s : samples_)
            if (s.v.size() != s.x.dimension()) throw ArgumentError("Worldline: tangent dimension mismatch");
    }

    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    int dimension() const { return samples_.empty() ? 0 : samples_.front().x.dimension(); }
    const std::vector<WorldlineSample>& samples() const { return samples_; }
    const WorldlineSample& operator[](std::size_t i) const { return samples_[i]; }
    const WorldlineSample& front() const { return samples_.front(); }
    const WorldlineSample& back() const { return samples_.back(); }
    const Parametrization& parametrization() const { return param_; }
    const WorldlineMetadata& metadata() const { return meta_; }

    double lambda_begin() const { return samples_.front().lambda; }
    double lambda_end() const { return samples_.back().lambda; }
    double span() const { return lambda_end() - lambda_begin(); }

    Worldline with_metadata(WorldlineMetadata meta) const {
        Worldline w = *this;
        w.meta_ = std::move(meta);
        return w;
    }

    /// Cubic Hermite interpolation of the position using the stored tangents.
    Vector position_at(double lambda) const {
        const std::size_t i = segment(lambda);
        const auto& a = samples_[i];
        const auto& b = samples_[i + 1];
        const double h = b.lambda - a.lambda;
        const double t = (lambda - a.lambda) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * a.x.coords() + h10 * h * a.v + h01 * b.x.coords() + h11 * h * b.v;
    }

    /// Linear interpolation of the tangent.
    Vector tangent_at(double lambda) const {
        const std::size_t i = segment(lambda);
        const auto& a = samples_[i];
        const auto& b = samples_[i + 1];
        const double t = (lambda - a.lambda) / (b.lambda - a.lambda);
        return (1.0 - t) * a.v + t * b.v;
    }

private:
    std::size_t segment(double lambda) const {
        if (samples_.size() < 2) throw ArgumentError("Worldline: interpolation needs two samples");
        auto it = std::upper_bound(samples_.begin(), samples_.end(), lambda,
                                   [](double l, const WorldlineSample& s) { return l < s.lambda; });
        std::size_t i = it == samples_.begin() ? 0 : static_cast<std::size_t>(it - samples_.begin()) - 1;
        return std::min(i, samples_.size() - 2);
    }

    std::vector<WorldlineSample> samples_;
    Parametrization param_;
    WorldlineMetadata meta_;
};

/// Finite-difference weights for the first derivative at z from arbitrary nodes
/// (Fornberg's recursion, derivative orders 0 and 1 only).
inline std::vector<double> derivative_weights(double z, std::span<const double> nodes) {
    const std::size_t n = nodes.size();
    std::vector<double> c0(n, 0.0), c1(n, 0.0);
    double c1_prev = 1.0;
    double c4 = nodes[0] - z;
    c0[0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t mn = std::min<std::size_t>(i, 1);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - z;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                if (mn >= 1) c1[i] = c1_prev * (c0[i - 1] - c5 * c1[i - 1]) / c2;
                c0[i] = -c1_prev * c5 * c0[i - 1] / c2;
            }
            if (mn >= 1) c1[j] = (c4 * c1[j] - c0[j]) / c3;
            c0[j] = c4 * c0[j] / c3;
        }
        c1_prev = c2;
    }
    return c1;
}

/// d(values)/d(lambda) at every sample using a five-point stencil clipped to the ends.
inline std::vector<Vector> differentiate(std::span<const double> lambdas, std::span<const Vector> values,
                                         std::size_t stencil = 5) {
    const std::size_t n = lambdas.size();
    if (n < 2) throw ArgumentError("differentiate: need at least two samples");
    stencil = std::min(stencil, n);
    std::vector<Vector> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t lo = i >= stencil / 2 ? i - stencil / 2 : 0;
        lo = std::min(lo, n - stencil);
        const auto w = derivative_weights(lambdas[i], lambdas.subspan(lo, stencil));
        Vector d = Vector::Zero(values[i].size());
        for (std::size_t k = 0; k < stencil; ++k) d += w[k] * values[lo + k];
        out[i] = std::move(d);
    }
    return out;
}

/// Squared norms g(v, v) at all samples.
inline std::vector<double> squared_norms(const MetricModel& m, const Worldline& w) {
    std::vector<double> q;
    q.reserve(w.size());
    for (const auto& s : w.samples()) q.push_back(inner(m.metric(s.x), s.v, s.v));
    return q;
}

/// Cumulative proper length s(lambda_i) by trapezoidal quadrature of sqrt(g(v,v)).
inline std::vector<double> cumulative_proper_length(const MetricModel& m, const Worldline& w,
                                                    double tol_null = kNullTolerance) {
    std::vector<double> speed;
    speed.reserve(w.size());
    for (const auto& s : w.samples()) {
        const double q = inner(m.metric(s.x), s.v, s.v);
        if (q < -tol_null) throw CausalityError("proper_length: spacelike tangent at lambda = " + std::to_string(s.lambda));
        speed.push_back(std::sqrt(std::max(q, 0.0)));
    }
    std::vector<double> acc(w.size(), 0.0);
    for (std::size_t i = 1; i < w.size(); ++i)
        acc[i] = acc[i - 1] + 0.5 * (speed[i] + speed[i - 1]) * (w[i].lambda - w[i - 1].lambda);
    return acc;
}

/// Integral of the line element along a causal worldline.
inline double proper_length(const MetricModel& m, const Worldline& w) {
    if (w.size() < 2) return 0.0;
    return cumulative_proper_length(m, w).back();
}

/// lambda -> factor * lambda (tangents divided by factor); factor > 0.
inline Worldline scale_parameter(const Worldline& w, double factor, Parametrization param) {
    if (!(factor > 0.0)) throw ArgumentError("scale_parameter: factor must be positive");
    std::vector<WorldlineSample> out;
    out.reserve(w.size());
    for (const auto& s : w.samples()) out.push_back({factor * s.lambda, s.x, s.v / factor});
    return Worldline(std::move(out), param, w.metadata());
}

/// Relabel a timelike worldline by proper time. Nodes are kept (the image is
/// reproduced exactly); the parameter is the cumulative proper length and the
/// tangents are normalized to g(u, u) = 1.
inline Worldline reparametrize_proper_time(const MetricModel& m, const Worldline& w) {
    for (const auto& s : w.samples()) {
        const auto c = causal_character(m, s.x, s.v);
        if (c.type != CausalType::Timelike)
            throw CausalityError("reparametrize_proper_time: " + to_string(c.type) + " tangent at lambda = " +
                                 std::to_string(s.lambda));
    }
    if (w.parametrization().kind == ParamKind::AffineConstantSpeed ||
        w.parametrization().kind == ParamKind::ProperTime) {
        const double c = w.parametrization().kind == ParamKind::ProperTime ? 1.0 : w.parametrization().speed;
        std::vector<WorldlineSample> out;
        out.reserve(w.size());
        const double l0 = w.lambda_begin();
        for (const auto& s : w.samples()) {
            const double q = inner(m.metric(s.x), s.v, s.v);
            out.push_back({c * (s.lambda - l0), s.x, s.v / std::sqrt(q)});
        }
        return Worldline(std::move(out), Parametrization::proper_time(), w.metadata());
    }
    const auto s_of = cumulative_proper_length(m, w);
    std::vector<WorldlineSample> out;
    out.reserve(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto& s = w[i];
        const double q = inner(m.metric(s.x), s.v, s.v);
        out.push_back({s_of[i], s.x, s.v / std::sqrt(q)});
    }
    return Worldline(std::move(out), Parametrization::proper_time(), w.metadata());
}

/// Max Euclidean chart distance between two worldlines compared at equal
/// fractions of their parameter spans.
inline double max_separation(const Worldline& a, const Worldline& b, std::size_t probes = 201) {
    double worst = 0.0;
    for (std::size_t k = 0; k < probes; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(probes - 1);
        const Vector pa = a.position_at(a.lambda_begin() + f * a.span());
        const Vector pb = b.position_at(b.lambda_begin() + f * b.span());
        worst = std::max(worst, (pa - pb).norm());
    }
    return worst;
}

} // namespace emflow
