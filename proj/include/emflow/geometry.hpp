#pragma once

// Charts, metrics, connection coefficients and electromagnetic two-forms.
//
// Conventions used throughout the library:
//   * signature (+,-,...,-), coordinate 0 is the time function, c = 1;
//   * F = d(omega) with F_{mu nu} = d_mu omega_nu - d_nu omega_mu;
//   * the mixed field tensor is F^mu_nu = g^{mu a} F_{a nu} (left index raised).
// With these choices the Euler-Lagrange equations of I = int(ds + (q/m) omega)
// are D_s u = (q/m) F^[u], the form used by every right-hand side.

#include <Eigen/Dense>

#include <cmath>
#include <initializer_list>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "emflow/errors.hpp"

namespace emflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kNullTolerance = 1e-9;

/// Relative step used by every central-difference stencil: h = 1e-5 (1 + |x|).
inline double fd_step(double coordinate) { return 1e-5 * (1.0 + std::abs(coordinate)); }

/// A point of the spacetime chart.
class Event {
public:
    Event() = default;
    explicit Event(Vector coords) : coords_(std::move(coords)) { check(); }
    Event(std::initializer_list<double> values) : coords_(static_cast<Eigen::Index>(values.size())) {
        Eigen::Index i = 0;
        for (double v : values) coords_[i++] = v;
        check();
    }

    int dimension() const { return static_cast<int>(coords_.size()); }
    const Vector& coords() const { return coords_; }
    double operator[](int i) const { return coords_[i]; }

    Event shifted(const Vector& dx) const { return Event(coords_ + dx); }
    Event shifted(int axis, double h) const {
        Vector c = coords_;
        c[axis] += h;
        return Event(std::move(c));
    }

private:
    void check() const {
        if (coords_.size() < 2) throw ArgumentError("Event: at least two coordinates required");
        if (!coords_.allFinite()) throw ArgumentError("Event: non-finite coordinate");
    }

    Vector coords_;
};

/// Connection coefficients Gamma^mu_{ab}, symmetric in the lower pair.
class Connection {
public:
    explicit Connection(int n) : n_(n), data_(static_cast<std::size_t>(n * n * n), 0.0) {}

    int dimension() const { return n_; }
    double& operator()(int mu, int a, int b) { return data_[index(mu, a, b)]; }
    double operator()(int mu, int a, int b) const { return data_[index(mu, a, b)]; }

    /// Gamma^mu_{ab} u^a u^b
    Vector quadratic(const Vector& u) const { return bilinear(u, u); }

    /// Gamma^mu_{ab} u^a w^b
    Vector bilinear(const Vector& u, const Vector& w) const {
        Vector out = Vector::Zero(n_);
        for (int mu = 0; mu < n_; ++mu)
            for (int a = 0; a < n_; ++a)
                for (int b = 0; b < n_; ++b) out[mu] += (*this)(mu, a, b) * u[a] * w[b];
        return out;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    double max_abs_difference(const Connection& other) const {
        double m = 0.0;
        for (std::size_t i = 0; i < data_.size(); ++i) m = std::max(m, std::abs(data_[i] - other.data_[i]));
        return m;
    }

private:
    std::size_t index(int mu, int a, int b) const {
        return static_cast<std::size_t>((mu * n_ + a) * n_ + b);
    }

    int n_;
    std::vector<double> data_;
};

/// Partial derivatives d_a g_{mu nu}; slice(a) is the symmetric matrix for one a.
class MetricGradient {
public:
    explicit MetricGradient(int n) : slices_(static_cast<std::size_t>(n), Matrix::Zero(n, n)) {}
    Matrix& slice(int a) { return slices_[static_cast<std::size_t>(a)]; }
    const Matrix& slice(int a) const { return slices_[static_cast<std::size_t>(a)]; }
    int dimension() const { return static_cast<int>(slices_.size()); }

    /// d_a g_{mu nu} u^mu u^nu for every a.
    Vector contract(const Vector& u) const {
        Vector out(dimension());
        for (int a = 0; a < dimension(); ++a) out[a] = u.dot(slice(a) * u);
        return out;
    }

private:
    std::vector<Matrix> slices_;
};

enum class Signature { Lorentzian, Riemannian };

class MetricModel {
public:
    virtual ~MetricModel() = default;

    virtual int dimension() const = 0;
    virtual std::string name() const = 0;
    virtual Signature signature() const { return Signature::Lorentzian; }
    virtual bool in_domain(const Event&) const { return true; }

    Matrix metric(const Event& x) const {
        require_domain(x);
        return compute_metric(x);
    }

    Matrix inverse_metric(const Event& x) const {
        require_domain(x);
        return compute_inverse(x);
    }

    Connection christoffel(const Event& x) const {
        require_domain(x);
        return compute_christoffel(x);
    }

    /// d_a g_{mu nu} = g_{mu s} Gamma^s_{a nu} + g_{nu s} Gamma^s_{a mu}
    MetricGradient metric_gradient(const Event& x) const {
        const Matrix g = metric(x);
        const Connection gamma = christoffel(x);
        const int n = dimension();
        MetricGradient dg(n);
        for (int a = 0; a < n; ++a)
            for (int mu = 0; mu < n; ++mu)
                for (int nu = 0; nu < n; ++nu) {
                    double s = 0.0;
                    for (int sig = 0; sig < n; ++sig)
                        s += g(mu, sig) * gamma(sig, a, nu) + g(nu, sig) * gamma(sig, a, mu);
                    dg.slice(a)(mu, nu) = s;
                }
        return dg;
    }

    void require_domain(const Event& x) const {
        if (x.dimension() != dimension())
            throw ArgumentError(name() + ": event dimension " + std::to_string(x.dimension()) +
                                " does not match chart dimension " + std::to_string(dimension()));
        if (!in_domain(x)) throw ChartDomainError(name() + ": event outside the chart domain");
    }

protected:
    virtual Matrix compute_metric(const Event& x) const = 0;
    virtual Matrix compute_inverse(const Event& x) const { return compute_metric(x).inverse(); }
    virtual Connection compute_christoffel(const Event& x) const;
};

/// Gamma^mu_{ab} = 1/2 g^{mu s} (d_a g_{s b} + d_b g_{s a} - d_s g_{ab}) from central
/// differences of the metric.
inline Connection finite_difference_christoffel(const MetricModel& m, const Event& x) {
    const int n = m.dimension();
    std::vector<Matrix> dg(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        const double h = fd_step(x[a]);
        dg[static_cast<std::size_t>(a)] = (m.metric(x.shifted(a, h)) - m.metric(x.shifted(a, -h))) / (2.0 * h);
    }
    const Matrix ginv = m.inverse_metric(x);
    Connection gamma(n);
    for (int mu = 0; mu < n; ++mu)
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) {
                double s = 0.0;
                for (int sig = 0; sig < n; ++sig) {
                    const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b),
                               us = static_cast<std::size_t>(sig);
                    s += ginv(mu, sig) * (dg[ua](sig, b) + dg[ub](sig, a) - dg[us](a, b));
                }
                gamma(mu, a, b) = 0.5 * s;
                gamma(mu, b, a) = 0.5 * s;
            }
    return gamma;
}

inline Connection MetricModel::compute_christoffel(const Event& x) const {
    return finite_difference_christoffel(*this, x);
}

using MetricPtr = std::shared_ptr<const MetricModel>;

// ---------------------------------------------------------------------------
// Built-in charts

class Minkowski final : public MetricModel {
public:
    explicit Minkowski(int n = 4) : n_(n) {
        if (n < 2) throw ArgumentError("Minkowski: dimension must be at least 2");
    }
    int dimension() const override { return n_; }
    std::string name() const override { return "minkowski"; }

protected:
    Matrix compute_metric(const Event&) const override { return eta(); }
    Matrix compute_inverse(const Event&) const override { return eta(); }
    Connection compute_christoffel(const Event&) const override { return Connection(n_); }

private:
    Matrix eta() const {
        Matrix g = -Matrix::Identity(n_, n_);
        g(0, 0) = 1.0;
        return g;
    }
    int n_;
};

/// Flat positive-definite space, used as the configuration space of the
/// non-relativistic magnetic flow.
class Euclidean final : public MetricModel {
public:
    explicit Euclidean(int n = 3) : n_(n) {
        if (n < 2) throw ArgumentError("Euclidean: dimension must be at least 2");
    }
    int dimension() const override { return n_; }
    std::string name() const override { return "euclidean"; }
    Signature signature() const override { return Signature::Riemannian; }

protected:
    Matrix compute_metric(const Event&) const override { return Matrix::Identity(n_, n_); }
    Matrix compute_inverse(const Event&) const override { return Matrix::Identity(n_, n_); }
    Connection compute_christoffel(const Event&) const override { return Connection(n_); }

private:
    int n_;
};

/// Schwarzschild exterior in Schwarzschild coordinates (t, r, theta, phi), r > 2M.
class Schwarzschild final : public MetricModel {
public:
    explicit Schwarzschild(double mass) : mass_(mass) {
        if (!(mass > 0.0) || !std::isfinite(mass)) throw ArgumentError("Schwarzschild: mass must be positive");
    }
    int dimension() const override { return 4; }
    std::string name() const override { return "schwarzschild"; }
    double mass() const { return mass_; }

    bool in_domain(const Event& x) const override {
        const double th = x[2];
        return x[1] > 2.0 * mass_ && th > 0.0 && th < M_PI;
    }

protected:
    Matrix compute_metric(const Event& x) const override {
        const double r = x[1], s = std::sin(x[2]);
        const double f = 1.0 - 2.0 * mass_ / r;
        Matrix g = Matrix::Zero(4, 4);
        g(0, 0) = f;
        g(1, 1) = -1.0 / f;
        g(2, 2) = -r * r;
        g(3, 3) = -r * r * s * s;
        return g;
    }

    Matrix compute_inverse(const Event& x) const override {
        const double r = x[1], s = std::sin(x[2]);
        const double f = 1.0 - 2.0 * mass_ / r;
        Matrix g = Matrix::Zero(4, 4);
        g(0, 0) = 1.0 / f;
        g(1, 1) = -f;
        g(2, 2) = -1.0 / (r * r);
        g(3, 3) = -1.0 / (r * r * s * s);
        return g;
    }

    Connection compute_christoffel(const Event& x) const override {
        const double M = mass_, r = x[1], th = x[2];
        const double f = 1.0 - 2.0 * M / r;
        const double s = std::sin(th), c = std::cos(th);
        Connection G(4);
        auto sym = [&G](int mu, int a, int b, double v) {
            G(mu, a, b) = v;
            G(mu, b, a) = v;
        };
        sym(0, 0, 1, M / (r * r * f));
        sym(1, 0, 0, M * f / (r * r));
        sym(1, 1, 1, -M / (r * r * f));
        sym(1, 2, 2, -r * f);
        sym(1, 3, 3, -r * f * s * s);
        sym(2, 1, 2, 1.0 / r);
        sym(2, 3, 3, -s * c);
        sym(3, 1, 3, 1.0 / r);
        sym(3, 2, 3, c / s);
        return G;
    }

private:
    double mass_;
};

/// User-supplied constant coefficient table g_{mu nu}.
class ConstantMetric final : public MetricModel {
public:
    explicit ConstantMetric(Matrix g, Signature sig = Signature::Lorentzian)
        : g_(std::move(g)), signature_(sig) {
        if (g_.rows() != g_.cols() || g_.rows() < 2)
            throw ConfigurationError("metric table must be a square matrix of size >= 2");
        if (!g_.allFinite()) throw ConfigurationError("metric table has non-finite entries");
        if ((g_ - g_.transpose()).cwiseAbs().maxCoeff() > 1e-14)
            throw ConfigurationError("metric table is not symmetric");
        ginv_ = g_.inverse();
    }
    int dimension() const override { return static_cast<int>(g_.rows()); }
    std::string name() const override { return "table"; }
    Signature signature() const override { return signature_; }

protected:
    Matrix compute_metric(const Event&) const override { return g_; }
    Matrix compute_inverse(const Event&) const override { return ginv_; }
    Connection compute_christoffel(const Event&) const override { return Connection(dimension()); }

private:
    Matrix g_, ginv_;
    Signature signature_;
};

// ---------------------------------------------------------------------------
// Electromagnetic fields

class FieldModel {
public:
    virtual ~FieldModel() = default;

    virtual int dimension() const = 0;
    virtual std::string name() const = 0;
    virtual bool has_potential() const { return false; }

    /// F_{mu nu}
    virtual Matrix field(const Event& x) const = 0;

    /// omega_mu
    Vector potential(const Event& x) const {
        if (!has_potential()) throw ConfigurationError(name() + ": field has no potential one-form");
        return compute_potential(x);
    }

    /// Entry (mu, nu) is d_mu omega_nu.
    virtual Matrix potential_gradient(const Event& x) const {
        const int n = dimension();
        Matrix d(n, n);
        for (int mu = 0; mu < n; ++mu) {
            const double h = fd_step(x[mu]);
            d.row(mu) = ((potential(x.shifted(mu, h)) - potential(x.shifted(mu, -h))) / (2.0 * h)).transpose();
        }
        return d;
    }

protected:
    virtual Vector compute_potential(const Event&) const {
        throw ConfigurationError(name() + ": field has no potential one-form");
    }
};

using FieldPtr = std::shared_ptr<const FieldModel>;

/// F = 0 with omega = 0.
class ZeroField final : public FieldModel {
public:
    explicit ZeroField(int n) : n_(n) {}
    int dimension() const override { return n_; }
    std::string name() const override { return "none"; }
    bool has_potential() const override { return true; }
    Matrix field(const Event&) const override { return Matrix::Zero(n_, n_); }
    Matrix potential_gradient(const Event&) const override { return Matrix::Zero(n_, n_); }

protected:
    Vector compute_potential(const Event&) const override { return Vector::Zero(n_); }

private:
    int n_;
};

/// Field with an affine potential omega_nu(x) = offset_nu + A_{mu nu} x^mu, hence
/// the constant two-form F = A - A^T.
class ConstantField final : public FieldModel {
public:
    ConstantField(std::string name, Matrix gradient, Vector offset)
        : name_(std::move(name)), gradient_(std::move(gradient)), offset_(std::move(offset)) {
        if (gradient_.rows() != gradient_.cols() || gradient_.rows() != offset_.size())
            throw ConfigurationError("constant field: inconsistent table sizes");
        if (!gradient_.allFinite() || !offset_.allFinite())
            throw ConfigurationError("constant field: non-finite coefficients");
        field_ = gradient_ - gradient_.transpose();
    }

    int dimension() const override { return static_cast<int>(offset_.size()); }
    std::string name() const override { return name_; }
    bool has_potential() const override { return true; }
    Matrix field(const Event&) const override { return field_; }
    Matrix potential_gradient(const Event&) const override { return gradient_; }

protected:
    Vector compute_potential(const Event& x) const override {
        return offset_ + gradient_.transpose() * x.coords();
    }

private:
    std::string name_;
    Matrix gradient_;
    Vector offset_;
    Matrix field_;
};

/// Coulomb test field of a point charge on the Schwarzschild chart:
/// omega = (e / r) dt, F_{tr} = e / r^2.
class CoulombField final : public FieldModel {
public:
    explicit CoulombField(double charge) : charge_(charge) {}
    int dimension() const override { return 4; }
    std::string name() const override { return "coulomb"; }
    bool has_potential() const override { return true; }

    Matrix field(const Event& x) const override {
        Matrix F = Matrix::Zero(4, 4);
        const double r = x[1];
        F(0, 1) = charge_ / (r * r);
        F(1, 0) = -F(0, 1);
        return F;
    }

    Matrix potential_gradient(const Event& x) const override {
        Matrix d = Matrix::Zero(4, 4);
        d(1, 0) = -charge_ / (x[1] * x[1]);
        return d;
    }

protected:
    Vector compute_potential(const Event& x) const override {
        Vector w = Vector::Zero(4);
        w[0] = charge_ / x[1];
        return w;
    }

private:
    double charge_;
};

/// Spatial two-form components in the order used by uniform_field:
/// n = 4: (B_x, B_y, B_z) -> F_{yz}, F_{zx}, F_{xy}; n = 3: (B_z) -> F_{xy}.
/// `offset` is the index of the first spatial coordinate (1 on spacetime
/// charts, 0 on a purely spatial chart).
inline void add_magnetic(Matrix& grad, const Vector& B, int offset) {
    const int spatial = static_cast<int>(grad.rows()) - offset;
    auto put = [&grad, offset](int i, int j, double value) {
        // omega_j += value * x^i, which gives F_{ij} = value.
        grad(offset + i, offset + j) += value;
    };
    if (spatial == 3) {
        if (B.size() != 3) throw ConfigurationError("magnetic field needs 3 components in 3 spatial dimensions");
        put(1, 2, B[0]);
        put(2, 0, B[1]);
        put(0, 1, B[2]);
    } else if (spatial == 2) {
        if (B.size() != 1) throw ConfigurationError("magnetic field needs 1 component in 2 spatial dimensions");
        put(0, 1, B[0]);
    } else if (B.size() != 0 && B.cwiseAbs().maxCoeff() > 0.0) {
        throw ConfigurationError("magnetic field not supported in this dimension");
    }
}

/// Uniform electric and magnetic fields on a Minkowski chart of dimension n.
/// Potentials: omega_t = -E.x for the electric part and omega = B x dy for B along z.
inline std::shared_ptr<ConstantField> uniform_field(int n, const Vector& E, const Vector& B) {
    if (n < 2) throw ConfigurationError("uniform field: dimension must be at least 2");
    if (E.size() != n - 1) throw ConfigurationError("uniform field: electric vector must have n-1 components");
    Matrix grad = Matrix::Zero(n, n);
    for (int i = 1; i < n; ++i) grad(i, 0) = -E[i - 1];
    add_magnetic(grad, B, 1);
    return std::make_shared<ConstantField>("uniform", grad, Vector::Zero(n));
}

/// Uniform magnetic field on a 2- or 3-dimensional Euclidean space chart.
inline std::shared_ptr<ConstantField> spatial_magnetic_field(int n, const Vector& B) {
    Matrix grad = Matrix::Zero(n, n);
    add_magnetic(grad, B, 0);
    return std::make_shared<ConstantField>("magnetic", grad, Vector::Zero(n));
}

/// Closed exact field given by a constant potential one-form (F = 0).
inline std::shared_ptr<ConstantField> constant_potential(const Vector& omega) {
    const auto n = omega.size();
    return std::make_shared<ConstantField>("potential", Matrix::Zero(n, n), omega);
}

/// Constant field table F_{mu nu}; potential gauge omega_nu = sum_{mu<nu} F_{mu nu} x^mu.
inline std::shared_ptr<ConstantField> field_from_table(const Matrix& F) {
    if (F.rows() != F.cols()) throw ConfigurationError("field table must be square");
    if ((F + F.transpose()).cwiseAbs().maxCoeff() > 1e-14)
        throw ConfigurationError("field table is not antisymmetric");
    Matrix grad = F.triangularView<Eigen::StrictlyUpper>();
    return std::make_shared<ConstantField>("table", grad, Vector::Zero(F.rows()));
}

// ---------------------------------------------------------------------------
// Pointwise operations

inline Matrix metric_at(const MetricModel& m, const Event& x) { return m.metric(x); }

inline Connection christoffel_at(const MetricModel& m, const Event& x) { return m.christoffel(x); }

/// F^mu_nu = g^{mu a} F_{a nu}
inline Matrix raise_field(const MetricModel& m, const FieldModel& f, const Event& x) {
    return m.inverse_metric(x) * f.field(x);
}

inline double inner(const Matrix& g, const Vector& u, const Vector& v) { return u.dot(g * v); }

enum class CausalType { Timelike, Null, Spacelike };
enum class TimeOrientation { FutureDirected, PastDirected, NotApplicable };

struct CausalClass {
    CausalType type;
    TimeOrientation orientation;

    bool future_causal() const {
        return type != CausalType::Spacelike && orientation == TimeOrientation::FutureDirected;
    }
    bool future_timelike() const {
        return type == CausalType::Timelike && orientation == TimeOrientation::FutureDirected;
    }
};

inline CausalClass causal_character(const MetricModel& m, const Event& x, const Vector& v,
                                    double tol_null = kNullTolerance) {
    const double q = inner(m.metric(x), v, v);
    CausalClass c{};
    if (q > tol_null)
        c.type = CausalType::Timelike;
    else if (q >= -tol_null)
        c.type = CausalType::Null;
    else
        c.type = CausalType::Spacelike;
    if (c.type == CausalType::Spacelike || v[0] == 0.0)
        c.orientation = TimeOrientation::NotApplicable;
    else
        c.orientation = v[0] > 0.0 ? TimeOrientation::FutureDirected : TimeOrientation::PastDirected;
    return c;
}

inline std::string to_string(CausalType t) {
    switch (t) {
        case CausalType::Timelike: return "timelike";
        case CausalType::Null: return "null";
        case CausalType::Spacelike: return "spacelike";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Model diagnostics

struct MetricCheck {
    double symmetry_defect = 0.0;       // max |g - g^T|
    double inverse_defect = 0.0;        // max |g^{-1} g - 1|
    double christoffel_fd_defect = 0.0; // max |Gamma - Gamma_fd|
    double christoffel_asymmetry = 0.0; // max |Gamma^mu_{ab} - Gamma^mu_{ba}|
    bool signature_ok = true;
};

inline bool has_expected_signature(const MetricModel& m, const Matrix& g) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
    const Vector ev = es.eigenvalues();
    const int n = m.dimension();
    int positive = 0, negative = 0;
    for (int i = 0; i < n; ++i) (ev[i] > 0.0 ? positive : negative) += (ev[i] != 0.0);
    if (m.signature() == Signature::Riemannian) return positive == n;
    return positive == 1 && negative == n - 1;
}

inline MetricCheck check_metric(const MetricModel& m, const Event& x) {
    MetricCheck c;
    const Matrix g = m.metric(x);
    const Matrix ginv = m.inverse_metric(x);
    const int n = m.dimension();
    c.symmetry_defect = (g - g.transpose()).cwiseAbs().maxCoeff();
    c.inverse_defect = (ginv * g - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    const Connection gamma = m.christoffel(x);
    c.christoffel_fd_defect = gamma.max_abs_difference(finite_difference_christoffel(m, x));
    for (int mu = 0; mu < n; ++mu)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                c.christoffel_asymmetry = std::max(c.christoffel_asymmetry, std::abs(gamma(mu, a, b) - gamma(mu, b, a)));
    c.signature_ok = has_expected_signature(m, g);
    return c;
}

/// (d omega)_{mu nu} = d_mu omega_nu - d_nu omega_mu by central differences of the potential.
inline Matrix exterior_derivative_fd(const FieldModel& f, const Event& x) {
    const int n = f.dimension();
    Matrix d(n, n);
    for (int mu = 0; mu < n; ++mu) {
        const double h = fd_step(x[mu]);
        d.row(mu) = ((f.potential(x.shifted(mu, h)) - f.potential(x.shifted(mu, -h))) / (2.0 * h)).transpose();
    }
    return d - d.transpose();
}

/// max over index triples of |d_l F_{mn} + d_m F_{nl} + d_n F_{lm}| by central differences.
inline double closedness_defect_fd(const FieldModel& f, const Event& x) {
    const int n = f.dimension();
    std::vector<Matrix> dF(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        const double h = fd_step(x[a]);
        dF[static_cast<std::size_t>(a)] = (f.field(x.shifted(a, h)) - f.field(x.shifted(a, -h))) / (2.0 * h);
    }
    double worst = 0.0;
    for (int l = 0; l < n; ++l)
        for (int m = l + 1; m < n; ++m)
            for (int k = m + 1; k < n; ++k) {
                const double s = dF[static_cast<std::size_t>(l)](m, k) + dF[static_cast<std::size_t>(m)](k, l) +
                                 dF[static_cast<std::size_t>(k)](l, m);
                worst = std::max(worst, std::abs(s));
            }
    return worst;
}

struct FieldCheck {
    double antisymmetry_defect = 0.0;
    double closedness_defect = 0.0;
    double potential_defect = 0.0; // max |d omega - F|, zero when no potential
};

inline FieldCheck check_field(const FieldModel& f, const Event& x) {
    FieldCheck c;
    const Matrix F = f.field(x);
    c.antisymmetry_defect = (F + F.transpose()).cwiseAbs().maxCoeff();
    c.closedness_defect = closedness_defect_fd(f, x);
    if (f.has_potential()) c.potential_defect = (exterior_derivative_fd(f, x) - F).cwiseAbs().maxCoeff();
    return c;
}

} // namespace emflow
