#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "emflow/dynamics.hpp"
#include "emflow/worldline.hpp"
#include "support.hpp"

using namespace emflow;
using emflow::testing::Gen;

namespace {

Vector v4(double a, double b, double c, double d) {
    Vector v(4);
    v << a, b, c, d;
    return v;
}

Worldline rest_line(double speed, double span, int count, Parametrization p) {
    std::vector<WorldlineSample> s;
    for (int i = 0; i < count; ++i) {
        const double l = span * i / (count - 1);
        s.push_back({l, Event{speed * l, 0, 0, 0}, v4(speed, 0, 0, 0)});
    }
    return Worldline(std::move(s), p);
}

} // namespace

TEST(Worldline, RejectsNonIncreasingParameter) {
    std::vector<WorldlineSample> s{{0.0, Event{0, 0}, Vector::Ones(2)}, {0.0, Event{1, 1}, Vector::Ones(2)}};
    EXPECT_THROW(Worldline(s, Parametrization::generic()), ArgumentError);
}

TEST(Worldline, HermiteInterpolationIsExactForCubics) {
    // x(l) = l^3 - l, exact under cubic Hermite interpolation.
    std::vector<WorldlineSample> s;
    for (int i = 0; i <= 4; ++i) {
        const double l = 0.5 * i;
        Vector v(2);
        v << 1.0, 3 * l * l - 1;
        s.push_back({l, Event{l, l * l * l - l}, v});
    }
    Worldline w(std::move(s), Parametrization::generic());
    for (double l : {0.1, 0.77, 1.3, 1.99}) EXPECT_NEAR(w.position_at(l)[1], l * l * l - l, 1e-14);
}

TEST(Differentiate, FornbergWeightsReproducePolynomials) {
    Gen gen(3);
    std::vector<double> nodes;
    double l = 0;
    for (int i = 0; i < 9; ++i) {
        nodes.push_back(l);
        l += gen.uniform(0.05, 0.2);
    }
    std::vector<Vector> vals;
    for (double x : nodes) vals.push_back(Vector::Constant(1, x * x * x * x - 2 * x));
    const auto d = differentiate(nodes, vals, 7);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        EXPECT_NEAR(d[i][0], 4 * std::pow(nodes[i], 3) - 2, 1e-10);
}

TEST(Reparametrize, AffineSpeedTwoDoublesSpan) {
    Minkowski m(4);
    const Worldline w = rest_line(2.0, 1.0, 21, Parametrization::affine(2.0));
    const Worldline p = reparametrize_proper_time(m, w);
    EXPECT_EQ(p.parametrization().kind, ParamKind::ProperTime);
    EXPECT_NEAR(p.span(), 2.0, 1e-15);
    for (const auto& s : p.samples()) EXPECT_NEAR(inner(m.metric(s.x), s.v, s.v), 1.0, 1e-15);
}

TEST(Reparametrize, ProperTimeIsIdentity) {
    Minkowski m(4);
    const Worldline w = rest_line(1.0, 3.0, 31, Parametrization::proper_time());
    const Worldline p = reparametrize_proper_time(m, w);
    for (std::size_t i = 0; i < w.size(); ++i) {
        EXPECT_NEAR(p[i].lambda, w[i].lambda, 1e-15);
        EXPECT_LT((p[i].x.coords() - w[i].x.coords()).norm(), 1e-15);
    }
}

TEST(Reparametrize, GenericUsesArcLength) {
    Minkowski m(4);
    std::vector<WorldlineSample> s;
    for (int i = 0; i <= 100; ++i) {
        const double l = 0.01 * i;
        s.push_back({l, Event{3 * l * l, 0, 0, 0}, v4(6 * l + 1e-3, 0, 0, 0)});
    }
    s[0].v = v4(1e-3, 0, 0, 0);
    const Worldline p = reparametrize_proper_time(m, Worldline(std::move(s), Parametrization::generic()));
    EXPECT_NEAR(p.span(), 3.0, 1e-3);
}

TEST(Reparametrize, EfeRestSolutionBecomesProperTime) {
    Minkowski m(4);
    ZeroField f(4);
    const Worldline w = integrate(m, f, SystemSpec::efe(1.0), {Event{0, 0, 0, 0}, v4(2, 0, 0, 0)}, 0, 1, {});
    const Worldline p = reparametrize_proper_time(m, w);
    EXPECT_NEAR(p.span(), 2.0, 1e-12);
    for (const auto& s : p.samples()) EXPECT_NEAR(s.x[0], s.lambda, 1e-12);
}

TEST(Reparametrize, NullOrSpacelikeIsCausalityError) {
    Minkowski m(4);
    std::vector<WorldlineSample> s{{0, Event{0, 0, 0, 0}, v4(1, 1, 0, 0)}, {1, Event{1, 1, 0, 0}, v4(1, 1, 0, 0)}};
    EXPECT_THROW(reparametrize_proper_time(m, Worldline(s, Parametrization::generic())), CausalityError);
    s[0].v = s[1].v = v4(0, 1, 0, 0);
    EXPECT_THROW(reparametrize_proper_time(m, Worldline(s, Parametrization::generic())), CausalityError);
}

TEST(ScaleParameter, RoundTrip) {
    const Worldline w = rest_line(1.0, 1.0, 5, Parametrization::proper_time());
    const Worldline s = scale_parameter(scale_parameter(w, 3.0, Parametrization::generic()), 1.0 / 3.0,
                                        Parametrization::proper_time());
    for (std::size_t i = 0; i < w.size(); ++i) {
        EXPECT_NEAR(s[i].lambda, w[i].lambda, 1e-15);
        EXPECT_LT((s[i].v - w[i].v).norm(), 1e-15);
    }
    EXPECT_THROW(scale_parameter(w, -1.0, Parametrization::generic()), ArgumentError);
}
