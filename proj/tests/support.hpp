#pragma once

#include <random>

#include "emflow/geometry.hpp"

namespace emflow::testing {

// Small hand-rolled generators for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

    Vector vector(int n, double lo, double hi) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
        return v;
    }

    Event event(int n, double lo, double hi) { return Event(vector(n, lo, hi)); }

    // Schwarzschild chart point with r in (r_lo, r_hi).
    Event schwarzschild_event(double r_lo, double r_hi) {
        return Event{uniform(-5, 5), uniform(r_lo, r_hi), uniform(0.2, 2.9), uniform(0, 6.2)};
    }

    // Future timelike unit vector in Minkowski with rapidity below `max_rapidity`.
    Vector unit_timelike(int n, double max_rapidity) {
        Vector dir = vector(n - 1, -1, 1);
        if (dir.norm() == 0.0) dir[0] = 1.0;
        dir.normalize();
        const double eta = uniform(0, max_rapidity);
        Vector u(n);
        u[0] = std::cosh(eta);
        u.tail(n - 1) = std::sinh(eta) * dir;
        return u;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

} // namespace emflow::testing
