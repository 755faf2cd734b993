#pragma once

// Seeded fixture generators shared by the test suites. ITERFIX_SEED
// overrides the default seed so failures are reproducible.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "iterfix/gridfn.hpp"

namespace testsupport {

inline std::uint64_t seed_from_env(std::uint64_t fallback = 42) {
    if (const char* s = std::getenv("ITERFIX_SEED"))
        return std::strtoull(s, nullptr, 10);
    return fallback;
}

inline constexpr double kPi = 3.14159265358979323846;

// Random C^1 self-map of I fixing both endpoints:
//   f(x) = x + sum_m c_m (L / (m pi)) sin(m pi (x - a) / L)
// with f' = 1 + sum_m c_m cos(...) and |f''| <= sum_m |c_m| m pi / L, so the
// generator controls the derivative band and the derivative Lipschitz
// modulus exactly.
struct SmoothSelfMap {
    iterfix::Interval I;
    std::array<double, 3> c{};

    double value(double x) const {
        double L = I.length();
        double v = x;
        for (int m = 1; m <= 3; ++m)
            v += c[static_cast<std::size_t>(m - 1)] * (L / (m * kPi)) *
                 std::sin(m * kPi * (x - I.a) / L);
        return v;
    }

    double deriv(double x) const {
        double L = I.length();
        double d = 1.0;
        for (int m = 1; m <= 3; ++m)
            d += c[static_cast<std::size_t>(m - 1)] *
                 std::cos(m * kPi * (x - I.a) / L);
        return d;
    }

    double second(double x) const {
        double L = I.length();
        double s = 0.0;
        for (int m = 1; m <= 3; ++m)
            s -= c[static_cast<std::size_t>(m - 1)] * (m * kPi / L) *
                 std::sin(m * kPi * (x - I.a) / L);
        return s;
    }

    double coeff_budget() const {
        return std::abs(c[0]) + std::abs(c[1]) + std::abs(c[2]);
    }

    double lipschitz_budget() const {
        double L = I.length();
        return (std::abs(c[0]) + 2 * std::abs(c[1]) + 3 * std::abs(c[2])) *
               kPi / L;
    }

    iterfix::GridFunction to_grid(int n) const {
        std::vector<double> nodes(static_cast<std::size_t>(n));
        double h = I.length() / (n - 1);
        for (int i = 0; i < n; ++i)
            nodes[static_cast<std::size_t>(i)] = I.a + i * h;
        nodes.back() = I.b;
        std::vector<double> values(nodes.size()), derivs(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            values[i] = value(nodes[i]);
            derivs[i] = deriv(nodes[i]);
        }
        values.front() = I.a;
        values.back() = I.b;
        return iterfix::GridFunction(I, std::move(nodes), std::move(values),
                                     std::move(derivs));
    }
};

class FixtureGen {
public:
    // rho bounds |f' - 1|, lip bounds |f''|.
    FixtureGen(iterfix::Interval I, double rho, double lip,
               std::uint64_t seed)
        : I_(I), rho_(rho), lip_(lip), rng_(seed) {}

    SmoothSelfMap next() {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::uniform_real_distribution<double> frac(0.3, 1.0);
        std::array<double, 3> raw{u(rng_), u(rng_), u(rng_)};
        double sum = std::abs(raw[0]) + std::abs(raw[1]) + std::abs(raw[2]);
        double wsum = (std::abs(raw[0]) + 2 * std::abs(raw[1]) +
                       3 * std::abs(raw[2])) *
                      kPi / I_.length();
        double t = frac(rng_) * std::min(rho_ / sum, lip_ / wsum);
        SmoothSelfMap f{I_, {t * raw[0], t * raw[1], t * raw[2]}};
        return f;
    }

    // Class parameters every generated map satisfies.
    double band_radius() const { return rho_; }
    double lipschitz() const { return lip_; }

private:
    iterfix::Interval I_;
    double rho_;
    double lip_;
    std::mt19937_64 rng_;
};

// Nested analytic iterate f^k(x) and its derivative (chain rule product).
inline double nest_value(const SmoothSelfMap& f, int k, double x) {
    double v = x;
    for (int j = 0; j < k; ++j) v = f.value(v);
    return v;
}

inline double nest_deriv(const SmoothSelfMap& f, int k, double x) {
    double v = x;
    double d = 1.0;
    for (int j = 0; j < k; ++j) {
        d *= f.deriv(v);
        v = f.value(v);
    }
    return d;
}

// Plain bisection inverse, independent of the library's Newton path.
inline double oracle_invert(const std::function<double(double)>& f, double lo,
                            double hi, double y) {
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) < y)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Central finite difference, the oracle for derivative values.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline std::vector<double> uniform_points(iterfix::Interval I, int n) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        xs[static_cast<std::size_t>(i)] = I.a + I.length() * i / (n - 1);
    xs.back() = I.b;
    return xs;
}

} // namespace testsupport
