#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace arb::quad {

// 15-point Kronrod extension of the 7-point Gauss-Legendre rule (QUADPACK
// constants). Abscissae are on [-1, 1]; index 7 is the centre.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd Kronrod nodes (1, 3, 5, 7).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline constexpr std::size_t kPoints = 15;

struct Rule {
    std::array<double, kPoints> nodes;    // on [0, 1]
    std::array<double, kPoints> weights;  // sum to 1
};

// The GK15 rule mapped to the unit interval, nodes in increasing order.
inline constexpr Rule unit_rule() {
    Rule r{};
    for (std::size_t k = 0; k < 7; ++k) {
        r.nodes[k] = 0.5 * (1.0 - kKronrodNodes[k]);
        r.weights[k] = 0.5 * kKronrodWeights[k];
        r.nodes[14 - k] = 0.5 * (1.0 + kKronrodNodes[k]);
        r.weights[14 - k] = 0.5 * kKronrodWeights[k];
    }
    r.nodes[7] = 0.5;
    r.weights[7] = 0.5 * kKronrodWeights[7];
    return r;
}

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

// One G7-K15 panel on [a, b].
template <class F>
Estimate gk15(F&& f, double a, double b) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (std::size_t k = 0; k < 7; ++k) {
        const double dx = half * kKronrodNodes[k];
        const double s = f(centre - dx) + f(centre + dx);
        kronrod += kKronrodWeights[k] * s;
        if (k % 2 == 1) gauss += kGaussWeights[k / 2] * s;
    }
    return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

namespace detail {
template <class F>
double adaptive(F& f, double a, double b, Estimate whole, double abs_tol, int depth) {
    if (depth <= 0 || whole.error <= abs_tol) return whole.value;
    const double m = 0.5 * (a + b);
    const Estimate left = gk15(f, a, m);
    const Estimate right = gk15(f, m, b);
    return adaptive(f, a, m, left, 0.5 * abs_tol, depth - 1) +
           adaptive(f, m, b, right, 0.5 * abs_tol, depth - 1);
}
}  // namespace detail

// Recursive bisection until the Gauss/Kronrod difference falls below abs_tol.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double abs_tol, int max_depth = 30) {
    const Estimate whole = gk15(f, a, b);
    return detail::adaptive(f, a, b, whole, abs_tol, max_depth);
}

}  // namespace arb::quad
