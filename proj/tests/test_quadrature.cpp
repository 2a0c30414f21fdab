#include <cmath>
#include <numbers>

#include "arb/quadrature.hpp"
#include "doctest.h"

namespace quad = arb::quad;

TEST_CASE("a single GK15 panel integrates polynomials up to degree 22 exactly") {
    for (int k = 0; k <= 22; ++k) {
        const auto f = [k](double x) { return std::pow(x, k); };
        const double exact = (std::pow(2.0, k + 1) - std::pow(-1.0, k + 1)) / (k + 1);
        CHECK(quad::gk15(f, -1.0, 2.0).value == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("unit rule weights sum to one and nodes increase") {
    constexpr auto rule = quad::unit_rule();
    double sum = 0.0;
    for (std::size_t k = 0; k < quad::kPoints; ++k) {
        sum += rule.weights[k];
        if (k > 0) CHECK(rule.nodes[k] > rule.nodes[k - 1]);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rule.nodes[7] == 0.5);
}

TEST_CASE("the error estimate is small for smooth integrands") {
    const auto e = quad::gk15([](double x) { return std::exp(x); }, 0.0, 1.0);
    CHECK(e.value == doctest::Approx(std::numbers::e - 1.0).epsilon(1e-14));
    CHECK(e.error < 1e-10);
}

TEST_CASE("adaptive bisection handles a kink and a narrow peak") {
    const double kink = quad::integrate_adaptive([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, 1e-12);
    CHECK(kink == doctest::Approx(0.5 * 0.09 + 0.5 * 0.49).epsilon(1e-10));

    const double s = 1e-3;
    const auto peak = [s](double x) { return std::exp(-0.5 * x * x / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi)); };
    CHECK(quad::integrate_adaptive(peak, -1.0, 1.0, 1e-12) == doctest::Approx(1.0).epsilon(1e-9));
}
