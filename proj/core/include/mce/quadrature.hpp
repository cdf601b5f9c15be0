#pragma once

#include <array>
#include <vector>

#include "mce/geometry.hpp"

namespace mce {

struct QuadraturePoint {
    Vec2 point;     ///< reference coordinates (xi, eta)
    double weight;  ///< weights of a rule sum to 1/2, the reference triangle area
};

/// Symmetric rule with positive weights on the reference triangle (0,0), (1,0), (0,1),
/// exact for bivariate polynomials up to `degree`. Supported degrees: 1..6.
const std::vector<QuadraturePoint>& quadrature_rule(int degree);

/// Gauss-Legendre rule on [0, 1] with `points` nodes (1..5); weights sum to 1.
const std::vector<std::array<double, 2>>& gauss_legendre(int points);

/// Integral of f over triangle (a, b, c) using quadrature_rule(degree).
template <typename F>
auto integrate_triangle(const Vec2& a, const Vec2& b, const Vec2& c, int degree, F&& f)
    -> decltype(f(a)) {
    const double jac = 2.0 * std::abs(signed_area(a, b, c));
    decltype(f(a)) sum{};
    for (const auto& q : quadrature_rule(degree)) {
        const Vec2 x = a + q.point.x * (b - a) + q.point.y * (c - a);
        sum += (q.weight * jac) * f(x);
    }
    return sum;
}

/// Integral of f along the segment [a, b] with a `points`-node Gauss rule.
template <typename F>
auto integrate_segment(const Vec2& a, const Vec2& b, int points, F&& f) -> decltype(f(a)) {
    const double len = norm(b - a);
    decltype(f(a)) sum{};
    for (const auto& [s, w] : gauss_legendre(points)) sum += (w * len) * f(a + s * (b - a));
    return sum;
}

}  // namespace mce
