#pragma once

#include <array>
#include <cmath>
#include <functional>

namespace mce {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
    friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
/// Counterclockwise rotation by 90 degrees.
constexpr Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

/// Row-major 2x2 matrix. For a velocity gradient, m[i][j] = d u_i / d x_j.
struct Mat2 {
    std::array<std::array<double, 2>, 2> m{};

    constexpr double operator()(int i, int j) const { return m[i][j]; }
    constexpr double& operator()(int i, int j) { return m[i][j]; }
    constexpr double trace() const { return m[0][0] + m[1][1]; }
    constexpr Mat2 transposed() const { return {{{{m[0][0], m[1][0]}, {m[0][1], m[1][1]}}}}; }
    constexpr Mat2 sym() const {
        const double off = 0.5 * (m[0][1] + m[1][0]);
        return {{{{m[0][0], off}, {off, m[1][1]}}}};
    }
    constexpr Vec2 apply(const Vec2& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y};
    }

    constexpr Mat2& operator+=(const Mat2& o) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) m[i][j] += o.m[i][j];
        return *this;
    }
    constexpr Mat2& operator-=(const Mat2& o) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) m[i][j] -= o.m[i][j];
        return *this;
    }
    constexpr Mat2& operator*=(double s) {
        for (auto& row : m)
            for (auto& v : row) v *= s;
        return *this;
    }
    friend constexpr Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
    friend constexpr Mat2 operator-(Mat2 a, const Mat2& b) { return a -= b; }
    friend constexpr Mat2 operator*(double s, Mat2 a) { return a *= s; }
};

/// Frobenius product A : B.
constexpr double ddot(const Mat2& a, const Mat2& b) {
    return a(0, 0) * b(0, 0) + a(0, 1) * b(0, 1) + a(1, 0) * b(1, 0) + a(1, 1) * b(1, 1);
}

/// Outer product a ⊗ b.
constexpr Mat2 outer(const Vec2& a, const Vec2& b) {
    return {{{{a.x * b.x, a.x * b.y}, {a.y * b.x, a.y * b.y}}}};
}

/// Signed area, positive for counterclockwise (a, b, c).
constexpr double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * cross(b - a, c - a);
}

inline Vec2 centroid(const Vec2& a, const Vec2& b, const Vec2& c) {
    return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

/// Barycentric coordinates of p with respect to triangle (a, b, c).
std::array<double, 3> barycentric(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p);

using ScalarFn = std::function<double(const Vec2&)>;
using VectorFn = std::function<Vec2(const Vec2&)>;
using TensorFn = std::function<Mat2(const Vec2&)>;

}  // namespace mce
