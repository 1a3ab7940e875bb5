#pragma once

#include <cmath>
#include <vector>

namespace hjlab {

// Planar vector; 1-D problems keep y == 0 throughout.
struct Vec {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec() = default;
    constexpr Vec(double x_, double y_ = 0.0) : x(x_), y(y_) {}

    constexpr Vec operator+(Vec o) const { return {x + o.x, y + o.y}; }
    constexpr Vec operator-(Vec o) const { return {x - o.x, y - o.y}; }
    constexpr Vec operator-() const { return {-x, -y}; }
    constexpr Vec operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec operator/(double s) const { return {x / s, y / s}; }
    constexpr bool operator==(const Vec&) const = default;

    double norm() const { return std::hypot(x, y); }
    constexpr double norm2() const { return x * x + y * y; }
};

constexpr Vec operator*(double s, Vec v) { return v * s; }
constexpr double dot(Vec a, Vec b) { return a.x * b.x + a.y * b.y; }

inline Vec unit(Vec v) {
    const double n = v.norm();
    return {v.x / n, v.y / n};
}

inline Vec from_angle(double phi) { return {std::cos(phi), std::sin(phi)}; }
inline double angle_of(Vec v) { return std::atan2(v.y, v.x); }

// Uniform unit-direction fan. dim 1: {+1, -1}; dim 2: n equally spaced angles
// starting from e1. Even n is closed under negation.
inline std::vector<Vec> direction_fan(int dim, int n) {
    std::vector<Vec> fan;
    if (dim == 1) {
        fan = {Vec{1.0}, Vec{-1.0}};
    } else {
        fan.reserve(static_cast<std::size_t>(n));
        const double step = 2.0 * M_PI / n;
        for (int k = 0; k < n; ++k) fan.push_back(from_angle(k * step));
    }
    return fan;
}

}  // namespace hjlab
