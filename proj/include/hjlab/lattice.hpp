#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "hjlab/errors.hpp"
#include "hjlab/vec.hpp"

namespace hjlab {

// Regular grid of spacing h. Node id = ix + nx * iy; the physical origin
// sits at node index (ox, oy).
struct Lattice {
    double h = 1.0;
    int dim = 1;
    std::array<int, 2> n = {1, 1};
    std::array<int, 2> origin = {0, 0};

    std::size_t size() const { return static_cast<std::size_t>(n[0]) * n[1]; }
    int nx() const { return n[0]; }
    int ny() const { return n[1]; }

    Vec pos(int ix, int iy) const { return {(ix - origin[0]) * h, (iy - origin[1]) * h}; }
    Vec pos(std::size_t id) const {
        return pos(static_cast<int>(id % n[0]), static_cast<int>(id / n[0]));
    }
    std::size_t id(int ix, int iy) const {
        return static_cast<std::size_t>(ix) + static_cast<std::size_t>(n[0]) * iy;
    }
    bool contains(int ix, int iy) const { return ix >= 0 && ix < n[0] && iy >= 0 && iy < n[1]; }

    // Node nearest to a physical point; throws if it falls outside.
    std::size_t nearest(Vec p) const {
        const int ix = origin[0] + static_cast<int>(std::lround(p.x / h));
        const int iy = dim == 2 ? origin[1] + static_cast<int>(std::lround(p.y / h)) : 0;
        if (!contains(ix, iy)) throw ConfigError("lattice: point outside the domain");
        return id(ix, iy);
    }

    std::size_t center() const { return id(origin[0], origin[1]); }

    // Box centered at the origin with the given physical half-widths.
    static Lattice centered(double h, int dim, double half_x, double half_y = 0.0) {
        Lattice lat;
        lat.h = h;
        lat.dim = dim;
        const int mx = static_cast<int>(std::ceil(half_x / h));
        lat.n[0] = 2 * mx + 1;
        lat.origin[0] = mx;
        if (dim == 2) {
            const int my = static_cast<int>(std::ceil(half_y / h));
            lat.n[1] = 2 * my + 1;
            lat.origin[1] = my;
        }
        return lat;
    }
};

// Move set: all integer offsets with coprime components and Chebyshev norm
// <= rho, symmetric under negation. The anisotropy certificate bounds the
// worst-case ratio of the induced graph metric to the Euclidean one for a
// unit-ball cost.
struct Stencil {
    int rho = 2;
    std::vector<std::array<int, 2>> offsets;
    std::vector<double> lengths;       // Euclidean |v|
    std::vector<Vec> dirs;             // v / |v|
    std::vector<std::size_t> negated;  // index of -v
    double max_angular_gap = 0.0;
    double anisotropy_factor = 1.0;    // sec(max gap / 2)

    static Stencil make(int dim, int rho) {
        if (rho < 1 || rho > 3) throw ConfigError("stencil: rho must be 1, 2, or 3");
        Stencil s;
        s.rho = rho;
        if (dim == 1) {
            s.offsets = {{1, 0}, {-1, 0}};
        } else {
            for (int a = -rho; a <= rho; ++a)
                for (int b = -rho; b <= rho; ++b) {
                    if (a == 0 && b == 0) continue;
                    if (std::gcd(std::abs(a), std::abs(b)) != 1) continue;
                    s.offsets.push_back({a, b});
                }
        }
        for (auto [a, b] : s.offsets) {
            const double len = std::sqrt(static_cast<double>(a) * a + static_cast<double>(b) * b);
            s.lengths.push_back(len);
            s.dirs.push_back(Vec{a / len, b / len});
        }
        s.negated.resize(s.offsets.size());
        for (std::size_t i = 0; i < s.offsets.size(); ++i)
            for (std::size_t j = 0; j < s.offsets.size(); ++j)
                if (s.offsets[j][0] == -s.offsets[i][0] && s.offsets[j][1] == -s.offsets[i][1])
                    s.negated[i] = j;
        if (dim == 2) {
            std::vector<double> angles;
            for (const Vec& d : s.dirs) angles.push_back(std::atan2(d.y, d.x));
            std::sort(angles.begin(), angles.end());
            double gap = angles.front() + 2.0 * M_PI - angles.back();
            for (std::size_t i = 1; i < angles.size(); ++i)
                gap = std::max(gap, angles[i] - angles[i - 1]);
            s.max_angular_gap = gap;
            s.anisotropy_factor = 1.0 / std::cos(0.5 * gap);
        }
        return s;
    }
};

}  // namespace hjlab
