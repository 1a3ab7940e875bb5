#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hjlab/errors.hpp"
#include "hjlab/rng.hpp"
#include "hjlab/vec.hpp"

namespace hjlab {

enum class FieldKind { Checkerboard, PoissonBumps, PeriodicPhase };

inline std::string to_string(FieldKind k) {
    switch (k) {
        case FieldKind::Checkerboard: return "CHECKERBOARD";
        case FieldKind::PoissonBumps: return "POISSON_BUMPS";
        case FieldKind::PeriodicPhase: return "PERIODIC_PHASE";
    }
    return "?";
}

struct EnvironmentSpec {
    FieldKind kind = FieldKind::Checkerboard;
    std::uint64_t seed = 0;
    int dim = 1;            // 1 or 2
    double cell = 1.0;      // cell size / period / bump tile scale
    double intensity = 1.0; // Poisson points per unit volume
    double bump_radius = 1.0;
    std::vector<double> values = {0.0, 1.0};  // checkerboard palette
    double v_min = 0.0;     // range for continuous generators
    double v_max = 1.0;

    EnvironmentSpec with_seed(std::uint64_t s) const {
        EnvironmentSpec c = *this;
        c.seed = s;
        return c;
    }
};

// One realization of a stationary ergodic scalar field V(y, omega).
// Evaluation is a pure function of (spec, extra_shift); stationarity comes
// from a uniform global offset drawn from the seed, so re-seeding
// re-randomizes the phase while `shifted` translates the same realization
// exactly.
class Environment {
  public:
    explicit Environment(EnvironmentSpec spec) : spec_(std::move(spec)) {
        if (spec_.dim != 1 && spec_.dim != 2)
            throw ConfigError("environment: dim must be 1 or 2");
        if (spec_.cell <= 0.0) throw ConfigError("environment: cell must be positive");
        switch (spec_.kind) {
            case FieldKind::Checkerboard: {
                if (spec_.values.empty())
                    throw ConfigError("environment: checkerboard needs a value palette");
                auto [lo, hi] = std::minmax_element(spec_.values.begin(), spec_.values.end());
                spec_.v_min = *lo;
                spec_.v_max = *hi;
                break;
            }
            case FieldKind::PoissonBumps:
                if (spec_.intensity <= 0.0 || spec_.bump_radius <= 0.0)
                    throw ConfigError("environment: poisson bumps need positive intensity and radius");
                [[fallthrough]];
            case FieldKind::PeriodicPhase:
                if (!(spec_.v_min <= spec_.v_max))
                    throw ConfigError("environment: invalid value range");
                break;
        }
        SplitMix rng(mix64(spec_.seed ^ 0xf1e2d3c4b5a69788ULL));
        const double period = tile_size();
        offset_.x = rng.uniform(0.0, period);
        offset_.y = spec_.dim == 2 ? rng.uniform(0.0, period) : 0.0;
    }

    const EnvironmentSpec& spec() const { return spec_; }
    int dim() const { return spec_.dim; }
    double v_min() const { return spec_.v_min; }
    double v_max() const { return spec_.v_max; }

    // For piecewise-constant fields, the palette; empty otherwise.
    std::vector<double> distinct_values() const {
        if (spec_.kind != FieldKind::Checkerboard) return {};
        std::vector<double> v = spec_.values;
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    }

    bool piecewise_constant() const { return spec_.kind == FieldKind::Checkerboard; }

    double field(Vec y) const {
        const Vec q = y + offset_ + shift_;
        switch (spec_.kind) {
            case FieldKind::Checkerboard: return checkerboard(q);
            case FieldKind::PoissonBumps: return bumps(q);
            case FieldKind::PeriodicPhase: return periodic(q);
        }
        return 0.0;
    }

    // Exact field translation: shifted(z).field(y) == field(y + z) bit for bit.
    Environment shifted(Vec z) const {
        Environment e = *this;
        e.shift_ = e.shift_ + z;
        return e;
    }

    // Cell boundaries of the piecewise-constant generator along the segment
    // a + t*(b-a), t in (0,1); used by edge-cost integration. Sorted.
    std::vector<double> cell_crossings(Vec a, Vec b) const {
        std::vector<double> ts;
        if (spec_.kind != FieldKind::Checkerboard) return ts;
        const Vec qa = a + offset_ + shift_;
        const Vec qb = b + offset_ + shift_;
        auto axis = [&](double pa, double pb) {
            if (pa == pb) return;
            const double lo = std::min(pa, pb), hi = std::max(pa, pb);
            const double c = spec_.cell;
            for (std::int64_t k = static_cast<std::int64_t>(std::ceil(lo / c)); k * c < hi; ++k) {
                const double t = (k * c - pa) / (pb - pa);
                if (t > 0.0 && t < 1.0) ts.push_back(t);
            }
        };
        axis(qa.x, qb.x);
        if (spec_.dim == 2) axis(qa.y, qb.y);
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
        return ts;
    }

  private:
    double tile_size() const {
        return spec_.kind == FieldKind::PoissonBumps ? spec_.bump_radius : spec_.cell;
    }

    double checkerboard(Vec q) const {
        const double c = spec_.cell;
        const auto ix = static_cast<std::int64_t>(std::floor(q.x / c));
        const auto iy = spec_.dim == 2 ? static_cast<std::int64_t>(std::floor(q.y / c)) : 0;
        const std::uint64_t h = hash3(mix64(spec_.seed), ix, iy);
        const std::size_t idx = static_cast<std::size_t>(h % spec_.values.size());
        return spec_.values[idx];
    }

    double periodic(Vec q) const {
        auto s = [&](double u) { return 0.5 * (1.0 + std::sin(2.0 * M_PI * u / spec_.cell)); };
        const double unitv = spec_.dim == 2 ? s(q.x) * s(q.y) : s(q.x);
        return spec_.v_min + (spec_.v_max - spec_.v_min) * unitv;
    }

    // Poisson cloud realized lazily per tile (tile size = bump radius), each
    // tile's points a pure function of (seed, tile index). The saturating
    // 1 - exp(-sum) map keeps V inside [v_min, v_max] and C^1.
    double bumps(Vec q) const {
        const double T = spec_.bump_radius;
        const double lambda = spec_.intensity * (spec_.dim == 2 ? T * T : T);
        const auto cx = static_cast<std::int64_t>(std::floor(q.x / T));
        const auto cy = spec_.dim == 2 ? static_cast<std::int64_t>(std::floor(q.y / T)) : 0;
        double sum = 0.0;
        const std::int64_t ry = spec_.dim == 2 ? 1 : 0;
        for (std::int64_t jy = cy - ry; jy <= cy + ry; ++jy) {
            for (std::int64_t jx = cx - 1; jx <= cx + 1; ++jx) {
                SplitMix rng(hash3(mix64(spec_.seed ^ 0x9d2c5680u), jx, jy));
                const int n = rng.poisson(lambda);
                for (int i = 0; i < n; ++i) {
                    Vec pt{(jx + rng.uniform()) * T, 0.0};
                    if (spec_.dim == 2) pt.y = (jy + rng.uniform()) * T;
                    const double r2 = (q - pt).norm2() / (T * T);
                    if (r2 < 1.0) {
                        const double u = 1.0 - r2;
                        sum += u * u * u;
                    }
                }
            }
        }
        return spec_.v_min + (spec_.v_max - spec_.v_min) * (1.0 - std::exp(-sum));
    }

    EnvironmentSpec spec_;
    Vec offset_;        // uniform phase from the seed
    Vec shift_ = {0.0, 0.0};  // exact translation applied on top
};

}  // namespace hjlab
