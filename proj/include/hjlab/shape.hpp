#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hjlab/environment.hpp"
#include "hjlab/errors.hpp"
#include "hjlab/hamiltonian.hpp"
#include "hjlab/metric.hpp"
#include "hjlab/parallel.hpp"
#include "hjlab/stats.hpp"

namespace hjlab {

struct ShapeOptions {
    double h = 1.0;
    int rho = 2;
    int fan_size = 16;      // 2-D estimation fan; 1-D always uses {+1,-1}
    int n_dirs = 64;        // geometry fan behind the edge costs
    double base_t = 64.0;   // first rung, in units of h
    int ladder_steps = 4;   // rungs double: base_t * {1, 2, 4, ...}
    int realizations = 32;
    double margin = 1.5;    // domain half-width = margin * aniso * t_max
    int workers = 1;

    double t_max() const { return base_t * std::ldexp(1.0, ladder_steps - 1); }
};

// Monte-Carlo/scale-ladder estimate of the limit shape of the metric field:
// per direction, the normalized distances t^{-1} m_mu(t e, 0, omega_i) along
// a doubling ladder, over an ensemble of realizations. The estimate for a
// direction is the largest-t mean; subadditivity + stationarity make the
// ladder means nonincreasing in expectation (the Fekete diagnostic), so the
// estimate is an upper bound up to noise.
struct ShapeEstimate {
    double mu = 0.0;
    MetricDirection direction = MetricDirection::Forward;
    std::vector<Vec> fan;                    // requested unit directions
    std::vector<Vec> snapped_dirs;           // realized directions after node snapping
    std::vector<double> ladder_t;            // realized |target| per rung (direction 0 scale)
    std::vector<std::vector<MeanStderr>> stats;            // [dir][rung]
    std::vector<std::vector<std::vector<double>>> samples;  // [dir][rung][realization]
    double fekete_worst_z = 0.0;             // worst (mean_{j+1}-mean_j)/se_comb
    bool fekete_pass_2sigma = true;

    std::size_t last_rung() const { return stats.empty() ? 0 : stats.front().size() - 1; }
    double value(std::size_t dir) const { return stats[dir][last_rung()].mean; }
    double ci(std::size_t dir) const { return ci_halfwidth(stats[dir][last_rung()]); }

    std::size_t negated_dir(std::size_t k) const {
        for (std::size_t j = 0; j < fan.size(); ++j)
            if ((fan[j] + fan[k]).norm() < 1e-12) return j;
        throw ConfigError("shape fan is not closed under negation");
    }
};

inline std::uint64_t realization_seed(std::uint64_t base, int i) {
    return hash_combine(base, 0xecc0ULL + static_cast<std::uint64_t>(i));
}

inline ShapeEstimate estimate_shape(const HamiltonianFamily& fam, const EnvironmentSpec& env_spec,
                                    double mu, const ShapeOptions& opt,
                                    MetricDirection direction = MetricDirection::Forward) {
    const int dim = env_spec.dim;
    ShapeEstimate est;
    est.mu = mu;
    est.direction = direction;
    est.fan = direction_fan(dim, opt.fan_size);

    const Stencil stencil = Stencil::make(dim, opt.rho);
    const double t_max = opt.t_max() * opt.h;
    const double half = opt.margin * stencil.anisotropy_factor * t_max + 2.0 * opt.h;
    const Lattice lat = Lattice::centered(opt.h, dim, half, half);

    // Snap the base rung to a node and double it exactly; doubling targets
    // keeps the Fekete comparison aligned with the subadditive inequality.
    struct Target {
        int ix, iy;
        double dist;
    };
    std::vector<std::vector<Target>> targets(est.fan.size());
    est.snapped_dirs.resize(est.fan.size());
    for (std::size_t k = 0; k < est.fan.size(); ++k) {
        const Vec e = est.fan[k];
        int bx = static_cast<int>(std::lround(opt.base_t * e.x));
        int by = dim == 2 ? static_cast<int>(std::lround(opt.base_t * e.y)) : 0;
        if (bx == 0 && by == 0) throw ConfigError("shape ladder base too small for the lattice");
        for (int j = 0; j < opt.ladder_steps; ++j) {
            const int f = 1 << j;
            const Vec ppos{bx * f * opt.h, by * f * opt.h};
            targets[k].push_back({bx * f, by * f, ppos.norm()});
        }
        est.snapped_dirs[k] = unit(Vec{static_cast<double>(bx), static_cast<double>(by)});
    }
    est.ladder_t.clear();
    for (const auto& tg : targets[0]) est.ladder_t.push_back(tg.dist);

    // One shortest-path solve per realization covers every direction & rung.
    std::vector<std::vector<std::vector<double>>> per_real(
        static_cast<std::size_t>(opt.realizations));
    parallel_for(static_cast<std::size_t>(opt.realizations), opt.workers, [&](std::size_t i) {
        const Environment env(env_spec.with_seed(realization_seed(env_spec.seed, static_cast<int>(i))));
        MetricCostModel model(fam, env, mu, stencil, opt.n_dirs);
        const MetricField field = solve_metric(lat, model, lat.center(), direction);
        auto& mine = per_real[i];
        mine.resize(est.fan.size());
        for (std::size_t k = 0; k < est.fan.size(); ++k) {
            mine[k].reserve(targets[k].size());
            for (const Target& tg : targets[k]) {
                const std::size_t node = lat.id(lat.origin[0] + tg.ix, lat.origin[1] + tg.iy);
                mine[k].push_back(field.values[node] / tg.dist);
            }
        }
    });

    est.stats.resize(est.fan.size());
    est.samples.resize(est.fan.size());
    for (std::size_t k = 0; k < est.fan.size(); ++k) {
        est.stats[k].resize(targets[k].size());
        est.samples[k].resize(targets[k].size());
        for (std::size_t j = 0; j < targets[k].size(); ++j) {
            auto& col = est.samples[k][j];
            col.resize(per_real.size());
            for (std::size_t i = 0; i < per_real.size(); ++i) col[i] = per_real[i][k][j];
            est.stats[k][j] = mean_stderr(col);
        }
    }

    // Fekete diagnostic: normalized means nonincreasing within noise.
    for (std::size_t k = 0; k < est.stats.size(); ++k) {
        for (std::size_t j = 0; j + 1 < est.stats[k].size(); ++j) {
            const auto& a = est.stats[k][j];
            const auto& b = est.stats[k][j + 1];
            const double se = std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
            const double diff = b.mean - a.mean;
            const double z = se > 0.0 ? diff / se : (diff > 1e-12 * (1.0 + a.mean) ? 4.0 : 0.0);
            est.fekete_worst_z = std::max(est.fekete_worst_z, z);
        }
    }
    est.fekete_pass_2sigma = est.fekete_worst_z <= 2.0;
    if (est.fekete_worst_z > 3.0)
        throw InconsistencyError("shape ladder violates subadditive monotonicity beyond 3 sigma");
    return est;
}

struct ReversalReport {
    bool pass = true;
    double worst_gap = 0.0;
    std::size_t worst_dir = 0;
};

// Limit-shape reversal identity: the reversed shape at e equals the forward
// shape at -e, within combined confidence intervals.
inline ReversalReport check_reversal_identity(const ShapeEstimate& fwd, const ShapeEstimate& rev) {
    if (fwd.fan.size() != rev.fan.size() || fwd.mu != rev.mu)
        throw ConfigError("check_reversal_identity: estimates not comparable");
    ReversalReport rep;
    for (std::size_t k = 0; k < rev.fan.size(); ++k) {
        const std::size_t kneg = fwd.negated_dir(k);
        const double gap = std::abs(rev.value(k) - fwd.value(kneg));
        const double allow = rev.ci(k) + fwd.ci(kneg) + 1e-9 * (1.0 + std::abs(rev.value(k)));
        if (gap - allow > rep.worst_gap) {
            rep.worst_gap = gap - allow;
            rep.worst_dir = k;
        }
        if (gap > allow) rep.pass = false;
    }
    return rep;
}

struct SublinearityProfile {
    std::vector<double> radii;
    std::vector<double> sup_over_r;  // sup_{|y| in annulus at R} |w(y)| / R
    double decay_ratio = 0.0;        // first / last (> 1 means decay)
};

// Growth profile of a lattice function; used to witness strict sublinearity
// of correctors and corrector proxies.
inline SublinearityProfile sublinearity_check(const Lattice& lat, std::span<const double> w,
                                              std::span<const double> radii) {
    SublinearityProfile prof;
    for (double R : radii) {
        double sup = 0.0;
        bool seen = false;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double r = lat.pos(i).norm();
            if (r > R - lat.h && r <= R + 1e-12) {
                sup = std::max(sup, std::abs(w[i]) / R);
                seen = true;
            }
        }
        if (!seen) throw ConfigError("sublinearity_check: radius outside the domain");
        prof.radii.push_back(R);
        prof.sup_over_r.push_back(sup);
    }
    if (prof.sup_over_r.size() >= 2 && prof.sup_over_r.back() > 0.0)
        prof.decay_ratio = prof.sup_over_r.front() / prof.sup_over_r.back();
    return prof;
}

}  // namespace hjlab
