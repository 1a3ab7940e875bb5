#pragma once

#include <cmath>
#include <cstring>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "hjlab/errors.hpp"
#include "hjlab/hamiltonian.hpp"
#include "hjlab/vec.hpp"

namespace hjlab {

struct FindMinOptions {
    double tol = 1e-10;
    int max_sweeps = 200;
    int multistarts = 8;
};

struct MinimizeResult {
    Vec p0;
    double mu_min = 0.0;
};

namespace detail {

// Golden-section minimization of a unimodal restriction.
template <class F>
double golden_min(F&& f, double a, double b, double tol) {
    constexpr double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

// Minimizer of p -> H(p, v). Quasiconvexity makes every line through the
// minimizer unimodal; coordinate descent with multi-starts plus a
// direction polish is robust for the shipped families.
inline MinimizeResult find_min_value(const HamiltonianFamily& fam, double v, int dim,
                                     FindMinOptions opt = {}) {
    const double level0 = fam(fam.minimizer_hint(v), v) + 1.0;
    const double W = fam.sublevel_radius_bound(level0, v, v) + 1.0;
    const double scale = 1.0 + std::abs(level0);

    std::vector<Vec> starts{Vec{0.0, 0.0}, fam.minimizer_hint(v)};
    for (int k = 0; static_cast<int>(starts.size()) < opt.multistarts; ++k)
        starts.push_back(from_angle(2.0 * M_PI * k / 6.0) * (0.5 * W));

    MinimizeResult best{Vec{0.0, 0.0}, fam(Vec{0.0, 0.0}, v)};
    for (Vec p : starts) {
        if (dim == 1) p.y = 0.0;
        double fp = fam(p, v);
        bool converged = false;
        for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
            const double before = fp;
            for (int axis = 0; axis < dim; ++axis) {
                auto line = [&](double t) {
                    Vec q = p;
                    (axis == 0 ? q.x : q.y) = t;
                    return fam(q, v);
                };
                const double c = axis == 0 ? p.x : p.y;
                const double t = detail::golden_min(line, c - W, c + W, opt.tol);
                (axis == 0 ? p.x : p.y) = t;
            }
            fp = fam(p, v);
            if (before - fp < opt.tol * scale) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw SolverFailure("find_min: coordinate descent did not converge; best value " +
                                std::to_string(fp));
        if (fp < best.mu_min) best = {p, fp};
        else if (fp == best.mu_min && p.norm2() < best.p0.norm2()) best.p0 = p;
    }

    // Polish along a modest direction fan through the current minimizer.
    for (const Vec& e : direction_fan(dim, 8)) {
        auto line = [&](double t) { return fam(best.p0 + e * t, v); };
        const double t = detail::golden_min(line, -W, W, opt.tol);
        const Vec cand = best.p0 + e * t;
        const double fc = fam(cand, v);
        if (fc < best.mu_min) best = {cand, fc};
    }
    // Snap tiny coordinates; the families' minimizers sit on exact axes.
    auto snap = [&](double c) { return std::abs(c) < 1e2 * opt.tol ? 0.0 : c; };
    const Vec snapped{snap(best.p0.x - fam.minimizer_hint(v).x) + fam.minimizer_hint(v).x,
                      snap(best.p0.y - fam.minimizer_hint(v).y) + fam.minimizer_hint(v).y};
    if (fam(snapped, v) <= best.mu_min + opt.tol * scale) best.p0 = snapped;
    best.mu_min = fam(best.p0, v);
    return best;
}

inline MinimizeResult find_min(const HamiltonianFamily& fam, const Environment& env, Vec y,
                               FindMinOptions opt = {}) {
    return find_min_value(fam, env.field(y), env.dim(), opt);
}

// max{s >= 0 : H(p0 + s e, v) <= mu}, by bisection with doubling bracket.
// The coercivity witness caps the bracket.
inline double ray_radius_value(const HamiltonianFamily& fam, double v, double mu, Vec p0, Vec e,
                               double tol = 1e-9) {
    if (fam(p0, v) > mu)
        throw ConfigError("ray_radius: anchor outside sublevel set (mu below pointwise minimum?)");
    const double cap = fam.sublevel_radius_bound(mu, v, v) + p0.norm() + 2.0;
    double lo = 0.0, hi = 1.0;
    while (fam(p0 + e * hi, v) <= mu) {
        lo = hi;
        hi *= 2.0;
        if (hi > 4.0 * cap)
            throw SolverFailure("ray_radius: sublevel set unbounded; coercivity witness broken");
    }
    while (hi - lo > tol) {
        const double m = 0.5 * (lo + hi);
        (fam(p0 + e * m, v) <= mu ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

inline double ray_radius(const HamiltonianFamily& fam, const Environment& env, Vec y, double mu,
                         Vec p0, Vec e, double tol = 1e-9) {
    return ray_radius_value(fam, env.field(y), mu, p0, e, tol);
}

// Radial boundary model of one sublevel set {p : H(p, v) <= mu} of a fixed
// field value. Stores a fan of boundary radii around the minimizer; support
// queries sharpen the fan by a golden-section search on the boundary angle,
// which is valid because p -> p.q restricted to the boundary of a convex
// body is quasiconcave in the angular parameter.
class SublevelGeometry {
  public:
    SublevelGeometry(const HamiltonianFamily& fam, double v, double mu, int dim, int n_dirs = 64,
                     double radius_tol = 1e-9)
        : fam_(fam), value_(v), mu_(mu), dim_(dim), radius_tol_(radius_tol) {
        const MinimizeResult m = find_min_value(fam, v, dim);
        anchor_ = m.p0;
        mu_min_ = m.mu_min;
        if (mu < mu_min_)
            throw ConfigError("sublevel geometry: mu below the pointwise minimum of H");
        fan_ = direction_fan(dim, n_dirs);
        radii_.reserve(fan_.size());
        for (const Vec& e : fan_)
            radii_.push_back(ray_radius_value(fam, v, mu, anchor_, e, radius_tol));
    }

    double mu() const { return mu_; }
    double mu_min() const { return mu_min_; }
    double field_value() const { return value_; }
    Vec anchor() const { return reversed_ ? -anchor_ : anchor_; }
    const std::vector<Vec>& fan() const { return fan_; }
    const std::vector<double>& radii() const { return radii_; }
    bool reversed() const { return reversed_; }
    int fan_size() const { return static_cast<int>(fan_.size()); }

    Vec vertex(std::size_t k) const { return anchor_ + fan_[k] * radii_[k]; }

    // Reversed body {p : H(-p, v) <= mu} as an exact mirror view; support
    // queries delegate with a negated direction, so the reversal identity
    // holds bit for bit.
    SublevelGeometry reversed_geometry() const {
        SublevelGeometry g = *this;
        g.reversed_ = !g.reversed_;
        return g;
    }

    // Support function sigma(q) = max{p.q : H(p,v) <= mu}. Positively
    // homogeneous by construction: sigma(q) = |q| * sigma(q/|q|).
    double support(Vec q) const {
        const double n = q.norm();
        if (n == 0.0) return 0.0;
        return n * unit_support(q / n);
    }

    double unit_support(Vec qh) const {
        if (reversed_) qh = -qh;
        if (dim_ == 1) {
            const double a = (anchor_.x + radii_[0]) * qh.x;
            const double b = (anchor_.x - radii_[1]) * qh.x;
            return std::max(a, b);
        }
        std::size_t kbest = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < fan_.size(); ++k) {
            const double s = dot(vertex(k), qh);
            if (s > best) {
                best = s;
                kbest = k;
            }
        }
        // Sharpen between the neighbors of the best fan ray.
        const double step = 2.0 * M_PI / static_cast<double>(fan_.size());
        const double phi0 = step * static_cast<double>(kbest);
        auto fneg = [&](double phi) {
            const Vec e = from_angle(phi);
            const double r = ray_radius_value(fam_, value_, mu_, anchor_, e, radius_tol_);
            return -dot(anchor_ + e * r, qh);
        };
        const double phi = detail::golden_min(fneg, phi0 - step, phi0 + step, 1e-10);
        return std::max(best, -fneg(phi));
    }

  private:
    HamiltonianFamily fam_;
    double value_;
    double mu_;
    int dim_;
    double radius_tol_;
    Vec anchor_;
    double mu_min_ = 0.0;
    std::vector<Vec> fan_;
    std::vector<double> radii_;
    bool reversed_ = false;
};

// Shared, idempotent cache of geometries keyed by the field value's bit
// pattern. Values are pure functions of the key, so double construction
// under contention is harmless.
class GeometryCache {
  public:
    GeometryCache(HamiltonianFamily fam, double mu, int dim, int n_dirs = 64)
        : fam_(fam), mu_(mu), dim_(dim), n_dirs_(n_dirs) {}

    const SublevelGeometry& get(double value) {
        const std::uint64_t key = key_of(value);
        {
            std::lock_guard lock(mu_tex_);
            auto it = map_.find(key);
            if (it != map_.end()) return *it->second;
        }
        auto geom = std::make_shared<SublevelGeometry>(fam_, value, mu_, dim_, n_dirs_);
        std::lock_guard lock(mu_tex_);
        auto [it, _] = map_.emplace(key, std::move(geom));
        return *it->second;
    }

    double mu() const { return mu_; }
    std::size_t size() const {
        std::lock_guard lock(mu_tex_);
        return map_.size();
    }

  private:
    static std::uint64_t key_of(double v) {
        std::uint64_t k;
        std::memcpy(&k, &v, sizeof k);
        return k;
    }

    HamiltonianFamily fam_;
    double mu_;
    int dim_;
    int n_dirs_;
    mutable std::mutex mu_tex_;
    std::unordered_map<std::uint64_t, std::shared_ptr<SublevelGeometry>> map_;
};

}  // namespace hjlab
