#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hjlab/environment.hpp"
#include "hjlab/errors.hpp"
#include "hjlab/rng.hpp"
#include "hjlab/vec.hpp"

namespace hjlab {

enum class FamilyKind { Eikonal, Power, Drift, Aniso };

inline std::string to_string(FamilyKind k) {
    switch (k) {
        case FamilyKind::Eikonal: return "EIKONAL";
        case FamilyKind::Power: return "POWER";
        case FamilyKind::Drift: return "DRIFT";
        case FamilyKind::Aniso: return "ANISO";
    }
    return "?";
}

// The Hamiltonian families. Each is level-set convex and coercive in p and
// touches the environment only through the scalar field value:
//   EIKONAL  H = c(y) |p|               (field is the speed c, must be > 0)
//   POWER    H = |p|^gamma - V(y)
//   DRIFT    H = |p - b| - V(y),  b = drift * e1
//   ANISO    H = max(|p.e1|, kappa |p.e2|) - V(y)   (2-D only)
struct HamiltonianFamily {
    FamilyKind kind = FamilyKind::Power;
    double gamma = 1.0;
    double kappa = 1.0;
    double drift = 0.0;

    Vec drift_vec() const { return {drift, 0.0}; }

    // H(p, v) where v is the field value at the query point.
    double operator()(Vec p, double v) const {
        switch (kind) {
            case FamilyKind::Eikonal: return v * p.norm();
            case FamilyKind::Power: return std::pow(p.norm(), gamma) - v;
            case FamilyKind::Drift: return (p - drift_vec()).norm() - v;
            case FamilyKind::Aniso: return std::max(std::abs(p.x), kappa * std::abs(p.y)) - v;
        }
        return 0.0;
    }

    // min over p of H(p, v); attained at p = 0 (or the drift vector).
    double min_over_p(double v) const {
        return kind == FamilyKind::Eikonal ? 0.0 : -v;
    }

    Vec minimizer_hint(double /*v*/) const {
        return kind == FamilyKind::Drift ? drift_vec() : Vec{0.0, 0.0};
    }

    bool even_in_p() const { return kind != FamilyKind::Drift || drift == 0.0; }

    // Coercivity witness: |p| > sublevel_radius_bound(mu) implies H > mu for
    // every field value in [v_min, v_max].
    double sublevel_radius_bound(double mu, double v_min, double v_max) const {
        switch (kind) {
            case FamilyKind::Eikonal: return std::max(0.0, mu) / v_min;
            case FamilyKind::Power: return std::pow(std::max(0.0, mu + v_max), 1.0 / gamma);
            case FamilyKind::Drift: return std::max(0.0, mu + std::abs(drift) + v_max);
            case FamilyKind::Aniso:
                return std::sqrt(2.0) * std::max(0.0, mu + v_max) / std::min(1.0, kappa);
        }
        return 0.0;
    }

    // Modulus of continuity in p on the ball of radius R, uniform in the field.
    double p_modulus(double dist, double R, double v_max) const {
        switch (kind) {
            case FamilyKind::Eikonal: return v_max * dist;
            case FamilyKind::Power:
                if (gamma <= 1.0) return std::pow(dist, gamma);
                return gamma * std::pow(R + dist, gamma - 1.0) * dist;
            case FamilyKind::Drift: return dist;
            case FamilyKind::Aniso: return std::max(1.0, kappa) * dist;
        }
        return dist;
    }

    bool lambda_is_midpoint() const {
        return kind != FamilyKind::Power || gamma == 1.0;
    }
};

// Level-set convexity modulus: H((p+q)/2, y) <= Lambda(H(p,y), H(q,y)).
// Convex families use the midpoint; POWER with gamma != 1 uses the exact
// per-value formula, maximized over the field values the environment can
// attain (only values compatible with the arguments contribute).
class LambdaModulus {
  public:
    LambdaModulus(const HamiltonianFamily& fam, const Environment& env) : fam_(fam) {
        if (!fam_.lambda_is_midpoint()) {
            values_ = env.distinct_values();
            if (values_.empty()) {
                const int n = 64;
                for (int i = 0; i <= n; ++i)
                    values_.push_back(env.v_min() + (env.v_max() - env.v_min()) * i / n);
            }
        }
    }

    double operator()(double a, double b) const {
        if (fam_.lambda_is_midpoint()) return 0.5 * (a + b);
        const double s = 1.0 / fam_.gamma;
        double best = std::min(a, b);
        for (double v : values_) {
            if (a + v < 0.0 || b + v < 0.0) continue;
            const double m = 0.5 * (std::pow(a + v, s) + std::pow(b + v, s));
            best = std::max(best, std::pow(m, fam_.gamma) - v);
        }
        return best;
    }

  private:
    HamiltonianFamily fam_;
    std::vector<double> values_;
};

inline double evaluate(const HamiltonianFamily& fam, const Environment& env, Vec p, Vec y) {
    if (env.dim() == 1 && (p.y != 0.0 || y.y != 0.0))
        throw ConfigError("evaluate: 2-D argument passed to a 1-D environment");
    if (fam.kind == FamilyKind::Aniso && env.dim() != 2)
        throw ConfigError("evaluate: ANISO family requires dim = 2");
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(y.x) || !std::isfinite(y.y))
        throw ConfigError("evaluate: non-finite argument");
    return fam(p, env.field(y));
}

struct HypothesisCheck {
    std::string name;
    bool pass = true;
    bool informational = false;
    double worst_violation = 0.0;
    std::string detail;
};

struct HypothesisReport {
    std::vector<HypothesisCheck> checks;
    bool pass = true;  // informational failures do not count

    const HypothesisCheck* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

namespace detail {
inline Vec sample_ball(SplitMix& rng, double R, int dim) {
    for (;;) {
        Vec p{rng.uniform(-1.0, 1.0), dim == 2 ? rng.uniform(-1.0, 1.0) : 0.0};
        if (p.norm2() <= 1.0) return p * R;
    }
}
}  // namespace detail

// Samples the structural hypotheses: parameter sanity, coercivity witness,
// equicontinuity in p, quasiconvexity, and the declared Lambda modulus.
// Midpoint convexity is reported informationally (genuinely non-convex
// families are supposed to fail it). Throws HypothesisViolation on any
// non-informational violation beyond floating-point slack.
inline HypothesisReport validate_hypotheses(const HamiltonianFamily& fam, const Environment& env,
                                            std::size_t sample_budget) {
    if (sample_budget < 1000) throw ConfigError("validate_hypotheses: sample_budget must be >= 1000");
    HypothesisReport rep;
    auto add = [&](HypothesisCheck c) {
        if (!c.pass && !c.informational) rep.pass = false;
        rep.checks.push_back(std::move(c));
    };

    // Parameter sanity doubles as validity of the coercivity witness.
    {
        HypothesisCheck c{.name = "witness-valid"};
        if (fam.kind == FamilyKind::Power && !(fam.gamma > 0.0)) {
            c.pass = false;
            c.detail = "POWER requires gamma > 0";
        }
        if (fam.kind == FamilyKind::Aniso && !(fam.kappa > 0.0)) {
            c.pass = false;
            c.detail = "ANISO requires kappa > 0";
        }
        if (fam.kind == FamilyKind::Eikonal && !(env.v_min() > 0.0)) {
            c.pass = false;
            c.detail = "EIKONAL requires a strictly positive speed field";
        }
        add(c);
        if (!c.pass) throw HypothesisViolation("hypothesis violation (coercivity witness): " + c.detail);
    }
    if (fam.kind == FamilyKind::Aniso && env.dim() != 2)
        throw ConfigError("validate_hypotheses: ANISO family requires dim = 2");

    SplitMix rng(mix64(env.spec().seed ^ 0x5bd1e995u));
    const double box = 64.0 * env.spec().cell;
    const double mu_top = fam(Vec{1.0, 0.0}, env.v_max()) + 4.0;
    const double R = fam.sublevel_radius_bound(mu_top, env.v_min(), env.v_max()) + 1.0;
    auto sample_y = [&] {
        return Vec{rng.uniform(-box, box), env.dim() == 2 ? rng.uniform(-box, box) : 0.0};
    };

    const std::size_t n = sample_budget;
    LambdaModulus lambda(fam, env);

    HypothesisCheck qc{.name = "quasiconvexity"};
    HypothesisCheck lam{.name = "lambda-modulus"};
    HypothesisCheck mid{.name = "midpoint-convexity", .informational = true};
    HypothesisCheck equi{.name = "p-equicontinuity"};
    for (std::size_t i = 0; i < n; ++i) {
        const Vec y = sample_y();
        const double v = env.field(y);
        const Vec p = detail::sample_ball(rng, R, env.dim());
        const Vec q = detail::sample_ball(rng, R, env.dim());
        const double hp = fam(p, v), hq = fam(q, v), hm = fam((p + q) * 0.5, v);
        const double scale = 1.0 + std::max(std::abs(hp), std::abs(hq));
        const double slack = 1e-10 * scale;
        qc.worst_violation = std::max(qc.worst_violation, hm - std::max(hp, hq));
        if (hm > std::max(hp, hq) + slack) qc.pass = false;
        const double lv = lambda(hp, hq);
        lam.worst_violation = std::max(lam.worst_violation, hm - lv);
        if (hm > lv + slack) lam.pass = false;
        mid.worst_violation = std::max(mid.worst_violation, hm - 0.5 * (hp + hq));
        if (hm > 0.5 * (hp + hq) + slack) mid.pass = false;

        // Equicontinuity probe: a nearby momentum at the same point.
        const Vec dp = detail::sample_ball(rng, 0.5, env.dim());
        const double hpd = fam(p + dp, v);
        const double bound = fam.p_modulus(dp.norm(), R, env.v_max());
        equi.worst_violation = std::max(equi.worst_violation, std::abs(hpd - hp) - bound);
        if (std::abs(hpd - hp) > bound * (1.0 + 1e-9) + 1e-12) equi.pass = false;
    }
    if (!mid.pass) mid.detail = "expected for genuinely non-convex families";
    add(qc);
    add(lam);
    add(mid);
    add(equi);

    // Coercivity: just outside the witness radius the value must exceed mu.
    HypothesisCheck coer{.name = "coercivity-witness"};
    const double mu_floor = fam.min_over_p(env.v_max());
    for (double mu : {mu_floor + 0.5, 1.0, 2.0, 4.0}) {
        const double rad = fam.sublevel_radius_bound(mu, env.v_min(), env.v_max()) + 1.0;
        for (std::size_t i = 0; i < std::max<std::size_t>(n / 16, 256); ++i) {
            const Vec y = sample_y();
            const Vec p = unit(detail::sample_ball(rng, 1.0, env.dim())) * rad;
            const double h = fam(p, env.field(y));
            coer.worst_violation = std::max(coer.worst_violation, mu - h);
            if (h <= mu - 1e-12 * (1.0 + std::abs(mu))) coer.pass = false;
        }
    }
    add(coer);

    for (const auto& c : rep.checks)
        if (!c.pass && !c.informational)
            throw HypothesisViolation("hypothesis violation (" + c.name + "): worst " +
                                      std::to_string(c.worst_violation));
    return rep;
}

// Largest theta such that every sampled (p, y) with H(p,y) >= mu keeps
// H(p+q, y) >= mu - alpha for all |q| <= theta. Critical momenta are taken
// on the mu-level set itself; the infimum over the q-ball is probed on a
// direction net (the minimum over a ball of a quasiconvex function lies on
// the sphere or along the descent toward the minimizer).
inline double perturbation_tolerance(const HamiltonianFamily& fam, const Environment& env,
                                     double mu, double alpha) {
    if (!(alpha > 0.0)) throw ConfigError("perturbation_tolerance: alpha must be positive");
    SplitMix rng(mix64(env.spec().seed ^ 0x27d4eb2fu));
    const double box = 64.0 * env.spec().cell;
    const int n_pts = 256;

    struct Probe {
        Vec p;
        double v;
    };
    std::vector<Probe> probes;
    probes.reserve(2 * n_pts);
    for (int i = 0; i < n_pts; ++i) {
        const Vec y{rng.uniform(-box, box), env.dim() == 2 ? rng.uniform(-box, box) : 0.0};
        const double v = env.field(y);
        if (fam.min_over_p(v) >= mu) continue;  // level set empty or degenerate here
        // Radial point on {H = mu} along a random direction from the minimizer.
        const Vec dir = unit(detail::sample_ball(rng, 1.0, env.dim()));
        const Vec p0 = fam.minimizer_hint(v);
        double lo = 0.0, hi = 1.0;
        while (fam(p0 + dir * hi, v) < mu && hi < 1e6) hi *= 2.0;
        if (fam(p0 + dir * hi, v) < mu) continue;
        for (int it = 0; it < 60; ++it) {
            const double m = 0.5 * (lo + hi);
            (fam(p0 + dir * m, v) < mu ? lo : hi) = m;
        }
        probes.push_back({p0 + dir * hi, v});
        // A strictly-above point as well.
        probes.push_back({p0 + dir * (hi * 1.25 + 0.25), v});
    }
    if (probes.empty()) throw HypothesisViolation("perturbation_tolerance: level set empty at mu");

    const int n_dirs = env.dim() == 2 ? 256 : 2;
    std::vector<Vec> net = direction_fan(env.dim(), n_dirs);
    auto ok = [&](double theta) {
        for (const auto& pr : probes) {
            for (const Vec& u : net)
                if (fam(pr.p + u * theta, pr.v) < mu - alpha) return false;
            const Vec toward = fam.minimizer_hint(pr.v) - pr.p;
            if (toward.norm() > 0.0 && fam(pr.p + unit(toward) * theta, pr.v) < mu - alpha)
                return false;
        }
        return true;
    };

    double hi = 1.0;
    while (ok(hi) && hi < 1e6) hi *= 2.0;
    if (!ok(hi)) {
        double lo = 0.0;
        for (int it = 0; it < 60; ++it) {
            const double m = 0.5 * (lo + hi);
            (ok(m) ? lo : hi) = m;
        }
        hi = lo;
    }
    if (hi < 1e-12) throw HypothesisViolation("perturbation_tolerance: degenerate family, no usable theta");
    return hi;
}

}  // namespace hjlab
