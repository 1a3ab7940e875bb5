#pragma once

#include <cstring>
#include <limits>
#include <memory>
#include <mutex>
#include <queue>
#include <unordered_map>
#include <vector>

#include "hjlab/environment.hpp"
#include "hjlab/errors.hpp"
#include "hjlab/hamiltonian.hpp"
#include "hjlab/lattice.hpp"
#include "hjlab/sublevel.hpp"
#include "hjlab/stats.hpp"
#include "hjlab/vec.hpp"

namespace hjlab {

enum class MetricDirection { Forward, Reversed };

struct UnsupportedRegime : ConfigError {
    using ConfigError::ConfigError;
};

// Finsler edge costs for one (mu, environment realization). An edge from a
// along offset v costs the line integral of sigma_mu(y, v/|v|) over the
// segment, evaluated by the midpoint rule; for piecewise-constant fields the
// segment is split at cell boundaries, which makes the integral exact. The
// reversed metric reuses the same support table with the negated direction,
// so forward/reversed solves are two views of identical cost data.
class MetricCostModel {
  public:
    MetricCostModel(HamiltonianFamily fam, Environment env, double mu, const Stencil& stencil,
                    int n_dirs = 64)
        : fam_(fam),
          env_(std::move(env)),
          mu_(mu),
          stencil_(stencil),
          cache_(fam, mu, env_.dim(), n_dirs) {
        // Nonnegative costs need 0 inside every pointwise sublevel set.
        const double h00 = worst_zero_level();
        if (h00 > mu_ + 1e-12 * (1.0 + std::abs(mu_)))
            throw UnsupportedRegime(
                "metric: mu below sup_y H(0,y); costs would be negative (unsupported regime)");
        c_mu_ = fam_.sublevel_radius_bound(mu_, env_.v_min(), env_.v_max());
    }

    double mu() const { return mu_; }
    double lipschitz_bound() const { return c_mu_; }
    const Environment& environment() const { return env_; }
    const Stencil& stencil() const { return stencil_; }

    // Unit support sigma_mu(value, dir_k); rows are built lazily and shared.
    const std::vector<double>& sigma_row(double value) {
        std::uint64_t key;
        std::memcpy(&key, &value, sizeof key);
        {
            std::lock_guard lock(mutex_);
            auto it = rows_.find(key);
            if (it != rows_.end()) return *it->second;
        }
        const SublevelGeometry& g = cache_.get(value);
        auto row = std::make_shared<std::vector<double>>();
        row->reserve(stencil_.dirs.size());
        for (const Vec& d : stencil_.dirs) {
            double s = g.unit_support(d);
            if (s < 0.0) {
                if (s < -1e-12 * (1.0 + c_mu_))
                    throw UnsupportedRegime("metric: negative edge cost encountered");
                s = 0.0;
            }
            row->push_back(s);
        }
        std::lock_guard lock(mutex_);
        auto [it, _] = rows_.emplace(key, std::move(row));
        return *it->second;
    }

    // Cost of the edge leaving `a` along stencil offset k. `k_cost` selects
    // the support direction: pass k for the forward metric and negated[k]
    // for the reversed one.
    double edge_cost(const Lattice& lat, Vec a_pos, std::size_t k, std::size_t k_cost) {
        const Vec step{stencil_.offsets[k][0] * lat.h, stencil_.offsets[k][1] * lat.h};
        const Vec b_pos = a_pos + step;
        const double len = stencil_.lengths[k] * lat.h;
        if (!env_.piecewise_constant()) {
            const double v = env_.field((a_pos + b_pos) * 0.5);
            return len * sigma_row(v)[k_cost];
        }
        std::vector<double> ts = env_.cell_crossings(a_pos, b_pos);
        double cost = 0.0;
        double t0 = 0.0;
        for (std::size_t i = 0; i <= ts.size(); ++i) {
            const double t1 = i < ts.size() ? ts[i] : 1.0;
            if (t1 > t0) {
                const double v = env_.field(a_pos + step * (0.5 * (t0 + t1)));
                cost += (t1 - t0) * len * sigma_row(v)[k_cost];
            }
            t0 = t1;
        }
        return cost;
    }

    // True when a single support row describes every edge.
    bool uniform() const {
        const auto vals = env_.distinct_values();
        return vals.size() == 1 || env_.v_min() == env_.v_max();
    }
    double uniform_value() const { return env_.v_min(); }

  private:
    double worst_zero_level() const {
        const auto palette = env_.distinct_values();
        double worst = -std::numeric_limits<double>::infinity();
        if (!palette.empty()) {
            for (double v : palette) worst = std::max(worst, fam_(Vec{0.0, 0.0}, v));
            return worst;
        }
        // Continuous field: H(0, v) is monotone in v for the shipped
        // families, so the range endpoints bound it.
        return std::max(fam_(Vec{0.0, 0.0}, env_.v_min()), fam_(Vec{0.0, 0.0}, env_.v_max()));
    }

    HamiltonianFamily fam_;
    Environment env_;
    double mu_;
    Stencil stencil_;
    GeometryCache cache_;
    double c_mu_ = 0.0;
    std::mutex mutex_;
    std::unordered_map<std::uint64_t, std::shared_ptr<std::vector<double>>> rows_;
};

// Discrete maximal subsolution of the metric problem: single-source
// shortest-path distances over the stencil graph.
struct MetricField {
    Lattice lattice;
    Stencil stencil;
    double mu = 0.0;
    std::size_t source = 0;
    MetricDirection direction = MetricDirection::Forward;
    double lipschitz_bound = 0.0;  // C_mu from the coercivity witness
    std::vector<double> values;

    double at(std::size_t node) const { return values[node]; }
    double at(int ix, int iy) const { return values[lattice.id(ix, iy)]; }
};

namespace detail {

template <class CostFn>
void dijkstra(const Lattice& lat, const Stencil& st, std::size_t source, CostFn&& cost,
              std::vector<double>& dist) {
    const int nx = lat.nx(), ny = lat.ny();
    const std::size_t n = lat.size();
    dist.assign(n, std::numeric_limits<double>::infinity());
    dist[source] = 0.0;

    using Entry = std::pair<double, std::uint32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    heap.push({0.0, static_cast<std::uint32_t>(source)});

    const std::size_t nk = st.offsets.size();
    std::vector<std::ptrdiff_t> dnode(nk);
    for (std::size_t k = 0; k < nk; ++k)
        dnode[k] = st.offsets[k][0] + static_cast<std::ptrdiff_t>(nx) * st.offsets[k][1];

    while (!heap.empty()) {
        const auto [d, u32] = heap.top();
        heap.pop();
        const std::size_t u = u32;
        if (d > dist[u]) continue;  // stale entry
        const int ix = static_cast<int>(u % nx);
        const int iy = static_cast<int>(u / nx);
        for (std::size_t k = 0; k < nk; ++k) {
            const int jx = ix + st.offsets[k][0];
            const int jy = iy + st.offsets[k][1];
            if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
            const std::size_t w = u + static_cast<std::size_t>(dnode[k]);
            const double nd = d + cost(u, ix, iy, k);
            if (nd < dist[w]) {
                dist[w] = nd;
                heap.push({nd, static_cast<std::uint32_t>(w)});
            }
        }
    }
}

}  // namespace detail

inline MetricField solve_metric(const Lattice& lat, MetricCostModel& model, std::size_t source,
                                MetricDirection direction = MetricDirection::Forward) {
    if (source >= lat.size()) throw ConfigError("solve_metric: source outside lattice");
    if (lat.size() > std::numeric_limits<std::uint32_t>::max())
        throw ConfigError("solve_metric: lattice too large for 32-bit node ids");
    const Stencil& st = model.stencil();
    MetricField field;
    field.lattice = lat;
    field.stencil = st;
    field.mu = model.mu();
    field.source = source;
    field.direction = direction;
    field.lipschitz_bound = model.lipschitz_bound();

    const bool rev = direction == MetricDirection::Reversed;
    if (model.uniform()) {
        // One support row; costs depend only on the offset.
        const std::vector<double>& row = model.sigma_row(model.uniform_value());
        std::vector<double> cost_k(st.offsets.size());
        for (std::size_t k = 0; k < st.offsets.size(); ++k) {
            const std::size_t kc = rev ? st.negated[k] : k;
            cost_k[k] = st.lengths[k] * lat.h * row[kc];
        }
        detail::dijkstra(
            lat, st, source,
            [&](std::size_t, int, int, std::size_t k) { return cost_k[k]; }, field.values);
    } else {
        detail::dijkstra(
            lat, st, source,
            [&](std::size_t, int ix, int iy, std::size_t k) {
                const std::size_t kc = rev ? st.negated[k] : k;
                return model.edge_cost(lat, lat.pos(ix, iy), k, kc);
            },
            field.values);
    }
    return field;
}

// ---- Exact discrete identities -------------------------------------------

struct CheckReport {
    bool pass = true;
    double worst = 0.0;          // worst signed violation (positive = bad)
    std::size_t worst_node = 0;
    std::string detail;
};

// m(z,x) <= m(y,x) + m(z,y) for every node z; `fy` must be solved from the
// intermediate node y on the same lattice and mu. Exact for shortest paths
// up to floating-point accumulation.
inline CheckReport check_subadditivity(const MetricField& fx, const MetricField& fy,
                                       std::size_t y_node, double rel_slack = 1e-12) {
    CheckReport rep;
    const double scale = 1.0 + fx.values[y_node];
    for (std::size_t z = 0; z < fx.values.size(); ++z) {
        const double lhs = fx.values[z];
        const double rhs = fx.values[y_node] + fy.values[z];
        const double gap = lhs - rhs;
        if (gap > rep.worst) {
            rep.worst = gap;
            rep.worst_node = z;
        }
        if (gap > rel_slack * (scale + std::abs(rhs))) rep.pass = false;
    }
    if (!rep.pass)
        throw InconsistencyError("subadditivity violated by " + std::to_string(rep.worst) +
                                 " (solver bug)");
    return rep;
}

// Affine subsolutions dominate: p.(y - x) <= m(y,x) + slack. The slack
// covers the fan's one-sided support deficit (zero in 1-D) plus rounding.
inline CheckReport check_maximality_affine(const MetricField& f, const HamiltonianFamily& fam,
                                           const Environment& env, Vec p, int n_dirs = 64) {
    // Subsolution precondition: sup over the domain of H(p, y) <= mu.
    double worst_h = -std::numeric_limits<double>::infinity();
    const auto palette = env.distinct_values();
    if (!palette.empty()) {
        for (double v : palette) worst_h = std::max(worst_h, fam(p, v));
    } else {
        for (std::size_t i = 0; i < f.values.size(); ++i)
            worst_h = std::max(worst_h, fam(p, env.field(f.lattice.pos(i))));
    }
    if (worst_h > f.mu + 1e-12 * (1.0 + std::abs(f.mu)))
        throw ConfigError("check_maximality_affine: p.y is not a subsolution at this mu");

    const double fan_deficit =
        env.dim() == 2 ? 1.0 - std::cos(M_PI / static_cast<double>(n_dirs)) : 0.0;
    const Vec xpos = f.lattice.pos(f.source);
    CheckReport rep;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const Vec y = f.lattice.pos(i);
        const double dist = (y - xpos).norm();
        const double slack = fan_deficit * p.norm() * dist + 1e-12 * (1.0 + f.values[i]);
        const double gap = dot(p, y - xpos) - f.values[i] - slack;
        if (gap > rep.worst) {
            rep.worst = gap;
            rep.worst_node = i;
        }
        if (gap > 0.0) rep.pass = false;
    }
    if (!rep.pass)
        rep.detail = "discretization-resolution warning: affine domination violated at node " +
                     std::to_string(rep.worst_node);
    return rep;
}

struct MonotonicityReport {
    bool pass = true;
    double empirical_growth = 0.0;  // min (m_nu - m_mu) / |y - x| over y != x
};

// Costs at nu dominate costs at mu edgewise, so the distances are ordered
// exactly, including in floating point (fl addition is monotone).
inline MonotonicityReport check_mu_monotonicity(const MetricField& f_mu,
                                                const MetricField& f_nu) {
    if (f_mu.values.size() != f_nu.values.size() || f_mu.source != f_nu.source)
        throw ConfigError("check_mu_monotonicity: fields not comparable");
    MonotonicityReport rep;
    rep.empirical_growth = std::numeric_limits<double>::infinity();
    const Vec x = f_mu.lattice.pos(f_mu.source);
    for (std::size_t i = 0; i < f_mu.values.size(); ++i) {
        if (f_nu.values[i] < f_mu.values[i]) rep.pass = false;
        if (i != f_mu.source) {
            const double d = (f_mu.lattice.pos(i) - x).norm();
            rep.empirical_growth =
                std::min(rep.empirical_growth, (f_nu.values[i] - f_mu.values[i]) / d);
        }
    }
    if (!rep.pass) throw InconsistencyError("mu-monotonicity violated (solver bug)");
    return rep;
}

// Reversal identity n_mu(y,x) = m_mu(x,y), spot-checked by fresh forward
// solves from sampled nodes.
inline CheckReport check_duality(const MetricField& reversed_from_x, MetricCostModel& model,
                                 std::span<const std::size_t> sample_nodes,
                                 double rel_slack = 1e-12) {
    if (reversed_from_x.direction != MetricDirection::Reversed)
        throw ConfigError("check_duality: first field must be a reversed solve");
    CheckReport rep;
    for (std::size_t y : sample_nodes) {
        const MetricField fwd =
            solve_metric(reversed_from_x.lattice, model, y, MetricDirection::Forward);
        const double a = reversed_from_x.values[y];
        const double b = fwd.values[reversed_from_x.source];
        const double gap = std::abs(a - b);
        if (gap > rep.worst) {
            rep.worst = gap;
            rep.worst_node = y;
        }
        if (gap > rel_slack * (1.0 + std::abs(a) + std::abs(b))) rep.pass = false;
    }
    if (!rep.pass)
        throw InconsistencyError("reversal identity violated by " + std::to_string(rep.worst) +
                                 " (solver bug)");
    return rep;
}

}  // namespace hjlab
