#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "loopsim/measures.hpp"

namespace loopsim::oracle {

using prob::JointTable;
using prob::VarId;

namespace {

std::vector<std::size_t> var_positions(const JointTable& p,
                                       const std::vector<VarId>& vars) {
    std::vector<std::size_t> pos;
    for (const auto& v : vars) pos.push_back(p.index_of(v));
    return pos;
}

// does joint state `state` match the assignment `sub` on positions `pos`?
bool matches(std::size_t state, const std::vector<std::size_t>& pos, std::size_t sub) {
    for (std::size_t k = 0; k < pos.size(); ++k)
        if (((state >> pos[k]) & 1u) != ((sub >> k) & 1u)) return false;
    return true;
}

}  // namespace

std::vector<double> bf_marginal(const JointTable& p, const std::vector<VarId>& keep) {
    const auto pos = var_positions(p, keep);
    std::vector<double> out(std::size_t{1} << keep.size(), 0.0);
    for (std::size_t sub = 0; sub < out.size(); ++sub)
        for (std::size_t state = 0; state < p.size(); ++state)
            if (matches(state, pos, sub)) out[sub] += p[state];
    return out;
}

double bf_kl(const JointTable& p, const JointTable& q) {
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        d += p[i] * std::log(p[i] / q[i]);
    }
    return d;
}

double bf_mutual_information(const JointTable& p, const std::vector<VarId>& xs,
                             const std::vector<VarId>& ys) {
    std::vector<VarId> xy(xs);
    xy.insert(xy.end(), ys.begin(), ys.end());
    const auto pxy = bf_marginal(p, xy);
    const auto px = bf_marginal(p, xs);
    const auto py = bf_marginal(p, ys);
    const std::size_t nx = px.size();
    double mi = 0.0;
    for (std::size_t i = 0; i < pxy.size(); ++i) {
        if (pxy[i] == 0.0) continue;
        const std::size_t x = i % nx;
        const std::size_t y = i / nx;
        mi += pxy[i] * std::log(pxy[i] / (px[x] * py[y]));
    }
    return mi;
}

double bf_cond_mutual_information(const JointTable& p, const std::vector<VarId>& xs,
                                  const std::vector<VarId>& ys,
                                  const std::vector<VarId>& zs) {
    // I(X;Y|Z) = I(X;YZ) - I(X;Z), both by the plug-in sum above
    std::vector<VarId> yz(ys);
    yz.insert(yz.end(), zs.begin(), zs.end());
    return bf_mutual_information(p, xs, yz) - bf_mutual_information(p, xs, zs);
}

namespace {

// minimize -sum_k w_k log q_k over the simplex by golden-section pairwise
// transfers; convex and separable, so sweeps converge to the optimum
std::vector<double> min_cross_entropy_row(const std::vector<double>& w) {
    const std::size_t m = w.size();
    std::vector<double> q(m, 1.0 / static_cast<double>(m));
    if (m < 2) return q;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    const double floor_q = 1e-14;
    const auto pair_obj = [&](double wi, double wj, double x, double s) {
        double f = 0.0;
        if (wi > 0.0) f -= wi * std::log(x);
        if (wj > 0.0) f -= wj * std::log(s - x);
        return f;
    };
    for (int sweep = 0; sweep < 200; ++sweep) {
        double moved = 0.0;
        for (std::size_t i = 0; i + 1 < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                const double s = q[i] + q[j];
                if (s <= 2.0 * floor_q) continue;
                double lo = floor_q, hi = s - floor_q;
                double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
                double fa = pair_obj(w[i], w[j], a, s);
                double fb = pair_obj(w[i], w[j], b, s);
                for (int it = 0; it < 90; ++it) {
                    if (fa < fb) {
                        hi = b;
                        b = a;
                        fb = fa;
                        a = hi - gr * (hi - lo);
                        fa = pair_obj(w[i], w[j], a, s);
                    } else {
                        lo = a;
                        a = b;
                        fa = fb;
                        b = lo + gr * (hi - lo);
                        fb = pair_obj(w[i], w[j], b, s);
                    }
                }
                const double x = (lo + hi) / 2.0;
                moved = std::max(moved, std::abs(q[i] - x));
                q[i] = x;
                q[j] = s - x;
            }
        if (moved < 1e-13) break;
    }
    return q;
}

double min_cross_entropy_value(const std::vector<double>& w) {
    const auto q = min_cross_entropy_row(w);
    double f = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
        if (w[k] > 0.0) f -= w[k] * std::log(q[k]);
    return f;
}

}  // namespace

double min_kl_over_split_family(const JointTable& p,
                                const std::vector<VarId>& base_vars,
                                const std::vector<SplitFactor>& factors) {
    std::size_t covered = base_vars.size();
    for (const auto& f : factors) covered += f.target_block.size();
    if (covered != p.var_count())
        throw std::invalid_argument("split family must cover all variables once");

    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) total += p[i] * std::log(p[i]);  // -H(P)

    // base factor: weights are p's marginal over base_vars
    total += min_cross_entropy_value(bf_marginal(p, base_vars));

    for (const auto& f : factors) {
        const auto gpos = var_positions(p, f.given);
        const auto tpos = var_positions(p, f.target_block);
        const std::size_t nrows = std::size_t{1} << f.given.size();
        const std::size_t width = std::size_t{1} << f.target_block.size();
        for (std::size_t row = 0; row < nrows; ++row) {
            std::vector<double> w(width, 0.0);
            for (std::size_t state = 0; state < p.size(); ++state) {
                if (!matches(state, gpos, row)) continue;
                std::size_t t = 0;
                for (std::size_t k = 0; k < tpos.size(); ++k)
                    t |= ((state >> tpos[k]) & 1u) << k;
                w[t] += p[state];
            }
            total += min_cross_entropy_value(w);
        }
    }
    return total;
}

namespace mv = loopsim::measures::vars;

double split_min_phi_iit(const JointTable& controller_joint) {
    std::vector<VarId> keep(mv::c_prev);
    keep.insert(keep.end(), mv::s_next.begin(), mv::s_next.end());
    keep.insert(keep.end(), mv::c_next.begin(), mv::c_next.end());
    const JointTable marg(keep, bf_marginal(controller_joint, keep));
    std::vector<VarId> base(mv::c_prev);
    base.insert(base.end(), mv::s_next.begin(), mv::s_next.end());
    std::vector<SplitFactor> factors;
    for (int j = 0; j < 2; ++j) {
        SplitFactor f;
        f.target_block = {mv::c_next[j]};
        f.given = {mv::c_prev[j]};
        f.given.insert(f.given.end(), mv::s_next.begin(), mv::s_next.end());
        factors.push_back(std::move(f));
    }
    return min_kl_over_split_family(marg, base, factors);
}

double split_min_psi_si(const JointTable& controller_joint) {
    std::vector<VarId> keep(mv::c_prev);
    keep.insert(keep.end(), mv::s_next.begin(), mv::s_next.end());
    keep.insert(keep.end(), mv::c_next.begin(), mv::c_next.end());
    const JointTable marg(keep, bf_marginal(controller_joint, keep));
    std::vector<VarId> base(mv::c_prev);
    base.insert(base.end(), mv::s_next.begin(), mv::s_next.end());
    std::vector<SplitFactor> factors;
    for (int j = 0; j < 2; ++j)
        factors.push_back({{mv::c_next[j]}, mv::c_prev});
    return min_kl_over_split_family(marg, base, factors);
}

double split_min_psi_c(const JointTable& controller_joint) {
    std::vector<VarId> keep(mv::s_next);
    keep.insert(keep.end(), mv::c_next.begin(), mv::c_next.end());
    keep.insert(keep.end(), mv::a_next.begin(), mv::a_next.end());
    const JointTable marg(keep, bf_marginal(controller_joint, keep));
    std::vector<VarId> base(mv::s_next);
    base.insert(base.end(), mv::c_next.begin(), mv::c_next.end());
    std::vector<SplitFactor> factors;
    for (int i = 0; i < 2; ++i)
        factors.push_back({{mv::a_next[i]}, mv::s_next});
    return min_kl_over_split_family(marg, base, factors);
}

double split_min_psi_mc(const JointTable& world_joint) {
    std::vector<VarId> base(mv::s_prev);
    base.insert(base.end(), mv::a_prev.begin(), mv::a_prev.end());
    std::vector<SplitFactor> factors{{mv::s_next, mv::a_prev}};
    return min_kl_over_split_family(world_joint, base, factors);
}

double synp_stationarity_gap(const JointTable& q, Rng& rng, int trials) {
    const auto apos = var_positions(q, mv::a_prev);
    const auto cpos = var_positions(q, mv::c_prev);
    const auto spos = var_positions(q, mv::s_pred);
    const auto sub_index = [](std::size_t state, const std::vector<std::size_t>& pos) {
        std::size_t out = 0;
        for (std::size_t k = 0; k < pos.size(); ++k)
            out |= ((state >> pos[k]) & 1u) << k;
        return out;
    };
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        // random pure three-way interaction: f(a) g(c) h(s), each zero-sum,
        // spans the null space of the pairwise-marginal constraints
        std::array<double, 4> f{}, g{};
        std::array<double, 8> h{};
        for (auto* blk : {&f, &g}) {
            double mean = 0.0;
            for (double& x : *blk) {
                x = rng.normal();
                mean += x;
            }
            mean /= blk->size();
            for (double& x : *blk) x -= mean;
        }
        double mean = 0.0;
        for (double& x : h) {
            x = rng.normal();
            mean += x;
        }
        mean /= h.size();
        for (double& x : h) x -= mean;

        double dot = 0.0, norm = 0.0;
        for (std::size_t state = 0; state < q.size(); ++state) {
            const double d = f[sub_index(state, apos)] * g[sub_index(state, cpos)] *
                             h[sub_index(state, spos)];
            dot += std::log(q[state]) * d;
            norm += d * d;
        }
        if (norm > 0.0) worst = std::max(worst, std::abs(dot) / std::sqrt(norm));
    }
    return worst;
}

JointTable random_positive_joint(std::vector<VarId> vars, Rng& rng) {
    std::vector<double> probs(std::size_t{1} << vars.size());
    rng.dirichlet_row(probs);
    JointTable t(std::move(vars), std::move(probs));
    return t.positive(1e-6);  // keep the oracle well away from the boundary
}

namespace {

// q(bit = 1) per row, uniformly drawn, away from 0/1
std::vector<double> random_binary_rows(std::size_t rows, Rng& rng) {
    std::vector<double> out(rows);
    for (double& p : out) p = 0.02 + 0.96 * rng.uniform();
    return out;
}

}  // namespace

JointTable random_controller_joint(Rng& rng) {
    // base over (ct, sn), then per-bit channels for cn and an
    std::vector<VarId> base_vars(mv::c_prev);
    base_vars.insert(base_vars.end(), mv::s_next.begin(), mv::s_next.end());
    const JointTable base = random_positive_joint(base_vars, rng);

    std::vector<VarId> vars(base_vars);
    vars.insert(vars.end(), mv::c_next.begin(), mv::c_next.end());
    vars.insert(vars.end(), mv::a_next.begin(), mv::a_next.end());

    const auto ctrl0 = random_binary_rows(32, rng);
    const auto ctrl1 = random_binary_rows(32, rng);
    const auto pol0 = random_binary_rows(32, rng);
    const auto pol1 = random_binary_rows(32, rng);

    std::vector<double> probs(512);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const unsigned ct = i & 3u;
        const unsigned sn = (i >> 2) & 7u;
        const unsigned cn = (i >> 5) & 3u;
        const unsigned an = (i >> 7) & 3u;
        double v = base[ct | (sn << 2)];
        v *= (cn & 1u) ? ctrl0[ct | (sn << 2)] : 1.0 - ctrl0[ct | (sn << 2)];
        v *= (cn & 2u) ? ctrl1[ct | (sn << 2)] : 1.0 - ctrl1[ct | (sn << 2)];
        v *= (an & 1u) ? pol0[sn | (cn << 3)] : 1.0 - pol0[sn | (cn << 3)];
        v *= (an & 2u) ? pol1[sn | (cn << 3)] : 1.0 - pol1[sn | (cn << 3)];
        probs[i] = v;
    }
    return JointTable(std::move(vars), std::move(probs));
}

JointTable random_world_joint(Rng& rng) {
    std::vector<VarId> base_vars(mv::s_prev);
    base_vars.insert(base_vars.end(), mv::a_prev.begin(), mv::a_prev.end());
    const JointTable base = random_positive_joint(base_vars, rng);
    std::vector<VarId> vars(base_vars);
    vars.insert(vars.end(), mv::s_next.begin(), mv::s_next.end());
    std::vector<double> probs(256);
    std::array<std::array<double, 8>, 32> rows;
    for (auto& row : rows) {
        rng.dirichlet_row(row);
        for (double& x : row) x = std::max(x, 1e-6);
        double s = 0.0;
        for (double x : row) s += x;
        for (double& x : row) x /= s;
    }
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const unsigned st = i & 7u;
        const unsigned at = (i >> 3) & 3u;
        const unsigned sn = (i >> 5) & 7u;
        probs[i] = base[st | (at << 3)] * rows[st | (at << 3)][sn];
    }
    return JointTable(std::move(vars), std::move(probs));
}

JointTable random_prediction_joint(Rng& rng) {
    std::vector<VarId> base_vars(mv::a_prev);
    base_vars.insert(base_vars.end(), mv::c_prev.begin(), mv::c_prev.end());
    const JointTable base = random_positive_joint(base_vars, rng);
    std::vector<VarId> vars(base_vars);
    vars.insert(vars.end(), mv::s_pred.begin(), mv::s_pred.end());
    std::vector<double> probs(128);
    std::array<std::array<double, 8>, 16> rows;
    for (auto& row : rows) {
        rng.dirichlet_row(row);
        for (double& x : row) x = std::max(x, 1e-6);
        double s = 0.0;
        for (double x : row) s += x;
        for (double& x : row) x /= s;
    }
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const unsigned at = i & 3u;
        const unsigned ct = (i >> 2) & 3u;
        const unsigned sp = (i >> 4) & 7u;
        probs[i] = base[at | (ct << 2)] * rows[at | (ct << 2)][sp];
    }
    return JointTable(std::move(vars), std::move(probs));
}

std::optional<double> bf_sweep_circle_segment(env::Vec2 p0, env::Vec2 disp, double r,
                                              const env::Segment& s, int samples) {
    const auto dist = [&](double t) {
        return env::point_segment_distance(p0 + disp * t, s);
    };
    const bool start_inside = dist(0.0) < r;
    double prev_t = 0.0;
    double prev_d = dist(0.0);
    if (start_inside) return 0.0;
    for (int k = 1; k <= samples; ++k) {
        const double t = static_cast<double>(k) / samples;
        const double d = dist(t);
        if (d < r) {
            // bisect the crossing
            double lo = prev_t, hi = t;
            for (int it = 0; it < 80; ++it) {
                const double mid = (lo + hi) / 2.0;
                (dist(mid) < r ? hi : lo) = mid;
            }
            return (lo + hi) / 2.0;
        }
        prev_t = t;
        prev_d = d;
    }
    (void)prev_d;
    return std::nullopt;
}

double bf_point_segment_distance(env::Vec2 p, const env::Segment& s, int samples) {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= samples; ++k) {
        const double u = static_cast<double>(k) / samples;
        best = std::min(best, (p - (s.a + (s.b - s.a) * u)).norm());
    }
    return best;
}

}  // namespace loopsim::oracle
