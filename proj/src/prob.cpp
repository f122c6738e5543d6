#include "loopsim/prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace loopsim::prob {

namespace {

void check_unique_names(const std::vector<VarId>& vars) {
    std::unordered_set<std::string> seen;
    for (const auto& v : vars) {
        if (!seen.insert(v.name).second)
            throw std::domain_error("duplicate variable name: " + v.name);
    }
}

// positions of `subset` inside `vars`; throws on unknown names
std::vector<std::size_t> positions_of(const std::vector<VarId>& vars,
                                      std::span<const VarId> subset) {
    std::vector<std::size_t> pos;
    pos.reserve(subset.size());
    for (const auto& v : subset) {
        auto it = std::find(vars.begin(), vars.end(), v);
        if (it == vars.end())
            throw std::domain_error("unknown variable: " + v.name);
        pos.push_back(static_cast<std::size_t>(it - vars.begin()));
    }
    return pos;
}

// gather the bits at `pos` from a full state index into a packed sub-index
inline std::size_t gather(std::size_t state, const std::vector<std::size_t>& pos) {
    std::size_t out = 0;
    for (std::size_t k = 0; k < pos.size(); ++k)
        out |= static_cast<std::size_t>((state >> pos[k]) & 1u) << k;
    return out;
}

void check_disjoint(std::span<const VarId> a, std::span<const VarId> b) {
    for (const auto& x : a)
        for (const auto& y : b)
            if (x == y) throw std::domain_error("variable sets overlap: " + x.name);
}

}  // namespace

JointTable::JointTable(std::vector<VarId> vars, std::vector<double> probs)
    : vars_(std::move(vars)), probs_(std::move(probs)) {
    check_unique_names(vars_);
    if (probs_.size() != (std::size_t{1} << vars_.size()))
        throw std::domain_error("probability array length must be 2^|vars|");
    for (double p : probs_)
        if (!(p >= 0.0)) throw std::domain_error("negative or NaN probability entry");
}

JointTable JointTable::uniform(std::vector<VarId> vars) {
    const std::size_t n = std::size_t{1} << vars.size();
    return JointTable(std::move(vars), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

bool JointTable::has(const VarId& v) const {
    return std::find(vars_.begin(), vars_.end(), v) != vars_.end();
}

std::size_t JointTable::index_of(const VarId& v) const {
    auto it = std::find(vars_.begin(), vars_.end(), v);
    if (it == vars_.end()) throw std::domain_error("unknown variable: " + v.name);
    return static_cast<std::size_t>(it - vars_.begin());
}

double JointTable::sum() const {
    double s = 0.0;
    for (double p : probs_) s += p;
    return s;
}

JointTable JointTable::normalized() const {
    const double s = sum();
    if (s <= 0.0) throw std::domain_error("cannot normalize a zero table");
    std::vector<double> out(probs_);
    for (double& p : out) p /= s;
    return JointTable(vars_, std::move(out));
}

JointTable JointTable::positive(double eps) const {
    std::vector<double> out(probs_);
    for (double& p : out) p = std::max(p, eps);
    return JointTable(vars_, std::move(out)).normalized();
}

CondTable::CondTable(std::vector<VarId> targets, std::vector<VarId> conditions,
                     std::vector<double> rows, std::vector<std::uint8_t> defined)
    : targets_(std::move(targets)),
      conditions_(std::move(conditions)),
      rows_(std::move(rows)),
      defined_(std::move(defined)) {
    std::vector<VarId> all(targets_);
    all.insert(all.end(), conditions_.begin(), conditions_.end());
    check_unique_names(all);
    const std::size_t nrows = std::size_t{1} << conditions_.size();
    const std::size_t width = std::size_t{1} << targets_.size();
    if (rows_.size() != nrows * width)
        throw std::domain_error("conditional row block has wrong size");
    if (defined_.empty()) defined_.assign(nrows, 1);
    if (defined_.size() != nrows)
        throw std::domain_error("defined-flag array has wrong size");
    for (std::size_t r = 0; r < nrows; ++r) {
        if (!defined_[r]) continue;
        double s = 0.0;
        for (std::size_t t = 0; t < width; ++t) {
            const double v = rows_[r * width + t];
            if (!(v >= 0.0)) throw std::domain_error("negative conditional entry");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-9)
            throw std::domain_error("conditional row does not sum to 1");
        for (std::size_t t = 0; t < width; ++t) rows_[r * width + t] /= s;
    }
}

std::size_t CondTable::undefined_count() const {
    std::size_t n = 0;
    for (auto d : defined_)
        if (!d) ++n;
    return n;
}

CondTable CondTable::totalized(std::size_t* replaced) const {
    std::size_t n = undefined_count();
    if (replaced) *replaced = n;
    if (n == 0) return *this;
    std::vector<double> rows(rows_);
    std::vector<std::uint8_t> defined(defined_);
    const std::size_t width = row_size();
    const double u = 1.0 / static_cast<double>(width);
    for (std::size_t r = 0; r < row_count(); ++r) {
        if (defined[r]) continue;
        for (std::size_t t = 0; t < width; ++t) rows[r * width + t] = u;
        defined[r] = 1;
    }
    return CondTable(targets_, conditions_, std::move(rows), std::move(defined));
}

CondTable CondTable::renamed(std::vector<VarId> new_targets,
                             std::vector<VarId> new_conditions) const {
    if (new_targets.size() != targets_.size() ||
        new_conditions.size() != conditions_.size())
        throw std::domain_error("renamed table must keep its shape");
    return CondTable(std::move(new_targets), std::move(new_conditions), rows_, defined_);
}

CondTable CondTable::restricted(
    const std::vector<std::pair<VarId, unsigned>>& fixed) const {
    std::vector<std::size_t> fixed_pos;
    std::vector<unsigned> fixed_val;
    std::vector<VarId> kept;
    std::vector<std::size_t> kept_pos;
    for (std::size_t i = 0; i < conditions_.size(); ++i) {
        bool is_fixed = false;
        for (const auto& [v, val] : fixed) {
            if (conditions_[i] == v) {
                fixed_pos.push_back(i);
                fixed_val.push_back(val & 1u);
                is_fixed = true;
                break;
            }
        }
        if (!is_fixed) {
            kept.push_back(conditions_[i]);
            kept_pos.push_back(i);
        }
    }
    if (fixed_pos.size() != fixed.size())
        throw std::domain_error("restricted: unknown condition variable");
    const std::size_t width = row_size();
    const std::size_t nrows = std::size_t{1} << kept.size();
    std::vector<double> rows(nrows * width);
    std::vector<std::uint8_t> defined(nrows);
    for (std::size_t r = 0; r < nrows; ++r) {
        std::size_t full = 0;
        for (std::size_t k = 0; k < kept_pos.size(); ++k)
            full |= ((r >> k) & 1u) << kept_pos[k];
        for (std::size_t k = 0; k < fixed_pos.size(); ++k)
            full |= static_cast<std::size_t>(fixed_val[k]) << fixed_pos[k];
        for (std::size_t t = 0; t < width; ++t)
            rows[r * width + t] = rows_[full * width + t];
        defined[r] = defined_[full];
    }
    return CondTable(targets_, std::move(kept), std::move(rows), std::move(defined));
}

JointTable marginalize(const JointTable& p, std::span<const VarId> keep) {
    // result order follows p.vars(), not the argument order
    std::vector<VarId> kept;
    for (const auto& v : p.vars()) {
        for (const auto& k : keep) {
            if (v == k) {
                kept.push_back(v);
                break;
            }
        }
    }
    if (kept.size() != keep.size()) positions_of(p.vars(), keep);  // raise on unknown
    const auto pos = positions_of(p.vars(), kept);
    std::vector<double> out(std::size_t{1} << kept.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) out[gather(i, pos)] += p[i];
    return JointTable(std::move(kept), std::move(out));
}

CondTable condition(const JointTable& p, std::span<const VarId> targets) {
    positions_of(p.vars(), targets);  // validate
    std::vector<VarId> tgt, cond;
    for (const auto& v : p.vars()) {
        bool is_target = false;
        for (const auto& t : targets)
            if (v == t) { is_target = true; break; }
        (is_target ? tgt : cond).push_back(v);
    }
    if (cond.empty()) throw std::domain_error("condition: targets must be a proper subset");
    const auto tpos = positions_of(p.vars(), tgt);
    const auto cpos = positions_of(p.vars(), cond);
    const std::size_t width = std::size_t{1} << tgt.size();
    const std::size_t nrows = std::size_t{1} << cond.size();
    std::vector<double> rows(nrows * width, 0.0);
    std::vector<double> mass(nrows, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const std::size_t r = gather(i, cpos);
        rows[r * width + gather(i, tpos)] += p[i];
        mass[r] += p[i];
    }
    std::vector<std::uint8_t> defined(nrows, 1);
    for (std::size_t r = 0; r < nrows; ++r) {
        if (mass[r] > 0.0) {
            for (std::size_t t = 0; t < width; ++t) rows[r * width + t] /= mass[r];
        } else {
            defined[r] = 0;
        }
    }
    return CondTable(std::move(tgt), std::move(cond), std::move(rows), std::move(defined));
}

JointTable compose(const JointTable& base, const CondTable& mech) {
    for (const auto& t : mech.targets())
        if (base.has(t)) throw std::domain_error("compose: variable collision: " + t.name);
    const auto cpos = positions_of(base.vars(), mech.conditions());
    std::vector<VarId> vars(base.vars());
    vars.insert(vars.end(), mech.targets().begin(), mech.targets().end());
    const std::size_t nb = base.var_count();
    const std::size_t width = mech.row_size();
    std::vector<double> out(base.size() * width);
    for (std::size_t b = 0; b < base.size(); ++b) {
        const std::size_t r = gather(b, cpos);
        const double pb = base[b];
        for (std::size_t t = 0; t < width; ++t)
            out[(t << nb) | b] = pb * mech.row_value(r, t);
    }
    return JointTable(std::move(vars), std::move(out));
}

double kl_divergence(const JointTable& p, const JointTable& q) {
    if (p.vars() != q.vars())
        throw std::domain_error("kl_divergence: tables must share variables and order");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        d += p[i] * std::log(p[i] / q[i]);
    }
    return d;
}

double mutual_information(const JointTable& p, std::span<const VarId> xs,
                          std::span<const VarId> ys) {
    check_disjoint(xs, ys);
    const auto xpos = positions_of(p.vars(), xs);
    const auto ypos = positions_of(p.vars(), ys);
    const std::size_t nx = std::size_t{1} << xs.size();
    const std::size_t ny = std::size_t{1} << ys.size();
    std::vector<double> pxy(nx * ny, 0.0), px(nx, 0.0), py(ny, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const std::size_t x = gather(i, xpos);
        const std::size_t y = gather(i, ypos);
        pxy[y * nx + x] += p[i];
        px[x] += p[i];
        py[y] += p[i];
    }
    double mi = 0.0;
    for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t x = 0; x < nx; ++x) {
            const double j = pxy[y * nx + x];
            if (j > 0.0) mi += j * std::log(j / (px[x] * py[y]));
        }
    return mi;
}

double cond_mutual_information(const JointTable& p, std::span<const VarId> xs,
                               std::span<const VarId> ys,
                               std::span<const VarId> zs) {
    check_disjoint(xs, ys);
    check_disjoint(xs, zs);
    check_disjoint(ys, zs);
    const auto xpos = positions_of(p.vars(), xs);
    const auto ypos = positions_of(p.vars(), ys);
    const auto zpos = positions_of(p.vars(), zs);
    const std::size_t nx = std::size_t{1} << xs.size();
    const std::size_t ny = std::size_t{1} << ys.size();
    const std::size_t nz = std::size_t{1} << zs.size();
    std::vector<double> pxyz(nx * ny * nz, 0.0);
    std::vector<double> pxz(nx * nz, 0.0), pyz(ny * nz, 0.0), pz(nz, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const std::size_t x = gather(i, xpos);
        const std::size_t y = gather(i, ypos);
        const std::size_t z = gather(i, zpos);
        pxyz[(z * ny + y) * nx + x] += p[i];
        pxz[z * nx + x] += p[i];
        pyz[z * ny + y] += p[i];
        pz[z] += p[i];
    }
    double cmi = 0.0;
    for (std::size_t z = 0; z < nz; ++z)
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t x = 0; x < nx; ++x) {
                const double j = pxyz[(z * ny + y) * nx + x];
                if (j > 0.0)
                    cmi += j * std::log(j * pz[z] / (pxz[z * nx + x] * pyz[z * ny + y]));
            }
    return cmi;
}

double entropy(const JointTable& p) {
    double h = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
    return h;
}

JointTable ipf_fit(const JointTable& p,
                   const std::vector<std::vector<VarId>>& fixed_sets,
                   double tol, int max_iter, IpfDiag* diag) {
    std::vector<std::vector<std::size_t>> pos;
    std::vector<std::vector<double>> target_marg;
    pos.reserve(fixed_sets.size());
    for (const auto& set : fixed_sets) {
        pos.push_back(positions_of(p.vars(), set));
        std::vector<double> m(std::size_t{1} << set.size(), 0.0);
        for (std::size_t i = 0; i < p.size(); ++i) m[gather(i, pos.back())] += p[i];
        target_marg.push_back(std::move(m));
    }

    std::vector<double> q(p.size(), 1.0 / static_cast<double>(p.size()));
    std::vector<double> qm;
    double dev = std::numeric_limits<double>::infinity();
    for (int sweep = 1; sweep <= max_iter; ++sweep) {
        for (std::size_t s = 0; s < pos.size(); ++s) {
            qm.assign(target_marg[s].size(), 0.0);
            for (std::size_t i = 0; i < q.size(); ++i) qm[gather(i, pos[s])] += q[i];
            for (std::size_t i = 0; i < q.size(); ++i) {
                const std::size_t m = gather(i, pos[s]);
                q[i] = qm[m] > 0.0 ? q[i] * target_marg[s][m] / qm[m] : 0.0;
            }
        }
        dev = 0.0;
        for (std::size_t s = 0; s < pos.size(); ++s) {
            qm.assign(target_marg[s].size(), 0.0);
            for (std::size_t i = 0; i < q.size(); ++i) qm[gather(i, pos[s])] += q[i];
            for (std::size_t m = 0; m < qm.size(); ++m)
                dev = std::max(dev, std::abs(qm[m] - target_marg[s][m]));
        }
        if (diag) {
            diag->sweeps = sweep;
            diag->deviation = dev;
            diag->kl_per_sweep.push_back(
                kl_divergence(p, JointTable(p.vars(), q)));
        }
        if (dev <= tol) return JointTable(p.vars(), std::move(q));
    }
    throw IpfNoConvergence("ipf_fit did not converge within max_iter sweeps", dev);
}

}  // namespace loopsim::prob
