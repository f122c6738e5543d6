#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace loopsim::prob {

// Interior floor for tables that must stay strictly positive.
inline constexpr double kPositivityFloor = 1e-12;

// All variables in this project are binary; a VarId is just a unique name
// within the scope of one table.
struct VarId {
    std::string name;
    bool operator==(const VarId&) const = default;
};

// Dense probability table over an ordered set of binary variables.
// vars()[0] is the least significant bit of the state index.
// Immutable after construction; all operations below return new tables.
class JointTable {
public:
    JointTable(std::vector<VarId> vars, std::vector<double> probs);

    static JointTable uniform(std::vector<VarId> vars);

    const std::vector<VarId>& vars() const { return vars_; }
    std::size_t var_count() const { return vars_.size(); }
    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t idx) const { return probs_[idx]; }
    std::span<const double> probs() const { return probs_; }

    bool has(const VarId& v) const;
    // position of v in vars(); throws std::domain_error if unknown
    std::size_t index_of(const VarId& v) const;

    double sum() const;
    JointTable normalized() const;
    // clamp every entry to >= eps, then renormalize
    JointTable positive(double eps = kPositivityFloor) const;

    static unsigned bit(std::size_t state, std::size_t pos) {
        return static_cast<unsigned>((state >> pos) & 1u);
    }

private:
    std::vector<VarId> vars_;
    std::vector<double> probs_;
};

// Conditional distribution P(targets | conditions), one normalized row over
// the target states per condition state. Rows whose condition state had zero
// probability in the source joint are flagged undefined.
class CondTable {
public:
    CondTable(std::vector<VarId> targets, std::vector<VarId> conditions,
              std::vector<double> rows, std::vector<std::uint8_t> defined = {});

    const std::vector<VarId>& targets() const { return targets_; }
    const std::vector<VarId>& conditions() const { return conditions_; }
    std::size_t row_count() const { return std::size_t{1} << conditions_.size(); }
    std::size_t row_size() const { return std::size_t{1} << targets_.size(); }

    std::span<const double> row(std::size_t cond_state) const {
        return {rows_.data() + cond_state * row_size(), row_size()};
    }
    double row_value(std::size_t cond_state, std::size_t target_state) const {
        return rows_[cond_state * row_size() + target_state];
    }
    bool defined(std::size_t cond_state) const { return defined_[cond_state] != 0; }
    std::size_t undefined_count() const;

    // replace undefined rows by the uniform distribution; reports how many
    // rows were replaced so callers can log the substitution
    CondTable totalized(std::size_t* replaced = nullptr) const;

    // same data under new variable names (shapes must match)
    CondTable renamed(std::vector<VarId> new_targets,
                      std::vector<VarId> new_conditions) const;

    // fix some condition variables to concrete values, dropping them from
    // the condition list
    CondTable restricted(const std::vector<std::pair<VarId, unsigned>>& fixed) const;

private:
    std::vector<VarId> targets_;
    std::vector<VarId> conditions_;
    std::vector<double> rows_;
    std::vector<std::uint8_t> defined_;
};

// ---- operations ----------------------------------------------------------

// sum out everything not in `keep`; result variable order follows p.vars()
JointTable marginalize(const JointTable& p, std::span<const VarId> keep);

// split p into P(targets | rest); conditions keep their order from p.vars()
CondTable condition(const JointTable& p, std::span<const VarId> targets);

// joint over base.vars() + mech.targets() with entries
// base(x) * mech(t | x restricted to mech.conditions())
JointTable compose(const JointTable& base, const CondTable& mech);

// D(p || q), natural log; +infinity when p puts mass where q has none
double kl_divergence(const JointTable& p, const JointTable& q);

// I(xs ; ys) under p
double mutual_information(const JointTable& p, std::span<const VarId> xs,
                          std::span<const VarId> ys);

// I(xs ; ys | zs) under p; zero-probability slices contribute nothing
double cond_mutual_information(const JointTable& p, std::span<const VarId> xs,
                               std::span<const VarId> ys,
                               std::span<const VarId> zs);

double entropy(const JointTable& p);

struct IpfNoConvergence : std::runtime_error {
    IpfNoConvergence(const std::string& what, double dev)
        : std::runtime_error(what), deviation(dev) {}
    double deviation;
};

struct IpfDiag {
    int sweeps = 0;
    double deviation = 0.0;
    std::vector<double> kl_per_sweep;  // D(p || Q) after each sweep
};

// Maximum-entropy distribution matching p's marginals on every set in
// `fixed_sets`, fitted by iterative proportional scaling from the uniform
// start. Convergence is L-infinity agreement of every constrained marginal.
JointTable ipf_fit(const JointTable& p,
                   const std::vector<std::vector<VarId>>& fixed_sets,
                   double tol = 1e-9, int max_iter = 1000,
                   IpfDiag* diag = nullptr);

}  // namespace loopsim::prob
