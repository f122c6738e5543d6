#include "loopsim/agent.hpp"

#include <algorithm>

namespace loopsim::agents {

namespace m = loopsim::measures;
using prob::CondTable;
using prob::JointTable;
using prob::VarId;

void Mechanisms::floor_row(std::array<double, 8>& row) {
    double sum = 0.0;
    for (double& p : row) {
        p = std::max(p, prob::kPositivityFloor);
        sum += p;
    }
    for (double& p : row) p /= sum;
}

Agent::Agent(VariantSpec spec, const Rng& init_rng) : spec_(spec) {
    Rng ctrl_rng = init_rng.substream(1);
    Rng pol_rng = init_rng.substream(2);
    Rng wm_rng = init_rng.substream(3);

    for (int j = 0; j < 2; ++j) {
        if (spec_.topology == Topology::split) {
            // one row per (own bit, sensor state), copied across the other
            // bit: the split bit never sees its sibling
            std::array<double, 16> base;
            for (double& p : base) {
                double row[2];
                ctrl_rng.dirichlet_row(row);
                p = Mechanisms::clamp_binary(row[1]);
            }
            for (unsigned c = 0; c < 4; ++c)
                for (unsigned s = 0; s < 8; ++s)
                    mech_.controller[j][row_cs(c, s)] = base[((c >> j) & 1u) * 8 + s];
        } else {
            for (double& p : mech_.controller[j]) {
                double row[2];
                ctrl_rng.dirichlet_row(row);
                p = Mechanisms::clamp_binary(row[1]);
            }
        }
    }
    for (int i = 0; i < 2; ++i) {
        for (double& p : mech_.policy[i]) {
            double row[2];
            pol_rng.dirichlet_row(row);
            p = Mechanisms::clamp_binary(row[1]);
        }
    }
    if (spec_.mode == WorldModelMode::lwm) {
        mech_.has_wm = true;
        for (auto& row : mech_.wm) {
            wm_rng.dirichlet_row(row);
            Mechanisms::floor_row(row);
        }
    }

    state_counts_.fill(1);
    for (auto& row : trans_counts_) row.fill(1);
}

std::pair<unsigned, unsigned> Agent::act(unsigned s_next, unsigned c_prev,
                                         Rng& rng) const {
    unsigned c_next = 0;
    for (int j = 0; j < 2; ++j)
        if (rng.bernoulli(mech_.controller[j][row_cs(c_prev, s_next)]))
            c_next |= 1u << j;
    unsigned a_next = 0;
    for (int i = 0; i < 2; ++i)
        if (rng.bernoulli(mech_.policy[i][row_sc(s_next, c_next)]))
            a_next |= 1u << i;
    return {c_next, a_next};
}

void Agent::record(const Experience& e) {
    ++state_counts_[idx_sac(e.s_prev, e.a_prev, e.c_prev)];
    if (spec_.sampling_horizon < 0 || recorded_ < spec_.sampling_horizon)
        ++trans_counts_[row_sa(e.s_prev, e.a_prev)][e.s_next];
    ++recorded_;
}

prob::CondTable Agent::empirical_world_model() const {
    std::vector<double> rows(32 * 8);
    for (std::size_t r = 0; r < 32; ++r) {
        double total = 0.0;
        for (int k = 0; k < 8; ++k) total += static_cast<double>(trans_counts_[r][k]);
        for (int k = 0; k < 8; ++k)
            rows[r * 8 + k] = static_cast<double>(trans_counts_[r][k]) / total;
    }
    std::vector<VarId> cond(m::vars::s_prev);
    cond.insert(cond.end(), m::vars::a_prev.begin(), m::vars::a_prev.end());
    return CondTable(m::vars::s_next, std::move(cond), std::move(rows));
}

std::array<double, 8> Agent::empirical_row(unsigned s, unsigned a) const {
    const auto& counts = trans_counts_[row_sa(s, a)];
    std::array<double, 8> row;
    double total = 0.0;
    for (int k = 0; k < 8; ++k) total += static_cast<double>(counts[k]);
    for (int k = 0; k < 8; ++k) row[k] = static_cast<double>(counts[k]) / total;
    return row;
}

prob::JointTable Agent::state_distribution() const {
    std::vector<double> probs(128);
    double total = 0.0;
    for (std::int64_t c : state_counts_) total += static_cast<double>(c);
    for (std::size_t i = 0; i < 128; ++i)
        probs[i] = static_cast<double>(state_counts_[i]) / total;
    std::vector<VarId> vars(m::vars::s_prev);
    vars.insert(vars.end(), m::vars::a_prev.begin(), m::vars::a_prev.end());
    vars.insert(vars.end(), m::vars::c_prev.begin(), m::vars::c_prev.end());
    return JointTable(std::move(vars), std::move(probs));
}

prob::CondTable Agent::controller_table(int j) const {
    std::vector<double> rows(32 * 2);
    for (std::size_t r = 0; r < 32; ++r) {
        rows[r * 2 + 1] = mech_.controller[j][r];
        rows[r * 2 + 0] = 1.0 - mech_.controller[j][r];
    }
    std::vector<VarId> cond(m::vars::c_prev);
    cond.insert(cond.end(), m::vars::s_next.begin(), m::vars::s_next.end());
    return CondTable({m::vars::c_next[j]}, std::move(cond), std::move(rows));
}

prob::CondTable Agent::policy_table(int i) const {
    std::vector<double> rows(32 * 2);
    for (std::size_t r = 0; r < 32; ++r) {
        rows[r * 2 + 1] = mech_.policy[i][r];
        rows[r * 2 + 0] = 1.0 - mech_.policy[i][r];
    }
    std::vector<VarId> cond(m::vars::s_next);
    cond.insert(cond.end(), m::vars::c_next.begin(), m::vars::c_next.end());
    return CondTable({m::vars::a_next[i]}, std::move(cond), std::move(rows));
}

prob::CondTable Agent::internal_world_model() const {
    std::vector<double> rows(16 * 8);
    for (std::size_t r = 0; r < 16; ++r)
        for (int k = 0; k < 8; ++k) rows[r * 8 + k] = mech_.wm[r][k];
    std::vector<VarId> cond(m::vars::a_prev);
    cond.insert(cond.end(), m::vars::c_prev.begin(), m::vars::c_prev.end());
    return CondTable(m::vars::s_pred, std::move(cond), std::move(rows));
}

measures::LoopJoint Agent::build_measure_joints() const {
    const JointTable state = state_distribution();
    const CondTable ewm = empirical_world_model();

    std::vector<VarId> ct_sn(m::vars::c_prev);
    ct_sn.insert(ct_sn.end(), m::vars::s_next.begin(), m::vars::s_next.end());
    JointTable ctrl_base = marginalize(compose(state, ewm), ct_sn);
    JointTable ctrl = compose(ctrl_base, controller_table(0));
    ctrl = compose(ctrl, controller_table(1));
    ctrl = compose(ctrl, policy_table(0));
    ctrl = compose(ctrl, policy_table(1));

    std::vector<VarId> st_at(m::vars::s_prev);
    st_at.insert(st_at.end(), m::vars::a_prev.begin(), m::vars::a_prev.end());
    JointTable world = compose(marginalize(state, st_at), ewm);

    measures::LoopJoint out{std::move(ctrl), std::move(world), std::nullopt};
    if (mech_.has_wm) {
        std::vector<VarId> at_ct(m::vars::a_prev);
        at_ct.insert(at_ct.end(), m::vars::c_prev.begin(), m::vars::c_prev.end());
        out.prediction = compose(marginalize(state, at_ct), internal_world_model());
    }
    return out;
}

void Agent::set_uniform_policy() {
    for (int i = 0; i < 2; ++i) mech_.policy[i].fill(0.5);
}

}  // namespace loopsim::agents
