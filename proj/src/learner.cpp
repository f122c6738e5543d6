#include "loopsim/learner.hpp"

#include <cmath>
#include <ostream>

namespace loopsim::learn {

using agents::Agent;
using agents::Mechanisms;
using agents::row_ac;
using agents::row_cs;
using agents::row_sa;
using agents::row_sc;
using agents::Topology;

double PlanJoint::goal_mass() const {
    double g = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (goal_state(i)) g += p[i];
    return g;
}

double PlanJoint::sum() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
}

const std::vector<prob::VarId>& plan_vars() {
    namespace v = measures::vars;
    static const std::vector<prob::VarId> vars = [] {
        std::vector<prob::VarId> out(v::s_next);
        out.insert(out.end(), v::c_next.begin(), v::c_next.end());
        out.insert(out.end(), v::a_next.begin(), v::a_next.end());
        out.push_back({"sg0"});
        out.push_back({"sg1"});
        out.push_back({"sg2"});
        return out;
    }();
    return vars;
}

prob::JointTable PlanJoint::to_table() const {
    return prob::JointTable(plan_vars(), std::vector<double>(p.begin(), p.end()));
}

PlanJoint PlanJoint::from_table(const prob::JointTable& t) {
    if (t.vars() != plan_vars())
        throw std::domain_error("from_table: wrong variables for a plan joint");
    PlanJoint out;
    for (std::size_t i = 0; i < out.p.size(); ++i) out.p[i] = t[i];
    return out;
}

double plan_kl(const PlanJoint& q, const PlanJoint& p) {
    double d = 0.0;
    for (std::size_t i = 0; i < q.p.size(); ++i) {
        if (q.p[i] == 0.0) continue;
        if (p.p[i] == 0.0) return std::numeric_limits<double>::infinity();
        d += q.p[i] * std::log(q.p[i] / p.p[i]);
    }
    return d;
}

namespace {

// joint from mechanisms with an arbitrary first-sensor row and a transition
// row lookup; trans(sn, cn, an) -> pointer to 8 probabilities over sg
template <typename TransFn>
PlanJoint build_plan(const Mechanisms& mech, unsigned c_prev,
                     const std::array<double, 8>& first_row, TransFn&& trans) {
    PlanJoint out;
    for (unsigned sn = 0; sn < 8; ++sn) {
        const double p_sn = first_row[sn];
        const double pc0 = mech.controller[0][row_cs(c_prev, sn)];
        const double pc1 = mech.controller[1][row_cs(c_prev, sn)];
        for (unsigned cn = 0; cn < 4; ++cn) {
            const double p_cn = ((cn & 1u) ? pc0 : 1.0 - pc0) *
                                ((cn & 2u) ? pc1 : 1.0 - pc1);
            const double pa0 = mech.policy[0][row_sc(sn, cn)];
            const double pa1 = mech.policy[1][row_sc(sn, cn)];
            for (unsigned an = 0; an < 4; ++an) {
                const double p_an = ((an & 1u) ? pa0 : 1.0 - pa0) *
                                    ((an & 2u) ? pa1 : 1.0 - pa1);
                const double base = p_sn * p_cn * p_an;
                const double* row = trans(sn, cn, an);
                double* dst = out.p.data() + PlanJoint::index(sn, cn, an, 0);
                for (unsigned sg = 0; sg < 8; ++sg) dst[sg << 7] = base * row[sg];
            }
        }
    }
    return out;
}

}  // namespace

PlanJoint build_plan_pwm(const Agent& agent, unsigned s_prev, unsigned a_prev,
                         unsigned c_prev) {
    const auto first = agent.empirical_row(s_prev, a_prev);
    std::array<std::array<double, 8>, 32> rows;
    for (unsigned s = 0; s < 8; ++s)
        for (unsigned a = 0; a < 4; ++a) rows[row_sa(s, a)] = agent.empirical_row(s, a);
    return build_plan(agent.mechanisms(), c_prev, first,
                      [&](unsigned sn, unsigned, unsigned an) {
                          return rows[row_sa(sn, an)].data();
                      });
}

PlanJoint build_plan_lwm(const Agent& agent, unsigned a_prev, unsigned c_prev) {
    const Mechanisms& mech = agent.mechanisms();
    const auto& first = mech.wm[row_ac(a_prev, c_prev)];
    return build_plan(mech, c_prev, first,
                      [&](unsigned, unsigned cn, unsigned an) {
                          return mech.wm[row_ac(an, cn)].data();
                      });
}

std::optional<PlanJoint> e_project_goal(const PlanJoint& p) {
    const double g = p.goal_mass();
    if (g <= 0.0) return std::nullopt;
    PlanJoint q;
    for (std::size_t i = 0; i < p.p.size(); ++i)
        q.p[i] = PlanJoint::goal_state(i) ? p.p[i] / g : 0.0;
    return q;
}

std::size_t m_project_agent(const PlanJoint& q, unsigned c_prev,
                            Topology topology, Mechanisms& mech) {
    std::size_t fallbacks = 0;

    // controller rows at the realized c_t; split bits share their row across
    // the other bit, so the update lands on both shared rows
    for (int j = 0; j < 2; ++j) {
        for (unsigned sn = 0; sn < 8; ++sn) {
            double mass = 0.0, set = 0.0;
            for (unsigned cn = 0; cn < 4; ++cn)
                for (unsigned an = 0; an < 4; ++an) {
                    const double* src = q.p.data() + PlanJoint::index(sn, cn, an, 0);
                    double cell = 0.0;
                    for (unsigned sg = 0; sg < 8; ++sg) cell += src[sg << 7];
                    mass += cell;
                    if (cn & (1u << j)) set += cell;
                }
            double p1;
            if (mass > 0.0) {
                p1 = set / mass;
            } else {
                p1 = 0.5;
                ++fallbacks;
            }
            p1 = Mechanisms::clamp_binary(p1);
            if (topology == Topology::split) {
                const unsigned own = (c_prev >> j) & 1u;
                for (unsigned c = 0; c < 4; ++c)
                    if (((c >> j) & 1u) == own) mech.controller[j][row_cs(c, sn)] = p1;
            } else {
                mech.controller[j][row_cs(c_prev, sn)] = p1;
            }
        }
    }

    // every policy row
    for (int i = 0; i < 2; ++i) {
        for (unsigned sn = 0; sn < 8; ++sn)
            for (unsigned cn = 0; cn < 4; ++cn) {
                double mass = 0.0, set = 0.0;
                for (unsigned an = 0; an < 4; ++an) {
                    const double* src = q.p.data() + PlanJoint::index(sn, cn, an, 0);
                    double cell = 0.0;
                    for (unsigned sg = 0; sg < 8; ++sg) cell += src[sg << 7];
                    mass += cell;
                    if (an & (1u << i)) set += cell;
                }
                double p1;
                if (mass > 0.0) {
                    p1 = set / mass;
                } else {
                    p1 = 0.5;
                    ++fallbacks;
                }
                mech.policy[i][row_sc(sn, cn)] = Mechanisms::clamp_binary(p1);
            }
    }
    return fallbacks;
}

std::array<std::array<double, 4>, 8> sn_an_marginal(const PlanJoint& p) {
    std::array<std::array<double, 4>, 8> m{};
    for (unsigned sn = 0; sn < 8; ++sn)
        for (unsigned cn = 0; cn < 4; ++cn)
            for (unsigned an = 0; an < 4; ++an) {
                const double* src = p.p.data() + PlanJoint::index(sn, cn, an, 0);
                double cell = 0.0;
                for (unsigned sg = 0; sg < 8; ++sg) cell += src[sg << 7];
                m[sn][an] += cell;
            }
    return m;
}

PlanJoint e_project_world(const PlanJoint& p,
                          const std::array<std::array<double, 8>, 32>& empirical_rows,
                          const std::array<std::array<double, 4>, 8>& frozen_margin) {
    PlanJoint q;
    for (unsigned sn = 0; sn < 8; ++sn)
        for (unsigned an = 0; an < 4; ++an) {
            const auto& erow = empirical_rows[row_sa(sn, an)];
            for (unsigned sg = 0; sg < 8; ++sg) {
                const double target = frozen_margin[sn][an] * erow[sg];
                double mass = 0.0;
                for (unsigned cn = 0; cn < 4; ++cn)
                    mass += p.p[PlanJoint::index(sn, cn, an, sg)];
                for (unsigned cn = 0; cn < 4; ++cn) {
                    const std::size_t i = PlanJoint::index(sn, cn, an, sg);
                    q.p[i] = mass > 0.0 ? target * p.p[i] / mass : target * 0.25;
                }
            }
        }
    return q;
}

std::size_t m_project_world(const PlanJoint& q, Mechanisms& mech) {
    std::size_t fallbacks = 0;
    for (unsigned an = 0; an < 4; ++an)
        for (unsigned cn = 0; cn < 4; ++cn) {
            std::array<double, 8> num{};
            double mass = 0.0;
            for (unsigned sg = 0; sg < 8; ++sg) {
                double cell = 0.0;
                for (unsigned sn = 0; sn < 8; ++sn)
                    cell += q.p[PlanJoint::index(sn, cn, an, sg)];
                num[sg] = cell;
                mass += cell;
            }
            auto& row = mech.wm[row_ac(an, cn)];
            if (mass > 0.0) {
                for (unsigned sg = 0; sg < 8; ++sg) row[sg] = num[sg] / mass;
            } else {
                row.fill(1.0 / 8.0);
                ++fallbacks;
            }
            Mechanisms::floor_row(row);
        }
    return fallbacks;
}

void inject_policy_noise(Mechanisms& mech, double sigma, Rng& rng) {
    if (sigma == 0.0) return;
    for (int i = 0; i < 2; ++i)
        for (double& p1 : mech.policy[i]) {
            const double e0 = std::max(prob::kPositivityFloor,
                                       (1.0 - p1) + rng.normal(0.0, sigma));
            const double e1 = std::max(prob::kPositivityFloor, p1 + rng.normal(0.0, sigma));
            p1 = Mechanisms::clamp_binary(e1 / (e0 + e1));
        }
}

void pwm_plan_step(Agent& agent, unsigned s_prev, unsigned a_prev,
                   unsigned c_prev, int pairs, PlanDiag* diag) {
    for (int k = 0; k < pairs; ++k) {
        const PlanJoint plan = build_plan_pwm(agent, s_prev, a_prev, c_prev);
        if (diag) diag->goal_mass_per_cycle.push_back(plan.goal_mass());
        const auto q = e_project_goal(plan);
        if (!q) {
            if (diag) ++diag->skipped_goal_phases;
            return;  // the agent believes the goal impossible; nothing to fit
        }
        const std::size_t fb = m_project_agent(*q, c_prev, agent.variant().topology,
                                               agent.mechanisms());
        if (diag) diag->uniform_fallbacks += fb;
    }
    if (diag) {
        // final goal mass, so cycle-over-cycle monotonicity is checkable
        diag->goal_mass_per_cycle.push_back(
            build_plan_pwm(agent, s_prev, a_prev, c_prev).goal_mass());
    }
}

void lwm_learn_step(Agent& agent, unsigned a_prev, unsigned c_prev,
                    int projections, PlanDiag* diag) {
    Mechanisms& mech = agent.mechanisms();
    std::optional<PlanJoint> held;  // e-projection result awaiting its m-step
    bool goal_skipped = false;

    std::array<std::array<double, 8>, 32> empirical{};
    bool have_empirical = false;

    for (int k = 0; k < projections; ++k) {
        switch (k % 4) {
            case 0: {  // e-projection onto the goal manifold
                const PlanJoint plan = build_plan_lwm(agent, a_prev, c_prev);
                held = e_project_goal(plan);
                goal_skipped = !held.has_value();
                if (diag) {
                    ProjectionDiag d;
                    d.phase = ProjectionDiag::goal_e;
                    d.goal_mass = plan.goal_mass();
                    d.skipped = goal_skipped;
                    if (!goal_skipped) {
                        d.kl_proj = plan_kl(*held, plan);
                        // member alternative: uniform over the goal slice
                        PlanJoint alt{};
                        for (std::size_t i = 0; i < alt.p.size(); ++i)
                            alt.p[i] = PlanJoint::goal_state(i) ? 1.0 / 512.0 : 0.0;
                        d.kl_incumbent = plan_kl(alt, plan);
                    } else {
                        ++diag->skipped_goal_phases;
                    }
                    diag->projections.push_back(d);
                }
                break;
            }
            case 1: {  // m-projection onto the agent manifold
                if (goal_skipped) break;
                ProjectionDiag d;
                d.phase = ProjectionDiag::agent_m;
                if (diag)
                    d.kl_proj = plan_kl(*held, build_plan_lwm(agent, a_prev, c_prev));
                const std::size_t fb =
                    m_project_agent(*held, c_prev, agent.variant().topology, mech);
                if (diag) {
                    d.kl_incumbent = d.kl_proj;
                    d.kl_proj = plan_kl(*held, build_plan_lwm(agent, a_prev, c_prev));
                    diag->uniform_fallbacks += fb;
                    diag->projections.push_back(d);
                }
                break;
            }
            case 2: {  // e-projection onto the world goal manifold
                const PlanJoint plan = build_plan_lwm(agent, a_prev, c_prev);
                if (!have_empirical) {
                    for (unsigned s = 0; s < 8; ++s)
                        for (unsigned a = 0; a < 4; ++a)
                            empirical[row_sa(s, a)] = agent.empirical_row(s, a);
                    have_empirical = true;
                }
                const auto margin = sn_an_marginal(plan);
                held = e_project_world(plan, empirical, margin);
                if (diag) {
                    ProjectionDiag d;
                    d.phase = ProjectionDiag::world_e;
                    d.kl_proj = plan_kl(*held, plan);
                    // member alternative: target marginal with uniform C
                    PlanJoint alt;
                    for (unsigned sn = 0; sn < 8; ++sn)
                        for (unsigned an = 0; an < 4; ++an)
                            for (unsigned sg = 0; sg < 8; ++sg) {
                                const double t = margin[sn][an] *
                                                 empirical[row_sa(sn, an)][sg] * 0.25;
                                for (unsigned cn = 0; cn < 4; ++cn)
                                    alt.p[PlanJoint::index(sn, cn, an, sg)] = t;
                            }
                    d.kl_incumbent = plan_kl(alt, plan);
                    // deviation of the projected (sn, an, sg) marginal
                    double dev = 0.0;
                    for (unsigned sn = 0; sn < 8; ++sn)
                        for (unsigned an = 0; an < 4; ++an)
                            for (unsigned sg = 0; sg < 8; ++sg) {
                                double got = 0.0;
                                for (unsigned cn = 0; cn < 4; ++cn)
                                    got += held->p[PlanJoint::index(sn, cn, an, sg)];
                                const double want =
                                    margin[sn][an] * empirical[row_sa(sn, an)][sg];
                                dev = std::max(dev, std::abs(got - want));
                            }
                    d.marginal_dev = dev;
                    diag->projections.push_back(d);
                }
                break;
            }
            case 3: {  // m-projection onto the world agent manifold
                ProjectionDiag d;
                d.phase = ProjectionDiag::world_m;
                if (diag)
                    d.kl_incumbent = plan_kl(*held, build_plan_lwm(agent, a_prev, c_prev));
                const std::size_t fb = m_project_world(*held, mech);
                if (diag) {
                    // compare within the same manifold: free first factor at
                    // its optimum (the projection's own sensor marginal)
                    std::array<double, 8> sn_marg{};
                    for (unsigned sn = 0; sn < 8; ++sn)
                        for (unsigned cn = 0; cn < 4; ++cn)
                            for (unsigned an = 0; an < 4; ++an)
                                for (unsigned sg = 0; sg < 8; ++sg)
                                    sn_marg[sn] +=
                                        held->p[PlanJoint::index(sn, cn, an, sg)];
                    const PlanJoint refit = build_plan(
                        mech, c_prev, sn_marg, [&](unsigned, unsigned cn, unsigned an) {
                            return mech.wm[row_ac(an, cn)].data();
                        });
                    d.kl_proj = plan_kl(*held, refit);
                    diag->uniform_fallbacks += fb;
                    diag->projections.push_back(d);
                }
                break;
            }
        }
    }
}

void write_diag_csv_header(std::ostream& out) {
    out << "step,entry,phase,skipped,goal_mass,kl_proj,kl_incumbent,marginal_dev\n";
}

void append_diag_csv(std::ostream& out, long step, const PlanDiag& diag) {
    static const char* kPhaseNames[4] = {"goal_e", "agent_m", "world_e", "world_m"};
    int entry = 0;
    for (double gm : diag.goal_mass_per_cycle)
        out << step << "," << entry++ << ",goal_cycle,0," << gm << ",,,\n";
    for (const auto& p : diag.projections) {
        out << step << "," << entry++ << "," << kPhaseNames[p.phase] << ","
            << (p.skipped ? 1 : 0) << ",";
        if (p.phase == ProjectionDiag::goal_e) out << p.goal_mass;
        out << "," << p.kl_proj << "," << p.kl_incumbent << ",";
        if (p.phase == ProjectionDiag::world_e) out << p.marginal_dev;
        out << "\n";
    }
}

void learn_step(agents::Agent& agent, unsigned s_prev, unsigned a_prev,
                unsigned c_prev, const LearnConfig& cfg, Rng& noise_rng,
                PlanDiag* diag) {
    inject_policy_noise(agent.mechanisms(), cfg.noise_sigma, noise_rng);
    if (agent.variant().mode == agents::WorldModelMode::pwm)
        pwm_plan_step(agent, s_prev, a_prev, c_prev, cfg.projection_budget / 2, diag);
    else
        lwm_learn_step(agent, a_prev, c_prev, cfg.projection_budget, diag);
}

}  // namespace loopsim::learn
