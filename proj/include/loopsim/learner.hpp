#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "loopsim/agent.hpp"

namespace loopsim::learn {

// Joint over (S_{t+1}, C_{t+1}, A_{t+1}, S_{t+2}) used while planning from a
// realized (s_t, a_t, c_t). For agents with an internal world model the two
// sensor blocks are predictions. Dense layout: sn | cn<<3 | an<<5 | sg<<7.
struct PlanJoint {
    std::array<double, 1024> p{};

    static std::size_t index(unsigned sn, unsigned cn, unsigned an, unsigned sg) {
        return sn | (cn << 3) | (an << 5) | (sg << 7);
    }
    // the planning goal: no body contact two steps ahead
    static bool goal_state(std::size_t idx) { return ((idx >> 9) & 1u) == 0; }

    double goal_mass() const;
    double sum() const;

    prob::JointTable to_table() const;
    static PlanJoint from_table(const prob::JointTable& t);
};

// variable names of to_table()/from_table(), least significant first
const std::vector<prob::VarId>& plan_vars();

// D(q || p) over plan joints
double plan_kl(const PlanJoint& q, const PlanJoint& p);

// plan from the current mechanisms; the first sensor block is predicted by
// the empirical world model row at (s_t, a_t) for PWM agents and by the
// internal world model row at (a_t, c_t) for LWM agents
PlanJoint build_plan_pwm(const agents::Agent& agent, unsigned s_prev,
                         unsigned a_prev, unsigned c_prev);
PlanJoint build_plan_lwm(const agents::Agent& agent, unsigned a_prev,
                         unsigned c_prev);

// condition on the goal event; nullopt when the agent assigns it zero mass
std::optional<PlanJoint> e_project_goal(const PlanJoint& p);

// write q's conditionals into the controller rows addressed by the realized
// c_t and into every policy row; split agents keep their row sharing.
// Returns the number of undefined rows replaced by uniform.
std::size_t m_project_agent(const PlanJoint& q, unsigned c_prev,
                            agents::Topology topology, agents::Mechanisms& mech);

// replace the (sn, an, sg) marginal by frozen_margin(sn,an) * empirical row,
// keeping p's conditional of cn given the rest
PlanJoint e_project_world(const PlanJoint& p,
                          const std::array<std::array<double, 8>, 32>& empirical_rows,
                          const std::array<std::array<double, 4>, 8>& frozen_margin);

// internal world model rows <- q(sg | an, cn); controller and policy stay
std::size_t m_project_world(const PlanJoint& q, agents::Mechanisms& mech);

// marginal over (sn, an) as used by e_project_world
std::array<std::array<double, 4>, 8> sn_an_marginal(const PlanJoint& p);

// gaussian noise on every policy row entry, floored and renormalized
void inject_policy_noise(agents::Mechanisms& mech, double sigma, Rng& rng);

// per-projection diagnostics; kl_incumbent is the divergence of a known
// member of the phase's manifold, so kl_proj <= kl_incumbent must hold
struct ProjectionDiag {
    enum Phase { goal_e, agent_m, world_e, world_m };
    Phase phase;
    bool skipped = false;
    double goal_mass = 0.0;
    double kl_proj = 0.0;
    double kl_incumbent = 0.0;
    double marginal_dev = 0.0;  // world_e: L-inf gap to the target marginal
};

struct PlanDiag {
    std::vector<double> goal_mass_per_cycle;  // pwm: before each e-step
    std::vector<ProjectionDiag> projections;  // lwm
    std::size_t uniform_fallbacks = 0;
    std::size_t skipped_goal_phases = 0;
};

// standard em loop: `pairs` alternations of goal conditioning and the agent
// m-projection
void pwm_plan_step(agents::Agent& agent, unsigned s_prev, unsigned a_prev,
                   unsigned c_prev, int pairs, PlanDiag* diag = nullptr);

// modified em loop: `projections` steps through the four-projection cycle
// goal-e, agent-m, world-e, world-m with the manifolds re-anchored at the
// current mechanisms
void lwm_learn_step(agents::Agent& agent, unsigned a_prev, unsigned c_prev,
                    int projections, PlanDiag* diag = nullptr);

// convergence-debugging stream: one CSV row per em cycle (pwm) or
// projection (lwm)
void write_diag_csv_header(std::ostream& out);
void append_diag_csv(std::ostream& out, long step, const PlanDiag& diag);

struct LearnConfig {
    double noise_sigma = 0.01;
    int projection_budget = 15;
};

// one agent step of learning: noise injection, then the variant's loop
// (PWM agents get budget/2 e/m pairs)
void learn_step(agents::Agent& agent, unsigned s_prev, unsigned a_prev,
                unsigned c_prev, const LearnConfig& cfg, Rng& noise_rng,
                PlanDiag* diag = nullptr);

}  // namespace loopsim::learn
