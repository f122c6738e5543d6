#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "loopsim/measures.hpp"
#include "loopsim/prob.hpp"
#include "loopsim/rng.hpp"

namespace loopsim::agents {

enum class WorldModelMode { pwm, lwm };
enum class Topology { complete, split };

// A split controller bit receives only its own previous value: its rows are
// constant across the other controller bit and the sensor state, which
// removes every pathway for information integration in the controller.
struct VariantSpec {
    WorldModelMode mode = WorldModelMode::lwm;
    Topology topology = Topology::complete;
    // PWM ablation: transition sampling stops after this many steps; -1 keeps
    // sampling for the whole run
    long sampling_horizon = -1;
};

// State encodings used across the project:
//   sensor state s in [0,8): bit0 left ray, bit1 right ray, bit2 contact
//   action state a in [0,4): bit i = actuator bit A^i
//   controller state c in [0,4): bit j = controller bit C^j
inline std::size_t idx_sac(unsigned s, unsigned a, unsigned c) {
    return s | (a << 3) | (c << 5);
}
inline std::size_t row_sa(unsigned s, unsigned a) { return s | (a << 3); }
inline std::size_t row_cs(unsigned c, unsigned s) { return c | (s << 2); }
inline std::size_t row_sc(unsigned s, unsigned c) { return s | (c << 3); }
inline std::size_t row_ac(unsigned a, unsigned c) { return a | (c << 2); }

// Conditional mechanisms of one agent, kept strictly positive. Binary rows
// store P(bit = 1); world-model rows are full distributions over the eight
// sensor states.
struct Mechanisms {
    std::array<std::array<double, 32>, 2> controller{};  // row_cs(c_t, s_{t+1})
    std::array<std::array<double, 32>, 2> policy{};      // row_sc(s_{t+1}, c_{t+1})
    std::array<std::array<double, 8>, 16> wm{};          // row_ac(a_t, c_t)
    bool has_wm = false;

    static double clamp_binary(double p1) {
        return std::min(std::max(p1, prob::kPositivityFloor),
                        1.0 - prob::kPositivityFloor);
    }
    static void floor_row(std::array<double, 8>& row);
};

struct Experience {
    unsigned s_prev = 0;
    unsigned a_prev = 0;
    unsigned c_prev = 0;
    unsigned s_next = 0;
};

// One simulated agent: its mechanisms plus the sampled experience counters.
// Counters carry a Laplace pseudocount of 1 per cell, so every sampled
// distribution is positive from the first step.
class Agent {
public:
    Agent(VariantSpec spec, const Rng& init_rng);

    const VariantSpec& variant() const { return spec_; }
    Mechanisms& mechanisms() { return mech_; }
    const Mechanisms& mechanisms() const { return mech_; }

    // sample (c_{t+1}, a_{t+1}) given the sensed state and previous
    // controller state; bits drawn independently per node
    std::pair<unsigned, unsigned> act(unsigned s_next, unsigned c_prev,
                                      Rng& rng) const;

    void record(const Experience& e);
    long steps_recorded() const { return recorded_; }

    // sampled P(S_{t+1} | S_t, A_t)
    prob::CondTable empirical_world_model() const;
    // row of the empirical world model as a bare array
    std::array<double, 8> empirical_row(unsigned s, unsigned a) const;
    // sampled P(S_t, A_t, C_t)
    prob::JointTable state_distribution() const;

    prob::CondTable controller_table(int j) const;
    prob::CondTable policy_table(int i) const;
    prob::CondTable internal_world_model() const;

    // the joints the information measures are evaluated on
    measures::LoopJoint build_measure_joints() const;

    void set_uniform_policy();

private:
    VariantSpec spec_;
    Mechanisms mech_;
    std::array<std::int64_t, 128> state_counts_{};
    std::array<std::array<std::int64_t, 8>, 32> trans_counts_{};
    long recorded_ = 0;
};

}  // namespace loopsim::agents
