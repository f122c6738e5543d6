#pragma once

#include <optional>
#include <vector>

#include "loopsim/prob.hpp"

namespace loopsim::measures {

// Canonical variable names shared by every loop-shaped table in the project.
//   st*  sensors at t          at*  actuators at t      ct*  controller at t
//   sn*  sensors at t+1        an*  actuators at t+1    cn*  controller at t+1
//   sp*  predicted sensors at t+1
// Sensor bit 2 is the body-contact bit.
namespace vars {
inline const std::vector<prob::VarId> s_prev{{"st0"}, {"st1"}, {"st2"}};
inline const std::vector<prob::VarId> a_prev{{"at0"}, {"at1"}};
inline const std::vector<prob::VarId> c_prev{{"ct0"}, {"ct1"}};
inline const std::vector<prob::VarId> s_next{{"sn0"}, {"sn1"}, {"sn2"}};
inline const std::vector<prob::VarId> c_next{{"cn0"}, {"cn1"}};
inline const std::vector<prob::VarId> a_next{{"an0"}, {"an1"}};
inline const std::vector<prob::VarId> s_pred{{"sp0"}, {"sp1"}, {"sp2"}};
}  // namespace vars

// The concrete joints one agent induces at a point in time.
//   controller: P(S_{t+1}, C_t, C_{t+1}, A_{t+1})
//   world:      P(S_t, A_t, S_{t+1}) from the empirical world model
//   prediction: P(A_t, C_t, S'_{t+1}) from the internal world model (absent
//               for agents without one)
struct LoopJoint {
    prob::JointTable controller;
    prob::JointTable world;
    std::optional<prob::JointTable> prediction;
};

// Integrated information of the controller:
// sum_j I(C^j_{t+1} ; C^{other}_t | C^j_t, S_{t+1})
double phi_iit(const prob::JointTable& controller_joint);

// Sensory information: sum_j I(C^j_{t+1} ; S_{t+1} | C_t)
double psi_si(const prob::JointTable& controller_joint);

// Control: sum_i I(A^i_{t+1} ; C_{t+1} | S_{t+1})
double psi_c(const prob::JointTable& controller_joint);

// Morphological computation: I(S_{t+1} ; S_t | A_t)
double psi_mc(const prob::JointTable& world_joint);

// Synergistic prediction: D(P || Q*) where Q* is the maximum-entropy
// distribution sharing P's (A,C), (A,S') and (C,S') marginals. Late in a
// run the learned rows sit near the positivity floor and iterative scaling
// slows down considerably, hence the large sweep budget.
double psi_synp(const prob::JointTable& prediction_joint, double tol = 1e-9,
                int max_iter = 200000);

inline double phi_iit(const LoopJoint& j) { return phi_iit(j.controller); }
inline double psi_si(const LoopJoint& j) { return psi_si(j.controller); }
inline double psi_c(const LoopJoint& j) { return psi_c(j.controller); }
inline double psi_mc(const LoopJoint& j) { return psi_mc(j.world); }

// One measurement row. All values in nats.
struct MeasureRecord {
    long step = 0;
    double phi_iit = 0.0;
    double psi_si = 0.0;
    double psi_c = 0.0;
    double phi_eii = 0.0;  // phi_iit * psi_si * psi_c
    double psi_mc = 0.0;
    std::optional<double> psi_synp;
    double success_rate_so_far = 0.0;
};

// evaluate every applicable measure on the joint
MeasureRecord evaluate(const LoopJoint& j, long step, double success_rate_so_far);

}  // namespace loopsim::measures
