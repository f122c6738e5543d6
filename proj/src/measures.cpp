#include "loopsim/measures.hpp"

namespace loopsim::measures {

using prob::VarId;

double phi_iit(const prob::JointTable& controller_joint) {
    double total = 0.0;
    for (int j = 0; j < 2; ++j) {
        const std::vector<VarId> own_next{vars::c_next[j]};
        const std::vector<VarId> other_prev{vars::c_prev[1 - j]};
        std::vector<VarId> given{vars::c_prev[j]};
        given.insert(given.end(), vars::s_next.begin(), vars::s_next.end());
        total += prob::cond_mutual_information(controller_joint, own_next,
                                               other_prev, given);
    }
    return total;
}

double psi_si(const prob::JointTable& controller_joint) {
    double total = 0.0;
    for (int j = 0; j < 2; ++j) {
        const std::vector<VarId> own_next{vars::c_next[j]};
        total += prob::cond_mutual_information(controller_joint, own_next,
                                               vars::s_next, vars::c_prev);
    }
    return total;
}

double psi_c(const prob::JointTable& controller_joint) {
    double total = 0.0;
    for (int i = 0; i < 2; ++i) {
        const std::vector<VarId> own_next{vars::a_next[i]};
        total += prob::cond_mutual_information(controller_joint, own_next,
                                               vars::c_next, vars::s_next);
    }
    return total;
}

double psi_mc(const prob::JointTable& world_joint) {
    return prob::cond_mutual_information(world_joint, vars::s_next,
                                         vars::s_prev, vars::a_prev);
}

double psi_synp(const prob::JointTable& prediction_joint, double tol,
                int max_iter) {
    std::vector<VarId> ac(vars::a_prev);
    ac.insert(ac.end(), vars::c_prev.begin(), vars::c_prev.end());
    std::vector<VarId> as(vars::a_prev);
    as.insert(as.end(), vars::s_pred.begin(), vars::s_pred.end());
    std::vector<VarId> cs(vars::c_prev);
    cs.insert(cs.end(), vars::s_pred.begin(), vars::s_pred.end());
    // Iterative scaling slows down drastically on near-deterministic
    // tables: late in a run the learned rows sit at the positivity floor
    // and the linear convergence rate approaches one. When the exact fit
    // stalls, the table is lifted further into the interior and refitted;
    // the resulting shift of the divergence is bounded by the lift size
    // times a few hundred log-units, well below the measure's scale.
    for (double lift : {0.0, 1e-9, 1e-6, 1e-4}) {
        const prob::JointTable p =
            lift == 0.0 ? prediction_joint : prediction_joint.positive(lift);
        try {
            const prob::JointTable split = prob::ipf_fit(p, {ac, as, cs}, tol, max_iter);
            return prob::kl_divergence(p, split);
        } catch (const prob::IpfNoConvergence&) {
            if (lift >= 1e-4) throw;
        }
    }
    return 0.0;  // unreachable
}

MeasureRecord evaluate(const LoopJoint& j, long step, double success_rate_so_far) {
    MeasureRecord r;
    r.step = step;
    r.success_rate_so_far = success_rate_so_far;
    r.phi_iit = phi_iit(j);
    r.psi_si = psi_si(j);
    r.psi_c = psi_c(j);
    r.phi_eii = r.phi_iit * r.psi_si * r.psi_c;
    r.psi_mc = psi_mc(j);
    if (j.prediction) r.psi_synp = psi_synp(*j.prediction);
    return r;
}

}  // namespace loopsim::measures
