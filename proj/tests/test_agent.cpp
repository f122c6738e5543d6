#include <doctest.h>

#include <cmath>

#include "loopsim/agent.hpp"
#include "support/oracles.hpp"

using namespace loopsim;
using agents::Agent;
using agents::Experience;
using agents::Topology;
using agents::VariantSpec;
using agents::WorldModelMode;

namespace {

VariantSpec lwm_spec(Topology topo = Topology::complete, long horizon = -1) {
    return VariantSpec{WorldModelMode::lwm, topo, horizon};
}

void set_uniform_mechanisms(Agent& a) {
    for (int j = 0; j < 2; ++j) a.mechanisms().controller[j].fill(0.5);
    for (int i = 0; i < 2; ++i) a.mechanisms().policy[i].fill(0.5);
    for (auto& row : a.mechanisms().wm) row.fill(1.0 / 8.0);
}

}  // namespace

TEST_CASE("act: point-mass rows act deterministically") {
    Agent a(lwm_spec(), Rng(1));
    for (int j = 0; j < 2; ++j)
        a.mechanisms().controller[j].fill(agents::Mechanisms::clamp_binary(1.0));
    a.mechanisms().policy[0].fill(agents::Mechanisms::clamp_binary(0.0));
    a.mechanisms().policy[1].fill(agents::Mechanisms::clamp_binary(1.0));
    Rng rng(2);
    for (int rep = 0; rep < 100; ++rep) {
        const auto [c, act] = a.act(3, 1, rng);
        CHECK(c == 3u);
        CHECK(act == 2u);
    }
}

TEST_CASE("act: uniform rows produce uniform frequencies within 3 sigma") {
    Agent a(lwm_spec(), Rng(3));
    set_uniform_mechanisms(a);
    Rng rng(4);
    const int n = 100000;
    std::array<int, 4> c_counts{}, a_counts{};
    for (int rep = 0; rep < n; ++rep) {
        const auto [c, act] = a.act(5, 2, rng);
        ++c_counts[c];
        ++a_counts[act];
    }
    const double sigma = std::sqrt(0.25 * 0.75 / n);
    for (int k = 0; k < 4; ++k) {
        CHECK(std::abs(c_counts[k] / double(n) - 0.25) <= 3.0 * sigma);
        CHECK(std::abs(a_counts[k] / double(n) - 0.25) <= 3.0 * sigma);
    }
}

TEST_CASE("split controller rows are constant in the other bit") {
    Agent a(VariantSpec{WorldModelMode::lwm, Topology::split, -1}, Rng(5));
    for (int j = 0; j < 2; ++j)
        for (unsigned s = 0; s < 8; ++s)
            for (unsigned own = 0; own < 2; ++own) {
                const unsigned c0 = j == 0 ? own : own << 1;
                const unsigned c1 = c0 | (j == 0 ? 2u : 1u);  // flip the other bit
                CHECK(a.mechanisms().controller[j][agents::row_cs(c0, s)] ==
                      a.mechanisms().controller[j][agents::row_cs(c1, s)]);
            }
    // but the rows do react to the sensor state
    CHECK(a.mechanisms().controller[0][agents::row_cs(0, 0)] !=
          a.mechanisms().controller[0][agents::row_cs(0, 3)]);
}

TEST_CASE("record: Laplace prior gives uniform tables, counting shifts them") {
    Agent a(lwm_spec(), Rng(6));
    const auto fresh = a.empirical_world_model();
    for (std::size_t r = 0; r < fresh.row_count(); ++r)
        for (std::size_t t = 0; t < 8; ++t)
            CHECK(fresh.row_value(r, t) == doctest::Approx(1.0 / 8.0));
    const auto state = a.state_distribution();
    for (std::size_t i = 0; i < state.size(); ++i)
        CHECK(state[i] == doctest::Approx(1.0 / 128.0));

    a.record({2, 1, 0, 5});
    const auto one = a.empirical_world_model();
    CHECK(one.row_value(agents::row_sa(2, 1), 5) == doctest::Approx(2.0 / 9.0));
    CHECK(one.row_value(agents::row_sa(2, 1), 0) == doctest::Approx(1.0 / 9.0));
    CHECK(a.state_distribution()[agents::idx_sac(2, 1, 0)] ==
          doctest::Approx(2.0 / 129.0));
}

TEST_CASE("sampling horizon freezes the transition counts only") {
    Agent a(VariantSpec{WorldModelMode::pwm, Topology::complete, 50}, Rng(7));
    for (int k = 0; k < 50; ++k) a.record({1, 1, 1, 4});
    const auto frozen = a.empirical_world_model();
    const auto state_before = a.state_distribution();
    a.record({1, 1, 1, 4});  // step 51
    const auto after = a.empirical_world_model();
    for (std::size_t r = 0; r < 32; ++r)
        for (std::size_t t = 0; t < 8; ++t)
            CHECK(after.row_value(r, t) == frozen.row_value(r, t));
    // the state distribution keeps sampling
    CHECK(a.state_distribution()[agents::idx_sac(1, 1, 1)] >
          state_before[agents::idx_sac(1, 1, 1)]);
}

TEST_CASE("empirical world model converges to point masses under forced moves") {
    Agent a(lwm_spec(), Rng(8));
    for (int k = 0; k < 10000; ++k) a.record({3, 2, 0, 6});
    const auto wm = a.empirical_world_model();
    const auto row = wm.row(agents::row_sa(3, 2));
    for (std::size_t t = 0; t < 8; ++t)
        CHECK(std::abs(row[t] - (t == 6 ? 1.0 : 0.0)) < 0.02);
}

TEST_CASE("fresh agent with uniform mechanisms scores zero on every measure") {
    Agent a(lwm_spec(), Rng(9));
    set_uniform_mechanisms(a);
    const auto joints = a.build_measure_joints();
    const auto rec = measures::evaluate(joints, 0, 0.0);
    CHECK(std::abs(rec.phi_iit) <= 1e-12);
    CHECK(std::abs(rec.psi_si) <= 1e-12);
    CHECK(std::abs(rec.psi_c) <= 1e-12);
    CHECK(std::abs(rec.psi_mc) <= 1e-12);
    CHECK(std::abs(*rec.psi_synp) <= 1e-9);
}

TEST_CASE("build_measure_joints equals the hand enumeration") {
    Agent a(lwm_spec(), Rng(10));
    Rng fill(11);
    for (int j = 0; j < 2; ++j)
        for (auto& p : a.mechanisms().controller[j]) p = 0.1 + 0.8 * fill.uniform();
    for (int i = 0; i < 2; ++i)
        for (auto& p : a.mechanisms().policy[i]) p = 0.1 + 0.8 * fill.uniform();
    for (int k = 0; k < 257; ++k)
        a.record({static_cast<unsigned>(fill.below(8)),
                  static_cast<unsigned>(fill.below(4)),
                  static_cast<unsigned>(fill.below(4)),
                  static_cast<unsigned>(fill.below(8))});

    // independent reconstruction of P(ct, sn, cn, an) from counts and rows
    const auto state = a.state_distribution();
    const auto ewm = a.empirical_world_model();
    std::array<double, 512> want{};
    for (unsigned st = 0; st < 8; ++st)
        for (unsigned at = 0; at < 4; ++at)
            for (unsigned ct = 0; ct < 4; ++ct)
                for (unsigned sn = 0; sn < 8; ++sn) {
                    const double base = state[agents::idx_sac(st, at, ct)] *
                                        ewm.row_value(agents::row_sa(st, at), sn);
                    for (unsigned cn = 0; cn < 4; ++cn) {
                        double pc = base;
                        for (int j = 0; j < 2; ++j) {
                            const double p1 =
                                a.mechanisms().controller[j][agents::row_cs(ct, sn)];
                            pc *= (cn >> j) & 1u ? p1 : 1.0 - p1;
                        }
                        for (unsigned an = 0; an < 4; ++an) {
                            double pa = pc;
                            for (int i = 0; i < 2; ++i) {
                                const double p1 =
                                    a.mechanisms().policy[i][agents::row_sc(sn, cn)];
                                pa *= (an >> i) & 1u ? p1 : 1.0 - p1;
                            }
                            want[ct | (sn << 2) | (cn << 5) | (an << 7)] += pa;
                        }
                    }
                }

    const auto joints = a.build_measure_joints();
    REQUIRE(joints.controller.size() == 512);
    for (std::size_t i = 0; i < 512; ++i)
        CHECK(joints.controller[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("split agents have exactly zero integrated information") {
    Agent a(VariantSpec{WorldModelMode::lwm, Topology::split, -1}, Rng(12));
    Rng fill(13);
    for (int k = 0; k < 300; ++k)
        a.record({static_cast<unsigned>(fill.below(8)),
                  static_cast<unsigned>(fill.below(4)),
                  static_cast<unsigned>(fill.below(4)),
                  static_cast<unsigned>(fill.below(8))});
    const auto joints = a.build_measure_joints();
    CHECK(std::abs(measures::phi_iit(joints)) <= 1e-12);
    // the complete sibling with the same seed generally integrates
    Agent b(lwm_spec(), Rng(12));
    for (int k = 0; k < 300; ++k)
        b.record({static_cast<unsigned>(fill.below(8)),
                  static_cast<unsigned>(fill.below(4)),
                  static_cast<unsigned>(fill.below(4)),
                  static_cast<unsigned>(fill.below(8))});
    CHECK(measures::phi_iit(b.build_measure_joints()) > 1e-6);
}

TEST_CASE("mechanism rows stay distributions after initialization") {
    for (auto topo : {Topology::complete, Topology::split}) {
        Agent a(VariantSpec{WorldModelMode::lwm, topo, -1}, Rng(14));
        for (int j = 0; j < 2; ++j)
            for (double p : a.mechanisms().controller[j]) {
                CHECK(p >= prob::kPositivityFloor);
                CHECK(p <= 1.0 - prob::kPositivityFloor);
            }
        for (const auto& row : a.mechanisms().wm) {
            double sum = 0.0;
            for (double p : row) {
                CHECK(p >= prob::kPositivityFloor);
                sum += p;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("identical seeds give identical agents") {
    Agent a(lwm_spec(), Rng(999));
    Agent b(lwm_spec(), Rng(999));
    for (int j = 0; j < 2; ++j)
        for (std::size_t r = 0; r < 32; ++r)
            CHECK(a.mechanisms().controller[j][r] == b.mechanisms().controller[j][r]);
    for (const auto& [ra, rb] :
         std::vector<std::pair<const std::array<double, 8>*,
                               const std::array<double, 8>*>>{
             {&a.mechanisms().wm[3], &b.mechanisms().wm[3]}})
        for (int k = 0; k < 8; ++k) CHECK((*ra)[k] == (*rb)[k]);
}
