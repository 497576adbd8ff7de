#include <doctest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "causebound/oracle_sim.hpp"

using namespace causebound;

namespace {

bool throws_code(ErrorCode expected, const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code() == expected;
    }
    return false;
}

// Joint with marginals (0.30, 0.12) at the given q11.
PotentialJoint trial_joint(double q11) {
    return PotentialJoint::from_marginals(MarginalChances(0.30, 0.12), q11);
}

} // namespace

TEST_CASE("simulate degenerate joints") {
    const PopulationSpec only01{PotentialJoint(0.0, 1.0, 0.0, 0.0),
                                ExposureMechanism::exogenous(0.3), 100, 5};
    const PopulationTally t = simulate(only01);
    CHECK(t.n == 100);
    CHECK(t.count(0, 0, 1) + t.count(1, 0, 1) == 100);

    const PopulationSpec never_exposed{PotentialJoint(0.25, 0.25, 0.25, 0.25),
                                       ExposureMechanism::exogenous(0.0), 1000, 5};
    const PopulationTally u = simulate(never_exposed);
    std::int64_t exposed = 0;
    for (int r0 = 0; r0 < 2; ++r0) {
        for (int r1 = 0; r1 < 2; ++r1) {
            exposed += u.count(1, r0, r1);
        }
    }
    CHECK(exposed == 0);
}

TEST_CASE("cell frequencies concentrate on the joint") {
    const PotentialJoint joint(0.7, 0.18, 0.0, 0.12);
    const std::int64_t n = 1000000;
    const PopulationTally t = simulate(PopulationSpec{joint, ExposureMechanism::exogenous(0.5),
                                                      n, 97});
    const double qs[4] = {joint.q00, joint.q01, joint.q10, joint.q11};
    for (int cell = 0; cell < 4; ++cell) {
        const int r0 = cell / 2;
        const int r1 = cell % 2;
        const double freq =
            static_cast<double>(t.count(0, r0, r1) + t.count(1, r0, r1)) / static_cast<double>(n);
        const double sigma = std::sqrt(qs[cell] * (1.0 - qs[cell]) / static_cast<double>(n));
        CHECK(std::abs(freq - qs[cell]) <= 3.0 * sigma + 1e-12);
    }
}

TEST_CASE("empirical pc") {
    const PopulationTally only01 = simulate(PopulationSpec{PotentialJoint(0.0, 1.0, 0.0, 0.0),
                                                           ExposureMechanism::exogenous(0.5),
                                                           1000, 7});
    CHECK(empirical_pc(only01) == 1.0);

    const PopulationTally only11 = simulate(PopulationSpec{PotentialJoint(0.7, 0.0, 0.0, 0.3),
                                                           ExposureMechanism::exogenous(0.5),
                                                           1000, 7});
    CHECK(empirical_pc(only11) == 0.0);

    // Midpoint of the feasible q11 range: PC = (p1 - q11)/p1 = 0.8.
    const std::int64_t n = 1000000;
    const PopulationTally mid = simulate(PopulationSpec{trial_joint(0.06),
                                                        ExposureMechanism::exogenous(0.5), n, 7});
    const double pc = empirical_pc(mid);
    const double m = static_cast<double>(mid.count(1, 0, 1) + mid.count(1, 1, 1));
    CHECK(std::abs(pc - 0.8) <= 3.0 * std::sqrt(0.8 * 0.2 / m));

    const PopulationTally none = simulate(PopulationSpec{PotentialJoint(1.0, 0.0, 0.0, 0.0),
                                                         ExposureMechanism::exogenous(0.5),
                                                         100, 7});
    CHECK(throws_code(ErrorCode::NoExposedResponders, [&] { empirical_pc(none); }));
}

TEST_CASE("empirical marginals") {
    const std::int64_t n = 1000000;
    const PopulationTally t = simulate(PopulationSpec{trial_joint(0.06),
                                                      ExposureMechanism::exogenous(0.5), n, 15});
    const MarginalChances m = empirical_marginals(t);
    CHECK(std::abs(m.p1 - 0.30) <= 3.0 * std::sqrt(0.30 * 0.70 / (n / 2.0)));
    CHECK(std::abs(m.p0 - 0.12) <= 3.0 * std::sqrt(0.12 * 0.88 / (n / 2.0)));

    const PopulationTally all_exposed = simulate(PopulationSpec{
        trial_joint(0.06), ExposureMechanism::exogenous(1.0), 100, 15});
    CHECK(throws_code(ErrorCode::EmptyArm, [&] { empirical_marginals(all_exposed); }));

    // One exposed responder, one unexposed individual: p1 = 1 exactly.
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        const PopulationTally two = simulate(PopulationSpec{PotentialJoint(0.0, 1.0, 0.0, 0.0),
                                                            ExposureMechanism::exogenous(0.5), 2,
                                                            seed});
        std::int64_t exposed = two.count(1, 0, 1);
        if (exposed == 1) {
            CHECK(empirical_marginals(two).p1 == 1.0);
            return;
        }
    }
    FAIL("no seed in 0..63 split one exposed / one unexposed");
}

TEST_CASE("exogeneity: potential-outcome law matches across arms") {
    const PotentialJoint joint(0.4, 0.25, 0.15, 0.2);
    const std::int64_t n = 1000000;
    const PopulationTally t = simulate(PopulationSpec{joint, ExposureMechanism::exogenous(0.4),
                                                      n, 29});
    std::int64_t n1 = 0;
    std::int64_t n0 = 0;
    for (int r0 = 0; r0 < 2; ++r0) {
        for (int r1 = 0; r1 < 2; ++r1) {
            n1 += t.count(1, r0, r1);
            n0 += t.count(0, r0, r1);
        }
    }
    const double qs[4] = {joint.q00, joint.q01, joint.q10, joint.q11};
    for (int cell = 0; cell < 4; ++cell) {
        const int r0 = cell / 2;
        const int r1 = cell % 2;
        const double f1 = static_cast<double>(t.count(1, r0, r1)) / static_cast<double>(n1);
        const double f0 = static_cast<double>(t.count(0, r0, r1)) / static_cast<double>(n0);
        const double sigma = std::sqrt(qs[cell] * (1.0 - qs[cell]) *
                                       (1.0 / static_cast<double>(n1) +
                                        1.0 / static_cast<double>(n0)));
        CHECK(std::abs(f1 - f0) <= 4.0 * sigma);
    }
}

TEST_CASE("simulate is deterministic and thread-count independent") {
    const PopulationSpec spec{trial_joint(0.06), ExposureMechanism::exogenous(0.5), 300000, 33};
    const PopulationTally a = simulate(spec, 1);
    const PopulationTally b = simulate(spec, 4);
    CHECK(a.counts == b.counts);
    const PopulationTally c = simulate(spec, 1);
    CHECK(a.counts == c.counts);

    PopulationSpec other = spec;
    other.seed = 34;
    CHECK(simulate(other).counts != a.counts);
}

TEST_CASE("constant confounding table is the exogenous mechanism") {
    const PopulationSpec exo{trial_joint(0.06), ExposureMechanism::exogenous(0.5), 200000, 51};
    const PopulationSpec constant{trial_joint(0.06),
                                  ExposureMechanism::confounded_cells({0.5, 0.5, 0.5, 0.5}),
                                  200000, 51};
    CHECK(simulate(exo).counts == simulate(constant).counts);
    CHECK(sufficiency_violation_demo(constant).contained);
}

TEST_CASE("containment under exogenous exposure, violation under confounding") {
    const ContainmentReport exo = sufficiency_violation_demo(
        PopulationSpec{trial_joint(0.06), ExposureMechanism::exogenous(0.5), 1000000, 11});
    CHECK(exo.contained);

    // Exposure loaded onto the (R0,R1) = (1,1) cell biases the arm marginals.
    const PotentialJoint adversarial(0.3, 0.05, 0.05, 0.6);
    const ContainmentReport confounded = sufficiency_violation_demo(
        PopulationSpec{adversarial, ExposureMechanism::confounded_cells({0.1, 0.1, 0.1, 0.9}),
                       1000000, 11});
    CHECK_FALSE(confounded.contained);
    CHECK(confounded.empirical_pc < confounded.bounds.lower);

    const ContainmentReport exogenized = sufficiency_violation_demo(
        PopulationSpec{adversarial, ExposureMechanism::exogenous(0.58), 1000000, 11});
    CHECK(exogenized.contained);
}

TEST_CASE("a violating confounded spec exists on a small search grid") {
    const PotentialJoint joints[] = {PotentialJoint(0.3, 0.05, 0.05, 0.6),
                                     PotentialJoint(0.25, 0.25, 0.25, 0.25),
                                     PotentialJoint(0.7, 0.18, 0.0, 0.12)};
    const std::array<double, 4> patterns[] = {{0.1, 0.1, 0.1, 0.9},
                                              {0.9, 0.1, 0.9, 0.1},
                                              {0.5, 0.9, 0.1, 0.5}};
    int violations = 0;
    for (const auto& joint : joints) {
        for (const auto& pattern : patterns) {
            const ContainmentReport r = sufficiency_violation_demo(
                PopulationSpec{joint, ExposureMechanism::confounded_cells(pattern), 50000, 63});
            if (!r.contained) {
                ++violations;
            }
        }
    }
    CHECK(violations >= 1);
}

TEST_CASE("extremal joints attain the bounds") {
    // q11 at its maximum: PC equals the lower bound 0.6.
    const std::int64_t n = 1000000;
    const PopulationTally at_max = simulate(PopulationSpec{trial_joint(0.12),
                                                           ExposureMechanism::exogenous(0.5),
                                                           n, 71});
    const double pc_max = empirical_pc(at_max);
    const double m = static_cast<double>(at_max.count(1, 0, 1) + at_max.count(1, 1, 1));
    CHECK(std::abs(pc_max - 0.6) <= 3.0 * std::sqrt(0.6 * 0.4 / m));

    // q11 = 0: the (1,1) cell is empty, so PC is exactly the upper bound 1.
    const PopulationTally at_min = simulate(PopulationSpec{trial_joint(0.0),
                                                           ExposureMechanism::exogenous(0.5),
                                                           n, 71});
    CHECK(empirical_pc(at_min) == 1.0);
}

TEST_CASE("population spec json round-trip") {
    const PopulationSpec spec{trial_joint(0.06),
                              ExposureMechanism::confounded_cells({0.1, 0.2, 0.3, 0.4}), 5000,
                              123};
    std::istringstream in(serialize(spec));
    const PopulationSpec back = parse_population_spec(in);
    CHECK(back.joint.q00 == spec.joint.q00);
    CHECK(back.joint.q11 == spec.joint.q11);
    CHECK(back.exposure.confounded);
    CHECK(back.exposure.cell_theta == spec.exposure.cell_theta);
    CHECK(back.n == spec.n);
    CHECK(back.seed == spec.seed);
    CHECK(simulate(back).counts == simulate(spec).counts);

    std::istringstream bad(R"({"joint":{"q00":1,"q01":0,"q10":0,"q11":0},"n":10,"seed":1,
                               "exposure":{"unknown":{}}})");
    CHECK(throws_code(ErrorCode::ValidationError, [&] { parse_population_spec(bad); }));
}

TEST_CASE("bundled population specs behave as documented") {
    const PopulationSpec exo =
        parse_population_spec_file(std::string(CAUSEBOUND_DATA_DIR) + "/population_exogenous.json");
    CHECK_FALSE(exo.exposure.confounded);
    CHECK(exo.joint.p1() == doctest::Approx(0.30).epsilon(1e-12));
    CHECK(exo.joint.p0() == doctest::Approx(0.12).epsilon(1e-12));

    const PopulationSpec conf = parse_population_spec_file(std::string(CAUSEBOUND_DATA_DIR) +
                                                           "/population_confounded.json");
    CHECK(conf.exposure.confounded);
    CHECK(conf.exposure.cell_theta[3] == 0.9);
}
