#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "causebound/error.hpp"
#include "causebound/pc_core.hpp"

namespace causebound {

/// How exposure is assigned to an individual with potential outcomes
/// (r0, r1): a single chance (exogenous) or one chance per cell (confounded).
/// A constant cell table is identical in law to the exogenous mechanism.
struct ExposureMechanism {
    bool confounded;
    double theta;                      // exogenous chance
    std::array<double, 4> cell_theta;  // confounded: index r0*2 + r1

    static ExposureMechanism exogenous(double theta);
    static ExposureMechanism confounded_cells(const std::array<double, 4>& cells);

    double chance(int r0, int r1) const {
        return confounded ? cell_theta[static_cast<std::size_t>(r0 * 2 + r1)] : theta;
    }
};

struct PopulationSpec {
    PotentialJoint joint;
    ExposureMechanism exposure;
    std::int64_t n;
    std::uint64_t seed;
};

/// Cell counts over (E, R0, R1); index e*4 + r0*2 + r1.
struct PopulationTally {
    std::array<std::int64_t, 8> counts{};
    std::int64_t n = 0;

    std::int64_t count(int e, int r0, int r1) const {
        return counts[static_cast<std::size_t>(e * 4 + r0 * 2 + r1)];
    }
};

/// Generate n individuals: (R0, R1) from the joint, then E from the
/// cell-appropriate exposure chance. Deterministic per seed, independent of
/// worker count (population generated in 65536-individual block substreams).
PopulationTally simulate(const PopulationSpec& spec, int threads = 1);

/// Empirical PC among exposed responders:
/// count(E=1, R0=0, R1=1) / count(E=1, R1=1).
double empirical_pc(const PopulationTally& t);

/// Arm-wise response frequencies: p1 from the exposed arm using R1, p0 from
/// the unexposed arm using R0.
MarginalChances empirical_marginals(const PopulationTally& t);

struct ContainmentReport {
    double empirical_pc;
    MarginalChances marginals;
    UncertaintyInterval bounds;
    bool contained;
};

/// Run the population and check whether the empirical PC lies inside the
/// bounds computed from the arm-wise marginals. Under a confounded mechanism
/// the arm marginals are biased and containment is expected to fail.
ContainmentReport sufficiency_violation_demo(const PopulationSpec& spec, int threads = 1);

PopulationSpec parse_population_spec(std::istream& in);
PopulationSpec parse_population_spec_file(const std::string& path);
std::string serialize(const PopulationSpec& spec, int indent = 2);

/// CSV: one row per (e, r0, r1) cell plus header comments with n and seed.
void write_tally_csv(std::ostream& out, const PopulationTally& t, std::uint64_t seed);

} // namespace causebound
