#pragma once

#include <limits>
#include <utility>

#include "causebound/error.hpp"

namespace causebound {

/// Absolute tolerance for simplex membership and interval validation at type
/// boundaries. Values within this distance of [0,1] are clamped exactly onto it.
inline constexpr double kProbTol = 1e-12;

/// Validate a probability, clamping rounding residue within kProbTol onto [0,1].
double checked_probability(double value, const char* what);

/// The two potential-response chances for an exposed responder:
/// p1 = chance the response occurs under exposure, p0 = the counterfactual
/// chance it occurs without exposure, both conditional on the same background
/// stratum and on exposure having happened.
struct MarginalChances {
    double p1;
    double p0;

    MarginalChances(double p1_, double p0_)
        : p1(checked_probability(p1_, "p1")), p0(checked_probability(p0_, "p0")) {}
};

/// Ordered pair bounding PC or PC*: 0 <= lower <= upper <= 1.
struct UncertaintyInterval {
    double lower;
    double upper;

    UncertaintyInterval(double lower_, double upper_);

    double length() const { return upper - lower; }
    bool contains(double p) const { return lower <= p && p <= upper; }
};

/// Full joint law of the potential-response pair (R0, R1), with
/// q_ij = chance(R0 = i, R1 = j). This is the object the data can never
/// identify; the bounds machinery replaces it by its marginals.
struct PotentialJoint {
    double q00;
    double q01;
    double q10;
    double q11;

    PotentialJoint(double q00_, double q01_, double q10_, double q11_);

    /// Marginal chance of response under exposure, q01 + q11.
    double p1() const { return q01 + q11; }
    /// Marginal chance of response without exposure, q10 + q11.
    double p0() const { return q10 + q11; }

    /// The joint with the given marginals and the given value of q11.
    /// q11 must lie in feasible_q11_range(m).
    static PotentialJoint from_marginals(const MarginalChances& m, double q11);
};

/// Exposure chances entering the PC* bounds: phi = chance of exposure given a
/// positive response, theta = prior chance of exposure.
struct ExposureChances {
    double phi;
    double theta;

    ExposureChances(double phi_, double theta_)
        : phi(checked_probability(phi_, "phi")), theta(checked_probability(theta_, "theta")) {}
};

/// Nonnegative extended real; +infinity encodes p1 > 0 with p0 = 0.
struct RiskRatio {
    double value;

    bool is_infinite() const { return value == std::numeric_limits<double>::infinity(); }
};

/// pc_star_bounds result with the coherence flag: `coherent` is false when the
/// supplied (phi, theta) pair admits no joint law (theta = 0 with phi > 0), or
/// when rounding pushed the raw lower expression above the upper bound and it
/// was clamped back.
struct PcStarResult {
    UncertaintyInterval interval;
    bool coherent;
};

/// Causal risk ratio p1/p0. +infinity when p0 = 0 and p1 > 0; throws
/// UndefinedRatio when both chances vanish (no causal contrast exists).
RiskRatio risk_ratio(const MarginalChances& m);

/// Lower bound on PC from the risk ratio alone: max(0, 1 - 1/rr).
/// Returns 1 for an infinite ratio. Nondecreasing in rr, 0 for rr <= 1.
double pc_lower(RiskRatio rr);

/// Interval bounds on PC from the marginal chances:
///   lower = max(0, 1 - p0/p1),  upper = min(1, (1-p0)/p1).
/// Requires p1 > 0 (the conditioning event is response-under-exposure).
UncertaintyInterval pc_bounds(const MarginalChances& m);

/// As pc_bounds but with the upper bound fixed at 1, the form used when the
/// response chance under exposure is not large enough to sharpen it.
UncertaintyInterval pc_bounds_simple(const MarginalChances& m);

/// Interval bounds on PC* when the fact of exposure is itself uncertain:
///   upper = phi,  lower = max(0, 1 - (1-phi)/(1-theta)).
/// Requires theta < 1. See PcStarResult for the coherence flag.
UncertaintyInterval pc_star_bounds(const ExposureChances& e);
PcStarResult pc_star_bounds_checked(const ExposureChances& e);

/// PC* bounds from PC bounds: both endpoints scale by the exposure chance phi.
UncertaintyInterval pc_star_from_pc(const UncertaintyInterval& pc, double phi);

/// PC evaluated on a known joint law: q01 / (q01 + q11).
double pc_from_joint(const PotentialJoint& j);

/// Feasible range of q11 = chance(R0=1, R1=1) compatible with the marginals:
/// [max(0, p0+p1-1), min(p0, p1)] (the Frechet band).
std::pair<double, double> feasible_q11_range(const MarginalChances& m);

/// Independent oracle for pc_bounds: enumerate `steps` joints across the
/// feasible q11 range (both endpoints evaluated exactly, not grid-rounded),
/// evaluate pc_from_joint on each, and return (min, max). Agrees with
/// pc_bounds at the endpoints by construction of the sweep.
UncertaintyInterval brute_force_pc_range(const MarginalChances& m, int steps);

} // namespace causebound
