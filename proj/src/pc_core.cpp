#include "causebound/pc_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace causebound {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::UndefinedRatio: return "UndefinedRatio";
    case ErrorCode::DegenerateConditioning: return "DegenerateConditioning";
    case ErrorCode::DegenerateTheta: return "DegenerateTheta";
    case ErrorCode::ZeroCell: return "ZeroCell";
    case ErrorCode::RetrospectiveDesign: return "RetrospectiveDesign";
    case ErrorCode::ZeroRow: return "ZeroRow";
    case ErrorCode::ZeroBaselineRisk: return "ZeroBaselineRisk";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::TooFewDraws: return "TooFewDraws";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NoExposedResponders: return "NoExposedResponders";
    case ErrorCode::EmptyArm: return "EmptyArm";
    case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

double checked_probability(double value, const char* what) {
    if (!(std::isfinite(value)) || value < -kProbTol || value > 1.0 + kProbTol) {
        throw Error(ErrorCode::ValidationError,
                    std::string(what) + " = " + num(value) + " is not a probability in [0,1]");
    }
    return std::clamp(value, 0.0, 1.0);
}

UncertaintyInterval::UncertaintyInterval(double lower_, double upper_)
    : lower(checked_probability(lower_, "interval lower")),
      upper(checked_probability(upper_, "interval upper")) {
    if (lower > upper) {
        if (lower - upper > kProbTol) {
            throw Error(ErrorCode::ValidationError,
                        "interval has lower " + num(lower) + " > upper " + num(upper));
        }
        lower = upper;
    }
}

PotentialJoint::PotentialJoint(double q00_, double q01_, double q10_, double q11_)
    : q00(checked_probability(q00_, "q00")),
      q01(checked_probability(q01_, "q01")),
      q10(checked_probability(q10_, "q10")),
      q11(checked_probability(q11_, "q11")) {
    const double total = q00 + q01 + q10 + q11;
    if (std::abs(total - 1.0) > kProbTol) {
        throw Error(ErrorCode::ValidationError,
                    "joint chances sum to " + num(total) + ", expected 1");
    }
}

PotentialJoint PotentialJoint::from_marginals(const MarginalChances& m, double q11) {
    const auto [lo, hi] = feasible_q11_range(m);
    if (q11 < lo - kProbTol || q11 > hi + kProbTol) {
        throw Error(ErrorCode::ValidationError,
                    "q11 = " + num(q11) + " outside feasible range [" + num(lo) + ", " + num(hi) + "]");
    }
    q11 = std::clamp(q11, lo, hi);
    return PotentialJoint(1.0 - m.p1 - m.p0 + q11, m.p1 - q11, m.p0 - q11, q11);
}

RiskRatio risk_ratio(const MarginalChances& m) {
    if (m.p0 == 0.0 && m.p1 == 0.0) {
        throw Error(ErrorCode::UndefinedRatio, "p1 = p0 = 0: no causal contrast exists");
    }
    if (m.p0 == 0.0) {
        return RiskRatio{std::numeric_limits<double>::infinity()};
    }
    return RiskRatio{m.p1 / m.p0};
}

double pc_lower(RiskRatio rr) {
    if (rr.is_infinite()) {
        return 1.0;
    }
    return std::max(0.0, 1.0 - 1.0 / rr.value);
}

UncertaintyInterval pc_bounds(const MarginalChances& m) {
    if (m.p1 == 0.0) {
        throw Error(ErrorCode::DegenerateConditioning,
                    "p1 = 0: response under exposure has no chance");
    }
    const double lower = std::max(0.0, 1.0 - m.p0 / m.p1);
    const double upper = std::min(1.0, (1.0 - m.p0) / m.p1);
    return UncertaintyInterval(lower, upper);
}

UncertaintyInterval pc_bounds_simple(const MarginalChances& m) {
    if (m.p1 == 0.0) {
        throw Error(ErrorCode::DegenerateConditioning,
                    "p1 = 0: response under exposure has no chance");
    }
    return UncertaintyInterval(std::max(0.0, 1.0 - m.p0 / m.p1), 1.0);
}

PcStarResult pc_star_bounds_checked(const ExposureChances& e) {
    if (e.theta == 1.0) {
        throw Error(ErrorCode::DegenerateTheta, "theta = 1: prior exposure is certain");
    }
    const double upper = e.phi;
    // (phi - theta)/(1 - theta) carries the exact sign of phi - theta, so the
    // zero clamp triggers exactly on nonpositive association.
    double lower = std::max(0.0, (e.phi - e.theta) / (1.0 - e.theta));
    bool coherent = !(e.theta == 0.0 && e.phi > 0.0);
    if (lower > upper) {
        lower = upper;
        coherent = false;
    }
    return PcStarResult{UncertaintyInterval(lower, upper), coherent};
}

UncertaintyInterval pc_star_bounds(const ExposureChances& e) {
    return pc_star_bounds_checked(e).interval;
}

UncertaintyInterval pc_star_from_pc(const UncertaintyInterval& pc, double phi) {
    phi = checked_probability(phi, "phi");
    return UncertaintyInterval(pc.lower * phi, pc.upper * phi);
}

double pc_from_joint(const PotentialJoint& j) {
    const double responders = j.q01 + j.q11;
    if (responders == 0.0) {
        throw Error(ErrorCode::DegenerateConditioning,
                    "q01 + q11 = 0: response under exposure has no chance");
    }
    return j.q01 / responders;
}

std::pair<double, double> feasible_q11_range(const MarginalChances& m) {
    return {std::max(0.0, m.p0 + m.p1 - 1.0), std::min(m.p0, m.p1)};
}

UncertaintyInterval brute_force_pc_range(const MarginalChances& m, int steps) {
    if (m.p1 == 0.0) {
        throw Error(ErrorCode::DegenerateConditioning,
                    "p1 = 0: response under exposure has no chance");
    }
    if (steps < 2) {
        throw Error(ErrorCode::ValidationError, "steps must be >= 2, got " + std::to_string(steps));
    }
    const auto [lo, hi] = feasible_q11_range(m);
    double pc_min = std::numeric_limits<double>::infinity();
    double pc_max = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < steps; ++k) {
        // Endpoints taken exactly so the oracle and the closed form meet
        // without grid error.
        const double q11 = (k == 0) ? lo
                         : (k == steps - 1) ? hi
                         : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1);
        const double pc = pc_from_joint(PotentialJoint::from_marginals(m, q11));
        pc_min = std::min(pc_min, pc);
        pc_max = std::max(pc_max, pc);
    }
    return UncertaintyInterval(pc_min, pc_max);
}

} // namespace causebound
