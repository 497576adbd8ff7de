#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "causebound/error.hpp"
#include "causebound/pc_core.hpp"

namespace causebound {

struct BetaParams {
    double alpha;
    double beta;

    BetaParams(double alpha_, double beta_) : alpha(alpha_), beta(beta_) {
        if (!(alpha > 0.0) || !(beta > 0.0)) {
            throw Error(ErrorCode::ValidationError, "beta parameters must be positive");
        }
    }
};

struct BetaMoments {
    double mean;
    double sd;
};

BetaMoments beta_moments(const BetaParams& b);

struct BinomialData {
    std::int64_t successes;
    std::int64_t trials;

    BinomialData(std::int64_t successes_, std::int64_t trials_)
        : successes(successes_), trials(trials_) {
        if (successes < 0 || trials < 0 || successes > trials) {
            throw Error(ErrorCode::ValidationError, "need 0 <= successes <= trials");
        }
    }
};

/// Conjugate update: Beta(alpha + successes, beta + failures).
BetaParams posterior_update(const BetaParams& prior, const BinomialData& data);

/// One uncertain chance: a Beta prior plus optional binomial evidence.
struct ChanceModel {
    BetaParams prior;
    std::optional<BinomialData> data;

    BetaParams posterior() const { return data ? posterior_update(prior, *data) : prior; }
};

enum class ModelMode { generative, direct };

const char* to_string(ModelMode mode);
ModelMode model_mode_from_string(const std::string& name);

/// Statistical model for the random uncertainty interval.
///
/// generative mode places chances on (theta, p1, p0) and derives the exposure
/// chance phi by Bayes, so the event {lower bound = 0} depends only on the
/// (p1, p0) pair. direct mode places chances on (phi, theta) as separately
/// assessed quantities, so the upper bound's distribution depends only on phi.
/// theta carries a prior but never a data channel.
struct ModelSpec {
    ModelMode mode;
    BetaParams theta_prior;
    std::optional<ChanceModel> p1;  // generative only
    std::optional<ChanceModel> p0;  // generative only
    std::optional<ChanceModel> phi; // direct only

    /// Enforces that exactly the declared mode's chances are present.
    void validate() const;
};

/// Spec file contents: the model plus its sampling protocol.
struct ModelRun {
    ModelSpec spec;
    std::int64_t n = 50000;
    std::optional<std::uint64_t> seed;
    std::int64_t burn_in = 0;
    std::int64_t thin = 1;
};

/// Seeded Monte-Carlo sample of the random interval. Regenerating with the
/// same (spec, n, seed, burn_in, thin) yields bit-identical arrays, for any
/// worker count.
struct DrawSet {
    std::uint64_t seed;
    std::int64_t n;
    Eigen::ArrayXd lowers;
    Eigen::ArrayXd uppers;
    ModelMode mode;
    std::string spec_hash;
};

struct BoundsPair {
    double lower;
    double upper;
};

/// Interval endpoints for one generative-mode draw. The lower bound's zero
/// clamp is computed from theta*(p1 - p0), so it triggers exactly on
/// p1 <= p0 regardless of the theta value.
BoundsPair generative_interval_raw(double theta, double p1, double p0) noexcept;

/// Interval endpoints for one direct-mode draw; theta = 1 takes the
/// continuous limit instead of throwing, for sampler robustness.
BoundsPair direct_interval_raw(double phi, double theta) noexcept;

UncertaintyInterval generative_interval(double theta, double p1, double p0);
UncertaintyInterval direct_interval(double phi, double theta);

/// Draw n intervals. Each chance is drawn independently from its
/// posterior-updated Beta on its own substream, derived from
/// (seed, block, chance); blocks are 65536 draws wide, and burn-in/thinning
/// apply within each block's stream (skip burn_in draws, then keep every
/// thin-th). Changing one chance's prior therefore cannot perturb another
/// chance's draws, and results are independent of `threads`.
DrawSet sample_draws(const ModelSpec& spec, std::int64_t n, std::uint64_t seed,
                     std::int64_t burn_in = 0, std::int64_t thin = 1, int threads = 1);

/// Fraction of draws whose lower bound is exactly 0 (the point mass of the
/// mixture).
double prob_lower_zero(const DrawSet& d);

/// Plug-in interval from posterior expectations of the model's chances.
UncertaintyInterval plug_in_interval(const ModelSpec& spec);

/// FNV-1a hash of the canonical spec serialization, as 16 hex digits.
std::string spec_hash(const ModelSpec& spec);

ModelRun parse_model_run(std::istream& in);
ModelRun parse_model_run_file(const std::string& path);
std::string serialize(const ModelSpec& spec, int indent = 2);

/// CSV export: comment header (seed, n, mode, spec hash) then lower,upper
/// rows at 17 significant digits.
void write_draws_csv(std::ostream& out, const DrawSet& d);
DrawSet read_draws_csv(std::istream& in);

} // namespace causebound
