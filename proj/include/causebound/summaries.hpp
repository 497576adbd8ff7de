#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "causebound/bayes_engine.hpp"
#include "causebound/pc_core.hpp"

namespace causebound {

/// Summary of the mixture posterior: the point mass at lower = 0 reported
/// separately from the continuous part. Conditional fields are absent when no
/// draw has a positive lower bound. Standard deviations use the n denominator.
struct MixtureSummary {
    double prob_lower_zero;
    double upper_mean;
    double upper_sd;
    std::optional<double> lower_mean_given_pos;
    std::optional<double> lower_sd_given_pos;
    double length_mean;
    double length_sd;
    std::optional<double> length_mean_given_pos;
    std::optional<double> length_sd_given_pos;
};

MixtureSummary summarize(const DrawSet& d);

struct CoverageCurve {
    Eigen::ArrayXd grid;   // strictly ascending, within [0,1]
    Eigen::ArrayXd values; // fraction of draws whose interval covers grid[i]
};

CoverageCurve coverage(const DrawSet& d, const Eigen::ArrayXd& grid);

struct HistogramSpec {
    int bins;
    // range fixed at [0,1]

    explicit HistogramSpec(int bins_) : bins(bins_) {
        if (bins < 1) {
            throw Error(ErrorCode::ValidationError, "bins must be >= 1");
        }
    }
};

/// Normalized bin masses over [0,1]; the last bin is closed on the right.
Eigen::ArrayXd density(const Eigen::ArrayXd& samples, const HistogramSpec& spec);

/// Every stride-th interval (1-based indices stride, 2*stride, ..., k*stride),
/// sorted by lower bound, ties by upper bound then draw index.
std::vector<UncertaintyInterval> ordered_subsample(const DrawSet& d, std::int64_t k,
                                                   std::int64_t stride);

/// Single non-random interval from posterior expectations of the chances:
/// the individual-focused counterpart of the random interval.
UncertaintyInterval individual_focused_interval(double phi_bar, double theta_bar);

std::string summary_to_json(const MixtureSummary& s, const DrawSet& d, int indent = 2);

void write_coverage_csv(std::ostream& out, const CoverageCurve& curve);
void write_histogram_csv(std::ostream& out, const Eigen::ArrayXd& masses);
void write_subsample_csv(std::ostream& out, const std::vector<UncertaintyInterval>& intervals);

} // namespace causebound
