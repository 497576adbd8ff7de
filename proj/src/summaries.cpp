#include "causebound/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include <json.hpp>

namespace causebound {

namespace {

double mean_of(const Eigen::ArrayXd& x) { return x.mean(); }

double sd_of(const Eigen::ArrayXd& x) {
    const double m = x.mean();
    return std::sqrt((x - m).square().mean());
}

} // namespace

MixtureSummary summarize(const DrawSet& d) {
    if (d.n < 2) {
        throw Error(ErrorCode::TooFewDraws, "summarize needs at least 2 draws");
    }
    const Eigen::ArrayXd lengths = d.uppers - d.lowers;
    MixtureSummary s{};
    s.prob_lower_zero = prob_lower_zero(d);
    s.upper_mean = mean_of(d.uppers);
    s.upper_sd = sd_of(d.uppers);
    s.length_mean = mean_of(lengths);
    s.length_sd = sd_of(lengths);

    const Eigen::Index pos = (d.lowers > 0.0).count();
    if (pos > 0) {
        Eigen::ArrayXd lower_pos(pos);
        Eigen::ArrayXd length_pos(pos);
        Eigen::Index j = 0;
        for (Eigen::Index k = 0; k < d.lowers.size(); ++k) {
            if (d.lowers[k] > 0.0) {
                lower_pos[j] = d.lowers[k];
                length_pos[j] = lengths[k];
                ++j;
            }
        }
        s.lower_mean_given_pos = mean_of(lower_pos);
        s.lower_sd_given_pos = sd_of(lower_pos);
        s.length_mean_given_pos = mean_of(length_pos);
        s.length_sd_given_pos = sd_of(length_pos);
    }
    return s;
}

CoverageCurve coverage(const DrawSet& d, const Eigen::ArrayXd& grid) {
    if (grid.size() == 0) {
        throw Error(ErrorCode::EmptyGrid, "coverage grid is empty");
    }
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0 || grid[i] > 1.0) {
            throw Error(ErrorCode::ValidationError, "coverage grid values must lie in [0,1]");
        }
        if (i > 0 && grid[i] <= grid[i - 1]) {
            throw Error(ErrorCode::ValidationError, "coverage grid must be strictly ascending");
        }
    }
    Eigen::ArrayXd values(grid.size());
    const double n = static_cast<double>(d.n);
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const double p = grid[i];
        values[i] = static_cast<double>(((d.lowers <= p) && (d.uppers >= p)).count()) / n;
    }
    return CoverageCurve{grid, values};
}

Eigen::ArrayXd density(const Eigen::ArrayXd& samples, const HistogramSpec& spec) {
    if (samples.size() == 0) {
        throw Error(ErrorCode::EmptyInput, "density needs at least one sample");
    }
    Eigen::ArrayXd masses = Eigen::ArrayXd::Zero(spec.bins);
    for (Eigen::Index k = 0; k < samples.size(); ++k) {
        const double x = samples[k];
        if (x < 0.0 || x > 1.0) {
            throw Error(ErrorCode::ValidationError, "density samples must lie in [0,1]");
        }
        const int bin = std::min(spec.bins - 1, static_cast<int>(x * spec.bins));
        masses[bin] += 1.0;
    }
    return masses / static_cast<double>(samples.size());
}

std::vector<UncertaintyInterval> ordered_subsample(const DrawSet& d, std::int64_t k,
                                                   std::int64_t stride) {
    if (k < 1 || stride < 1 || k * stride > d.n) {
        throw Error(ErrorCode::OutOfRange,
                    "need 1 <= k, 1 <= stride, k*stride <= n (k=" + std::to_string(k) +
                        ", stride=" + std::to_string(stride) + ", n=" + std::to_string(d.n) + ")");
    }
    std::vector<std::int64_t> idx(k);
    for (std::int64_t j = 0; j < k; ++j) {
        idx[j] = (j + 1) * stride - 1;
    }
    std::sort(idx.begin(), idx.end(), [&d](std::int64_t a, std::int64_t b) {
        if (d.lowers[a] != d.lowers[b]) return d.lowers[a] < d.lowers[b];
        if (d.uppers[a] != d.uppers[b]) return d.uppers[a] < d.uppers[b];
        return a < b;
    });
    std::vector<UncertaintyInterval> out;
    out.reserve(idx.size());
    for (std::int64_t i : idx) {
        out.emplace_back(d.lowers[i], d.uppers[i]);
    }
    return out;
}

UncertaintyInterval individual_focused_interval(double phi_bar, double theta_bar) {
    return pc_star_bounds(ExposureChances(phi_bar, theta_bar));
}

std::string summary_to_json(const MixtureSummary& s, const DrawSet& d, int indent) {
    nlohmann::json out{{"prob_lower_zero", s.prob_lower_zero},
                       {"upper_mean", s.upper_mean},
                       {"upper_sd", s.upper_sd},
                       {"length_mean", s.length_mean},
                       {"length_sd", s.length_sd},
                       {"seed", d.seed},
                       {"n", d.n},
                       {"mode", to_string(d.mode)},
                       {"spec_hash", d.spec_hash}};
    auto put = [&out](const char* key, const std::optional<double>& v) {
        out[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    put("lower_mean_given_pos", s.lower_mean_given_pos);
    put("lower_sd_given_pos", s.lower_sd_given_pos);
    put("length_mean_given_pos", s.length_mean_given_pos);
    put("length_sd_given_pos", s.length_sd_given_pos);
    return out.dump(indent);
}

void write_coverage_csv(std::ostream& out, const CoverageCurve& curve) {
    out << "p,coverage\n";
    char buf[80];
    for (Eigen::Index i = 0; i < curve.grid.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", curve.grid[i], curve.values[i]);
        out << buf;
    }
}

void write_histogram_csv(std::ostream& out, const Eigen::ArrayXd& masses) {
    out << "bin_left,bin_right,mass\n";
    char buf[120];
    const double width = 1.0 / static_cast<double>(masses.size());
    for (Eigen::Index i = 0; i < masses.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", i * width,
                      (i + 1 == masses.size()) ? 1.0 : (i + 1) * width, masses[i]);
        out << buf;
    }
}

void write_subsample_csv(std::ostream& out, const std::vector<UncertaintyInterval>& intervals) {
    out << "rank,lower,upper\n";
    char buf[96];
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", i + 1, intervals[i].lower,
                      intervals[i].upper);
        out << buf;
    }
}

} // namespace causebound
