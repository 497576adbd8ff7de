#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "causebound/error.hpp"

namespace causebound {

/// 2x2 counts, rows = exposure (yes/no), columns = case status. The layout is
/// canonical and never transposed: (exposed_cases, exposed_controls,
/// unexposed_cases, unexposed_controls).
struct TwoByTwoTable {
    std::int64_t exposed_cases;
    std::int64_t exposed_controls;
    std::int64_t unexposed_cases;
    std::int64_t unexposed_controls;

    TwoByTwoTable(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d);

    std::int64_t total() const {
        return exposed_cases + exposed_controls + unexposed_cases + unexposed_controls;
    }
};

enum class DesignKind { randomized, cohort, case_control };

const char* to_string(DesignKind kind);
DesignKind design_kind_from_string(const std::string& name);

struct StudyDesign {
    DesignKind kind;
    std::string stratum; // opaque background-stratum label
};

/// Externally supplied covariate-adjusted odds ratio; stored opaque, never
/// re-derived from the raw counts.
struct AdjustedEstimate {
    double odds_ratio;
    std::optional<std::pair<double, double>> ci;
};

struct StudyRecord {
    TwoByTwoTable table;
    StudyDesign design;
    std::string source;
    std::optional<AdjustedEstimate> adjusted;
};

/// Cross-product ratio (a*d)/(b*c) on real-valued cells.
double odds_ratio(double a, double b, double c, double d);

/// Odds ratio on raw counts. With correction = true, 0.5 is added to every
/// cell first (Haldane-Anscombe); with correction = false a zero cell is a
/// hard error, never silently patched.
double odds_ratio(const TwoByTwoTable& t, bool correction = false);

/// Risk ratio [a/(a+b)] / [c/(c+d)], estimable only from a design that fixes
/// exposure arms. case_control records throw RetrospectiveDesign.
double risk_ratio_estimate(const StudyRecord& r);

struct RareOutcomeGap {
    double odds_ratio;
    double risk_ratio;   // counts treated as a cohort
    double relative_gap; // |or - rr| / rr
};

/// Both association measures plus their relative gap, for judging whether an
/// OR -> RR substitution is defensible for this table.
RareOutcomeGap rare_outcome_gap(const TwoByTwoTable& t);

/// Parse an array of study records from JSON. Malformed entries are reported
/// with the record index and field path.
std::vector<StudyRecord> ingest(std::istream& in);
std::vector<StudyRecord> ingest_file(const std::string& path);

std::string serialize(const std::vector<StudyRecord>& records, int indent = 2);

/// Per-record measure report row. rr and relative_gap are absent (NA in CSV)
/// when the design is retrospective or an estimator is undefined for the
/// counts.
struct MeasureRow {
    std::string source;
    DesignKind design;
    double odds_ratio;
    std::optional<double> risk_ratio;
    std::optional<double> relative_gap;
    std::string rr_note; // reason rr is absent, empty otherwise
};

std::vector<MeasureRow> measure_report(const std::vector<StudyRecord>& records,
                                       bool correction = false);

/// CSV columns: source,design,or,rr,relative_gap (NA for absent values).
void write_measures_csv(std::ostream& out, const std::vector<MeasureRow>& rows);

} // namespace causebound
