#include "causebound/studies.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace causebound {

using nlohmann::json;

TwoByTwoTable::TwoByTwoTable(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d)
    : exposed_cases(a), exposed_controls(b), unexposed_cases(c), unexposed_controls(d) {
    if (a < 0 || b < 0 || c < 0 || d < 0) {
        throw Error(ErrorCode::ValidationError, "table counts must be nonnegative");
    }
    if (total() == 0) {
        throw Error(ErrorCode::ValidationError, "table is empty (total count 0)");
    }
}

const char* to_string(DesignKind kind) {
    switch (kind) {
    case DesignKind::randomized: return "randomized";
    case DesignKind::cohort: return "cohort";
    case DesignKind::case_control: return "case_control";
    }
    return "unknown";
}

DesignKind design_kind_from_string(const std::string& name) {
    if (name == "randomized") return DesignKind::randomized;
    if (name == "cohort") return DesignKind::cohort;
    if (name == "case_control") return DesignKind::case_control;
    throw Error(ErrorCode::ValidationError, "unknown design kind \"" + name + "\"");
}

double odds_ratio(double a, double b, double c, double d) {
    return (a * d) / (b * c);
}

double odds_ratio(const TwoByTwoTable& t, bool correction) {
    double a = static_cast<double>(t.exposed_cases);
    double b = static_cast<double>(t.exposed_controls);
    double c = static_cast<double>(t.unexposed_cases);
    double d = static_cast<double>(t.unexposed_controls);
    if (correction) {
        a += 0.5;
        b += 0.5;
        c += 0.5;
        d += 0.5;
    } else if (t.exposed_cases == 0 || t.exposed_controls == 0 || t.unexposed_cases == 0 ||
               t.unexposed_controls == 0) {
        throw Error(ErrorCode::ZeroCell,
                    "table has a zero cell; pass correction=true to apply the 0.5 adjustment");
    }
    return odds_ratio(a, b, c, d);
}

double risk_ratio_estimate(const StudyRecord& r) {
    if (r.design.kind == DesignKind::case_control) {
        throw Error(ErrorCode::RetrospectiveDesign,
                    "risk ratio is not estimable from a retrospective (case-control) design");
    }
    const auto& t = r.table;
    const std::int64_t exposed_n = t.exposed_cases + t.exposed_controls;
    const std::int64_t unexposed_n = t.unexposed_cases + t.unexposed_controls;
    if (exposed_n == 0 || unexposed_n == 0) {
        throw Error(ErrorCode::ZeroRow, "an exposure arm is empty");
    }
    if (t.unexposed_cases == 0) {
        throw Error(ErrorCode::ZeroBaselineRisk, "no cases in the unexposed arm");
    }
    const double risk_exposed =
        static_cast<double>(t.exposed_cases) / static_cast<double>(exposed_n);
    const double risk_unexposed =
        static_cast<double>(t.unexposed_cases) / static_cast<double>(unexposed_n);
    return risk_exposed / risk_unexposed;
}

RareOutcomeGap rare_outcome_gap(const TwoByTwoTable& t) {
    const double or_value = odds_ratio(t, false);
    const StudyRecord as_cohort{t, {DesignKind::cohort, ""}, "", std::nullopt};
    const double rr_value = risk_ratio_estimate(as_cohort);
    return RareOutcomeGap{or_value, rr_value, std::abs(or_value - rr_value) / rr_value};
}

namespace {

std::int64_t require_count(const json& table, const char* field, int index) {
    const std::string where = "record " + std::to_string(index) + ": table." + field;
    if (!table.contains(field)) {
        throw Error(ErrorCode::ValidationError, where + " is missing");
    }
    const json& v = table.at(field);
    if (!v.is_number_integer()) {
        throw Error(ErrorCode::ValidationError, where + " must be an integer count");
    }
    const std::int64_t count = v.get<std::int64_t>();
    if (count < 0) {
        throw Error(ErrorCode::ValidationError,
                    where + " is negative (" + std::to_string(count) + ")");
    }
    return count;
}

StudyRecord parse_record(const json& rec, int index) {
    const std::string where = "record " + std::to_string(index);
    if (!rec.is_object()) {
        throw Error(ErrorCode::ValidationError, where + " is not an object");
    }
    for (const char* field : {"source", "design", "table"}) {
        if (!rec.contains(field)) {
            throw Error(ErrorCode::ValidationError, where + ": \"" + field + "\" is missing");
        }
    }
    if (!rec.at("table").is_object()) {
        throw Error(ErrorCode::ValidationError, where + ": table must be an object");
    }
    TwoByTwoTable table(require_count(rec.at("table"), "exposed_cases", index),
                        require_count(rec.at("table"), "exposed_controls", index),
                        require_count(rec.at("table"), "unexposed_cases", index),
                        require_count(rec.at("table"), "unexposed_controls", index));
    DesignKind kind;
    try {
        kind = design_kind_from_string(rec.at("design").get<std::string>());
    } catch (const Error& e) {
        throw Error(ErrorCode::ValidationError, where + ": " + e.what());
    }
    StudyRecord out{table,
                    {kind, rec.value("stratum", std::string{})},
                    rec.at("source").get<std::string>(),
                    std::nullopt};
    if (rec.contains("adjusted_or")) {
        AdjustedEstimate adj{rec.at("adjusted_or").get<double>(), std::nullopt};
        if (rec.contains("adjusted_or_ci")) {
            const json& ci = rec.at("adjusted_or_ci");
            if (!ci.is_array() || ci.size() != 2) {
                throw Error(ErrorCode::ValidationError,
                            where + ": adjusted_or_ci must be a [lower, upper] pair");
            }
            adj.ci = std::make_pair(ci[0].get<double>(), ci[1].get<double>());
        }
        out.adjusted = adj;
    }
    return out;
}

json record_to_json(const StudyRecord& r) {
    json rec{{"source", r.source},
             {"design", to_string(r.design.kind)},
             {"stratum", r.design.stratum},
             {"table",
              {{"exposed_cases", r.table.exposed_cases},
               {"exposed_controls", r.table.exposed_controls},
               {"unexposed_cases", r.table.unexposed_cases},
               {"unexposed_controls", r.table.unexposed_controls}}}};
    if (r.adjusted) {
        rec["adjusted_or"] = r.adjusted->odds_ratio;
        if (r.adjusted->ci) {
            rec["adjusted_or_ci"] = {r.adjusted->ci->first, r.adjusted->ci->second};
        }
    }
    return rec;
}

} // namespace

std::vector<StudyRecord> ingest(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    if (!doc.is_array()) {
        throw Error(ErrorCode::ValidationError, "study file must contain a JSON array of records");
    }
    std::vector<StudyRecord> records;
    records.reserve(doc.size());
    for (int i = 0; i < static_cast<int>(doc.size()); ++i) {
        records.push_back(parse_record(doc[i], i));
    }
    return records;
}

std::vector<StudyRecord> ingest_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path);
    }
    return ingest(in);
}

std::string serialize(const std::vector<StudyRecord>& records, int indent) {
    json doc = json::array();
    for (const auto& r : records) {
        doc.push_back(record_to_json(r));
    }
    return doc.dump(indent);
}

std::vector<MeasureRow> measure_report(const std::vector<StudyRecord>& records, bool correction) {
    std::vector<MeasureRow> rows;
    rows.reserve(records.size());
    for (const auto& r : records) {
        MeasureRow row{r.source, r.design.kind, odds_ratio(r.table, correction),
                       std::nullopt, std::nullopt, ""};
        if (r.design.kind == DesignKind::case_control) {
            row.rr_note = "not estimable (retrospective design)";
        } else {
            try {
                row.risk_ratio = risk_ratio_estimate(r);
                row.relative_gap = rare_outcome_gap(r.table).relative_gap;
            } catch (const Error& e) {
                row.rr_note = e.what();
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_measures_csv(std::ostream& out, const std::vector<MeasureRow>& rows) {
    char buf[64];
    out << "source,design,or,rr,relative_gap\n";
    for (const auto& row : rows) {
        std::string source = row.source;
        // Quote fields containing separators.
        if (source.find_first_of(",\"\n") != std::string::npos) {
            std::string quoted = "\"";
            for (char ch : source) {
                if (ch == '"') quoted += '"';
                quoted += ch;
            }
            quoted += '"';
            source = quoted;
        }
        std::snprintf(buf, sizeof(buf), "%.17g", row.odds_ratio);
        out << source << ',' << to_string(row.design) << ',' << buf << ',';
        if (row.risk_ratio) {
            std::snprintf(buf, sizeof(buf), "%.17g", *row.risk_ratio);
            out << buf;
        } else {
            out << "NA";
        }
        out << ',';
        if (row.relative_gap) {
            std::snprintf(buf, sizeof(buf), "%.17g", *row.relative_gap);
            out << buf;
        } else {
            out << "NA";
        }
        out << '\n';
    }
}

} // namespace causebound
