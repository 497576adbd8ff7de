#include <doctest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "causebound/rng.hpp"
#include "causebound/studies.hpp"

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

const char* kTable1Json = R"([
  {
    "source": "Frachon et al. 2010",
    "design": "case_control",
    "stratum": "all",
    "table": {"exposed_cases": 19, "exposed_controls": 3,
              "unexposed_cases": 8, "unexposed_controls": 51},
    "adjusted_or": 17.1,
    "adjusted_or_ci": [3.5, 83.0]
  }
])";

} // namespace

TEST_CASE("odds ratio") {
    // (19*51)/(3*8) = 969/24, integer-exact in double.
    CHECK(odds_ratio(TwoByTwoTable(19, 3, 8, 51)) == 40.375);
    CHECK(odds_ratio(TwoByTwoTable(10, 10, 10, 10)) == 1.0);
    // Zero cell with the 0.5 adjustment: (5.5*5.5)/(0.5*5.5) = 11.
    CHECK(odds_ratio(TwoByTwoTable(5, 0, 5, 5), true) == 11.0);
    CHECK(throws_code(ErrorCode::ZeroCell, [] { odds_ratio(TwoByTwoTable(5, 0, 5, 5)); }));
}

TEST_CASE("odds ratio reciprocal symmetry") {
    const TwoByTwoTable t(19, 3, 8, 51);
    const TwoByTwoTable swapped(8, 51, 19, 3); // exposure rows exchanged
    CHECK(odds_ratio(t) * odds_ratio(swapped) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("odds ratio invariant under row and column scaling") {
    const double tables[][4] = {{19, 3, 8, 51}, {30, 70, 12, 88}, {2, 5, 7, 3}};
    const double scales[] = {0.5, 3.0, 12.5};
    for (const auto& t : tables) {
        const double base = odds_ratio(t[0], t[1], t[2], t[3]);
        for (double s : scales) {
            CHECK(odds_ratio(s * t[0], s * t[1], t[2], t[3]) ==
                  doctest::Approx(base).epsilon(1e-12)); // scale exposed row
            CHECK(odds_ratio(t[0], t[1], s * t[2], s * t[3]) ==
                  doctest::Approx(base).epsilon(1e-12)); // scale unexposed row
            CHECK(odds_ratio(s * t[0], t[1], s * t[2], t[3]) ==
                  doctest::Approx(base).epsilon(1e-12)); // scale case column
            CHECK(odds_ratio(t[0], s * t[1], t[2], s * t[3]) ==
                  doctest::Approx(base).epsilon(1e-12)); // scale control column
        }
    }
}

TEST_CASE("risk ratio estimate") {
    const StudyRecord randomized{TwoByTwoTable(30, 70, 12, 88),
                                 {DesignKind::randomized, "all"},
                                 "synthetic",
                                 std::nullopt};
    CHECK(risk_ratio_estimate(randomized) == 2.5);

    const StudyRecord retrospective{TwoByTwoTable(19, 3, 8, 51),
                                    {DesignKind::case_control, "all"},
                                    "Frachon et al. 2010",
                                    std::nullopt};
    CHECK(throws_code(ErrorCode::RetrospectiveDesign,
                      [&] { risk_ratio_estimate(retrospective); }));

    const StudyRecord no_baseline{TwoByTwoTable(0, 100, 0, 100),
                                  {DesignKind::cohort, "all"},
                                  "synthetic",
                                  std::nullopt};
    CHECK(throws_code(ErrorCode::ZeroBaselineRisk, [&] { risk_ratio_estimate(no_baseline); }));

    const StudyRecord empty_arm{TwoByTwoTable(0, 0, 5, 5),
                                {DesignKind::cohort, "all"},
                                "synthetic",
                                std::nullopt};
    CHECK(throws_code(ErrorCode::ZeroRow, [&] { risk_ratio_estimate(empty_arm); }));
}

TEST_CASE("risk ratio estimate converges to the chance ratio") {
    // Randomized table built from chances (0.30, 0.12) with 10^6 per arm.
    const std::int64_t n = 1000000;
    SplitMix64 g = substream(2024, 1);
    std::int64_t exposed_cases = 0;
    std::int64_t unexposed_cases = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        if (uniform01(g) < 0.30) ++exposed_cases;
        if (uniform01(g) < 0.12) ++unexposed_cases;
    }
    const StudyRecord record{TwoByTwoTable(exposed_cases, n - exposed_cases, unexposed_cases,
                                           n - unexposed_cases),
                             {DesignKind::randomized, "all"},
                             "synthetic",
                             std::nullopt};
    const double rr = risk_ratio_estimate(record);
    // Delta-method standard error of the ratio.
    const double se = 2.5 * std::sqrt(0.70 / (n * 0.30) + 0.88 / (n * 0.12));
    CHECK(std::abs(rr - 2.5) <= 3.0 * se);
}

TEST_CASE("rare outcome gap") {
    const RareOutcomeGap rare = rare_outcome_gap(TwoByTwoTable(1, 999, 1, 999));
    CHECK(rare.odds_ratio == 1.0);
    CHECK(rare.risk_ratio == 1.0);
    CHECK(rare.relative_gap == 0.0);

    const RareOutcomeGap null_assoc = rare_outcome_gap(TwoByTwoTable(50, 50, 50, 50));
    CHECK(null_assoc.odds_ratio == 1.0);
    CHECK(null_assoc.risk_ratio == 1.0);
    CHECK(null_assoc.relative_gap == 0.0);

    // Common outcome: or = 2640/840, rr = 2.5.
    const RareOutcomeGap common = rare_outcome_gap(TwoByTwoTable(30, 70, 12, 88));
    CHECK(common.odds_ratio == doctest::Approx(3.142857142857143).epsilon(1e-14));
    CHECK(common.risk_ratio == 2.5);
    CHECK(common.relative_gap == doctest::Approx(0.2571428571428571).epsilon(1e-12));
}

TEST_CASE("ingest") {
    std::istringstream in(kTable1Json);
    const auto records = ingest(in);
    REQUIRE(records.size() == 1);
    CHECK(records[0].design.kind == DesignKind::case_control);
    CHECK(records[0].table.exposed_cases == 19);
    CHECK(records[0].table.unexposed_controls == 51);
    REQUIRE(records[0].adjusted.has_value());
    CHECK(records[0].adjusted->odds_ratio == 17.1);
    REQUIRE(records[0].adjusted->ci.has_value());
    CHECK(records[0].adjusted->ci->first == 3.5);
    CHECK(records[0].adjusted->ci->second == 83.0);

    std::istringstream empty("[]");
    CHECK(ingest(empty).empty());
}

TEST_CASE("ingest rejects malformed records") {
    const auto fails_with = [](const std::string& text, ErrorCode code,
                               const std::string& needle) {
        std::istringstream in(text);
        try {
            ingest(in);
        } catch (const Error& e) {
            return e.code() == code && std::string(e.what()).find(needle) != std::string::npos;
        }
        return false;
    };

    CHECK(fails_with(R"([{"source":"s","design":"cohort","table":
        {"exposed_cases":-1,"exposed_controls":1,"unexposed_cases":1,"unexposed_controls":1}}])",
                     ErrorCode::ValidationError, "exposed_cases"));
    CHECK(fails_with(R"([{"source":"s","design":"prospective","table":
        {"exposed_cases":1,"exposed_controls":1,"unexposed_cases":1,"unexposed_controls":1}}])",
                     ErrorCode::ValidationError, "design"));
    CHECK(fails_with(R"([{"design":"cohort","table":
        {"exposed_cases":1,"exposed_controls":1,"unexposed_cases":1,"unexposed_controls":1}}])",
                     ErrorCode::ValidationError, "source"));
    CHECK(fails_with("this is not json", ErrorCode::ParseError, ""));
}

TEST_CASE("ingest round-trips serialize exactly") {
    std::istringstream in(kTable1Json);
    auto records = ingest(in);
    records.push_back(StudyRecord{TwoByTwoTable(30, 70, 12, 88),
                                  {DesignKind::randomized, "trial"},
                                  "synthetic randomized",
                                  std::nullopt});
    std::istringstream again(serialize(records));
    const auto back = ingest(again);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].source == records[i].source);
        CHECK(back[i].design.kind == records[i].design.kind);
        CHECK(back[i].design.stratum == records[i].design.stratum);
        CHECK(back[i].table.exposed_cases == records[i].table.exposed_cases);
        CHECK(back[i].table.exposed_controls == records[i].table.exposed_controls);
        CHECK(back[i].table.unexposed_cases == records[i].table.unexposed_cases);
        CHECK(back[i].table.unexposed_controls == records[i].table.unexposed_controls);
        CHECK(back[i].adjusted.has_value() == records[i].adjusted.has_value());
        if (back[i].adjusted) {
            CHECK(back[i].adjusted->odds_ratio == records[i].adjusted->odds_ratio);
            CHECK(back[i].adjusted->ci == records[i].adjusted->ci);
        }
    }
}

TEST_CASE("bundled studies file") {
    const auto records = ingest_file(std::string(CAUSEBOUND_DATA_DIR) + "/studies.json");
    REQUIRE(records.size() == 2);
    CHECK(records[0].design.kind == DesignKind::case_control);
    CHECK(odds_ratio(records[0].table) == 40.375);
    CHECK(records[1].design.kind == DesignKind::randomized);
    CHECK(risk_ratio_estimate(records[1]) == 2.5);
}

TEST_CASE("measure report") {
    const auto records = ingest_file(std::string(CAUSEBOUND_DATA_DIR) + "/studies.json");
    const auto rows = measure_report(records);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].odds_ratio == 40.375);
    CHECK_FALSE(rows[0].risk_ratio.has_value());
    CHECK_FALSE(rows[0].relative_gap.has_value());
    CHECK(rows[0].rr_note.find("retrospective") != std::string::npos);
    CHECK(rows[1].risk_ratio == 2.5);
    REQUIRE(rows[1].relative_gap.has_value());
    CHECK(*rows[1].relative_gap == doctest::Approx(0.2571428571428571).epsilon(1e-12));

    std::ostringstream csv;
    write_measures_csv(csv, rows);
    const std::string text = csv.str();
    CHECK(text.rfind("source,design,or,rr,relative_gap\n", 0) == 0);
    CHECK(text.find("case_control,40.375,NA,NA") != std::string::npos);
    CHECK(text.find("randomized,") != std::string::npos);
    CHECK(text.find(",2.5,") != std::string::npos);
}
