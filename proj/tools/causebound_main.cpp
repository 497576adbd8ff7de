// causebound CLI: bounds arithmetic, study measures, posterior sampling,
// coverage curves, population simulation and combined reports, all with
// machine-readable output and reproducibility metadata.
//
// Exit codes: 0 success, 2 validation failure, 3 I/O failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "causebound/bayes_engine.hpp"
#include "causebound/oracle_sim.hpp"
#include "causebound/pc_core.hpp"
#include "causebound/studies.hpp"
#include "causebound/summaries.hpp"
#include "causebound/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json meta_block(std::optional<std::uint64_t> seed, const std::string& spec_hash = "") {
    json meta{{"artifact", "causebound"}, {"version", causebound::kArtifactVersion}};
    meta["seed"] = seed ? json(*seed) : json(nullptr);
    if (!spec_hash.empty()) {
        meta["spec_hash"] = spec_hash;
    }
    return meta;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw causebound::Error(causebound::ErrorCode::IoError, "cannot write " + out_path);
    }
    out << text << "\n";
}

std::ofstream open_artifact(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw causebound::Error(causebound::ErrorCode::IoError, "cannot write " + path.string());
    }
    return out;
}

void write_meta_comments(std::ostream& out, std::uint64_t seed, const std::string& spec_hash) {
    out << "# version=" << causebound::kArtifactVersion << "\n";
    out << "# seed=" << seed << "\n";
    if (!spec_hash.empty()) {
        out << "# spec_hash=" << spec_hash << "\n";
    }
}

// --out falls back to the CAUSEBOUND_OUT environment variable.
std::string resolve_out_dir(const std::string& flag_value, bool required) {
    if (!flag_value.empty()) {
        return flag_value;
    }
    if (const char* env = std::getenv("CAUSEBOUND_OUT")) {
        if (*env != '\0') {
            return env;
        }
    }
    if (required) {
        throw causebound::Error(causebound::ErrorCode::ValidationError,
                                "no output directory: pass --out or set CAUSEBOUND_OUT");
    }
    return {};
}

std::uint64_t effective_seed(const std::optional<std::uint64_t>& flag_seed,
                             const std::optional<std::uint64_t>& file_seed) {
    if (flag_seed) {
        return *flag_seed;
    }
    if (file_seed) {
        return *file_seed;
    }
    std::random_device rd;
    const std::uint64_t seed =
        (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
    std::cerr << "note: no seed supplied; generated seed " << seed << "\n";
    return seed;
}

json rr_to_json(const causebound::RiskRatio& rr) {
    return rr.is_infinite() ? json(nullptr) : json(rr.value);
}

// ---- bounds ---------------------------------------------------------------

int cmd_bounds(std::optional<double> p1, std::optional<double> p0, std::optional<double> rr_flag,
               bool simple, const std::string& out_path) {
    using namespace causebound;
    json out;
    double lower;
    double upper;
    std::optional<RiskRatio> rr;
    if (p1 && p0) {
        MarginalChances m(*p1, *p0);
        rr = risk_ratio(m);
        const UncertaintyInterval interval = simple ? pc_bounds_simple(m) : pc_bounds(m);
        lower = interval.lower;
        upper = interval.upper;
    } else if (rr_flag) {
        if (!(*rr_flag >= 0.0)) {
            throw Error(ErrorCode::ValidationError, "--rr must be nonnegative");
        }
        rr = RiskRatio{*rr_flag};
        lower = pc_lower(*rr);
        upper = 1.0;
    } else {
        throw Error(ErrorCode::ValidationError, "supply --p1 with --p0, or --rr");
    }
    const bool exceeds_half = lower > 0.5;
    out["lower"] = lower;
    out["upper"] = upper;
    out["rr"] = rr ? rr_to_json(*rr) : json(nullptr);
    out["rr_infinite"] = rr && rr->is_infinite();
    out["exceeds_half"] = exceeds_half;
    out["note"] = exceeds_half
                      ? "lower bound exceeds 0.5: causation is more likely than not"
                      : "lower bound does not exceed 0.5; this does not establish that the "
                        "probability of causation is below 0.5";
    out["meta"] = meta_block(std::nullopt);
    emit(out.dump(2), out_path);
    return 0;
}

// ---- pcstar ---------------------------------------------------------------

int cmd_pcstar(std::optional<double> phi, std::optional<double> theta,
               std::optional<double> pc_lower_flag, std::optional<double> pc_upper_flag,
               const std::string& out_path) {
    using namespace causebound;
    json out;
    if (pc_lower_flag || pc_upper_flag) {
        if (!pc_lower_flag || !pc_upper_flag || !phi) {
            throw Error(ErrorCode::ValidationError,
                        "scaling a PC interval needs --pc-lower, --pc-upper and --phi");
        }
        const UncertaintyInterval scaled =
            pc_star_from_pc(UncertaintyInterval(*pc_lower_flag, *pc_upper_flag), *phi);
        out["lower"] = scaled.lower;
        out["upper"] = scaled.upper;
    } else {
        if (!phi || !theta) {
            throw Error(ErrorCode::ValidationError, "supply --phi and --theta");
        }
        const PcStarResult r = pc_star_bounds_checked(ExposureChances(*phi, *theta));
        out["lower"] = r.interval.lower;
        out["upper"] = r.interval.upper;
        out["coherent"] = r.coherent;
    }
    out["meta"] = meta_block(std::nullopt);
    emit(out.dump(2), out_path);
    return 0;
}

// ---- study ----------------------------------------------------------------

json measures_to_json(const std::vector<causebound::MeasureRow>& rows) {
    json arr = json::array();
    for (const auto& row : rows) {
        json rec{{"source", row.source},
                 {"design", causebound::to_string(row.design)},
                 {"or", row.odds_ratio}};
        rec["rr"] = row.risk_ratio ? json(*row.risk_ratio) : json(nullptr);
        rec["relative_gap"] = row.relative_gap ? json(*row.relative_gap) : json(nullptr);
        if (!row.rr_note.empty()) {
            rec["rr_note"] = row.rr_note;
        }
        arr.push_back(rec);
    }
    return arr;
}

int cmd_study(const std::string& input, const std::string& format, bool correction,
              const std::string& out_path) {
    using namespace causebound;
    const std::vector<StudyRecord> records = ingest_file(input);
    if (records.empty()) {
        throw Error(ErrorCode::ValidationError, "study file contains no records");
    }
    const std::vector<MeasureRow> rows = measure_report(records, correction);
    if (format == "csv") {
        std::ostringstream csv;
        write_measures_csv(csv, rows);
        std::string text = csv.str();
        text.pop_back(); // emit() appends the final newline
        emit(text, out_path);
    } else {
        json out{{"records", measures_to_json(rows)}, {"meta", meta_block(std::nullopt)}};
        emit(out.dump(2), out_path);
    }
    return 0;
}

// ---- posterior ------------------------------------------------------------

struct PosteriorArtifacts {
    causebound::DrawSet draws;
    causebound::MixtureSummary summary;
};

PosteriorArtifacts run_posterior(const causebound::ModelRun& run, std::uint64_t seed,
                                 std::int64_t n, std::int64_t burn_in, std::int64_t thin,
                                 int threads, int coverage_points, std::int64_t subsample_k,
                                 int bins, const fs::path& out_dir) {
    using namespace causebound;
    fs::create_directories(out_dir);
    DrawSet draws = sample_draws(run.spec, n, seed, burn_in, thin, threads);
    {
        auto out = open_artifact(out_dir / "draws.csv");
        write_draws_csv(out, draws);
    }
    const MixtureSummary summary = summarize(draws);
    {
        auto out = open_artifact(out_dir / "summary.json");
        json doc = json::parse(summary_to_json(summary, draws));
        doc["meta"] = meta_block(seed, draws.spec_hash);
        out << doc.dump(2) << "\n";
    }
    {
        auto out = open_artifact(out_dir / "coverage.csv");
        write_meta_comments(out, seed, draws.spec_hash);
        const Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(coverage_points, 0.0, 1.0);
        write_coverage_csv(out, coverage(draws, grid));
    }
    {
        auto out = open_artifact(out_dir / "intervals.csv");
        write_meta_comments(out, seed, draws.spec_hash);
        const std::int64_t k = std::min<std::int64_t>(subsample_k, n);
        const std::int64_t stride = n / k;
        write_subsample_csv(out, ordered_subsample(draws, k, stride));
    }
    {
        auto out = open_artifact(out_dir / "upper_hist.csv");
        write_meta_comments(out, seed, draws.spec_hash);
        write_histogram_csv(out, density(draws.uppers, HistogramSpec(bins)));
    }
    // Conditional density of the continuous part, when it is nonempty.
    const Eigen::Index pos = (draws.lowers > 0.0).count();
    if (pos > 0) {
        Eigen::ArrayXd lowers_pos(pos);
        Eigen::Index j = 0;
        for (Eigen::Index k = 0; k < draws.lowers.size(); ++k) {
            if (draws.lowers[k] > 0.0) {
                lowers_pos[j++] = draws.lowers[k];
            }
        }
        auto out = open_artifact(out_dir / "lower_given_pos_hist.csv");
        write_meta_comments(out, seed, draws.spec_hash);
        write_histogram_csv(out, density(lowers_pos, HistogramSpec(bins)));
    }
    return PosteriorArtifacts{std::move(draws), summary};
}

int cmd_posterior(const std::string& spec_path, const std::string& out_dir,
                  std::optional<std::uint64_t> seed_flag, std::optional<std::int64_t> n_flag,
                  std::optional<std::int64_t> burn_in_flag, std::optional<std::int64_t> thin_flag,
                  int threads, int coverage_points, std::int64_t subsample_k, int bins) {
    using namespace causebound;
    const ModelRun run = parse_model_run_file(spec_path);
    const std::uint64_t seed = effective_seed(seed_flag, run.seed);
    const std::int64_t n = n_flag.value_or(run.n);
    const PosteriorArtifacts art =
        run_posterior(run, seed, n, burn_in_flag.value_or(run.burn_in),
                      thin_flag.value_or(run.thin), threads, coverage_points, subsample_k, bins,
                      resolve_out_dir(out_dir, true));
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "prob_lower_zero=%.6g upper_mean=%.6g length_mean=%.6g seed=%llu",
                  art.summary.prob_lower_zero, art.summary.upper_mean, art.summary.length_mean,
                  static_cast<unsigned long long>(seed));
    std::cout << buf << "\n";
    return 0;
}

// ---- coverage -------------------------------------------------------------

int cmd_coverage(const std::string& input, int points, const std::string& out_path) {
    using namespace causebound;
    std::ifstream in(input);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + input);
    }
    const DrawSet draws = read_draws_csv(in);
    const Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(points, 0.0, 1.0);
    const CoverageCurve curve = coverage(draws, grid);
    std::ostringstream csv;
    write_meta_comments(csv, draws.seed, draws.spec_hash);
    write_coverage_csv(csv, curve);
    std::string text = csv.str();
    text.pop_back();
    emit(text, out_path);
    return 0;
}

// ---- simulate -------------------------------------------------------------

int cmd_simulate(const std::string& spec_path, const std::string& out_flag,
                 std::optional<std::uint64_t> seed_flag, int threads) {
    using namespace causebound;
    const std::string out_dir = resolve_out_dir(out_flag, false);
    PopulationSpec spec = parse_population_spec_file(spec_path);
    if (seed_flag) {
        spec.seed = *seed_flag;
    }
    const PopulationTally tally = simulate(spec, threads);
    json out{{"meta", meta_block(spec.seed)}, {"n", tally.n}};
    try {
        const ContainmentReport report = sufficiency_violation_demo(spec, threads);
        out["empirical_pc"] = report.empirical_pc;
        out["marginals"] = {{"p1", report.marginals.p1}, {"p0", report.marginals.p0}};
        out["bounds"] = {{"lower", report.bounds.lower}, {"upper", report.bounds.upper}};
        out["contained"] = report.contained;
    } catch (const Error& e) {
        out["containment_note"] = e.what();
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        auto csv = open_artifact(fs::path(out_dir) / "tally.csv");
        write_tally_csv(csv, tally, spec.seed);
        auto rep = open_artifact(fs::path(out_dir) / "simulation.json");
        rep << out.dump(2) << "\n";
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

// ---- report ---------------------------------------------------------------

int cmd_report(const std::string& studies_path, const std::string& model_path,
               const std::string& out_flag, std::optional<std::uint64_t> seed_flag, int threads) {
    using namespace causebound;
    const std::string out_dir = resolve_out_dir(out_flag, true);
    const std::vector<StudyRecord> records = ingest_file(studies_path);
    const std::vector<MeasureRow> rows = measure_report(records, false);
    const ModelRun run = parse_model_run_file(model_path);
    const std::uint64_t seed = effective_seed(seed_flag, run.seed);

    fs::create_directories(out_dir);
    const PosteriorArtifacts art =
        run_posterior(run, seed, run.n, run.burn_in, run.thin, threads, 101, 100, 40, out_dir);
    {
        auto csv = open_artifact(fs::path(out_dir) / "measures.csv");
        write_measures_csv(csv, rows);
    }
    const UncertaintyInterval focused = plug_in_interval(run.spec);
    json doc{{"meta", meta_block(seed, art.draws.spec_hash)},
             {"studies", measures_to_json(rows)},
             {"posterior", json::parse(summary_to_json(art.summary, art.draws))},
             {"individual_focused", {{"lower", focused.lower}, {"upper", focused.upper}}}};
    {
        auto rep = open_artifact(fs::path(out_dir) / "report.json");
        rep << doc.dump(2) << "\n";
    }
    std::cout << doc["individual_focused"].dump() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interval bounds for the probability of causation, with Bayesian uncertainty"};
    app.require_subcommand(1);

    // bounds
    auto* bounds = app.add_subcommand("bounds", "PC bounds from marginal chances or a risk ratio");
    std::optional<double> b_p1, b_p0, b_rr;
    bool b_simple = false;
    std::string b_out;
    bounds->add_option("--p1", b_p1, "chance of response under exposure");
    bounds->add_option("--p0", b_p0, "counterfactual chance of response without exposure");
    bounds->add_option("--rr", b_rr, "risk ratio (alternative to --p1/--p0)");
    bounds->add_flag("--simple", b_simple, "fix the upper bound at 1");
    bounds->add_option("--out", b_out, "output file (default stdout)");

    // pcstar
    auto* pcstar = app.add_subcommand("pcstar", "PC* bounds under uncertain exposure");
    std::optional<double> s_phi, s_theta, s_lower, s_upper;
    std::string s_out;
    pcstar->add_option("--phi", s_phi, "chance of exposure given response");
    pcstar->add_option("--theta", s_theta, "prior chance of exposure");
    pcstar->add_option("--pc-lower", s_lower, "PC interval lower bound to scale");
    pcstar->add_option("--pc-upper", s_upper, "PC interval upper bound to scale");
    pcstar->add_option("--out", s_out, "output file (default stdout)");

    // study
    auto* study = app.add_subcommand("study", "association measures for 2x2 study records");
    std::string st_input, st_format = "json", st_out;
    bool st_correction = false;
    study->add_option("--input", st_input, "study records JSON file")->required();
    study->add_option("--format", st_format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    study->add_flag("--correction", st_correction, "add 0.5 to every cell before the odds ratio");
    study->add_option("--out", st_out, "output file (default stdout)");

    // posterior
    auto* posterior = app.add_subcommand("posterior", "sample the random uncertainty interval");
    std::string p_spec, p_out;
    std::optional<std::uint64_t> p_seed;
    std::optional<std::int64_t> p_n, p_burn_in, p_thin;
    int p_threads = 1;
    int p_coverage_points = 101;
    std::int64_t p_subsample_k = 100;
    int p_bins = 40;
    posterior->add_option("--spec", p_spec, "model spec JSON file")->required();
    posterior->add_option("--out", p_out, "output directory (default $CAUSEBOUND_OUT)");
    posterior->add_option("--seed", p_seed, "seed override");
    posterior->add_option("--n", p_n, "number of draws");
    posterior->add_option("--burn-in", p_burn_in, "draws discarded before keeping any");
    posterior->add_option("--thin", p_thin, "keep every thin-th draw");
    posterior->add_option("--threads", p_threads, "worker threads");
    posterior->add_option("--coverage-points", p_coverage_points, "coverage grid size");
    posterior->add_option("--subsample-k", p_subsample_k, "ordered subsample size");
    posterior->add_option("--bins", p_bins, "histogram bins");

    // coverage
    auto* cover = app.add_subcommand("coverage", "coverage curve from an exported draw set");
    std::string c_input, c_out;
    int c_points = 101;
    cover->add_option("--input", c_input, "draws.csv produced by posterior")->required();
    cover->add_option("--points", c_points, "grid size over [0,1]");
    cover->add_option("--out", c_out, "output file (default stdout)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "finite-population potential-outcomes run");
    std::string m_spec, m_out;
    std::optional<std::uint64_t> m_seed;
    int m_threads = 1;
    simulate->add_option("--spec", m_spec, "population spec JSON file")->required();
    simulate->add_option("--out", m_out,
                         "output directory for tally.csv and simulation.json "
                         "(default $CAUSEBOUND_OUT)");
    simulate->add_option("--seed", m_seed, "seed override");
    simulate->add_option("--threads", m_threads, "worker threads");

    // report
    auto* report = app.add_subcommand("report", "study measures + posterior + plug-in interval");
    std::string r_studies, r_model, r_out;
    std::optional<std::uint64_t> r_seed;
    int r_threads = 1;
    report->add_option("--studies", r_studies, "study records JSON file")->required();
    report->add_option("--model", r_model, "model spec JSON file")->required();
    report->add_option("--out", r_out, "output directory (default $CAUSEBOUND_OUT)");
    report->add_option("--seed", r_seed, "seed override");
    report->add_option("--threads", r_threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (bounds->parsed()) {
            return cmd_bounds(b_p1, b_p0, b_rr, b_simple, b_out);
        }
        if (pcstar->parsed()) {
            return cmd_pcstar(s_phi, s_theta, s_lower, s_upper, s_out);
        }
        if (study->parsed()) {
            return cmd_study(st_input, st_format, st_correction, st_out);
        }
        if (posterior->parsed()) {
            return cmd_posterior(p_spec, p_out, p_seed, p_n, p_burn_in, p_thin, p_threads,
                                 p_coverage_points, p_subsample_k, p_bins);
        }
        if (cover->parsed()) {
            return cmd_coverage(c_input, c_points, c_out);
        }
        if (simulate->parsed()) {
            return cmd_simulate(m_spec, m_out, m_seed, m_threads);
        }
        if (report->parsed()) {
            return cmd_report(r_studies, r_model, r_out, r_seed, r_threads);
        }
    } catch (const causebound::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == causebound::ErrorCode::IoError ? 3 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
