#include "causebound/bayes_engine.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "causebound/rng.hpp"

namespace causebound {

using nlohmann::json;

namespace {

constexpr std::int64_t kBlockSize = 65536;

// Substream tags; stream id = block * 4 + tag.
enum ChanceTag : std::uint64_t { kTheta = 0, kPhi = 1, kP1 = 2, kP0 = 3 };

} // namespace

BetaMoments beta_moments(const BetaParams& b) {
    const double s = b.alpha + b.beta;
    const double mean = b.alpha / s;
    const double var = b.alpha * b.beta / (s * s * (s + 1.0));
    return BetaMoments{mean, std::sqrt(var)};
}

BetaParams posterior_update(const BetaParams& prior, const BinomialData& data) {
    return BetaParams(prior.alpha + static_cast<double>(data.successes),
                      prior.beta + static_cast<double>(data.trials - data.successes));
}

const char* to_string(ModelMode mode) {
    return mode == ModelMode::generative ? "generative" : "direct";
}

ModelMode model_mode_from_string(const std::string& name) {
    if (name == "generative") return ModelMode::generative;
    if (name == "direct") return ModelMode::direct;
    throw Error(ErrorCode::InvalidSpec, "unknown mode \"" + name + "\"");
}

void ModelSpec::validate() const {
    if (mode == ModelMode::generative) {
        if (!p1 || !p0) {
            throw Error(ErrorCode::InvalidSpec, "generative mode needs p1_prior and p0_prior");
        }
        if (phi) {
            throw Error(ErrorCode::InvalidSpec, "generative mode must not declare phi");
        }
    } else {
        if (!phi) {
            throw Error(ErrorCode::InvalidSpec, "direct mode needs phi_prior");
        }
        if (p1 || p0) {
            throw Error(ErrorCode::InvalidSpec, "direct mode must not declare p1 or p0");
        }
    }
}

BoundsPair generative_interval_raw(double theta, double p1, double p0) noexcept {
    const double denom = theta * p1 + (1.0 - theta) * p0;
    if (!(denom > 0.0)) {
        return BoundsPair{0.0, 0.0}; // response impossible under this draw
    }
    double upper = theta * p1 / denom;
    double lower = theta * (p1 - p0) / denom;
    if (lower < 0.0) lower = 0.0;
    if (upper > 1.0) upper = 1.0;
    if (lower > upper) lower = upper;
    return BoundsPair{lower, upper};
}

BoundsPair direct_interval_raw(double phi, double theta) noexcept {
    const double upper = phi;
    double lower;
    if (theta >= 1.0) {
        lower = phi >= 1.0 ? 1.0 : 0.0;
    } else {
        lower = (phi - theta) / (1.0 - theta);
        if (lower < 0.0) lower = 0.0;
    }
    if (lower > upper) lower = upper;
    return BoundsPair{lower, upper};
}

UncertaintyInterval generative_interval(double theta, double p1, double p0) {
    const BoundsPair b = generative_interval_raw(theta, p1, p0);
    return UncertaintyInterval(b.lower, b.upper);
}

UncertaintyInterval direct_interval(double phi, double theta) {
    const BoundsPair b = direct_interval_raw(phi, theta);
    return UncertaintyInterval(b.lower, b.upper);
}

namespace {

// Kept draw k of a block stream is raw draw burn_in + (k+1)*thin - 1.
void draw_beta_chain(SplitMix64 g, const BetaParams& p, std::int64_t burn_in, std::int64_t thin,
                     std::int64_t len, double* out) {
    for (std::int64_t i = 0; i < burn_in; ++i) {
        beta_draw(g, p.alpha, p.beta);
    }
    for (std::int64_t k = 0; k < len; ++k) {
        for (std::int64_t t = 1; t < thin; ++t) {
            beta_draw(g, p.alpha, p.beta);
        }
        out[k] = beta_draw(g, p.alpha, p.beta);
    }
}

struct SampleJob {
    const ModelSpec* spec;
    std::uint64_t seed;
    std::int64_t n;
    std::int64_t burn_in;
    std::int64_t thin;
    BetaParams theta_post;
    std::optional<BetaParams> p1_post;
    std::optional<BetaParams> p0_post;
    std::optional<BetaParams> phi_post;
    double* lowers;
    double* uppers;
};

void run_block(const SampleJob& job, std::int64_t block) {
    const std::int64_t begin = block * kBlockSize;
    const std::int64_t len = std::min(kBlockSize, job.n - begin);
    const std::uint64_t base = static_cast<std::uint64_t>(block) * 4;
    std::vector<double> theta(len);
    draw_beta_chain(substream(job.seed, base + kTheta), job.theta_post, job.burn_in, job.thin,
                    len, theta.data());
    if (job.spec->mode == ModelMode::generative) {
        std::vector<double> p1(len), p0(len);
        draw_beta_chain(substream(job.seed, base + kP1), *job.p1_post, job.burn_in, job.thin,
                        len, p1.data());
        draw_beta_chain(substream(job.seed, base + kP0), *job.p0_post, job.burn_in, job.thin,
                        len, p0.data());
        for (std::int64_t k = 0; k < len; ++k) {
            const BoundsPair b = generative_interval_raw(theta[k], p1[k], p0[k]);
            job.lowers[begin + k] = b.lower;
            job.uppers[begin + k] = b.upper;
        }
    } else {
        std::vector<double> phi(len);
        draw_beta_chain(substream(job.seed, base + kPhi), *job.phi_post, job.burn_in, job.thin,
                        len, phi.data());
        for (std::int64_t k = 0; k < len; ++k) {
            const BoundsPair b = direct_interval_raw(phi[k], theta[k]);
            job.lowers[begin + k] = b.lower;
            job.uppers[begin + k] = b.upper;
        }
    }
}

} // namespace

DrawSet sample_draws(const ModelSpec& spec, std::int64_t n, std::uint64_t seed,
                     std::int64_t burn_in, std::int64_t thin, int threads) {
    spec.validate();
    if (n < 1) {
        throw Error(ErrorCode::InvalidSpec, "n must be >= 1, got " + std::to_string(n));
    }
    if (burn_in < 0 || thin < 1) {
        throw Error(ErrorCode::InvalidSpec, "need burn_in >= 0 and thin >= 1");
    }

    DrawSet d{seed, n, Eigen::ArrayXd(n), Eigen::ArrayXd(n), spec.mode, spec_hash(spec)};
    SampleJob job{&spec,
                  seed,
                  n,
                  burn_in,
                  thin,
                  spec.theta_prior,
                  spec.p1 ? std::optional<BetaParams>(spec.p1->posterior()) : std::nullopt,
                  spec.p0 ? std::optional<BetaParams>(spec.p0->posterior()) : std::nullopt,
                  spec.phi ? std::optional<BetaParams>(spec.phi->posterior()) : std::nullopt,
                  d.lowers.data(),
                  d.uppers.data()};

    const std::int64_t blocks = (n + kBlockSize - 1) / kBlockSize;
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(blocks)));
    if (workers == 1) {
        for (std::int64_t b = 0; b < blocks; ++b) {
            run_block(job, b);
        }
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&job, blocks, workers, w] {
                for (std::int64_t b = w; b < blocks; b += workers) {
                    run_block(job, b);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    return d;
}

double prob_lower_zero(const DrawSet& d) {
    if (d.n < 1) {
        throw Error(ErrorCode::ValidationError, "empty draw set");
    }
    return static_cast<double>((d.lowers == 0.0).count()) / static_cast<double>(d.n);
}

UncertaintyInterval plug_in_interval(const ModelSpec& spec) {
    spec.validate();
    const double theta_bar = beta_moments(spec.theta_prior).mean;
    if (spec.mode == ModelMode::direct) {
        return direct_interval(beta_moments(spec.phi->posterior()).mean, theta_bar);
    }
    return generative_interval(theta_bar, beta_moments(spec.p1->posterior()).mean,
                               beta_moments(spec.p0->posterior()).mean);
}

namespace {

json beta_to_json(const BetaParams& b) {
    return json{{"alpha", b.alpha}, {"beta", b.beta}};
}

json chance_to_json(const ChanceModel& c, json& out, const std::string& name) {
    out[name + "_prior"] = beta_to_json(c.prior);
    if (c.data) {
        out[name + "_data"] = json{{"successes", c.data->successes}, {"trials", c.data->trials}};
    }
    return out;
}

BetaParams parse_beta(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("alpha") || !j.contains("beta")) {
        throw Error(ErrorCode::InvalidSpec, where + " must be {\"alpha\": a, \"beta\": b}");
    }
    try {
        return BetaParams(j.at("alpha").get<double>(), j.at("beta").get<double>());
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidSpec, where + ": " + e.what());
    }
}

std::optional<BinomialData> parse_data(const json& spec, const std::string& name) {
    if (!spec.contains(name + "_data")) {
        return std::nullopt;
    }
    const json& j = spec.at(name + "_data");
    if (!j.is_object() || !j.contains("successes") || !j.contains("trials")) {
        throw Error(ErrorCode::InvalidSpec,
                    name + "_data must be {\"successes\": s, \"trials\": t}");
    }
    try {
        return BinomialData(j.at("successes").get<std::int64_t>(),
                            j.at("trials").get<std::int64_t>());
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidSpec, name + "_data: " + e.what());
    }
}

ChanceModel parse_chance(const json& spec, const std::string& name) {
    return ChanceModel{parse_beta(spec.at(name + "_prior"), name + "_prior"),
                       parse_data(spec, name)};
}

const char* kKnownKeys[] = {"mode",     "theta_prior", "p1_prior", "p0_prior", "phi_prior",
                            "p1_data",  "p0_data",     "phi_data", "n",        "seed",
                            "burn_in",  "thin"};

} // namespace

ModelRun parse_model_run(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    if (!doc.is_object()) {
        throw Error(ErrorCode::InvalidSpec, "model spec must be a JSON object");
    }
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        bool known = false;
        for (const char* k : kKnownKeys) {
            if (key == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw Error(ErrorCode::InvalidSpec, "unknown field \"" + key + "\"");
        }
    }
    if (!doc.contains("mode") || !doc.contains("theta_prior")) {
        throw Error(ErrorCode::InvalidSpec, "mode and theta_prior are required");
    }
    const ModelMode mode = model_mode_from_string(doc.at("mode").get<std::string>());
    ModelSpec spec{mode, parse_beta(doc.at("theta_prior"), "theta_prior"),
                   std::nullopt, std::nullopt, std::nullopt};
    if (mode == ModelMode::generative) {
        if (!doc.contains("p1_prior") || !doc.contains("p0_prior")) {
            throw Error(ErrorCode::InvalidSpec, "generative mode needs p1_prior and p0_prior");
        }
        spec.p1 = parse_chance(doc, "p1");
        spec.p0 = parse_chance(doc, "p0");
        if (doc.contains("phi_prior") || doc.contains("phi_data")) {
            throw Error(ErrorCode::InvalidSpec, "generative mode must not declare phi");
        }
    } else {
        if (!doc.contains("phi_prior")) {
            throw Error(ErrorCode::InvalidSpec, "direct mode needs phi_prior");
        }
        spec.phi = parse_chance(doc, "phi");
        for (const char* k : {"p1_prior", "p0_prior", "p1_data", "p0_data"}) {
            if (doc.contains(k)) {
                throw Error(ErrorCode::InvalidSpec, "direct mode must not declare p1 or p0");
            }
        }
    }
    spec.validate();

    ModelRun run{spec, 50000, std::nullopt, 0, 1};
    run.n = doc.value("n", std::int64_t{50000});
    if (doc.contains("seed")) {
        run.seed = doc.at("seed").get<std::uint64_t>();
    }
    run.burn_in = doc.value("burn_in", std::int64_t{0});
    run.thin = doc.value("thin", std::int64_t{1});
    if (run.n < 1 || run.burn_in < 0 || run.thin < 1) {
        throw Error(ErrorCode::InvalidSpec, "need n >= 1, burn_in >= 0, thin >= 1");
    }
    return run;
}

ModelRun parse_model_run_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path);
    }
    return parse_model_run(in);
}

std::string serialize(const ModelSpec& spec, int indent) {
    json out{{"mode", to_string(spec.mode)}, {"theta_prior", beta_to_json(spec.theta_prior)}};
    if (spec.p1) chance_to_json(*spec.p1, out, "p1");
    if (spec.p0) chance_to_json(*spec.p0, out, "p0");
    if (spec.phi) chance_to_json(*spec.phi, out, "phi");
    return out.dump(indent);
}

std::string spec_hash(const ModelSpec& spec) {
    const std::string canonical = serialize(spec, -1);
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_draws_csv(std::ostream& out, const DrawSet& d) {
    out << "# causebound drawset v1\n";
    out << "# seed=" << d.seed << "\n";
    out << "# n=" << d.n << "\n";
    out << "# mode=" << to_string(d.mode) << "\n";
    out << "# spec_hash=" << d.spec_hash << "\n";
    out << "lower,upper\n";
    char buf[80];
    for (std::int64_t k = 0; k < d.n; ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", d.lowers[k], d.uppers[k]);
        out << buf;
    }
}

DrawSet read_draws_csv(std::istream& in) {
    std::uint64_t seed = 0;
    std::int64_t n = -1;
    ModelMode mode = ModelMode::direct;
    std::string hash;
    std::string line;
    std::vector<double> lowers;
    std::vector<double> uppers;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                continue;
            }
            std::string key = line.substr(2, eq - 2);
            std::string value = line.substr(eq + 1);
            if (key == "seed") seed = std::stoull(value);
            else if (key == "n") n = std::stoll(value);
            else if (key == "mode") mode = model_mode_from_string(value);
            else if (key == "spec_hash") hash = value;
            continue;
        }
        if (!saw_header) {
            if (line != "lower,upper") {
                throw Error(ErrorCode::ParseError, "expected \"lower,upper\" header, got: " + line);
            }
            saw_header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw Error(ErrorCode::ParseError, "bad drawset row: " + line);
        }
        try {
            lowers.push_back(std::stod(line.substr(0, comma)));
            uppers.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, "bad drawset row: " + line);
        }
    }
    if (lowers.empty()) {
        throw Error(ErrorCode::EmptyInput, "drawset file contains no rows");
    }
    if (n >= 0 && n != static_cast<std::int64_t>(lowers.size())) {
        throw Error(ErrorCode::ValidationError,
                    "drawset header n does not match the row count");
    }
    DrawSet d{seed, static_cast<std::int64_t>(lowers.size()),
              Eigen::Map<Eigen::ArrayXd>(lowers.data(), static_cast<Eigen::Index>(lowers.size())),
              Eigen::Map<Eigen::ArrayXd>(uppers.data(), static_cast<Eigen::Index>(uppers.size())),
              mode, hash};
    return d;
}

} // namespace causebound
