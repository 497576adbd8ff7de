#include "causebound/oracle_sim.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "causebound/rng.hpp"

namespace causebound {

using nlohmann::json;

namespace {

constexpr std::int64_t kSimBlock = 65536;

} // namespace

ExposureMechanism ExposureMechanism::exogenous(double theta) {
    return ExposureMechanism{false, checked_probability(theta, "theta"), {0.0, 0.0, 0.0, 0.0}};
}

ExposureMechanism ExposureMechanism::confounded_cells(const std::array<double, 4>& cells) {
    ExposureMechanism m{true, 0.0, cells};
    const char* names[] = {"theta00", "theta01", "theta10", "theta11"};
    for (std::size_t i = 0; i < 4; ++i) {
        m.cell_theta[i] = checked_probability(cells[i], names[i]);
    }
    return m;
}

PopulationTally simulate(const PopulationSpec& spec, int threads) {
    if (spec.n < 1) {
        throw Error(ErrorCode::ValidationError, "population size must be >= 1");
    }
    // Cumulative cell chances in (q00, q01, q10, q11) order.
    const double c0 = spec.joint.q00;
    const double c1 = c0 + spec.joint.q01;
    const double c2 = c1 + spec.joint.q10;

    const std::int64_t blocks = (spec.n + kSimBlock - 1) / kSimBlock;
    std::vector<PopulationTally> partial(static_cast<std::size_t>(blocks));

    auto run_block = [&](std::int64_t b) {
        const std::int64_t len = std::min(kSimBlock, spec.n - b * kSimBlock);
        SplitMix64 g = substream(spec.seed, static_cast<std::uint64_t>(b));
        PopulationTally& t = partial[static_cast<std::size_t>(b)];
        for (std::int64_t i = 0; i < len; ++i) {
            const double u = uniform01(g);
            int r0;
            int r1;
            if (u < c0) {
                r0 = 0; r1 = 0;
            } else if (u < c1) {
                r0 = 0; r1 = 1;
            } else if (u < c2) {
                r0 = 1; r1 = 0;
            } else {
                r0 = 1; r1 = 1;
            }
            const int e = uniform01(g) < spec.exposure.chance(r0, r1) ? 1 : 0;
            ++t.counts[static_cast<std::size_t>(e * 4 + r0 * 2 + r1)];
        }
        t.n = len;
    };

    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(blocks)));
    if (workers == 1) {
        for (std::int64_t b = 0; b < blocks; ++b) {
            run_block(b);
        }
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&run_block, blocks, workers, w] {
                for (std::int64_t b = w; b < blocks; b += workers) {
                    run_block(b);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    PopulationTally total;
    for (const auto& t : partial) {
        for (std::size_t i = 0; i < 8; ++i) {
            total.counts[i] += t.counts[i];
        }
        total.n += t.n;
    }
    return total;
}

double empirical_pc(const PopulationTally& t) {
    const std::int64_t exposed_responders = t.count(1, 0, 1) + t.count(1, 1, 1);
    if (exposed_responders == 0) {
        throw Error(ErrorCode::NoExposedResponders, "no individuals with E=1 and R1=1");
    }
    return static_cast<double>(t.count(1, 0, 1)) / static_cast<double>(exposed_responders);
}

MarginalChances empirical_marginals(const PopulationTally& t) {
    std::int64_t exposed = 0;
    std::int64_t unexposed = 0;
    for (int r0 = 0; r0 < 2; ++r0) {
        for (int r1 = 0; r1 < 2; ++r1) {
            exposed += t.count(1, r0, r1);
            unexposed += t.count(0, r0, r1);
        }
    }
    if (exposed == 0 || unexposed == 0) {
        throw Error(ErrorCode::EmptyArm, "an exposure arm is empty");
    }
    const std::int64_t exposed_r1 = t.count(1, 0, 1) + t.count(1, 1, 1);
    const std::int64_t unexposed_r0 = t.count(0, 1, 0) + t.count(0, 1, 1);
    return MarginalChances(static_cast<double>(exposed_r1) / static_cast<double>(exposed),
                           static_cast<double>(unexposed_r0) / static_cast<double>(unexposed));
}

ContainmentReport sufficiency_violation_demo(const PopulationSpec& spec, int threads) {
    const PopulationTally t = simulate(spec, threads);
    const double pc = empirical_pc(t);
    const MarginalChances m = empirical_marginals(t);
    const UncertaintyInterval bounds = pc_bounds(m);
    return ContainmentReport{pc, m, bounds, bounds.contains(pc)};
}

PopulationSpec parse_population_spec(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    for (const char* field : {"joint", "exposure", "n", "seed"}) {
        if (!doc.contains(field)) {
            throw Error(ErrorCode::ValidationError,
                        std::string("population spec: \"") + field + "\" is missing");
        }
    }
    const json& jq = doc.at("joint");
    for (const char* field : {"q00", "q01", "q10", "q11"}) {
        if (!jq.contains(field)) {
            throw Error(ErrorCode::ValidationError,
                        std::string("population spec: joint.") + field + " is missing");
        }
    }
    PotentialJoint joint(jq.at("q00").get<double>(), jq.at("q01").get<double>(),
                         jq.at("q10").get<double>(), jq.at("q11").get<double>());
    const json& je = doc.at("exposure");
    ExposureMechanism mech = ExposureMechanism::exogenous(0.0);
    if (je.contains("exogenous")) {
        mech = ExposureMechanism::exogenous(je.at("exogenous").at("theta").get<double>());
    } else if (je.contains("confounded")) {
        const json& jc = je.at("confounded");
        mech = ExposureMechanism::confounded_cells(
            {jc.at("theta00").get<double>(), jc.at("theta01").get<double>(),
             jc.at("theta10").get<double>(), jc.at("theta11").get<double>()});
    } else {
        throw Error(ErrorCode::ValidationError,
                    "exposure must declare \"exogenous\" or \"confounded\"");
    }
    PopulationSpec spec{joint, mech, doc.at("n").get<std::int64_t>(),
                        doc.at("seed").get<std::uint64_t>()};
    if (spec.n < 1) {
        throw Error(ErrorCode::ValidationError, "population size must be >= 1");
    }
    return spec;
}

PopulationSpec parse_population_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path);
    }
    return parse_population_spec(in);
}

std::string serialize(const PopulationSpec& spec, int indent) {
    json out{{"joint",
              {{"q00", spec.joint.q00},
               {"q01", spec.joint.q01},
               {"q10", spec.joint.q10},
               {"q11", spec.joint.q11}}},
             {"n", spec.n},
             {"seed", spec.seed}};
    if (spec.exposure.confounded) {
        out["exposure"] = {{"confounded",
                            {{"theta00", spec.exposure.cell_theta[0]},
                             {"theta01", spec.exposure.cell_theta[1]},
                             {"theta10", spec.exposure.cell_theta[2]},
                             {"theta11", spec.exposure.cell_theta[3]}}}};
    } else {
        out["exposure"] = {{"exogenous", {{"theta", spec.exposure.theta}}}};
    }
    return out.dump(indent);
}

void write_tally_csv(std::ostream& out, const PopulationTally& t, std::uint64_t seed) {
    out << "# causebound tally v1\n";
    out << "# seed=" << seed << "\n";
    out << "# n=" << t.n << "\n";
    out << "e,r0,r1,count\n";
    for (int e = 0; e < 2; ++e) {
        for (int r0 = 0; r0 < 2; ++r0) {
            for (int r1 = 0; r1 < 2; ++r1) {
                out << e << ',' << r0 << ',' << r1 << ',' << t.count(e, r0, r1) << '\n';
            }
        }
    }
}

} // namespace causebound
