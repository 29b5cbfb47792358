#include "sperner_fix/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "sperner_fix/embedding.hpp"
#include "sperner_fix/errors.hpp"
#include "sperner_fix/maps.hpp"
#include "sperner_fix/serialization.hpp"
#include "sperner_fix/solver.hpp"
#include "sperner_fix/sperner.hpp"

namespace sperner_fix::cli {

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw UsageError("cannot open output file '" + path + "'");
    file << text;
}

Json read_json_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw UsageError("cannot read spec file '" + path + "'");
    std::stringstream buffer;
    buffer << file.rdbuf();
    const std::string text = buffer.str();
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw UsageError(path + ":" + std::to_string(line) + ":" + std::to_string(column) +
                         ": malformed JSON");
    }
}

SearchMode parse_search(const std::string& mode) {
    if (mode == "path") return SearchMode::path;
    if (mode == "exhaustive") return SearchMode::exhaustive;
    throw UsageError("--mode must be path or exhaustive for this command");
}

void validate(const SolveOptions& o) {
    if (o.map.empty() == o.spec.empty()) throw UsageError("exactly one of --map and --spec is required");
    if (!(o.eps > 0.0)) throw UsageError("--eps must be positive");
    if (o.tau_fix && !(*o.tau_fix > 0.0)) throw UsageError("--tau-fix must be positive");
    if (!(o.tau_proj > 0.0)) throw UsageError("--tau-proj must be positive");
    if (o.max_resolution < 1) throw UsageError("--max-resolution must be at least 1");
    if (o.max_net_size < 1) throw UsageError("--max-net-size must be at least 1");
    if (o.workers < 1) throw UsageError("--workers must be at least 1");
    if (o.n < 0) throw UsageError("--n must be non-negative");
    parse_search(o.mode);
}

SolverConfig solver_config(const SolveOptions& o) {
    SolverConfig c;
    c.tau_fix = o.tau_fix;
    c.seed = o.seed;
    c.max_resolution = o.max_resolution;
    c.search = parse_search(o.mode);
    c.workers = o.workers;
    return c;
}

/// Echo of everything that shapes the result; the worker count does not.
Json echo(const SolveOptions& o, const SolverConfig& c) {
    Json doc;
    if (!o.map.empty()) {
        doc["map"] = o.map;
        doc["n"] = o.n;
    } else {
        doc["spec"] = o.spec;
        doc["tau_proj"] = o.tau_proj;
        doc["max_net_size"] = o.max_net_size;
    }
    doc["eps"] = o.eps;
    doc["solver"] = config_to_json(c);
    return doc;
}

struct SpecRun {
    Json document;
    FixedPointResult simplex;
};

SpecRun run_spec(const SolveOptions& o, const SolverConfig& c) {
    const Json spec = read_json_file(o.spec);
    Domain domain;
    SeminormFamily family;
    AmbientMap g;
    try {
        if (!spec.contains("domain")) throw InvalidArgument("missing field 'domain'");
        if (!spec.contains("map")) throw InvalidArgument("missing field 'map'");
        domain = domain_from_json(spec.at("domain"));
        if (spec.contains("family")) family = family_from_json(spec.at("family"));
        else if (spec.contains("norm"))
            family = SeminormFamily::single(parse_norm_kind(spec.at("norm").get<std::string>()));
        else family = SeminormFamily::single(NormKind::l2);
        g = ambient_map_from_json(spec.at("map"));
    } catch (const InvalidArgument& e) {
        throw UsageError(o.spec + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(o.spec + ": " + e.what());
    }
    SchauderConfig config;
    config.solver = c;
    config.net.max_net_size = o.max_net_size;
    config.projection.tau_proj = o.tau_proj;
    SchauderResult result = schauder_solve(domain, g, family, o.eps, config);
    Json echoed = echo(o, c);
    echoed["domain"] = domain_to_json(domain);
    echoed["family"] = family_to_json(family);
    return {schauder_result_to_json(result, echoed), result.simplex};
}

/// Runs a solve and maps failures to exit codes. `on_result` receives the
/// result document and the simplex-side result when the solver finished.
template <typename OnResult>
int guarded_solve(const SolveOptions& o, std::ostream& err, OnResult on_result) {
    try {
        validate(o);
        const SolverConfig c = solver_config(o);
        if (!o.map.empty()) {
            SelfMap f = maps::builtin(o.map, o.n);
            FixedPointResult r = solve(f, o.eps, c);
            on_result(result_to_json(r, echo(o, c)), r);
            if (!r.ok()) {
                err << "non-constancy violation: " << r.message << '\n';
                return kNonConstancy;
            }
            return kOk;
        }
        SpecRun run = run_spec(o, c);
        on_result(run.document, run.simplex);
        if (!run.simplex.ok()) {
            err << "non-constancy violation: " << run.simplex.message << '\n';
            return kNonConstancy;
        }
        return kOk;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const TrivialDimension& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const InvalidArgument& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const ResolutionCap& e) {
        err << e.what() << '\n';
        return kResolutionCap;
    } catch (const ResolutionError& e) {
        err << e.what() << '\n';
        return kResolutionCap;
    } catch (const ProjectionFailure& e) {
        err << e.what() << '\n';
        return kProjectionFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kOtherFailure;
    }
}

struct VerifyTally {
    std::size_t labelings = 0;
    std::size_t parity_failures = 0;
    std::size_t handshake_failures = 0;
    std::size_t degree_failures = 0;
    std::size_t path_failures = 0;
    std::size_t walk_failures = 0;

    std::size_t failures() const {
        return parity_failures + handshake_failures + degree_failures + path_failures + walk_failures;
    }
};

void check_labeling(const SimplexGrid& grid, const Labeling& labeling, unsigned workers,
                    VerifyTally& tally) {
    ++tally.labelings;
    const auto found = find_fully_labeled_exhaustive(grid, labeling, workers);
    if (found.size() % 2 == 0) ++tally.parity_failures;

    const DualGraph graph = build_dual_graph(grid, labeling);
    const auto degrees = graph.degrees();
    if (!handshake_check(degrees, graph.edges.size()) || degrees[graph.outside] % 2 == 0)
        ++tally.handshake_failures;
    std::vector<std::size_t> odd_inside;
    bool degree_ok = true;
    for (std::size_t c = 0; c < graph.outside; ++c) {
        if (degrees[c] > 2) degree_ok = false;
        if (degrees[c] == 1) odd_inside.push_back(c);
    }
    if (!degree_ok || odd_inside != found) ++tally.degree_failures;

    const std::size_t path_cell = find_fully_labeled_path(grid, labeling);
    if (!std::binary_search(found.begin(), found.end(), path_cell)) ++tally.path_failures;

    try {
        auto walk = walk_to_fully_labeled(
            grid.dimension(), grid.resolution(),
            [&](const LatticePoint& p) { return labeling.labels[*grid.find_vertex(p)]; });
        std::vector<std::size_t> ids;
        for (const auto& v : walk.vertices) ids.push_back(*grid.find_vertex(v));
        std::sort(ids.begin(), ids.end());
        bool member = false;
        for (auto c : found) {
            auto cell = grid.cells()[c].vertex_ids;
            std::sort(cell.begin(), cell.end());
            member = member || cell == ids;
        }
        if (!member) ++tally.walk_failures;
    } catch (const Error&) {
        ++tally.walk_failures;
    }
}

struct HandshakeTally {
    std::size_t graphs = 0;
    std::size_t failures = 0;
};

HandshakeTally random_handshakes(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> node_count(1, 50);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    HandshakeTally tally;
    for (int g = 0; g < count; ++g) {
        const std::size_t nodes = node_count(rng);
        const double p = unit(rng);
        std::vector<std::size_t> degree(nodes, 0);
        std::size_t edges = 0;
        for (std::size_t a = 0; a < nodes; ++a)
            for (std::size_t b = a + 1; b < nodes; ++b)
                if (unit(rng) < p) {
                    ++degree[a];
                    ++degree[b];
                    ++edges;
                }
        ++tally.graphs;
        if (!handshake_check(degree, edges)) ++tally.failures;
    }
    return tally;
}

}  // namespace

unsigned default_workers() {
    if (const char* env = std::getenv("SPERNER_FIX_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<unsigned>(v);
    }
    return 1;
}

int cmd_solve(const SolveOptions& options, std::ostream& out, std::ostream& err) {
    return guarded_solve(options, err, [&](const Json& doc, const FixedPointResult&) {
        emit(doc.dump(2) + "\n", options.out, out);
    });
}

int cmd_trace(const SolveOptions& options, std::ostream& out, std::ostream& err) {
    return guarded_solve(options, err, [&](const Json&, const FixedPointResult& r) {
        if (r.ok()) emit(trace_to_csv(r), options.out, out);
    });
}

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
    try {
        if (!o.n && o.handshake_random <= 0)
            throw UsageError("verify needs --n (with --m) or --handshake-random");
        if (o.mode != "auto" && o.mode != "exhaustive" && o.mode != "random")
            throw UsageError("--mode must be auto, exhaustive or random for verify");
        if (o.samples < 1) throw UsageError("--samples must be at least 1");

        Json report;
        bool passed = true;
        if (o.n) {
            if (*o.n < 1 || o.m < 1) throw UsageError("verify needs --n >= 1 and --m >= 1");
            if (std::pow(static_cast<double>(o.m), *o.n) > 2e6)
                throw UsageError("grid too large to verify: m^n exceeds 2e6 cells");
            const SimplexGrid grid = subdivide(*o.n, o.m);
            const std::size_t total = count_admissible_labelings(grid);
            std::string mode = o.mode;
            if (mode == "auto") mode = total <= o.max_exhaustive ? "exhaustive" : "random";
            if (mode == "exhaustive" && total > o.max_exhaustive)
                throw UsageError("exhaustive mode would visit " + std::to_string(total) +
                                 " labelings; the cap is " + std::to_string(o.max_exhaustive));

            VerifyTally tally;
            if (mode == "exhaustive") {
                for_each_admissible_labeling(grid, [&](const Labeling& l) {
                    check_labeling(grid, l, o.workers, tally);
                    return true;
                });
            } else {
                std::mt19937_64 rng(o.seed);
                for (int s = 0; s < o.samples; ++s)
                    check_labeling(grid, random_admissible_labeling(grid, rng), o.workers, tally);
            }
            report["n"] = *o.n;
            report["m"] = o.m;
            report["mode"] = mode;
            report["cells"] = grid.cells().size();
            report["admissible_labelings"] = total;
            report["labelings_checked"] = tally.labelings;
            report["parity_failures"] = tally.parity_failures;
            report["handshake_failures"] = tally.handshake_failures;
            report["degree_failures"] = tally.degree_failures;
            report["path_failures"] = tally.path_failures;
            report["walk_failures"] = tally.walk_failures;
            passed = passed && tally.failures() == 0;
        }
        if (o.handshake_random > 0) {
            auto tally = random_handshakes(o.handshake_random, o.seed);
            report["handshake_random"] = {{"graphs", tally.graphs}, {"failures", tally.failures}};
            passed = passed && tally.failures == 0;
        }
        report["passed"] = passed;
        report["config"] = {{"seed", o.seed}, {"samples", o.samples}, {"mode", o.mode},
                            {"max_exhaustive", o.max_exhaustive}};
        emit(report.dump(2) + "\n", o.out, out);
        return passed ? kOk : kVerificationFailure;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kVerificationFailure;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Approximate fixed points of simplex self-maps by Sperner labelings"};
    app.require_subcommand(1);

    SolveOptions solve_opts;
    solve_opts.workers = default_workers();
    SolveOptions trace_opts = solve_opts;
    VerifyOptions verify_opts;
    verify_opts.workers = default_workers();
    std::optional<double> solve_tau_fix, trace_tau_fix;

    auto add_solve_flags = [](CLI::App* cmd, SolveOptions& o, std::optional<double>& tau_fix) {
        cmd->add_option("--map", o.map, "built-in map: constant, cyclic-shift, affine-contraction, "
                                        "quadratic, edge-fixing, identity");
        cmd->add_option("--spec", o.spec, "JSON file with domain, family and map");
        cmd->add_option("--n", o.n, "simplex dimension for --map");
        cmd->add_option("--eps", o.eps, "target residual");
        cmd->add_option("--seed", o.seed, "perturbation seed");
        cmd->add_option("--workers", o.workers, "labeling threads (env SPERNER_FIX_WORKERS)");
        cmd->add_option("--out", o.out, "output file (default stdout)");
        cmd->add_option("--mode", o.mode, "search: path or exhaustive");
        cmd->add_option("--m", o.max_resolution, "resolution cap");
        cmd->add_option("--tau-fix", tau_fix, "early-exit residual (default eps_k/4)");
        cmd->add_option("--tau-proj", o.tau_proj, "projection tolerance for --spec");
        cmd->add_option("--max-net-size", o.max_net_size, "net size cap for --spec");
    };

    auto* solve_cmd = app.add_subcommand("solve", "compute an approximate fixed point (JSON)");
    add_solve_flags(solve_cmd, solve_opts, solve_tau_fix);
    auto* trace_cmd = app.add_subcommand("trace", "emit the refinement trace (CSV)");
    add_solve_flags(trace_cmd, trace_opts, trace_tau_fix);

    auto* verify_cmd = app.add_subcommand("verify", "check parity, handshaking and path search");
    verify_cmd->add_option("--n", verify_opts.n, "grid dimension");
    verify_cmd->add_option("--m", verify_opts.m, "grid resolution");
    verify_cmd->add_option("--mode", verify_opts.mode, "auto, exhaustive or random");
    verify_cmd->add_option("--samples", verify_opts.samples, "random labelings");
    verify_cmd->add_option("--handshake-random", verify_opts.handshake_random, "random graphs to check");
    verify_cmd->add_option("--seed", verify_opts.seed, "random seed");
    verify_cmd->add_option("--workers", verify_opts.workers, "scan threads");
    verify_cmd->add_option("--out", verify_opts.out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n' << app.help();
        return kUsage;
    }

    if (solve_cmd->parsed()) {
        solve_opts.tau_fix = solve_tau_fix;
        return cmd_solve(solve_opts, out, err);
    }
    if (trace_cmd->parsed()) {
        trace_opts.tau_fix = trace_tau_fix;
        return cmd_trace(trace_opts, out, err);
    }
    return cmd_verify(verify_opts, out, err);
}

}  // namespace sperner_fix::cli
