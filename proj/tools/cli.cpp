#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "featnet/config.hpp"
#include "featnet/harness.hpp"
#include "featnet/kernels.hpp"
#include "featnet/topology.hpp"
#include "featnet/trace_io.hpp"

namespace featnet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
}

std::string fmt(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct RunArgs {
    std::string config;
    std::string out = "out";
    std::vector<std::string> sets;
    std::size_t seeds = 1;
    bool strict = false;
};

int cmd_run(const RunArgs& a, std::ostream& out) {
    const auto base = load_config(a.config, a.sets);
    bool invariants_ok = true;
    for (std::size_t r = 0; r < a.seeds; ++r) {
        std::vector<std::string> sets = a.sets;
        std::string dir = a.out;
        if (a.seeds > 1) {
            const auto seed = base.algorithm.seed + r;
            sets.push_back("algorithm.seed=" + std::to_string(seed));
            dir = (fs::path(a.out) / ("seed_" + std::to_string(seed))).string();
        }
        const auto cfg = a.seeds > 1 ? load_config(a.config, sets) : base;
        const auto exp = prepare_experiment(cfg);
        const auto trace = run_experiment(exp);
        const auto report = audit_invariants(trace);
        ensure_dir(dir);
        write_trace_csv((fs::path(dir) / "trace.csv").string(), trace);
        auto summary = summary_json(trace, report);
        summary["overrides"] = sets;
        summary["reference"] = {{"risk_star", exp.reference.risk_star},
                                {"grad_norm", exp.reference.grad_norm},
                                {"iterations", exp.reference.iterations},
                                {"solver", exp.reference.solver}};
        write_json((fs::path(dir) / "summary.json").string(), summary);
        for (const auto& w : trace.warnings) out << "warning: " << w << '\n';
        const auto& last = trace.records.back();
        out << to_string(trace.algorithm) << " seed=" << trace.seed << " mu=" << trace.step_size
            << " iters=" << trace.iterations << " excess_risk=" << fmt(last.excess_risk)
            << " invariants=" << (report.passed() ? "pass" : "FAIL") << " -> " << dir << '\n';
        if (!report.passed()) {
            invariants_ok = false;
            for (const auto& c : report.checks) {
                if (c.status == CheckStatus::fail) {
                    out << "  " << c.name << " failed at iteration "
                        << (c.first_violation ? std::to_string(*c.first_violation) : "?") << " (worst "
                        << c.worst << " at " << c.worst_iter << ")\n";
                }
            }
        }
    }
    return a.strict && !invariants_ok ? kExitInvariant : kExitOk;
}

struct GenDataArgs {
    std::string config;
    std::vector<std::string> sets;
    std::string out = "data.csv";
};

int cmd_gen_data(const GenDataArgs& a, std::ostream& out) {
    const auto cfg = a.config.empty() ? parse_config(json::object(), a.sets) : load_config(a.config, a.sets);
    const auto data = build_dataset(cfg.dataset, cfg.model);
    write_csv(a.out, data);
    out << "wrote " << data.N << " x " << data.M << " dataset to " << a.out << '\n';
    return kExitOk;
}

struct GenTopologyArgs {
    std::string kind = "ring";
    std::size_t K = 4;
    double radius = 0.0;
    std::uint64_t seed = 1;
    std::string out = "topology.json";
};

int cmd_gen_topology(const GenTopologyArgs& a, std::ostream& out) {
    TopologyConfig c;
    c.kind = a.kind;
    c.K = a.K;
    c.radius = a.radius;
    c.seed = a.seed;
    if (c.kind == "file") throw ConfigError("--kind: file is not a generator");
    const auto topo = build_topology(c);
    write_topology(a.out, topo.graph, topo.matrix);
    out << "K=" << topo.graph.size() << " edges=" << topo.graph.edges().size() << " lambda="
        << std::setprecision(17) << topo.matrix.lambda() << " -> " << a.out << '\n';
    return kExitOk;
}

int cmd_audit(const std::vector<std::string>& traces, std::ostream& out) {
    bool ok = true;
    for (const auto& path : traces) {
        const auto trace = read_trace_csv(path);
        const auto report = audit_invariants(trace);
        out << path << ": " << (report.passed() ? "pass" : "FAIL") << '\n';
        for (const auto& c : report.checks) {
            out << "  " << std::left << std::setw(24) << c.name << to_string(c.status);
            if (c.status != CheckStatus::not_applicable) out << "  worst=" << c.worst << " @" << c.worst_iter;
            if (c.first_violation) out << "  first_violation=" << *c.first_violation;
            if (!c.detail.empty()) out << "  (" << c.detail << ")";
            out << '\n';
        }
        ok = ok && report.passed();
    }
    return ok ? kExitOk : kExitInvariant;
}

struct CompareArgs {
    std::vector<std::string> configs;
    std::vector<std::string> sets;
    std::string out = "compare";
    double threshold = 1e-6;
};

template <typename Key, typename GetKey>
void write_aligned(const std::string& path, const std::string& key_name, const std::vector<std::string>& labels,
                   const std::vector<RunTrace>& traces, GetKey key_of) {
    std::map<Key, std::vector<double>> rows;
    for (std::size_t t = 0; t < traces.size(); ++t) {
        for (const auto& r : traces[t].records) {
            auto& row = rows[key_of(r)];
            if (row.empty()) row.assign(traces.size(), kNotApplicable);
            row[t] = r.excess_risk;
        }
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << key_name;
    for (const auto& l : labels) f << ',' << l;
    f << '\n';
    for (const auto& [key, row] : rows) {
        if constexpr (std::is_floating_point_v<Key>) f << fmt(key);
        else f << key;
        for (double v : row) f << ',' << fmt(v);
        f << '\n';
    }
}

int cmd_compare(const CompareArgs& a, std::ostream& out) {
    if (a.configs.size() < 2) throw ConfigError("compare needs at least two configs");
    std::vector<ExperimentConfig> cfgs;
    for (const auto& p : a.configs) cfgs.push_back(load_config(p, a.sets));
    for (std::size_t i = 1; i < cfgs.size(); ++i) {
        for (const char* section : {"dataset", "model"}) {
            if (cfgs[i].resolved[section] != cfgs[0].resolved[section]) {
                throw ConfigError(a.configs[i] + ": " + section + " differs from " + a.configs[0] +
                                  "; compared runs must share the dataset and reference");
            }
        }
    }
    std::vector<RunTrace> traces;
    std::vector<std::string> labels;
    json summary = json::array();
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        const auto exp = prepare_experiment(cfgs[i]);
        traces.push_back(run_experiment(exp));
        const auto& t = traces.back();
        std::string label = to_string(t.algorithm);
        if (t.algorithm == Algorithm::pvrd2) label += "_J" + std::to_string(t.J) + "_B" + std::to_string(t.B);
        label += "_" + std::to_string(i);
        labels.push_back(label);
        std::optional<std::size_t> at_iter;
        json reached = nullptr;
        for (const auto& r : t.records) {
            if (r.excess_risk < a.threshold) {
                reached = {{"iter", r.iter}, {"gradient_evals", r.gradient_evals}, {"comm_net", r.comm_net}};
                break;
            }
        }
        summary.push_back({{"label", label},
                           {"config", a.configs[i]},
                           {"final_excess_risk", t.records.back().excess_risk},
                           {"threshold", a.threshold},
                           {"reached", reached}});
        out << label << ": final excess risk " << fmt(t.records.back().excess_risk);
        if (!reached.is_null()) {
            out << ", below " << a.threshold << " after " << reached["gradient_evals"].get<std::uint64_t>()
                << " gradients / " << fmt(reached["comm_net"].get<double>()) << " scalars per edge";
        }
        out << '\n';
    }
    ensure_dir(a.out);
    write_aligned<std::uint64_t>((fs::path(a.out) / "compare_by_gradients.csv").string(), "gradient_evals",
                                 labels, traces, [](const TraceRecord& r) { return r.gradient_evals; });
    write_aligned<double>((fs::path(a.out) / "compare_by_comm.csv").string(), "comm_net", labels, traces,
                          [](const TraceRecord& r) { return r.comm_net; });
    write_json((fs::path(a.out) / "compare_summary.json").string(), summary);
    return kExitOk;
}

struct RateArgs {
    std::optional<double> lambda;
    std::string topology;
    std::size_t J = 1;
    std::size_t N = 0;
    double mu = 0.0;
    double nu = 0.0;
    bool corollary = false;
};

int cmd_rate_bound(const RateArgs& a, std::ostream& out) {
    if (a.lambda.has_value() == !a.topology.empty()) {
        throw ConfigError("rate-bound: give exactly one of --lambda or --topology");
    }
    const double lambda = a.lambda ? *a.lambda : read_topology(a.topology).matrix.lambda();
    RateBound rb;
    try {
        rb = a.corollary ? corollary_rate_bound(lambda, a.N, a.mu, a.nu) : rate_bound(lambda, a.J, a.N, a.mu, a.nu);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("rate-bound: ") + e.what());
    }
    out << std::setprecision(17) << "lambda=" << lambda << "\nrho=" << rb.rho
        << "\nnetwork_term=" << rb.network_term << "\nconvexity_term=" << rb.convexity_term
        << "\nbranch=" << (rb.network_limited() ? "network-limited" : "strong-convexity-limited") << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"featnet: feature-partitioned decentralized ERM simulator"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "run one experiment config");
    run->add_option("--config", run_args.config, "experiment config (JSON)")->required();
    run->add_option("--out", run_args.out, "output directory");
    run->add_option("--set", run_args.sets, "override key=value (repeatable)");
    run->add_option("--seeds", run_args.seeds, "replicates with consecutive algorithm seeds")
        ->check(CLI::PositiveNumber);
    run->add_flag("--strict-invariants", run_args.strict, "exit 4 when an invariant audit fails");

    GenDataArgs data_args;
    auto* gen_data = app.add_subcommand("gen-data", "write the configured dataset as CSV (label last)");
    gen_data->add_option("--config", data_args.config, "experiment config (defaults when omitted)");
    gen_data->add_option("--set", data_args.sets, "override key=value (repeatable)");
    gen_data->add_option("--out", data_args.out, "output CSV path");

    GenTopologyArgs topo_args;
    auto* gen_topo = app.add_subcommand("gen-topology", "write a graph and Metropolis weights as JSON");
    gen_topo->add_option("--kind", topo_args.kind, "ring | path | complete | rgg")
        ->check(CLI::IsMember({"ring", "path", "complete", "rgg"}));
    gen_topo->add_option("--K", topo_args.K, "agent count")->check(CLI::PositiveNumber);
    gen_topo->add_option("--radius", topo_args.radius, "connection radius (rgg)");
    gen_topo->add_option("--seed", topo_args.seed, "placement seed (rgg)");
    gen_topo->add_option("--out", topo_args.out, "output JSON path");

    std::vector<std::string> audit_paths;
    auto* audit = app.add_subcommand("audit", "audit invariant channels of trace files");
    audit->add_option("traces", audit_paths, "trace CSV files")->required();

    CompareArgs cmp_args;
    auto* compare = app.add_subcommand("compare", "run several configs and align their excess risk");
    compare->add_option("configs", cmp_args.configs, "experiment configs")->required();
    compare->add_option("--set", cmp_args.sets, "override applied to every config");
    compare->add_option("--out", cmp_args.out, "output directory");
    compare->add_option("--threshold", cmp_args.threshold, "excess-risk level reported per run");

    RateArgs rate_args;
    auto* rate = app.add_subcommand("rate-bound", "evaluate the linear-rate bound");
    rate->add_option("--lambda", rate_args.lambda, "mixing rate");
    rate->add_option("--topology", rate_args.topology, "topology JSON (lambda computed)");
    rate->add_option("--J", rate_args.J, "pipeline depth");
    rate->add_option("--N", rate_args.N, "sample count")->required();
    rate->add_option("--mu", rate_args.mu, "step size")->required();
    rate->add_option("--nu", rate_args.nu, "strong-convexity modulus")->required();
    rate->add_flag("--corollary", rate_args.corollary, "use the J = 1 variant");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    kernels::configure_threads_from_env();
    try {
        if (*run) return cmd_run(run_args, out);
        if (*gen_data) return cmd_gen_data(data_args, out);
        if (*gen_topo) return cmd_gen_topology(topo_args, out);
        if (*audit) return cmd_audit(audit_paths, out);
        if (*compare) return cmd_compare(cmp_args, out);
        if (*rate) return cmd_rate_bound(rate_args, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DivergenceError& e) {
        err << "diverged: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace featnet
