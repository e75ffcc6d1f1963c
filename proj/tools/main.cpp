#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "odcsim/config.hpp"
#include "odcsim/experiment.hpp"
#include "odcsim/primitives.hpp"
#include "odcsim/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInternal = 4;

struct CommonFlags {
    std::string config_path;
    std::string strategy;
    std::string scheme;
    std::string sharding;
    int minibatch_size = 0;
    double packing_ratio = 0.0;
    int devices = 0;
    int per_node = 0;
    std::int64_t seed = -1;
    std::string format;
    std::string workload;  // file path or distribution spec
    std::int64_t n = 0;
    std::int64_t cap = 0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file (defaults are the golden setting)");
    cmd->add_option("--strategy", f.strategy,
                    "local-sort|lb-micro|lb-mini|verl-native|verl-optimized");
    cmd->add_option("--scheme", f.scheme, "collective|odc");
    cmd->add_option("--sharding", f.sharding, "full|hybrid");
    cmd->add_option("--minibatch-size", f.minibatch_size, "samples per device per step");
    cmd->add_option("--packing-ratio", f.packing_ratio, "microbatch budget / max length");
    cmd->add_option("--devices", f.devices, "total device count D");
    cmd->add_option("--per-node", f.per_node, "devices per node G");
    cmd->add_option("--seed", f.seed, "RNG seed");
    cmd->add_option("--format", f.format, "json|csv|md");
    cmd->add_option("--workload", f.workload,
                    "length file path or distribution spec like lognormal:mu=8,sigma=1.5");
    cmd->add_option("--n", f.n, "synthetic sample count");
    cmd->add_option("--cap", f.cap, "synthetic length cap in tokens");
}

odcsim::ExperimentConfig build_config(const CommonFlags& f) {
    odcsim::ExperimentConfig cfg;
    if (!f.config_path.empty()) cfg = odcsim::load_config_file(f.config_path);
    if (!f.strategy.empty()) cfg.strategy = odcsim::parse_strategy(f.strategy);
    if (!f.scheme.empty()) cfg.scheme = odcsim::parse_scheme(f.scheme);
    if (!f.sharding.empty()) cfg.sharding = odcsim::parse_sharding(f.sharding);
    if (f.minibatch_size > 0) cfg.minibatch_size = f.minibatch_size;
    if (f.packing_ratio > 0.0) cfg.packing_ratio = f.packing_ratio;
    if (f.devices > 0) {
        cfg.cluster.devices = f.devices;
        if (f.per_node <= 0 && cfg.cluster.per_node > f.devices) cfg.cluster.per_node = f.devices;
    }
    if (f.per_node > 0) cfg.cluster.per_node = f.per_node;
    if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
    if (!f.format.empty()) cfg.format = f.format;
    if (!f.workload.empty()) {
        if (f.workload.find(':') != std::string::npos) {
            cfg.workload_spec = f.workload;
            cfg.workload_path.clear();
        } else {
            cfg.workload_path = f.workload;
        }
    }
    if (f.n > 0) cfg.workload_n = f.n;
    if (f.cap > 0) cfg.workload_cap = f.cap;
    cfg.validate();
    return cfg;
}

void print_table(const odcsim::ReportTable& table, const std::string& format) {
    std::cout << odcsim::emit_report(table, odcsim::parse_format(format));
}

int run(int argc, char** argv) {
    CLI::App app{"Batching and communication simulator for imbalanced data-parallel training"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string trace_out;
    int jobs = 1;
    std::string axis = "minibatch-size";
    std::vector<double> values;
    int vp_clients = 4;
    int vp_minibatches = 100;
    std::int64_t vp_seed = 0;

    CLI::App* simulate = app.add_subcommand("simulate", "plan a workload and report runtimes");
    add_common_flags(simulate, flags);
    simulate->add_option("--trace-out", trace_out, "write a Chrome trace of the first step");

    CLI::App* sweep = app.add_subcommand("sweep", "vary one factor, report acceleration ratios");
    add_common_flags(sweep, flags);
    sweep->add_option("--axis", axis, "minibatch-size|max-length-ratio|packing-ratio|devices");
    sweep->add_option("--values", values, "axis values, strictly increasing")->delimiter(',');
    sweep->add_option("--jobs", jobs, "concurrent sweep points");

    CLI::App* partition = app.add_subcommand("partition", "dump the batching solutions as JSON");
    add_common_flags(partition, flags);

    CLI::App* volume = app.add_subcommand("volume", "per-client communication volume table");
    add_common_flags(volume, flags);
    double shard_elems = 0.0;
    volume->add_option("--shard-elems", shard_elems, "per-device shard size K in elements");

    CLI::App* verify = app.add_subcommand("verify-primitives",
                                          "randomized gather/scatter-accumulate equivalence suite");
    verify->add_option("--clients", vp_clients, "concurrent client count");
    verify->add_option("--minibatches", vp_minibatches, "randomized minibatches to run");
    verify->add_option("--seed", vp_seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (simulate->parsed()) {
        odcsim::ExperimentConfig cfg = build_config(flags);
        odcsim::ExperimentReport report = odcsim::run_experiment(cfg);
        if (!trace_out.empty()) {
            const odcsim::Workload w = cfg.build_workload();
            const odcsim::MemoryBudget budget{
                odcsim::token_budget(w.max_length(), cfg.packing_ratio)};
            auto planned = odcsim::plan(cfg.strategy, w, cfg.cluster.devices, cfg.minibatch_size,
                                        budget, cfg.cost_model(), cfg.seed);
            odcsim::SimOptions opts;
            opts.scheme = cfg.scheme == odcsim::Scheme::Collective
                              ? odcsim::CommScheme::CollectiveRing
                              : odcsim::CommScheme::Odc;
            opts.sharding = cfg.sharding;
            opts.time_per_cost_unit = cfg.time_per_cost_unit;
            opts.backward_factor = cfg.backward_factor;
            auto sim = odcsim::simulate(planned.steps.front(), cfg.cluster, cfg.cost_model(), opts);
            std::ofstream out(trace_out);
            if (!out) throw odcsim::ParamError("cannot write trace file: " + trace_out);
            out << odcsim::to_chrome_trace(sim.trace);
        }
        if (cfg.format == "json") {
            std::cout << odcsim::experiment_to_json(report).dump(2) << "\n";
        } else {
            print_table(odcsim::experiment_table(report), cfg.format);
        }
        return kExitOk;
    }
    if (sweep->parsed()) {
        odcsim::SweepSpec spec;
        spec.base = build_config(flags);
        spec.axis = odcsim::parse_sweep_axis(axis);
        spec.values = values.empty() ? std::vector<double>{1, 2, 4, 8, 16} : values;
        auto rows = odcsim::run_sweep(spec, jobs);
        if (spec.base.format == "json") {
            std::cout << odcsim::sweep_to_json(spec, rows).dump(2) << "\n";
        } else {
            print_table(odcsim::sweep_table(spec, rows), spec.base.format);
        }
        return kExitOk;
    }
    if (partition->parsed()) {
        odcsim::ExperimentConfig cfg = build_config(flags);
        const odcsim::Workload w = cfg.build_workload();
        const odcsim::MemoryBudget budget{odcsim::token_budget(w.max_length(), cfg.packing_ratio)};
        auto planned = odcsim::plan(cfg.strategy, w, cfg.cluster.devices, cfg.minibatch_size,
                                    budget, cfg.cost_model(), cfg.seed);
        std::cout << odcsim::solutions_to_json(planned).dump(2) << "\n";
        return kExitOk;
    }
    if (volume->parsed()) {
        odcsim::ExperimentConfig cfg = build_config(flags);
        if (shard_elems > 0.0) cfg.cluster.shard_elems = shard_elems;
        print_table(odcsim::volume_table(cfg.cluster), cfg.format);
        return kExitOk;
    }
    if (verify->parsed()) {
        auto report = odcsim::verify_primitives(vp_clients, vp_minibatches,
                                                static_cast<std::uint64_t>(vp_seed));
        std::cout << "passed " << report.passed << " / " << (report.passed + report.failed)
                  << " randomized minibatches (peak staged elements per server: "
                  << report.max_staged_elems << ")\n";
        return report.failed == 0 ? kExitOk : kExitInternal;
    }
    return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    odcsim::set_log_level_from_env();
    try {
        return run(argc, argv);
    } catch (const odcsim::ParamError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const odcsim::FormatError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const odcsim::InfeasibleError& e) {
        std::cerr << "infeasible workload: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
