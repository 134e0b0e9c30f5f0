// Command-line harness for the spike super-resolution library.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spikesr/io.hpp"
#include "spikesr/spikesr.hpp"
#include "spikesr/validation.hpp"

namespace fs = std::filesystem;
using namespace spikesr;
using io::json;

namespace
{

constexpr int exit_ok         = 0;
constexpr int exit_validation = 1;
constexpr int exit_usage      = 2;

struct Options
{
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    int verbosity = 0;
    std::string method = "EDP";
    bool timing        = false;
};

json load(const Options& o)
{
    json j = io::load_config(o.config);
    if (o.seed)
    {
        j["seed"] = *o.seed;
    }
    return j;
}

std::ofstream open_out(const Options& o, const std::string& name)
{
    fs::create_directories(o.out);
    std::ofstream f(fs::path(o.out) / name, std::ios::binary);
    if (!f)
    {
        throw Error(Errc::config_error, "cannot write '" + (fs::path(o.out) / name).string() + "'");
    }
    return f;
}

std::int64_t since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_gen(const Options& o)
{
    const json cfg = load(o);
    const auto spec = io::spec_from_json(cfg);
    const auto cs   = realise(spec.geometry, spec.geometry.delta, spec.seed);
    open_out(o, "spike.json") << io::spike_to_json(cs, spec.seed).dump(2) << '\n';
    return exit_ok;
}

int cmd_sweep(const Options& o)
{
    const auto t0   = std::chrono::steady_clock::now();
    const json cfg  = load(o);
    const auto spec = io::spec_from_json(cfg);
    const auto t    = rho_sweep_experiment(spec);
    {
        auto f = open_out(o, "sweep.csv");
        io::write_sweep(f, t);
    }
    {
        auto f = open_out(o, "sweep_timing.csv");
        io::write_sweep_timing(f, t);
    }
    const json meta = {{"n", t.n}, {"M", t.M}, {"selected_rho", t.selected_rho},
                       {"spearman", t.spearman}, {"ratio_spread", t.ratio_spread}};
    open_out(o, "manifest.json") << io::manifest("sweep-rho", cfg, meta, since(t0)).dump(2) << '\n';
    if (o.verbosity > 0)
    {
        std::cerr << t.rows.size() << " rates, spearman " << t.spearman << ", selected rho " << t.selected_rho
                  << '\n';
    }
    return exit_ok;
}

int cmd_recover(const Options& o)
{
    const json cfg   = load(o);
    const auto spec  = io::spec_from_json(cfg);
    const auto truth = realise(spec.geometry, spec.geometry.delta, spec.seed);
    const auto oracle =
        make_oracle(truth.spike, spec.omega, spec.epsilon, spec.noise, trial_seed(spec.seed, 0));
    SrOptions sr;
    sr.dp.n_rho  = spec.n_rho;
    sr.dp.n_bins = static_cast<std::size_t>(std::ceil(spec.bins_per_inv_delta / spec.geometry.delta));
    const auto method = method_from_string(cfg.value("method", o.method));
    auto r = run_method(oracle, truth.spike.size(), truth.config.cluster_count(), method, sr);
    if (spec.epsilon > 0.0)
    {
        error_factors(truth.spike, r, spec.epsilon, spec.omega);
    }
    else
    {
        attach_truth(truth.spike, r);
    }
    std::cout << io::result_to_json(r, o.timing).dump(2) << '\n';
    return exit_ok;
}

int cmd_optimality(const Options& o)
{
    const auto t0   = std::chrono::steady_clock::now();
    const json cfg  = load(o);
    const auto spec = io::spec_from_json(cfg);
    const auto t    = optimality_experiment(spec);
    {
        auto f = open_out(o, "optimality.csv");
        io::write_optimality(f, t);
    }
    {
        auto f = open_out(o, "optimality_slopes.csv");
        io::write_slopes(f, t);
    }
    {
        auto f = open_out(o, "failures.csv");
        io::write_failures(f, t.failures);
    }
    json meta = {{"cluster_node", t.cluster_node}, {"failures", t.failures.size()}};
    if (t.has_reference)
    {
        meta["reference_node"] = t.reference_node;
    }
    open_out(o, "manifest.json") << io::manifest("optimality", cfg, meta, since(t0)).dump(2) << '\n';
    if (o.verbosity > 0)
    {
        for (const auto& s : t.slopes)
        {
            std::cerr << "node " << s.node << ": kx slope " << s.kx.slope << ", ka slope " << s.ka.slope << '\n';
        }
    }
    return exit_ok;
}

int cmd_bench(const Options& o)
{
    const auto t0   = std::chrono::steady_clock::now();
    const json cfg  = load(o);
    const auto spec = io::spec_from_json(cfg);
    const auto t    = bench_experiment(spec);
    {
        auto f = open_out(o, "bench.csv");
        io::write_bench(f, t);
    }
    {
        auto f = open_out(o, "bench_timing.csv");
        io::write_bench_timing(f, t);
    }
    {
        auto f = open_out(o, "complexity_timing.csv");
        io::write_complexity_timing(f, t);
    }
    {
        auto f = open_out(o, "failures.csv");
        io::write_failures(f, t.failures);
    }
    open_out(o, "manifest.json") << io::manifest("bench", cfg, {{"failures", t.failures.size()}}, since(t0)).dump(2)
                                 << '\n';
    return exit_ok;
}

int cmd_validate(const Options& o)
{
    bool ok = true;
    for (const auto& p : run_property_suite(o.seed.value_or(1)))
    {
        const char* tag = p.informational ? "INFO" : (p.passed ? "PASS" : "FAIL");
        std::cout << tag << ' ' << p.name << ": " << p.detail << '\n';
        ok = ok && (p.passed || p.informational);
    }
    return ok ? exit_ok : exit_validation;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Super-resolution of clustered spikes by decimation"};
    app.require_subcommand(1);
    Options o;

    const auto with_config = [&](CLI::App* sub) {
        sub->add_option("-c,--config", o.config, "JSON configuration (schema 1)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "override the configuration seed");
        sub->add_flag("-v,--verbose", o.verbosity, "more diagnostics on stderr");
    };
    const auto with_out = [&](CLI::App* sub) { sub->add_option("-o,--out", o.out, "output directory"); };

    auto* gen = app.add_subcommand("gen", "write the ground-truth spike train as JSON");
    with_config(gen);
    with_out(gen);
    auto* sweep = app.add_subcommand("sweep-rho", "score every admissible decimation rate");
    with_config(sweep);
    with_out(sweep);
    auto* rec = app.add_subcommand("recover", "run one recovery and print the result as JSON");
    with_config(rec);
    rec->add_option("-m,--method", o.method, "EDP, DMP, DP, MP or Prony");
    rec->add_flag("--timing", o.timing, "include wall time in the output");
    auto* opt = app.add_subcommand("optimality", "error amplification across an SRF grid");
    with_config(opt);
    with_out(opt);
    auto* bench = app.add_subcommand("bench", "accuracy and wall time per method");
    with_config(bench);
    with_out(bench);
    auto* val = app.add_subcommand("validate", "run the property suite");
    val->add_option("--seed", o.seed, "seed for random draws");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_usage;
    }

    try
    {
        if (*gen)
        {
            return cmd_gen(o);
        }
        if (*sweep)
        {
            return cmd_sweep(o);
        }
        if (*rec)
        {
            return cmd_recover(o);
        }
        if (*opt)
        {
            return cmd_optimality(o);
        }
        if (*bench)
        {
            return cmd_bench(o);
        }
        return cmd_validate(o);
    }
    catch (const Error& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        const bool bad_input = e.code() == Errc::config_error || e.code() == Errc::infeasible_geometry ||
                               e.code() == Errc::invalid_argument;
        return bad_input ? exit_usage : exit_validation;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_validation;
    }
}
