#ifndef SPIKESR_PIPELINE_HPP
#define SPIKESR_PIPELINE_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spikesr/assignment.hpp"
#include "spikesr/dealias.hpp"
#include "spikesr/decimation.hpp"
#include "spikesr/error.hpp"
#include "spikesr/parallel.hpp"
#include "spikesr/signal_model.hpp"
#include "spikesr/sr_methods.hpp"
#include "spikesr/stats.hpp"

namespace spikesr
{

enum class Method
{
    edp,   ///< decimated Prony with selected rate and co-prime de-aliasing
    dmp,   ///< decimated Matrix Pencil, 3n samples per set
    dp,    ///< histogram-consensus decimated Prony
    mp,    ///< Matrix Pencil on the full band
    prony, ///< Prony on 2n consecutive samples
};

constexpr std::string_view to_string(Method m) noexcept
{
    switch (m)
    {
    case Method::edp: return "EDP";
    case Method::dmp: return "DMP";
    case Method::dp: return "DP";
    case Method::mp: return "MP";
    case Method::prony: return "Prony";
    }
    return "?";
}

inline Method method_from_string(std::string_view s)
{
    for (auto m : {Method::edp, Method::dmp, Method::dp, Method::mp, Method::prony})
    {
        std::string a(to_string(m)), b(s);
        std::transform(a.begin(), a.end(), a.begin(), [](unsigned char c) { return std::tolower(c); });
        std::transform(b.begin(), b.end(), b.begin(), [](unsigned char c) { return std::tolower(c); });
        if (a == b)
        {
            return m;
        }
    }
    throw Error(Errc::config_error, "unknown method '" + std::string(s) + "'");
}

struct RecoveryResult
{
    Method method = Method::edp;
    std::vector<double> est_nodes; ///< ascending
    std::vector<Complex> est_amps;
    DecimationPlan plan;
    std::chrono::nanoseconds wall_time{0};

    // filled by attach_truth / error_factors
    std::vector<std::size_t> matching; ///< truth j -> estimate matching[j]
    std::vector<double> node_errors;   ///< wrapped |x_j - x~_j| per truth node
    std::vector<double> amp_errors;    ///< |a_j - a~_j| per truth node
    std::vector<double> k_x;
    std::vector<double> k_a;
};

struct SrOptions
{
    PlanOptions plan;
    std::optional<std::size_t> pencil;
    std::optional<double> dealias_tol;
    double amp_floor_ratio = 1e-3;
    DpOptions dp;
};

namespace detail
{

template <typename F>
auto staged(const char* stage, F&& f) -> decltype(f())
{
    try
    {
        return f();
    }
    catch (const Error& e)
    {
        if (!e.stage().empty())
        {
            throw;
        }
        throw e.with_stage(stage);
    }
}

inline void sort_by_node(RecoveryResult& r)
{
    std::vector<std::size_t> idx(r.est_nodes.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return r.est_nodes[a] < r.est_nodes[b]; });
    std::vector<double> x;
    std::vector<Complex> a;
    for (auto i : idx)
    {
        x.push_back(r.est_nodes[i]);
        a.push_back(r.est_amps[i]);
    }
    r.est_nodes = std::move(x);
    r.est_amps  = std::move(a);
}

/// Amplitudes from a centred fit carry e^{i t0 x}; strip it.
inline std::vector<Complex> rephase(const std::vector<Complex>& amps, const std::vector<double>& nodes,
                                    double t0)
{
    std::vector<Complex> out(amps.size());
    for (std::size_t j = 0; j < amps.size(); ++j)
    {
        out[j] = amps[j] * std::polar(1.0, -t0 * nodes[j]);
    }
    return out;
}

} // namespace detail

enum class DecimatedSolver
{
    prony,
    matrix_pencil,
};

///
/// Decimated super-resolution: select the rate by the (M+1)-th Toeplitz
/// singular value, solve on the decimated and co-prime-shifted sample sets,
/// match and de-alias the nodes, then fit amplitudes on the full band.
///
/// Both sample sets are centred in [-omega, omega]. With n == 1 or M >= n
/// there is nothing to select and the rate-1 path is taken.
///
inline RecoveryResult decimated_sr(const MeasurementOracle& oracle, std::size_t n, std::size_t M,
                                   DecimatedSolver solver, const SrOptions& opts = {})
{
    const auto start = std::chrono::steady_clock::now();
    if (n == 0)
    {
        throw Error(Errc::invalid_argument, "n must be >= 1", "input");
    }
    const std::size_t K = solver == DecimatedSolver::prony ? 2 * n : 3 * n;
    const auto solve    = [&](const SampleVector& s) {
        return solver == DecimatedSolver::prony ? prony(s, n) : matrix_pencil(s, n, opts.pencil);
    };
    const double omega = oracle.omega_max();

    RecoveryResult out;
    out.method = solver == DecimatedSolver::prony ? Method::edp : Method::dmp;

    if (n == 1 || M == 0 || M >= n)
    {
        out.plan.rho = 1;
        out.plan.t   = 0;
    }
    else
    {
        const auto feasible = [&](std::int64_t rho, std::int64_t t) {
            const double r = static_cast<double>(rho);
            return centred_footprint(r, 0.0, K) <= omega &&
                   centred_footprint(r, static_cast<double>(t), K) <= omega;
        };
        out.plan = detail::staged("select", [&] { return plan_decimation(oracle, n, M, opts.plan, feasible); });
    }
    const auto rho = out.plan.rho;
    const auto t   = out.plan.t;
    const double r = static_cast<double>(rho);

    const NodeEstimate est_d =
        detail::staged("solve", [&] { return solve(centred_samples(oracle, r, 0.0, K)); });
    std::vector<double> nodes;
    if (rho == 1)
    {
        for (const auto& phi : est_d.phis)
        {
            nodes.push_back(std::arg(phi));
        }
    }
    else
    {
        const NodeEstimate est_s = detail::staged(
            "solve_shifted", [&] { return solve(centred_samples(oracle, r, static_cast<double>(t), K)); });
        const auto perm = detail::staged("match", [&] { return match_estimates(est_d, est_s); });
        double amax     = 0.0;
        for (const auto& a : est_d.amps)
        {
            amax = std::max(amax, std::abs(a));
        }
        const double floor = opts.amp_floor_ratio * amax;
        detail::staged("dealias", [&] {
            for (std::size_t j = 0; j < n; ++j)
            {
                const Complex phi_t = shift_power_from_amps(est_d.amps[j], est_s.amps[perm[j]], floor);
                nodes.push_back(dealias_node({est_d.phis[j], phi_t, rho, t}, opts.dealias_tol));
            }
            return 0;
        });
    }
    const auto fit = detail::staged("amplitudes", [&] { return amplitudes_full_band(oracle, nodes); });
    out.est_nodes  = std::move(nodes);
    out.est_amps   = fit.amps;
    detail::sort_by_node(out);
    out.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::steady_clock::now() - start);
    return out;
}

/// Run any of the supported methods on an oracle.
inline RecoveryResult run_method(const MeasurementOracle& oracle, std::size_t n, std::size_t M,
                                 Method method, const SrOptions& opts = {})
{
    switch (method)
    {
    case Method::edp: return decimated_sr(oracle, n, M, DecimatedSolver::prony, opts);
    case Method::dmp: return decimated_sr(oracle, n, M, DecimatedSolver::matrix_pencil, opts);
    default: break;
    }
    const auto start = std::chrono::steady_clock::now();
    RecoveryResult out;
    out.method   = method;
    out.plan.rho = 1;
    if (method == Method::dp)
    {
        const auto dp = detail::staged("dp", [&] { return decimated_prony_histogram(oracle, n, opts.dp); });
        out.est_nodes = dp.nodes;
        out.est_amps  = dp.estimate.amps;
    }
    else
    {
        SampleVector s;
        NodeEstimate est;
        if (method == Method::prony)
        {
            s   = centred_samples(oracle, 1.0, 0.0, 2 * n);
            est = detail::staged("solve", [&] { return prony(s, n); });
        }
        else
        {
            const auto W = static_cast<std::size_t>(std::floor(oracle.omega_max()));
            s            = centred_samples(oracle, 1.0, 0.0, 2 * W + 1);
            est          = detail::staged("solve", [&] { return matrix_pencil(s, n, opts.pencil); });
        }
        for (const auto& phi : est.phis)
        {
            out.est_nodes.push_back(std::arg(phi));
        }
        out.est_amps = detail::rephase(est.amps, out.est_nodes, s.t);
    }
    detail::sort_by_node(out);
    out.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::steady_clock::now() - start);
    return out;
}

/// Optimal assignment of estimated nodes to true nodes by wrapped distance.
inline std::vector<std::size_t> match_to_truth(std::span<const double> truth,
                                               std::span<const double> est)
{
    if (truth.size() != est.size())
    {
        throw Error(Errc::cardinality_mismatch, "estimate and truth differ in size");
    }
    std::vector<std::vector<double>> cost(truth.size(), std::vector<double>(est.size()));
    for (std::size_t i = 0; i < truth.size(); ++i)
    {
        for (std::size_t j = 0; j < est.size(); ++j)
        {
            cost[i][j] = wrap_dist(truth[i], est[j]);
        }
    }
    return min_cost_assignment(cost);
}

/// Fill matching and raw per-node errors against the ground truth.
inline void attach_truth(const SpikeTrain& truth, RecoveryResult& r)
{
    r.matching = match_to_truth(truth.nodes(), r.est_nodes);
    r.node_errors.assign(truth.size(), 0.0);
    r.amp_errors.assign(truth.size(), 0.0);
    for (std::size_t j = 0; j < truth.size(); ++j)
    {
        const auto e     = r.matching[j];
        r.node_errors[j] = wrap_dist(truth.nodes()[j], r.est_nodes[e]);
        r.amp_errors[j]  = std::abs(truth.amps()[j] - r.est_amps[e]);
    }
}

struct ErrorFactors
{
    std::vector<double> k_x;
    std::vector<double> k_a;
};

///
/// Noise-normalised error amplification per true node:
/// K_x = omega |x - x~| / eps and K_a = |a - a~| / eps.
///
inline ErrorFactors error_factors(const SpikeTrain& truth, RecoveryResult& result, double epsilon,
                                  double omega)
{
    if (!(epsilon > 0.0))
    {
        throw Error(Errc::factors_undefined, "epsilon == 0");
    }
    attach_truth(truth, result);
    ErrorFactors f;
    for (std::size_t j = 0; j < truth.size(); ++j)
    {
        f.k_x.push_back(omega * result.node_errors[j] / epsilon);
        f.k_a.push_back(result.amp_errors[j] / epsilon);
    }
    result.k_x = f.k_x;
    result.k_a = f.k_a;
    return f;
}

//------------------------------------------------------------------------------
// Experiments
//------------------------------------------------------------------------------

struct GeometrySpec
{
    std::size_t M = 1;
    std::vector<std::size_t> sizes{1};
    double delta = 1e-2;
    std::vector<double> nu{1.0};
    double eta = 1.0;
    std::optional<std::vector<double>> nodes; ///< explicit override
    std::optional<std::vector<Complex>> amps;

    std::size_t node_count() const
    {
        if (nodes)
        {
            return nodes->size();
        }
        return std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    }
};

struct ExperimentSpec
{
    GeometrySpec geometry;
    double omega       = 100.0;
    double epsilon     = 0.0;
    NoiseKind noise    = NoiseKind::cauchy_clipped;
    std::vector<Method> methods{Method::edp};
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    std::vector<double> srf_grid;
    std::vector<double> omega_grid;
    std::size_t stride  = 1;
    std::size_t n_rho   = 900;
    double bins_per_inv_delta = 3.0; ///< N_b = this / delta
    std::size_t threads = 0;         ///< 0: SPIKE_SR_THREADS or hardware
};

/// Build the ground truth for a geometry at a given separation.
inline ClusteredSpike realise(const GeometrySpec& g, double delta, std::uint64_t seed)
{
    if (g.nodes)
    {
        std::vector<Complex> amps;
        if (g.amps)
        {
            amps = *g.amps;
        }
        else
        {
            amps.assign(g.nodes->size(), Complex{1.0, 0.0});
        }
        SpikeTrain spike(*g.nodes, amps);
        ClusterConfig cfg;
        cfg.h = spike.size() > 1 ? min_separation(spike.nodes()) : 0.0;
        std::vector<std::size_t> all(spike.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        cfg.partition      = {all};
        cfg.sizes          = {spike.size()};
        cfg.nu             = {1.0};
        cfg.multiplicities = multiplicities(cfg.sizes);
        return {std::move(spike), std::move(cfg)};
    }
    GeneratorOptions opts;
    opts.amps = g.amps;
    return make_clustered_config(g.M, g.sizes, delta, g.nu, g.eta, seed, opts);
}

struct SweepRow
{
    std::int64_t rho     = 1;
    double delta_rho     = 0.0;
    double sigma         = 0.0; ///< sigma_{M+1}(T_rho)
    double scaled_sqrt   = 0.0; ///< (n / omega) sqrt(sigma)
    std::int64_t wall_time_ns = 0;
};

struct SweepTable
{
    std::size_t n = 0;
    std::size_t M = 0;
    std::vector<SweepRow> rows;
    double spearman     = 0.0; ///< sqrt(sigma) vs delta_rho
    double ratio_spread = 0.0; ///< max/min of sqrt(sigma)/delta_rho, collisions excluded
    std::int64_t selected_rho = 1;
};

inline constexpr double collision_threshold = 1e-8;

inline SweepTable rho_sweep_experiment(const ExperimentSpec& spec)
{
    const auto truth = realise(spec.geometry, spec.geometry.delta, spec.seed);
    const auto oracle =
        make_oracle(truth.spike, spec.omega, spec.epsilon, spec.noise, spec.seed);
    SweepTable table;
    table.n = truth.spike.size();
    table.M = truth.config.cluster_count();
    const auto cand = candidate_rhos(spec.omega, table.n, spec.stride);
    std::vector<RhoScore> scores(cand.rhos.size());
    parallel_for(
        cand.rhos.size(),
        [&](std::size_t i) { scores[i] = score_rho(oracle, cand.rhos[i], table.n, table.M, true); },
        spec.threads);
    table.selected_rho = select_rho(scores);

    std::vector<double> root_sigma, dr, ratios;
    const double c = static_cast<double>(table.n) / spec.omega;
    for (const auto& s : scores)
    {
        SweepRow row;
        row.rho          = s.rho;
        row.delta_rho    = s.delta_rho.value_or(0.0);
        row.sigma        = s.score;
        row.scaled_sqrt  = c * std::sqrt(s.score);
        row.wall_time_ns = s.wall_time_ns;
        table.rows.push_back(row);
        root_sigma.push_back(std::sqrt(s.score));
        dr.push_back(row.delta_rho);
        if (row.delta_rho >= collision_threshold)
        {
            ratios.push_back(std::sqrt(s.score) / row.delta_rho);
        }
    }
    if (root_sigma.size() >= 2)
    {
        table.spearman = stats::spearman(root_sigma, dr);
    }
    if (!ratios.empty())
    {
        const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
        table.ratio_spread  = *hi / *lo;
    }
    return table;
}

struct TrialFailure
{
    double srf         = 0.0;
    std::size_t trial  = 0;
    std::string method;
    std::string reason;
};

struct OptimalityRow
{
    double srf = 0.0;
    std::size_t node = 0;
    double mean_kx = 0.0, mean_ka = 0.0;
    double median_kx = 0.0, median_ka = 0.0;
    std::size_t successes = 0;
};

struct SlopeSummary
{
    std::size_t node = 0;
    stats::LineFit kx;
    stats::LineFit ka;
};

struct OptimalityTable
{
    std::vector<OptimalityRow> rows;
    std::vector<TrialFailure> failures;
    std::size_t cluster_node   = 0; ///< first node of the first cluster
    std::size_t reference_node = 0; ///< node of the first singleton cluster
    bool has_reference         = false;
    std::vector<SlopeSummary> slopes;
};

/// Per-trial noise seed.
inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial)
{
    return seed ^ static_cast<std::uint64_t>(trial);
}

///
/// Error amplification of EDP across the SRF grid. The geometry shape and
/// amplitudes are fixed by the seed; only delta = 1/(SRF omega) and the
/// per-trial noise change.
///
inline OptimalityTable optimality_experiment(const ExperimentSpec& spec, const SrOptions& sr = {})
{
    if (spec.srf_grid.empty() || spec.trials == 0)
    {
        throw Error(Errc::invalid_argument, "optimality needs an SRF grid and trials >= 1");
    }
    const std::size_t G = spec.srf_grid.size();
    const std::size_t T = spec.trials;
    struct Cell
    {
        std::optional<ErrorFactors> f;
        std::string failure;
    };
    std::vector<Cell> cells(G * T);
    std::vector<ClusteredSpike> truths;
    for (double s : spec.srf_grid)
    {
        truths.push_back(realise(spec.geometry, 1.0 / (s * spec.omega), spec.seed));
    }
    const std::size_t n = truths.front().spike.size();
    const std::size_t M = truths.front().config.cluster_count();
    parallel_for(
        G * T,
        [&](std::size_t idx) {
            const std::size_t g = idx / T, tr = idx % T;
            const auto& truth   = truths[g].spike;
            const auto oracle =
                make_oracle(truth, spec.omega, spec.epsilon, spec.noise, trial_seed(spec.seed, tr));
            try
            {
                auto r        = decimated_sr(oracle, n, M, DecimatedSolver::prony, sr);
                cells[idx].f  = error_factors(truth, r, spec.epsilon, spec.omega);
            }
            catch (const Error& e)
            {
                cells[idx].failure = e.what();
            }
        },
        spec.threads);

    OptimalityTable table;
    const auto& cfg = truths.front().config;
    table.cluster_node = cfg.partition.front().front();
    for (std::size_t c = 0; c < cfg.partition.size(); ++c)
    {
        if (cfg.partition[c].size() == 1)
        {
            table.reference_node = cfg.partition[c].front();
            table.has_reference  = true;
            break;
        }
    }
    for (std::size_t g = 0; g < G; ++g)
    {
        for (std::size_t j = 0; j < n; ++j)
        {
            std::vector<double> kx, ka;
            for (std::size_t tr = 0; tr < T; ++tr)
            {
                const auto& cell = cells[g * T + tr];
                if (cell.f)
                {
                    kx.push_back(cell.f->k_x[j]);
                    ka.push_back(cell.f->k_a[j]);
                }
            }
            OptimalityRow row;
            row.srf       = spec.srf_grid[g];
            row.node      = j;
            row.successes = kx.size();
            row.mean_kx   = stats::mean(kx);
            row.mean_ka   = stats::mean(ka);
            row.median_kx = stats::median(kx);
            row.median_ka = stats::median(ka);
            table.rows.push_back(row);
        }
        for (std::size_t tr = 0; tr < T; ++tr)
        {
            const auto& cell = cells[g * T + tr];
            if (!cell.f)
            {
                table.failures.push_back({spec.srf_grid[g], tr, "EDP", cell.failure});
            }
        }
    }
    std::vector<std::size_t> tracked{table.cluster_node};
    if (table.has_reference)
    {
        tracked.push_back(table.reference_node);
    }
    for (auto j : tracked)
    {
        std::vector<double> s, kx, ka;
        for (const auto& row : table.rows)
        {
            if (row.node == j && row.successes > 0 && row.mean_kx > 0.0 && row.mean_ka > 0.0)
            {
                s.push_back(row.srf);
                kx.push_back(row.mean_kx);
                ka.push_back(row.mean_ka);
            }
        }
        if (s.size() >= 2)
        {
            table.slopes.push_back({j, stats::fit_loglog(s, kx), stats::fit_loglog(s, ka)});
        }
    }
    return table;
}

struct BenchRow
{
    std::string method;
    double srf = 0.0;
    double mean_err_x1   = 0.0;
    double median_err_x1 = 0.0;
    std::size_t successes = 0;
    double mean_time_ns   = 0.0; ///< timing, written to a separate file
    double median_time_ns = 0.0;
};

struct ComplexityRow
{
    std::string method;
    double omega = 0.0;
    double median_time_ns = 0.0;
};

struct BenchTable
{
    std::vector<BenchRow> rows;
    std::vector<ComplexityRow> complexity;
    std::vector<TrialFailure> failures;
};

///
/// Accuracy and wall time per (method, SRF), plus EDP wall time across the
/// omega grid at fixed geometry. Runs sequentially so timings are not
/// distorted by sibling workers.
///
inline BenchTable bench_experiment(const ExperimentSpec& spec, SrOptions sr = {})
{
    if (spec.methods.empty())
    {
        throw Error(Errc::invalid_argument, "bench needs at least one method");
    }
    BenchTable table;
    const auto x1_error = [](const SpikeTrain& truth, RecoveryResult& r) {
        attach_truth(truth, r);
        return r.node_errors.front();
    };
    for (auto method : spec.methods)
    {
        for (double s : spec.srf_grid)
        {
            const double delta = 1.0 / (s * spec.omega);
            const auto truth   = realise(spec.geometry, delta, spec.seed);
            const std::size_t n = truth.spike.size();
            const std::size_t M = truth.config.cluster_count();
            SrOptions opts      = sr;
            opts.dp.n_rho       = spec.n_rho;
            opts.dp.n_bins      = static_cast<std::size_t>(std::ceil(spec.bins_per_inv_delta / delta));
            std::vector<double> err, time;
            for (std::size_t tr = 0; tr < spec.trials; ++tr)
            {
                const auto oracle = make_oracle(truth.spike, spec.omega, spec.epsilon, spec.noise,
                                                trial_seed(spec.seed, tr));
                try
                {
                    auto r = run_method(oracle, n, M, method, opts);
                    err.push_back(x1_error(truth.spike, r));
                    time.push_back(static_cast<double>(r.wall_time.count()));
                }
                catch (const Error& e)
                {
                    table.failures.push_back({s, tr, std::string(to_string(method)), e.what()});
                }
            }
            BenchRow row;
            row.method         = std::string(to_string(method));
            row.srf            = s;
            row.successes      = err.size();
            row.mean_err_x1    = stats::mean(err);
            row.median_err_x1  = stats::median(err);
            row.mean_time_ns   = stats::mean(time);
            row.median_time_ns = stats::median(time);
            table.rows.push_back(row);
        }
    }
    for (double omega : spec.omega_grid)
    {
        const double s      = spec.srf_grid.empty() ? 2.0 : spec.srf_grid.front();
        const auto truth    = realise(spec.geometry, 1.0 / (s * omega), spec.seed);
        const std::size_t n = truth.spike.size();
        const std::size_t M = truth.config.cluster_count();
        std::vector<double> time;
        for (std::size_t tr = 0; tr < std::max<std::size_t>(spec.trials, 1); ++tr)
        {
            const auto oracle =
                make_oracle(truth.spike, omega, spec.epsilon, spec.noise, trial_seed(spec.seed, tr));
            try
            {
                time.push_back(static_cast<double>(run_method(oracle, n, M, Method::edp, sr).wall_time.count()));
            }
            catch (const Error& e)
            {
                table.failures.push_back({s, tr, "EDP", e.what()});
            }
        }
        table.complexity.push_back({"EDP", omega, stats::median(time)});
    }
    return table;
}

} // namespace spikesr

#endif // SPIKESR_PIPELINE_HPP
