#ifndef SPIKESR_DECIMATION_HPP
#define SPIKESR_DECIMATION_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include "spikesr/error.hpp"
#include "spikesr/parallel.hpp"
#include "spikesr/signal_model.hpp"
#include "spikesr/spectral_core.hpp"

namespace spikesr
{

/// Integer decimation rates inside [omega/(2(2n-1)), omega/(2n-1)].
struct CandidateSet
{
    std::vector<std::int64_t> rhos;
    double lo        = 0.0;
    double hi        = 0.0;
    bool degenerate  = false; ///< interval held no integer; rhos == {1}
};

inline CandidateSet candidate_rhos(double omega, std::size_t n, std::size_t stride = 1)
{
    if (!(omega > 0.0) || n == 0)
    {
        throw Error(Errc::domain_error, "candidate_rhos needs omega > 0 and n >= 1");
    }
    CandidateSet out;
    const double width = 2.0 * static_cast<double>(n) - 1.0;
    out.hi             = omega / width;
    out.lo             = out.hi / 2.0;
    // absorb rounding in omega / width when the endpoint is an integer
    const auto first = static_cast<std::int64_t>(std::ceil(out.lo * (1.0 - 1e-12)));
    const auto last  = static_cast<std::int64_t>(std::floor(out.hi * (1.0 + 1e-12)));
    const std::size_t step = std::max<std::size_t>(stride, 1);
    for (std::int64_t r = std::max<std::int64_t>(first, 1); r <= last; r += static_cast<std::int64_t>(step))
    {
        out.rhos.push_back(r);
    }
    if (out.rhos.empty())
    {
        out.rhos.push_back(1);
        out.degenerate = true;
    }
    return out;
}

struct RhoScore
{
    std::int64_t rho = 1;
    double score     = 0.0;            ///< sigma_{M+1}(T_rho)
    std::optional<double> delta_rho;   ///< ground-truth separation, validation only
    std::int64_t wall_time_ns = 0;
};

///
/// Score a decimation rate by the (M+1)-th singular value of the Toeplitz
/// matrix of mu(rho k), k = 0..2n-2.
///
inline RhoScore score_rho(const MeasurementOracle& oracle, std::int64_t rho, std::size_t n,
                          std::size_t M, bool with_truth = false)
{
    if (M == 0 || M >= n)
    {
        throw Error(Errc::index_error, "need 1 <= M < n for sigma_{M+1}");
    }
    if (rho < 1)
    {
        throw Error(Errc::domain_error, "rho must be a positive integer");
    }
    const auto start = std::chrono::steady_clock::now();
    std::vector<Complex> mu(2 * n - 1);
    for (std::size_t k = 0; k < mu.size(); ++k)
    {
        mu[k] = oracle(static_cast<double>(rho) * static_cast<double>(k));
    }
    const auto t = toeplitz_from_samples(mu, n, rho);
    RhoScore out;
    out.rho   = rho;
    out.score = t.singular_values()[M];
    if (with_truth && oracle.spike().size() >= 2)
    {
        out.delta_rho = min_separation(oracle.spike().nodes(), static_cast<double>(rho));
    }
    out.wall_time_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    return out;
}

/// Candidate order: score descending, ties broken by smaller rho.
inline std::vector<RhoScore> rank_by_score(std::span<const RhoScore> scores)
{
    std::vector<RhoScore> sorted(scores.begin(), scores.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const RhoScore& a, const RhoScore& b) {
        if (a.score != b.score)
        {
            return a.score > b.score;
        }
        return a.rho < b.rho;
    });
    return sorted;
}

inline std::int64_t select_rho(std::span<const RhoScore> scores)
{
    if (scores.empty())
    {
        throw Error(Errc::empty_input, "no candidate rates to select from");
    }
    const RhoScore* best = &scores[0];
    for (const auto& s : scores)
    {
        if (s.score > best->score || (s.score == best->score && s.rho < best->rho))
        {
            best = &s;
        }
    }
    return best->rho;
}

///
/// Smallest t >= 2 co-prime to rho with rho(2n-2) + t <= omega.
/// Returns 0 for rho == 1: there is nothing to de-alias.
///
inline std::int64_t coprime_shift(std::int64_t rho, double omega, std::size_t n)
{
    if (rho < 1)
    {
        throw Error(Errc::domain_error, "rho must be >= 1");
    }
    if (rho == 1)
    {
        return 0;
    }
    const double used = static_cast<double>(rho) * (2.0 * static_cast<double>(n) - 2.0);
    for (std::int64_t t = 2; used + static_cast<double>(t) <= omega; ++t)
    {
        if (std::gcd(t, rho) == 1)
        {
            return t;
        }
    }
    throw Error(Errc::shift_infeasible, "no co-prime shift fits for rho = " + std::to_string(rho));
}

struct DecimationPlan
{
    std::int64_t rho = 1;
    std::int64_t t   = 0;
    std::vector<RhoScore> candidates;
    double lo       = 0.0;
    double hi       = 0.0;
    bool degenerate = false;
};

enum class RhoStrategy
{
    argmax_score,
    uniform_random,
};

struct PlanOptions
{
    std::size_t stride      = 1;
    std::size_t threads     = 1;
    std::size_t max_retries = 3;
    bool with_truth         = false;
    RhoStrategy strategy    = RhoStrategy::argmax_score;
    std::uint64_t seed      = 0; ///< only for uniform_random
};

///
/// Score every candidate, pick the best rate and a co-prime shift. When the
/// chosen rate admits no shift (or `feasible` rejects the pair), fall back to
/// the next candidates in decreasing score order, up to max_retries times.
///
inline DecimationPlan plan_decimation(
    const MeasurementOracle& oracle, std::size_t n, std::size_t M, const PlanOptions& opts = {},
    const std::function<bool(std::int64_t, std::int64_t)>& feasible = {})
{
    const auto cand = candidate_rhos(oracle.omega_max(), n, opts.stride);
    DecimationPlan plan;
    plan.lo         = cand.lo;
    plan.hi         = cand.hi;
    plan.degenerate = cand.degenerate;
    plan.candidates.resize(cand.rhos.size());
    parallel_for(
        cand.rhos.size(),
        [&](std::size_t i) {
            plan.candidates[i] = score_rho(oracle, cand.rhos[i], n, M, opts.with_truth);
        },
        opts.threads);

    std::vector<RhoScore> order;
    if (opts.strategy == RhoStrategy::uniform_random)
    {
        order = plan.candidates;
        std::mt19937_64 rng(opts.seed);
        std::shuffle(order.begin(), order.end(), rng);
    }
    else
    {
        order = rank_by_score(plan.candidates);
    }

    const std::size_t attempts = std::min(order.size(), opts.max_retries + 1);
    for (std::size_t a = 0; a < attempts; ++a)
    {
        const std::int64_t rho = order[a].rho;
        std::int64_t t         = 0;
        try
        {
            t = coprime_shift(rho, oracle.omega_max(), n);
        }
        catch (const Error& e)
        {
            if (e.code() == Errc::shift_infeasible)
            {
                continue;
            }
            throw;
        }
        if (feasible && !feasible(rho, t))
        {
            continue;
        }
        plan.rho = rho;
        plan.t   = t;
        return plan;
    }
    throw Error(Errc::shift_infeasible, "no candidate rate admits a feasible shift");
}

/// Sweep table: rho, sigma_{M+1}, delta_rho[, wall_time_ns].
inline void write_sweep_csv(std::ostream& os, std::span<const RhoScore> scores,
                            bool include_timing)
{
    const auto prec = os.precision();
    os << std::setprecision(17);
    os << "rho,sigma_M1,delta_rho";
    if (include_timing)
    {
        os << ",wall_time_ns";
    }
    os << '\n';
    for (const auto& s : scores)
    {
        os << s.rho << ',' << s.score << ',';
        if (s.delta_rho)
        {
            os << *s.delta_rho;
        }
        if (include_timing)
        {
            os << ',' << s.wall_time_ns;
        }
        os << '\n';
    }
    os.precision(prec);
}

} // namespace spikesr

#endif // SPIKESR_DECIMATION_HPP
