#ifndef SPIKESR_DEALIAS_HPP
#define SPIKESR_DEALIAS_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "spikesr/assignment.hpp"
#include "spikesr/error.hpp"
#include "spikesr/signal_model.hpp"
#include "spikesr/sr_methods.hpp"

namespace spikesr
{

/// The r angles whose r-th multiple is arg(w), reduced to (-pi, pi].
inline std::vector<double> candidate_roots(Complex w, std::int64_t r)
{
    if (r < 1)
    {
        throw Error(Errc::invalid_argument, "root order must be >= 1");
    }
    const double theta = std::arg(w);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(r));
    for (std::int64_t m = 0; m < r; ++m)
    {
        out.push_back(wrap_angle((theta + two_pi * static_cast<double>(m)) / static_cast<double>(r)));
    }
    return out;
}

///
/// Pair two estimates of the same aliased node set: perm[i] is the index in
/// `b` matched to entry i of `a`, minimising the total wrapped distance
/// between arguments.
///
inline std::vector<std::size_t> match_estimates(const NodeEstimate& a, const NodeEstimate& b)
{
    if (a.phis.size() != b.phis.size())
    {
        throw Error(Errc::cardinality_mismatch, std::to_string(a.phis.size()) + " vs " +
                                                    std::to_string(b.phis.size()));
    }
    const std::size_t n = a.phis.size();
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t j = 0; j < n; ++j)
        {
            cost[i][j] = wrap_dist(std::arg(a.phis[i]), std::arg(b.phis[j]));
        }
    }
    return min_cost_assignment(cost);
}

///
/// Phi^t recovered as the unit-normalised ratio of the amplitudes fitted on
/// the shifted and unshifted sample sets.
///
inline Complex shift_power_from_amps(Complex a, Complex a_shift, double amp_floor = 0.0)
{
    if (!(std::abs(a) > amp_floor) || !(std::abs(a) > 0.0))
    {
        throw Error(Errc::amplitude_underflow, "|a| = " + std::to_string(std::abs(a)));
    }
    const Complex q = a_shift / a;
    if (!(std::abs(q) > 0.0))
    {
        throw Error(Errc::amplitude_underflow, "shifted amplitude vanishes");
    }
    return q / std::abs(q);
}

/// (u, v) with u*rho + v*t = gcd(rho, t) from the extended Euclidean algorithm.
inline std::pair<std::int64_t, std::int64_t> bezout(std::int64_t rho, std::int64_t t)
{
    std::int64_t r0 = rho, r1 = t;
    std::int64_t s0 = 1, s1 = 0;
    std::int64_t q0 = 0, q1 = 1;
    while (r1 != 0)
    {
        const std::int64_t q = r0 / r1;
        r0 = std::exchange(r1, r0 - q * r1);
        s0 = std::exchange(s1, s0 - q * s1);
        q0 = std::exchange(q1, q0 - q * q1);
    }
    return {s0, q0};
}

struct AliasedPair
{
    Complex phi_rho; ///< estimate of e^{i rho x}
    Complex phi_t;   ///< estimate of e^{i t x}
    std::int64_t rho = 1;
    std::int64_t t   = 0;
};

/// Default acceptance radius around the Bezout solution: pi/(4 rho).
inline double default_dealias_tol(std::int64_t rho)
{
    return pi / (4.0 * static_cast<double>(rho));
}

///
/// Resolve the rho-fold ambiguity of phi_rho using the co-prime shift.
///
/// The Bezout combination (phi_rho)^u (phi_t)^v with u rho + v t = 1 gives
/// e^{ix} directly but multiplies phase noise by |u| and |v|; it is only used
/// to pick the nearest of the rho candidates of phi_rho, which keep the
/// precision of the decimated estimate.
///
inline double dealias_node(const AliasedPair& pair, std::optional<double> tol = std::nullopt)
{
    if (pair.rho < 1 || pair.t < 0)
    {
        throw Error(Errc::invalid_argument, "need rho >= 1 and t >= 0");
    }
    if (std::gcd(pair.rho, pair.t) != 1)
    {
        throw Error(Errc::not_coprime, "gcd(" + std::to_string(pair.rho) + ", " +
                                           std::to_string(pair.t) + ") != 1");
    }
    if (pair.rho == 1)
    {
        return std::arg(pair.phi_rho);
    }
    const auto [u, v]   = bezout(pair.rho, pair.t);
    const double approx = wrap_angle(static_cast<double>(u) * std::arg(pair.phi_rho) +
                                     static_cast<double>(v) * std::arg(pair.phi_t));
    const auto cands = candidate_roots(pair.phi_rho, pair.rho);
    double best      = cands.front();
    double best_d    = wrap_dist(best, approx);
    for (double c : cands)
    {
        const double d = wrap_dist(c, approx);
        if (d < best_d)
        {
            best   = c;
            best_d = d;
        }
    }
    const double limit = tol.value_or(default_dealias_tol(pair.rho));
    if (best_d > limit)
    {
        throw Error(Errc::ambiguous_alias, "nearest candidate " + std::to_string(best_d) +
                                               " rad from Bezout solution");
    }
    return best;
}

} // namespace spikesr

#endif // SPIKESR_DEALIAS_HPP
