#ifndef SPIKESR_SIGNAL_MODEL_HPP
#define SPIKESR_SIGNAL_MODEL_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spikesr/error.hpp"

namespace spikesr
{

using Complex = std::complex<double>;

inline constexpr double pi     = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduce an angle to the principal range (-pi, pi].
inline double wrap_angle(double x)
{
    double r = std::remainder(x, two_pi);
    if (r <= -pi)
    {
        r += two_pi;
    }
    return r;
}

/// Distance on the circle R mod 2pi; always in [0, pi].
inline double wrap_dist(double x, double y) { return std::abs(wrap_angle(x - y)); }

///
/// Minimal wrapped separation of the dilated node set rho*X.
///
/// With rho = 1 this is the ordinary minimal separation; for integer rho it
/// is the separation of the decimated nodes e^{i rho x_j}.
///
inline double min_separation(std::span<const double> nodes, double rho = 1.0)
{
    if (nodes.size() < 2)
    {
        throw Error(Errc::undefined_separation, "need at least two nodes");
    }
    double best = pi;
    for (std::size_t i = 0; i < nodes.size(); ++i)
    {
        for (std::size_t j = i + 1; j < nodes.size(); ++j)
        {
            best = std::min(best, wrap_dist(rho * nodes[i], rho * nodes[j]));
        }
    }
    return best;
}

/// Super-resolution factor 1/(delta*omega).
inline double srf(double delta, double omega)
{
    if (!(delta > 0.0) || !(omega > 0.0))
    {
        throw Error(Errc::domain_error, "srf needs delta > 0 and omega > 0");
    }
    return 1.0 / (delta * omega);
}

//------------------------------------------------------------------------------
// SpikeTrain
//------------------------------------------------------------------------------

///
/// Finite sum of weighted Diracs on the circle.
///
/// Nodes live in (-pi/2, pi/2], are pairwise distinct and are kept sorted in
/// ascending order together with their amplitudes. Amplitudes are nonzero.
///
class SpikeTrain
{
public:
    SpikeTrain(std::vector<double> nodes, std::vector<Complex> amps)
    {
        if (nodes.empty())
        {
            throw Error(Errc::invalid_argument, "spike train needs at least one node");
        }
        if (nodes.size() != amps.size())
        {
            throw Error(Errc::invalid_argument, "nodes and amplitudes differ in length");
        }
        std::vector<std::size_t> order(nodes.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return nodes[a] < nodes[b]; });
        nodes_.reserve(nodes.size());
        amps_.reserve(amps.size());
        for (auto k : order)
        {
            const double x = nodes[k];
            if (!std::isfinite(x) || !(x > -pi / 2) || x > pi / 2)
            {
                throw Error(Errc::invalid_argument,
                            "node " + std::to_string(x) + " outside (-pi/2, pi/2]");
            }
            if (!(std::abs(amps[k]) > 0.0))
            {
                throw Error(Errc::invalid_argument, "amplitudes must be nonzero");
            }
            nodes_.push_back(x);
            amps_.push_back(amps[k]);
        }
        if (nodes_.size() > 1 && !(min_separation(nodes_) > 0.0))
        {
            throw Error(Errc::invalid_argument, "nodes must be distinct");
        }
    }

    std::size_t size() const noexcept { return nodes_.size(); }
    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const Complex> amps() const noexcept { return amps_; }

private:
    std::vector<double> nodes_;
    std::vector<Complex> amps_;
};

/// Exact Fourier sample sum_j a_j exp(i omega x_j).
inline Complex fourier_sample(const SpikeTrain& spike, double omega)
{
    Complex acc{0.0, 0.0};
    const auto x = spike.nodes();
    const auto a = spike.amps();
    for (std::size_t j = 0; j < x.size(); ++j)
    {
        acc += a[j] * std::polar(1.0, omega * x[j]);
    }
    return acc;
}

//------------------------------------------------------------------------------
// Measurement oracle
//------------------------------------------------------------------------------

enum class NoiseKind
{
    none,
    cauchy_clipped,
    uniform_box,
};

namespace detail
{

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Uniform in the open interval (0, 1) from the top 53 bits.
inline double to_open_unit(std::uint64_t bits) noexcept
{
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace detail

///
/// Band-limited noisy Fourier sample source over [-omega_max, omega_max].
///
/// The noise value at a frequency is a pure function of (seed, omega), so
/// repeated and concurrent queries agree without any shared cache.
///
class MeasurementOracle
{
public:
    MeasurementOracle(SpikeTrain spike, double omega_max, double epsilon,
                      NoiseKind kind, std::uint64_t seed)
        : spike_(std::move(spike)),
          omega_max_(omega_max),
          epsilon_(epsilon),
          kind_(kind),
          seed_(seed)
    {
        if (!(omega_max > 0.0) || !std::isfinite(omega_max))
        {
            throw Error(Errc::domain_error, "omega_max must be positive");
        }
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
        {
            throw Error(Errc::domain_error, "epsilon must be nonnegative");
        }
    }

    Complex operator()(double omega) const { return eval(omega); }

    Complex eval(double omega) const
    {
        check_band(omega);
        return fourier_sample(spike_, omega) + noise(omega);
    }

    Complex clean(double omega) const
    {
        check_band(omega);
        return fourier_sample(spike_, omega);
    }

    /// The additive error e(omega); |e| <= epsilon.
    Complex noise(double omega) const
    {
        if (kind_ == NoiseKind::none || epsilon_ == 0.0)
        {
            return {0.0, 0.0};
        }
        // -0.0 and 0.0 are the same frequency
        const double w     = omega == 0.0 ? 0.0 : omega;
        std::uint64_t key  = detail::splitmix64(seed_ ^ detail::splitmix64(std::bit_cast<std::uint64_t>(w)));
        const double u1    = detail::to_open_unit(key = detail::splitmix64(key));
        const double u2    = detail::to_open_unit(detail::splitmix64(key));
        if (kind_ == NoiseKind::uniform_box)
        {
            const double half = epsilon_ / std::numbers::sqrt2;
            return {half * (2.0 * u1 - 1.0), half * (2.0 * u2 - 1.0)};
        }
        // complex Cauchy at scale eps/10, modulus clipped to eps
        const double scale = epsilon_ / 10.0;
        Complex e{scale * std::tan(pi * (u1 - 0.5)), scale * std::tan(pi * (u2 - 0.5))};
        const double mag = std::abs(e);
        if (mag > epsilon_)
        {
            e *= epsilon_ / mag;
        }
        return e;
    }

    const SpikeTrain& spike() const noexcept { return spike_; }
    double omega_max() const noexcept { return omega_max_; }
    double epsilon() const noexcept { return epsilon_; }
    NoiseKind noise_kind() const noexcept { return kind_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    void check_band(double omega) const
    {
        if (!(std::abs(omega) <= omega_max_))
        {
            throw Error(Errc::out_of_band, "|omega| = " + std::to_string(std::abs(omega)) +
                                               " exceeds " + std::to_string(omega_max_));
        }
    }

    SpikeTrain spike_;
    double omega_max_;
    double epsilon_;
    NoiseKind kind_;
    std::uint64_t seed_;
};

inline MeasurementOracle make_oracle(SpikeTrain spike, double omega_max, double epsilon,
                                     NoiseKind kind, std::uint64_t seed)
{
    return MeasurementOracle(std::move(spike), omega_max, epsilon, kind, seed);
}

//------------------------------------------------------------------------------
// Clustered configurations
//------------------------------------------------------------------------------

/// l_m = #{clusters of size >= m}, m = 1..max size.
inline std::vector<std::size_t> multiplicities(std::span<const std::size_t> sizes)
{
    const std::size_t s = sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
    std::vector<std::size_t> ell(s, 0);
    for (std::size_t m = 1; m <= s; ++m)
    {
        ell[m - 1] = static_cast<std::size_t>(
            std::count_if(sizes.begin(), sizes.end(), [m](std::size_t n) { return n >= m; }));
    }
    return ell;
}

struct ClusterConfig
{
    std::vector<std::vector<std::size_t>> partition; ///< indices into sorted nodes
    double h = 0.0;                                  ///< common intra-cluster gap
    std::vector<double> nu;                          ///< per-cluster spread factors
    double eta = 0.0;                                ///< inter-cluster separation
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> multiplicities;

    std::size_t cluster_count() const noexcept { return partition.size(); }
    std::size_t max_cluster_size() const noexcept { return multiplicities.size(); }
};

///
/// Check every ClusterConfig invariant against a node set. Returns a list of
/// human-readable violations; empty means the pair is consistent.
///
inline std::vector<std::string> cluster_violations(const SpikeTrain& spike,
                                                   const ClusterConfig& cfg,
                                                   double tol = 1e-12)
{
    std::vector<std::string> out;
    const auto x       = spike.nodes();
    const std::size_t n = x.size();

    std::vector<int> owner(n, -1);
    for (std::size_t c = 0; c < cfg.partition.size(); ++c)
    {
        for (auto idx : cfg.partition[c])
        {
            if (idx >= n)
            {
                out.push_back("partition index out of range");
                continue;
            }
            if (owner[idx] != -1)
            {
                out.push_back("partition not disjoint at node " + std::to_string(idx));
            }
            owner[idx] = static_cast<int>(c);
        }
    }
    if (std::count(owner.begin(), owner.end(), -1) != 0)
    {
        out.push_back("partition not exhaustive");
    }
    if (cfg.sizes.size() != cfg.partition.size() || cfg.nu.size() != cfg.partition.size())
    {
        out.push_back("sizes/nu length differs from cluster count");
        return out;
    }
    for (std::size_t c = 0; c < cfg.partition.size(); ++c)
    {
        if (cfg.sizes[c] != cfg.partition[c].size())
        {
            out.push_back("size mismatch in cluster " + std::to_string(c));
        }
    }
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t j = i + 1; j < n; ++j)
        {
            if (owner[i] < 0 || owner[j] < 0)
            {
                continue;
            }
            const double d = wrap_dist(x[i], x[j]);
            if (owner[i] == owner[j])
            {
                const double hi = cfg.nu[static_cast<std::size_t>(owner[i])] * cfg.h;
                if (d < cfg.h * (1.0 - tol) || d > hi * (1.0 + tol))
                {
                    out.push_back("intra-cluster distance " + std::to_string(d) +
                                  " outside [h, nu*h]");
                }
            }
            else if (d < cfg.eta * (1.0 - tol))
            {
                out.push_back("inter-cluster distance " + std::to_string(d) + " below eta");
            }
        }
    }
    const auto& ell = cfg.multiplicities;
    if (ell != multiplicities(cfg.sizes))
    {
        out.push_back("multiplicities inconsistent with sizes");
    }
    if (!ell.empty())
    {
        if (ell.front() != cfg.partition.size())
        {
            out.push_back("l_1 != M");
        }
        if (!std::is_sorted(ell.rbegin(), ell.rend()))
        {
            out.push_back("multiplicities not non-increasing");
        }
        if (std::accumulate(ell.begin(), ell.end(), std::size_t{0}) != n)
        {
            out.push_back("sum of multiplicities != n");
        }
    }
    return out;
}

struct ClusteredSpike
{
    SpikeTrain spike;
    ClusterConfig config;
};

struct GeneratorOptions
{
    std::optional<std::vector<Complex>> amps; ///< overrides random amplitudes
    bool random_offset = false;               ///< shift the layout off-center
};

///
/// Realise a clustered configuration inside (-pi/2, pi/2].
///
/// Each cluster with two or more nodes has its first gap exactly `delta` and
/// the remaining gaps drawn in [delta, ...] so that the cluster span stays
/// within nu_j * delta. Adjacent clusters are exactly `eta` apart. The gap
/// pattern depends only on the seed, so sweeping `delta` at a fixed seed
/// rescales one geometry. Amplitude moduli are uniform in [0.5, 2] with
/// uniform phases unless supplied.
///
inline ClusteredSpike make_clustered_config(std::size_t M, std::span<const std::size_t> sizes,
                                            double delta, std::span<const double> nu,
                                            double eta, std::uint64_t seed,
                                            const GeneratorOptions& opts = {})
{
    if (M == 0 || sizes.size() != M)
    {
        throw Error(Errc::infeasible_geometry, "need M >= 1 clusters with one size each");
    }
    if (nu.size() != M && nu.size() != 1)
    {
        throw Error(Errc::infeasible_geometry, "nu must have one entry or one per cluster");
    }
    if (!(delta > 0.0))
    {
        throw Error(Errc::infeasible_geometry, "delta must be positive");
    }
    std::vector<double> nus(M);
    for (std::size_t c = 0; c < M; ++c)
    {
        nus[c] = nu.size() == 1 ? nu[0] : nu[c];
    }

    std::size_t n      = 0;
    double budget      = (static_cast<double>(M) - 1.0) * eta;
    bool has_cluster   = false;
    for (std::size_t c = 0; c < M; ++c)
    {
        const std::size_t nc = sizes[c];
        if (nc == 0)
        {
            throw Error(Errc::infeasible_geometry, "empty cluster");
        }
        n += nc;
        if (nc >= 2)
        {
            has_cluster = true;
            if (nus[c] < static_cast<double>(nc - 1))
            {
                throw Error(Errc::infeasible_geometry,
                            "nu below n_j - 1 cannot hold gaps >= delta");
            }
        }
        budget += (static_cast<double>(nc) - 1.0) * nus[c] * delta;
    }
    if (!(budget < pi))
    {
        throw Error(Errc::infeasible_geometry, "configuration does not fit in (-pi/2, pi/2]");
    }
    if (M > 1 && !has_cluster)
    {
        throw Error(Errc::infeasible_geometry, "no cluster realises the separation delta");
    }
    if (M > 1 && eta < delta)
    {
        throw Error(Errc::infeasible_geometry, "eta below delta");
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> x;
    ClusterConfig cfg;
    cfg.h     = delta;
    cfg.nu    = nus;
    cfg.eta   = eta;
    cfg.sizes.assign(sizes.begin(), sizes.end());
    double pos = 0.0;
    for (std::size_t c = 0; c < M; ++c)
    {
        if (c > 0)
        {
            pos += eta;
        }
        const std::size_t nc = sizes[c];
        std::vector<std::size_t> members;
        members.push_back(x.size());
        x.push_back(pos);
        if (nc >= 2)
        {
            const double slack =
                (nus[c] - static_cast<double>(nc - 1)) / static_cast<double>(std::max<std::size_t>(nc - 2, 1));
            for (std::size_t i = 1; i < nc; ++i)
            {
                const double gap = i == 1 ? delta : delta * (1.0 + slack * unit(rng));
                pos += gap;
                members.push_back(x.size());
                x.push_back(pos);
            }
        }
        cfg.partition.push_back(std::move(members));
    }
    const double span = pos;
    double shift      = -span / 2.0;
    if (opts.random_offset)
    {
        const double room = 0.99 * (pi - span) / 2.0;
        shift += room * (2.0 * unit(rng) - 1.0);
    }
    for (auto& v : x)
    {
        v += shift;
    }

    std::vector<Complex> amps;
    if (opts.amps)
    {
        if (opts.amps->size() != n)
        {
            throw Error(Errc::invalid_argument, "supplied amplitudes do not match node count");
        }
        amps = *opts.amps;
    }
    else
    {
        for (std::size_t j = 0; j < n; ++j)
        {
            const double mod   = 0.5 + 1.5 * unit(rng);
            const double phase = pi * (2.0 * unit(rng) - 1.0);
            amps.push_back(std::polar(mod, phase));
        }
    }
    cfg.multiplicities = multiplicities(cfg.sizes);
    return ClusteredSpike{SpikeTrain(std::move(x), std::move(amps)), std::move(cfg)};
}

} // namespace spikesr

#endif // SPIKESR_SIGNAL_MODEL_HPP
