#ifndef SPIKESR_SR_METHODS_HPP
#define SPIKESR_SR_METHODS_HPP

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spikesr/error.hpp"
#include "spikesr/signal_model.hpp"
#include "spikesr/spectral_core.hpp"

namespace spikesr
{

///
/// Samples mu(rho k + t), k = 0..K-1. The rate and offset are real so the
/// same container serves integer decimation and the real-rate DP baseline.
///
struct SampleVector
{
    std::vector<Complex> values;
    double rho = 1.0;
    double t   = 0.0;

    std::size_t size() const noexcept { return values.size(); }
    double frequency(std::size_t k) const { return rho * static_cast<double>(k) + t; }
};

inline SampleVector sample_grid(const MeasurementOracle& oracle, double rho, double t,
                                std::size_t K)
{
    SampleVector s;
    s.rho = rho;
    s.t   = t;
    s.values.reserve(K);
    for (std::size_t k = 0; k < K; ++k)
    {
        s.values.push_back(oracle(s.frequency(k)));
    }
    return s;
}

/// Offset that centres K samples at rate rho around frequency zero.
inline double centring_offset(double rho, std::size_t K)
{
    return -rho * static_cast<double>((K - 1) / 2);
}

/// Largest |frequency| touched by a centred set of K samples plus shift.
inline double centred_footprint(double rho, double shift, std::size_t K)
{
    const double t0 = centring_offset(rho, K) + shift;
    return std::max(std::abs(t0), std::abs(t0 + rho * static_cast<double>(K - 1)));
}

/// mu(rho (k - k0) + shift) with k0 = floor((K-1)/2): centred in the band.
inline SampleVector centred_samples(const MeasurementOracle& oracle, double rho, double shift,
                                    std::size_t K)
{
    return sample_grid(oracle, rho, centring_offset(rho, K) + shift, K);
}

struct NodeEstimate
{
    std::vector<Complex> phis; ///< unit-modulus nodes at `rate`
    std::vector<Complex> amps; ///< amplitudes paired with phis
    double rate = 1.0;
    double max_radial_deviation = 0.0; ///< max |1 - |root|| before projection
    double residual             = 0.0; ///< relative amplitude-fit residual
};

struct AmplitudeFit
{
    std::vector<Complex> amps;
    double residual  = 0.0; ///< ||V a - mu|| / ||mu||
    double condition = 1.0;
    bool ill_conditioned = false; ///< condition above 1e14
};

namespace detail
{

inline constexpr double max_condition = 1e14;

inline AmplitudeFit solve_ls(const ComplexMatrix& v, const ComplexVector& y)
{
    AmplitudeFit fit;
    Eigen::JacobiSVD<ComplexMatrix> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    fit.condition       = smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
    fit.ill_conditioned = !(fit.condition <= max_condition);
    const ComplexVector a = svd.solve(y);
    fit.amps.assign(a.data(), a.data() + a.size());
    const double ynorm = y.norm();
    const double rnorm = (v * a - y).norm();
    fit.residual       = ynorm > 0.0 ? rnorm / ynorm : rnorm;
    return fit;
}

inline Complex unit(Complex z) { return z / std::abs(z); }

} // namespace detail

///
/// Least-squares amplitudes for V a = mu with V(k, j) = phi_j^k,
/// k = 0..K-1. For a shifted set mu(rho k + t) the result carries the
/// factor phi_j^{t/rho}, i.e. it returns a_j e^{i t x_j}.
///
inline AmplitudeFit amplitude_ls(std::span<const Complex> phis, const SampleVector& samples)
{
    const std::size_t K = samples.size();
    const std::size_t n = phis.size();
    if (n == 0 || K < n)
    {
        throw Error(Errc::wrong_sample_count, "amplitude fit needs K >= n >= 1");
    }
    ComplexMatrix v(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j)
    {
        const double arg = std::arg(phis[j]);
        const double mod = std::abs(phis[j]);
        for (std::size_t k = 0; k < K; ++k)
        {
            const double kk = static_cast<double>(k);
            v(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
                std::polar(std::pow(mod, kk), kk * arg);
        }
    }
    const ComplexVector y =
        Eigen::Map<const ComplexVector>(samples.values.data(), static_cast<Eigen::Index>(K));
    return detail::solve_ls(v, y);
}

///
/// Amplitudes of known nodes from all integer frequencies in [-omega, omega].
///
inline AmplitudeFit amplitudes_full_band(const MeasurementOracle& oracle,
                                         std::span<const double> nodes)
{
    const auto W = static_cast<std::int64_t>(std::floor(oracle.omega_max()));
    const std::size_t K = static_cast<std::size_t>(2 * W + 1);
    ComplexMatrix v(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(nodes.size()));
    ComplexVector y(static_cast<Eigen::Index>(K));
    for (std::int64_t w = -W; w <= W; ++w)
    {
        const auto r = static_cast<Eigen::Index>(w + W);
        y(r)         = oracle(static_cast<double>(w));
        for (std::size_t j = 0; j < nodes.size(); ++j)
        {
            v(r, static_cast<Eigen::Index>(j)) = std::polar(1.0, static_cast<double>(w) * nodes[j]);
        }
    }
    return detail::solve_ls(v, y);
}

namespace detail
{

inline NodeEstimate finish_estimate(const Eigen::VectorXcd& roots, const SampleVector& samples)
{
    NodeEstimate est;
    est.rate = samples.rho;
    for (Eigen::Index i = 0; i < roots.size(); ++i)
    {
        const Complex r = roots(i);
        if (!(std::abs(r) > 0.0) || !std::isfinite(std::abs(r)))
        {
            throw Error(Errc::solver_failure, "root at zero or infinity");
        }
        est.max_radial_deviation = std::max(est.max_radial_deviation, std::abs(1.0 - std::abs(r)));
        est.phis.push_back(unit(r));
    }
    const auto fit = amplitude_ls(est.phis, samples);
    est.amps       = fit.amps;
    est.residual   = fit.residual;
    return est;
}

} // namespace detail

///
/// Prony's method on K = 2n samples.
///
/// Solves the n x n Hankel system for the monic Prony polynomial, takes its
/// roots from the companion matrix, projects them radially onto the unit
/// circle and fits amplitudes by least squares.
///
inline NodeEstimate prony(const SampleVector& samples, std::size_t n)
{
    if (n == 0 || samples.size() != 2 * n)
    {
        throw Error(Errc::wrong_sample_count, "prony needs exactly 2n samples");
    }
    const auto N = static_cast<Eigen::Index>(n);
    const auto& h = samples.values;
    ComplexMatrix H(N, N);
    ComplexVector b(N);
    for (Eigen::Index k = 0; k < N; ++k)
    {
        for (Eigen::Index m = 0; m < N; ++m)
        {
            H(k, m) = h[static_cast<std::size_t>(k + m)];
        }
        b(k) = -h[static_cast<std::size_t>(k + N)];
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    if (!(s(N - 1) > 0.0) || s(0) / s(N - 1) > detail::max_condition)
    {
        throw Error(Errc::degenerate_sample_set, "Hankel system is numerically singular");
    }
    const ComplexVector c = svd.solve(b);

    // companion matrix of z^n + c_{n-1} z^{n-1} + ... + c_0
    ComplexMatrix C = ComplexMatrix::Zero(N, N);
    for (Eigen::Index i = 1; i < N; ++i)
    {
        C(i, i - 1) = 1.0;
    }
    C.col(N - 1) = -c;
    Eigen::ComplexEigenSolver<ComplexMatrix> es(C, false);
    if (es.info() != Eigen::Success || es.eigenvalues().size() != N)
    {
        throw Error(Errc::solver_failure, "companion eigenvalues did not converge");
    }
    return detail::finish_estimate(es.eigenvalues(), samples);
}

/// Default pencil parameter floor(K/2) clamped to [n, K-n].
inline std::size_t default_pencil(std::size_t K, std::size_t n)
{
    return std::clamp(K / 2, n, K - n);
}

///
/// Matrix Pencil with rank-n truncation.
///
/// The (K-L) x (L+1) Hankel matrix of samples is reduced to its leading n
/// right singular vectors; the nodes are the eigenvalues of the pencil
/// formed by the unshifted and shifted rows of that basis.
///
inline NodeEstimate matrix_pencil(const SampleVector& samples, std::size_t n,
                                  std::optional<std::size_t> pencil = std::nullopt)
{
    const std::size_t K = samples.size();
    if (n == 0 || K < 2 * n)
    {
        throw Error(Errc::wrong_sample_count, "matrix pencil needs K >= 2n samples");
    }
    const std::size_t L = pencil.value_or(default_pencil(K, n));
    if (L < n || L > K - n)
    {
        throw Error(Errc::invalid_argument, "pencil parameter outside [n, K-n]");
    }
    const auto rows = static_cast<Eigen::Index>(K - L);
    const auto cols = static_cast<Eigen::Index>(L + 1);
    const auto N    = static_cast<Eigen::Index>(n);
    ComplexMatrix Y(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
    {
        for (Eigen::Index c = 0; c < cols; ++c)
        {
            Y(r, c) = samples.values[static_cast<std::size_t>(r + c)];
        }
    }

    ComplexMatrix W;
    Eigen::VectorXd s;
    if (std::max(rows, cols) > 64)
    {
        Eigen::BDCSVD<ComplexMatrix> svd(Y, Eigen::ComputeThinV);
        s = svd.singularValues();
        W = svd.matrixV().leftCols(N);
    }
    else
    {
        Eigen::JacobiSVD<ComplexMatrix> svd(Y, Eigen::ComputeThinV);
        s = svd.singularValues();
        W = svd.matrixV().leftCols(N);
    }
    const double tol = static_cast<double>(std::max(rows, cols)) * DBL_EPSILON * s(0);
    if (s.size() < N || !(s(0) > 0.0) || !(s(N - 1) > tol))
    {
        throw Error(Errc::model_order_unreachable, "sample matrix rank below n");
    }
    // rows of Y lie in the span of conj(W); shifting a row index multiplies by z
    const auto Lr         = static_cast<Eigen::Index>(L);
    const ComplexMatrix W0 = W.topRows(Lr).conjugate();
    const ComplexMatrix W1 = W.bottomRows(Lr).conjugate();
    const ComplexMatrix F  = W0.colPivHouseholderQr().solve(W1);
    Eigen::ComplexEigenSolver<ComplexMatrix> es(F, false);
    if (es.info() != Eigen::Success)
    {
        throw Error(Errc::solver_failure, "pencil eigenvalues did not converge");
    }
    return detail::finish_estimate(es.eigenvalues(), samples);
}

//------------------------------------------------------------------------------
// Histogram-based decimated Prony (baseline)
//------------------------------------------------------------------------------

struct DpOptions
{
    std::size_t n_rho  = 900;
    std::size_t n_bins = 1000;
    std::optional<double> rho_lo; ///< defaults to omega/(2(2n-1))
    std::optional<double> rho_hi; ///< defaults to omega/(2n-1)
};

struct DpResult
{
    NodeEstimate estimate; ///< rate-1 nodes and amplitudes
    std::vector<double> nodes;
    std::size_t skipped_rates = 0; ///< sub-problems rejected as degenerate
};

///
/// Decimated Prony with histogram consensus: run Prony at N_rho rates spread
/// over the admissible interval, lift every root to all of its pre-images in
/// (-pi/2, pi/2], bin them, and keep the n most populated bins. Each winner
/// is refined by averaging the members of its bin and of the neighbouring
/// bins that are not winners themselves.
///
inline DpResult decimated_prony_histogram(const MeasurementOracle& oracle, std::size_t n,
                                          const DpOptions& opts)
{
    if (n == 0 || opts.n_rho == 0 || opts.n_bins == 0)
    {
        throw Error(Errc::invalid_argument, "DP needs n, N_rho, N_b >= 1");
    }
    const double width = 2.0 * static_cast<double>(n) - 1.0;
    const double lo    = opts.rho_lo.value_or(oracle.omega_max() / (2.0 * width));
    const double hi    = opts.rho_hi.value_or(oracle.omega_max() / width);
    const std::size_t nb = opts.n_bins;

    std::vector<std::size_t> count(nb, 0);
    std::vector<double> sum(nb, 0.0);
    DpResult out;
    for (std::size_t i = 0; i < opts.n_rho; ++i)
    {
        const double rho =
            opts.n_rho == 1 ? lo
                            : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(opts.n_rho - 1);
        NodeEstimate est;
        try
        {
            est = prony(centred_samples(oracle, rho, 0.0, 2 * n), n);
        }
        catch (const Error& e)
        {
            if (e.code() == Errc::degenerate_sample_set || e.code() == Errc::solver_failure)
            {
                ++out.skipped_rates;
                continue;
            }
            throw;
        }
        for (const auto& w : est.phis)
        {
            const double theta = std::arg(w);
            const auto m_lo = static_cast<std::int64_t>(std::ceil((-rho * pi / 2 - theta) / two_pi));
            const auto m_hi = static_cast<std::int64_t>(std::floor((rho * pi / 2 - theta) / two_pi));
            for (std::int64_t m = m_lo - 1; m <= m_hi + 1; ++m)
            {
                const double x = (theta + two_pi * static_cast<double>(m)) / rho;
                if (!(x > -pi / 2) || x > pi / 2)
                {
                    continue;
                }
                auto b = static_cast<std::size_t>(std::floor((x + pi / 2) / pi * static_cast<double>(nb)));
                b      = std::min(b, nb - 1);
                ++count[b];
                sum[b] += x;
            }
        }
    }

    std::vector<std::size_t> order(nb);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return count[a] > count[b]; });
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < order.size() && peaks.size() < n; ++i)
    {
        if (count[order[i]] == 0)
        {
            break;
        }
        peaks.push_back(order[i]);
    }
    if (peaks.size() < n)
    {
        throw Error(Errc::insufficient_consensus,
                    std::to_string(peaks.size()) + " populated bins for " + std::to_string(n) + " nodes");
    }
    const auto is_peak = [&](std::size_t b) {
        return std::find(peaks.begin(), peaks.end(), b) != peaks.end();
    };
    for (auto b : peaks)
    {
        double s       = sum[b];
        std::size_t c  = count[b];
        if (b > 0 && !is_peak(b - 1))
        {
            s += sum[b - 1];
            c += count[b - 1];
        }
        if (b + 1 < nb && !is_peak(b + 1))
        {
            s += sum[b + 1];
            c += count[b + 1];
        }
        out.nodes.push_back(s / static_cast<double>(c));
    }
    std::sort(out.nodes.begin(), out.nodes.end());

    const auto fit = amplitudes_full_band(oracle, out.nodes);
    out.estimate.rate     = 1.0;
    out.estimate.amps     = fit.amps;
    out.estimate.residual = fit.residual;
    for (double x : out.nodes)
    {
        out.estimate.phis.push_back(std::polar(1.0, x));
    }
    return out;
}

} // namespace spikesr

#endif // SPIKESR_SR_METHODS_HPP
