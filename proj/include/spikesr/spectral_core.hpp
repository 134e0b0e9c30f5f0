#ifndef SPIKESR_SPECTRAL_CORE_HPP
#define SPIKESR_SPECTRAL_CORE_HPP

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spikesr/error.hpp"
#include "spikesr/signal_model.hpp"

namespace spikesr
{

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Full singular spectrum, descending.
inline std::vector<double> singular_values(const ComplexMatrix& m)
{
    if (m.size() == 0)
    {
        return {};
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    const auto& s = svd.singularValues();
    return {s.data(), s.data() + s.size()};
}

/// Eigenvalues of a Hermitian matrix, descending.
inline std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h)
{
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues(); // ascending
    std::vector<double> out(ev.data(), ev.data() + ev.size());
    std::reverse(out.begin(), out.end());
    return out;
}

/// Moduli of the eigenvalues of a general square matrix, descending.
inline std::vector<double> eigenvalue_moduli(const ComplexMatrix& m)
{
    Eigen::ComplexEigenSolver<ComplexMatrix> es(m, false);
    if (es.info() != Eigen::Success)
    {
        throw Error(Errc::solver_failure, "eigenvalue iteration did not converge");
    }
    std::vector<double> out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    {
        out.push_back(std::abs(es.eigenvalues()(i)));
    }
    std::sort(out.begin(), out.end(), std::greater<>{});
    return out;
}

/// V(X;S) with entry (row k in S, column x in X) = e^{i k x}.
inline ComplexMatrix vandermonde(std::span<const double> nodes,
                                 std::span<const std::int64_t> sample_set)
{
    ComplexMatrix v(static_cast<Eigen::Index>(sample_set.size()),
                    static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t r = 0; r < sample_set.size(); ++r)
    {
        for (std::size_t c = 0; c < nodes.size(); ++c)
        {
            v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                std::polar(1.0, static_cast<double>(sample_set[r]) * nodes[c]);
        }
    }
    return v;
}

/// Square Vandermonde matrix V_n = V(X; {0..n-1}).
inline ComplexMatrix vandermonde_square(std::span<const double> nodes)
{
    std::vector<std::int64_t> s(nodes.size());
    for (std::size_t k = 0; k < s.size(); ++k)
    {
        s[k] = static_cast<std::int64_t>(k);
    }
    return vandermonde(nodes, s);
}

///
/// n x n Toeplitz matrix of samples mu_0..mu_{2n-2} with
/// entry(j,k) = mu_{n-1+j-k}; the top row runs mu_{n-1} .. mu_0.
///
class SampleToeplitz
{
public:
    SampleToeplitz(ComplexMatrix m, std::int64_t rho)
        : matrix_(std::move(m)), rho_(rho), sigma_(spikesr::singular_values(matrix_))
    {
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
    std::int64_t rho() const noexcept { return rho_; }
    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    Complex entry(std::size_t j, std::size_t k) const
    {
        return matrix_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
    }
    std::span<const double> singular_values() const noexcept { return sigma_; }

private:
    ComplexMatrix matrix_;
    std::int64_t rho_;
    std::vector<double> sigma_;
};

inline SampleToeplitz toeplitz_from_samples(std::span<const Complex> samples, std::size_t n,
                                            std::int64_t rho = 1)
{
    if (n == 0 || samples.size() != 2 * n - 1)
    {
        throw Error(Errc::wrong_sample_count, "expected " + std::to_string(2 * n - 1) +
                                                  " samples, got " +
                                                  std::to_string(samples.size()));
    }
    const auto N = static_cast<Eigen::Index>(n);
    ComplexMatrix t(N, N);
    for (Eigen::Index j = 0; j < N; ++j)
    {
        for (Eigen::Index k = 0; k < N; ++k)
        {
            t(j, k) = samples[static_cast<std::size_t>(N - 1 + j - k)];
        }
    }
    return SampleToeplitz(std::move(t), rho);
}

///
/// Relative Frobenius residual between the sample Toeplitz matrix of the
/// clean samples and V_n diag(e^{i(n-1)x_j} a_j) V_n^*.
///
inline double factorization_residual(const SpikeTrain& spike, std::size_t n)
{
    if (spike.size() != n)
    {
        throw Error(Errc::invalid_argument, "spike must have exactly n nodes");
    }
    std::vector<Complex> mu(2 * n - 1);
    for (std::size_t k = 0; k < mu.size(); ++k)
    {
        mu[k] = fourier_sample(spike, static_cast<double>(k));
    }
    const auto t = toeplitz_from_samples(mu, n);

    const ComplexMatrix v = vandermonde_square(spike.nodes());
    ComplexVector d(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j)
    {
        d(static_cast<Eigen::Index>(j)) =
            std::polar(1.0, static_cast<double>(n - 1) * spike.nodes()[j]) * spike.amps()[j];
    }
    const ComplexMatrix rhs = v * d.asDiagonal() * v.adjoint();
    return (t.matrix() - rhs).norm() / t.matrix().norm();
}

///
/// Ratios theta_i = sigma_i(V^* D V) / lambda_i(V V^*), both sequences sorted
/// descending. Ostrowski-type bounds predict min|d| <= theta_i <= max|d|;
/// the caller decides what to do with them.
///
inline std::vector<double> ostrowski_ratios(const ComplexMatrix& v, std::span<const Complex> d)
{
    if (v.rows() != v.cols() || static_cast<std::size_t>(v.rows()) != d.size())
    {
        throw Error(Errc::invalid_argument, "V must be n x n with n diagonal entries");
    }
    const auto n = v.rows();
    ComplexVector dv(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        dv(i) = d[static_cast<std::size_t>(i)];
    }
    const std::vector<double> lam = hermitian_eigenvalues(v * v.adjoint());
    if (lam.empty() || !(lam.back() > static_cast<double>(n) * DBL_EPSILON * lam.front()))
    {
        throw Error(Errc::ratios_undefined, "V is numerically singular");
    }
    const ComplexMatrix q       = v.adjoint() * dv.asDiagonal() * v;
    const std::vector<double> s = singular_values(q);
    std::vector<double> theta(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        theta[i] = s[i] / lam[i];
    }
    return theta;
}

struct ScalingTemplate
{
    std::size_t M = 1;
    std::vector<std::size_t> sizes{1};
    std::vector<double> nu{1.0};
    double eta         = 1.0;
    std::uint64_t seed = 0;
};

struct ScalingRow
{
    double delta = 0.0;
    std::vector<double> sigma; ///< singular values of V_n, descending
};

/// Singular values of V_n for one geometry rescaled across delta_grid.
inline std::vector<ScalingRow> vandermonde_scaling_probe(const ScalingTemplate& tpl,
                                                         std::span<const double> delta_grid)
{
    std::vector<ScalingRow> rows;
    rows.reserve(delta_grid.size());
    for (double delta : delta_grid)
    {
        // fixed amplitudes: only the node geometry matters here
        std::size_t n = 0;
        for (auto s : tpl.sizes)
        {
            n += s;
        }
        GeneratorOptions opts;
        opts.amps = std::vector<Complex>(n, Complex{1.0, 0.0});
        const auto cs = make_clustered_config(tpl.M, tpl.sizes, delta, tpl.nu, tpl.eta, tpl.seed, opts);
        rows.push_back({delta, singular_values(vandermonde_square(cs.spike.nodes()))});
    }
    return rows;
}

/// Debug dump: one "re,im" pair per entry, row-major, one matrix row per line.
inline void write_matrix_csv(std::ostream& os, const ComplexMatrix& m)
{
    const auto flags = os.flags();
    const auto prec  = os.precision();
    os << std::setprecision(17);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
    {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
        {
            if (c > 0)
            {
                os << ',';
            }
            os << m(r, c).real() << ',' << m(r, c).imag();
        }
        os << '\n';
    }
    os.flags(flags);
    os.precision(prec);
}

} // namespace spikesr

#endif // SPIKESR_SPECTRAL_CORE_HPP
