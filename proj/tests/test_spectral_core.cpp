#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "spikesr/spectral_core.hpp"
#include "spikesr/validation.hpp"

using namespace spikesr;

namespace
{

struct Draw
{
    std::vector<double> x;
    std::vector<Complex> a;
};

Draw draw(std::mt19937_64& rng, std::size_t n)
{
    return {detail::random_nodes(rng, n, 1e-2), detail::random_amps(rng, n)};
}

} // namespace

TEST(SingularValues, AgreeWithGramOracle)
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (int i = 0; i < 50; ++i)
    {
        ComplexMatrix m(5, 5);
        for (Eigen::Index r = 0; r < 5; ++r)
        {
            for (Eigen::Index c = 0; c < 5; ++c)
            {
                m(r, c) = {g(rng), g(rng)};
            }
        }
        const auto s   = singular_values(m);
        const auto ref = oracle::singular_values(m);
        ASSERT_EQ(s.size(), 5u);
        for (std::size_t k = 0; k < 5; ++k)
        {
            EXPECT_NEAR(s[k], ref[k], 1e-9 * ref[0]);
        }
        EXPECT_TRUE(std::is_sorted(s.rbegin(), s.rend()));
    }
}

TEST(Vandermonde, EntriesAndDeterminant)
{
    const std::vector<double> x{-0.5, 0.2, 1.1};
    const std::vector<std::int64_t> rows{0, 1, 2};
    const auto v = vandermonde(x, rows);
    EXPECT_NEAR(std::abs(v(2, 1) - std::polar(1.0, 0.4)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(v.determinant()), oracle::chord_product(x), 1e-13);
    EXPECT_TRUE(vandermonde_square(x).isApprox(v));
}

TEST(Toeplitz, MatchesDefinition)
{
    std::mt19937_64 rng(2);
    for (std::size_t n = 2; n <= 6; ++n)
    {
        const auto d = draw(rng, n);
        for (std::int64_t rho : {1, 3, 8})
        {
            std::vector<Complex> mu(2 * n - 1);
            for (std::size_t k = 0; k < mu.size(); ++k)
            {
                mu[k] = oracle::sample(d.x, d.a, static_cast<double>(rho * static_cast<std::int64_t>(k)));
            }
            const auto t   = toeplitz_from_samples(mu, n, rho);
            const auto ref = oracle::toeplitz(d.x, d.a, n, rho);
            EXPECT_LE((t.matrix() - ref).norm(), 1e-12 * ref.norm());
            EXPECT_EQ(t.rho(), rho);
            EXPECT_EQ(t.size(), n);
        }
    }
}

TEST(Toeplitz, WrongSampleCount)
{
    std::vector<Complex> mu(4);
    try
    {
        toeplitz_from_samples(mu, 3);
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), Errc::wrong_sample_count);
    }
}

TEST(Toeplitz, ExactRankForFewerNodes)
{
    // two nodes seen through a 4 x 4 matrix: sigma_3 and sigma_4 vanish
    const std::vector<double> x{-0.4, 0.9};
    const std::vector<Complex> a{{1, 0}, {0.3, 0.7}};
    std::vector<Complex> mu(7);
    for (std::size_t k = 0; k < 7; ++k)
    {
        mu[k] = oracle::sample(x, a, static_cast<double>(k));
    }
    const auto t = toeplitz_from_samples(mu, 4);
    const auto s = t.singular_values();
    EXPECT_GT(s[1], 1e-3);
    EXPECT_LT(s[2], 1e-12 * s[0]);
}

TEST(Factorization, IdentityHolds)
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i)
    {
        const std::size_t n = 2 + static_cast<std::size_t>(i % 7);
        const auto d        = draw(rng, n);
        EXPECT_LE(factorization_residual(SpikeTrain(d.x, d.a), n), 1e-10);
    }
    EXPECT_THROW(factorization_residual(SpikeTrain({0.1}, {Complex{1}}), 2), Error);
}

TEST(Ostrowski, SandwichForPositiveDiagonal)
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> mod(0.2, 4.0);
    for (int i = 0; i < 300; ++i)
    {
        const std::size_t n = 2 + static_cast<std::size_t>(i % 5);
        const auto x        = detail::random_nodes(rng, n, 2e-2);
        std::vector<Complex> d(n);
        double lo = 1e9, hi = 0;
        for (auto& v : d)
        {
            v  = mod(rng);
            lo = std::min(lo, v.real());
            hi = std::max(hi, v.real());
        }
        for (double t : ostrowski_ratios(vandermonde_square(x), d))
        {
            EXPECT_GE(t, lo * (1 - 1e-8));
            EXPECT_LE(t, hi * (1 + 1e-8));
        }
    }
}

TEST(Ostrowski, IdentityVandermondeGivesModuli)
{
    const std::vector<double> x{-1.0, 0.0, 1.0};
    const std::vector<Complex> d{{0, 2}, {-1, 0}, {0.5, 0.5}};
    const auto th = ostrowski_ratios(vandermonde_square(x), d);
    EXPECT_GE(th.back(), std::abs(d[2]) * (1 - 1e-8));
    EXPECT_LE(th.front(), 2.0 * (1 + 1e-8));
}

TEST(Ostrowski, SingularV)
{
    ComplexMatrix v = ComplexMatrix::Ones(3, 3);
    const std::vector<Complex> d(3, Complex{1});
    try
    {
        ostrowski_ratios(v, d);
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), Errc::ratios_undefined);
    }
}

TEST(ScalingProbe, TwoClusterExponents)
{
    const auto deltas = log_grid(1e-2, 1e-4, 8);
    const auto slopes = scaling_slopes(two_cluster_template(), deltas);
    const double expect[] = {0, 0, 1, 1, 2};
    ASSERT_EQ(slopes.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i)
    {
        EXPECT_NEAR(slopes[i], expect[i], 0.15) << i;
    }
}

TEST(ScalingProbe, SingleClusterExponents)
{
    const auto deltas = log_grid(1e-2, 1e-4, 6);
    const auto slopes = scaling_slopes({1, {3}, {3.0}, 1.0, 2}, deltas);
    EXPECT_NEAR(slopes[0], 0, 0.1);
    EXPECT_NEAR(slopes[1], 1, 0.1);
    EXPECT_NEAR(slopes[2], 2, 0.1);
}

TEST(MatrixCsv, Format)
{
    ComplexMatrix m(1, 2);
    m << Complex{1, -0.5}, Complex{0.1, 2};
    std::ostringstream os;
    write_matrix_csv(os, m);
    EXPECT_EQ(os.str(), "1,-0.5,0.10000000000000001,2\n");
}
