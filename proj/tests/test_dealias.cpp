#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "spikesr/dealias.hpp"

using namespace spikesr;

TEST(Bezout, Identity)
{
    for (std::int64_t a = 1; a < 80; ++a)
    {
        for (std::int64_t b = 1; b < 80; ++b)
        {
            const auto [u, v] = bezout(a, b);
            EXPECT_EQ(u * a + v * b, std::gcd(a, b));
        }
    }
}

TEST(CandidateRoots, AllPreimages)
{
    const Complex w = std::polar(1.0, 0.9);
    const auto c    = candidate_roots(w, 5);
    ASSERT_EQ(c.size(), 5u);
    for (double x : c)
    {
        EXPECT_NEAR(wrap_dist(5 * x, 0.9), 0.0, 1e-13);
        EXPECT_GT(x, -pi);
        EXPECT_LE(x, pi);
    }
    EXPECT_THROW(candidate_roots(w, 0), Error);
}

TEST(DealiasNode, AgreesWithBruteForce)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-pi / 2 + 1e-9, pi / 2);
    for (std::int64_t rho = 2; rho <= 30; ++rho)
    {
        std::int64_t t = 2;
        while (std::gcd(t, rho) != 1)
        {
            ++t;
        }
        for (int i = 0; i < 100; ++i)
        {
            const double x = u(rng);
            const Complex pr = std::polar(1.0, static_cast<double>(rho) * x);
            const Complex pt = std::polar(1.0, static_cast<double>(t) * x);
            const double got = dealias_node({pr, pt, rho, t});
            EXPECT_LE(wrap_dist(got, x), 1e-12);
            EXPECT_LE(wrap_dist(got, oracle::dealias(pr, pt, rho, t)), 1e-12);
        }
    }
}

TEST(DealiasNode, RateOnePassesThrough)
{
    EXPECT_NEAR(dealias_node({std::polar(1.0, 0.3), Complex{1}, 1, 0}), 0.3, 1e-15);
}

TEST(DealiasNode, Errors)
{
    try
    {
        dealias_node({Complex{1}, Complex{1}, 6, 4});
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), Errc::not_coprime);
    }
    // inconsistent shift power lands between two candidates
    const double x = 0.2;
    const Complex pr = std::polar(1.0, 10 * x);
    const Complex pt = std::polar(1.0, 3 * x + 3 * pi / 10);
    try
    {
        dealias_node({pr, pt, 10, 3});
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), Errc::ambiguous_alias);
    }
    EXPECT_NO_THROW(dealias_node({pr, pt, 10, 3}, pi));
}

TEST(DealiasNode, ToleratesSmallPhaseNoise)
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-pi / 2 + 1e-9, pi / 2), n(-1e-4, 1e-4);
    for (int i = 0; i < 500; ++i)
    {
        const double x = u(rng);
        const double got = dealias_node({std::polar(1.0, 12 * x + n(rng)), std::polar(1.0, 5 * x + n(rng)), 12, 5});
        EXPECT_LE(wrap_dist(got, x), 2e-4 / 12);
    }
}

TEST(ShiftPower, RatioOfAmplitudes)
{
    const Complex a{0.5, 0.5};
    const Complex s = shift_power_from_amps(a, a * std::polar(1.0, 0.7));
    EXPECT_NEAR(std::arg(s), 0.7, 1e-15);
    EXPECT_NEAR(std::abs(s), 1.0, 1e-15);
    try
    {
        shift_power_from_amps(Complex{1e-6}, Complex{1}, 1e-3);
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), Errc::amplitude_underflow);
    }
}

TEST(MatchEstimates, OptimalAgainstPermutations)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-pi, pi), jitter(-0.05, 0.05);
    for (int trial = 0; trial < 50; ++trial)
    {
        NodeEstimate a, b;
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 5);
        std::vector<double> th(n);
        for (auto& v : th)
        {
            v = u(rng);
            a.phis.push_back(std::polar(1.0, v));
        }
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        for (auto k : order)
        {
            b.phis.push_back(std::polar(1.0, th[k] + jitter(rng)));
        }
        const auto perm = match_estimates(a, b);
        std::vector<std::vector<double>> cost(n, std::vector<double>(n));
        double got = 0;
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t j = 0; j < n; ++j)
            {
                cost[i][j] = wrap_dist(std::arg(a.phis[i]), std::arg(b.phis[j]));
            }
            got += cost[i][perm[i]];
        }
        EXPECT_NEAR(got, oracle::brute_assignment_cost(cost), 1e-12);
    }
    NodeEstimate one, two;
    one.phis = {Complex{1}};
    two.phis = {Complex{1}, Complex{-1}};
    EXPECT_THROW(match_estimates(one, two), Error);
}
