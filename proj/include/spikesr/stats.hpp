#ifndef SPIKESR_STATS_HPP
#define SPIKESR_STATS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "spikesr/error.hpp"

namespace spikesr::stats
{

struct LineFit
{
    double slope        = 0.0;
    double intercept    = 0.0;
    double slope_stderr = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
    {
        throw Error(Errc::invalid_argument, "line fit needs >= 2 paired points");
    }
    const double n  = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0))
    {
        throw Error(Errc::invalid_argument, "line fit needs distinct abscissae");
    }
    LineFit fit;
    fit.slope     = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (x.size() > 2)
    {
        double ssr = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            const double r = y[i] - (fit.slope * x[i] + fit.intercept);
            ssr += r * r;
        }
        fit.slope_stderr = std::sqrt(ssr / (n - 2.0) / sxx);
    }
    return fit;
}

/// Fit log(y) against log(x).
inline LineFit fit_loglog(std::span<const double> x, std::span<const double> y)
{
    std::vector<double> lx(x.size()), ly(y.size());
    std::transform(x.begin(), x.end(), lx.begin(), [](double v) { return std::log(v); });
    std::transform(y.begin(), y.end(), ly.begin(), [](double v) { return std::log(v); });
    return fit_line(lx, ly);
}

/// Fractional ranks (ties share the average rank), 1-based.
inline std::vector<double> ranks(std::span<const double> v)
{
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < idx.size())
    {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]])
        {
            ++j;
        }
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
        {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    return r;
}

inline double pearson(std::span<const double> x, std::span<const double> y)
{
    const double n  = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0))
    {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return sxy / std::sqrt(sxx * syy);
}

inline double spearman(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
    {
        throw Error(Errc::invalid_argument, "spearman needs >= 2 paired values");
    }
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    return pearson(rx, ry);
}

inline double mean(std::span<const double> v)
{
    if (v.empty())
    {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double median(std::span<const double> v)
{
    if (v.empty())
    {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::vector<double> c(v.begin(), v.end());
    std::sort(c.begin(), c.end());
    const std::size_t m = c.size() / 2;
    return c.size() % 2 == 1 ? c[m] : 0.5 * (c[m - 1] + c[m]);
}

} // namespace spikesr::stats

#endif // SPIKESR_STATS_HPP
