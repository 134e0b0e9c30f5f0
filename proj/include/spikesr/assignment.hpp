#ifndef SPIKESR_ASSIGNMENT_HPP
#define SPIKESR_ASSIGNMENT_HPP

#include <cstddef>
#include <limits>
#include <vector>

namespace spikesr
{

///
/// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
/// O(n^3)). Returns `perm` with row i assigned to column perm[i].
///
inline std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost)
{
    const std::size_t n = cost.size();
    if (n == 0)
    {
        return {};
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials; column 0 is a virtual start
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i)
    {
        match[0]         = i;
        std::size_t col0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do
        {
            used[col0]       = 1;
            const std::size_t row = match[col0];
            double delta     = inf;
            std::size_t col1 = 0;
            for (std::size_t j = 1; j <= n; ++j)
            {
                if (used[j])
                {
                    continue;
                }
                const double cur = cost[row - 1][j - 1] - u[row] - v[j];
                if (cur < minv[j])
                {
                    minv[j] = cur;
                    way[j]  = col0;
                }
                if (minv[j] < delta)
                {
                    delta = minv[j];
                    col1  = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j)
            {
                if (used[j])
                {
                    u[match[j]] += delta;
                    v[j] -= delta;
                }
                else
                {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
        } while (match[col0] != 0);
        do
        {
            const std::size_t col1 = way[col0];
            match[col0]            = match[col1];
            col0                   = col1;
        } while (col0 != 0);
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t j = 1; j <= n; ++j)
    {
        perm[match[j] - 1] = j - 1;
    }
    return perm;
}

} // namespace spikesr

#endif // SPIKESR_ASSIGNMENT_HPP
