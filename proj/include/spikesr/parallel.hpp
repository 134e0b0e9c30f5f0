#ifndef SPIKESR_PARALLEL_HPP
#define SPIKESR_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace spikesr
{

/// Worker cap: SPIKE_SR_THREADS if set and positive, else hardware concurrency.
inline std::size_t worker_count()
{
    std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SPIKE_SR_THREADS"))
    {
        try
        {
            const long v = std::stol(env);
            if (v > 0)
            {
                return static_cast<std::size_t>(v);
            }
        }
        catch (...)
        {
        }
    }
    return hw;
}

///
/// Run body(i) for i in [0, count). Results must be written by index so the
/// output does not depend on scheduling. The first exception is rethrown.
///
template <typename Body>
void parallel_for(std::size_t count, Body&& body, std::size_t workers = 0)
{
    if (workers == 0)
    {
        workers = worker_count();
    }
    workers = std::min(workers, count);
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < count; ++i)
        {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
    {
        pool.emplace_back([&] {
            for (;;)
            {
                const std::size_t i = next.fetch_add(1);
                if (i >= count)
                {
                    return;
                }
                try
                {
                    body(i);
                }
                catch (...)
                {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                    {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool)
    {
        t.join();
    }
    if (failure)
    {
        std::rethrow_exception(failure);
    }
}

} // namespace spikesr

#endif // SPIKESR_PARALLEL_HPP
