#include "phc/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace phc
{
namespace
{
std::pair<int, int> chunk(int begin, int end, int parts, int id)
{
    const int n = end - begin;
    const int base = n / parts;
    const int extra = n % parts;
    const int lo = begin + id * base + std::min(id, extra);
    const int hi = lo + base + (id < extra ? 1 : 0);
    return {lo, hi};
}
} // namespace

WorkerPool::WorkerPool(int workers) : workers_(std::max(1, workers))
{
    for (int id = 1; id < workers_; ++id)
    {
        threads_.emplace_back([this, id] { worker_loop(id); });
    }
}

WorkerPool::~WorkerPool()
{
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    wake_.notify_all();
    for (auto &t : threads_)
    {
        t.join();
    }
}

void WorkerPool::worker_loop(int id)
{
    std::size_t seen = 0;
    for (;;)
    {
        const std::function<void(int, int)> *body = nullptr;
        int begin = 0;
        int end = 0;
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_)
            {
                return;
            }
            seen = generation_;
            body = body_;
            begin = begin_;
            end = end_;
        }
        const auto [lo, hi] = chunk(begin, end, workers_, id);
        if (lo < hi)
        {
            (*body)(lo, hi);
        }
        {
            std::lock_guard lock(mutex_);
            if (--pending_ == 0)
            {
                done_.notify_one();
            }
        }
    }
}

void WorkerPool::parallel_for(int begin, int end, const std::function<void(int, int)> &body)
{
    if (end <= begin)
    {
        return;
    }
    if (workers_ == 1)
    {
        body(begin, end);
        return;
    }
    {
        std::lock_guard lock(mutex_);
        body_ = &body;
        begin_ = begin;
        end_ = end;
        pending_ = workers_ - 1;
        ++generation_;
    }
    wake_.notify_all();
    const auto [lo, hi] = chunk(begin, end, workers_, 0);
    if (lo < hi)
    {
        body(lo, hi);
    }
    std::unique_lock lock(mutex_);
    done_.wait(lock, [&] { return pending_ == 0; });
}

int resolve_worker_count(int requested)
{
    int cap = 0;
    if (const char *env = std::getenv("PHC_THREADS"))
    {
        try
        {
            cap = std::stoi(env);
        }
        catch (const std::exception &)
        {
            cap = 0;
        }
    }
    int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (cap > 0)
    {
        n = std::min(n, cap);
    }
    return std::max(1, n);
}

} // namespace phc
