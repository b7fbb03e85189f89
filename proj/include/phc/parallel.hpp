#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace phc
{
// Fixed-size pool that splits an index range into one contiguous chunk per
// worker. Chunk boundaries depend only on the range and worker count, and the
// call returns after every chunk finished, so each parallel_for is a barrier.
class WorkerPool
{
public:
    explicit WorkerPool(int workers);
    ~WorkerPool();

    WorkerPool(const WorkerPool &) = delete;
    WorkerPool &operator=(const WorkerPool &) = delete;

    int workers() const { return workers_; }

    void parallel_for(int begin, int end, const std::function<void(int, int)> &body);

private:
    void worker_loop(int id);

    int workers_;
    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(int, int)> *body_ = nullptr;
    int begin_ = 0;
    int end_ = 0;
    std::size_t generation_ = 0;
    int pending_ = 0;
    bool stop_ = false;
};

// Worker count from PHC_THREADS (if set), capped by `requested` when positive.
int resolve_worker_count(int requested);

} // namespace phc
