#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fuseforge {

// Fixed pool of `threads` workers, the calling thread being worker 0.
// parallel_for hands out indices one at a time, so every index is its own
// schedulable task.
class ThreadPool {
public:
    explicit ThreadPool(int threads);
    ~ThreadPool();
    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    int size() const { return threads_; }

    // Calls fn(index, worker) for every index in [0, n) and returns once all
    // calls finished. The first exception thrown by fn is rethrown here.
    void parallel_for(std::size_t n, const std::function<void(std::size_t, int)>& fn);

private:
    void worker_loop(int worker);
    void run_tasks(int worker);

    int threads_;
    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
    int active_ = 0;
    const std::function<void(std::size_t, int)>* job_ = nullptr;
    std::size_t count_ = 0;
    std::atomic<std::size_t> next_{0};
    std::exception_ptr error_;
};

} // namespace fuseforge
