#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace etguard {

/// Fixed-capacity FIFO ring of jobs drained by a worker pool. Capacity bounds
/// admitted work (waiting plus running), so a full ring rejects at once
/// instead of letting callers pile up.
class BoundedWorkQueue {
public:
    using Job = std::function<void()>;

    BoundedWorkQueue(std::size_t capacity, std::size_t workers);
    ~BoundedWorkQueue();

    BoundedWorkQueue(const BoundedWorkQueue&) = delete;
    BoundedWorkQueue& operator=(const BoundedWorkQueue&) = delete;

    /// False when the queue is full or closed; the job is not retained then.
    bool try_submit(Job job);

    /// Stops admission, finishes admitted jobs and joins the workers.
    void close();

    std::size_t capacity() const noexcept { return slots_.size(); }
    std::size_t in_flight() const;
    std::size_t rejected() const;

private:
    void worker_loop();

    mutable std::mutex mutex_;
    std::condition_variable ready_;
    std::vector<std::optional<Job>> slots_;
    std::size_t head_ = 0;
    std::size_t queued_ = 0;
    std::size_t running_ = 0;
    std::size_t rejected_ = 0;
    bool closed_ = false;
    std::vector<std::thread> workers_;
};

} // namespace etguard
