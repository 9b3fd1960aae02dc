#include "etguard/request_queue.hpp"

#include <stdexcept>

namespace etguard {

BoundedWorkQueue::BoundedWorkQueue(std::size_t capacity, std::size_t workers) : slots_(capacity)
{
    if (capacity == 0 || workers == 0) {
        throw std::invalid_argument("queue capacity and worker count must be positive");
    }
    workers_.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) {
        workers_.emplace_back([this] { worker_loop(); });
    }
}

BoundedWorkQueue::~BoundedWorkQueue()
{
    close();
}

bool BoundedWorkQueue::try_submit(Job job)
{
    std::lock_guard lock(mutex_);
    if (closed_ || queued_ + running_ >= slots_.size()) {
        ++rejected_;
        return false;
    }
    slots_[(head_ + queued_) % slots_.size()] = std::move(job);
    ++queued_;
    ready_.notify_one();
    return true;
}

void BoundedWorkQueue::close()
{
    {
        std::lock_guard lock(mutex_);
        if (closed_ && workers_.empty()) {
            return;
        }
        closed_ = true;
    }
    ready_.notify_all();
    for (auto& t : workers_) {
        if (t.joinable()) {
            t.join();
        }
    }
    workers_.clear();
}

std::size_t BoundedWorkQueue::in_flight() const
{
    std::lock_guard lock(mutex_);
    return queued_ + running_;
}

std::size_t BoundedWorkQueue::rejected() const
{
    std::lock_guard lock(mutex_);
    return rejected_;
}

void BoundedWorkQueue::worker_loop()
{
    std::unique_lock lock(mutex_);
    for (;;) {
        ready_.wait(lock, [this] { return queued_ > 0 || closed_; });
        if (queued_ == 0) {
            return;
        }
        Job job = std::move(*slots_[head_]);
        slots_[head_].reset();
        head_ = (head_ + 1) % slots_.size();
        --queued_;
        ++running_;
        lock.unlock();
        try {
            job();
        } catch (...) {
            // Jobs report their own failures; a throw must not kill the worker.
        }
        lock.lock();
        --running_;
    }
}

} // namespace etguard
