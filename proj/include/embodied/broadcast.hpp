#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace embodied {

/// Fan-out of values to any number of independent readers. Each reader has
/// a bounded queue; a slow reader loses its oldest entries, never blocks
/// the publisher.
template <typename T>
class Broadcaster {
 public:
  class Subscription {
   public:
    explicit Subscription(std::size_t capacity) : capacity_(capacity) {}

    /// Waits up to `timeout` for the next value. nullopt on timeout or close.
    std::optional<T> pop(std::chrono::milliseconds timeout) {
      std::unique_lock lock(mutex_);
      cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
      if (queue_.empty()) return std::nullopt;
      T v = std::move(queue_.front());
      queue_.pop_front();
      return v;
    }

    std::vector<T> drain() {
      std::lock_guard lock(mutex_);
      std::vector<T> out(std::make_move_iterator(queue_.begin()), std::make_move_iterator(queue_.end()));
      queue_.clear();
      return out;
    }

    bool closed() const {
      std::lock_guard lock(mutex_);
      return closed_;
    }
    std::size_t dropped() const {
      std::lock_guard lock(mutex_);
      return dropped_;
    }

   private:
    friend class Broadcaster;

    void push(const T& v) {
      {
        std::lock_guard lock(mutex_);
        if (closed_) return;
        if (queue_.size() >= capacity_) {
          queue_.pop_front();
          ++dropped_;
        }
        queue_.push_back(v);
      }
      cv_.notify_one();
    }

    void close() {
      {
        std::lock_guard lock(mutex_);
        closed_ = true;
      }
      cv_.notify_all();
    }

    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<T> queue_;
    std::size_t capacity_;
    std::size_t dropped_ = 0;
    bool closed_ = false;
  };

  std::shared_ptr<Subscription> subscribe(std::size_t capacity = 1024) {
    auto sub = std::make_shared<Subscription>(capacity);
    std::lock_guard lock(mutex_);
    subscribers_.push_back(sub);
    return sub;
  }

  void publish(const T& value) {
    std::lock_guard lock(mutex_);
    std::erase_if(subscribers_, [&](const std::weak_ptr<Subscription>& w) {
      auto s = w.lock();
      if (!s) return true;
      s->push(value);
      return false;
    });
  }

  void close_all() {
    std::lock_guard lock(mutex_);
    for (auto& w : subscribers_) {
      if (auto s = w.lock()) s->close();
    }
    subscribers_.clear();
  }

  std::size_t subscriber_count() {
    std::lock_guard lock(mutex_);
    std::erase_if(subscribers_, [](const auto& w) { return w.expired(); });
    return subscribers_.size();
  }

 private:
  std::mutex mutex_;
  std::vector<std::weak_ptr<Subscription>> subscribers_;
};

}  // namespace embodied
