#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace trellis_astar {

/// Binary min-heap over a vector. `Less` is a strict weak order; top() is the
/// least element. Entries stay readable through entries() in heap order.
template <class T, class Less = std::less<T>>
class MinHeap {
 public:
  MinHeap() = default;
  explicit MinHeap(Less less) : less_(std::move(less)) {}

  [[nodiscard]] bool empty() const { return items_.empty(); }
  [[nodiscard]] std::size_t size() const { return items_.size(); }
  [[nodiscard]] const T& top() const { return items_.front(); }
  [[nodiscard]] const std::vector<T>& entries() const { return items_; }

  void push(T value) {
    items_.push_back(std::move(value));
    std::push_heap(items_.begin(), items_.end(), greater());
  }

  T pop() {
    std::pop_heap(items_.begin(), items_.end(), greater());
    T out = std::move(items_.back());
    items_.pop_back();
    return out;
  }

  void reserve(std::size_t n) { items_.reserve(n); }

 private:
  // std heap algorithms build max-heaps; invert the order.
  auto greater() const {
    return [this](const T& a, const T& b) { return less_(b, a); };
  }

  std::vector<T> items_;
  Less less_{};
};

}  // namespace trellis_astar
