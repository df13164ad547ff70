#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace trellis_astar {

/// Dense zero-based index of one dataset element.
using ElementId = std::uint32_t;

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::string words_to_hex(const std::uint64_t* words, std::size_t count) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  bool started = false;
  for (std::size_t w = count; w-- > 0;) {
    for (int nib = 15; nib >= 0; --nib) {
      const unsigned d = (words[w] >> (4 * nib)) & 0xF;
      if (d != 0 || started) {
        out.push_back(kDigits[d]);
        started = true;
      }
    }
  }
  if (!started) out = "0";
  return out;
}

inline std::vector<std::uint64_t> hex_to_words(std::string_view hex) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  if (hex.empty()) throw std::invalid_argument("empty hex cluster pattern");
  std::vector<std::uint64_t> words((hex.size() + 15) / 16, 0);
  std::size_t nib = 0;
  for (std::size_t i = hex.size(); i-- > 0; ++nib) {
    const char c = hex[i];
    std::uint64_t d;
    if (c >= '0' && c <= '9') d = static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') d = static_cast<std::uint64_t>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') d = static_cast<std::uint64_t>(c - 'A' + 10);
    else throw std::invalid_argument("bad hex digit in cluster pattern: " + std::string(hex));
    words[nib / 16] |= d << (4 * (nib % 16));
  }
  return words;
}

}  // namespace detail

/// Fixed-capacity bit set over element indices, 64 * Words elements.
/// Ordered by the unsigned numeric value of the bit pattern.
template <std::size_t Words>
class FixedBits {
 public:
  static constexpr std::size_t kCapacity = 64 * Words;

  constexpr FixedBits() = default;

  static FixedBits singleton(ElementId i) {
    FixedBits s;
    s.insert(i);
    return s;
  }

  static FixedBits full(std::size_t n) {
    if (n > kCapacity) {
      throw CapacityError("element count " + std::to_string(n) + " exceeds fixed bit-set capacity " +
                          std::to_string(kCapacity));
    }
    FixedBits s;
    for (std::size_t w = 0; w < Words && n > 0; ++w) {
      const std::size_t take = std::min<std::size_t>(n, 64);
      s.words_[w] = take == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << take) - 1);
      n -= take;
    }
    return s;
  }

  static FixedBits from_hex(std::string_view hex) {
    const auto words = detail::hex_to_words(hex);
    FixedBits s;
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (w >= Words) {
        if (words[w] != 0) throw CapacityError("hex cluster pattern exceeds fixed capacity");
        continue;
      }
      s.words_[w] = words[w];
    }
    return s;
  }

  void insert(ElementId i) {
    check_index(i);
    words_[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  void erase(ElementId i) {
    check_index(i);
    words_[i / 64] &= ~(std::uint64_t{1} << (i % 64));
  }
  [[nodiscard]] bool contains(ElementId i) const {
    return i < kCapacity && ((words_[i / 64] >> (i % 64)) & 1U) != 0;
  }

  [[nodiscard]] std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  [[nodiscard]] bool empty() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }
  [[nodiscard]] bool is_singleton() const { return count() == 1; }

  /// Index of the smallest member; undefined on the empty set.
  [[nodiscard]] ElementId lowest() const {
    for (std::size_t w = 0; w < Words; ++w) {
      if (words_[w] != 0) return static_cast<ElementId>(64 * w + std::countr_zero(words_[w]));
    }
    return 0;
  }
  [[nodiscard]] ElementId highest() const {
    for (std::size_t w = Words; w-- > 0;) {
      if (words_[w] != 0) return static_cast<ElementId>(64 * w + 63 - std::countl_zero(words_[w]));
    }
    return 0;
  }

  template <class F>
  void for_each_member(F&& f) const {
    for (std::size_t w = 0; w < Words; ++w) {
      std::uint64_t bits = words_[w];
      while (bits != 0) {
        f(static_cast<ElementId>(64 * w + std::countr_zero(bits)));
        bits &= bits - 1;
      }
    }
  }

  [[nodiscard]] std::vector<ElementId> members() const {
    std::vector<ElementId> out;
    out.reserve(count());
    for_each_member([&](ElementId i) { out.push_back(i); });
    return out;
  }

  [[nodiscard]] bool intersects(const FixedBits& o) const {
    for (std::size_t w = 0; w < Words; ++w) {
      if ((words_[w] & o.words_[w]) != 0) return true;
    }
    return false;
  }
  [[nodiscard]] bool is_subset_of(const FixedBits& o) const {
    for (std::size_t w = 0; w < Words; ++w) {
      if ((words_[w] & ~o.words_[w]) != 0) return false;
    }
    return true;
  }

  friend FixedBits operator|(FixedBits a, const FixedBits& b) {
    for (std::size_t w = 0; w < Words; ++w) a.words_[w] |= b.words_[w];
    return a;
  }
  friend FixedBits operator&(FixedBits a, const FixedBits& b) {
    for (std::size_t w = 0; w < Words; ++w) a.words_[w] &= b.words_[w];
    return a;
  }
  /// Set difference.
  friend FixedBits operator-(FixedBits a, const FixedBits& b) {
    for (std::size_t w = 0; w < Words; ++w) a.words_[w] &= ~b.words_[w];
    return a;
  }

  friend bool operator==(const FixedBits&, const FixedBits&) = default;
  friend std::strong_ordering operator<=>(const FixedBits& a, const FixedBits& b) {
    for (std::size_t w = Words; w-- > 0;) {
      if (a.words_[w] != b.words_[w]) return a.words_[w] <=> b.words_[w];
    }
    return std::strong_ordering::equal;
  }

  [[nodiscard]] std::size_t hash() const {
    std::uint64_t h = 0;
    for (auto w : words_) h = detail::mix64(h ^ w);
    return static_cast<std::size_t>(h);
  }

  [[nodiscard]] std::string to_hex() const { return detail::words_to_hex(words_.data(), Words); }

 private:
  static void check_index(ElementId i) {
    if (i >= kCapacity) {
      throw CapacityError("element index " + std::to_string(i) + " exceeds fixed bit-set capacity " +
                          std::to_string(kCapacity));
    }
  }

  std::array<std::uint64_t, Words> words_{};
};

/// Growable bit set. Trailing zero words are always trimmed so equality,
/// hashing and ordering depend only on the bit pattern.
class DynamicBits {
 public:
  static constexpr std::size_t kCapacity = static_cast<std::size_t>(-1);

  DynamicBits() = default;

  static DynamicBits singleton(ElementId i) {
    DynamicBits s;
    s.insert(i);
    return s;
  }

  static DynamicBits full(std::size_t n) {
    DynamicBits s;
    s.words_.assign((n + 63) / 64, ~std::uint64_t{0});
    if (n % 64 != 0) s.words_.back() = (std::uint64_t{1} << (n % 64)) - 1;
    return s;
  }

  static DynamicBits from_hex(std::string_view hex) {
    DynamicBits s;
    s.words_ = detail::hex_to_words(hex);
    s.trim();
    return s;
  }

  void insert(ElementId i) {
    if (i / 64 >= words_.size()) words_.resize(i / 64 + 1, 0);
    words_[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  void erase(ElementId i) {
    if (i / 64 >= words_.size()) return;
    words_[i / 64] &= ~(std::uint64_t{1} << (i % 64));
    trim();
  }
  [[nodiscard]] bool contains(ElementId i) const {
    return i / 64 < words_.size() && ((words_[i / 64] >> (i % 64)) & 1U) != 0;
  }

  [[nodiscard]] std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  [[nodiscard]] bool empty() const { return words_.empty(); }
  [[nodiscard]] bool is_singleton() const { return count() == 1; }

  [[nodiscard]] ElementId lowest() const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      if (words_[w] != 0) return static_cast<ElementId>(64 * w + std::countr_zero(words_[w]));
    }
    return 0;
  }
  [[nodiscard]] ElementId highest() const {
    if (words_.empty()) return 0;
    const std::size_t w = words_.size() - 1;
    return static_cast<ElementId>(64 * w + 63 - std::countl_zero(words_[w]));
  }

  template <class F>
  void for_each_member(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits != 0) {
        f(static_cast<ElementId>(64 * w + std::countr_zero(bits)));
        bits &= bits - 1;
      }
    }
  }

  [[nodiscard]] std::vector<ElementId> members() const {
    std::vector<ElementId> out;
    out.reserve(count());
    for_each_member([&](ElementId i) { out.push_back(i); });
    return out;
  }

  [[nodiscard]] bool intersects(const DynamicBits& o) const {
    const std::size_t m = std::min(words_.size(), o.words_.size());
    for (std::size_t w = 0; w < m; ++w) {
      if ((words_[w] & o.words_[w]) != 0) return true;
    }
    return false;
  }
  [[nodiscard]] bool is_subset_of(const DynamicBits& o) const {
    if (words_.size() > o.words_.size()) return false;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      if ((words_[w] & ~o.words_[w]) != 0) return false;
    }
    return true;
  }

  friend DynamicBits operator|(DynamicBits a, const DynamicBits& b) {
    if (a.words_.size() < b.words_.size()) a.words_.resize(b.words_.size(), 0);
    for (std::size_t w = 0; w < b.words_.size(); ++w) a.words_[w] |= b.words_[w];
    return a;
  }
  friend DynamicBits operator&(DynamicBits a, const DynamicBits& b) {
    if (a.words_.size() > b.words_.size()) a.words_.resize(b.words_.size());
    for (std::size_t w = 0; w < a.words_.size(); ++w) a.words_[w] &= b.words_[w];
    a.trim();
    return a;
  }
  friend DynamicBits operator-(DynamicBits a, const DynamicBits& b) {
    const std::size_t m = std::min(a.words_.size(), b.words_.size());
    for (std::size_t w = 0; w < m; ++w) a.words_[w] &= ~b.words_[w];
    a.trim();
    return a;
  }

  friend bool operator==(const DynamicBits&, const DynamicBits&) = default;
  friend std::strong_ordering operator<=>(const DynamicBits& a, const DynamicBits& b) {
    if (a.words_.size() != b.words_.size()) return a.words_.size() <=> b.words_.size();
    for (std::size_t w = a.words_.size(); w-- > 0;) {
      if (a.words_[w] != b.words_[w]) return a.words_[w] <=> b.words_[w];
    }
    return std::strong_ordering::equal;
  }

  [[nodiscard]] std::size_t hash() const {
    std::uint64_t h = 0;
    for (auto w : words_) h = detail::mix64(h ^ w);
    return static_cast<std::size_t>(h);
  }

  [[nodiscard]] std::string to_hex() const { return detail::words_to_hex(words_.data(), words_.size()); }

 private:
  void trim() {
    while (!words_.empty() && words_.back() == 0) words_.pop_back();
  }

  std::vector<std::uint64_t> words_;
};

/// Requirements on a cluster bit-set type.
template <class S>
concept ElementSet = std::regular<S> && std::totally_ordered<S> && requires(S s, const S& c, ElementId i) {
  { S::singleton(i) } -> std::same_as<S>;
  { S::full(std::size_t{}) } -> std::same_as<S>;
  { S::from_hex(std::string_view{}) } -> std::same_as<S>;
  { S::kCapacity } -> std::convertible_to<std::size_t>;
  s.insert(i);
  { c.contains(i) } -> std::same_as<bool>;
  { c.count() } -> std::same_as<std::size_t>;
  { c.empty() } -> std::same_as<bool>;
  { c.lowest() } -> std::same_as<ElementId>;
  { c.highest() } -> std::same_as<ElementId>;
  { c.members() } -> std::same_as<std::vector<ElementId>>;
  { c | c } -> std::same_as<S>;
  { c & c } -> std::same_as<S>;
  { c - c } -> std::same_as<S>;
  { c.intersects(c) } -> std::same_as<bool>;
  { c.is_subset_of(c) } -> std::same_as<bool>;
  { c.hash() } -> std::same_as<std::size_t>;
  { c.to_hex() } -> std::same_as<std::string>;
};

/// Exact-mode cluster: up to 128 elements in two machine words.
using SmallCluster = FixedBits<2>;
/// Approximate-mode cluster with no element cap.
using LargeCluster = DynamicBits;

static_assert(ElementSet<SmallCluster>);
static_assert(ElementSet<LargeCluster>);

struct ClusterHash {
  template <ElementSet S>
  std::size_t operator()(const S& s) const {
    return s.hash();
  }
};

/// Number of canonical two-partitions of a cluster with `size` members,
/// 2^(size-1) - 1. Saturates at the maximum uint64 value.
inline std::uint64_t split_count(std::size_t size) {
  if (size < 2) return 0;
  if (size - 1 >= 64) return ~std::uint64_t{0};
  return (std::uint64_t{1} << (size - 1)) - 1;
}

/// Visits every canonical two-partition (left, right) of `c`: left < right in
/// the cluster order, which places the highest member on the right.
template <ElementSet S, class F>
void for_each_split(const S& c, F&& f) {
  const auto members = c.members();
  const std::size_t k = members.size();
  if (k < 2) return;
  if (k - 1 >= 64) throw CapacityError("cluster too large to enumerate all splits");
  const std::uint64_t limit = std::uint64_t{1} << (k - 1);
  for (std::uint64_t mask = 1; mask < limit; ++mask) {
    S left;
    std::uint64_t bits = mask;
    while (bits != 0) {
      left.insert(members[static_cast<std::size_t>(std::countr_zero(bits))]);
      bits &= bits - 1;
    }
    f(left, c - left);
  }
}

}  // namespace trellis_astar

template <std::size_t W>
struct std::hash<trellis_astar::FixedBits<W>> {
  std::size_t operator()(const trellis_astar::FixedBits<W>& s) const { return s.hash(); }
};

template <>
struct std::hash<trellis_astar::DynamicBits> {
  std::size_t operator()(const trellis_astar::DynamicBits& s) const { return s.hash(); }
};
