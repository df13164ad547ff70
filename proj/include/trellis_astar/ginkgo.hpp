#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "trellis_astar/bits.hpp"
#include "trellis_astar/core.hpp"
#include "trellis_astar/errors.hpp"

namespace trellis_astar {

/// Energy-momentum vector (E, px, py, pz).
struct FourVector {
  double e = 0.0;
  double px = 0.0;
  double py = 0.0;
  double pz = 0.0;

  /// Squared invariant mass E^2 - |p|^2.
  [[nodiscard]] double t() const { return e * e - (px * px + py * py + pz * pz); }

  FourVector& operator+=(const FourVector& o) {
    e += o.e;
    px += o.px;
    py += o.py;
    pz += o.pz;
    return *this;
  }
  friend FourVector operator+(FourVector a, const FourVector& b) { return a += b; }
  friend FourVector operator-(FourVector a, const FourVector& b) {
    a.e -= b.e;
    a.px -= b.px;
    a.py -= b.py;
    a.pz -= b.pz;
    return a;
  }
  friend bool operator==(const FourVector&, const FourVector&) = default;
};

/// One jet: observed leaf four-vectors plus the shower parameters. An
/// optional generator truth tree is carried along for evaluation.
struct JetEvent {
  std::vector<FourVector> leaves;
  double lambda = 1.0;
  double t_cut = 1.0;
  std::optional<Hierarchy<LargeCluster>> truth;

  [[nodiscard]] std::size_t size() const { return leaves.size(); }

  template <ElementSet S>
  [[nodiscard]] FourVector momentum(const S& c) const {
    FourVector sum;
    c.for_each_member([&](ElementId i) { sum += leaves[i]; });
    return sum;
  }

  void validate() const {
    if (leaves.empty()) throw DomainError("jet has no leaves");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
    if (!(t_cut > 0.0) || !std::isfinite(t_cut)) throw DomainError("t_cut must be positive");
    for (const auto& v : leaves) {
      if (!std::isfinite(v.e) || !std::isfinite(v.px) || !std::isfinite(v.py) || !std::isfinite(v.pz)) {
        throw DomainError("leaf four-vector has a non-finite component");
      }
    }
  }
};

namespace ginkgo_detail {

inline constexpr double kExponentFloor = -745.0;

/// log(1 - exp(-a)) for a > 0.
inline double log1m_exp_neg(double a) {
  const double x = std::max(-a, kExponentFloor);
  return std::log(-std::expm1(x));
}

/// -log of the truncated-exponential density of t under a parent of squared mass tp.
inline double internal_nll(double t, double tp, double lambda) {
  return log1m_exp_neg(lambda) - std::log(lambda) + std::log(tp) + lambda * t / tp;
}

/// -log of the density integrated from 0 to t_cut, the leaf factor. A parent
/// squared mass of 0 saturates the factor at 1 / (1 - e^-lambda).
inline double leaf_nll(double tp, double t_cut, double lambda) {
  if (tp <= 0.0) return log1m_exp_neg(lambda);
  return log1m_exp_neg(lambda) - log1m_exp_neg(lambda * t_cut / tp);
}

}  // namespace ginkgo_detail

/// Negative log-likelihood of one split. Singleton children take the leaf
/// factor under the parent's squared mass; other children the density at
/// their own squared mass. Kinematically impossible splits cost +inf.
inline double split_nll(const FourVector& left, bool left_leaf, const FourVector& right, bool right_leaf,
                        double lambda, double t_cut) {
  const double tp = (left + right).t();
  // A parent at or below the cutoff never splits.
  if (!(tp > 0.0) || tp <= t_cut) return kInfiniteCost;
  double total = 0.0;
  for (const auto& [x, leaf] : {std::pair{left, left_leaf}, std::pair{right, right_leaf}}) {
    if (leaf) {
      total += ginkgo_detail::leaf_nll(tp, t_cut, lambda);
      continue;
    }
    const double tc = x.t();
    if (!(tc > 0.0) || tc >= tp) return kInfiniteCost;
    total += ginkgo_detail::internal_nll(tc, tp, lambda);
  }
  return total;
}

template <ElementSet S>
double split_nll(const S& left, const S& right, const JetEvent& e) {
  return split_nll(e.momentum(left), left.count() == 1, e.momentum(right), right.count() == 1, e.lambda, e.t_cut);
}

/// Level-by-level lower bound on the internal-node squared masses of any
/// binary tree over n elements. Returns n - 2 values.
inline std::vector<double> lower_bound_t(std::span<const double> t_min_sorted, double t_p0, double t_tilde,
                                         std::size_t n) {
  if (n < 2) throw DomainError("lower_bound_t needs at least two elements");
  if (t_min_sorted.size() < n / 2) throw DomainError("t_min list shorter than n / 2");
  std::vector<double> bound(t_min_sorted.begin(), t_min_sorted.begin() + static_cast<std::ptrdiff_t>(n / 2));
  std::size_t i = 3;
  std::size_t j = n % 2 + n / 2;
  // Each level adds j // 2 nodes; the total over all levels is n - 1, so the
  // loop always reaches n - 2 before j settles at 1.
  while (bound.size() < n - 2 && j > 1) {
    const double value = t_tilde * static_cast<double>(i % 2) + t_p0 * static_cast<double>(i / 2);
    bound.insert(bound.end(), j / 2, value);
    j = j % 2 + j / 2;
    ++i;
  }
  bound.resize(n - 2);
  return bound;
}

/// Per-cluster inputs of the Ginkgo heuristics.
struct GinkgoHeuristicTables {
  double t_root = 0.0;
  std::vector<double> t_min;  // ascending
  double t_p0 = 0.0;
  double t_tilde = 0.0;
  double t_max = 0.0;
  std::vector<double> t_leaf;  // member squared masses, in member order
  std::vector<double> t_bound;
};

template <ElementSet S>
GinkgoHeuristicTables heuristic_tables(const S& c, const JetEvent& e) {
  GinkgoHeuristicTables tab;
  const auto m = c.members();
  const std::size_t n = m.size();
  tab.t_root = e.momentum(c).t();
  tab.t_leaf.reserve(n);
  for (ElementId i : m) tab.t_leaf.push_back(e.leaves[i].t());
  tab.t_tilde = *std::min_element(tab.t_leaf.begin(), tab.t_leaf.end());
  tab.t_max = *std::max_element(tab.t_leaf.begin(), tab.t_leaf.end());
  if (n < 2) return tab;
  tab.t_min.reserve(n);
  // Any parent of element a holds a and one more element and exceeds t_cut.
  for (std::size_t a = 0; a < n; ++a) {
    double best = kInfiniteCost;
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b) best = std::min(best, (e.leaves[m[a]] + e.leaves[m[b]]).t());
    }
    tab.t_min.push_back(std::max(best, e.t_cut));
  }
  std::sort(tab.t_min.begin(), tab.t_min.end());
  tab.t_p0 = tab.t_min.front();
  tab.t_bound = lower_bound_t(tab.t_min, tab.t_p0, tab.t_tilde, n);
  return tab;
}

enum class GinkgoHeuristic { kZero, kH0, kH1 };

/// Lower bound on the NLL of any hierarchy over the cluster described by
/// `tab`: internal nodes take the bounded density, leaves the bounded leaf
/// factor. kH0 is admissible; kH1 uses a larger parent-mass bound.
inline double ginkgo_heuristic(const GinkgoHeuristicTables& tab, double lambda, double t_cut, GinkgoHeuristic kind) {
  const std::size_t n = tab.t_leaf.size();
  if (kind == GinkgoHeuristic::kZero || n < 2) return 0.0;
  if (!(tab.t_root > 0.0)) return 0.0;
  double internal = 0.0;
  for (double tb : tab.t_bound) {
    double tp;
    if (kind == GinkgoHeuristic::kH0) tp = tb < tab.t_max ? tb : tb + tab.t_tilde;
    else tp = tb + 2.0 * tab.t_p0;
    // Denominator bounded by tp, exponent by the cluster's own squared mass.
    internal += ginkgo_detail::log1m_exp_neg(lambda) - std::log(lambda) + std::log(tp) + lambda * tb / tab.t_root;
  }
  // The largest-mass element keeps t_p0 as its parent bound.
  const std::size_t heaviest = static_cast<std::size_t>(
      std::distance(tab.t_leaf.begin(), std::max_element(tab.t_leaf.begin(), tab.t_leaf.end())));
  double leaves = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double tp = tab.t_p0;
    if (i != heaviest) {
      const double d = std::sqrt(tab.t_p0) - std::sqrt(std::max(tab.t_leaf[i], 0.0));
      tp = d * d;
    }
    leaves += ginkgo_detail::leaf_nll(tp, t_cut, lambda);
  }
  return internal + leaves;
}

template <ElementSet S>
double ginkgo_h0(const S& c, const JetEvent& e) {
  if (c.count() < 2) return 0.0;
  return ginkgo_heuristic(heuristic_tables(c, e), e.lambda, e.t_cut, GinkgoHeuristic::kH0);
}

template <ElementSet S>
double ginkgo_h1(const S& c, const JetEvent& e) {
  if (c.count() < 2) return 0.0;
  return ginkgo_heuristic(heuristic_tables(c, e), e.lambda, e.t_cut, GinkgoHeuristic::kH1);
}

/// Ginkgo negative log-likelihood as a sibling-decomposable cost.
template <ElementSet S>
class GinkgoModel {
 public:
  using Cluster = S;
  static constexpr std::size_t kCacheLimit = std::size_t{1} << 21;

  explicit GinkgoModel(const JetEvent& e, GinkgoHeuristic h = GinkgoHeuristic::kH0) : e_(&e), heuristic_(h) {
    e.validate();
  }

  double psi(const S& left, const S& right) {
    return split_nll(momentum(left), left.count() == 1, momentum(right), right.count() == 1, e_->lambda, e_->t_cut);
  }

  double heuristic(const S& c) {
    if (heuristic_ == GinkgoHeuristic::kZero || c.count() < 2) return 0.0;
    auto it = h_memo_.find(c);
    if (it != h_memo_.end()) return it->second;
    if (h_memo_.size() >= kCacheLimit) h_memo_.clear();
    const double h = ginkgo_heuristic(heuristic_tables(c, *e_), e_->lambda, e_->t_cut, heuristic_);
    h_memo_.emplace(c, h);
    return h;
  }

  [[nodiscard]] std::size_t element_count() const { return e_->size(); }
  [[nodiscard]] const JetEvent& event() const { return *e_; }
  [[nodiscard]] GinkgoHeuristic heuristic_kind() const { return heuristic_; }

  FourVector momentum(const S& c) {
    if (c.count() == 1) return e_->leaves[c.lowest()];
    auto it = p_memo_.find(c);
    if (it != p_memo_.end()) return it->second;
    if (p_memo_.size() >= kCacheLimit) p_memo_.clear();
    const auto p = e_->momentum(c);
    p_memo_.emplace(c, p);
    return p;
  }

 private:
  const JetEvent* e_;
  GinkgoHeuristic heuristic_;
  std::unordered_map<S, FourVector, ClusterHash> p_memo_;
  std::unordered_map<S, double, ClusterHash> h_memo_;
};

struct JetGeneratorParams {
  double lambda = 1.5;
  double t_root = 100.0;
  double t_cut = 1.0;
  std::size_t max_leaves = 16;
  std::size_t min_leaves = 1;
  std::uint64_t seed = 0;
  /// Root three-momentum along z; zero puts the root at rest.
  double root_pz = 0.0;
  std::size_t max_attempts = 200000;
};

namespace ginkgo_detail {

/// Samples t in (0, tp) with density proportional to exp(-lambda t / tp).
inline double sample_truncated_exponential(std::mt19937_64& rng, double tp, double lambda) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  return -(tp / lambda) * std::log1p(u * std::expm1(-lambda));
}

/// Boosts a rest-frame four-vector into the frame where the parent has momentum p.
inline FourVector boost(const FourVector& rest, const FourVector& parent) {
  const double m = std::sqrt(std::max(parent.t(), 0.0));
  const double bx = parent.px / parent.e;
  const double by = parent.py / parent.e;
  const double bz = parent.pz / parent.e;
  const double b2 = bx * bx + by * by + bz * bz;
  if (b2 == 0.0) return rest;
  const double gamma = parent.e / m;
  const double bp = bx * rest.px + by * rest.py + bz * rest.pz;
  const double k = (gamma - 1.0) * bp / b2 + gamma * rest.e;
  return {gamma * (rest.e + bp), rest.px + k * bx, rest.py + k * by, rest.pz + k * bz};
}

}  // namespace ginkgo_detail

/// Toy shower generator: each parent draws both child squared masses from the
/// truncated exponential (redrawing until the two-body decay is possible),
/// children below t_cut become leaves, and the decay direction is isotropic
/// in the parent rest frame. Leaves are shuffled so their order carries no
/// information about the tree.
inline JetEvent generate_jet(const JetGeneratorParams& p) {
  if (!(p.lambda > 0.0)) throw DomainError("lambda must be positive");
  if (!(p.t_cut > 0.0) || !(p.t_cut < p.t_root)) throw DomainError("need 0 < t_cut < t_root");
  if (p.max_leaves < 1 || p.min_leaves > p.max_leaves) throw DomainError("bad leaf-count bounds");
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const FourVector root{std::sqrt(p.t_root + p.root_pz * p.root_pz), 0.0, 0.0, p.root_pz};

  struct Node {
    FourVector x;
    int left = -1;
    int right = -1;
  };

  for (std::size_t attempt = 0; attempt < p.max_attempts; ++attempt) {
    std::vector<Node> nodes{{root}};
    std::vector<std::size_t> pending{0};
    std::size_t leaf_count = 1;
    bool too_many = false;
    while (!pending.empty() && !too_many) {
      const std::size_t idx = pending.back();
      pending.pop_back();
      const FourVector parent = nodes[idx].x;
      const double tp = parent.t();
      double tl = 0.0;
      double tr = 0.0;
      do {
        tl = ginkgo_detail::sample_truncated_exponential(rng, tp, p.lambda);
        tr = ginkgo_detail::sample_truncated_exponential(rng, tp, p.lambda);
      } while (std::sqrt(tl) + std::sqrt(tr) >= std::sqrt(tp));
      const double m = std::sqrt(tp);
      const double kallen = (tp - tl - tr) * (tp - tl - tr) - 4.0 * tl * tr;
      const double pstar = std::sqrt(std::max(kallen, 0.0)) / (2.0 * m);
      const double cos_theta = 2.0 * unit(rng) - 1.0;
      const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
      const double phi = 2.0 * std::numbers::pi * unit(rng);
      const FourVector rest_left{std::sqrt(tl + pstar * pstar), pstar * sin_theta * std::cos(phi),
                                 pstar * sin_theta * std::sin(phi), pstar * cos_theta};
      const FourVector left = ginkgo_detail::boost(rest_left, parent);
      const FourVector right = parent - left;
      const int li = static_cast<int>(nodes.size());
      nodes.push_back({left});
      nodes.push_back({right});
      nodes[idx].left = li;
      nodes[idx].right = li + 1;
      ++leaf_count;  // one leaf replaced by two
      for (int c : {li, li + 1}) {
        if (nodes[static_cast<std::size_t>(c)].x.t() >= p.t_cut) pending.push_back(static_cast<std::size_t>(c));
      }
      too_many = leaf_count > p.max_leaves;
    }
    if (too_many || leaf_count < p.min_leaves) continue;

    // Assign shuffled element ids to leaves.
    std::vector<std::size_t> leaf_nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].left < 0) leaf_nodes.push_back(i);
    }
    std::vector<ElementId> ids(leaf_nodes.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<ElementId>(i);
    for (std::size_t i = ids.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(ids[i - 1], ids[pick(rng)]);
    }
    JetEvent ev;
    ev.lambda = p.lambda;
    ev.t_cut = p.t_cut;
    ev.leaves.resize(leaf_nodes.size());
    std::vector<LargeCluster> cluster_of(nodes.size());
    for (std::size_t k = 0; k < leaf_nodes.size(); ++k) {
      ev.leaves[ids[k]] = nodes[leaf_nodes[k]].x;
      cluster_of[leaf_nodes[k]] = LargeCluster::singleton(ids[k]);
    }
    // Children always have larger indices than their parent.
    std::map<LargeCluster, std::pair<LargeCluster, LargeCluster>> splits;
    for (std::size_t i = nodes.size(); i-- > 0;) {
      if (nodes[i].left < 0) continue;
      const auto& l = cluster_of[static_cast<std::size_t>(nodes[i].left)];
      const auto& r = cluster_of[static_cast<std::size_t>(nodes[i].right)];
      cluster_of[i] = l | r;
      splits.emplace(cluster_of[i], std::make_pair(l, r));
    }
    ev.truth = Hierarchy<LargeCluster>::from_splits(cluster_of[0], splits);
    return ev;
  }
  throw DomainError("could not generate a jet within the leaf-count bounds after " + std::to_string(p.max_attempts) +
                    " attempts");
}

}  // namespace trellis_astar
