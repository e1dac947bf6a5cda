#pragma once

// Random chain models on arcs joined through an interconnection matrix:
// the independent-length arc model and the cycle-with-removed-edges model,
// their condensed representation, and the expansion to a sparse matrix.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cyclegap/error.hpp"
#include "cyclegap/interconnect.hpp"
#include "cyclegap/rng.hpp"

namespace cyclegap {

/// Node counts L_1..L_k of the arcs; every entry is >= 1.
class ArcLengths {
 public:
  explicit ArcLengths(std::vector<std::int64_t> lengths) : lengths_(std::move(lengths)) {
    if (lengths_.empty()) throw Error(Errc::InvalidDimension, "need at least one arc");
    for (auto len : lengths_) {
      if (len < 1) throw Error(Errc::InvalidParameter, "arc lengths must be >= 1");
    }
  }
  ArcLengths(std::initializer_list<std::int64_t> lengths)
      : ArcLengths(std::vector<std::int64_t>(lengths)) {}

  int k() const noexcept { return static_cast<int>(lengths_.size()); }
  std::int64_t operator[](int i) const { return lengths_[static_cast<std::size_t>(i)]; }
  std::span<const std::int64_t> values() const noexcept { return lengths_; }
  std::int64_t total() const { return std::accumulate(lengths_.begin(), lengths_.end(), std::int64_t{0}); }
  std::int64_t longest() const { return *std::max_element(lengths_.begin(), lengths_.end()); }

  friend bool operator==(const ArcLengths&, const ArcLengths&) = default;

 private:
  std::vector<std::int64_t> lengths_;
};

struct ArcmodOrigin {
  double L = 1.0;
  friend bool operator==(const ArcmodOrigin&, const ArcmodOrigin&) = default;
};

/// n is the cycle size, j the first node of arc 1 (1..n).
struct CyclemodOrigin {
  std::int64_t n = 1;
  std::int64_t j = 1;
  friend bool operator==(const CyclemodOrigin&, const CyclemodOrigin&) = default;
};

using Provenance = std::variant<ArcmodOrigin, CyclemodOrigin>;

class CondensedChain {
 public:
  CondensedChain(InterconnectMatrix a, ArcLengths lengths, Provenance provenance)
      : a_(std::move(a)), lengths_(std::move(lengths)), provenance_(provenance) {
    if (lengths_.k() != a_.k()) {
      throw Error(Errc::DimensionMismatch, "arc count " + std::to_string(lengths_.k()) +
                                               " does not match interconnect k " +
                                               std::to_string(a_.k()));
    }
    if (const auto* cyc = std::get_if<CyclemodOrigin>(&provenance_)) {
      if (lengths_.total() != cyc->n) {
        throw Error(Errc::InvariantViolation, "cyclemod lengths must sum to n");
      }
      if (cyc->j < 1 || cyc->j > cyc->n) {
        throw Error(Errc::InvariantViolation, "cyclemod rotation j must lie in 1..n");
      }
    }
  }

  /// Chain with explicit lengths, recorded as a cycle of size sum(L) rotated to j = 1.
  static CondensedChain from_lengths(InterconnectMatrix a, ArcLengths lengths) {
    const auto n = lengths.total();
    return CondensedChain(std::move(a), std::move(lengths), CyclemodOrigin{n, 1});
  }

  int k() const noexcept { return a_.k(); }
  const InterconnectMatrix& interconnect() const noexcept { return a_; }
  const ArcLengths& lengths() const noexcept { return lengths_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  std::int64_t size() const { return lengths_.total(); }

 private:
  InterconnectMatrix a_;
  ArcLengths lengths_;
  Provenance provenance_;
};

/// Sparse N x N doubly stochastic matrix; entry (row, col) is the weight of
/// the transition col -> row (destination, source).
class StochasticMatrix {
 public:
  struct Entry {
    std::int64_t row;
    std::int64_t col;
    double value;
  };

  /// Duplicate (row, col) entries are summed. Throws InvariantViolation when
  /// a weight leaves (0,1] or a row/column sum misses 1 by more than 1e-12.
  /// `arc_offsets` (k+1 ascending values ending at N) names the arc layout,
  /// or is empty for matrices without one.
  StochasticMatrix(std::int64_t n, std::vector<Entry> entries,
                   std::vector<std::int64_t> arc_offsets = {})
      : n_(n), arc_offsets_(std::move(arc_offsets)) {
    if (n < 1) throw Error(Errc::InvalidDimension, "matrix size must be >= 1");
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    for (const auto& e : entries) {
      if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n) {
        throw Error(Errc::InvariantViolation, "entry index out of range");
      }
      if (!entries_.empty() && entries_.back().row == e.row && entries_.back().col == e.col) {
        entries_.back().value += e.value;
      } else {
        entries_.push_back(e);
      }
    }
    for (const auto& e : entries_) {
      if (!(e.value > 0.0 && e.value <= 1.0 + kStochasticTol)) {
        throw Error(Errc::InvariantViolation, "weights must lie in (0,1]");
      }
    }
    if (max_stochastic_deviation() > kStochasticTol) {
      throw Error(Errc::InvariantViolation, "matrix is not doubly stochastic within 1e-12");
    }
    if (!arc_offsets_.empty() && (arc_offsets_.front() != 0 || arc_offsets_.back() != n_)) {
      throw Error(Errc::InvariantViolation, "arc offsets must span 0..N");
    }
  }

  std::int64_t size() const noexcept { return n_; }
  std::span<const Entry> entries() const noexcept { return entries_; }
  std::size_t nonzeros() const noexcept { return entries_.size(); }

  int arcs() const noexcept {
    return arc_offsets_.empty() ? 0 : static_cast<int>(arc_offsets_.size()) - 1;
  }
  std::span<const std::int64_t> arc_offsets() const noexcept { return arc_offsets_; }

  /// Flat index of node (arc, position), arc 0-based, position in 1..L_arc.
  std::int64_t flat_index(int arc, std::int64_t position) const {
    return arc_offsets_.at(static_cast<std::size_t>(arc)) + position - 1;
  }

  /// Inverse of flat_index.
  std::pair<int, std::int64_t> node_of(std::int64_t flat) const {
    const auto it = std::upper_bound(arc_offsets_.begin(), arc_offsets_.end(), flat);
    const auto arc = static_cast<int>(it - arc_offsets_.begin()) - 1;
    return {arc, flat - arc_offsets_[static_cast<std::size_t>(arc)] + 1};
  }

  std::vector<double> row_sums() const {
    std::vector<double> sums(static_cast<std::size_t>(n_), 0.0);
    for (const auto& e : entries_) sums[static_cast<std::size_t>(e.row)] += e.value;
    return sums;
  }

  std::vector<double> col_sums() const {
    std::vector<double> sums(static_cast<std::size_t>(n_), 0.0);
    for (const auto& e : entries_) sums[static_cast<std::size_t>(e.col)] += e.value;
    return sums;
  }

  double max_stochastic_deviation() const {
    double worst = 0.0;
    for (double s : row_sums()) worst = std::max(worst, std::abs(s - 1.0));
    for (double s : col_sums()) worst = std::max(worst, std::abs(s - 1.0));
    return worst;
  }

  double at(std::int64_t row, std::int64_t col) const {
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{row, col},
                                     [](const Entry& e, const std::pair<std::int64_t, std::int64_t>& key) {
                                       return std::tie(e.row, e.col) < std::tie(key.first, key.second);
                                     });
    return (it != entries_.end() && it->row == row && it->col == col) ? it->value : 0.0;
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
    for (const auto& e : entries_) m(e.row, e.col) = e.value;
    return m;
  }

  StochasticMatrix transpose() const {
    std::vector<Entry> flipped;
    flipped.reserve(entries_.size());
    for (const auto& e : entries_) flipped.push_back({e.col, e.row, e.value});
    return StochasticMatrix(n_, std::move(flipped), arc_offsets_);
  }

  bool is_symmetric(double tol = 0.0) const {
    for (const auto& e : entries_) {
      if (std::abs(at(e.col, e.row) - e.value) > tol) return false;
    }
    return true;
  }

  /// y = M x for complex x.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n_);
    for (const auto& e : entries_) y(e.row) += e.value * x(e.col);
    return y;
  }

 private:
  std::int64_t n_;
  std::vector<Entry> entries_;
  std::vector<std::int64_t> arc_offsets_;
};

/// Draw from Geo(1/L) on {1, 2, ...}: P(l) = (1/L)(1 - 1/L)^(l-1).
inline std::int64_t sample_geometric(double L, Rng& rng) {
  if (!(L >= 1.0) || !std::isfinite(L)) throw Error(Errc::InvalidParameter, "geometric mean L must be >= 1");
  if (L == 1.0) return 1;
  const double u = rng.uniform_open01();
  return 1 + static_cast<std::int64_t>(std::floor(std::log(u) / std::log1p(-1.0 / L)));
}

inline CondensedChain sample_arcmod(double L, int k, const InterconnectMatrix& a, Rng& rng) {
  if (a.k() != k) throw Error(Errc::DimensionMismatch, "interconnect dimension differs from k");
  if (!(L >= 1.0)) throw Error(Errc::InvalidParameter, "arcmod L must be >= 1");
  std::vector<std::int64_t> lengths(static_cast<std::size_t>(k));
  for (auto& len : lengths) len = sample_geometric(L, rng);
  return CondensedChain(a, ArcLengths(std::move(lengths)), ArcmodOrigin{L});
}

/// Removed cycle edge (tail, head) with head = tail mod n + 1; nodes 1..n.
struct RemovedEdge {
  std::int64_t tail;
  std::int64_t head;
  friend bool operator==(const RemovedEdge&, const RemovedEdge&) = default;
};

/// Labeled arcs (lengths, j) -> removed edges (e_i, b_{i+1}), i = 1..k.
/// Arc i occupies [b_i, e_i], with b_1 = j and b_i = e_{i-1} + 1 (mod n).
inline std::vector<RemovedEdge> bijection_T(const ArcLengths& lengths, std::int64_t j, std::int64_t n) {
  if (lengths.total() != n) throw Error(Errc::InvalidParameter, "arc lengths must sum to n");
  if (j < 1 || j > n) throw Error(Errc::InvalidParameter, "rotation j must lie in 1..n");
  std::vector<RemovedEdge> removed;
  removed.reserve(static_cast<std::size_t>(lengths.k()));
  std::int64_t end = j - 1;  // 0-based position before arc 1
  for (int i = 0; i < lengths.k(); ++i) {
    end = (end + lengths[i]) % n;
    const std::int64_t tail = end == 0 ? n : end;
    removed.push_back({tail, tail % n + 1});
  }
  return removed;
}

/// Inverse of bijection_T: removed-edge tails (any order) plus the tail
/// labeled e_1 give back (lengths, j).
inline std::pair<ArcLengths, std::int64_t> inverse_bijection_T(std::vector<std::int64_t> tails,
                                                              std::int64_t first_tail, std::int64_t n) {
  std::sort(tails.begin(), tails.end());
  if (tails.empty() || std::adjacent_find(tails.begin(), tails.end()) != tails.end() ||
      tails.front() < 1 || tails.back() > n) {
    throw Error(Errc::InvalidParameter, "removed edges must be distinct positions in 1..n");
  }
  const auto it = std::lower_bound(tails.begin(), tails.end(), first_tail);
  if (it == tails.end() || *it != first_tail) {
    throw Error(Errc::InvalidParameter, "labeled edge is not among the removed edges");
  }
  const std::size_t k = tails.size();
  const std::size_t c = static_cast<std::size_t>(it - tails.begin());
  std::vector<std::int64_t> lengths(k);
  for (std::size_t t = 0; t < k; ++t) {
    const std::int64_t cur = tails[(c + t) % k];
    const std::int64_t prev = tails[(c + t + k - 1) % k];
    const std::int64_t d = ((cur - prev) % n + n) % n;
    lengths[t] = d == 0 ? n : d;
  }
  const std::int64_t prev_of_first = tails[(c + k - 1) % k];
  return {ArcLengths(std::move(lengths)), prev_of_first % n + 1};
}

/// Uniform k-subset of the n cycle edges and a uniform label for e_1,
/// mapped to condensed coordinates through the inverse of bijection_T.
inline CondensedChain sample_cyclemod(std::int64_t n, int k, const InterconnectMatrix& a, Rng& rng) {
  if (k < 1 || n < 1) throw Error(Errc::InvalidDimension, "cyclemod needs n, k >= 1");
  if (k > n) throw Error(Errc::InvalidParameter, "cyclemod needs k <= n");
  if (a.k() != k) throw Error(Errc::DimensionMismatch, "interconnect dimension differs from k");

  // Sparse partial Fisher-Yates over positions 1..n.
  std::unordered_map<std::int64_t, std::int64_t> swapped;
  auto value_at = [&](std::int64_t idx) {
    const auto f = swapped.find(idx);
    return f == swapped.end() ? idx + 1 : f->second;
  };
  std::vector<std::int64_t> tails(static_cast<std::size_t>(k));
  for (int t = 0; t < k; ++t) {
    const auto pick = t + static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(n - t)));
    const auto chosen = value_at(pick);
    swapped[pick] = value_at(t);
    tails[static_cast<std::size_t>(t)] = chosen;
  }
  const auto label = tails[rng.uniform_index(static_cast<std::uint64_t>(k))];
  auto [lengths, j] = inverse_bijection_T(std::move(tails), label, n);
  return CondensedChain(a, std::move(lengths), CyclemodOrigin{n, j});
}

/// Full transition matrix: (i,l-1) -> (i,l) with weight 1 inside each arc and
/// (j,L_j) -> (i+1,1) with weight A_ij across arcs. Nodes are flattened arc by
/// arc, positions ascending.
inline StochasticMatrix expand(const CondensedChain& chain) {
  const int k = chain.k();
  const auto& lengths = chain.lengths();
  const auto& a = chain.interconnect();
  std::vector<std::int64_t> offsets(static_cast<std::size_t>(k) + 1, 0);
  for (int i = 0; i < k; ++i) offsets[i + 1] = offsets[i] + lengths[i];

  std::vector<StochasticMatrix::Entry> entries;
  entries.reserve(static_cast<std::size_t>(offsets[k]) + static_cast<std::size_t>(k) * k);
  for (int i = 0; i < k; ++i) {
    for (std::int64_t pos = 1; pos < lengths[i]; ++pos) {
      entries.push_back({offsets[i] + pos, offsets[i] + pos - 1, 1.0});
    }
  }
  for (int i = 0; i < k; ++i) {
    const std::int64_t start_next = offsets[(i + 1) % k];
    for (int j = 0; j < k; ++j) {
      if (a(i, j) != 0.0) entries.push_back({start_next, offsets[j + 1] - 1, a(i, j)});
    }
  }
  const std::int64_t n = offsets[k];
  return StochasticMatrix(n, std::move(entries), std::move(offsets));
}

/// (M + M^T) / 2, the reversible comparison chain.
inline StochasticMatrix symmetrize(const StochasticMatrix& m) {
  std::vector<StochasticMatrix::Entry> entries;
  entries.reserve(2 * m.nonzeros());
  for (const auto& e : m.entries()) {
    entries.push_back({e.row, e.col, 0.5 * e.value});
    entries.push_back({e.col, e.row, 0.5 * e.value});
  }
  const auto offsets = m.arc_offsets();
  return StochasticMatrix(m.size(), std::move(entries),
                          std::vector<std::int64_t>(offsets.begin(), offsets.end()));
}

}  // namespace cyclegap
