#pragma once

// Interconnection matrices: symmetric doubly stochastic k x k weights that
// join arc ends to arc starts, plus their (symmetric) spectral gaps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cyclegap/error.hpp"
#include "cyclegap/rng.hpp"

namespace cyclegap {

inline constexpr double kStochasticTol = 1e-12;
inline constexpr int kSamplerRetryBudget = 10'000;

struct InterconnectKind {
  enum class Tag { Complete, RandomRegular, BollobasChung, Custom };

  Tag tag = Tag::Custom;
  int degree = 0;  // only meaningful for RandomRegular

  static InterconnectKind complete() { return {Tag::Complete, 0}; }
  static InterconnectKind regular(int d) { return {Tag::RandomRegular, d}; }
  static InterconnectKind bollobas_chung() { return {Tag::BollobasChung, 3}; }
  static InterconnectKind custom() { return {Tag::Custom, 0}; }

  friend bool operator==(const InterconnectKind&, const InterconnectKind&) = default;
};

inline std::string to_string(const InterconnectKind& kind) {
  switch (kind.tag) {
    case InterconnectKind::Tag::Complete: return "complete";
    case InterconnectKind::Tag::RandomRegular: return "regular:" + std::to_string(kind.degree);
    case InterconnectKind::Tag::BollobasChung: return "bollobas-chung";
    case InterconnectKind::Tag::Custom: return "custom";
  }
  return "custom";
}

/// Accepts "complete", "regular:<d>", "bc" / "bollobas-chung", "custom".
inline InterconnectKind parse_interconnect_kind(const std::string& text) {
  if (text == "complete") return InterconnectKind::complete();
  if (text == "bc" || text == "bollobas-chung") return InterconnectKind::bollobas_chung();
  if (text == "custom") return InterconnectKind::custom();
  if (text.rfind("regular:", 0) == 0) {
    const std::string tail = text.substr(8);
    std::size_t used = 0;
    int d = 0;
    try {
      d = std::stoi(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tail.size()) {
      throw Error(Errc::Parse, "bad regular degree in '" + text + "'");
    }
    return InterconnectKind::regular(d);
  }
  throw Error(Errc::Parse, "unknown interconnect kind '" + text + "'");
}

/// Dense symmetric doubly stochastic matrix A. Validated on construction and
/// immutable afterwards.
class InterconnectMatrix {
 public:
  /// Throws InvariantViolation unless `entries` is square, exactly symmetric,
  /// entrywise in [0,1], with row and column sums within 1e-12 of one.
  InterconnectMatrix(Eigen::MatrixXd entries, InterconnectKind kind)
      : entries_(std::move(entries)), kind_(kind) {
    validate();
  }

  int k() const noexcept { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }
  const InterconnectKind& kind() const noexcept { return kind_; }

 private:
  void validate() const {
    const auto k = entries_.rows();
    if (k == 0) throw Error(Errc::InvalidDimension, "interconnect matrix must have k >= 1");
    if (entries_.cols() != k) {
      throw Error(Errc::InvariantViolation, "interconnect matrix is not square");
    }
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) {
        const double a = entries_(i, j);
        if (!(a >= 0.0 && a <= 1.0)) {
          throw Error(Errc::InvariantViolation, "entry outside [0,1]");
        }
        if (a != entries_(j, i)) throw Error(Errc::InvariantViolation, "matrix is not symmetric");
      }
    }
    for (Eigen::Index i = 0; i < k; ++i) {
      if (std::abs(entries_.row(i).sum() - 1.0) > kStochasticTol ||
          std::abs(entries_.col(i).sum() - 1.0) > kStochasticTol) {
        throw Error(Errc::InvariantViolation, "row/column sums differ from 1");
      }
    }
  }

  Eigen::MatrixXd entries_;
  InterconnectKind kind_;
};

struct ClassParams {
  double c = 1.0;
  double alpha = 0.0;

  void validate() const {
    if (!(c > 0.0)) throw Error(Errc::InvalidParameter, "class parameter c must be > 0");
    if (!(alpha >= 0.0)) throw Error(Errc::InvalidParameter, "class parameter alpha must be >= 0");
  }
};

/// ln k clamped below at 1, so log-power factors stay finite for k < 3.
inline double clamped_log(double k) { return std::max(std::log(k), 1.0); }

inline InterconnectMatrix complete(int k) {
  if (k < 1) throw Error(Errc::InvalidDimension, "complete() needs k >= 1");
  return InterconnectMatrix(Eigen::MatrixXd::Constant(k, k, 1.0 / k), InterconnectKind::complete());
}

namespace detail {

inline InterconnectMatrix from_adjacency(const std::vector<std::vector<bool>>& adj, int degree,
                                         InterconnectKind kind) {
  const int k = static_cast<int>(adj.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
  const double w = 1.0 / degree;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (adj[i][j]) a(i, j) = w;
    }
  }
  return InterconnectMatrix(std::move(a), kind);
}

// One attempt of sequential stub pairing; false if it got stuck.
inline bool try_pair_stubs(int k, int d, Rng& rng, std::vector<std::vector<bool>>& adj) {
  adj.assign(k, std::vector<bool>(k, false));
  std::vector<int> stubs;
  stubs.reserve(static_cast<std::size_t>(k) * d);
  for (int v = 0; v < k; ++v) stubs.insert(stubs.end(), d, v);

  auto take = [&](std::size_t a, std::size_t b) {
    const int u = stubs[a];
    const int v = stubs[b];
    adj[u][v] = adj[v][u] = true;
    if (a < b) std::swap(a, b);
    stubs[a] = stubs.back();
    stubs.pop_back();
    stubs[b] = stubs.back();
    stubs.pop_back();
  };
  auto suitable = [&](std::size_t a, std::size_t b) {
    return stubs[a] != stubs[b] && !adj[stubs[a]][stubs[b]];
  };

  while (!stubs.empty()) {
    bool paired = false;
    for (int attempt = 0; attempt < 64 && !paired; ++attempt) {
      const auto a = static_cast<std::size_t>(rng.uniform_index(stubs.size()));
      const auto b = static_cast<std::size_t>(rng.uniform_index(stubs.size()));
      if (a != b && suitable(a, b)) {
        take(a, b);
        paired = true;
      }
    }
    if (paired) continue;
    std::vector<std::pair<std::size_t, std::size_t>> options;
    for (std::size_t a = 0; a < stubs.size(); ++a) {
      for (std::size_t b = a + 1; b < stubs.size(); ++b) {
        if (suitable(a, b)) options.emplace_back(a, b);
      }
    }
    if (options.empty()) return false;
    const auto& [a, b] = options[rng.uniform_index(options.size())];
    take(a, b);
  }
  return true;
}

}  // namespace detail

/// Random simple d-regular graph on k vertices, scaled by 1/d.
///
/// Stubs are paired sequentially, each pair drawn uniformly among the pairs
/// that keep the graph simple; a dead end restarts the attempt. This is the
/// Steger-Wormald variant of the configuration model (plain rejection accepts
/// with probability ~exp(-(d^2-1)/4), hopeless for d = k/2).
inline InterconnectMatrix random_regular(int k, int d, Rng& rng) {
  if (k < 4) throw Error(Errc::InvalidDimension, "random_regular needs k >= 4");
  if (d < 3 || d >= k || (static_cast<long>(d) * k) % 2 != 0) {
    throw Error(Errc::InfeasibleDegree,
                "no simple " + std::to_string(d) + "-regular graph on " + std::to_string(k) +
                    " vertices (need 3 <= d < k, d*k even)");
  }
  std::vector<std::vector<bool>> adj;
  for (int attempt = 0; attempt < kSamplerRetryBudget; ++attempt) {
    if (detail::try_pair_stubs(k, d, rng, adj)) {
      return detail::from_adjacency(adj, d, InterconnectKind::regular(d));
    }
  }
  throw Error(Errc::SamplingFailure, "random_regular exceeded its retry budget");
}

/// k-cycle plus a uniformly random perfect matching that avoids cycle edges,
/// scaled by 1/3 (Bollobas-Chung).
inline InterconnectMatrix bollobas_chung(int k, Rng& rng) {
  if (k % 2 != 0) throw Error(Errc::Parity, "bollobas_chung needs even k");
  if (k < 4) throw Error(Errc::InvalidDimension, "bollobas_chung needs k >= 4");

  auto on_cycle = [k](int u, int v) {
    const int gap = std::abs(u - v);
    return gap == 1 || gap == k - 1;
  };
  std::vector<int> order(k);
  for (int attempt = 0; attempt < kSamplerRetryBudget; ++attempt) {
    for (int v = 0; v < k; ++v) order[v] = v;
    shuffle(std::span<int>(order), rng);
    bool ok = true;
    for (int p = 0; p < k && ok; p += 2) ok = !on_cycle(order[p], order[p + 1]);
    if (!ok) continue;

    std::vector<std::vector<bool>> adj(k, std::vector<bool>(k, false));
    for (int v = 0; v < k; ++v) {
      const int w = (v + 1) % k;
      adj[v][w] = adj[w][v] = true;
    }
    for (int p = 0; p < k; p += 2) adj[order[p]][order[p + 1]] = adj[order[p + 1]][order[p]] = true;
    return detail::from_adjacency(adj, 3, InterconnectKind::bollobas_chung());
  }
  throw Error(Errc::SamplingFailure, "bollobas_chung found no admissible matching");
}

/// min over non-unit eigenvalues of 1 - |mu|, for a symmetric doubly
/// stochastic matrix. The eigenvalue nearest 1 is deflated once, so a repeated
/// eigenvalue 1 (disconnected A) yields 0. Returns 1 when k = 1.
inline double spectral_gap_symmetric(const Eigen::MatrixXd& a) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw Error(Errc::InvariantViolation, "spectral_gap_symmetric needs a square matrix");
  }
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > kStochasticTol) {
    throw Error(Errc::InvariantViolation, "spectral_gap_symmetric needs a symmetric matrix");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::NumericalFailure, "symmetric eigensolver did not converge");
  }
  const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
  const Eigen::Index top = ev.size() - 1;
  if (std::abs(ev(top) - 1.0) > 1e-8) {
    throw Error(Errc::NotStochastic, "no eigenvalue within 1e-8 of 1");
  }
  double gap = 1.0;
  for (Eigen::Index i = 0; i < top; ++i) gap = std::min(gap, 1.0 - std::abs(ev(i)));
  return std::max(gap, 0.0);
}

inline double spectral_gap_symmetric(const InterconnectMatrix& a) {
  return spectral_gap_symmetric(a.entries());
}

/// Membership in the class with lambda(A) >= c * (ln k)^(-alpha).
inline bool in_class(const InterconnectMatrix& a, const ClassParams& params) {
  params.validate();
  const double threshold = params.c * std::pow(clamped_log(a.k()), -params.alpha);
  // Rounding can put a gap of exactly 1 (complete A) a few ulps below 1.
  return spectral_gap_symmetric(a) >= threshold - kStochasticTol;
}

}  // namespace cyclegap
