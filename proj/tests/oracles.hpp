#pragma once

// Exact reference computations used by the tests. Nothing here calls into
// the library's numerical code: matrices are rebuilt from their definitions
// over the rationals, characteristic polynomials come from Faddeev-LeVerrier
// and real roots are isolated with Sturm sequences.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using Q = boost::multiprecision::cpp_rational;
using Poly = std::vector<Q>;  // ascending powers
using QMatrix = std::vector<std::vector<Q>>;

/// Nearest fraction p/q with q <= 4096; throws when the double is not one.
inline Q to_rational(double x) {
  for (long q = 1; q <= 4096; ++q) {
    const double p = std::round(x * static_cast<double>(q));
    if (std::abs(p / static_cast<double>(q) - x) < 1e-14) return Q(static_cast<long>(p), q);
  }
  throw std::runtime_error("value is not a small-denominator fraction");
}

inline double to_double(const Q& x) { return static_cast<double>(x); }

inline void trim(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

inline Q eval(const Poly& p, const Q& x) {
  Q acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

inline Poly derivative(const Poly& p) {
  Poly d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<long>(i));
  trim(d);
  return d;
}

/// Remainder of a / b.
inline Poly poly_mod(Poly a, const Poly& b) {
  trim(a);
  while (a.size() >= b.size() && !a.empty()) {
    const Q factor = a.back() / b.back();
    const std::size_t shift = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= factor * b[i];
    trim(a);
  }
  return a;
}

/// Quotient of a / b (exact division expected).
inline Poly poly_div(Poly a, const Poly& b) {
  trim(a);
  if (a.size() < b.size()) return {};
  Poly q(a.size() - b.size() + 1, Q(0));
  while (a.size() >= b.size() && !a.empty()) {
    const Q factor = a.back() / b.back();
    const std::size_t shift = a.size() - b.size();
    q[shift] = factor;
    for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= factor * b[i];
    trim(a);
  }
  return q;
}

inline Poly poly_gcd(Poly a, Poly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = poly_mod(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

/// det(x I - M), ascending coefficients, by Faddeev-LeVerrier.
inline Poly charpoly(const QMatrix& m) {
  const std::size_t n = m.size();
  Poly c(n + 1, Q(0));
  c[n] = 1;
  QMatrix mk(n, std::vector<Q>(n, Q(0)));
  for (std::size_t k = 1; k <= n; ++k) {
    // mk <- m * mk + c[n-k+1] I
    QMatrix next(n, std::vector<Q>(n, Q(0)));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t l = 0; l < n; ++l) {
        if (m[i][l] == 0) continue;
        for (std::size_t j = 0; j < n; ++j) next[i][j] += m[i][l] * mk[l][j];
      }
      next[i][i] += c[n - k + 1];
    }
    mk = std::move(next);
    Q trace = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t l = 0; l < n; ++l) trace += m[i][l] * mk[l][i];
    }
    c[n - k] = -trace / static_cast<long>(k);
  }
  return c;
}

inline int sign_changes(const std::vector<Poly>& chain, const Q& x) {
  int changes = 0;
  int last = 0;
  for (const auto& p : chain) {
    const Q v = eval(p, x);
    const int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

/// Distinct real roots of p in (lo, hi], each to within `width`.
inline std::vector<double> real_roots(Poly p, const Q& lo, const Q& hi, const Q& width) {
  trim(p);
  Poly sq = poly_div(p, poly_gcd(p, derivative(p)));
  std::vector<Poly> chain{sq, derivative(sq)};
  while (chain.back().size() > 1) {
    Poly r = poly_mod(chain[chain.size() - 2], chain.back());
    for (auto& c : r) c = -c;
    if (r.empty()) break;
    chain.push_back(std::move(r));
  }
  std::vector<double> roots;
  std::vector<std::pair<Q, Q>> stack{{lo, hi}};
  while (!stack.empty()) {
    auto [a, b] = stack.back();
    stack.pop_back();
    const int count = sign_changes(chain, a) - sign_changes(chain, b);
    if (count == 0) continue;
    if (count == 1 && b - a < width) {
      roots.push_back(to_double((a + b) / 2));
      continue;
    }
    const Q mid = (a + b) / 2;
    stack.push_back({a, mid});
    stack.push_back({mid, b});
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

inline int multiplicity_at(Poly p, const Q& x) {
  trim(p);
  int m = 0;
  const Poly factor{-x, Q(1)};
  while (!p.empty() && eval(p, x) == 0) {
    p = poly_div(p, factor);
    ++m;
  }
  return m;
}

inline QMatrix rational_matrix(const std::vector<std::vector<double>>& a) {
  QMatrix q(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (double v : a[i]) q[i].push_back(to_rational(v));
  }
  return q;
}

/// Absolute spectral gap of a symmetric doubly stochastic rational matrix:
/// 0 if the eigenvalue 1 is repeated, else min over the other eigenvalues
/// of 1 - |mu|.
inline double exact_symmetric_gap(const QMatrix& a) {
  const Poly p = charpoly(a);
  if (multiplicity_at(p, Q(1)) >= 2) return 0.0;
  if (a.size() == 1) return 1.0;
  const auto roots = real_roots(p, Q(-2), Q(2), Q(1, 1LL << 50));
  double gap = 1.0;
  for (double r : roots) {
    if (std::abs(r - 1.0) < 1e-12) continue;
    gap = std::min(gap, 1.0 - std::abs(r));
  }
  return std::max(gap, 0.0);
}

/// The full chain matrix built straight from its definition: node (i, l)
/// is row/column offset_i + l - 1; (i, l-1) -> (i, l) has weight 1 and
/// (j, L_j) -> (i+1, 1) has weight A_ij. Entry [dest][src].
inline QMatrix expanded_rational(const std::vector<std::int64_t>& lengths, const QMatrix& a) {
  const std::size_t k = lengths.size();
  std::vector<std::size_t> start(k + 1, 0);
  for (std::size_t i = 0; i < k; ++i) start[i + 1] = start[i] + static_cast<std::size_t>(lengths[i]);
  const std::size_t n = start[k];
  QMatrix m(n, std::vector<Q>(n, Q(0)));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t l = 1; l < static_cast<std::size_t>(lengths[i]); ++l) m[start[i] + l][start[i] + l - 1] = 1;
    for (std::size_t j = 0; j < k; ++j) m[start[(i + 1) % k]][start[j + 1] - 1] += a[i][j];
  }
  return m;
}

/// Every (k-subset of cycle edges, label of e_1) pair on an n-cycle,
/// converted to (lengths, j) by walking the cycle from the labeled edge.
/// Edge t joins node t to node t mod n + 1. Returns a count per outcome.
inline std::map<std::pair<std::vector<std::int64_t>, std::int64_t>, long> enumerate_cyclemod(int n, int k) {
  std::map<std::pair<std::vector<std::int64_t>, std::int64_t>, long> counts;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    std::vector<int> tails;
    for (int t = 1; t <= n; ++t) {
      if (mask & (1u << (t - 1))) tails.push_back(t);
    }
    for (int label : tails) {
      // Arc 1 starts right after the removed edge preceding e_1 = label.
      std::vector<std::int64_t> lengths;
      int pos = label;
      int length = 0;
      // Walk backwards from e_1 to find b_1.
      int b1 = label;
      while (true) {
        const int prev = b1 == 1 ? n : b1 - 1;
        if (mask & (1u << (prev - 1))) break;
        b1 = prev;
      }
      pos = b1;
      for (int steps = 0; steps < n; ++steps) {
        ++length;
        if (mask & (1u << (pos - 1))) {
          lengths.push_back(length);
          length = 0;
        }
        pos = pos % n + 1;
      }
      ++counts[{lengths, b1}];
    }
  }
  return counts;
}

}  // namespace oracle
