#pragma once

// Eigenvalues and absolute spectral gaps of expanded chains, and the
// k-dimensional condensed eigen-equation C A x = D(mu) x that they reduce to.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "cyclegap/chain.hpp"
#include "cyclegap/error.hpp"

namespace cyclegap {

using cplx = std::complex<double>;

inline constexpr std::int64_t kDefaultDenseLimit = 4096;
inline constexpr double kUnitEigenTol = 1e-8;
inline constexpr double kEquivalenceTol = 1e-6;
/// Eigenvector maps are only checked for |mu| above this; powers of small mu
/// lose all relative accuracy.
inline constexpr double kSmallMuCutoff = 0.1;

struct Spectrum {
  std::vector<cplx> eigenvalues;
  std::int64_t source_dim = 0;
};

struct EigenPair {
  cplx mu;
  Eigen::VectorXcd vector;
};

/// mu^p by repeated squaring; exact for p = 0 and well defined at mu = 0.
inline cplx ipow(cplx mu, std::int64_t p) {
  cplx result{1.0, 0.0};
  while (p > 0) {
    if (p & 1) result *= mu;
    mu *= mu;
    p >>= 1;
  }
  return result;
}

namespace detail {

inline void check_dense_limit(std::int64_t n, std::int64_t limit) {
  if (n > limit) {
    throw Error(Errc::SizeLimit, "N = " + std::to_string(n) + " exceeds the dense limit " +
                                     std::to_string(limit));
  }
}

inline void check_lapack(lapack_int info, const char* routine) {
  if (info < 0) {
    throw Error(Errc::NumericalFailure, std::string(routine) + ": bad argument " + std::to_string(-info));
  }
  if (info > 0) {
    throw Error(Errc::NumericalFailure, std::string(routine) + ": QR iteration failed to converge (info " +
                                            std::to_string(info) + ")");
  }
}

}  // namespace detail

/// All N eigenvalues of a general real matrix (LAPACK dgeev: balancing,
/// Hessenberg reduction, shifted QR).
inline Spectrum eigenvalues_dense(const Eigen::MatrixXd& m, std::int64_t dense_limit = kDefaultDenseLimit) {
  const auto n = static_cast<lapack_int>(m.rows());
  detail::check_dense_limit(n, dense_limit);
  Eigen::MatrixXd work = m;
  std::vector<double> wr(static_cast<std::size_t>(n)), wi(static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, wr.data(), wi.data(),
                                        nullptr, n, nullptr, n);
  detail::check_lapack(info, "dgeev");
  Spectrum spec{{}, n};
  spec.eigenvalues.reserve(static_cast<std::size_t>(n));
  for (lapack_int i = 0; i < n; ++i) spec.eigenvalues.emplace_back(wr[i], wi[i]);
  return spec;
}

inline Spectrum eigenvalues_dense(const StochasticMatrix& m, std::int64_t dense_limit = kDefaultDenseLimit) {
  detail::check_dense_limit(m.size(), dense_limit);
  return eigenvalues_dense(m.to_dense(), dense_limit);
}

/// Eigenvalues with unit-norm right eigenvectors (column i belongs to value i).
struct EigenSystem {
  std::vector<cplx> values;
  Eigen::MatrixXcd vectors;

  EigenPair pair(std::size_t i) const {
    return {values[i], vectors.col(static_cast<Eigen::Index>(i))};
  }
};

inline EigenSystem eigensystem_dense(const StochasticMatrix& m, std::int64_t dense_limit = kDefaultDenseLimit) {
  const auto n = static_cast<lapack_int>(m.size());
  detail::check_dense_limit(n, dense_limit);
  Eigen::MatrixXd work = m.to_dense();
  Eigen::MatrixXd vr(n, n);
  std::vector<double> wr(static_cast<std::size_t>(n)), wi(static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'V', n, work.data(), n, wr.data(), wi.data(),
                                        nullptr, n, vr.data(), n);
  detail::check_lapack(info, "dgeev");

  EigenSystem sys;
  sys.values.reserve(static_cast<std::size_t>(n));
  sys.vectors.resize(n, n);
  for (lapack_int i = 0; i < n; ++i) {
    sys.values.emplace_back(wr[i], wi[i]);
    if (wi[i] == 0.0) {
      sys.vectors.col(i) = vr.col(i).cast<cplx>();
    } else if (wi[i] > 0.0 && i + 1 < n) {
      // Conjugate pair stored as (re, im) in consecutive columns.
      const Eigen::VectorXcd v = vr.col(i).cast<cplx>() + cplx(0.0, 1.0) * vr.col(i + 1).cast<cplx>();
      sys.vectors.col(i) = v;
      sys.vectors.col(i + 1) = v.conjugate();
    }
  }
  for (lapack_int i = 0; i < n; ++i) sys.vectors.col(i).normalize();
  return sys;
}

/// Eigenvalues of a symmetric matrix (LAPACK dsyevd), returned as a Spectrum.
inline Spectrum eigenvalues_symmetric(const StochasticMatrix& m, std::int64_t dense_limit = kDefaultDenseLimit) {
  const auto n = static_cast<lapack_int>(m.size());
  detail::check_dense_limit(n, dense_limit);
  if (!m.is_symmetric(kStochasticTol)) {
    throw Error(Errc::InvariantViolation, "eigenvalues_symmetric needs a symmetric matrix");
  }
  Eigen::MatrixXd work = m.to_dense();
  std::vector<double> w(static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', n, work.data(), n, w.data());
  detail::check_lapack(info, "dsyevd");
  Spectrum spec{{}, n};
  for (double v : w) spec.eigenvalues.emplace_back(v, 0.0);
  return spec;
}

namespace detail {

// Moduli of the spectrum with the single eigenvalue nearest 1 removed.
inline std::vector<double> deflated_moduli(const Spectrum& spec) {
  if (spec.eigenvalues.empty()) throw Error(Errc::NotStochastic, "empty spectrum");
  const auto nearest = std::min_element(spec.eigenvalues.begin(), spec.eigenvalues.end(),
                                        [](cplx a, cplx b) { return std::abs(a - 1.0) < std::abs(b - 1.0); });
  if (std::abs(*nearest - 1.0) > kUnitEigenTol) {
    throw Error(Errc::NotStochastic, "no eigenvalue within 1e-8 of 1");
  }
  std::vector<double> moduli;
  moduli.reserve(spec.eigenvalues.size() - 1);
  for (auto it = spec.eigenvalues.begin(); it != spec.eigenvalues.end(); ++it) {
    if (it != nearest) moduli.push_back(std::abs(*it));
  }
  return moduli;
}

}  // namespace detail

/// min(1 - |mu|) over the spectrum minus one copy of the eigenvalue nearest
/// 1, clamped to >= 0. A 1 x 1 spectrum has no other eigenvalue; its gap is 1.
inline double absolute_spectral_gap(const Spectrum& spec) {
  const auto moduli = detail::deflated_moduli(spec);
  double gap = 1.0;
  for (double r : moduli) gap = std::min(gap, 1.0 - r);
  return std::max(gap, 0.0);
}

/// Largest modulus after deflating the unit eigenvalue (0 for N = 1).
inline double second_largest_modulus(const Spectrum& spec) {
  const auto moduli = detail::deflated_moduli(spec);
  return moduli.empty() ? 0.0 : *std::max_element(moduli.begin(), moduli.end());
}

inline double chain_gap(const CondensedChain& chain, std::int64_t dense_limit = kDefaultDenseLimit) {
  return absolute_spectral_gap(eigenvalues_dense(expand(chain), dense_limit));
}

inline double symmetrized_gap(const CondensedChain& chain, std::int64_t dense_limit = kDefaultDenseLimit) {
  return absolute_spectral_gap(eigenvalues_symmetric(symmetrize(expand(chain)), dense_limit));
}

/// ||M y - mu y|| / ||y||.
inline double full_residual(const StochasticMatrix& m, const EigenPair& pair) {
  const double norm = pair.vector.norm();
  if (norm == 0.0) throw Error(Errc::ZeroVector, "eigenvector is zero");
  return (m.apply(pair.vector) - pair.mu * pair.vector).norm() / norm;
}

/// ||C A x - D(mu) x|| / ||x|| with D(mu)_ii = mu^{L_i}, (C v)_i = v_{i-1}.
inline double condensed_residual(const CondensedChain& chain, cplx mu, const Eigen::VectorXcd& x) {
  const int k = chain.k();
  if (x.size() != k) throw Error(Errc::DimensionMismatch, "condensed vector must have k entries");
  const double norm = x.norm();
  if (norm == 0.0) throw Error(Errc::ZeroVector, "condensed vector is zero");
  const Eigen::VectorXcd ax = chain.interconnect().entries().cast<cplx>() * x;
  Eigen::VectorXcd r(k);
  for (int i = 0; i < k; ++i) {
    r(i) = ax((i + k - 1) % k) - ipow(mu, chain.lengths()[i]) * x(i);
  }
  return r.norm() / norm;
}

/// x_i = y at the last node (i, L_i) of arc i.
inline Eigen::VectorXcd restrict_eigvec(const CondensedChain& chain, const EigenPair& pair) {
  const StochasticMatrix m = expand(chain);
  if (pair.vector.size() != m.size()) {
    throw Error(Errc::DimensionMismatch, "eigenvector length differs from N");
  }
  if (full_residual(m, pair) >= kUnitEigenTol) {
    throw Error(Errc::InvalidParameter, "restrict_eigvec needs an eigenpair with residual < 1e-8");
  }
  Eigen::VectorXcd x(chain.k());
  for (int i = 0; i < chain.k(); ++i) x(i) = pair.vector(m.flat_index(i, chain.lengths()[i]));
  if (std::abs(pair.mu) > kSmallMuCutoff) {
    if (x.norm() == 0.0 || condensed_residual(chain, pair.mu, x) >= kEquivalenceTol) {
      throw Error(Errc::Consistency, "restricted eigenvector does not solve the condensed equation");
    }
  }
  return x;
}

/// y_(i,l) = x_i mu^{L_i - l}.
inline Eigen::VectorXcd expand_eigvec(const CondensedChain& chain, cplx mu, const Eigen::VectorXcd& x,
                                      double tolerance = kEquivalenceTol) {
  if (mu == cplx(0.0, 0.0)) throw Error(Errc::SingularExpansion, "cannot expand at mu = 0");
  if (condensed_residual(chain, mu, x) >= tolerance) {
    throw Error(Errc::InvalidParameter, "x does not solve the condensed equation at mu");
  }
  Eigen::VectorXcd y(chain.size());
  std::int64_t flat = 0;
  for (int i = 0; i < chain.k(); ++i) {
    const auto len = chain.lengths()[i];
    for (std::int64_t pos = 1; pos <= len; ++pos) y(flat++) = x(i) * ipow(mu, len - pos);
  }
  return y;
}

struct ParallelSplit {
  cplx parallel;             // mean of the entries; x_par = parallel * 1
  Eigen::VectorXcd perp;     // x - x_par, sums to zero
};

inline ParallelSplit decompose_parallel(const Eigen::VectorXcd& x) {
  if (x.size() == 0) return {cplx{}, x};
  const cplx mean = x.mean();
  return {mean, (x.array() - mean).matrix()};
}

/// Real coefficients (ascending powers) of det(D(mu) - C A), a monic
/// polynomial of degree N whose roots are the eigenvalues of expand(chain).
/// Obtained by interpolating the k x k determinant at the N+1 roots of unity.
inline std::vector<double> condensed_characteristic_polynomial(const CondensedChain& chain) {
  const int k = chain.k();
  const auto n = chain.size();
  const auto points = n + 1;
  Eigen::MatrixXcd ca(k, k);
  for (int i = 0; i < k; ++i) ca.row(i) = chain.interconnect().entries().row((i + k - 1) % k).cast<cplx>();

  std::vector<cplx> values(static_cast<std::size_t>(points));
  for (std::int64_t m = 0; m < points; ++m) {
    const cplx mu = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(points));
    Eigen::MatrixXcd d = -ca;
    for (int i = 0; i < k; ++i) d(i, i) += ipow(mu, chain.lengths()[i]);
    values[static_cast<std::size_t>(m)] = d.partialPivLu().determinant();
  }
  std::vector<double> coeffs(static_cast<std::size_t>(points));
  for (std::int64_t j = 0; j < points; ++j) {
    cplx acc{};
    for (std::int64_t m = 0; m < points; ++m) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((j * m) % points) / static_cast<double>(points);
      acc += values[static_cast<std::size_t>(m)] * std::polar(1.0, angle);
    }
    coeffs[static_cast<std::size_t>(j)] = acc.real() / static_cast<double>(points);
  }
  return coeffs;
}

/// All roots of sum_j c_j z^j (Aberth-Ehrlich simultaneous iteration).
/// Low-order coefficients below `zero_tol * max|c|` are treated as an exact
/// root at 0 of that multiplicity.
inline std::vector<cplx> polynomial_roots(std::vector<double> coeffs, double zero_tol = 1e-12) {
  while (!coeffs.empty() && coeffs.back() == 0.0) coeffs.pop_back();
  if (coeffs.size() < 2) return {};
  double scale = 0.0;
  for (double c : coeffs) scale = std::max(scale, std::abs(c));
  std::size_t zeros = 0;
  while (zeros + 1 < coeffs.size() && std::abs(coeffs[zeros]) <= zero_tol * scale) ++zeros;
  std::vector<cplx> roots(zeros, cplx{});
  coeffs.erase(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(zeros));

  const std::size_t deg = coeffs.size() - 1;
  if (deg == 0) return roots;
  // Start on the circle whose radius is the geometric mean of the root moduli.
  const double radius = std::pow(std::abs(coeffs[0] / coeffs.back()), 1.0 / static_cast<double>(deg));

  std::vector<cplx> z(deg);
  for (std::size_t i = 0; i < deg; ++i) {
    z[i] = std::polar(radius, 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(deg) + 0.4);
  }
  auto eval = [&](cplx x, cplx& p, cplx& dp) {
    p = coeffs[deg];
    dp = 0.0;
    for (std::size_t j = deg; j-- > 0;) {
      dp = dp * x + p;
      p = p * x + coeffs[j];
    }
  };
  for (int iter = 0; iter < 2000; ++iter) {
    double biggest = 0.0;
    for (std::size_t i = 0; i < deg; ++i) {
      cplx p, dp;
      eval(z[i], p, dp);
      if (p == cplx{}) continue;
      const cplx ratio = p / dp;
      cplx repulsion{};
      for (std::size_t j = 0; j < deg; ++j) {
        if (j != i) repulsion += 1.0 / (z[i] - z[j]);
      }
      const cplx step = ratio / (1.0 - ratio * repulsion);
      z[i] -= step;
      biggest = std::max(biggest, std::abs(step) / std::max(1.0, std::abs(z[i])));
    }
    if (biggest < 1e-15) break;
  }
  roots.insert(roots.end(), z.begin(), z.end());
  return roots;
}

}  // namespace cyclegap
