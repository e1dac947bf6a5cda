#pragma once

// Lemma-level quantities and deterministic criteria for the arc models, in a
// form that Monte-Carlo checks can evaluate on sampled chains.
//
// All log factors use the natural logarithm. Where a quantity is only
// asymptotically meaningful (epsilon_k, delta_k, theorem bounds) k >= 3 is
// required; region and event helpers clamp ln k at 1 for k < 3.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cyclegap/chain.hpp"
#include "cyclegap/error.hpp"
#include "cyclegap/interconnect.hpp"
#include "cyclegap/rng.hpp"
#include "cyclegap/spectral.hpp"

namespace cyclegap {

/// Slack added to every "value <= bound" comparison on computed eigen-data.
inline constexpr double kCheckSlack = 1e-9;

struct BoundParams {
  double M = 3.0;                             // long-arc event: max L_i <= M L ln k
  double M_phi = 3.0 * std::numbers::pi * 3.0;  // small-angle cut: pi / (M_phi L ln k)
  double gamma = 8.0;                         // annulus width 1 / (L ln^gamma k)
  double eta = 3.5;                           // large-angle margin ln^-eta k
  double theta = 1.1;
  double beta = 1.1;
  ClassParams cls{};
  int k = 3;
  double L = 1.0;

  /// Default parameter set: M = 3, M_phi = 3 pi M, gamma = 8, eta = 3.5,
  /// alpha = 0 and c = lambda(A).
  static BoundParams defaults(int k, double L, double lambda_a = 1.0) {
    BoundParams p;
    p.k = k;
    p.L = L;
    p.cls = ClassParams{lambda_a, 0.0};
    return p;
  }

  void validate() const {
    if (!(M > 1.0)) throw Error(Errc::InvalidParameter, "M must exceed 1");
    if (!(M_phi > 0.0)) throw Error(Errc::InvalidParameter, "M_phi must be positive");
    if (k < 1) throw Error(Errc::InvalidDimension, "k must be >= 1");
    if (!(L > 0.0)) throw Error(Errc::InvalidParameter, "L must be positive");
    cls.validate();
  }
};

enum class AngleRegion { SmallAngles, LargeAngles, Outside };

inline const char* to_string(AngleRegion r) {
  switch (r) {
    case AngleRegion::SmallAngles: return "small-angles";
    case AngleRegion::LargeAngles: return "large-angles";
    case AngleRegion::Outside: return "outside";
  }
  return "outside";
}

namespace detail {
inline double strict_log_k(int k) {
  if (k < 3) throw Error(Errc::Domain, "needs k >= 3 so that ln k > 1");
  return std::log(static_cast<double>(k));
}
}  // namespace detail

/// 4 M (ln k)^-(gamma - 1).
inline double epsilon_k(const BoundParams& p) {
  return 4.0 * p.M * std::pow(detail::strict_log_k(p.k), -(p.gamma - 1.0));
}

/// Delta_k = c (ln k)^-alpha, the assumed lower bound on lambda(A).
inline double class_threshold(const BoundParams& p) {
  return p.cls.c * std::pow(clamped_log(p.k), -p.cls.alpha);
}

/// eps / (2 Delta - Delta^2 - eps), or nullopt when the denominator is not
/// positive (the bound says nothing at this k).
inline std::optional<double> delta_from(double epsilon, double delta_cap) {
  const double denom = 2.0 * delta_cap - delta_cap * delta_cap - epsilon;
  if (!(denom > 0.0)) return std::nullopt;
  return epsilon / denom;
}

inline std::optional<double> delta_k(const BoundParams& p) {
  return delta_from(epsilon_k(p), class_threshold(p));
}

/// Inner radius 1 - 1/(L ln^gamma k) of the forbidden annulus.
inline double phi_inner_radius(const BoundParams& p) {
  return 1.0 - 1.0 / (p.L * std::pow(clamped_log(p.k), p.gamma));
}

/// Argument cut pi / (M_phi L ln k) between small and large angles.
inline double small_angle_threshold(const BoundParams& p) {
  return std::numbers::pi / (p.M_phi * p.L * clamped_log(p.k));
}

inline AngleRegion classify_angle(cplx mu, const BoundParams& p) {
  const double r = std::abs(mu);
  if (mu == cplx(1.0, 0.0) || r > 1.0 || r < phi_inner_radius(p)) return AngleRegion::Outside;
  return std::abs(std::arg(mu)) <= small_angle_threshold(p) ? AngleRegion::SmallAngles
                                                            : AngleRegion::LargeAngles;
}

/// No exceptionally long arc: max L_i <= M L ln k.
inline bool event_S(const ArcLengths& lengths, const BoundParams& p) {
  return static_cast<double>(lengths.longest()) <= p.M * p.L * clamped_log(p.k);
}

/// Necessary condition for a small-angle eigenvalue:
/// (mean L_i)^2 <= 12 delta (mean L_i^2).
inline bool small_angle_criterion(const ArcLengths& lengths, double delta) {
  if (!(delta > 0.0)) throw Error(Errc::InvalidParameter, "delta must be positive");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (auto len : lengths.values()) {
    const auto x = static_cast<double>(len);
    sum += x;
    sum_sq += x * x;
  }
  const double k = lengths.k();
  const double mean = sum / k;
  return mean * mean <= 12.0 * delta * (sum_sq / k);
}

struct MomentFrequencies {
  double low_mean = 0.0;  // fraction with mean L_i <= L/2
  double high_sq = 0.0;   // fraction with mean L_i^2 >= 4 L^2
};

inline MomentFrequencies moment_concentration_check(int k, double L, int trials, Rng& rng) {
  if (trials < 100) throw Error(Errc::InvalidParameter, "need at least 100 trials");
  if (k < 1) throw Error(Errc::InvalidDimension, "k must be >= 1");
  int low = 0;
  int high = 0;
  for (int t = 0; t < trials; ++t) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < k; ++i) {
      const auto x = static_cast<double>(sample_geometric(L, rng));
      sum += x;
      sum_sq += x * x;
    }
    if (sum / k <= L / 2.0) ++low;
    if (sum_sq / k >= 4.0 * L * L) ++high;
  }
  return {static_cast<double>(low) / trials, static_cast<double>(high) / trials};
}

/// Fraction of arcmod length draws with max L_i >= M L ln k.
inline double long_arc_frequency(int k, double L, double M, int trials, Rng& rng) {
  if (k < 2) throw Error(Errc::Domain, "long-arc frequency needs k >= 2");
  const double cut = M * L * std::log(static_cast<double>(k));
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    std::int64_t longest = 0;
    for (int i = 0; i < k; ++i) longest = std::max(longest, sample_geometric(L, rng));
    if (static_cast<double>(longest) >= cut) ++hits;
  }
  return static_cast<double>(hits) / trials;
}

/// Standard error of a Bernoulli frequency with success probability p.
inline double bernoulli_se(double p, int trials) {
  return std::sqrt(std::clamp(p, 0.0, 1.0) * (1.0 - std::clamp(p, 0.0, 1.0)) / trials);
}

/// P(mu) = (1/k) sum_i mu^{L_i}.
inline cplx P_poly(const ArcLengths& lengths, cplx mu) {
  cplx acc{};
  for (auto len : lengths.values()) acc += ipow(mu, len);
  return acc / static_cast<double>(lengths.k());
}

inline double cos_plus(double y) { return std::max(std::cos(y), 0.0); }

/// max Re P(mu) over a grid covering the large-angle region: three modulus
/// rings on [1 - 1/(L ln^gamma k), 1] and `grid_size` arguments spaced
/// logarithmically on [pi/(M_phi L ln k), pi]. A grid maximum below a bound
/// does not prove the supremum is below it.
inline double large_angle_scan(const ArcLengths& lengths, const BoundParams& p, int grid_size) {
  if (grid_size < 100) throw Error(Errc::InvalidParameter, "grid_size must be >= 100");
  const double inner = std::max(phi_inner_radius(p), 0.0);
  const double rings[3] = {inner, 0.5 * (inner + 1.0), 1.0};
  const double lo = std::min(small_angle_threshold(p), std::numbers::pi);
  const double ratio = std::numbers::pi / lo;
  double best = -1.0;
  for (int g = 0; g < grid_size; ++g) {
    const double theta = lo * std::pow(ratio, static_cast<double>(g) / (grid_size - 1));
    for (double r : rings) best = std::max(best, P_poly(lengths, std::polar(r, theta)).real());
  }
  return best;
}

enum class CheckOutcome { Pass, Fail, NotApplicable };

inline const char* to_string(CheckOutcome o) {
  switch (o) {
    case CheckOutcome::Pass: return "pass";
    case CheckOutcome::Fail: return "fail";
    case CheckOutcome::NotApplicable: return "n/a";
  }
  return "n/a";
}

inline CheckOutcome compare_to_bound(double value, std::optional<double> bound) {
  if (!bound) return CheckOutcome::NotApplicable;
  return value <= *bound + kCheckSlack ? CheckOutcome::Pass : CheckOutcome::Fail;
}

namespace detail {

// Computed unit-circle eigenvalues may overshoot |mu| = 1 by rounding.
inline cplx snap_modulus(cplx mu) {
  const double r = std::abs(mu);
  return (r > 1.0 && r <= 1.0 + kCheckSlack) ? mu / r : mu;
}

// Bound on sqrt(delta_k) / delta_k usable for chain checks. For k = 1 the
// perpendicular component vanishes identically, so the bound is 0.
inline std::optional<double> chain_delta(const BoundParams& p) {
  if (p.k == 1) return 0.0;
  if (p.k < 3) return std::nullopt;
  return delta_k(p);
}

}  // namespace detail

struct PNearOneEntry {
  cplx mu;
  double value;                // |1 - P(mu)|
  std::optional<double> bound;  // sqrt(delta_k)
  CheckOutcome outcome;
};

struct PNearOneReport {
  bool applicable = true;  // false when S(M) fails for the chain
  std::vector<PNearOneEntry> entries;
};

/// |1 - P(mu)| <= sqrt(delta_k) for every eigenvalue mu != 1 of the chain
/// that lies in the forbidden annulus.
inline PNearOneReport P_near_1_check(const CondensedChain& chain, const Spectrum& spectrum, const BoundParams& p) {
  if (p.k != chain.k()) throw Error(Errc::DimensionMismatch, "bound parameters are for a different k");
  PNearOneReport report;
  if (!event_S(chain.lengths(), p)) {
    report.applicable = false;
    return report;
  }
  const auto& ev = spectrum.eigenvalues;
  if (ev.empty()) return report;
  const auto unit = std::min_element(ev.begin(), ev.end(), [](cplx a, cplx b) {
    return std::abs(a - 1.0) < std::abs(b - 1.0);
  });
  const std::optional<double> delta = detail::chain_delta(p);
  const std::optional<double> bound = delta ? std::optional<double>(std::sqrt(*delta)) : std::nullopt;
  for (auto it = ev.begin(); it != ev.end(); ++it) {
    if (it == unit) continue;
    const cplx mu = detail::snap_modulus(*it);
    if (classify_angle(mu, p) == AngleRegion::Outside) continue;
    const double value = std::abs(1.0 - P_poly(chain.lengths(), mu));
    report.entries.push_back({*it, value, bound, compare_to_bound(value, bound)});
  }
  return report;
}

struct PerpBoundResult {
  double ratio;                // ||x_perp||^2 / ||x_par||^2
  std::optional<double> bound;  // delta_k
  CheckOutcome outcome;
};

/// Restricts a full eigenpair with mu in the annulus to the condensed vector
/// and compares ||x_perp||^2 / ||x_par||^2 against delta_k.
inline PerpBoundResult perp_bound_check(const CondensedChain& chain, const EigenPair& pair, const BoundParams& p) {
  if (p.k != chain.k()) throw Error(Errc::DimensionMismatch, "bound parameters are for a different k");
  if (classify_angle(detail::snap_modulus(pair.mu), p) == AngleRegion::Outside) {
    throw Error(Errc::InvalidParameter, "perp_bound_check needs mu in the forbidden annulus");
  }
  const Eigen::VectorXcd x = restrict_eigvec(chain, pair);
  if (!event_S(chain.lengths(), p)) return {0.0, std::nullopt, CheckOutcome::NotApplicable};

  const auto split = decompose_parallel(x);
  const double par_sq = static_cast<double>(chain.k()) * std::norm(split.parallel);
  const double perp_sq = split.perp.squaredNorm();
  const std::optional<double> delta = detail::chain_delta(p);
  if (par_sq <= 1e-300 * std::max(perp_sq, 1.0)) {
    if (delta) throw Error(Errc::Contradiction, "x_par vanishes for an annulus eigenvalue under S(M)");
    return {std::numeric_limits<double>::infinity(), std::nullopt, CheckOutcome::NotApplicable};
  }
  const double ratio = perp_sq / par_sq;
  return {ratio, delta, compare_to_bound(ratio, delta)};
}

enum class Model { Arcmod, Cyclemod };

/// Arcmod: 1 / (L ln^gamma k). Cyclemod: k / (n ln^gamma k), with
/// `n_or_L` carrying L resp. n.
inline double theorem_bound(const BoundParams& p, Model model, double n_or_L) {
  const double log_pow = std::pow(detail::strict_log_k(p.k), p.gamma);
  return model == Model::Arcmod ? 1.0 / (n_or_L * log_pow) : p.k / (n_or_L * log_pow);
}

/// |(1 - mu^len) - len (1 - mu)| and its bound len |1 - mu| / 2.
struct LinearizationSample {
  double error;
  double bound;
};

inline LinearizationSample linearization_error(std::int64_t len, cplx mu) {
  const double n = static_cast<double>(len);
  return {std::abs((1.0 - ipow(mu, len)) - n * (1.0 - mu)), 0.5 * n * std::abs(1.0 - mu)};
}

/// Uniform draw from the small-angle region (modulus and argument uniform).
inline cplx sample_small_angle_mu(const BoundParams& p, Rng& rng) {
  const double inner = std::max(phi_inner_radius(p), 0.0);
  for (;;) {
    const double r = inner + (1.0 - inner) * rng.uniform_open01();
    const double theta = small_angle_threshold(p) * (2.0 * rng.uniform_open01() - 1.0);
    const cplx mu = std::polar(r, theta);
    if (classify_angle(mu, p) == AngleRegion::SmallAngles) return mu;
  }
}

}  // namespace cyclegap
