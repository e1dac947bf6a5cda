#pragma once

// Property suites behind `cyclegap verify`: generator invariants,
// condensed/full equivalence and the lemma-level Monte Carlo checks. Each
// check is reported as one CheckReport; any Fail makes the run exit with 2.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cyclegap/chain.hpp"
#include "cyclegap/error.hpp"
#include "cyclegap/experiments.hpp"
#include "cyclegap/interconnect.hpp"
#include "cyclegap/report.hpp"
#include "cyclegap/rng.hpp"
#include "cyclegap/spectral.hpp"
#include "cyclegap/theory.hpp"

namespace cyclegap {

enum class Suite { Invariants, Equivalence, Lemmas, All };

inline Suite parse_suite(const std::string& text) {
  if (text == "invariants") return Suite::Invariants;
  if (text == "equivalence") return Suite::Equivalence;
  if (text == "lemmas") return Suite::Lemmas;
  if (text == "all") return Suite::All;
  throw Error(Errc::Parse, "suite must be invariants, equivalence, lemmas or all");
}

using Expander = std::function<StochasticMatrix(const CondensedChain&)>;
using CheckSink = std::function<void(const CheckReport&)>;

struct VerifyOptions {
  std::uint64_t seed = 1;
  /// Instance count for the invariants (default 1000), equivalence (200) and
  /// lemma eigen-check (50) parts. Monte Carlo sample sizes are fixed.
  std::optional<int> trials;
  /// Replaceable so a deliberately broken expansion can serve as a negative control.
  Expander expander = [](const CondensedChain& c) { return expand(c); };
};

struct VerifySummary {
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t not_applicable = 0;

  void add(CheckOutcome o) {
    switch (o) {
      case CheckOutcome::Pass: ++passed; break;
      case CheckOutcome::Fail: ++failed; break;
      case CheckOutcome::NotApplicable: ++not_applicable; break;
    }
  }
  void merge(const VerifySummary& other) {
    passed += other.passed;
    failed += other.failed;
    not_applicable += other.not_applicable;
  }
  int exit_code() const { return failed > 0 ? 2 : 0; }
};

namespace detail {

inline CheckOutcome at_most(double value, double bound) {
  return value <= bound ? CheckOutcome::Pass : CheckOutcome::Fail;
}

class Reporter {
 public:
  explicit Reporter(const CheckSink& sink) : sink_(sink) {}

  void operator()(CheckReport report) {
    summary_.add(report.outcome);
    if (sink_) sink_(report);
  }
  const VerifySummary& summary() const { return summary_; }

 private:
  const CheckSink& sink_;
  VerifySummary summary_;
};

/// sum_t w_t (P_t + P_t^T) / 2 over random permutations P_t.
inline InterconnectMatrix random_symmetric_birkhoff(int k, Rng& rng) {
  const int terms = 1 + static_cast<int>(rng.uniform_index(3));
  std::vector<double> weights(static_cast<std::size_t>(terms));
  double total = 0.0;
  for (auto& w : weights) total += (w = 0.25 + rng.uniform_open01());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  for (int t = 0; t < terms; ++t) {
    std::vector<int> perm(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) perm[i] = i;
    shuffle(std::span<int>(perm), rng);
    const double w = weights[t] / total;
    for (int i = 0; i < k; ++i) {
      m(i, perm[i]) += 0.5 * w;
      m(perm[i], i) += 0.5 * w;
    }
  }
  // Rounding can leave m(i,j) and m(j,i) summed in different orders, and a
  // fixed point of every permutation a few ulps above 1.
  const Eigen::MatrixXd sym = (0.5 * (m + m.transpose())).cwiseMin(1.0);
  return InterconnectMatrix(sym, InterconnectKind::custom());
}

/// Ascending real coefficients of prod (x - r) over `roots`.
inline std::vector<double> poly_from_roots(const std::vector<cplx>& roots) {
  std::vector<cplx> c{1.0};
  for (const auto& r : roots) {
    c.push_back(0.0);
    for (std::size_t i = c.size() - 1; i > 0; --i) c[i] = c[i - 1] - r * c[i];
    c[0] = -r * c[0];
  }
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

/// max |a_i - b_i| / max(1, max |b_i|); infinite on a degree mismatch.
inline double coefficient_mismatch(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double scale = 1.0;
  for (double v : b) scale = std::max(scale, std::abs(v));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst / scale;
}

}  // namespace detail

/// Whether kind (a)-(d) has a generator at this k (random regular graphs
/// need 3 <= d < k).
inline bool kind_defined(SweepKind kind, int k) {
  switch (kind) {
    case SweepKind::Complete: return k >= 1;
    case SweepKind::RegularHalf: return k >= 6 && ((k / 2) * k) % 2 == 0;
    case SweepKind::RegularFour: return k >= 5;
    case SweepKind::BollobasChung: return k >= 4 && k % 2 == 0;
  }
  return false;
}

// --- Invariants ---

inline VerifySummary run_invariants(const VerifyOptions& opts, const CheckSink& sink) {
  static constexpr std::array<int, 6> ks = {1, 2, 4, 8, 16, 32};
  static constexpr std::array<double, 4> Ls = {1.0, 2.0, 8.0, 32.0};
  detail::Reporter report(sink);
  const int instances = opts.trials.value_or(1000);
  for (int t = 0; t < instances; ++t) {
    const std::uint64_t seed = hash64({opts.seed, 1, static_cast<std::uint64_t>(t)});
    Rng rng(seed);
    const int k = ks[rng.uniform_index(ks.size())];
    const double L = Ls[rng.uniform_index(Ls.size())];
    std::vector<SweepKind> defined;
    for (auto kind : kAllSweepKinds) {
      if (kind_defined(kind, k)) defined.push_back(kind);
    }
    const SweepKind kind = defined[rng.uniform_index(defined.size())];
    const json params{{"k", k}, {"L", L}, {"kind", to_string(kind)}};

    auto deviation_check = [&](const char* name, json p, auto&& compute) {
      CheckReport r{name, std::move(p), 0.0, kStochasticTol, CheckOutcome::Fail, seed};
      try {
        r.value = compute();
        r.outcome = detail::at_most(r.value, kStochasticTol);
      } catch (const Error&) {
        r.value = std::nan("");
      }
      report(std::move(r));
    };

    std::optional<InterconnectMatrix> a;
    deviation_check("interconnect_stochastic", params, [&] {
      a.emplace(sample_interconnect(kind, k, rng));
      const auto& e = a->entries();
      double worst = (e - e.transpose()).cwiseAbs().maxCoeff();
      for (int i = 0; i < k; ++i) {
        worst = std::max({worst, std::abs(e.row(i).sum() - 1.0), std::abs(e.col(i).sum() - 1.0)});
      }
      return worst;
    });
    if (!a) continue;

    json arc_params = params;
    arc_params["model"] = "arcmod";
    deviation_check("expanded_stochastic", arc_params, [&] {
      return opts.expander(sample_arcmod(L, k, *a, rng)).max_stochastic_deviation();
    });

    const auto n = std::max<std::int64_t>(k, std::llround(k * L));
    json cyc_params = params;
    cyc_params["model"] = "cyclemod";
    cyc_params["n"] = n;
    std::optional<CondensedChain> cyc;
    deviation_check("expanded_stochastic", cyc_params, [&] {
      cyc.emplace(sample_cyclemod(n, k, *a, rng));
      return opts.expander(*cyc).max_stochastic_deviation();
    });
    if (cyc) {
      const auto& origin = std::get<CyclemodOrigin>(cyc->provenance());
      const bool ok = cyc->lengths().total() == n && origin.j >= 1 && origin.j <= n;
      report(CheckReport{"cyclemod_total", cyc_params, static_cast<double>(cyc->lengths().total()),
                         static_cast<double>(n), ok ? CheckOutcome::Pass : CheckOutcome::Fail, seed});
    }
  }
  return report.summary();
}

// --- Condensed/full equivalence ---

struct EquivalenceResult {
  double max_condensed_residual = 0.0;  // over full eigenpairs with |mu| > 0.1
  double max_roundtrip_error = 0.0;     // expand(restrict(y)) against y, up to scale
  // Condensed determinant against the characteristic polynomial rebuilt from
  // the full spectrum (relative to the largest coefficient). Comparing
  // coefficients rather than roots keeps repeated eigenvalues well conditioned.
  double charpoly_mismatch = 0.0;
  std::size_t pairs_checked = 0;

  double worst() const { return std::max({max_condensed_residual, max_roundtrip_error, charpoly_mismatch}); }
};

/// Compares the full eigenproblem of `expander(chain)` with the condensed
/// equation. Eigenpairs whose vector is not resolved (defective clusters,
/// full residual >= 1e-8) are skipped.
inline EquivalenceResult check_equivalence(const CondensedChain& chain, const Expander& expander) {
  const StochasticMatrix m = expander(chain);
  if (m.size() != chain.size() || m.arcs() != chain.k()) {
    throw Error(Errc::DimensionMismatch, "expanded matrix does not match the chain layout");
  }
  EquivalenceResult res;
  const auto sys = eigensystem_dense(m);
  for (std::size_t i = 0; i < sys.values.size(); ++i) {
    const auto pair = sys.pair(i);
    if (std::abs(pair.mu) <= kSmallMuCutoff || full_residual(m, pair) >= kUnitEigenTol) continue;
    Eigen::VectorXcd x(chain.k());
    for (int a = 0; a < chain.k(); ++a) x(a) = pair.vector(m.flat_index(a, chain.lengths()[a]));
    ++res.pairs_checked;
    if (x.norm() == 0.0) {
      res.max_condensed_residual = INFINITY;
      continue;
    }
    res.max_condensed_residual = std::max(res.max_condensed_residual, condensed_residual(chain, pair.mu, x));
    const Eigen::VectorXcd y = expand_eigvec(chain, pair.mu, x, INFINITY);
    const cplx scale = pair.vector.dot(y) / pair.vector.squaredNorm();
    res.max_roundtrip_error = std::max(res.max_roundtrip_error, (y - scale * pair.vector).norm() / y.norm());
  }
  res.charpoly_mismatch =
      detail::coefficient_mismatch(condensed_characteristic_polynomial(chain), detail::poly_from_roots(sys.values));
  return res;
}

/// k in 1..5, lengths in 1..6, A from kinds (a)-(d) where defined or a random
/// symmetric Birkhoff combination.
inline CondensedChain random_equivalence_instance(Rng& rng) {
  const int k = 1 + static_cast<int>(rng.uniform_index(5));
  std::vector<std::int64_t> lengths(static_cast<std::size_t>(k));
  for (auto& len : lengths) len = 1 + static_cast<std::int64_t>(rng.uniform_index(6));
  std::vector<std::optional<SweepKind>> choices = {std::nullopt};
  for (auto kind : kAllSweepKinds) {
    if (kind_defined(kind, k)) choices.emplace_back(kind);
  }
  const auto pick = choices[rng.uniform_index(choices.size())];
  auto a = pick ? sample_interconnect(*pick, k, rng) : detail::random_symmetric_birkhoff(k, rng);
  return CondensedChain::from_lengths(std::move(a), ArcLengths(std::move(lengths)));
}

inline VerifySummary run_equivalence(const VerifyOptions& opts, const CheckSink& sink) {
  detail::Reporter report(sink);
  const int instances = opts.trials.value_or(200);
  for (int t = 0; t < instances; ++t) {
    const std::uint64_t seed = hash64({opts.seed, 2, static_cast<std::uint64_t>(t)});
    Rng rng(seed);
    const auto chain = random_equivalence_instance(rng);
    const auto lengths = chain.lengths().values();
    CheckReport r{"condensed_equivalence",
                  json{{"k", chain.k()},
                       {"lengths", std::vector<std::int64_t>(lengths.begin(), lengths.end())},
                       {"kind", to_string(chain.interconnect().kind())}},
                  0.0, kEquivalenceTol, CheckOutcome::Fail, seed};
    try {
      const auto res = check_equivalence(chain, opts.expander);
      r.value = res.worst();
      r.params["pairs"] = res.pairs_checked;
      r.outcome = res.worst() < kEquivalenceTol ? CheckOutcome::Pass : CheckOutcome::Fail;
    } catch (const Error&) {
      r.value = std::nan("");
    }
    report(std::move(r));
  }
  return report.summary();
}

// --- Lemma-level checks ---

/// Total variation between the cyclemod length vector distribution at (n, k)
/// and arcmod(L) conditioned on sum = n by rejection, `samples` draws each.
inline double length_distribution_tv(std::int64_t n, int k, double L, int samples, Rng& rng) {
  const auto a = complete(k);
  std::map<std::vector<std::int64_t>, double> diff;
  for (int s = 0; s < samples; ++s) {
    const auto chain = sample_cyclemod(n, k, a, rng);
    const auto v = chain.lengths().values();
    diff[{v.begin(), v.end()}] += 1.0 / samples;
  }
  int accepted = 0;
  std::vector<std::int64_t> lengths(static_cast<std::size_t>(k));
  while (accepted < samples) {
    std::int64_t total = 0;
    for (auto& len : lengths) total += (len = sample_geometric(L, rng));
    if (total != n) continue;
    diff[lengths] -= 1.0 / samples;
    ++accepted;
  }
  double tv = 0.0;
  for (const auto& [key, d] : diff) tv += std::abs(d);
  return 0.5 * tv;
}

struct EigenLemmaTally {
  int instances = 0;
  int s_holds = 0;
  int phi_eigenvalues = 0;  // eigenvalues in the annulus on instances where S holds
  int p_near_1_pass = 0;
  int p_near_1_fail = 0;
  int perp_pass = 0;
  int perp_fail = 0;
  int perp_not_applicable = 0;
};

/// P_near_1 and perp_bound checks on arcmod instances of the given kinds,
/// one report per instance and one per annulus eigenvalue.
inline EigenLemmaTally eigen_lemma_checks(int k, double L, std::span<const SweepKind> kinds, int instances,
                                          double gamma, std::uint64_t seed, const std::function<void(CheckReport)>& report) {
  EigenLemmaTally tally;
  for (int t = 0; t < instances; ++t) {
    const SweepKind kind = kinds[static_cast<std::size_t>(t) % kinds.size()];
    const std::uint64_t s = hash64({seed, 3, static_cast<std::uint64_t>(t)});
    Rng rng(s);
    const auto a = sample_interconnect(kind, k, rng);
    BoundParams p = BoundParams::defaults(k, L, spectral_gap_symmetric(a));
    p.gamma = gamma;
    const auto chain = sample_arcmod(L, k, a, rng);
    const auto m = expand(chain);
    const auto sys = eigensystem_dense(m);
    Spectrum spec{sys.values, m.size()};
    ++tally.instances;
    const auto pn = P_near_1_check(chain, spec, p);
    const json params{{"k", k}, {"L", L}, {"kind", to_string(kind)}, {"gamma", gamma}, {"N", m.size()}};
    CheckReport r{"P_near_1", params, 0.0, std::nullopt, CheckOutcome::NotApplicable, s};
    r.params["S"] = pn.applicable;
    r.params["phi_eigenvalues"] = pn.entries.size();
    if (pn.applicable) {
      ++tally.s_holds;
      tally.phi_eigenvalues += static_cast<int>(pn.entries.size());
      bool all_pass = true;
      bool any_bound = false;
      for (const auto& e : pn.entries) {
        r.value = std::max(r.value, e.value);
        if (e.bound) r.bound = e.bound;
        if (e.outcome == CheckOutcome::Pass) ++tally.p_near_1_pass;
        if (e.outcome == CheckOutcome::Fail) {
          ++tally.p_near_1_fail;
          all_pass = false;
        }
        any_bound = any_bound || e.outcome != CheckOutcome::NotApplicable;
      }
      if (any_bound) r.outcome = all_pass ? CheckOutcome::Pass : CheckOutcome::Fail;
    }
    report(r);

    if (!pn.applicable) continue;
    for (std::size_t i = 0; i < sys.values.size(); ++i) {
      const auto pair = sys.pair(i);
      if (std::abs(pair.mu - 1.0) < kUnitEigenTol) continue;
      if (classify_angle(detail::snap_modulus(pair.mu), p) == AngleRegion::Outside) continue;
      CheckReport pr{"perp_bound", params, 0.0, std::nullopt, CheckOutcome::NotApplicable, s};
      pr.params["mu"] = {pair.mu.real(), pair.mu.imag()};
      try {
        const auto res = perp_bound_check(chain, pair, p);
        pr.value = res.ratio;
        pr.bound = res.bound;
        pr.outcome = res.outcome;
      } catch (const Error& e) {
        pr.value = std::nan("");
        pr.outcome = e.code() == Errc::Contradiction ? CheckOutcome::Fail : CheckOutcome::NotApplicable;
      }
      if (pr.outcome == CheckOutcome::Pass) ++tally.perp_pass;
      if (pr.outcome == CheckOutcome::Fail) ++tally.perp_fail;
      if (pr.outcome == CheckOutcome::NotApplicable) ++tally.perp_not_applicable;
      report(pr);
    }
  }
  return tally;
}

inline VerifySummary run_lemmas(const VerifyOptions& opts, const CheckSink& sink) {
  detail::Reporter report(sink);
  constexpr int kMonteCarlo = 10'000;
  std::uint64_t stream = 0;
  auto next_seed = [&] { return hash64({opts.seed, 4, stream++}); };

  for (const auto& [k, L] : {std::pair{64, 16.0}, std::pair{100, 8.0}}) {
    const json params{{"k", k}, {"L", L}, {"M", 3.0}, {"trials", kMonteCarlo}};
    {
      const auto seed = next_seed();
      Rng rng(seed);
      const double freq = long_arc_frequency(k, L, 3.0, kMonteCarlo, rng);
      const double p = 2.0 * std::pow(static_cast<double>(k), 1.0 - 3.0);
      const double bound = p + 3.0 * bernoulli_se(p, kMonteCarlo);
      report(CheckReport{"long_arc_frequency", params, freq, bound, detail::at_most(freq, bound), seed});
    }
    {
      const auto seed = next_seed();
      Rng rng(seed);
      const auto f = moment_concentration_check(k, L, kMonteCarlo, rng);
      const double p_low = 4.0 / k;
      const double p_high = 5.0 / k;
      const double b_low = p_low + 3.0 * bernoulli_se(p_low, kMonteCarlo);
      const double b_high = p_high + 3.0 * bernoulli_se(p_high, kMonteCarlo);
      report(CheckReport{"moment_low_mean", params, f.low_mean, b_low, detail::at_most(f.low_mean, b_low), seed});
      report(CheckReport{"moment_high_sq", params, f.high_sq, b_high, detail::at_most(f.high_sq, b_high), seed});
    }
  }

  {
    // Linearization and modulus bounds for small-angle mu, lengths under S(M).
    const auto seed = next_seed();
    Rng rng(seed);
    const auto p = BoundParams::defaults(64, 16.0);
    const double eps = epsilon_k(p);
    double worst_ratio = 0.0;
    double min_modulus_sq = INFINITY;
    for (int t = 0; t < 1000; ++t) {
      std::vector<std::int64_t> lengths(64);
      do {
        for (auto& len : lengths) len = sample_geometric(p.L, rng);
      } while (!event_S(ArcLengths(lengths), p));
      const cplx mu = sample_small_angle_mu(p, rng);
      for (auto len : lengths) {
        const auto lin = linearization_error(len, mu);
        worst_ratio = std::max(worst_ratio, lin.error / lin.bound);
        min_modulus_sq = std::min(min_modulus_sq, std::norm(ipow(mu, len)));
      }
    }
    const json params{{"k", 64}, {"L", 16.0}, {"samples", 1000}};
    report(CheckReport{"linearization", params, worst_ratio, 1.0, detail::at_most(worst_ratio, 1.0), seed});
    report(CheckReport{"small_angle_modulus", params, min_modulus_sq, 1.0 - eps,
                       min_modulus_sq >= 1.0 - eps ? CheckOutcome::Pass : CheckOutcome::Fail, seed});
  }

  {
    const auto seed = next_seed();
    Rng rng(seed);
    const auto p = BoundParams::defaults(256, 16.0);
    const auto delta = delta_k(p);
    CheckReport r{"small_angle_moment_criterion", json{{"k", 256}, {"L", 16.0}, {"samples", 1000}}, 0.0, 0.01,
                  CheckOutcome::NotApplicable, seed};
    if (delta) {
      int holds = 0;
      const auto a = complete(256);
      for (int t = 0; t < 1000; ++t) holds += small_angle_criterion(sample_arcmod(16.0, 256, a, rng).lengths(), *delta);
      r.value = holds / 1000.0;
      r.outcome = r.value < 0.01 ? CheckOutcome::Pass : CheckOutcome::Fail;
    } else {
      r.bound.reset();
    }
    report(std::move(r));
  }

  {
    const auto seed = next_seed();
    Rng rng(seed);
    const double tv = length_distribution_tv(6, 2, 3.0, 100'000, rng);
    report(CheckReport{"distribution_match", json{{"n", 6}, {"k", 2}, {"L", 3.0}, {"samples", 100'000}}, tv, 0.02,
                       tv < 0.02 ? CheckOutcome::Pass : CheckOutcome::Fail, seed});
  }

  {
    // Report only: the grid scan is one-sided and no bound is asserted.
    const auto seed = next_seed();
    Rng rng(seed);
    const auto p = BoundParams::defaults(64, 16.0);
    const double cut = 1.0 - std::pow(std::log(64.0), -p.eta);
    int above = 0;
    const auto a = complete(64);
    for (int t = 0; t < 200; ++t) above += large_angle_scan(sample_arcmod(16.0, 64, a, rng).lengths(), p, 256) > cut;
    report(CheckReport{"large_angle_scan_fraction", json{{"k", 64}, {"L", 16.0}, {"samples", 200}, {"cut", cut}},
                       above / 200.0, std::nullopt, CheckOutcome::NotApplicable, seed});
  }

  const std::array<SweepKind, 2> kinds = {SweepKind::Complete, SweepKind::BollobasChung};
  eigen_lemma_checks(16, 8.0, kinds, opts.trials.value_or(50), 8.0, next_seed(),
                     [&](CheckReport r) { report(std::move(r)); });
  return report.summary();
}

inline VerifySummary run_suite(Suite suite, const VerifyOptions& opts, const CheckSink& sink) {
  VerifySummary total;
  if (suite == Suite::Invariants || suite == Suite::All) total.merge(run_invariants(opts, sink));
  if (suite == Suite::Equivalence || suite == Suite::All) total.merge(run_equivalence(opts, sink));
  if (suite == Suite::Lemmas || suite == Suite::All) total.merge(run_lemmas(opts, sink));
  return total;
}

}  // namespace cyclegap
