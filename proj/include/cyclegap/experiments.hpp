#pragma once

// Gap sweeps over cyclemod chains: per-trial sampling, quartile aggregation,
// slope fits, CSV records and SVG stripe plots.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "cyclegap/chain.hpp"
#include "cyclegap/error.hpp"
#include "cyclegap/interconnect.hpp"
#include "cyclegap/report.hpp"
#include "cyclegap/rng.hpp"
#include "cyclegap/serialization.hpp"
#include "cyclegap/spectral.hpp"
#include "cyclegap/theory.hpp"

namespace cyclegap {

// --- Interconnect kinds (a)-(d) ---

enum class SweepKind { Complete, RegularHalf, RegularFour, BollobasChung };

inline constexpr std::array<SweepKind, 4> kAllSweepKinds = {SweepKind::Complete, SweepKind::RegularHalf,
                                                           SweepKind::RegularFour, SweepKind::BollobasChung};

inline constexpr int ordinal(SweepKind kind) noexcept { return static_cast<int>(kind); }

inline std::string to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::Complete: return "complete";
    case SweepKind::RegularHalf: return "regular-half";
    case SweepKind::RegularFour: return "regular-4";
    case SweepKind::BollobasChung: return "bc";
  }
  return "complete";
}

inline char letter(SweepKind kind) noexcept { return static_cast<char>('a' + ordinal(kind)); }

inline std::string legend_label(SweepKind kind) {
  switch (kind) {
    case SweepKind::Complete: return "(a) complete";
    case SweepKind::RegularHalf: return "(b) random regular, d = k/2";
    case SweepKind::RegularFour: return "(c) random regular, d = 4";
    case SweepKind::BollobasChung: return "(d) Bollobas-Chung";
  }
  return "";
}

/// Accepts the labels written by to_string, or the letters a-d.
inline SweepKind parse_sweep_kind(const std::string& text) {
  for (auto kind : kAllSweepKinds) {
    if (text == to_string(kind) || text == std::string(1, letter(kind))) return kind;
  }
  if (text == "bollobas-chung") return SweepKind::BollobasChung;
  throw Error(Errc::Parse, "unknown sweep kind '" + text + "'");
}

inline InterconnectMatrix sample_interconnect(SweepKind kind, int k, Rng& rng) {
  switch (kind) {
    case SweepKind::Complete: return complete(k);
    case SweepKind::RegularHalf: return random_regular(k, k / 2, rng);
    case SweepKind::RegularFour: return random_regular(k, 4, rng);
    case SweepKind::BollobasChung: return bollobas_chung(k, rng);
  }
  throw Error(Errc::InvalidParameter, "unknown sweep kind");
}

// --- k as a function of n ---

struct KRule {
  enum class Type { SqrtEven, Fixed, PowerLaw };
  Type type = Type::SqrtEven;
  int k = 0;         // Fixed
  double rho = 2.0;  // PowerLaw: k = 2 round(n^(1/rho) / 2)

  static KRule sqrt_even() { return {}; }
  static KRule fixed(int k) { return {Type::Fixed, k, 2.0}; }
  static KRule power_law(double rho) { return {Type::PowerLaw, 0, rho}; }

  int base_k(std::int64_t n) const {
    switch (type) {
      case Type::Fixed: return k;
      case Type::SqrtEven: return 2 * static_cast<int>(std::llround(std::sqrt(static_cast<double>(n)) / 2.0));
      case Type::PowerLaw:
        return 2 * static_cast<int>(std::llround(std::pow(static_cast<double>(n), 1.0 / rho) / 2.0));
    }
    return k;
  }

  friend bool operator==(const KRule&, const KRule&) = default;
};

/// k for a grid point; kind (b) bumps k by 2 until d k = (k/2) k is even.
inline int k_for(const KRule& rule, SweepKind kind, std::int64_t n) {
  int k = rule.base_k(n);
  if (kind == SweepKind::RegularHalf) {
    while (k > 0 && ((k / 2) * k) % 2 != 0) k += 2;
  }
  return k;
}

// --- Configuration ---

struct ExperimentConfig {
  std::vector<double> log_n_grid;
  KRule k_rule;
  std::vector<SweepKind> kinds;
  int trials_per_point = 30;
  std::uint64_t base_seed = 1;
  std::int64_t dense_limit = 2048;
  bool symmetrized = false;
  bool theory_checks = false;
  double gamma = 8.0;

  static std::vector<double> grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw Error(Errc::InvalidParameter, "log n grid needs step > 0 and max >= min");
    std::vector<double> out;
    const auto count = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::int64_t i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
    if (hi - out.back() > 1e-9) out.push_back(hi);
    return out;
  }

  /// ln n = 4.62..7.0 step 0.17 (n = 101..1097), 30 trials, kinds (a)-(d).
  static ExperimentConfig desk() {
    ExperimentConfig c;
    c.log_n_grid = grid(4.62, 7.0, 0.17);
    c.kinds.assign(kAllSweepKinds.begin(), kAllSweepKinds.end());
    return c;
  }

  /// ln n up to 8.0 (n = 2981) with 500 trials per point.
  static ExperimentConfig paper() {
    ExperimentConfig c = desk();
    c.log_n_grid = grid(4.62, 8.0, 0.17);
    c.trials_per_point = 500;
    c.dense_limit = 4096;
    return c;
  }

  std::vector<std::int64_t> n_grid() const {
    std::vector<std::int64_t> out;
    out.reserve(log_n_grid.size());
    for (double x : log_n_grid) out.push_back(std::llround(std::exp(x)));
    return out;
  }

  void validate() const {
    if (log_n_grid.empty()) throw Error(Errc::InvalidParameter, "log n grid is empty");
    if (kinds.empty()) throw Error(Errc::InvalidParameter, "no interconnect kinds selected");
    if (trials_per_point < 1) throw Error(Errc::InvalidParameter, "trials_per_point must be >= 1");
    if (dense_limit < 1) throw Error(Errc::InvalidParameter, "dense_limit must be >= 1");
    if (!(gamma > 0.0)) throw Error(Errc::InvalidParameter, "gamma must be positive");
    if (k_rule.type == KRule::Type::PowerLaw && !(k_rule.rho > 1.0)) {
      throw Error(Errc::InvalidParameter, "power-law exponent rho must exceed 1");
    }
    if (std::set<SweepKind>(kinds.begin(), kinds.end()).size() != kinds.size()) {
      throw Error(Errc::InvalidParameter, "kinds must not repeat");
    }
    const auto ns = n_grid();
    if (std::set<std::int64_t>(ns.begin(), ns.end()).size() != ns.size()) {
      throw Error(Errc::InvalidParameter, "log n grid maps two points to the same n");
    }
    for (auto n : ns) {
      for (auto kind : kinds) {
        const int k = k_for(k_rule, kind, n);
        const std::string where = " (n=" + std::to_string(n) + ", kind " + to_string(kind) + ")";
        if (k < 4) throw Error(Errc::InvalidParameter, "k must be >= 4" + where);
        if (n < k) throw Error(Errc::InvalidParameter, "n must be >= k" + where);
        if (kind == SweepKind::RegularFour && k < 5) throw Error(Errc::InfeasibleDegree, "degree 4 needs k >= 5" + where);
        if (kind == SweepKind::BollobasChung && k % 2 != 0) throw Error(Errc::Parity, "Bollobas-Chung needs even k" + where);
        if (n > dense_limit) {
          throw Error(Errc::SizeLimit, "n exceeds dense_limit " + std::to_string(dense_limit) + where);
        }
      }
    }
  }
};

inline json to_json(const KRule& rule) {
  switch (rule.type) {
    case KRule::Type::SqrtEven: return "sqrt-even";
    case KRule::Type::Fixed: return json{{"type", "fixed"}, {"k", rule.k}};
    case KRule::Type::PowerLaw: return json{{"type", "power-law"}, {"rho", rule.rho}};
  }
  return "sqrt-even";
}

inline KRule k_rule_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "sqrt-even") return KRule::sqrt_even();
    throw Error(Errc::Parse, "k_rule string must be 'sqrt-even'");
  }
  const auto type = detail::json_field<std::string>(j, "type");
  if (type == "sqrt-even") return KRule::sqrt_even();
  if (type == "fixed") return KRule::fixed(detail::json_field<int>(j, "k"));
  if (type == "power-law") return KRule::power_law(detail::json_field<double>(j, "rho"));
  throw Error(Errc::Parse, "unknown k_rule type '" + type + "'");
}

inline json to_json(const ExperimentConfig& c) {
  json kinds = json::array();
  for (auto kind : c.kinds) kinds.push_back(to_string(kind));
  return json{{"log_n_grid", c.log_n_grid},     {"k_rule", to_json(c.k_rule)},
              {"kinds", kinds},                 {"trials_per_point", c.trials_per_point},
              {"base_seed", c.base_seed},       {"dense_limit", c.dense_limit},
              {"symmetrized", c.symmetrized},   {"theory_checks", c.theory_checks},
              {"gamma", c.gamma}};
}

/// Keys override the "preset" ("desk" or "paper", default desk). Unknown keys
/// are rejected so typos do not silently fall back to defaults.
inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::Parse, "config must be a JSON object");
  static const std::set<std::string> known = {"preset",      "log_n_grid",    "log_n",         "k_rule",
                                              "kinds",       "trials_per_point", "base_seed",  "dense_limit",
                                              "symmetrized", "theory_checks", "gamma"};
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) throw Error(Errc::Parse, "unknown config key '" + item.key() + "'");
  }
  ExperimentConfig c = ExperimentConfig::desk();
  if (j.contains("preset")) {
    const auto preset = detail::json_field<std::string>(j, "preset");
    if (preset == "paper") {
      c = ExperimentConfig::paper();
    } else if (preset != "desk") {
      throw Error(Errc::Parse, "preset must be 'desk' or 'paper'");
    }
  }
  if (j.contains("log_n_grid") && j.contains("log_n")) {
    throw Error(Errc::Parse, "give either log_n_grid or log_n, not both");
  }
  if (j.contains("log_n_grid")) c.log_n_grid = detail::json_field<std::vector<double>>(j, "log_n_grid");
  if (j.contains("log_n")) {
    const json& r = j.at("log_n");
    c.log_n_grid = ExperimentConfig::grid(detail::json_field<double>(r, "min"), detail::json_field<double>(r, "max"),
                                          detail::json_field<double>(r, "step"));
  }
  if (j.contains("k_rule")) c.k_rule = k_rule_from_json(j.at("k_rule"));
  if (j.contains("kinds")) {
    c.kinds.clear();
    for (const auto& name : detail::json_field<std::vector<std::string>>(j, "kinds")) {
      c.kinds.push_back(parse_sweep_kind(name));
    }
  }
  if (j.contains("trials_per_point")) c.trials_per_point = detail::json_field<int>(j, "trials_per_point");
  if (j.contains("base_seed")) c.base_seed = detail::json_field<std::uint64_t>(j, "base_seed");
  if (j.contains("dense_limit")) c.dense_limit = detail::json_field<std::int64_t>(j, "dense_limit");
  if (j.contains("symmetrized")) c.symmetrized = detail::json_field<bool>(j, "symmetrized");
  if (j.contains("theory_checks")) c.theory_checks = detail::json_field<bool>(j, "theory_checks");
  if (j.contains("gamma")) c.gamma = detail::json_field<double>(j, "gamma");
  return c;
}

// --- Trials ---

inline std::uint64_t trial_seed(std::uint64_t base_seed, std::int64_t n, SweepKind kind, int trial) {
  return hash64({base_seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(ordinal(kind)),
                 static_cast<std::uint64_t>(trial)});
}

struct TrialRecord {
  std::int64_t n = 0;
  int k = 0;
  SweepKind kind = SweepKind::Complete;
  int trial = 0;
  std::uint64_t seed = 0;
  double gap = 0.0;  // NaN when failed
  std::optional<double> gap_sym;
  double lambda_A = 0.0;
  double wall_time = 0.0;
  bool failed = false;
  std::vector<CheckReport> checks;
};

/// Sort key for records and series rows: n, then kind (a) < ... < (d), then seed.
inline bool record_less(const TrialRecord& a, const TrialRecord& b) {
  return std::tuple(a.n, ordinal(a.kind), a.seed) < std::tuple(b.n, ordinal(b.kind), b.seed);
}

/// Lower bound k / (n ln^gamma k) on the cyclemod gap.
inline double cyclemod_rate_bound(std::int64_t n, int k, double gamma) {
  BoundParams p = BoundParams::defaults(k, static_cast<double>(n) / k);
  p.gamma = gamma;
  return theorem_bound(p, Model::Cyclemod, static_cast<double>(n));
}

/// One sweep job. Numerical failures (eigensolver, sampler budget) are caught
/// and flagged; validation errors propagate.
inline TrialRecord run_trial(const ExperimentConfig& config, std::int64_t n, SweepKind kind, int trial) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.n = n;
  rec.k = k_for(config.k_rule, kind, n);
  rec.kind = kind;
  rec.trial = trial;
  rec.seed = trial_seed(config.base_seed, n, kind, trial);
  Rng rng(rec.seed);
  Rng rng_a = rng.split(1);
  Rng rng_chain = rng.split(2);
  try {
    const auto a = sample_interconnect(kind, rec.k, rng_a);
    rec.lambda_A = spectral_gap_symmetric(a);
    const auto chain = sample_cyclemod(n, rec.k, a, rng_chain);
    rec.gap = chain_gap(chain, config.dense_limit);
    if (config.symmetrized) rec.gap_sym = symmetrized_gap(chain, config.dense_limit);
  } catch (const Error& e) {
    if (e.category() != ErrorCategory::Numerical) throw;
    rec.failed = true;
    rec.gap = std::nan("");
    if (config.symmetrized) rec.gap_sym = std::nan("");
  }
  if (config.theory_checks) {
    CheckReport r;
    r.check = "cyclemod_rate";
    r.params = json{{"n", n}, {"k", rec.k}, {"kind", to_string(kind)}, {"gamma", config.gamma}};
    r.value = rec.gap;
    r.bound = cyclemod_rate_bound(n, rec.k, config.gamma);
    r.outcome = rec.failed ? CheckOutcome::NotApplicable
                           : (rec.gap >= *r.bound ? CheckOutcome::Pass : CheckOutcome::Fail);
    r.seed = rec.seed;
    rec.checks.push_back(std::move(r));
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

struct SweepOptions {
  int workers = 1;
  /// Records from an earlier partial run; their (n, kind, trial) jobs are skipped.
  std::vector<TrialRecord> existing;
  /// Called under a lock as each new record completes (in completion order).
  std::function<void(const TrialRecord&)> on_record;
};

struct SweepResult {
  std::vector<TrialRecord> records;  // sorted by record_less
  std::size_t failures = 0;
  std::size_t zero_gaps = 0;
  std::size_t rate_violations = 0;
  std::size_t resumed = 0;  // records taken over from SweepOptions::existing
  std::size_t dropped = 0;  // existing records not matching any job of this config
};

inline SweepResult run_sweep(const ExperimentConfig& config, SweepOptions options = {}) {
  config.validate();
  if (options.workers < 1) throw Error(Errc::InvalidParameter, "workers must be >= 1");

  struct Job {
    std::int64_t n;
    SweepKind kind;
    int trial;
  };
  std::vector<Job> jobs;
  std::map<std::tuple<std::int64_t, int, std::uint64_t>, int> trial_of_seed;
  for (auto n : config.n_grid()) {
    for (auto kind : config.kinds) {
      for (int t = 0; t < config.trials_per_point; ++t) {
        jobs.push_back({n, kind, t});
        trial_of_seed[{n, ordinal(kind), trial_seed(config.base_seed, n, kind, t)}] = t;
      }
    }
  }

  SweepResult result;
  std::set<std::tuple<std::int64_t, int, int>> done;
  for (auto& rec : options.existing) {
    const auto it = trial_of_seed.find({rec.n, ordinal(rec.kind), rec.seed});
    if (it == trial_of_seed.end() || rec.k != k_for(config.k_rule, rec.kind, rec.n) ||
        !done.insert({rec.n, ordinal(rec.kind), it->second}).second) {
      ++result.dropped;
      continue;
    }
    rec.trial = it->second;
    result.records.push_back(std::move(rec));
    ++result.resumed;
  }
  std::erase_if(jobs, [&](const Job& j) { return done.contains({j.n, ordinal(j.kind), j.trial}); });

  std::vector<TrialRecord> fresh(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex lock;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        fresh[i] = run_trial(config, jobs[i].n, jobs[i].kind, jobs[i].trial);
        if (options.on_record) {
          std::lock_guard guard(lock);
          options.on_record(fresh[i]);
        }
      } catch (...) {
        std::lock_guard guard(lock);
        if (!first_error) first_error = std::current_exception();
        stop.store(true);
        return;
      }
    }
  };
  const int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(options.workers), jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  for (auto& rec : fresh) result.records.push_back(std::move(rec));
  std::sort(result.records.begin(), result.records.end(), record_less);
  for (const auto& rec : result.records) {
    if (rec.failed) {
      ++result.failures;
      continue;
    }
    if (rec.gap == 0.0) ++result.zero_gaps;
    if (rec.gap < cyclemod_rate_bound(rec.n, rec.k, config.gamma)) ++result.rate_violations;
  }
  return result;
}

// --- Aggregation ---

struct Quartiles {
  double q1;
  double median;
  double q3;
};

/// Linear-interpolation quantile (R type 7) of sorted data.
inline double quantile_type7(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(Errc::TooFewRecords, "quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline Quartiles quartiles_of(std::vector<double> values) {
  if (values.size() < 3) throw Error(Errc::TooFewRecords, "need at least 3 values for quartiles");
  std::sort(values.begin(), values.end());
  return {quantile_type7(values, 0.25), quantile_type7(values, 0.5), quantile_type7(values, 0.75)};
}

struct QuartileRow {
  std::int64_t n = 0;
  int k = 0;
  SweepKind kind = SweepKind::Complete;
  double q1 = 0.0, median = 0.0, q3 = 0.0;
  double q1_comp = 0.0, median_comp = 0.0, q3_comp = 0.0;  // times L = n / k

  double L() const { return static_cast<double>(n) / k; }
};

using QuartileSeries = std::vector<QuartileRow>;

/// Quartiles of the gap per (n, kind), failed records excluded. Throws
/// TooFewRecords if any group keeps fewer than 3 records.
inline QuartileSeries quartiles(std::span<const TrialRecord> records) {
  std::map<std::pair<std::int64_t, int>, std::pair<int, std::vector<double>>> groups;
  for (const auto& rec : records) {
    auto& g = groups[{rec.n, ordinal(rec.kind)}];
    g.first = rec.k;
    if (!rec.failed && std::isfinite(rec.gap)) g.second.push_back(rec.gap);
  }
  QuartileSeries out;
  for (auto& [key, group] : groups) {
    if (group.second.size() < 3) {
      throw Error(Errc::TooFewRecords, "fewer than 3 usable records at n=" + std::to_string(key.first) + ", kind " +
                                           to_string(static_cast<SweepKind>(key.second)));
    }
    const auto q = quartiles_of(std::move(group.second));
    QuartileRow row;
    row.n = key.first;
    row.k = group.first;
    row.kind = static_cast<SweepKind>(key.second);
    row.q1 = q.q1;
    row.median = q.median;
    row.q3 = q.q3;
    row.q1_comp = row.L() * q.q1;
    row.median_comp = row.L() * q.median;
    row.q3_comp = row.L() * q.q3;
    out.push_back(row);
  }
  return out;
}

/// The series with each gap quantile replaced by L times it.
inline QuartileSeries compensated_series(QuartileSeries series) {
  for (auto& row : series) {
    row.q1 = row.q1_comp = row.L() * row.q1;
    row.median = row.median_comp = row.L() * row.median;
    row.q3 = row.q3_comp = row.L() * row.q3;
  }
  return series;
}

inline std::vector<QuartileRow> rows_of_kind(const QuartileSeries& series, SweepKind kind) {
  std::vector<QuartileRow> out;
  for (const auto& row : series) {
    if (row.kind == kind) out.push_back(row);
  }
  return out;
}

struct SlopeFit {
  double slope;
  double intercept;
  std::size_t points;
};

/// Least-squares line through (ln n, ln median) for one kind.
inline SlopeFit fit_slope(const QuartileSeries& series, SweepKind kind) {
  const auto rows = rows_of_kind(series, kind);
  if (rows.size() < 4) throw Error(Errc::TooFewRecords, "slope fit needs at least 4 grid points");
  std::vector<double> xs, ys;
  for (const auto& row : rows) {
    if (!(row.median > 0.0)) throw Error(Errc::NonPositive, "median gap must be positive for a log fit");
    xs.push_back(std::log(static_cast<double>(row.n)));
    ys.push_back(std::log(row.median));
  }
  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(Errc::InvalidParameter, "slope fit needs distinct n values");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx, xs.size()};
}

/// Sample standard deviation over mean.
inline double coefficient_of_variation(std::span<const double> values) {
  if (values.size() < 2) throw Error(Errc::TooFewRecords, "coefficient of variation needs 2 values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (!(mean != 0.0)) throw Error(Errc::NonPositive, "coefficient of variation of zero-mean data");
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1)) / std::abs(mean);
}

// --- CSV ---

inline constexpr const char* kRecordsHeader = "n,k,kind,seed,gap,gap_sym,lambda_A,wall_time";
inline constexpr const char* kSeriesHeader = "n,k,kind,q1,median,q3,q1_comp,median_comp,q3_comp";

inline std::string record_csv_row(const TrialRecord& r) {
  return std::to_string(r.n) + "," + std::to_string(r.k) + "," + to_string(r.kind) + "," + std::to_string(r.seed) +
         "," + format_roundtrip(r.gap) + "," + (r.gap_sym ? format_roundtrip(*r.gap_sym) : std::string()) + "," +
         format_roundtrip(r.lambda_A) + "," + format_roundtrip(r.wall_time);
}

inline std::string records_csv(std::span<const TrialRecord> records) {
  std::string out = std::string(kRecordsHeader) + "\n";
  for (const auto& r : records) out += record_csv_row(r) + "\n";
  return out;
}

inline std::string series_csv(const QuartileSeries& series) {
  std::string out = std::string(kSeriesHeader) + "\n";
  for (const auto& r : series) {
    out += std::to_string(r.n) + "," + std::to_string(r.k) + "," + to_string(r.kind);
    for (double v : {r.q1, r.median, r.q3, r.q1_comp, r.median_comp, r.q3_comp}) out += "," + format_roundtrip(v);
    out += "\n";
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) return cells;
    start = comma + 1;
  }
}

/// Data rows of a CSV whose first line must equal `header`.
inline std::vector<std::vector<std::string>> csv_rows(const std::string& text, const char* header) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::Parse, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw Error(Errc::Parse, "unexpected CSV header '" + line + "'");
  const auto width = split_csv_line(header).size();
  std::vector<std::vector<std::string>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != width) {
      throw Error(Errc::Parse, "CSV line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                                   " columns, expected " + std::to_string(width));
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace detail

/// Trial indices are not stored; run_sweep recovers them from the seed.
inline std::vector<TrialRecord> read_records_csv(const std::string& text) {
  std::vector<TrialRecord> out;
  for (const auto& c : detail::csv_rows(text, kRecordsHeader)) {
    TrialRecord r;
    r.n = parse_integer<std::int64_t>(c[0]);
    r.k = parse_integer<int>(c[1]);
    r.kind = parse_sweep_kind(c[2]);
    r.seed = parse_integer<std::uint64_t>(c[3]);
    r.gap = parse_double(c[4]);
    if (!c[5].empty()) r.gap_sym = parse_double(c[5]);
    r.lambda_A = parse_double(c[6]);
    r.wall_time = parse_double(c[7]);
    r.failed = std::isnan(r.gap);
    out.push_back(std::move(r));
  }
  return out;
}

inline QuartileSeries read_series_csv(const std::string& text) {
  QuartileSeries out;
  for (const auto& c : detail::csv_rows(text, kSeriesHeader)) {
    QuartileRow r;
    r.n = parse_integer<std::int64_t>(c[0]);
    r.k = parse_integer<int>(c[1]);
    r.kind = parse_sweep_kind(c[2]);
    r.q1 = parse_double(c[3]);
    r.median = parse_double(c[4]);
    r.q3 = parse_double(c[5]);
    r.q1_comp = parse_double(c[6]);
    r.median_comp = parse_double(c[7]);
    r.q3_comp = parse_double(c[8]);
    out.push_back(r);
  }
  return out;
}

// --- SVG ---

enum class PlotMode { LogLogGap, CompensatedGap };

inline PlotMode parse_plot_mode(const std::string& text) {
  if (text == "loglog") return PlotMode::LogLogGap;
  if (text == "compensated") return PlotMode::CompensatedGap;
  throw Error(Errc::Parse, "plot mode must be 'loglog' or 'compensated'");
}

namespace detail {

inline const char* kind_color(SweepKind kind) {
  switch (kind) {
    case SweepKind::Complete: return "#1f77b4";
    case SweepKind::RegularHalf: return "#ff7f0e";
    case SweepKind::RegularFour: return "#2ca02c";
    case SweepKind::BollobasChung: return "#d62728";
  }
  return "#000000";
}

/// Tick positions at multiples of 1, 2 or 5 times a power of ten.
inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double f : {1.0, 2.0, 5.0, 10.0}) {
    step = f * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return ticks;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double x) { return format_sig(x, 6); }

}  // namespace detail

/// Self-contained SVG: one quartile stripe plus median line per kind (a single
/// grid point becomes a marker). In log-log mode, rows with a nonpositive
/// quantile cannot be placed and are left out.
inline std::string render_plot(const QuartileSeries& series, PlotMode mode) {
  if (series.empty()) throw Error(Errc::InvalidParameter, "cannot plot an empty series");
  struct Point {
    double x, lo, mid, hi;
  };
  std::map<int, std::vector<Point>> by_kind;
  for (const auto& row : series) {
    const double x = std::log(static_cast<double>(row.n));
    Point p{x, row.q1, row.median, row.q3};
    if (mode == PlotMode::CompensatedGap) {
      p = {x, row.q1_comp, row.median_comp, row.q3_comp};
    } else {
      if (!(row.q1 > 0.0)) continue;
      p = {x, std::log(row.q1), std::log(row.median), std::log(row.q3)};
    }
    by_kind[ordinal(row.kind)].push_back(p);
  }
  if (by_kind.empty()) throw Error(Errc::InvalidParameter, "no plottable rows in series");

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (auto& [kind, pts] : by_kind) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
    for (const auto& p : pts) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.lo);
      ymax = std::max(ymax, p.hi);
    }
  }
  if (xmax - xmin < 1e-9) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin < 1e-12) {
    const double pad = std::max(std::abs(ymin) * 0.1, 1e-3);
    ymin -= pad;
    ymax += pad;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  constexpr double width = 820, height = 520, left = 80, right = 220, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };
  using detail::num;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height) << "\" fill=\"white\"/>\n";
  const std::string title = mode == PlotMode::LogLogGap ? "Spectral gap, log-log" : "Compensated spectral gap L*gap";
  svg << "<text x=\"" << num(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"16\">" << detail::xml_escape(title) << "</text>\n";

  svg << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
  svg << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\"/>\n</g>\n";
  svg << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (double t : detail::nice_ticks(xmin, xmax)) {
    if (t < xmin || t > xmax) continue;
    svg << "<line class=\"xtick\" x1=\"" << num(sx(t)) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(sx(t))
        << "\" y2=\"" << num(top + ph + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text class=\"xtick-label\" x=\"" << num(sx(t)) << "\" y=\"" << num(top + ph + 20)
        << "\" text-anchor=\"middle\">" << format_sig(t, 4) << "</text>\n";
  }
  for (double t : detail::nice_ticks(ymin, ymax)) {
    if (t < ymin || t > ymax) continue;
    svg << "<line class=\"ytick\" x1=\"" << num(left - 5) << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << num(left)
        << "\" y2=\"" << num(sy(t)) << "\" stroke=\"black\"/>\n";
    svg << "<text class=\"ytick-label\" x=\"" << num(left - 8) << "\" y=\"" << num(sy(t) + 4)
        << "\" text-anchor=\"end\">" << format_sig(t, 4) << "</text>\n";
  }
  svg << "</g>\n";
  svg << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 15)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">ln n</text>\n";
  svg << "<text x=\"20\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"14\" transform=\"rotate(-90 20 " << num(top + ph / 2) << ")\">"
      << (mode == PlotMode::LogLogGap ? "ln gap" : "L*gap") << "</text>\n";

  for (const auto& [kind_ord, pts] : by_kind) {
    const auto kind = static_cast<SweepKind>(kind_ord);
    const char* color = detail::kind_color(kind);
    svg << "<g class=\"series\" data-kind=\"" << letter(kind) << "\">\n";
    if (pts.size() == 1) {
      svg << "<circle class=\"marker\" cx=\"" << num(sx(pts[0].x)) << "\" cy=\"" << num(sy(pts[0].mid))
          << "\" r=\"4\" fill=\"" << color << "\"/>\n";
    } else {
      svg << "<polygon class=\"stripe\" fill=\"" << color << "\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
      for (const auto& p : pts) svg << num(sx(p.x)) << "," << num(sy(p.hi)) << " ";
      for (auto it = pts.rbegin(); it != pts.rend(); ++it) svg << num(sx(it->x)) << "," << num(sy(it->lo)) << " ";
      svg << "\"/>\n";
      svg << "<polyline class=\"median\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (const auto& p : pts) svg << num(sx(p.x)) << "," << num(sy(p.mid)) << " ";
      svg << "\"/>\n";
    }
    svg << "</g>\n";
  }

  svg << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  double ly = top + 10;
  for (const auto& [kind_ord, pts] : by_kind) {
    const auto kind = static_cast<SweepKind>(kind_ord);
    const double lx = left + pw + 15;
    svg << "<rect class=\"legend-swatch\" x=\"" << num(lx) << "\" y=\"" << num(ly) << "\" width=\"14\" height=\"10\" "
        << "fill=\"" << detail::kind_color(kind) << "\"/>\n";
    svg << "<text class=\"legend-label\" data-kind=\"" << letter(kind) << "\" x=\"" << num(lx + 20) << "\" y=\""
        << num(ly + 9) << "\">" << detail::xml_escape(legend_label(kind)) << "</text>\n";
    ly += 20;
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

inline void emit_plot(const QuartileSeries& series, PlotMode mode, const std::string& path) {
  write_text_file(path, render_plot(series, mode));
}

inline void emit_records_csv(std::span<const TrialRecord> records, const std::string& path) {
  write_text_file(path, records_csv(records));
}

inline void emit_series_csv(const QuartileSeries& series, const std::string& path) {
  write_text_file(path, series_csv(series));
}

}  // namespace cyclegap
