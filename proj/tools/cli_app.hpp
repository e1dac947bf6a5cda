#pragma once

// `cyclegap` command line: gen, gap, verify, sweep, plot.
// Exit codes: 0 success, 1 validation, 2 numerical failure, 3 I/O.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cyclegap/cyclegap.hpp"

namespace cyclegap::cli {

struct CliHooks {
  /// Expansion used by `verify`; tests swap in a broken one.
  Expander expander = [](const CondensedChain& c) { return expand(c); };
};

inline std::int64_t dense_limit_from_env(std::int64_t fallback) {
  const char* text = std::getenv("CYCLEGAP_DENSE_LIMIT");
  if (text == nullptr || *text == '\0') return fallback;
  const auto limit = parse_integer<std::int64_t>(text);
  if (limit < 1) throw Error(Errc::InvalidParameter, "CYCLEGAP_DENSE_LIMIT must be a positive integer");
  return limit;
}

struct GenFlags {
  std::optional<std::string> model;
  std::optional<std::int64_t> n;
  std::optional<double> L;
  std::optional<int> k;
  std::string kind = "complete";
  std::uint64_t seed = 1;

  bool any_given() const { return model || n || L || k; }
};

inline void add_gen_flags(CLI::App* app, GenFlags& g) {
  app->add_option("--model", g.model, "Random model")->check(CLI::IsMember({"arcmod", "cyclemod"}));
  app->add_option("--n", g.n, "Cycle size (cyclemod)");
  app->add_option("--L", g.L, "Mean arc length (arcmod)");
  app->add_option("--k", g.k, "Number of arcs");
  app->add_option("--kind", g.kind, "Interconnect: complete, regular:<d> or bc")->capture_default_str();
  app->add_option("--seed", g.seed, "Random seed")->capture_default_str();
}

inline InterconnectMatrix sample_kind(const InterconnectKind& kind, int k, Rng& rng) {
  switch (kind.tag) {
    case InterconnectKind::Tag::Complete: return complete(k);
    case InterconnectKind::Tag::RandomRegular: return random_regular(k, kind.degree, rng);
    case InterconnectKind::Tag::BollobasChung: return bollobas_chung(k, rng);
    case InterconnectKind::Tag::Custom: break;
  }
  throw Error(Errc::InvalidParameter, "no generator for kind 'custom'; pass a chain file with --in");
}

inline CondensedChain generate(const GenFlags& g) {
  if (!g.model) throw Error(Errc::InvalidParameter, "--model is required");
  if (!g.k) throw Error(Errc::InvalidParameter, "--k is required");
  if (*g.k < 1) throw Error(Errc::InvalidDimension, "--k must be >= 1");
  Rng rng(g.seed);
  Rng rng_a = rng.split(1);
  Rng rng_chain = rng.split(2);
  const auto a = sample_kind(parse_interconnect_kind(g.kind), *g.k, rng_a);
  if (*g.model == "arcmod") {
    if (g.n) throw Error(Errc::InvalidParameter, "--n does not apply to --model arcmod; use --L");
    if (!g.L) throw Error(Errc::InvalidParameter, "--model arcmod needs --L");
    if (!(*g.L >= 1.0)) throw Error(Errc::InvalidParameter, "--L must be >= 1");
    return sample_arcmod(*g.L, *g.k, a, rng_chain);
  }
  if (g.L) throw Error(Errc::InvalidParameter, "--L does not apply to --model cyclemod; use --n");
  if (!g.n) throw Error(Errc::InvalidParameter, "--model cyclemod needs --n");
  return sample_cyclemod(*g.n, *g.k, a, rng_chain);
}

inline void write_or_print(const std::optional<std::string>& path, const std::string& text, std::ostream& out) {
  if (path) {
    write_text_file(*path, text);
  } else {
    out << text;
  }
}

// --- subcommands ---

inline int cmd_gen(const GenFlags& g, const std::optional<std::string>& out_path, std::ostream& out) {
  write_or_print(out_path, to_json(generate(g)).dump(2) + "\n", out);
  return 0;
}

struct GapFlags {
  GenFlags gen;
  std::optional<std::string> in;
  bool symmetrized = false;
  std::optional<std::string> spectrum_out;
};

inline int cmd_gap(const GapFlags& f, std::ostream& out, std::ostream& err) {
  if (f.in && f.gen.any_given()) throw Error(Errc::InvalidParameter, "--in cannot be combined with generation flags");
  const auto start = std::chrono::steady_clock::now();
  const CondensedChain chain =
      f.in ? chain_from_json(parse_json_text(read_text_file(*f.in), *f.in)) : generate(f.gen);
  const auto limit = dense_limit_from_env(kDefaultDenseLimit);
  const StochasticMatrix m = expand(chain);
  const Spectrum spec =
      f.symmetrized ? eigenvalues_symmetric(symmetrize(m), limit) : eigenvalues_dense(m, limit);
  const double gap = absolute_spectral_gap(spec);
  const double second = second_largest_modulus(spec);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (f.spectrum_out) write_text_file(*f.spectrum_out, spectrum_csv(spec));
  out << "matrix: " << (f.symmetrized ? "symmetrized" : "directed") << "\n";
  out << "gap: " << format_sig(gap) << "\n";
  out << "second_modulus: " << format_sig(second) << "\n";
  out << "N: " << m.size() << "\n";
  out << "wall_time: " << format_sig(wall) << "\n";
  if (gap == 0.0) {
    err << "warning: gap is 0; an eigenvalue other than 1 lies on the unit circle (periodic or reducible chain)\n";
  }
  return 0;
}

struct VerifyFlags {
  std::string suite = "all";
  std::uint64_t seed = 1;
  std::optional<int> trials;
};

inline int cmd_verify(const VerifyFlags& f, const CliHooks& hooks, std::ostream& out, std::ostream& err) {
  VerifyOptions opts;
  opts.seed = f.seed;
  opts.trials = f.trials;
  opts.expander = hooks.expander;
  if (f.trials && *f.trials < 1) throw Error(Errc::InvalidParameter, "--trials must be >= 1");
  const auto summary = run_suite(parse_suite(f.suite), opts, [&](const CheckReport& r) { out << r.line() << "\n"; });
  err << "verify: " << summary.passed << " passed, " << summary.failed << " failed, " << summary.not_applicable
      << " n/a\n";
  return summary.exit_code();
}

struct SweepFlags {
  std::optional<std::string> config;
  int workers = 1;
  std::string out_dir = ".";
  bool resume = false;
  bool paper_scale = false;
};

inline ExperimentConfig load_sweep_config(const SweepFlags& f) {
  json j = json::object();
  if (f.config) j = parse_json_text(read_text_file(*f.config), *f.config);
  if (f.paper_scale) {
    if (j.is_object() && j.contains("preset") && j.at("preset") != "paper") {
      throw Error(Errc::InvalidParameter, "--paper-scale conflicts with the config preset");
    }
    if (j.is_object()) j["preset"] = "paper";
  }
  auto config = config_from_json(j);
  config.dense_limit = dense_limit_from_env(config.dense_limit);
  return config;
}

inline int cmd_sweep(const SweepFlags& f, std::ostream& out, std::ostream& err) {
  const auto config = load_sweep_config(f);
  config.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(f.out_dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create output directory '" + f.out_dir + "': " + ec.message());
  const fs::path dir(f.out_dir);
  const std::string records_path = (dir / "records.csv").string();
  const std::string checks_path = (dir / "checks.jsonl").string();

  SweepOptions opts;
  opts.workers = f.workers;
  if (f.resume && fs::exists(records_path)) opts.existing = read_records_csv(read_text_file(records_path));
  write_text_file((dir / "config.json").string(), to_json(config).dump(2) + "\n");

  // Rows are appended as trials finish so an interrupted run can resume;
  // the file is rewritten in sorted order at the end.
  write_text_file(records_path, records_csv(opts.existing));
  std::ofstream partial(records_path, std::ios::app);
  std::ofstream checks;
  if (config.theory_checks) {
    checks.open(checks_path, f.resume ? std::ios::app : std::ios::trunc);
    if (!checks) throw Error(Errc::Io, "cannot open '" + checks_path + "' for writing");
  }
  if (!partial) throw Error(Errc::Io, "cannot open '" + records_path + "' for appending");
  opts.on_record = [&](const TrialRecord& r) {
    partial << record_csv_row(r) << "\n" << std::flush;
    for (const auto& c : r.checks) checks << c.line() << "\n";
    if (!r.checks.empty()) checks.flush();
  };

  const auto result = run_sweep(config, std::move(opts));
  partial.close();
  emit_records_csv(result.records, records_path);
  const auto series = quartiles(result.records);
  emit_series_csv(series, (dir / "series.csv").string());
  emit_plot(series, PlotMode::LogLogGap, (dir / "loglog.svg").string());
  emit_plot(series, PlotMode::CompensatedGap, (dir / "compensated.svg").string());

  out << "records: " << result.records.size() << " (" << result.resumed << " resumed)\n";
  out << "failures: " << result.failures << "\n";
  out << "zero_gaps: " << result.zero_gaps << "\n";
  out << "rate_violations: " << result.rate_violations << "\n";
  for (auto kind : config.kinds) {
    const auto rows = rows_of_kind(series, kind);
    if (rows.size() < 4) continue;
    try {
      const auto fit = fit_slope(series, kind);
      std::vector<double> comp;
      for (const auto& row : rows) comp.push_back(row.median_comp);
      out << "slope[" << to_string(kind) << "]: " << format_sig(fit.slope) << "\n";
      out << "cv_compensated[" << to_string(kind) << "]: " << format_sig(coefficient_of_variation(comp)) << "\n";
    } catch (const Error& e) {
      err << "warning: no fit for " << to_string(kind) << ": " << e.what() << "\n";
    }
  }
  if (result.dropped > 0) err << "warning: ignored " << result.dropped << " records not produced by this config\n";
  if (result.zero_gaps > 0) err << "warning: " << result.zero_gaps << " trials had gap 0 (periodic or reducible)\n";
  if (result.failures > 0) err << "warning: " << result.failures << " trials failed and were left out of the quartiles\n";
  return 0;
}

struct PlotFlags {
  std::string in;
  std::string mode = "loglog";
  std::string out;
};

inline int cmd_plot(const PlotFlags& f) {
  const auto mode = parse_plot_mode(f.mode);
  emit_plot(read_series_csv(read_text_file(f.in)), mode, f.out);
  return 0;
}

// --- entry point ---

inline int exit_code_for(const Error& e) { return static_cast<int>(e.category()); }

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const CliHooks& hooks = {}) {
  CLI::App app{"Spectral gaps of randomly interconnected cycle Markov chains", "cyclegap"};
  app.require_subcommand(1);

  GenFlags gen;
  std::optional<std::string> gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "Sample a chain and print it as JSON");
  add_gen_flags(gen_cmd, gen);
  gen_cmd->add_option("--out", gen_out, "Write the JSON here instead of stdout");

  GapFlags gap;
  auto* gap_cmd = app.add_subcommand("gap", "Absolute spectral gap of a chain");
  gap_cmd->add_option("--in", gap.in, "Chain JSON file (otherwise generate with the gen flags)");
  add_gen_flags(gap_cmd, gap.gen);
  gap_cmd->add_flag("--symmetrized", gap.symmetrized, "Use (M + M^T)/2");
  gap_cmd->add_option("--spectrum-out", gap.spectrum_out, "Write the full spectrum as CSV");

  VerifyFlags verify;
  auto* verify_cmd = app.add_subcommand("verify", "Run property suites, one JSON line per check");
  verify_cmd->add_option("--suite", verify.suite, "invariants, equivalence, lemmas or all")
      ->check(CLI::IsMember({"invariants", "equivalence", "lemmas", "all"}))
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify.seed, "Base seed")->capture_default_str();
  verify_cmd->add_option("--trials", verify.trials,
                         "Instances for invariants (default 1000), equivalence (200) and lemma eigen checks (50)");

  SweepFlags sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Gap sweep over n; writes CSV and SVG to --out-dir");
  sweep_cmd->add_option("--config", sweep.config, "Config JSON (default: desk preset)");
  sweep_cmd->add_option("--workers", sweep.workers, "Worker threads")->capture_default_str();
  sweep_cmd->add_option("--out-dir", sweep.out_dir, "Output directory")->capture_default_str();
  sweep_cmd->add_flag("--resume", sweep.resume, "Skip trials already in <out-dir>/records.csv");
  sweep_cmd->add_flag("--paper-scale", sweep.paper_scale, "ln n up to 8.0 with 500 trials per point");

  PlotFlags plot;
  auto* plot_cmd = app.add_subcommand("plot", "Render series.csv as SVG");
  plot_cmd->add_option("--in", plot.in, "Series CSV")->required();
  plot_cmd->add_option("--mode", plot.mode, "loglog or compensated")
      ->check(CLI::IsMember({"loglog", "compensated"}))
      ->capture_default_str();
  plot_cmd->add_option("--out", plot.out, "SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorCategory::Validation);
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen(gen, gen_out, out);
    if (gap_cmd->parsed()) return cmd_gap(gap, out, err);
    if (verify_cmd->parsed()) return cmd_verify(verify, hooks, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep, out, err);
    if (plot_cmd->parsed()) return cmd_plot(plot);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorCategory::Numerical);
  }
  return static_cast<int>(ErrorCategory::Validation);
}

}  // namespace cyclegap::cli
