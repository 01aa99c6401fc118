// Copyright 2026 The qtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qtraj/ensemble_validator.hpp"
#include "qtraj/entropy_ledger.hpp"
#include "qtraj/error.hpp"
#include "qtraj/random.hpp"

namespace qtraj::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::size_t kValidationSampleTimes = 26;
constexpr std::size_t kDecompositionPairs = 1000;
constexpr double kIdentityTolerance = 1e-10;
constexpr double kStandardLimitTolerance = 1e-9;

fs::path output_dir(const ExperimentConfig& cfg, const RunOverrides& ov) {
  fs::path dir = ov.out_dir.value_or(cfg.outputs.dir);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kInvalidParameter, "cannot write " + path.string());
  return f;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json estimate_json(const IFTEstimate& e) {
  return {{"coordinate_label", e.coordinate_label},
          {"coordinate_value", e.coordinate_value},
          {"mean", number_or_null(e.mean)},
          {"std_error", number_or_null(e.std_error)},
          {"zeta", number_or_null(e.zeta)},
          {"n", e.n_trajectories},
          {"n_discarded", e.n_discarded},
          {"weight_q95", number_or_null(e.weight_q95)},
          {"unreliable", e.unreliable()}};
}

void write_ledger_csv(const fs::path& path, const std::vector<TrajectoryOutcome>& outcomes) {
  std::ofstream f = open_output(path);
  f << "traj_id,N_jumps,jump_flux,drift_flux,thermal_total,nonthermal_jump_total,kappa_sum,W\n";
  const double nan = std::nan("");
  for (const TrajectoryOutcome& o : outcomes) {
    const LedgerSummary l = o.ledger.value_or(LedgerSummary{nan, nan, nan, nan, nan});
    f << o.index << ',' << o.n_jumps << ',' << format_double(l.jump_flux) << ',' << format_double(l.drift_flux)
      << ',' << format_double(l.thermal_total) << ',' << format_double(l.nonthermal_jump_total) << ','
      << format_double(l.kappa_sum) << ',' << format_double(o.discarded ? nan : o.weight) << '\n';
  }
}

void write_dump(const fs::path& path, const std::vector<TrajectoryOutcome>& outcomes) {
  std::ofstream f = open_output(path);
  for (const TrajectoryOutcome& o : outcomes) {
    if (o.forward) f << to_json_line(*o.forward, o.index) << '\n';
  }
}

void write_sweep_csv(const fs::path& path, const std::string& label, const std::vector<SweepPoint>& points) {
  std::ofstream f = open_output(path);
  f << "coordinate_label,coordinate_value,mean,std_error,zeta,n,n_discarded,weight_q95,error\n";
  for (const SweepPoint& p : points) {
    f << csv_escape(label) << ',' << format_double(p.coordinate) << ',';
    if (p.estimate) {
      const IFTEstimate& e = *p.estimate;
      f << format_double(e.mean) << ',' << format_double(e.std_error) << ',' << format_double(e.zeta) << ','
        << e.n_trajectories << ',' << e.n_discarded << ',' << format_double(e.weight_q95) << ',';
    } else {
      f << ",,,,,,";
    }
    f << csv_escape(p.error) << '\n';
  }
}

void write_plot_data(const fs::path& path, const std::string& label, const std::vector<SweepPoint>& points) {
  std::ofstream f = open_output(path);
  f << "# " << label << " mean std_error\n";
  for (const SweepPoint& p : points) {
    if (!p.estimate) continue;
    f << format_double(p.coordinate) << ' ' << format_double(p.estimate->mean) << ' '
      << format_double(p.estimate->std_error) << '\n';
  }
}

void write_summary(const fs::path& path, const ExperimentConfig& cfg, const EstimatorOptions& opt,
                   const std::vector<SweepPoint>& points) {
  json doc;
  doc["name"] = cfg.name;
  doc["model_kind"] = model_kind(cfg.model);
  doc["master_seed"] = opt.seed;
  doc["drift_reversal"] = to_string(opt.mode);
  doc["config"] = json::parse(echo_config(cfg));
  json rows = json::array();
  for (const SweepPoint& p : points) {
    json row = p.estimate ? estimate_json(*p.estimate) : json::object();
    row["coordinate_value"] = p.coordinate;
    row["error"] = p.error;
    rows.push_back(row);
  }
  doc["points"] = rows;
  open_output(path) << doc.dump(2) << '\n';
}

void report_estimate(std::ostream& log, const IFTEstimate& e) {
  log << "  mean=" << format_double(e.mean) << " se=" << format_double(e.std_error) << " zeta="
      << format_double(e.zeta) << " n=" << e.n_trajectories << " discarded=" << e.n_discarded
      << (e.unreliable() ? " UNRELIABLE" : "") << '\n';
}

std::string label_of(const ExperimentConfig& cfg) { return cfg.sweep ? cfg.sweep->coordinate : ""; }

std::string short_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

StateVector uniform_superposition(Index dim) {
  Vector v = Vector::Constant(dim, Complex(1.0 / std::sqrt(static_cast<double>(dim)), 0.0));
  return StateVector(std::move(v));
}

StateVector random_state(CounterRng& rng, Index dim) {
  for (;;) {
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = Complex(rng.uniform() - 0.5, rng.uniform() - 0.5);
    if (v.squaredNorm() > 1e-6) return normalize(StateVector(std::move(v)));
  }
}

CheckResult check_ensemble(const LindbladModel& model, const EstimatorOptions& opt, const RunOverrides& ov,
                           const fs::path& csv_path) {
  const EnsembleComparison cmp =
      compare_ensemble_to_master_equation(model, opt, default_sampler(model), kValidationSampleTimes);
  std::ofstream f = open_output(csv_path);
  f << "t,trace_distance\n";
  for (std::size_t i = 0; i < cmp.times.size(); ++i) {
    f << format_double(cmp.times[i]) << ',' << format_double(cmp.distances[i]) << '\n';
  }
  return {"ensemble_consistency", cmp.max_distance <= ov.threshold,
          "max_trace_distance=" + format_double(cmp.max_distance) + " threshold=" + short_double(ov.threshold) +
              " n=" + std::to_string(cmp.n_trajectories)};
}

CheckResult check_decomposition(const LindbladModel& model, const EstimatorOptions& opt) {
  CounterRng rng(derive_seed(opt.seed, 0xdec0u), 0);
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::size_t attempt = 0; attempt < 20 * kDecompositionPairs && checked < kDecompositionPairs; ++attempt) {
    const std::size_t channel = static_cast<std::size_t>(rng.uniform() * static_cast<double>(model.channel_count()));
    if (!model.has_backward_rate(channel)) continue;
    const double t = rng.uniform() * opt.horizon;
    const double g = model.rate(channel, t);
    const double gb = model.backward_rate(channel, t);
    if (!(g > 0.0) || !(gb > 0.0)) continue;
    const StateVector chi = random_state(rng, model.dim());
    const StateVector post_unnormalized(apply(model.jump_operator(channel), chi).amplitudes());
    if (!(norm_sq(post_unnormalized) > 1e-8)) continue;
    const double rd = direct_rate(model, channel, t, chi);
    const double rr = reversed_rate(model, channel, t, chi);
    EntropyLedger ledger;
    accumulate_jump(ledger, JumpEvent{t, 0, channel, chi, normalize(post_unnormalized)}, model);
    const JumpEntropy& j = ledger.jumps().front();
    const double lhs = j.thermal + j.nonthermal;
    const double rhs = -std::log(rd / rr);
    const double eta_cross = 1.0 - g * rr / (gb * rd);
    worst = std::max({worst, std::abs(lhs - rhs), std::abs(j.eta - eta_cross)});
    ++checked;
  }
  if (checked == 0) return {"decomposition_identity", true, "not applicable (no channel with two positive rates)"};
  return {"decomposition_identity", worst <= kIdentityTolerance,
          "pairs=" + std::to_string(checked) + " max_error=" + format_double(worst)};
}

CheckResult check_order(const LindbladModel& model, const EstimatorOptions& opt) {
  const double t = 0.5 * opt.horizon;
  const Matrix omega = model.decay_operator(t).matrix();
  const double norm = omega.jacobiSvd().singularValues()(0);
  if (!(norm > 0.0)) return {"appendix_order", true, "not applicable (no decay at t=T/2)"};
  const StateVector psi = uniform_superposition(model.dim());
  double err[3];
  double lead = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double dt = 1e-2 / (norm * static_cast<double>(1 << i));
    const double expansion = appendix_var1_expansion(model, t, dt, psi);
    err[i] = std::abs(exact_step_var1(model, t, dt, psi) - expansion);
    if (i == 0) lead = std::abs(expansion);
  }
  if (err[0] <= 1e-13 * std::max(lead, 1e-300) || lead < 1e-300) {
    return {"appendix_order", true, "expansion exact to rounding"};
  }
  const double r1 = err[0] / err[1];
  const double r2 = err[1] / err[2];
  const bool pass = r1 >= 6.0 && r1 <= 10.0 && r2 >= 6.0 && r2 <= 10.0;
  return {"appendix_order", pass, "ratios=" + format_double(r1) + "," + format_double(r2)};
}

CheckResult check_standard_limit(const LindbladModel& model, const EstimatorOptions& opt) {
  const std::vector<TrajectoryOutcome> outcomes = run_trajectories(model, opt, default_sampler(model));
  double worst = 0.0;
  std::size_t discarded = 0;
  for (const TrajectoryOutcome& o : outcomes) {
    if (o.discarded) {
      ++discarded;
      continue;
    }
    worst = std::max(worst, std::abs(o.weight - 1.0));
  }
  const IFTEstimate e = summarize(outcomes);
  const bool pass = discarded == 0 && worst <= kStandardLimitTolerance && std::abs(e.zeta) <= kStandardLimitTolerance;
  return {"standard_limit", pass,
          "zeta=" + format_double(e.zeta) + " max|W-1|=" + format_double(worst) +
              " discarded=" + std::to_string(discarded)};
}

int parse_failure(std::ostream& err, const std::string& msg) {
  err << "config error: " << msg << '\n';
  return kExitConfigError;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

InitialSampler default_sampler(const LindbladModel& model) {
  if (model.dim() == 2) return sample_initial_state;
  const Index dim = model.dim();
  return [dim](CounterRng& rng) {
    const Index i = std::min<Index>(dim - 1, static_cast<Index>(rng.uniform() * static_cast<double>(dim)));
    return StateVector::basis(dim, i);
  };
}

EstimatorOptions estimator_options(const ExperimentConfig& cfg, const RunOverrides& ov) {
  EstimatorOptions opt;
  opt.n_trajectories = cfg.run.n_trajectories;
  opt.dt = cfg.run.dt;
  opt.horizon = horizon(cfg.run);
  opt.seed = ov.seed.value_or(cfg.run.master_seed);
  opt.threads = ov.threads;
  opt.mode = cfg.run.drift_reversal;
  return opt;
}

int run_simulate(const ExperimentConfig& cfg, const RunOverrides& ov, std::ostream& log) {
  EstimatorOptions opt = estimator_options(cfg, ov);
  opt.compute_ledger = true;
  opt.keep_records = ov.dump_trajectories || cfg.outputs.dump_trajectories;
  const fs::path dir = output_dir(cfg, ov);
  const std::string label = label_of(cfg);

  std::vector<SweepPoint> points;
  if (!cfg.sweep) {
    const LindbladModel model = build_model(cfg);
    const std::vector<TrajectoryOutcome> outcomes = run_trajectories(model, opt, default_sampler(model));
    write_ledger_csv(dir / (cfg.name + "_ledger.csv"), outcomes);
    if (opt.keep_records) write_dump(dir / (cfg.name + "_trajectories.jsonl"), outcomes);
    SweepPoint p;
    p.estimate = summarize(outcomes);
    p.estimate->coordinate_label = label;
    points.push_back(std::move(p));
  } else {
    // Same seeding as the sweep command, so the two agree point by point.
    for (std::size_t i = 0; i < cfg.sweep->values.size(); ++i) {
      SweepPoint p;
      p.coordinate = cfg.sweep->values[i];
      EstimatorOptions point_opt = opt;
      point_opt.seed = derive_seed(opt.seed, i);
      try {
        const LindbladModel model = build_model(cfg, p.coordinate);
        const std::vector<TrajectoryOutcome> outcomes = run_trajectories(model, point_opt, default_sampler(model));
        const std::string suffix = "_" + std::to_string(i);
        write_ledger_csv(dir / (cfg.name + "_ledger" + suffix + ".csv"), outcomes);
        if (opt.keep_records) write_dump(dir / (cfg.name + "_trajectories" + suffix + ".jsonl"), outcomes);
        p.estimate = summarize(outcomes);
        p.estimate->coordinate_label = label;
        p.estimate->coordinate_value = p.coordinate;
      } catch (const Error& e) {
        p.error = e.what();
      }
      points.push_back(std::move(p));
    }
    write_sweep_csv(dir / (cfg.name + "_sweep.csv"), label, points);
  }
  write_summary(dir / (cfg.name + "_summary.json"), cfg, opt, points);

  bool failed = false;
  for (const SweepPoint& p : points) {
    log << cfg.name;
    if (cfg.sweep) log << ' ' << label << '=' << short_double(p.coordinate);
    log << '\n';
    if (p.estimate) {
      report_estimate(log, *p.estimate);
    } else {
      log << "  error: " << p.error << '\n';
      failed = true;
    }
  }
  return failed ? kExitRuntimeGuard : kExitOk;
}

int run_sweep(const ExperimentConfig& cfg, const RunOverrides& ov, std::ostream& log) {
  if (!cfg.sweep) throw ConfigError("field 'sweep': missing; the sweep command needs a sweep block");
  const EstimatorOptions opt = estimator_options(cfg, ov);
  const fs::path dir = output_dir(cfg, ov);
  const LindbladModel probe = build_model(cfg, cfg.sweep->values.front());
  const std::vector<SweepPoint> points =
      sweep([&](double c) { return build_model(cfg, c); }, cfg.sweep->values, opt, default_sampler(probe),
            cfg.sweep->coordinate);
  write_sweep_csv(dir / (cfg.name + "_sweep.csv"), cfg.sweep->coordinate, points);
  write_plot_data(dir / (cfg.name + "_plot.dat"), cfg.sweep->coordinate, points);
  write_summary(dir / (cfg.name + "_summary.json"), cfg, opt, points);
  bool failed = false;
  for (const SweepPoint& p : points) {
    log << cfg.name << ' ' << cfg.sweep->coordinate << '=' << short_double(p.coordinate) << '\n';
    if (p.estimate) {
      report_estimate(log, *p.estimate);
    } else {
      log << "  error: " << p.error << '\n';
      failed = true;
    }
  }
  return failed ? kExitRuntimeGuard : kExitOk;
}

int run_validate(const ExperimentConfig& cfg, const RunOverrides& ov, std::ostream& log) {
  const EstimatorOptions opt = estimator_options(cfg, ov);
  const fs::path dir = output_dir(cfg, ov);
  const std::optional<double> coordinate =
      cfg.sweep ? std::optional<double>(cfg.sweep->values.front()) : std::nullopt;
  const LindbladModel model = build_model(cfg, coordinate);

  std::vector<CheckResult> checks;
  checks.push_back(check_ensemble(model, opt, ov, dir / (cfg.name + "_validation.csv")));
  checks.push_back(check_decomposition(model, opt));
  checks.push_back(check_order(model, opt));
  if (std::holds_alternative<EigenstateModel>(cfg.model)) checks.push_back(check_standard_limit(model, opt));

  json report = json::array();
  bool all = true;
  for (const CheckResult& c : checks) {
    log << (c.pass ? "PASS " : "FAIL ") << c.name << ' ' << c.detail << '\n';
    report.push_back({{"check", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    all = all && c.pass;
  }
  open_output(dir / (cfg.name + "_validation.json")) << report.dump(2) << '\n';
  return all ? kExitOk : kExitValidationFailure;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"qtraj: quantum trajectory entropy and fluctuation-theorem simulator"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  unsigned threads = 1;
  bool dump = false;
  double threshold = 0.05;
  bool echo = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "Master seed (overrides config and QTRAJ_SEED)");
    sub->add_option("--threads", threads, "Worker threads, 0 = all cores")->capture_default_str();
    sub->add_option("--out", out_dir, "Output directory (overrides config and QTRAJ_OUT)");
    sub->add_flag("--echo", echo, "Print the normalized config with derived products");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "Per-trajectory ledgers and the IFT estimate");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "IFT estimate over the configured sweep coordinate");
  CLI::App* validate = app.add_subcommand("validate", "Ensemble and invariant checks");
  for (CLI::App* sub : {simulate, sweep_cmd, validate}) add_common(sub);
  simulate->add_flag("--dump-trajectories", dump, "Write forward trajectories as JSON lines");
  validate->add_option("--threshold", threshold, "Trace-distance bound")->capture_default_str();

  std::vector<std::string> argv_storage = args;
  argv_storage.insert(argv_storage.begin(), "qtraj");
  std::vector<char*> argv;
  for (std::string& s : argv_storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  RunOverrides ov;
  ov.threads = threads;
  ov.dump_trajectories = dump;
  ov.threshold = threshold;
  try {
    if (seed) {
      ov.seed = seed;
    } else if (const char* env = std::getenv("QTRAJ_SEED"); env && *env) {
      std::size_t used = 0;
      const std::string text(env);
      const unsigned long long v = std::stoull(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      ov.seed = v;
    }
  } catch (const std::exception&) {
    return parse_failure(err, "QTRAJ_SEED is not an unsigned integer");
  }
  if (out_dir) {
    ov.out_dir = out_dir;
  } else if (const char* env = std::getenv("QTRAJ_OUT"); env && *env) {
    ov.out_dir = std::string(env);
  }

  try {
    const ExperimentConfig cfg = load_config(config_path);
    if (echo) out << echo_config(cfg);
    if (simulate->parsed()) return run_simulate(cfg, ov, out);
    if (sweep_cmd->parsed()) return run_sweep(cfg, ov, out);
    return run_validate(cfg, ov, out);
  } catch (const ConfigError& e) {
    return parse_failure(err, e.what());
  } catch (const Error& e) {
    err << "runtime guard: " << to_string(e.code()) << ": " << e.what() << '\n';
    return kExitRuntimeGuard;
  } catch (const fs::filesystem_error& e) {
    err << "output error: " << e.what() << '\n';
    return kExitRuntimeGuard;
  }
}

}  // namespace qtraj::cli
