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

// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"
#include "qtraj/ensemble_validator.hpp"
#include "qtraj/entropy_ledger.hpp"
#include "qtraj/ift_estimator.hpp"
#include "two_by_two.hpp"

namespace {

using namespace qtraj;
using namespace qtraj::cli;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

ExperimentConfig recipe(const std::string& name) {
  return load_config(std::string(QTRAJ_RECIPES_DIR) + "/" + name + ".cfg");
}

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

struct SweepRun {
  std::vector<double> coordinates;
  std::vector<IFTEstimate> estimates;
  std::string error;
  double seconds = 0.0;
};

// Sweeps a recipe exactly as the sweep command does.
SweepRun run_recipe_sweep(const ExperimentConfig& cfg) {
  SweepRun out;
  const auto start = Clock::now();
  const EstimatorOptions opt = estimator_options(cfg, RunOverrides{});
  const LindbladModel base = build_model(cfg, cfg.sweep->values.front());
  const std::vector<SweepPoint> points = sweep([&](double c) { return build_model(cfg, c); }, cfg.sweep->values, opt,
                                               default_sampler(base), cfg.sweep->coordinate);
  for (const SweepPoint& p : points) {
    if (!p.estimate) {
      out.error = p.error;
      continue;
    }
    out.coordinates.push_back(p.coordinate);
    out.estimates.push_back(*p.estimate);
  }
  out.seconds = seconds_since(start);
  return out;
}

std::string trend_table(const SweepRun& run) {
  std::string s = " [";
  for (std::size_t i = 0; i < run.estimates.size(); ++i) {
    if (i) s += ", ";
    s += fmt(run.coordinates[i], 3) + ":" + fmt(run.estimates[i].mean, 5) + "+-" + fmt(run.estimates[i].std_error, 2);
  }
  return s + "]";
}

double combined_se(const IFTEstimate& a, const IFTEstimate& b) {
  return std::hypot(a.std_error, b.std_error);
}

std::vector<double> means(const SweepRun& run) {
  std::vector<double> m;
  for (const IFTEstimate& e : run.estimates) m.push_back(e.mean);
  return m;
}

Outcome criterion1(IFTEstimate& estimate_out) {
  const auto start = Clock::now();
  const ExperimentConfig cfg = recipe("eigenstate");
  const LindbladModel model = build_model(cfg);
  const EstimatorOptions opt = estimator_options(cfg, RunOverrides{});
  const std::vector<TrajectoryOutcome> outcomes = run_trajectories(model, opt, default_sampler(model));
  double worst = 0.0;
  std::size_t jumps = 0;
  bool discarded = false;
  for (const TrajectoryOutcome& o : outcomes) {
    discarded |= o.discarded;
    worst = std::max(worst, std::abs(o.weight - 1.0));
    jumps += o.n_jumps;
  }
  estimate_out = summarize(outcomes);
  const double secs = seconds_since(start);
  const bool pass = model.dim() == 3 && outcomes.size() == 1000 && !discarded && worst <= 1e-9 &&
                    std::abs(estimate_out.zeta) <= 1e-9 && secs < 30.0;
  return {pass, "n=" + std::to_string(outcomes.size()) + " jumps=" + std::to_string(jumps) + " max|W-1|=" +
                    fmt(worst, 3) + " zeta=" + fmt(estimate_out.zeta, 3) + " runtime=" + fmt(secs, 3) + "s"};
}

Outcome criterion2() {
  std::mt19937_64 gen(20260101);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> positive(0.01, 2.0);
  double worst_decomposition = 0.0, worst_eta = 0.0;
  const int pairs = 10000;
  for (int trial = 0; trial < pairs; ++trial) {
    const Index dim = 2 + trial % 3;
    Matrix a(dim, dim);
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < dim; ++j) a(i, j) = Complex(normal(gen), normal(gen));
    const LindbladModel m(dim, {},
                          {Channel{Operator(a), Schedule::constant(positive(gen)), 1, "a"},
                           Channel{Operator(Matrix(a.adjoint())), Schedule::constant(positive(gen)), 0, "a+"}});
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = Complex(normal(gen), normal(gen));
    const StateVector chi = normalize(StateVector(v));
    const std::size_t ch = static_cast<std::size_t>(trial % 2);
    const double rd = direct_rate(m, ch, 0.0, chi);
    const double rr = reversed_rate(m, ch, 0.0, chi);
    EntropyLedger ledger;
    accumulate_jump(ledger, JumpEvent{0.0, 0, ch, chi, normalize(apply(m.jump_operator(ch), chi))}, m);
    const JumpEntropy& j = ledger.jumps().front();
    worst_decomposition = std::max(worst_decomposition, std::abs(j.thermal + j.nonthermal + std::log(rd / rr)));
    const double cross = 1.0 - m.rate(ch, 0.0) * rr / (m.backward_rate(ch, 0.0) * rd);
    worst_eta = std::max(worst_eta, std::abs(j.eta - cross));
  }
  return {worst_decomposition <= 1e-10 && worst_eta <= 1e-10,
          "pairs=" + std::to_string(pairs) + " max_decomposition_error=" + fmt(worst_decomposition, 3) +
              " max_eta_error=" + fmt(worst_eta, 3)};
}

Outcome criterion3() {
  const double gamma = 0.3, gamma_b = 0.1;
  const LindbladModel m = build_two_level_thermal(0.0, 1.0, 0.5, 0.2);
  const StateVector chi = normalize(StateVector{1.0, 1.0});

  const oracle::V2 c = oracle::normalized({1.0, 1.0});
  const oracle::M2 a = oracle::sigma_minus();
  const oracle::M2 lambda = oracle::mul(oracle::dagger(a), a);
  const double l1 = oracle::braket(c, lambda, c).real();
  const double l2 = oracle::braket(c, oracle::mul(lambda, lambda), c).real();
  const double rd_oracle = gamma * oracle::norm2(oracle::apply(a, c));
  const double rr_oracle = gamma_b * l2 / l1;
  const double eta_oracle = (l1 * l1 - l2) / (l1 * l1);

  EntropyLedger ledger;
  accumulate_jump(ledger, JumpEvent{0.0, 0, 0, chi, two_level::ground()}, m);
  const JumpEntropy& j = ledger.jumps().front();
  const double e_rd = std::abs(direct_rate(m, 0, 0.0, chi) - rd_oracle);
  const double e_rr = std::abs(reversed_rate(m, 0, 0.0, chi) - rr_oracle);
  const double e_eta = std::abs(j.eta - eta_oracle);
  const double e_nt = std::abs(j.nonthermal - std::log(1.0 - eta_oracle));
  const bool oracle_ok = std::abs(rd_oracle - gamma / 2) <= 1e-12 && std::abs(rr_oracle - gamma_b) <= 1e-12 &&
                         std::abs(eta_oracle + 1.0) <= 1e-12 && std::abs(std::log(1.0 - eta_oracle) - std::log(2.0)) <= 1e-12;
  const double worst = std::max({e_rd, e_rr, e_eta, e_nt});
  return {oracle_ok && worst <= 1e-12, "R^D=" + fmt(direct_rate(m, 0, 0.0, chi), 17) + " R^R=" +
                                           fmt(reversed_rate(m, 0, 0.0, chi), 17) + " eta=" + fmt(j.eta, 17) +
                                           " nonthermal=" + fmt(j.nonthermal, 17) + " max_error=" + fmt(worst, 3)};
}

Outcome criterion4() {
  const double gamma = 1.0;
  const LindbladModel m(2, {}, {Channel{two_level::sigma_minus(), Schedule::constant(gamma), {}, "decay"}});
  const StateVector psi = normalize(StateVector{1.0, 1.0});
  const double dts[3] = {1e-2, 5e-3, 2.5e-3};
  double err[3], lead[3];
  for (int i = 0; i < 3; ++i) {
    lead[i] = appendix_var1_expansion(m, 0.0, dts[i], psi);
    err[i] = std::abs(exact_step_var1(m, 0.0, dts[i], psi) - lead[i]);
  }
  const double r1 = err[0] / err[1], r2 = err[1] / err[2];
  double worst_rel = 0.0;
  for (int i = 0; i < 3; ++i) {
    worst_rel = std::max(worst_rel, std::abs(lead[i] / (gamma * gamma * dts[i] * dts[i] / 4.0) - 1.0));
  }
  const bool pass = r1 >= 6.0 && r1 <= 10.0 && r2 >= 6.0 && r2 <= 10.0 && worst_rel <= 0.02;
  return {pass, "ratios=" + fmt(r1, 5) + "," + fmt(r2, 5) + " leading/(g^2 dt^2/4)-1 max=" + fmt(worst_rel, 3)};
}

Outcome criterion5() {
  const auto start = Clock::now();
  const ExperimentConfig fig3 = recipe("fig3");
  const LindbladModel direct = build_model(fig3, 1.0);
  ExperimentConfig homodyne_cfg = fig3;
  homodyne_cfg.model = HomodyneModel{std::get<DirectModel>(fig3.model).drive, 2.0, 0.6};
  homodyne_cfg.sweep.reset();
  const LindbladModel homodyne = build_model(homodyne_cfg);

  EstimatorOptions opt = estimator_options(fig3, RunOverrides{});
  opt.n_trajectories = 10000;
  const EnsembleComparison a = compare_ensemble_to_master_equation(direct, opt, sample_initial_state, 26);
  const EnsembleComparison b = compare_ensemble_to_master_equation(homodyne, opt, sample_initial_state, 26);
  const double secs = seconds_since(start);
  const bool pass = a.max_distance <= 0.05 && b.max_distance <= 0.05 && secs < 300.0;
  return {pass, "n=10000 max_trace_distance direct=" + fmt(a.max_distance, 3) + " homodyne=" +
                    fmt(b.max_distance, 3) + " samples=26 runtime=" + fmt(secs, 3) + "s"};
}

Outcome criterion6(const SweepRun& run) {
  if (!run.error.empty() || run.estimates.size() != 10) return {false, "sweep failed: " + run.error};
  const IFTEstimate& first = run.estimates.front();
  const IFTEstimate& last = run.estimates.back();
  const double separation = (last.mean - first.mean) / combined_se(first, last);
  const double rho = spearman(run.coordinates, means(run));
  const bool in_band = first.mean >= 0.9 && first.mean <= 1.15;
  const bool pass = in_band && separation >= 5.0 && rho >= 0.9 && run.seconds < 1200.0;
  return {pass, "k=1 mean=" + fmt(first.mean, 5) + (in_band ? " (in band)" : " (outside band)") +
                    " separation=" + fmt(separation, 3) + "SE spearman=" + fmt(rho, 3) + " runtime=" +
                    fmt(run.seconds, 3) + "s" + trend_table(run)};
}

Outcome criterion7(const SweepRun& run) {
  if (!run.error.empty() || run.estimates.size() != 10) return {false, "sweep failed: " + run.error};
  const IFTEstimate& first = run.estimates.front();
  const IFTEstimate& last = run.estimates.back();
  const double separation = (last.mean - first.mean) / combined_se(first, last);
  const double rho = spearman(run.coordinates, means(run));
  const bool pass = separation >= 5.0 && rho >= 0.9;
  return {pass, "separation=" + fmt(separation, 3) + "SE spearman=" + fmt(rho, 3) + " runtime=" +
                    fmt(run.seconds, 3) + "s" + trend_table(run)};
}

Outcome criterion8(const SweepRun& run) {
  if (!run.error.empty() || run.estimates.size() != 8) return {false, "sweep failed: " + run.error};
  const IFTEstimate& first = run.estimates.front();
  const double excess = (first.mean - 1.0) / first.std_error;
  const double rho = spearman(run.coordinates, means(run));
  const bool pass = std::abs(run.coordinates.front() - 0.2) < 1e-12 && excess >= 3.0 && rho >= 0.9;
  return {pass, "N=0.2 excess=" + fmt(excess, 3) + "SE spearman=" + fmt(rho, 3) + " runtime=" +
                    fmt(run.seconds, 3) + "s" + trend_table(run)};
}

Outcome criterion9(const std::vector<std::pair<std::string, IFTEstimate>>& estimates) {
  bool pass = !estimates.empty();
  std::string worst_name;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& [name, e] : estimates) {
    const double margin = e.std_error > 0.0 ? (e.mean - 1.0) / e.std_error : (e.mean >= 1.0 - 1e-12 ? 0.0 : -1e300);
    if (!(e.mean >= 1.0 - 3.0 * e.std_error - 1e-12)) pass = false;
    if (margin < worst) {
      worst = margin;
      worst_name = name;
    }
  }
  return {pass, "estimates=" + std::to_string(estimates.size()) + " lowest (mean-1)/SE=" + fmt(worst, 3) + " at " +
                    worst_name};
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome criterion10() {
  const fs::path root = fs::temp_directory_path() / "qtraj_acceptance_determinism";
  fs::remove_all(root);
  std::vector<ExperimentConfig> configs;
  ExperimentConfig fig3 = recipe("fig3");
  fig3.run.n_trajectories = 2000;
  fig3.sweep->values = {1.0, 5.0, 10.0};
  configs.push_back(fig3);
  ExperimentConfig fig4 = recipe("fig4");
  fig4.run.n_trajectories = 1000;
  fig4.sweep->values = {2.0, 10.0};
  configs.push_back(fig4);
  configs.push_back(recipe("eigenstate"));

  std::size_t compared = 0;
  std::string mismatch;
  for (const ExperimentConfig& cfg : configs) {
    std::vector<fs::path> dirs;
    for (unsigned workers : {1u, 2u, 8u}) {
      RunOverrides ov;
      ov.threads = workers;
      ov.out_dir = (root / (cfg.name + "_w" + std::to_string(workers))).string();
      std::ostringstream log;
      if (run_simulate(cfg, ov, log) != kExitOk) return {false, cfg.name + " failed with " + std::to_string(workers)};
      dirs.emplace_back(*ov.out_dir);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      if (entry.path().extension() != ".csv") continue;
      const std::string ref = read_file(entry.path());
      for (std::size_t k = 1; k < dirs.size(); ++k) {
        ++compared;
        if (read_file(dirs[k] / entry.path().filename()) != ref) mismatch += " " + entry.path().filename().string();
      }
    }
  }
  fs::remove_all(root);
  return {mismatch.empty() && compared > 0,
          "csv_comparisons=" + std::to_string(compared) + " workers=1,2,8" + (mismatch.empty() ? "" : " differ:" + mismatch)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* title, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << title << "): " << o.detail << std::endl;
    failures += o.pass ? 0 : 1;
  };
  auto guarded = [&](int id, const char* title, const std::function<Outcome()>& fn) {
    try {
      report(id, title, fn());
    } catch (const std::exception& e) {
      report(id, title, Outcome{false, std::string("exception: ") + e.what()});
    }
  };

  std::vector<std::pair<std::string, IFTEstimate>> recipe_estimates;
  guarded(1, "standard-limit exactness", [&] {
    IFTEstimate e;
    Outcome o = criterion1(e);
    recipe_estimates.emplace_back("eigenstate", e);
    return o;
  });
  guarded(2, "decomposition identity", criterion2);
  guarded(3, "hand-oracle rates", criterion3);
  guarded(4, "drift expansion order", criterion4);
  guarded(5, "ensemble consistency", criterion5);

  auto add_sweep = [&](const std::string& name, const SweepRun& run) {
    for (std::size_t i = 0; i < run.estimates.size(); ++i) {
      recipe_estimates.emplace_back(name + "@" + fmt(run.coordinates[i], 3), run.estimates[i]);
    }
  };
  SweepRun fig3, fig4, fig5;
  guarded(6, "fig3 trend in k", [&] {
    fig3 = run_recipe_sweep(recipe("fig3"));
    add_sweep("fig3", fig3);
    return criterion6(fig3);
  });
  guarded(7, "fig4 trend in |beta|", [&] {
    fig4 = run_recipe_sweep(recipe("fig4"));
    add_sweep("fig4", fig4);
    return criterion7(fig4);
  });
  guarded(8, "fig5 thermal behavior", [&] {
    fig5 = run_recipe_sweep(recipe("fig5"));
    add_sweep("fig5", fig5);
    return criterion8(fig5);
  });
  guarded(9, "positivity floor", [&] {
    const ExperimentConfig minimal = recipe("minimal");
    const LindbladModel m = build_model(minimal);
    recipe_estimates.emplace_back("minimal", estimate(m, estimator_options(minimal, RunOverrides{}), default_sampler(m)));
    return criterion9(recipe_estimates);
  });
  guarded(10, "determinism and parallel invariance", criterion10);

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
