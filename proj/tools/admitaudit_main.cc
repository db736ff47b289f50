// Copyright 2026 The admitaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver for the admissions ranking audit.
//
//   admitaudit run --config configs/demo.json --out artifacts
//   admitaudit generate --out artifacts --seed 7
//   admitaudit audit --out artifacts --policies ml_baseline,no_race

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "admitaudit/experiment.h"

namespace {

struct Options {
  std::string config;
  std::string out;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::string policies;
  std::optional<int> cutoff;
  std::optional<std::size_t> m;
  std::string target;
  bool full_scale = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "Experiment config (JSON)");
  cmd->add_option("--out", o.out, "Artifact directory");
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Master seed (overrides the config)");
  cmd->add_option("--policies", o.policies,
                  "Comma-separated policies; the first is the reference. "
                  "Custom policies use name=group+group");
  cmd->add_option("--cutoff", o.cutoff, "Lowest decile counted as top")->check(CLI::Range(1, 10));
  cmd->add_option("--m", o.m, "Bootstrapped models per policy");
  cmd->add_option("--target", o.target, "Training label")
      ->check(CLI::IsMember({"admitted", "admitted_or_waitlisted"}));
  cmd->add_flag("--full-scale", o.full_scale, "Use the full-size cohort and m = 1000");
}

admitaudit::ExperimentConfig resolve(const Options& o) {
  using admitaudit::ExperimentConfig;
  ExperimentConfig c = o.config.empty()
                           ? (o.full_scale ? ExperimentConfig::full_scale() : ExperimentConfig::demo())
                           : admitaudit::load_config(o.config);
  if (!o.config.empty() && o.full_scale) {
    const ExperimentConfig big = ExperimentConfig::full_scale();
    c.cohort.n_train = big.cohort.n_train;
    c.cohort.n_test = big.cohort.n_test;
    c.gbdt.n_trees = big.gbdt.n_trees;
    c.m = big.m;
  }
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.seed) c.seed = *o.seed;
  if (!o.policies.empty()) c.policies = admitaudit::parse_policy_list(o.policies);
  if (o.cutoff) c.cutoff = *o.cutoff;
  if (o.m) {
    c.m = *o.m;
    c.across_k = 0;
  }
  if (!o.target.empty()) c.target = admitaudit::parse_target(o.target);
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audit how policy changes and bootstrap randomness move applicants in and out "
               "of an ML ranking's top pool"};
  app.require_subcommand(1);
  Options o;
  auto* run = app.add_subcommand("run", "All stages plus manifest.json");
  auto* generate = app.add_subcommand("generate", "Write applicants.csv");
  auto* train = app.add_subcommand("train", "Fit one model per policy; write rankings.csv");
  auto* audit = app.add_subcommand("audit", "Bootstrap ensembles; write consistency.csv");
  auto* report = app.add_subcommand("report", "Recompute summary tables from raw CSVs");
  auto* sweep = app.add_subcommand("sweep", "Top-pool shares at cutoffs 10..1");
  for (auto* cmd : {run, generate, train, audit, report, sweep}) add_common(cmd, o);

  CLI11_PARSE(app, argc, argv);

  try {
    const admitaudit::ExperimentConfig config = resolve(o);
    if (run->parsed()) {
      const auto summary = admitaudit::run_experiment(config, o.threads);
      std::cout << "wrote " << summary.output_dir.string() << " in " << summary.wall_seconds
                << " s\n";
    } else if (generate->parsed()) {
      admitaudit::stage_generate(config);
    } else if (train->parsed()) {
      admitaudit::stage_train(config, o.threads);
    } else if (audit->parsed()) {
      admitaudit::stage_audit(config, o.threads);
    } else if (report->parsed()) {
      admitaudit::stage_report(config);
    } else if (sweep->parsed()) {
      admitaudit::stage_sweep(config);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
