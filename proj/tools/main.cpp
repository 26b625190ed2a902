// Copyright 2026 the hop-predict authors
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

#include <CLI11.hpp>

#include "hop/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Online multi-step-ahead prediction for linear stochastic systems"};
  app.set_version_flag("--version", hop::cli::kVersion);
  app.require_subcommand(1);

  hop::cli::CommandOptions opts;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* c = cmd->add_option("--config", opts.config_path, "experiment config file");
    if (needs_config) c->required();
    cmd->add_option("--seeds", opts.seeds_override,
                    "override the config seed list: a count or a comma list");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_flag("--svg", opts.svg, "emit regret-vs-step SVG charts");
    cmd->add_flag("--fast", opts.fast, "restrict to the quick scalar checks");
  };

  auto* run = app.add_subcommand("run", "run one experiment and write CSV results");
  add_common(run, true);
  auto* validate =
      app.add_subcommand("validate", "check the analytical identities and report residuals");
  add_common(validate, false);
  auto* sweep =
      app.add_subcommand("sweep", "sweep horizons/systems and fit the scaling law");
  add_common(sweep, true);
  auto* bench =
      app.add_subcommand("bench", "print model-based diagnostics for the configured plant");
  add_common(bench, true);

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return hop::cli::cmd_run(opts);
  if (validate->parsed()) return hop::cli::cmd_validate(opts);
  if (sweep->parsed()) return hop::cli::cmd_sweep(opts);
  if (bench->parsed()) return hop::cli::cmd_bench(opts);
  return 2;
}
