#pragma once

#include <string>
#include <vector>

#include "orbsim/config.hpp"

namespace orbsim {

/// Library entry points behind the CLI subcommands.  Each returns the process
/// exit status (0 success, 2 failed checks); malformed input surfaces as an
/// exception, which the binary maps to exit 1.  All CSV outputs land in
/// config.out_dir, created on demand.

/// Runs the dynamics invariant suite and writes dynamics_report.csv with one
/// row per check: check, max_error, threshold, pass.  Returns 0 iff every
/// check passes, otherwise 2.
int cmd_dynamics_check(const Config& config);

/// Trains the tabular policy on the configured environment (seed = first
/// config seed) and writes qtable.csv plus training_curve.csv.
int cmd_train(const Config& config);

/// Evaluates the requested policies, one episode per configured seed, and
/// writes bench.csv (per-policy mean/std summary plus the improvement row)
/// and bench_per_seed.csv.  policy_names picks a subset of
/// {fifo, spt, rules, q}; empty means all four.  The learned policies are
/// prepared inline: the tabular policy trains at first seed + 10000, the rule
/// search runs at first seed + 20000, so evaluation seeds stay untouched.
/// Throws MissingPolicy when the selection is empty or names no known policy.
int cmd_bench(const Config& config,
              const std::vector<std::string>& policy_names = {});

/// Runs one episode (seed = first config seed) under the named policy and
/// writes events.csv and metrics.csv.  Accepts fifo, spt, rules, q (learned
/// policies prepared inline exactly as in cmd_bench); throws UnknownPolicy
/// otherwise.
int cmd_simulate(const Config& config, const std::string& policy_name);

}  // namespace orbsim
