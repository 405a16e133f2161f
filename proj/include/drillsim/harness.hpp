#pragma once

// Batch runner, trial CSV, summary statistics and the per-trial report.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "drillsim/config.hpp"
#include "drillsim/workflow.hpp"

namespace drillsim {

inline constexpr const char* kTrialCsvHeader =
    "trial_id,seed,successful,detachable,case,total_s,palpation_s,palpation_pct,halted";

// One decimal with a percent sign, e.g. 0.281 -> "28.1%".
std::string format_percent(double fraction);

void write_trial_csv(std::ostream& os, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> read_trial_csv(std::istream& is);

struct BatchSummary {
  int n_trials = 0;
  double success_ratio = 0.0;
  double detachable_ratio = 0.0;
  double mean_total_time = 0.0;
  double mean_palpation_time = 0.0;
  double mean_palpation_fraction = 0.0;  // mean of per-trial fractions
  std::array<int, 4> case_histogram{};   // Case 1..4
  int halted = 0;
};

BatchSummary aggregate(const std::vector<TrialRecord>& records);

// Table with one row per trial plus an Avg. row and the case histogram.
void write_report(std::ostream& os, const std::vector<TrialRecord>& records, const BatchSummary& summary);

struct BatchOptions {
  int trials = 12;
  std::uint64_t seed_base = 0;
  bool keep_traces = false;
};

// Trial i uses seed seed_base + i and trial_id i + 1. Trials run in parallel;
// the returned order and content do not depend on the thread count.
std::vector<TrialResult> run_batch(const SimConfig& cfg, const BatchOptions& options);

}  // namespace drillsim
