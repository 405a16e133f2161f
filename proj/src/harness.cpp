#include "drillsim/harness.hpp"

#include <cmath>
#include <exception>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "drillsim/error.hpp"

namespace drillsim {

std::string format_percent(double fraction) { return fmt::format("{:.1f}%", 100.0 * fraction); }

void write_trial_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  os << kTrialCsvHeader << '\n';
  for (const auto& r : records) {
    os << fmt::format("{},{},{},{},{},{},{},{},{}\n", r.trial_id, r.seed, r.successful ? 1 : 0,
                      r.detachable ? 1 : 0, r.case_label, r.total_s, r.palpation_s,
                      format_percent(r.palpation_fraction), r.halted ? 1 : 0);
  }
}

namespace {

bool parse_bool(const std::string& s, int line) {
  if (s == "1" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "no") return false;
  throw Error(ErrorKind::Io, "harness/csv", fmt::format("line {}: bad boolean '{}'", line, s));
}

}  // namespace

std::vector<TrialRecord> read_trial_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::Io, "harness/csv", "empty trial CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrialCsvHeader) {
    throw Error(ErrorKind::Io, "harness/csv", fmt::format("unexpected header '{}'", line));
  }
  std::vector<TrialRecord> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 9) {
      throw Error(ErrorKind::Io, "harness/csv", fmt::format("line {}: expected 9 fields, got {}", lineno, f.size()));
    }
    TrialRecord r;
    try {
      r.trial_id = std::stoi(f[0]);
      r.seed = std::stoull(f[1]);
      r.successful = parse_bool(f[2], lineno);
      r.detachable = parse_bool(f[3], lineno);
      r.case_label = std::stoi(f[4]);
      r.total_s = std::stod(f[5]);
      r.palpation_s = std::stod(f[6]);
      r.halted = parse_bool(f[8], lineno);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error(ErrorKind::Io, "harness/csv", fmt::format("line {}: malformed number", lineno));
    }
    if (r.case_label < 1 || r.case_label > 4) {
      throw Error(ErrorKind::Io, "harness/csv", fmt::format("line {}: case must be 1-4", lineno));
    }
    // The percent column is derived; recompute it from the times at full precision.
    r.palpation_fraction = r.total_s > 0.0 ? r.palpation_s / r.total_s : 0.0;
    out.push_back(r);
  }
  return out;
}

BatchSummary aggregate(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw Error(ErrorKind::Pipeline, "harness/aggregate", "no trial records");
  BatchSummary s;
  s.n_trials = static_cast<int>(records.size());
  double ok = 0, det = 0, total = 0, palp = 0, frac = 0;
  for (const auto& r : records) {
    ok += r.successful;
    det += r.detachable;
    total += r.total_s;
    palp += r.palpation_s;
    frac += r.palpation_fraction;
    s.halted += r.halted;
    if (r.case_label >= 1 && r.case_label <= 4) ++s.case_histogram[static_cast<std::size_t>(r.case_label - 1)];
  }
  const double n = static_cast<double>(records.size());
  s.success_ratio = ok / n;
  s.detachable_ratio = det / n;
  s.mean_total_time = total / n;
  s.mean_palpation_time = palp / n;
  s.mean_palpation_fraction = frac / n;
  return s;
}

void write_report(std::ostream& os, const std::vector<TrialRecord>& records, const BatchSummary& s) {
  os << fmt::format("{:>6} {:>12} {:>10} {:>10} {:>5} {:>10} {:>16}\n", "trial", "seed", "successful",
                    "detachable", "case", "total_s", "palpation_s");
  for (const auto& r : records) {
    os << fmt::format("{:>6} {:>12} {:>10} {:>10} {:>5} {:>10.0f} {:>8.0f} ({:>6})\n", r.trial_id, r.seed,
                      r.successful ? "yes" : "no", r.detachable ? "yes" : "no", r.case_label, r.total_s,
                      r.palpation_s, format_percent(r.palpation_fraction));
  }
  os << fmt::format("{:>6} {:>12} {:>10} {:>10} {:>5} {:>10.0f} {:>8.0f} ({:>6})\n", "Avg.", "",
                    format_percent(s.success_ratio), format_percent(s.detachable_ratio), "", s.mean_total_time,
                    s.mean_palpation_time, format_percent(s.mean_palpation_fraction));
  os << fmt::format("trials: {}\n", s.n_trials);
  os << fmt::format("success ratio: {}\n", format_percent(s.success_ratio));
  os << fmt::format("detachable ratio: {}\n", format_percent(s.detachable_ratio));
  os << fmt::format("mean total time: {:.1f} s\n", s.mean_total_time);
  os << fmt::format("mean palpation time: {:.1f} s ({})\n", s.mean_palpation_time,
                    format_percent(s.mean_palpation_fraction));
  os << fmt::format("cases: 1={} 2={} 3={} 4={}\n", s.case_histogram[0], s.case_histogram[1], s.case_histogram[2],
                    s.case_histogram[3]);
  os << fmt::format("halted: {}\n", s.halted);
}

std::vector<TrialResult> run_batch(const SimConfig& cfg, const BatchOptions& options) {
  if (options.trials < 1) throw Error(ErrorKind::Config, "harness/batch", "need at least one trial");
  cfg.validate();
  std::vector<TrialResult> results(static_cast<std::size_t>(options.trials));
  std::vector<std::exception_ptr> errors(results.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < options.trials; ++i) {
    try {
      TrialOptions t;
      t.trial_id = i + 1;
      t.keep_traces = options.keep_traces;
      results[static_cast<std::size_t>(i)] =
          run_trial(cfg, options.seed_base + static_cast<std::uint64_t>(i), t);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace drillsim
