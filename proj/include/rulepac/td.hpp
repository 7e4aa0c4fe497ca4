#pragma once

#include <map>
#include <string>
#include <vector>

#include "rulepac/rollout.hpp"
#include "rulepac/rules.hpp"

namespace rulepac {

struct TdConfig {
  double alpha = 0.05;
  double gamma = 0.95;
  double bin_width = 50.0;

  void validate() const;
};

/// One stay in a behavioural state: the reward summed while in `from`, and the
/// number of steps spent there. Terminal transitions bootstrap from 0.
struct MacroTransition {
  MacroCode from;
  MacroCode to;
  double reward = 0.0;
  int duration = 1;
  bool terminal = false;
};

class ValueTable {
 public:
  struct Entry {
    double value = 0.0;
    long visits = 0;
    bool operator==(const Entry&) const = default;
  };

  explicit ValueTable(double alpha = 0.05, double gamma = 0.95);

  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }

  /// Unseen codes read as 0.
  double value(MacroCode code) const;
  long visits(MacroCode code) const;
  void set(MacroCode code, double value, long visits = 0);

  const std::map<MacroCode, Entry>& entries() const { return entries_; }
  bool operator==(const ValueTable&) const = default;

 private:
  double alpha_;
  double gamma_;
  std::map<MacroCode, Entry> entries_;
  friend double td_update(ValueTable&, const MacroTransition&);
};

/// r + gamma^duration * V(to) - V(from), with V(to) = 0 for terminal transitions.
double td_error(const ValueTable& table, const MacroTransition& t);

/// V(from) += alpha * delta. Only the `from` entry changes. Returns delta.
double td_update(ValueTable& table, const MacroTransition& t);

/// Splits a step trace at macro-code changes. The last stay ends the episode
/// and is terminal.
std::vector<MacroTransition> segment_trace(const std::vector<StepRecord>& trace);

class TdHistogram {
 public:
  explicit TdHistogram(double bin_width = 50.0);

  double bin_width() const { return bin_width_; }
  void add(MacroCode code, double delta);

  /// Bin index -> count, per code. Bin k covers [k*w, (k+1)*w).
  const std::map<MacroCode, std::map<long, long>>& bins() const { return bins_; }
  long total(MacroCode code) const;

  /// Counts over the contiguous bin range of `code`, empty bins included.
  std::vector<long> dense_counts(MacroCode code) const;

 private:
  double bin_width_;
  std::map<MacroCode, std::map<long, long>> bins_;
};

/// Applies td_update to every transition of the trace in order and adds each
/// delta to the histogram of its source code.
void record_episode(ValueTable& table, TdHistogram& hist, const std::vector<StepRecord>& trace);

/// Number of local maxima whose topographic prominence is at least
/// `min_prominence_fraction` of the largest count. Flat-topped maxima count once
/// and the series is treated as zero beyond both ends.
int count_peaks(const std::vector<long>& counts, double min_prominence_fraction = 0.05);

/// `macro_code,value,visits`
std::string values_csv(const ValueTable& table);
ValueTable parse_values_csv(const std::string& text, double alpha = 0.05, double gamma = 0.95);
ValueTable load_values_file(const std::string& path, double alpha = 0.05, double gamma = 0.95);

/// `macro_code,bin_low,bin_high,count`. With mask_main_peak the largest bin of
/// each code (first one on ties) is left out.
std::string histogram_csv(const TdHistogram& hist, bool mask_main_peak = false);

}  // namespace rulepac
