#include "rulepac/td.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rulepac {

void TdConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("td alpha must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("td gamma must be in [0, 1]");
  if (!(bin_width > 0.0)) throw ConfigError("td bin_width must be positive");
}

ValueTable::ValueTable(double alpha, double gamma) : alpha_(alpha), gamma_(gamma) {
  TdConfig{alpha, gamma, 1.0}.validate();
}

double ValueTable::value(MacroCode code) const {
  auto it = entries_.find(code);
  return it == entries_.end() ? 0.0 : it->second.value;
}

long ValueTable::visits(MacroCode code) const {
  auto it = entries_.find(code);
  return it == entries_.end() ? 0 : it->second.visits;
}

void ValueTable::set(MacroCode code, double value, long visits) { entries_[code] = {value, visits}; }

double td_error(const ValueTable& table, const MacroTransition& t) {
  const double next = t.terminal ? 0.0 : table.value(t.to);
  return t.reward + std::pow(table.gamma(), t.duration) * next - table.value(t.from);
}

double td_update(ValueTable& table, const MacroTransition& t) {
  const double delta = td_error(table, t);
  ValueTable::Entry& e = table.entries_[t.from];
  e.value += table.alpha() * delta;
  ++e.visits;
  return delta;
}

std::vector<MacroTransition> segment_trace(const std::vector<StepRecord>& trace) {
  std::vector<MacroTransition> out;
  if (trace.empty()) return out;
  MacroTransition current{trace.front().macro, trace.front().macro, 0.0, 0, false};
  for (const StepRecord& s : trace) {
    if (s.macro != current.from) {
      current.to = s.macro;
      out.push_back(current);
      current = {s.macro, s.macro, 0.0, 0, false};
    }
    current.reward += s.reward;
    ++current.duration;
  }
  current.terminal = true;
  out.push_back(current);
  return out;
}

TdHistogram::TdHistogram(double bin_width) : bin_width_(bin_width) {
  if (!(bin_width > 0.0)) throw ConfigError("histogram bin width must be positive");
}

void TdHistogram::add(MacroCode code, double delta) {
  const long bin = static_cast<long>(std::floor(delta / bin_width_));
  ++bins_[code][bin];
}

long TdHistogram::total(MacroCode code) const {
  auto it = bins_.find(code);
  if (it == bins_.end()) return 0;
  long sum = 0;
  for (const auto& [bin, count] : it->second) sum += count;
  return sum;
}

std::vector<long> TdHistogram::dense_counts(MacroCode code) const {
  auto it = bins_.find(code);
  if (it == bins_.end() || it->second.empty()) return {};
  const long lo = it->second.begin()->first;
  const long hi = it->second.rbegin()->first;
  std::vector<long> dense(static_cast<std::size_t>(hi - lo + 1), 0);
  for (const auto& [bin, count] : it->second) dense[static_cast<std::size_t>(bin - lo)] = count;
  return dense;
}

void record_episode(ValueTable& table, TdHistogram& hist, const std::vector<StepRecord>& trace) {
  for (const MacroTransition& t : segment_trace(trace)) hist.add(t.from, td_update(table, t));
}

int count_peaks(const std::vector<long>& counts, double min_prominence_fraction) {
  if (counts.empty()) return 0;
  std::vector<long> x;
  x.reserve(counts.size() + 2);
  x.push_back(0);
  x.insert(x.end(), counts.begin(), counts.end());
  x.push_back(0);
  const long top = *std::max_element(x.begin(), x.end());
  if (top <= 0) return 0;
  const double needed = min_prominence_fraction * static_cast<double>(top);

  int peaks = 0;
  const std::size_t n = x.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i] <= x[i - 1]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && x[j + 1] == x[i]) ++j;
    if (j + 1 < n && x[j + 1] < x[i]) {
      long left_min = x[i];
      for (std::size_t k = i; k-- > 0;) {
        if (x[k] > x[i]) break;
        left_min = std::min(left_min, x[k]);
      }
      long right_min = x[i];
      for (std::size_t k = j + 1; k < n; ++k) {
        if (x[k] > x[i]) break;
        right_min = std::min(right_min, x[k]);
      }
      const double prominence = static_cast<double>(x[i] - std::max(left_min, right_min));
      if (prominence >= needed) ++peaks;
    }
    i = j + 1;
  }
  return peaks;
}

std::string values_csv(const ValueTable& table) {
  std::string csv = "macro_code,value,visits\n";
  for (const auto& [code, e] : table.entries()) {
    csv += code.to_string() + ',' + format_number(e.value) + ',' + std::to_string(e.visits) + '\n';
  }
  return csv;
}

ValueTable parse_values_csv(const std::string& text, double alpha, double gamma) {
  ValueTable table(alpha, gamma);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("macro_code", 0) == 0) continue;
    std::istringstream fields(line);
    std::string code, value, visits;
    if (!std::getline(fields, code, ',') || !std::getline(fields, value, ',') || !std::getline(fields, visits)) {
      throw ParseError("values line " + std::to_string(line_no) + ": expected macro_code,value,visits");
    }
    try {
      table.set(MacroCode::parse(code), std::stod(value), std::stol(visits));
    } catch (const std::logic_error&) {
      throw ParseError("values line " + std::to_string(line_no) + ": bad number");
    }
  }
  return table;
}

ValueTable load_values_file(const std::string& path, double alpha, double gamma) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open values file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_values_csv(buffer.str(), alpha, gamma);
}

std::string histogram_csv(const TdHistogram& hist, bool mask_main_peak) {
  std::string csv = "macro_code,bin_low,bin_high,count\n";
  const double w = hist.bin_width();
  for (const auto& [code, bins] : hist.bins()) {
    long masked = 0;
    bool have_mask = false;
    if (mask_main_peak) {
      long best = -1;
      for (const auto& [bin, count] : bins) {
        if (count > best) {
          best = count;
          masked = bin;
          have_mask = true;
        }
      }
    }
    for (const auto& [bin, count] : bins) {
      if (have_mask && bin == masked) continue;
      csv += code.to_string() + ',' + format_number(bin * w) + ',' + format_number((bin + 1) * w) + ',' +
             std::to_string(count) + '\n';
    }
  }
  return csv;
}

}  // namespace rulepac
