#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crossfake/corpus.hpp"
#include "crossfake/json_io.hpp"

namespace crossfake {

// Positive class is fake (label 1).
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct MetricValues {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct RunMetrics {
  MetricValues values;
  ConfusionCounts counts;
  // Set when a ratio had a zero denominator and was reported as 0.
  std::vector<std::string> warnings;
};

/// Throws ValidationError on empty input or length mismatch.
ConfusionCounts count_confusion(std::span<const Label> preds, std::span<const Label> labels);

RunMetrics compute_metrics(std::span<const Label> preds, std::span<const Label> labels);

struct MetricsReport {
  std::vector<RunMetrics> runs;
  MetricValues mean;
  MetricValues stddev;  // population standard deviation over runs

  std::size_t n_runs() const noexcept { return runs.size(); }
};

/// Mean and population standard deviation per metric; throws on no runs.
MetricsReport multi_run_report(std::vector<RunMetrics> runs);

Json to_json(const RunMetrics& run);
RunMetrics run_metrics_from_json(const Json& j);

/// {runs, mean, std, n_runs, positive_class}
Json to_json(const MetricsReport& report);

/// Table with Accuracy / Precision / Recall / F1 columns, each cell
/// "mean_{std}" in percent with two decimals.
std::string render_table(const MetricsReport& report, std::string_view model_name);

}  // namespace crossfake
