#include "crossfake/eval.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "crossfake/error.hpp"

namespace crossfake {
namespace {

double ratio(std::size_t num, std::size_t den, std::string_view name,
             std::vector<std::string>& warnings) {
  if (den == 0) {
    warnings.push_back(fmt::format("{} undefined (zero denominator), reported as 0", name));
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

template <typename Get>
std::pair<double, double> mean_std(const std::vector<RunMetrics>& runs, Get get) {
  double mean = 0.0;
  for (const auto& r : runs) mean += get(r.values);
  mean /= static_cast<double>(runs.size());
  double var = 0.0;
  for (const auto& r : runs) {
    const double d = get(r.values) - mean;
    var += d * d;
  }
  var /= static_cast<double>(runs.size());
  return {mean, std::sqrt(var)};
}

Json values_json(const MetricValues& v) {
  Json j;
  j["accuracy"] = v.accuracy;
  j["precision"] = v.precision;
  j["recall"] = v.recall;
  j["f1"] = v.f1;
  return j;
}

}  // namespace

ConfusionCounts count_confusion(std::span<const Label> preds, std::span<const Label> labels) {
  if (preds.size() != labels.size()) {
    throw ValidationError(fmt::format("{} predictions for {} labels", preds.size(), labels.size()));
  }
  if (preds.empty()) throw ValidationError("no predictions to evaluate");
  ConfusionCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] == Label::fake;
    const bool y = labels[i] == Label::fake;
    if (p && y) ++c.tp;
    else if (p) ++c.fp;
    else if (y) ++c.fn;
    else ++c.tn;
  }
  return c;
}

RunMetrics compute_metrics(std::span<const Label> preds, std::span<const Label> labels) {
  RunMetrics m;
  m.counts = count_confusion(preds, labels);
  const auto& c = m.counts;
  m.values.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  m.values.precision = ratio(c.tp, c.tp + c.fp, "precision", m.warnings);
  m.values.recall = ratio(c.tp, c.tp + c.fn, "recall", m.warnings);
  const double pr = m.values.precision + m.values.recall;
  if (pr > 0.0) {
    m.values.f1 = 2.0 * m.values.precision * m.values.recall / pr;
  } else {
    m.warnings.push_back("f1 undefined (precision + recall = 0), reported as 0");
  }
  return m;
}

MetricsReport multi_run_report(std::vector<RunMetrics> runs) {
  if (runs.empty()) throw ValidationError("multi_run_report: no runs");
  MetricsReport r;
  r.runs = std::move(runs);
  std::tie(r.mean.accuracy, r.stddev.accuracy) =
      mean_std(r.runs, [](const MetricValues& v) { return v.accuracy; });
  std::tie(r.mean.precision, r.stddev.precision) =
      mean_std(r.runs, [](const MetricValues& v) { return v.precision; });
  std::tie(r.mean.recall, r.stddev.recall) =
      mean_std(r.runs, [](const MetricValues& v) { return v.recall; });
  std::tie(r.mean.f1, r.stddev.f1) = mean_std(r.runs, [](const MetricValues& v) { return v.f1; });
  return r;
}

Json to_json(const RunMetrics& run) {
  Json j = values_json(run.values);
  j["confusion"] = {{"tp", run.counts.tp}, {"fp", run.counts.fp},
                    {"tn", run.counts.tn}, {"fn", run.counts.fn}};
  j["warnings"] = run.warnings;
  return j;
}

RunMetrics run_metrics_from_json(const Json& j) {
  RunMetrics r;
  r.values.accuracy = j.at("accuracy").get<double>();
  r.values.precision = j.at("precision").get<double>();
  r.values.recall = j.at("recall").get<double>();
  r.values.f1 = j.at("f1").get<double>();
  if (j.contains("confusion")) {
    const auto& c = j["confusion"];
    r.counts = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(),
                c.at("tn").get<std::size_t>(), c.at("fn").get<std::size_t>()};
  }
  if (j.contains("warnings")) r.warnings = j["warnings"].get<std::vector<std::string>>();
  return r;
}

Json to_json(const MetricsReport& report) {
  Json j;
  j["runs"] = Json::array();
  for (const auto& r : report.runs) j["runs"].push_back(to_json(r));
  j["mean"] = values_json(report.mean);
  j["std"] = values_json(report.stddev);
  j["n_runs"] = report.n_runs();
  j["positive_class"] = "fake";
  j["std_kind"] = "population";
  return j;
}

std::string render_table(const MetricsReport& report, std::string_view model_name) {
  const auto cell = [](double mean, double sd) {
    return fmt::format("{:.2f}_{{{:.2f}}}", 100.0 * mean, 100.0 * sd);
  };
  const std::size_t name_width = std::max<std::size_t>(model_name.size(), 5);
  std::string out;
  out += fmt::format("{:<{}} | {:>14} | {:>14} | {:>14} | {:>14}\n", "Model", name_width,
                     "Accuracy", "Precision", "Recall", "F1");
  out += std::string(name_width, '-') + "-+-" + std::string(14, '-') + "-+-" +
         std::string(14, '-') + "-+-" + std::string(14, '-') + "-+-" + std::string(14, '-') + "\n";
  out += fmt::format("{:<{}} | {:>14} | {:>14} | {:>14} | {:>14}\n", model_name, name_width,
                     cell(report.mean.accuracy, report.stddev.accuracy),
                     cell(report.mean.precision, report.stddev.precision),
                     cell(report.mean.recall, report.stddev.recall),
                     cell(report.mean.f1, report.stddev.f1));
  out += fmt::format(
      "\nmean_{{std}} in percent over {} run(s); std is the population standard deviation; "
      "positive class = fake\n",
      report.n_runs());
  return out;
}

}  // namespace crossfake
