#include <doctest.h>

#include "crossfake/error.hpp"
#include "crossfake/eval.hpp"
#include "crossfake/rng.hpp"

using namespace crossfake;

namespace {

std::vector<Label> labels(std::initializer_list<int> v) {
  std::vector<Label> out;
  for (int x : v) out.push_back(x ? Label::fake : Label::real);
  return out;
}

RunMetrics run_with(double acc) {
  RunMetrics r;
  r.values = {acc, acc, acc, acc};
  return r;
}

}  // namespace

TEST_CASE("worked example: everything predicted fake") {
  const auto m = compute_metrics(labels({1, 1, 1, 1}), labels({1, 0, 1, 0}));
  CHECK(m.counts == ConfusionCounts{2, 2, 0, 0});
  CHECK(m.values.accuracy == doctest::Approx(0.5));
  CHECK(m.values.precision == doctest::Approx(0.5));
  CHECK(m.values.recall == doctest::Approx(1.0));
  CHECK(m.values.f1 == doctest::Approx(2.0 / 3.0));
  CHECK(m.warnings.empty());
}

TEST_CASE("reference values from an independent implementation") {
  const auto y = labels({1, 1, 1, 0, 0, 1, 0, 1, 1, 0, 0, 0, 1, 1, 0, 1, 0, 1, 1, 1});
  const auto p = labels({1, 0, 1, 0, 1, 1, 0, 0, 1, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 1});
  const auto m = compute_metrics(p, y);
  CHECK(m.values.accuracy == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(m.values.precision == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(m.values.recall == doctest::Approx(0.6666666666666666).epsilon(1e-12));
  CHECK(m.values.f1 == doctest::Approx(0.7272727272727273).epsilon(1e-12));
}

TEST_CASE("a perfect classifier scores one everywhere") {
  const auto y = labels({1, 0, 0, 1, 1});
  const auto m = compute_metrics(y, y);
  CHECK(m.values.accuracy == 1.0);
  CHECK(m.values.precision == 1.0);
  CHECK(m.values.recall == 1.0);
  CHECK(m.values.f1 == 1.0);
}

TEST_CASE("metrics agree with a brute-force count") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Label> y(200), p(200);
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = rng.below(2) ? Label::fake : Label::real;
      p[i] = rng.below(2) ? Label::fake : Label::real;
    }
    double tp = 0, pred_pos = 0, true_pos = 0, agree = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      tp += (p[i] == Label::fake && y[i] == Label::fake);
      pred_pos += p[i] == Label::fake;
      true_pos += y[i] == Label::fake;
      agree += p[i] == y[i];
    }
    const auto m = compute_metrics(p, y);
    CHECK(m.values.accuracy == doctest::Approx(agree / 200.0).epsilon(1e-12));
    CHECK(m.values.precision == doctest::Approx(tp / pred_pos).epsilon(1e-12));
    CHECK(m.values.recall == doctest::Approx(tp / true_pos).epsilon(1e-12));
    CHECK(m.values.f1 == doctest::Approx(2 * tp / (pred_pos + true_pos)).epsilon(1e-12));
  }
}

TEST_CASE("zero denominators are reported as zero with a warning") {
  const auto m = compute_metrics(labels({0, 0}), labels({0, 0}));
  CHECK(m.values.accuracy == 1.0);
  CHECK(m.values.precision == 0.0);
  CHECK(m.values.recall == 0.0);
  CHECK(m.values.f1 == 0.0);
  CHECK(m.warnings.size() == 3);
}

TEST_CASE("input errors") {
  CHECK_THROWS_AS(compute_metrics(labels({1}), labels({1, 0})), ValidationError);
  CHECK_THROWS_AS(compute_metrics({}, {}), ValidationError);
  CHECK_THROWS_AS(multi_run_report({}), ValidationError);
}

TEST_CASE("multi-run aggregation uses the population deviation") {
  const auto r = multi_run_report({run_with(0.7), run_with(0.8)});
  CHECK(r.n_runs() == 2);
  CHECK(r.mean.accuracy == doctest::Approx(0.75));
  CHECK(r.stddev.accuracy == doctest::Approx(0.05));
  CHECK(r.stddev.f1 == doctest::Approx(0.05));

  const auto j = to_json(r);
  CHECK(j.at("n_runs") == 2);
  CHECK(j.at("positive_class") == "fake");
  CHECK(j.at("std").at("recall").get<double>() == doctest::Approx(0.05));
  const auto back = run_metrics_from_json(j.at("runs")[0]);
  CHECK(back.values.accuracy == 0.7);
}

TEST_CASE("a single run renders a zero deviation") {
  const auto m = compute_metrics(labels({1, 1, 1, 1}), labels({1, 0, 1, 0}));
  const auto table = render_table(multi_run_report({m}), "CrossFake-sub");
  CHECK(table.find("CrossFake-sub") != std::string::npos);
  CHECK(table.find("50.00_{0.00}") != std::string::npos);
  CHECK(table.find("100.00_{0.00}") != std::string::npos);
  CHECK(table.find("66.67_{0.00}") != std::string::npos);
  CHECK(table.find("1 run(s)") != std::string::npos);
}
