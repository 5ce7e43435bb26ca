#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pxt/error.hpp"
#include "pxt/metrics.hpp"
#include "synthetic.hpp"

using namespace pxt;

namespace {

LabelMatrix from_sets(const std::vector<std::set<int>>& sets, int labels) {
  LabelMatrix m = LabelMatrix::Zero(static_cast<Eigen::Index>(sets.size()), labels);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (int l : sets[i]) m(static_cast<Eigen::Index>(i), l) = 1;
  }
  return m;
}

LabelMatrix column(std::initializer_list<int> values) {
  LabelMatrix m(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (int v : values) m(i++, 0) = v;
  return m;
}

MetricsReport report_with(double micro, double macro, double weighted, double example, double f1_0) {
  MetricsReport r;
  r.n_comments = 5;
  r.micro_f1 = micro;
  r.macro_f1 = macro;
  r.weighted_f1 = weighted;
  r.example_based_f1 = example;
  for (std::size_t t = 0; t < kTopicCount; ++t) {
    TopicMetrics m;
    m.name = std::string(topic_names()[t]);
    m.f1 = t == 0 ? f1_0 : 0.5;
    m.auc = 0.75;
    r.per_topic.push_back(m);
  }
  return r;
}

}  // namespace

TEST_CASE("per-topic hand counts") {
  auto perfect = per_topic_metrics(column({1, 1, 0, 0}), column({1, 1, 0, 0}));
  CHECK(perfect[0].f1 == 1.0);
  CHECK(perfect[0].auc == 1.0);

  auto inverted = per_topic_metrics(column({1, 0, 1, 0}), column({0, 1, 0, 1}));
  CHECK(inverted[0].f1 == 0.0);
  CHECK(inverted[0].auc == 0.0);

  auto half = per_topic_metrics(column({1, 1, 0, 0}), column({1, 0, 1, 0}));
  CHECK(half[0].counts == ConfusionCounts{1, 1, 1, 1});
  CHECK(half[0].f1 == 0.5);
  CHECK(half[0].auc == 0.5);

  auto no_positives = per_topic_metrics(column({0, 0, 0}), column({0, 0, 0}));
  CHECK(no_positives[0].f1 == 0.0);
  CHECK(no_positives[0].f1_undefined);
  CHECK(no_positives[0].auc == 0.5);
  CHECK(no_positives[0].auc_undefined);
}

TEST_CASE("two comments, three topics") {
  // c1: T = {A}, P = {A, B}; c2: T = {B, C}, P = {C}
  LabelMatrix t(2, 3), p(2, 3);
  t << 1, 0, 0, 0, 1, 1;
  p << 1, 1, 0, 0, 0, 1;
  auto r = overall_metrics(t, p);
  CHECK(r.micro_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.macro_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.weighted_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.example_based_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.per_topic[0].name == "label_0");
}

TEST_CASE("example-based convention for empty sets") {
  LabelMatrix z = LabelMatrix::Zero(3, 10);
  auto r = overall_metrics(z, z);
  CHECK(r.example_based_f1 == 1.0);
  CHECK(r.micro_f1 == 0.0);
  CHECK(r.weighted_undefined);
}

TEST_CASE("random instances agree with set arithmetic") {
  synthetic::Rng rng(17);
  std::uniform_int_distribution<int> size(1, 50);
  std::uniform_real_distribution<double> density(0.05, 0.6);
  for (int trial = 0; trial < 300; ++trial) {
    int n = size(rng);
    int labels = trial % 3 == 0 ? 3 : 10;
    auto truth = synthetic::random_label_sets(rng, n, labels, density(rng));
    auto pred = synthetic::random_label_sets(rng, n, labels, density(rng));
    auto expect = oracle::set_metrics(truth, pred, labels);
    auto got = overall_metrics(from_sets(truth, labels), from_sets(pred, labels));
    CHECK(std::abs(got.micro_f1 - expect.micro) <= 1e-12);
    CHECK(std::abs(got.macro_f1 - expect.macro) <= 1e-12);
    CHECK(std::abs(got.weighted_f1 - expect.weighted) <= 1e-12);
    CHECK(std::abs(got.example_based_f1 - expect.example) <= 1e-12);
    for (int l = 0; l < labels; ++l) {
      CHECK(std::abs(got.per_topic[l].f1 - expect.f1[l]) <= 1e-12);
      CHECK(std::abs(got.per_topic[l].auc - expect.auc[l]) <= 1e-12);
      CHECK(got.per_topic[l].f1 >= 0.0);
      CHECK(got.per_topic[l].f1 <= 1.0);
    }

    // swapping truth and prediction leaves the symmetric metrics unchanged
    auto swapped = overall_metrics(from_sets(pred, labels), from_sets(truth, labels));
    CHECK(std::abs(swapped.micro_f1 - got.micro_f1) <= 1e-12);
    CHECK(std::abs(swapped.example_based_f1 - got.example_based_f1) <= 1e-12);
  }
}

TEST_CASE("label vector overloads use canonical names") {
  std::vector<LabelVector> t{LabelVector::from_indices({0}), LabelVector::from_indices({6, 7})};
  std::vector<LabelVector> p{LabelVector::from_indices({0}), LabelVector::from_indices({6})};
  auto r = overall_metrics(t, p);
  REQUIRE(r.per_topic.size() == 10);
  CHECK(r.per_topic[6].name == "Issues with Food Service");
  CHECK(r.n_comments == 2);
  CHECK(r.per_topic[7].counts.fn == 1);
}

TEST_CASE("input errors") {
  LabelMatrix a = LabelMatrix::Zero(3, 10), b = LabelMatrix::Zero(4, 10), e(0, 10);
  CHECK_THROWS_AS(overall_metrics(a, b), Error);
  CHECK_THROWS_AS(overall_metrics(e, e), Error);
}

TEST_CASE("run aggregation") {
  auto m = mean_std({0.74, 0.76, 0.78});
  CHECK(m.mean == doctest::Approx(0.76).epsilon(1e-12));
  CHECK(m.std == doctest::Approx(0.02).epsilon(1e-12));

  auto same = aggregate_runs({report_with(0.7, 0.6, 0.65, 0.75, 0.8), report_with(0.7, 0.6, 0.65, 0.75, 0.8),
                              report_with(0.7, 0.6, 0.65, 0.75, 0.8)});
  CHECK(same.micro_f1.std == 0.0);
  CHECK(same.topic_f1[0].std == 0.0);

  auto agg = aggregate_runs({report_with(0.74, 0.6, 0.65, 0.75, 0.8), report_with(0.76, 0.6, 0.65, 0.77, 0.84),
                             report_with(0.78, 0.6, 0.65, 0.79, 0.88)});
  CHECK(agg.n_runs == 3);
  CHECK(format_mean_std(agg.micro_f1) == "76.00% ± 0.020");
  CHECK(format_mean_std(agg.topic_f1[0]) == "84.00% ± 0.040");
  auto text = aggregate_text(agg);
  CHECK(text.find("Positive Feedback") != std::string::npos);
  CHECK(text.find("84.00% ± 0.040") != std::string::npos);
  CHECK(text.find("Micro-F1") != std::string::npos);

  CHECK_THROWS_AS(aggregate_runs({report_with(0.7, 0.6, 0.65, 0.75, 0.8)}), Error);
}

TEST_CASE("formatting") {
  CHECK(format_percent(0.8414) == "84.14%");
  CHECK(format_percent(1.0) == "100.00%");
  CHECK(format_mean_std({0.7612, 0.021}) == "76.12% ± 0.021");

  std::vector<LabelVector> t{LabelVector::from_indices({0}), LabelVector::from_indices({1})};
  auto r = overall_metrics(t, t);
  auto csv = metrics_csv(r);
  CHECK(csv.rfind("topic,f1,auc", 0) == 0);
  CHECK(metrics_text(r).find("Example-based") != std::string::npos);
  CHECK(metrics_json(r).find("\"micro_f1\"") != std::string::npos);
}
