#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pxt/topics.hpp"

namespace pxt {

/// n_comments x n_labels indicator matrix (entries 0/1).
using LabelMatrix = Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic>;

LabelMatrix to_label_matrix(const std::vector<LabelVector>& rows);

struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;

  long total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// 2tp / (2tp + fp + fn); 0 when the denominator is 0.
double f1_score(const ConfusionCounts& c);

struct TopicMetrics {
  std::string name;
  ConfusionCounts counts;
  double f1 = 0.0;
  /// Balanced accuracy of the hard predictions, (TPR + TNR) / 2.
  double auc = 0.5;
  bool f1_undefined = false;   // 2tp + fp + fn == 0
  bool auc_undefined = false;  // one class absent from y_true; auc reported as 0.5
};

struct MetricsReport {
  std::vector<TopicMetrics> per_topic;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  double example_based_f1 = 0.0;
  std::size_t n_comments = 0;
  bool weighted_undefined = false;  // no positive labels in y_true
};

/// Label names default to the canonical topics when there are ten columns,
/// "label_<i>" otherwise. Throws LengthMismatch / EmptyInput.
std::vector<TopicMetrics> per_topic_metrics(const LabelMatrix& y_true, const LabelMatrix& y_pred,
                                            const std::vector<std::string>& label_names = {});
std::vector<TopicMetrics> per_topic_metrics(const std::vector<LabelVector>& y_true,
                                            const std::vector<LabelVector>& y_pred);

MetricsReport overall_metrics(const LabelMatrix& y_true, const LabelMatrix& y_pred,
                              const std::vector<std::string>& label_names = {});
MetricsReport overall_metrics(const std::vector<LabelVector>& y_true,
                              const std::vector<LabelVector>& y_pred);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1) standard deviation
};

MeanStd mean_std(const std::vector<double>& values);

struct AggregateReport {
  std::size_t n_runs = 0;
  std::size_t n_comments = 0;
  std::vector<std::string> names;
  std::vector<MeanStd> topic_f1;
  std::vector<MeanStd> topic_auc;
  MeanStd micro_f1;
  MeanStd macro_f1;
  MeanStd weighted_f1;
  MeanStd example_based_f1;
};

/// Throws TooFewRuns below two reports, LengthMismatch when label sets differ.
AggregateReport aggregate_runs(const std::vector<MetricsReport>& reports);

/// "84.14%"
std::string format_percent(double value);
/// "76.12% ± 0.021": mean as a percentage, std as a fraction.
std::string format_mean_std(const MeanStd& m);

std::string metrics_json(const MetricsReport& report);
/// Per-topic F1/AUC table followed by the overall row block.
std::string metrics_text(const MetricsReport& report);
std::string metrics_csv(const MetricsReport& report);
std::string aggregate_json(const AggregateReport& report);
std::string aggregate_text(const AggregateReport& report);
std::string aggregate_csv(const AggregateReport& report);

}  // namespace pxt
