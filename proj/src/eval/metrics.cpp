#include "pxt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pxt/csv.hpp"
#include "pxt/error.hpp"

namespace pxt {

namespace {

void check_shapes(const LabelMatrix& y_true, const LabelMatrix& y_pred) {
  if (y_true.rows() != y_pred.rows() || y_true.cols() != y_pred.cols()) {
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("y_true is {}x{}, y_pred is {}x{}", y_true.rows(), y_true.cols(),
                            y_pred.rows(), y_pred.cols()));
  }
  if (y_true.rows() == 0 || y_true.cols() == 0) throw Error(ErrorCode::EmptyInput, "no comments to evaluate");
}

std::vector<std::string> resolve_names(Eigen::Index cols, const std::vector<std::string>& given) {
  if (!given.empty()) {
    if (static_cast<Eigen::Index>(given.size()) != cols) {
      throw Error(ErrorCode::LengthMismatch, "label name count does not match columns");
    }
    return given;
  }
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < cols; ++i) {
    names.push_back(cols == static_cast<Eigen::Index>(kTopicCount) ? std::string(topic_names()[i])
                                                                    : "label_" + std::to_string(i));
  }
  return names;
}

using ordered_json = nlohmann::ordered_json;

}  // namespace

LabelMatrix to_label_matrix(const std::vector<LabelVector>& rows) {
  LabelMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kTopicCount));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t t = 0; t < kTopicCount; ++t) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) = rows[r].test(t) ? 1 : 0;
    }
  }
  return m;
}

double f1_score(const ConfusionCounts& c) {
  long denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

std::vector<TopicMetrics> per_topic_metrics(const LabelMatrix& y_true, const LabelMatrix& y_pred,
                                            const std::vector<std::string>& label_names) {
  check_shapes(y_true, y_pred);
  auto names = resolve_names(y_true.cols(), label_names);

  const Eigen::Index n = y_true.rows();
  Eigen::ArrayXi tp = (y_true * y_pred).colwise().sum().transpose();
  Eigen::ArrayXi true_pos = y_true.colwise().sum().transpose();
  Eigen::ArrayXi pred_pos = y_pred.colwise().sum().transpose();

  std::vector<TopicMetrics> out;
  for (Eigen::Index t = 0; t < y_true.cols(); ++t) {
    TopicMetrics m;
    m.name = names[static_cast<std::size_t>(t)];
    m.counts.tp = tp(t);
    m.counts.fp = pred_pos(t) - tp(t);
    m.counts.fn = true_pos(t) - tp(t);
    m.counts.tn = n - m.counts.tp - m.counts.fp - m.counts.fn;
    m.f1_undefined = 2 * m.counts.tp + m.counts.fp + m.counts.fn == 0;
    m.f1 = f1_score(m.counts);
    long pos = m.counts.tp + m.counts.fn;
    long neg = m.counts.tn + m.counts.fp;
    if (pos == 0 || neg == 0) {
      m.auc_undefined = true;
      m.auc = 0.5;
    } else {
      double tpr = static_cast<double>(m.counts.tp) / static_cast<double>(pos);
      double tnr = static_cast<double>(m.counts.tn) / static_cast<double>(neg);
      m.auc = (tpr + tnr) / 2.0;
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<TopicMetrics> per_topic_metrics(const std::vector<LabelVector>& y_true,
                                            const std::vector<LabelVector>& y_pred) {
  if (y_true.size() != y_pred.size()) throw Error(ErrorCode::LengthMismatch, "y_true and y_pred differ in length");
  return per_topic_metrics(to_label_matrix(y_true), to_label_matrix(y_pred));
}

MetricsReport overall_metrics(const LabelMatrix& y_true, const LabelMatrix& y_pred,
                              const std::vector<std::string>& label_names) {
  MetricsReport r;
  r.per_topic = per_topic_metrics(y_true, y_pred, label_names);
  r.n_comments = static_cast<std::size_t>(y_true.rows());

  ConfusionCounts pooled;
  double macro = 0.0, weighted = 0.0;
  long support_total = 0;
  for (const auto& t : r.per_topic) {
    pooled.tp += t.counts.tp;
    pooled.fp += t.counts.fp;
    pooled.fn += t.counts.fn;
    pooled.tn += t.counts.tn;
    macro += t.f1;
    long support = t.counts.tp + t.counts.fn;
    weighted += static_cast<double>(support) * t.f1;
    support_total += support;
  }
  r.micro_f1 = f1_score(pooled);
  r.macro_f1 = macro / static_cast<double>(r.per_topic.size());
  r.weighted_undefined = support_total == 0;
  r.weighted_f1 = support_total == 0 ? 0.0 : weighted / static_cast<double>(support_total);

  Eigen::ArrayXd inter = (y_true * y_pred).rowwise().sum().cast<double>();
  Eigen::ArrayXd sizes = (y_true + y_pred).rowwise().sum().cast<double>();
  // both label sets empty: full agreement
  Eigen::ArrayXd per_comment = (sizes > 0).select(2.0 * inter / sizes.max(1.0), 1.0);
  r.example_based_f1 = per_comment.mean();
  return r;
}

MetricsReport overall_metrics(const std::vector<LabelVector>& y_true,
                              const std::vector<LabelVector>& y_pred) {
  if (y_true.size() != y_pred.size()) throw Error(ErrorCode::LengthMismatch, "y_true and y_pred differ in length");
  return overall_metrics(to_label_matrix(y_true), to_label_matrix(y_pred));
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd m;
  if (values.empty()) return m;
  Eigen::Map<const Eigen::ArrayXd> v(values.data(), static_cast<Eigen::Index>(values.size()));
  m.mean = v.mean();
  if (values.size() > 1) {
    const double n = static_cast<double>(values.size());
    Eigen::ArrayXd d = v - v(0);
    double ss = d.square().sum() - d.sum() * d.sum() / n;
    m.std = std::sqrt(std::max(0.0, ss) / (n - 1));
  }
  return m;
}

AggregateReport aggregate_runs(const std::vector<MetricsReport>& reports) {
  if (reports.size() < 2) {
    throw Error(ErrorCode::TooFewRuns, "aggregation needs at least 2 runs, got " + std::to_string(reports.size()));
  }
  AggregateReport a;
  a.n_runs = reports.size();
  a.n_comments = reports.front().n_comments;
  const std::size_t labels = reports.front().per_topic.size();
  for (const auto& r : reports) {
    if (r.per_topic.size() != labels) throw Error(ErrorCode::LengthMismatch, "runs disagree on label count");
  }
  auto collect = [&](auto field) {
    std::vector<double> v;
    for (const auto& r : reports) v.push_back(field(r));
    return mean_std(v);
  };
  for (std::size_t t = 0; t < labels; ++t) {
    a.names.push_back(reports.front().per_topic[t].name);
    a.topic_f1.push_back(collect([t](const MetricsReport& r) { return r.per_topic[t].f1; }));
    a.topic_auc.push_back(collect([t](const MetricsReport& r) { return r.per_topic[t].auc; }));
  }
  a.micro_f1 = collect([](const MetricsReport& r) { return r.micro_f1; });
  a.macro_f1 = collect([](const MetricsReport& r) { return r.macro_f1; });
  a.weighted_f1 = collect([](const MetricsReport& r) { return r.weighted_f1; });
  a.example_based_f1 = collect([](const MetricsReport& r) { return r.example_based_f1; });
  return a;
}

std::string format_percent(double value) { return fmt::format("{:.2f}%", value * 100.0); }

std::string format_mean_std(const MeanStd& m) {
  return fmt::format("{:.2f}% ± {:.3f}", m.mean * 100.0, m.std);
}

std::string metrics_json(const MetricsReport& report) {
  ordered_json j;
  j["n_comments"] = report.n_comments;
  auto& topics = j["per_topic"] = ordered_json::array();
  for (const auto& t : report.per_topic) {
    ordered_json e;
    e["topic"] = t.name;
    e["f1"] = t.f1;
    e["auc"] = t.auc;
    e["tp"] = t.counts.tp;
    e["fp"] = t.counts.fp;
    e["fn"] = t.counts.fn;
    e["tn"] = t.counts.tn;
    e["f1_undefined"] = t.f1_undefined;
    e["auc_undefined"] = t.auc_undefined;
    topics.push_back(std::move(e));
  }
  j["example_based_f1"] = report.example_based_f1;
  j["micro_f1"] = report.micro_f1;
  j["macro_f1"] = report.macro_f1;
  j["weighted_f1"] = report.weighted_f1;
  j["weighted_undefined"] = report.weighted_undefined;
  return j.dump(2) + "\n";
}

namespace {

std::size_t name_width(const std::vector<std::string>& names) {
  std::size_t w = 6;
  for (const auto& n : names) w = std::max(w, n.size());
  return w;
}

}  // namespace

std::string metrics_text(const MetricsReport& report) {
  std::vector<std::string> names;
  for (const auto& t : report.per_topic) names.push_back(t.name);
  const std::size_t w = name_width(names);

  std::string out = fmt::format("Per-topic results (n = {})\n", report.n_comments);
  out += fmt::format("{:<{}}  {:>8}  {:>8}\n", "Topic", w, "F1", "AUC");
  out += fmt::format("{:-<{}}  {:->8}  {:->8}\n", "", w, "", "");
  for (const auto& t : report.per_topic) {
    std::string flag = (t.f1_undefined || t.auc_undefined) ? "  *" : "";
    out += fmt::format("{:<{}}  {:>8}  {:>8}{}\n", t.name, w, format_percent(t.f1), format_percent(t.auc), flag);
  }
  out += "\nOverall results\n";
  out += fmt::format("{:>16}  {:>10}  {:>10}  {:>11}\n", "Example-based F1", "Micro-F1", "Macro-F1", "Weighted-F1");
  out += fmt::format("{:>16}  {:>10}  {:>10}  {:>11}\n", format_percent(report.example_based_f1),
                     format_percent(report.micro_f1), format_percent(report.macro_f1),
                     format_percent(report.weighted_f1));
  bool any_flag = std::any_of(report.per_topic.begin(), report.per_topic.end(),
                              [](const TopicMetrics& t) { return t.f1_undefined || t.auc_undefined; });
  if (any_flag) out += "\n* zero denominator: F1 reported as 0 or AUC as 50.00%\n";
  return out;
}

std::string aggregate_json(const AggregateReport& report) {
  auto ms = [](const MeanStd& m) { return ordered_json{{"mean", m.mean}, {"std", m.std}}; };
  ordered_json j;
  j["n_runs"] = report.n_runs;
  j["n_comments"] = report.n_comments;
  auto& topics = j["per_topic"] = ordered_json::array();
  for (std::size_t t = 0; t < report.names.size(); ++t) {
    topics.push_back({{"topic", report.names[t]}, {"f1", ms(report.topic_f1[t])}, {"auc", ms(report.topic_auc[t])}});
  }
  j["example_based_f1"] = ms(report.example_based_f1);
  j["micro_f1"] = ms(report.micro_f1);
  j["macro_f1"] = ms(report.macro_f1);
  j["weighted_f1"] = ms(report.weighted_f1);
  return j.dump(2) + "\n";
}

std::string aggregate_text(const AggregateReport& report) {
  const std::size_t w = name_width(report.names);
  // "± " is two bytes wider than it renders; pad by display width
  auto cell = [](const MeanStd& m, std::size_t width) {
    std::string s = format_mean_std(m);
    std::size_t shown = s.size() - 1;
    return std::string(shown < width ? width - shown : 0, ' ') + s;
  };
  std::string out = fmt::format("Per-topic results, mean ± std over {} runs (n = {})\n", report.n_runs, report.n_comments);
  out += fmt::format("{:<{}}  {:>16}  {:>16}\n", "Topic", w, "F1", "AUC");
  out += fmt::format("{:-<{}}  {:->16}  {:->16}\n", "", w, "", "");
  for (std::size_t t = 0; t < report.names.size(); ++t) {
    out += fmt::format("{:<{}}  {}  {}\n", report.names[t], w, cell(report.topic_f1[t], 16), cell(report.topic_auc[t], 16));
  }
  out += "\nOverall results\n";
  out += fmt::format("{:>16}  {:>16}  {:>16}  {:>16}\n", "Example-based F1", "Micro-F1", "Macro-F1", "Weighted-F1");
  out += fmt::format("{}  {}  {}  {}\n", cell(report.example_based_f1, 16), cell(report.micro_f1, 16),
                     cell(report.macro_f1, 16), cell(report.weighted_f1, 16));
  return out;
}

std::string metrics_csv(const MetricsReport& report) {
  std::string out = csv::format_row({"topic", "f1", "auc", "tp", "fp", "fn", "tn"});
  for (const auto& t : report.per_topic) {
    out += csv::format_row({t.name, fmt::format("{:.6f}", t.f1), fmt::format("{:.6f}", t.auc),
                            std::to_string(t.counts.tp), std::to_string(t.counts.fp), std::to_string(t.counts.fn),
                            std::to_string(t.counts.tn)});
  }
  for (auto [name, value] : {std::pair{"example_based_f1", report.example_based_f1}, std::pair{"micro_f1", report.micro_f1},
                             std::pair{"macro_f1", report.macro_f1}, std::pair{"weighted_f1", report.weighted_f1}}) {
    out += csv::format_row({name, fmt::format("{:.6f}", value), "", "", "", "", ""});
  }
  return out;
}

std::string aggregate_csv(const AggregateReport& report) {
  std::string out = csv::format_row({"metric", "mean", "std"});
  auto row = [&](const std::string& name, const MeanStd& m) {
    out += csv::format_row({name, fmt::format("{:.6f}", m.mean), fmt::format("{:.6f}", m.std)});
  };
  for (std::size_t t = 0; t < report.names.size(); ++t) {
    row(report.names[t] + " F1", report.topic_f1[t]);
    row(report.names[t] + " AUC", report.topic_auc[t]);
  }
  row("example_based_f1", report.example_based_f1);
  row("micro_f1", report.micro_f1);
  row("macro_f1", report.macro_f1);
  row("weighted_f1", report.weighted_f1);
  return out;
}

}  // namespace pxt
