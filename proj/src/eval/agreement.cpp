#include "pxt/agreement.hpp"

#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pxt/csv.hpp"
#include "pxt/error.hpp"

namespace pxt {

KappaResult cohen_kappa(const Eigen::Ref<const Eigen::ArrayXi>& a, const Eigen::Ref<const Eigen::ArrayXi>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "kappa inputs differ in length");
  if (a.size() == 0) throw Error(ErrorCode::EmptyInput, "kappa of empty vectors");
  const double n = static_cast<double>(a.size());
  KappaResult r;
  r.observed = (a == b).cast<double>().sum() / n;
  const double pa = a.cast<double>().sum() / n;
  const double pb = b.cast<double>().sum() / n;
  r.expected = pa * pb + (1.0 - pa) * (1.0 - pb);
  if (r.expected >= 1.0) {
    r.degenerate = true;
    r.kappa = r.observed >= 1.0 ? 1.0 : 0.0;
  } else {
    r.kappa = (r.observed - r.expected) / (1.0 - r.expected);
  }
  return r;
}

KappaResult cohen_kappa_comment(const LabelVector& a, const LabelVector& b) {
  Eigen::ArrayXi va(static_cast<Eigen::Index>(kTopicCount));
  Eigen::ArrayXi vb(static_cast<Eigen::Index>(kTopicCount));
  for (std::size_t t = 0; t < kTopicCount; ++t) {
    va(static_cast<Eigen::Index>(t)) = a.test(t) ? 1 : 0;
    vb(static_cast<Eigen::Index>(t)) = b.test(t) ? 1 : 0;
  }
  return cohen_kappa(va, vb);
}

KappaSummary kappa_summary(const std::vector<AnnotationSet>& annotations) {
  if (annotations.empty()) throw Error(ErrorCode::EmptyInput, "no annotations");
  std::vector<std::string> order;
  std::map<std::string, std::vector<const AnnotationSet*>> by_comment;
  for (const auto& a : annotations) {
    auto& list = by_comment[a.comment_id];
    if (list.empty()) order.push_back(a.comment_id);
    list.push_back(&a);
  }
  KappaSummary s;
  double total = 0.0;
  for (const auto& id : order) {
    const auto& list = by_comment[id];
    if (list.size() != 2) {
      throw Error(ErrorCode::AnnotatorCountMismatch,
                  fmt::format("comment '{}' has {} annotation sets, expected 2", id, list.size()));
    }
    CommentAgreement c{id, list[0]->annotator_id, list[1]->annotator_id,
                       cohen_kappa_comment(list[0]->labels, list[1]->labels)};
    total += c.result.kappa;
    if (c.result.degenerate) ++s.n_degenerate;
    if (c.result.kappa < 1.0) s.review_queue.push_back(id);
    s.per_comment.push_back(std::move(c));
  }
  s.mean_kappa = total / static_cast<double>(s.per_comment.size());
  return s;
}

std::string kappa_json(const KappaSummary& summary) {
  nlohmann::ordered_json j;
  j["n_comments"] = summary.per_comment.size();
  j["mean_kappa"] = summary.mean_kappa;
  j["n_degenerate"] = summary.n_degenerate;
  j["review_queue"] = summary.review_queue;
  auto& rows = j["per_comment"] = nlohmann::ordered_json::array();
  for (const auto& c : summary.per_comment) {
    rows.push_back({{"comment_id", c.comment_id},
                    {"annotators", {c.annotator_a, c.annotator_b}},
                    {"kappa", c.result.kappa},
                    {"observed", c.result.observed},
                    {"expected", c.result.expected},
                    {"degenerate", c.result.degenerate}});
  }
  return j.dump(2) + "\n";
}

std::string kappa_text(const KappaSummary& summary) {
  std::string out = fmt::format("Inter-annotator agreement over {} comments\n", summary.per_comment.size());
  out += fmt::format("Mean Cohen's kappa: {:.4f}\n", summary.mean_kappa);
  out += fmt::format("Degenerate comments (p_e = 1): {}\n", summary.n_degenerate);
  out += fmt::format("Review queue ({}):\n", summary.review_queue.size());
  for (const auto& c : summary.per_comment) {
    if (c.result.kappa < 1.0) out += fmt::format("  {}  kappa = {:.4f}\n", c.comment_id, c.result.kappa);
  }
  return out;
}

std::string kappa_csv(const KappaSummary& summary) {
  std::string out = csv::format_row({"comment_id", "annotator_a", "annotator_b", "kappa", "degenerate"});
  for (const auto& c : summary.per_comment) {
    out += csv::format_row({c.comment_id, c.annotator_a, c.annotator_b, fmt::format("{:.6f}", c.result.kappa),
                            c.result.degenerate ? "1" : "0"});
  }
  return out;
}

}  // namespace pxt
