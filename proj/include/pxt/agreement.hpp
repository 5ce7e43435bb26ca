#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "pxt/corpus.hpp"
#include "pxt/topics.hpp"

namespace pxt {

struct KappaResult {
  double kappa = 0.0;
  double observed = 0.0;  // p_o
  double expected = 0.0;  // p_e
  bool degenerate = false;  // p_e == 1; kappa is 1 when p_o == 1, else 0
};

/// Cohen's kappa between two binary vectors of equal length, with chance
/// agreement from the marginals of these vectors.
KappaResult cohen_kappa(const Eigen::Ref<const Eigen::ArrayXi>& a, const Eigen::Ref<const Eigen::ArrayXi>& b);
KappaResult cohen_kappa_comment(const LabelVector& a, const LabelVector& b);

struct CommentAgreement {
  std::string comment_id;
  std::string annotator_a;
  std::string annotator_b;
  KappaResult result;
};

struct KappaSummary {
  std::vector<CommentAgreement> per_comment;  // first-appearance order
  double mean_kappa = 0.0;
  std::size_t n_degenerate = 0;
  std::vector<std::string> review_queue;  // comments with kappa < 1
};

/// Throws AnnotatorCountMismatch unless every comment has exactly two sets.
KappaSummary kappa_summary(const std::vector<AnnotationSet>& annotations);

std::string kappa_json(const KappaSummary& summary);
std::string kappa_text(const KappaSummary& summary);
std::string kappa_csv(const KappaSummary& summary);

}  // namespace pxt
