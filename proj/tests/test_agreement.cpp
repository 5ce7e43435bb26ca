#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pxt/agreement.hpp"
#include "pxt/error.hpp"

using namespace pxt;

namespace {

AnnotationSet ann(std::string id, std::string who, LabelVector v) { return {std::move(id), std::move(who), v}; }

}  // namespace

TEST_CASE("per-comment kappa") {
  auto v = LabelVector::from_indices({0, 3});
  CHECK(cohen_kappa_comment(v, v).kappa == 1.0);
  CHECK_FALSE(cohen_kappa_comment(v, v).degenerate);

  auto ones = LabelVector::from_mask(0x3FF);
  auto zeros = LabelVector{};
  auto disjoint = cohen_kappa_comment(ones, zeros);
  CHECK(disjoint.observed == 0.0);
  CHECK(disjoint.expected == 0.0);
  CHECK(disjoint.kappa == 0.0);

  auto hand = cohen_kappa_comment(LabelVector::from_indices({0, 1}), LabelVector::from_indices({0, 2}));
  CHECK(hand.observed == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(hand.expected == doctest::Approx(0.68).epsilon(1e-12));
  CHECK(std::abs(hand.kappa - 0.375) <= 1e-12);
}

TEST_CASE("degenerate marginals") {
  auto none = cohen_kappa_comment(LabelVector{}, LabelVector{});
  CHECK(none.degenerate);
  CHECK(none.kappa == 1.0);
  auto all = cohen_kappa_comment(LabelVector::from_mask(0x3FF), LabelVector::from_mask(0x3FF));
  CHECK(all.degenerate);
  CHECK(all.kappa == 1.0);
}

TEST_CASE("kappa matches the 2x2 table oracle") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution bit(0.4);
  for (int trial = 0; trial < 500; ++trial) {
    int n = 2 + trial % 40;
    Eigen::ArrayXi a(n), b(n);
    std::vector<int> va(n), vb(n);
    for (int i = 0; i < n; ++i) {
      va[i] = a(i) = bit(rng);
      vb[i] = b(i) = bit(rng);
    }
    auto r = cohen_kappa(a, b);
    if (r.degenerate) continue;
    CHECK(std::abs(r.kappa - oracle::kappa(va, vb)) <= 1e-12);
  }
}

TEST_CASE("summary and review queue") {
  std::vector<AnnotationSet> sets;
  for (int i = 0; i < 10; ++i) {
    auto id = "c" + std::to_string(i);
    auto v = LabelVector::from_indices({static_cast<std::size_t>(i % 10)});
    sets.push_back(ann(id, "a", v));
    sets.push_back(ann(id, "b", v));
  }
  auto all_same = kappa_summary(sets);
  CHECK(all_same.mean_kappa == 1.0);
  CHECK(all_same.review_queue.empty());

  sets[7] = ann("c3", "b", LabelVector::from_indices({3, 4}));
  auto one_off = kappa_summary(sets);
  CHECK(one_off.review_queue == std::vector<std::string>{"c3"});
  CHECK(one_off.per_comment.size() == 10);
  CHECK(one_off.mean_kappa < 1.0);
  CHECK(kappa_csv(one_off).rfind("comment_id,annotator_a,annotator_b,kappa,degenerate\n", 0) == 0);
  CHECK(kappa_text(one_off).find("c3") != std::string::npos);
  CHECK(kappa_json(one_off).find("\"review_queue\"") != std::string::npos);

  sets.pop_back();
  try {
    kappa_summary(sets);
    FAIL("expected AnnotatorCountMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AnnotatorCountMismatch);
  }
}

TEST_CASE("input errors") {
  Eigen::ArrayXi a(3), b(4), e(0);
  a.setZero();
  b.setZero();
  CHECK_THROWS_AS(cohen_kappa(a, b), Error);
  CHECK_THROWS_AS(cohen_kappa(e, e), Error);
  CHECK_THROWS_AS(kappa_summary({}), Error);
}
