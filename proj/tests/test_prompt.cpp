#include <doctest.h>

#include <filesystem>
#include <regex>

#include "pxt/corpus.hpp"
#include "pxt/error.hpp"
#include "pxt/prompt.hpp"

using namespace pxt;

namespace {

const std::filesystem::path kSample = std::filesystem::path(PXT_SOURCE_DIR) / "data/sample";

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + needle.size())) ++n;
  return n;
}

std::size_t example_blocks(const std::string& prompt) {
  static const std::regex header("(^|\n)Example [0-9]+:\n");
  return static_cast<std::size_t>(
      std::distance(std::sregex_iterator(prompt.begin(), prompt.end(), header), std::sregex_iterator()));
}

template <typename F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("answer round trip over every label vector") {
  for (std::uint16_t mask = 0; mask < 1024; ++mask) {
    auto v = LabelVector::from_mask(mask);
    CHECK(parse_response(render_answer(v), canonical_topics()) == v);
  }
  CHECK(render_answer(LabelVector{}) == "[]");
  CHECK(render_answer(LabelVector::from_indices({0, 1})) == "[\"Positive Feedback\", \"Noisy Environment\"]");
}

TEST_CASE("response parsing") {
  const auto& topics = canonical_topics();
  CHECK(parse_response("[\"Positive Feedback\"]", topics) == LabelVector::from_indices({0}));
  CHECK(parse_response("Positive Feedback, noisy environment", topics) == LabelVector::from_indices({0, 1}));
  CHECK(parse_response("Reasoning about staff...\n[\"Staff-related Issues\", \"Staff-related Issues\"]", topics) ==
        LabelVector::from_indices({4}));
  CHECK(parse_response("['long waiting time', 'Room-related Issues.']", topics) == LabelVector::from_indices({5, 7}));
  CHECK(parse_response("- Medical-related Issues\n- Discharge-related Issues", topics) ==
        LabelVector::from_indices({8, 9}));
  CHECK(parse_response("[]", topics).none());
  CHECK(error_code_of([&] { parse_response("[\"Unknown Topic\"]", topics); }) == ErrorCode::UnknownLabel);
  CHECK(error_code_of([&] { parse_response("   ", topics); }) == ErrorCode::EmptyResponse);
}

TEST_CASE("k-shot prompt structure") {
  auto tmpl = load_prompt_template(kSample / "template.txt");
  auto pool = load_shot_pool(kSample / "shots.jsonl");
  REQUIRE(pool.size() >= 5);
  for (std::size_t k : {0, 1, 3, 5}) {
    CAPTURE(k);
    std::vector<ShotExample> shots(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    auto prompt = build_prompt(tmpl, canonical_topics(), shots, "the food was cold");
    CHECK(example_blocks(prompt) == k);
    for (const auto& t : canonical_topics()) {
      CHECK(count_of(prompt, "- " + t.name + ": ") == 1);
    }
    for (std::size_t i = 0; i < k; ++i) CHECK(prompt.find(pool[i].text) != std::string::npos);
    CHECK(prompt.find("Comment: \"the food was cold\"") != std::string::npos);
    CHECK(prompt.find("{{") == std::string::npos);
  }
  SUBCASE("pool order preserved") {
    auto prompt = build_prompt(tmpl, canonical_topics(), {pool[0], pool[1], pool[2]}, "x");
    auto a = prompt.find(pool[0].text), b = prompt.find(pool[1].text), c = prompt.find(pool[2].text);
    CHECK(a < b);
    CHECK(b < c);
  }
  SUBCASE("deterministic") {
    CHECK(build_prompt(tmpl, canonical_topics(), pool, "x") == build_prompt(tmpl, canonical_topics(), pool, "x"));
  }
}

TEST_CASE("default template and chain of thought") {
  auto plain = default_prompt_template();
  auto p = build_prompt(plain, canonical_topics(), {}, "noisy at night");
  CHECK(example_blocks(p) == 0);
  CHECK(p.find(std::string(chain_of_thought_directive())) == std::string::npos);

  auto cot = plain;
  cot.style = PromptStyle::ChainOfThought;
  auto q = build_prompt(cot, canonical_topics(), {}, "noisy at night");
  CHECK(q.size() > p.size());
  CHECK(q.rfind(std::string(chain_of_thought_directive())) == q.size() - chain_of_thought_directive().size());
  CHECK_FALSE(plain.preamble().empty());
  CHECK_FALSE(plain.answer_format_instruction().empty());
}

TEST_CASE("template validation") {
  PromptTemplate t;
  t.layout = "Topics {{TOPICS}} then {{COMMENT}}";
  CHECK(error_code_of([&] { validate_template(t); }) == ErrorCode::TemplatePlaceholderMissing);
  t.layout = "{{EXAMPLES}} {{TOPICS}} {{COMMENT}}";
  CHECK(error_code_of([&] { validate_template(t); }) == ErrorCode::TemplatePlaceholderMissing);
  t.layout = "{{TOPICS}} {{EXAMPLES}} {{COMMENT}} {{COMMENT}}";
  CHECK(error_code_of([&] { validate_template(t); }) == ErrorCode::TemplatePlaceholderMissing);
  t.layout = "{{TOPICS}} {{EXAMPLES}} {{COMMENT}}";
  CHECK_NOTHROW(validate_template(t));
}

TEST_CASE("comment text with tag-like content is inserted verbatim") {
  auto p = build_prompt(default_prompt_template(), canonical_topics(), {}, "I typed {{TOPICS}} here");
  CHECK(p.find("I typed {{TOPICS}} here") != std::string::npos);
}

TEST_CASE("shot pool loading") {
  auto pool = load_shot_pool(kSample / "shots.jsonl");
  CHECK(pool[0].labels == LabelVector::from_indices({0}));
  CHECK(error_code_of([] { load_shot_pool(kSample / "nope.jsonl"); }) == ErrorCode::Io);
}
