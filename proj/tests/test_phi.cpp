#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "pxt/phi.hpp"

using namespace pxt;
using phi::Category;

namespace {

const std::filesystem::path kData = std::filesystem::path(PXT_SOURCE_DIR) / "tests/data";

phi::Config adversarial_config() {
  phi::Config c;
  c.name_gazetteer = phi::load_gazetteer(kData / "phi_names.txt");
  c.term_gazetteer = phi::load_gazetteer(kData / "phi_terms.txt");
  return c;
}

struct Case {
  std::string text;
  std::multiset<std::pair<std::string, std::string>> spans;
};

std::vector<Case> adversarial_cases() {
  std::ifstream in(kData / "phi_adversarial.jsonl");
  std::vector<Case> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    Case c{j.at("text").get<std::string>(), {}};
    for (const auto& s : j.at("spans")) c.spans.insert({s.at("category").get<std::string>(), s.at("text").get<std::string>()});
    out.push_back(std::move(c));
  }
  return out;
}

std::multiset<std::pair<std::string, std::string>> span_set(const std::vector<phi::Span>& spans) {
  std::multiset<std::pair<std::string, std::string>> out;
  for (const auto& s : spans) out.insert({std::string(phi::to_string(s.category)), s.matched_text});
  return out;
}

}  // namespace

TEST_CASE("single-rule examples") {
  phi::Config c;
  auto one = [&](std::string_view text, Category cat) { return phi::scan_category(text, cat, c); };

  auto ssn = one("SSN 123-45-6789", Category::IdNumber);
  REQUIRE(ssn.size() == 1);
  CHECK(ssn[0].matched_text == "123-45-6789");

  auto email = one("Email me at jane.doe@example.com", Category::Email);
  REQUIRE(email.size() == 1);
  CHECK(email[0].matched_text == "jane.doe@example.com");

  auto name = one("Dr. Smith was great", Category::Name);
  REQUIRE(name.size() == 1);
  CHECK(name[0].matched_text == "Smith");
  CHECK(name[0].start == 4);

  CHECK(one("discharged on 01/02/2023 and again March 3, 2023", Category::Date).size() == 2);
}

TEST_CASE("detect_all ordering and identity") {
  phi::Config c;
  CHECK(phi::detect_all("", c).empty());
  auto spans = phi::detect_all("mail a@b.org or call 555-123-4567", c);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].category == Category::Email);
  CHECK(spans[1].category == Category::Phone);
  CHECK(spans[0].start < spans[1].start);
}

TEST_CASE("overlap priority keeps the stronger category") {
  phi::Config c;
  auto spans = phi::detect_all("MRN 5552013344", c);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].category == Category::IdNumber);

  auto dated = phi::detect_all("see https://x.org/01/02/2023 now", c);
  REQUIRE_FALSE(dated.empty());
  CHECK(std::any_of(dated.begin(), dated.end(), [](const phi::Span& s) { return s.matched_text == "01/02/2023"; }));
  CHECK(phi::detect_all(phi::apply_spans(phi::normalize_nfc("see https://x.org/01/02/2023 now"), dated), c).empty());
}

TEST_CASE("redaction placeholders") {
  phi::Config c;
  auto r = phi::redact("Dr. Smith called 555-123-4567", c);
  CHECK(r.redacted_text == "Dr. [NAME] called [PHONE]");
  CHECK(r.placeholder_counts.at(Category::Name) == 1);
  CHECK(r.placeholder_counts.at(Category::Phone) == 1);

  auto empty = phi::redact("", c);
  CHECK(empty.redacted_text.empty());
  CHECK(empty.spans.empty());
}

TEST_CASE("disabled categories are left alone") {
  phi::Config c;
  c.enabled = {Category::Phone};
  CHECK(phi::redact("Dr. Smith called 555-123-4567", c).redacted_text == "Dr. Smith called [PHONE]");
}

TEST_CASE("NFC normalization") {
  // e + combining acute composes to U+00E9
  CHECK(phi::normalize_nfc("Cafe\xCC\x81") == "Caf\xC3\xA9");
  CHECK(phi::normalize_nfc("bad \xFF byte") == "bad \xEF\xBF\xBD byte");
  phi::Config c;
  c.name_gazetteer = {"Ren\xC3\xA9"};
  CHECK(phi::redact("ask Rene\xCC\x81 please", c).redacted_text == "ask [NAME] please");
}

TEST_CASE("adversarial corpus") {
  auto cases = adversarial_cases();
  REQUIRE(cases.size() >= 50);
  auto config = adversarial_config();

  std::set<std::string> categories_seen;
  for (const auto& c : cases) {
    CAPTURE(c.text);
    auto r = phi::redact(c.text, config);
    CHECK(span_set(r.spans) == c.spans);
    for (const auto& s : c.spans) categories_seen.insert(s.first);

    // conservation: text outside spans is untouched
    CHECK(phi::apply_spans(r.normalized_text, r.spans) == r.redacted_text);
    std::size_t kept = r.normalized_text.size();
    for (const auto& s : r.spans) kept -= s.length();
    std::size_t placeholder_bytes = 0;
    for (const auto& s : r.spans) placeholder_bytes += phi::placeholder(s.category).size();
    CHECK(r.redacted_text.size() == kept + placeholder_bytes);

    // safety and idempotence
    CHECK(phi::detect_all(r.redacted_text, config).empty());
    CHECK(phi::redact(r.redacted_text, config).redacted_text == r.redacted_text);
  }
  CHECK(categories_seen.size() == phi::kAllCategories.size());
}

TEST_CASE("random texts redact to a clean fixpoint") {
  const std::vector<std::string> pieces{"Dr.",    "Smith", "555",     "-",     "123",  "4567", "01/02/2023",
                                        "March",  "3",     "@",       "x.org", "www.", "42",   "Oak",
                                        "Street", "MRN",   "1234567", "Kevin", " ",    "[",    "]",
                                        "NAME",   "the",   "nurse",   ",",     ".",    "Apt",  "St."};
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::uniform_int_distribution<int> length(1, 25);
  auto config = adversarial_config();
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    for (int k = length(rng); k > 0; --k) {
      text += pieces[pick(rng)];
      if (rng() % 2) text += ' ';
    }
    CAPTURE(text);
    auto r = phi::redact(text, config);
    CHECK(phi::detect_all(r.redacted_text, config).empty());
    CHECK(phi::redact(r.redacted_text, config).redacted_text == r.redacted_text);
  }
}

TEST_CASE("corpus report") {
  std::vector<Comment> corpus;
  for (int i = 0; i < 10; ++i) {
    std::string text = "comment " + std::to_string(i);
    if (i == 2 || i == 7) text += " call 555-123-456" + std::to_string(i);
    corpus.push_back({"c" + std::to_string(i), text});
  }
  phi::Config c;
  c.sample_size = 5;
  c.seed = 11;
  auto out = phi::redact_corpus(corpus, c);
  CHECK(out.redacted.size() == 10);
  CHECK(out.report.placeholder_counts.at(Category::Phone) == 2);
  CHECK(out.report.placeholder_counts.at(Category::Email) == 0);
  CHECK(out.report.n_with_phi == 2);
  CHECK(out.report.phi_fraction == doctest::Approx(0.2));
  CHECK(out.report.sample.size() == 5);
  CHECK(out.redacted[2].text == "comment 2 call [PHONE]");

  auto again = phi::redact_corpus(corpus, c);
  for (std::size_t i = 0; i < 5; ++i) CHECK(again.report.sample[i].comment_id == out.report.sample[i].comment_id);

  std::vector<Comment> clean{{"a", "all good"}, {"b", "fine"}};
  CHECK(phi::redaction_report(clean, c).phi_fraction == 0.0);

  CHECK_FALSE(phi::report_json(out.report).empty());
  CHECK(phi::report_csv(out.report).rfind("category,count\n", 0) == 0);
  CHECK(phi::report_text(out.report).find("[PHONE]") != std::string::npos);
}

TEST_CASE("sample indices") {
  auto a = phi::sample_indices(100, 5, 3);
  CHECK(a == phi::sample_indices(100, 5, 3));
  CHECK(a.size() == 5);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 5);
  CHECK(phi::sample_indices(3, 5, 3) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("gazetteer files") {
  auto terms = phi::load_gazetteer(kData / "phi_terms.txt");
  CHECK(terms == std::vector<std::string>{"St. Mary Hospital", "Riverside Medical Center"});
}
