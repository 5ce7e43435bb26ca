#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pxt/corpus.hpp"

namespace pxt::phi {

enum class Category { Name, Date, Phone, Address, Email, Url, IdNumber, CustomTerm };

inline constexpr std::array<Category, 8> kAllCategories{
    Category::Name,  Category::Date, Category::Phone,    Category::Address,
    Category::Email, Category::Url,  Category::IdNumber, Category::CustomTerm};

/// Overlap resolution order, strongest first.
inline constexpr std::array<Category, 8> kPriorityOrder{
    Category::IdNumber, Category::Phone, Category::Date, Category::Email,
    Category::Url,      Category::Address, Category::Name, Category::CustomTerm};

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view name);
/// "[NAME]", "[DATE]", "[PHONE]", "[ADDRESS]", "[EMAIL]", "[URL]", "[ID]", "[TERM]".
std::string_view placeholder(Category c);

struct Span {
  std::size_t start = 0;  // byte offset into the NFC-normalized text
  std::size_t end = 0;    // exclusive
  Category category = Category::Name;
  std::string matched_text;

  std::size_t length() const { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct Config {
  std::vector<std::string> name_gazetteer;  // exact staff names, redacted as [NAME]
  std::vector<std::string> term_gazetteer;  // hospitals and other deny-listed terms, [TERM]
  std::set<Category> enabled{kAllCategories.begin(), kAllCategories.end()};
  std::size_t sample_size = 5;
  std::uint64_t seed = 0;

  bool is_enabled(Category c) const { return enabled.count(c) != 0; }
};

/// One UTF-8 term per line; blank lines and lines starting with '#' skipped.
std::vector<std::string> load_gazetteer(const std::filesystem::path& path);

/// Canonical composition (NFC). Invalid UTF-8 sequences become U+FFFD.
std::string normalize_nfc(std::string_view text);

/// All matches of one category's rules, leftmost-longest, non-overlapping.
/// The text is NFC-normalized first; offsets refer to the normalized text.
std::vector<Span> scan_category(std::string_view text, Category category, const Config& config);

/// Union of the enabled categories, overlaps resolved by kPriorityOrder,
/// then length, then start. Matches that only become visible once their
/// neighbours are replaced by placeholders are added as well, so the result
/// redacts to a text with no detectable PHI. Sorted by start.
std::vector<Span> detect_all(std::string_view text, const Config& config);

struct RedactionResult {
  std::string normalized_text;
  std::string redacted_text;
  std::vector<Span> spans;
  std::map<Category, std::size_t> placeholder_counts;
};

RedactionResult redact(std::string_view text, const Config& config);

/// Replaces each span of `normalized_text` by its placeholder.
std::string apply_spans(std::string_view normalized_text, const std::vector<Span>& spans);

struct ReviewItem {
  std::string comment_id;
  std::string original;
  std::string redacted;
  std::vector<Span> spans;
};

struct RedactionReport {
  std::size_t n_comments = 0;
  std::size_t n_with_phi = 0;
  double phi_fraction = 0.0;
  std::map<Category, std::size_t> placeholder_counts;  // every category present, zero or not
  std::vector<ReviewItem> sample;                       // in corpus order
};

struct CorpusRedaction {
  std::vector<Comment> redacted;
  RedactionReport report;
};

CorpusRedaction redact_corpus(const std::vector<Comment>& comments, const Config& config);
RedactionReport redaction_report(const std::vector<Comment>& comments, const Config& config);

std::string report_json(const RedactionReport& report);
std::string report_text(const RedactionReport& report);
/// category,count rows.
std::string report_csv(const RedactionReport& report);

/// Seeded sample of `k` distinct indices out of [0, n), ascending.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace pxt::phi
