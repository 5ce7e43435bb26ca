#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pxt/error.hpp"
#include "pxt/phi.hpp"
#include "rules.hpp"

namespace pxt::phi {

namespace {

std::size_t priority_rank(Category c) {
  return static_cast<std::size_t>(std::find(kPriorityOrder.begin(), kPriorityOrder.end(), c) -
                                  kPriorityOrder.begin());
}

bool overlaps(const Span& a, const Span& b) { return a.start < b.end && b.start < a.end; }

std::vector<Span> scan_enabled(std::string_view normalized, const Config& config) {
  std::vector<Span> all;
  for (Category c : kPriorityOrder) {
    if (!config.is_enabled(c)) continue;
    auto spans = detail::scan_normalized(normalized, c, config);
    all.insert(all.end(), spans.begin(), spans.end());
  }
  return all;
}

std::vector<Span> resolve(std::vector<Span> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(), [](const Span& a, const Span& b) {
    auto ra = priority_rank(a.category), rb = priority_rank(b.category);
    if (ra != rb) return ra < rb;
    if (a.length() != b.length()) return a.length() > b.length();
    return a.start < b.start;
  });
  std::vector<Span> accepted;
  for (auto& c : candidates) {
    bool clash = std::any_of(accepted.begin(), accepted.end(),
                             [&](const Span& a) { return overlaps(a, c); });
    if (!clash) accepted.push_back(std::move(c));
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const Span& a, const Span& b) { return a.start < b.start; });
  return accepted;
}

// Offset bookkeeping between the normalized text and its redaction.
struct Piece {
  std::size_t redacted_begin;
  std::size_t redacted_end;
  std::size_t original_begin;
  std::size_t original_end;
  bool placeholder;
};

std::vector<Piece> layout(std::size_t text_size, const std::vector<Span>& spans) {
  std::vector<Piece> pieces;
  std::size_t orig = 0, red = 0;
  for (const auto& s : spans) {
    if (s.start > orig) {
      pieces.push_back({red, red + (s.start - orig), orig, s.start, false});
      red += s.start - orig;
    }
    std::size_t len = placeholder(s.category).size();
    pieces.push_back({red, red + len, s.start, s.end, true});
    red += len;
    orig = s.end;
  }
  if (orig < text_size) pieces.push_back({red, red + (text_size - orig), orig, text_size, false});
  return pieces;
}

// Maps a redacted-text offset back; offsets inside a placeholder snap
// outward to cover the whole replaced span.
std::size_t map_back(const std::vector<Piece>& pieces, std::size_t offset, bool is_end) {
  for (const auto& p : pieces) {
    bool inside = is_end ? (offset > p.redacted_begin && offset <= p.redacted_end)
                         : (offset >= p.redacted_begin && offset < p.redacted_end);
    if (!inside) continue;
    if (p.placeholder) return is_end ? p.original_end : p.original_begin;
    return p.original_begin + (offset - p.redacted_begin);
  }
  return pieces.empty() ? 0 : pieces.back().original_end;
}

}  // namespace

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Name: return "Name";
    case Category::Date: return "Date";
    case Category::Phone: return "Phone";
    case Category::Address: return "Address";
    case Category::Email: return "Email";
    case Category::Url: return "Url";
    case Category::IdNumber: return "IdNumber";
    case Category::CustomTerm: return "CustomTerm";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view name) {
  for (Category c : kAllCategories) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view placeholder(Category c) {
  switch (c) {
    case Category::Name: return "[NAME]";
    case Category::Date: return "[DATE]";
    case Category::Phone: return "[PHONE]";
    case Category::Address: return "[ADDRESS]";
    case Category::Email: return "[EMAIL]";
    case Category::Url: return "[URL]";
    case Category::IdNumber: return "[ID]";
    case Category::CustomTerm: return "[TERM]";
  }
  return "[?]";
}

std::vector<std::string> load_gazetteer(const std::filesystem::path& path) {
  std::string text = read_file(path);
  std::vector<std::string> terms;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    terms.push_back(normalize_nfc(line.substr(b, e - b + 1)));
  }
  return terms;
}

std::vector<Span> scan_category(std::string_view text, Category category, const Config& config) {
  return detail::scan_normalized(normalize_nfc(text), category, config);
}

std::string apply_spans(std::string_view normalized_text, const std::vector<Span>& spans) {
  std::string out;
  out.reserve(normalized_text.size());
  std::size_t pos = 0;
  for (const auto& s : spans) {
    out.append(normalized_text.substr(pos, s.start - pos));
    out.append(placeholder(s.category));
    pos = s.end;
  }
  out.append(normalized_text.substr(pos));
  return out;
}

std::vector<Span> detect_all(std::string_view text, const Config& config) {
  const std::string normalized = normalize_nfc(text);
  std::vector<Span> spans = resolve(scan_enabled(normalized, config));

  // Replacing a span can expose a match the overlap resolution suppressed
  // (a URL prefix left behind by an e-mail, a trigger word next to a
  // placeholder). Fold those in until the redaction rescans clean.
  for (std::size_t round = 0; round < normalized.size() + 1; ++round) {
    std::string redacted = apply_spans(normalized, spans);
    auto fresh = resolve(scan_enabled(redacted, config));
    if (fresh.empty()) break;
    auto pieces = layout(normalized.size(), spans);
    for (const auto& f : fresh) {
      std::size_t s = map_back(pieces, f.start, false);
      std::size_t e = map_back(pieces, f.end, true);
      std::erase_if(spans, [&](const Span& old) { return old.start >= s && old.end <= e; });
      spans.push_back({s, e, f.category, normalized.substr(s, e - s)});
    }
    std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.start < b.start; });
  }
  return spans;
}

RedactionResult redact(std::string_view text, const Config& config) {
  RedactionResult r;
  r.normalized_text = normalize_nfc(text);
  r.spans = detect_all(r.normalized_text, config);
  r.redacted_text = apply_spans(r.normalized_text, r.spans);
  for (const auto& s : r.spans) ++r.placeholder_counts[s.category];
  return r;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  k = std::min(k, n);
  std::mt19937_64 rng(seed);
  // unbiased bounded draw; mt19937_64's stream is fixed by the standard
  auto bounded = [&](std::uint64_t bound) {
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = rng();
      if (r >= threshold) return r % bound;
    }
  };
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(bounded(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

CorpusRedaction redact_corpus(const std::vector<Comment>& comments, const Config& config) {
  CorpusRedaction out;
  auto& rep = out.report;
  rep.n_comments = comments.size();
  for (Category c : kAllCategories) rep.placeholder_counts[c] = 0;

  std::vector<RedactionResult> results;
  results.reserve(comments.size());
  for (const auto& c : comments) {
    results.push_back(redact(c.text, config));
    const auto& r = results.back();
    if (!r.spans.empty()) ++rep.n_with_phi;
    for (const auto& [cat, count] : r.placeholder_counts) rep.placeholder_counts[cat] += count;
    out.redacted.push_back({c.id, r.redacted_text});
  }
  rep.phi_fraction = comments.empty() ? 0.0
                                      : static_cast<double>(rep.n_with_phi) /
                                            static_cast<double>(comments.size());
  for (std::size_t i : sample_indices(comments.size(), config.sample_size, config.seed)) {
    rep.sample.push_back({comments[i].id, results[i].normalized_text, results[i].redacted_text,
                          results[i].spans});
  }
  return out;
}

RedactionReport redaction_report(const std::vector<Comment>& comments, const Config& config) {
  return redact_corpus(comments, config).report;
}

std::string report_json(const RedactionReport& report) {
  nlohmann::ordered_json j;
  j["n_comments"] = report.n_comments;
  j["n_with_phi"] = report.n_with_phi;
  j["phi_fraction"] = report.phi_fraction;
  auto& counts = j["placeholder_counts"] = nlohmann::ordered_json::object();
  for (Category c : kAllCategories) {
    auto it = report.placeholder_counts.find(c);
    counts[std::string(to_string(c))] = it == report.placeholder_counts.end() ? 0 : it->second;
  }
  auto& sample = j["sample"] = nlohmann::ordered_json::array();
  for (const auto& item : report.sample) {
    nlohmann::ordered_json s;
    s["comment_id"] = item.comment_id;
    s["original"] = item.original;
    s["redacted"] = item.redacted;
    s["spans"] = nlohmann::ordered_json::array();
    for (const auto& sp : item.spans) {
      s["spans"].push_back({{"start", sp.start},
                            {"end", sp.end},
                            {"category", std::string(to_string(sp.category))},
                            {"text", sp.matched_text}});
    }
    sample.push_back(std::move(s));
  }
  return j.dump(2) + "\n";
}

std::string report_text(const RedactionReport& report) {
  std::string out;
  out += fmt::format("PHI redaction report\n");
  out += fmt::format("comments: {}  with PHI: {}  fraction: {:.4f}\n\n", report.n_comments,
                     report.n_with_phi, report.phi_fraction);
  out += fmt::format("{:<12} {:>8}\n", "category", "count");
  out += fmt::format("{:-<12} {:->8}\n", "", "");
  for (Category c : kAllCategories) {
    auto it = report.placeholder_counts.find(c);
    out += fmt::format("{:<12} {:>8}\n", to_string(c), it == report.placeholder_counts.end() ? 0 : it->second);
  }
  out += fmt::format("\nreviewer sample ({} comments)\n", report.sample.size());
  for (const auto& item : report.sample) {
    out += fmt::format("\n[{}]\n  original: {}\n  redacted: {}\n", item.comment_id, item.original,
                       item.redacted);
  }
  return out;
}

std::string report_csv(const RedactionReport& report) {
  std::string out = "category,count\n";
  for (Category c : kAllCategories) {
    auto it = report.placeholder_counts.find(c);
    out += fmt::format("{},{}\n", to_string(c), it == report.placeholder_counts.end() ? 0 : it->second);
  }
  return out;
}

}  // namespace pxt::phi
