#include "rules.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace pxt::phi::detail {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_alpha(char c) { return is_upper(c) || is_lower(c); }
bool is_high(char c) { return static_cast<unsigned char>(c) >= 0x80; }
bool is_alnum_or_high(char c) { return is_alpha(c) || is_digit(c) || is_high(c); }
// Bytes of multi-byte UTF-8 sequences count as word characters so no rule
// boundary can fall inside a non-ASCII letter.
bool is_word(char c) { return is_alnum_or_high(c) || c == '_'; }
bool is_blank(char c) { return c == ' ' || c == '\t'; }
char lower(char c) { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }

bool left_boundary(std::string_view t, std::size_t i) { return i == 0 || !is_word(t[i - 1]); }
bool right_boundary(std::string_view t, std::size_t e) { return e >= t.size() || !is_word(t[e]); }

std::size_t digit_run(std::string_view t, std::size_t i) {
  std::size_t j = i;
  while (j < t.size() && is_digit(t[j])) ++j;
  return j - i;
}

bool digits_at(std::string_view t, std::size_t i, std::size_t n) {
  if (i + n > t.size()) return false;
  for (std::size_t k = 0; k < n; ++k) {
    if (!is_digit(t[i + k])) return false;
  }
  return true;
}

int to_int(std::string_view t, std::size_t i, std::size_t n) {
  int v = 0;
  for (std::size_t k = 0; k < n; ++k) v = v * 10 + (t[i + k] - '0');
  return v;
}

std::size_t alpha_run(std::string_view t, std::size_t i) {
  std::size_t j = i;
  while (j < t.size() && is_alpha(t[j])) ++j;
  return j - i;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (lower(a[i]) != lower(b[i])) return false;
  }
  return true;
}

template <std::size_t N>
bool in_list(std::string_view word, const std::array<std::string_view, N>& list) {
  return std::any_of(list.begin(), list.end(), [&](std::string_view w) { return iequals(word, w); });
}

bool is_phone_sep(char c) { return c == '-' || c == '.' || c == ' '; }

constexpr std::array<std::string_view, 6> kRecordTriggers{"mrn", "record", "account",
                                                          "member", "ssn", "id"};

constexpr std::array<std::string_view, 24> kMonths{
    "january", "february", "march", "april", "may", "june", "july", "august",
    "september", "october", "november", "december", "jan", "feb", "mar", "apr",
    "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec"};

constexpr std::array<std::string_view, 32> kStreetSuffixes{
    "St", "Street", "Ave", "Avenue", "Rd", "Road", "Blvd", "Boulevard", "Lane", "Ln", "Dr",
    "Drive", "Way", "Ct", "Court", "Pl", "Place", "Ter", "Terrace", "Hwy", "Highway", "Pkwy",
    "Parkway", "Cir", "Circle", "Sq", "Square", "Trl", "Trail", "Pike", "Row", "Plaza"};

constexpr std::array<std::string_view, 6> kUnitWords{"Apt", "Apartment", "Suite", "Ste", "Unit",
                                                     "Room"};

constexpr std::array<std::string_view, 6> kHonorifics{"dr", "mr", "ms", "mrs", "nurse", "doctor"};

constexpr std::array<std::string_view, 48> kNameStopwords{
    "The",  "A",    "An",   "And",  "Or",    "But",   "If",   "I",     "Is",    "Was",
    "Were", "Are",  "Be",   "Been", "Very",  "So",    "Who",  "That",  "This",  "He",
    "She",  "They", "We",   "You",  "It",    "His",   "Her",  "My",    "Our",   "Your",
    "Their", "Of",  "On",   "In",   "At",    "To",    "For",  "With",  "Not",   "No",
    "Yes",  "All",  "Also", "Then", "Thank", "Thanks", "Too", "Always"};

// Case-sensitive lexicon lookup for street suffixes and unit words.
template <std::size_t N>
bool in_exact(std::string_view word, const std::array<std::string_view, N>& list) {
  return std::find(list.begin(), list.end(), word) != list.end();
}

// A capitalized ASCII word or an ordinal like "5th"; returns its length.
std::size_t street_word(std::string_view t, std::size_t i) {
  if (i >= t.size()) return 0;
  if (is_upper(t[i])) {
    std::size_t j = i + 1;
    while (j < t.size() && (is_alpha(t[j]) || t[j] == '\'')) ++j;
    return right_boundary(t, j) ? j - i : 0;
  }
  std::size_t d = digit_run(t, i);
  if (d == 0 || d > 3 || i + d + 2 > t.size()) return 0;
  std::string_view suf = t.substr(i + d, 2);
  if (!(iequals(suf, "st") || iequals(suf, "nd") || iequals(suf, "rd") || iequals(suf, "th"))) return 0;
  return right_boundary(t, i + d + 2) ? d + 2 : 0;
}

bool is_placeholder(std::string_view s) {
  return std::any_of(kAllCategories.begin(), kAllCategories.end(),
                     [&](Category c) { return placeholder(c) == s; });
}

std::size_t skip_blanks(std::string_view t, std::size_t i) {
  while (i < t.size() && is_blank(t[i])) ++i;
  return i;
}

}  // namespace

std::vector<Match> ssn_matches(std::string_view t) {
  std::vector<Match> out;
  for (std::size_t i = 0; i + 11 <= t.size(); ++i) {
    if (!is_digit(t[i]) || !left_boundary(t, i)) continue;
    if (digits_at(t, i, 3) && t[i + 3] == '-' && digits_at(t, i + 4, 2) && t[i + 6] == '-' &&
        digits_at(t, i + 7, 4) && right_boundary(t, i + 11)) {
      out.push_back({i, i + 11});
    }
  }
  return out;
}

std::vector<Match> record_number_matches(std::string_view t) {
  // candidates are alphanumeric runs; the trigger window counts whitespace-separated words
  std::vector<Match> words;
  for (std::size_t i = 0; i < t.size();) {
    if (std::isspace(static_cast<unsigned char>(t[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < t.size() && !std::isspace(static_cast<unsigned char>(t[j]))) ++j;
    std::size_t s = i, e = j;
    while (s < e && !is_alnum_or_high(t[s])) ++s;
    while (e > s && !is_alnum_or_high(t[e - 1])) --e;
    words.push_back({s, e});
    i = j;
  }
  std::vector<Match> out;
  std::size_t word = 0;
  for (std::size_t i = 0; i < t.size();) {
    if (!is_alnum_or_high(t[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < t.size() && is_alnum_or_high(t[j])) ++j;
    while (word + 1 < words.size() && words[word + 1].start <= i) ++word;
    if (j - i >= 7 && digit_run(t, i) == j - i) {
      bool triggered = false;
      for (std::size_t back = 1; back <= 3 && back <= word; ++back) {
        const auto& w = words[word - back];
        if (in_list(t.substr(w.start, w.end - w.start), kRecordTriggers)) {
          triggered = true;
          break;
        }
      }
      if (triggered) out.push_back({i, j});
    }
    i = j;
  }
  return out;
}

std::vector<Match> phone_matches(std::string_view t) {
  std::vector<Match> out;
  const std::size_t n = t.size();

  // Ten digits after an optional country code: area, exchange, line.
  auto national = [&](std::size_t p) -> std::size_t {
    if (p < n && t[p] == '(') {
      if (!digits_at(t, p + 1, 3) || p + 4 >= n || t[p + 4] != ')') return 0;
      p += 5;
      if (p < n && is_phone_sep(t[p])) ++p;
    } else {
      if (!digits_at(t, p, 3)) return 0;
      p += 3;
      if (p < n && is_phone_sep(t[p])) ++p;
    }
    if (!digits_at(t, p, 3)) return 0;
    p += 3;
    if (p < n && is_phone_sep(t[p])) ++p;
    if (!digits_at(t, p, 4)) return 0;
    p += 4;
    return right_boundary(t, p) ? p : 0;
  };

  for (std::size_t i = 0; i < n; ++i) {
    char c = t[i];
    if (!(c == '+' || c == '(' || is_digit(c)) || !left_boundary(t, i)) continue;
    std::size_t best = 0;
    if (c == '+' && i + 1 < n && t[i + 1] == '1') {
      std::size_t p = i + 2;
      if (p < n && is_phone_sep(t[p])) ++p;
      best = national(p);
    } else if (c == '1' && i + 1 < n && (is_phone_sep(t[i + 1]) || t[i + 1] == '(')) {
      std::size_t p = i + 1;
      if (is_phone_sep(t[p])) ++p;
      best = national(p);
    }
    if (c != '+') best = std::max(best, national(i));
    if (best > i) out.push_back({i, best});
  }
  return out;
}

std::vector<Match> numeric_date_matches(std::string_view t) {
  std::vector<Match> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!is_digit(t[i]) || !left_boundary(t, i)) continue;
    std::size_t md = digit_run(t, i);
    if (md < 1 || md > 2) continue;
    std::size_t p = i + md;
    if (p >= t.size() || (t[p] != '/' && t[p] != '-')) continue;
    char sep = t[p++];
    std::size_t dd = digit_run(t, p);
    if (dd < 1 || dd > 2) continue;
    int month = to_int(t, i, md);
    int day = to_int(t, p, dd);
    p += dd;
    if (p >= t.size() || t[p] != sep) continue;
    ++p;
    std::size_t yd = digit_run(t, p);
    if (yd != 2 && yd != 4) continue;
    p += yd;
    if (month < 1 || month > 12 || day < 1 || day > 31 || !right_boundary(t, p)) continue;
    out.push_back({i, p});
  }
  return out;
}

std::vector<Match> textual_date_matches(std::string_view t) {
  std::vector<Match> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!is_alpha(t[i]) || !left_boundary(t, i)) continue;
    std::size_t len = alpha_run(t, i);
    if (!right_boundary(t, i + len) || !in_list(t.substr(i, len), kMonths)) continue;
    std::size_t p = i + len;
    if (p < t.size() && t[p] == '.') ++p;
    std::size_t q = skip_blanks(t, p);
    if (q == p) continue;
    std::size_t dd = digit_run(t, q);
    if (dd < 1 || dd > 2) continue;
    int day = to_int(t, q, dd);
    if (day < 1 || day > 31) continue;
    p = q + dd;
    if (p + 2 <= t.size()) {
      auto suf = t.substr(p, 2);
      if ((iequals(suf, "st") || iequals(suf, "nd") || iequals(suf, "rd") || iequals(suf, "th")) &&
          right_boundary(t, p + 2)) {
        p += 2;
      }
    }
    if (!right_boundary(t, p)) continue;
    // optional ", 2023" / " 2023"
    std::size_t y = p;
    bool comma = y < t.size() && t[y] == ',';
    if (comma) ++y;
    std::size_t ys = skip_blanks(t, y);
    if ((ys > y || comma) && digits_at(t, ys, 4) && right_boundary(t, ys + 4)) p = ys + 4;
    out.push_back({i, p});
  }
  return out;
}

std::vector<Match> email_matches(std::string_view t) {
  auto is_local = [](char c) {
    return is_alpha(c) || is_digit(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-';
  };
  auto is_domain = [](char c) { return is_alpha(c) || is_digit(c) || c == '.' || c == '-'; };

  std::vector<Match> out;
  for (std::size_t at = t.find('@'); at != std::string_view::npos; at = t.find('@', at + 1)) {
    std::size_t s = at;
    while (s > 0 && is_local(t[s - 1])) --s;
    while (s < at && (t[s] == '.' || t[s] == '-')) ++s;
    if (s == at || !left_boundary(t, s)) continue;
    std::size_t e = at + 1;
    while (e < t.size() && is_domain(t[e])) ++e;
    while (e > at + 1 && (t[e - 1] == '.' || t[e - 1] == '-')) --e;
    auto domain = t.substr(at + 1, e - at - 1);
    auto dot = domain.rfind('.');
    if (domain.empty() || dot == std::string_view::npos || dot == 0) continue;
    auto tld = domain.substr(dot + 1);
    if (tld.size() < 2 || alpha_run(tld, 0) != tld.size()) continue;
    if (!right_boundary(t, e)) continue;
    out.push_back({s, e});
  }
  return out;
}

std::vector<Match> url_matches(std::string_view t) {
  auto is_url_char = [](char c) {
    unsigned char u = static_cast<unsigned char>(c);
    if (u >= 0x80) return true;
    if (u <= 0x20 || u == 0x7f) return false;
    switch (c) {
      case '<': case '>': case '"': case '\'': case '[': case ']': case '{': case '}':
      case '|': case '\\': case '^': case '`':
        return false;
      default:
        return true;
    }
  };
  auto is_trailing_punct = [](char c) {
    return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == ')';
  };

  std::vector<Match> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!is_alpha(t[i]) || !left_boundary(t, i)) continue;
    std::size_t prefix = 0;
    if (t.size() - i >= 8 && iequals(t.substr(i, 8), "https://")) {
      prefix = 8;
    } else if (t.size() - i >= 7 && iequals(t.substr(i, 7), "http://")) {
      prefix = 7;
    } else if (t.size() - i >= 4 && iequals(t.substr(i, 4), "www.")) {
      prefix = 4;
    } else {
      continue;
    }
    std::size_t e = i + prefix;
    while (e < t.size() && is_url_char(t[e])) ++e;
    while (e > i + prefix && is_trailing_punct(t[e - 1])) --e;
    if (e == i + prefix) continue;
    if (prefix == 4 && !is_alnum_or_high(t[i + 4])) continue;
    out.push_back({i, e});
    i = e - 1;
  }
  return out;
}

std::vector<Match> address_matches(std::string_view t) {
  std::vector<Match> out;
  const std::size_t n = t.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_digit(t[i]) || !left_boundary(t, i)) continue;
    std::size_t nd = digit_run(t, i);
    if (nd > 6 || !right_boundary(t, i + nd)) continue;

    // Up to four words then a suffix; take the longest such street name.
    std::size_t p = i + nd;
    std::size_t best = 0;
    for (int words = 0; words < 5; ++words) {
      std::size_t q = skip_blanks(t, p);
      if (q == p) break;
      std::size_t len = street_word(t, q);
      if (len == 0) break;
      if (words >= 1 && in_exact(t.substr(q, len), kStreetSuffixes)) best = q + len;
      p = q + len;
    }
    if (best == 0) continue;
    std::size_t e = best;
    if (e < n && t[e] == '.') ++e;

    // optional unit: ", Apt 4B" / " Suite 200" / " #12"
    {
      std::size_t p2 = e;
      if (p2 < n && t[p2] == ',') ++p2;
      std::size_t q = skip_blanks(t, p2);
      std::size_t len = q < n && t[q] == '#' ? 1 : (alpha_run(t, q) > 0 ? alpha_run(t, q) : 0);
      bool unit = len == 1 ? t[q] == '#' : in_exact(t.substr(q, len), kUnitWords);
      if (q > e && len > 0 && unit) {
        std::size_t r = q + len;
        if (r < n && t[r] == '.') ++r;
        r = skip_blanks(t, r);
        std::size_t v = r;
        while (v < n && (is_alpha(t[v]) || is_digit(t[v]) || t[v] == '-')) ++v;
        if (v > r && digit_run(t, r) > 0 && right_boundary(t, v)) e = v;
      }
    }
    // optional state + ZIP: ", NJ 07102" / " 07102-1234"
    {
      std::size_t p2 = e;
      if (p2 < n && t[p2] == ',') ++p2;
      std::size_t q = skip_blanks(t, p2);
      if (q > e) {
        std::size_t z = q;
        if (q + 2 < n && is_upper(t[q]) && is_upper(t[q + 1]) && is_blank(t[q + 2])) {
          z = skip_blanks(t, q + 2);
        }
        if (digit_run(t, z) == 5) {
          std::size_t ze = z + 5;
          if (ze + 5 <= n && t[ze] == '-' && digit_run(t, ze + 1) == 4) ze += 5;
          if (right_boundary(t, ze)) e = ze;
        }
      }
    }
    out.push_back({i, e});
  }
  return out;
}

std::vector<Match> honorific_name_matches(std::string_view t) {
  std::vector<Match> out;
  const std::size_t n = t.size();

  // A capitalized name token; returns its end or 0.
  auto token = [&](std::size_t p) -> std::size_t {
    if (p >= n || !is_upper(t[p])) return 0;
    std::size_t q = p + 1;
    while (q < n) {
      if (is_alpha(t[q]) || is_high(t[q])) {
        ++q;
      } else if ((t[q] == '\'' || t[q] == '-') && q + 1 < n && is_alpha(t[q + 1])) {
        // possessive "'s" stays outside the name
        if (t[q] == '\'' && lower(t[q + 1]) == 's' && right_boundary(t, q + 2)) break;
        q += 2;
      } else {
        break;
      }
    }
    return right_boundary(t, q) ? q : 0;
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (!is_alpha(t[i]) || !left_boundary(t, i)) continue;
    std::size_t len = alpha_run(t, i);
    if (!right_boundary(t, i + len) || !in_list(t.substr(i, len), kHonorifics)) continue;
    std::size_t p = i + len;
    bool dot = p < n && t[p] == '.';
    if (dot) ++p;
    std::size_t q = skip_blanks(t, p);
    if (q == p && !dot) continue;

    std::size_t start = q;
    std::size_t end = 0;
    for (int k = 0; k < 3; ++k) {
      std::size_t e = token(q);
      if (e == 0) break;
      auto word = t.substr(q, e - q);
      if (in_list(word, kNameStopwords) || in_list(word, kHonorifics)) break;
      end = e;
      // single-letter initial with a period: "J. Smith"
      std::size_t next = e;
      if (e - q == 1 && next < n && t[next] == '.') ++next;
      if (next < n && t[next] == ' ' && next + 1 < n && is_upper(t[next + 1])) {
        q = next + 1;
        continue;
      }
      break;
    }
    if (end > start) {
      out.push_back({start, end});
      i = end - 1;
    }
  }
  return out;
}

std::vector<Match> gazetteer_matches(std::string_view t, const std::vector<std::string>& terms) {
  std::string lowered(t);
  for (auto& c : lowered) c = lower(c);

  std::vector<Match> out;
  for (const auto& raw : terms) {
    if (raw.empty() || raw.find_first_of("[]") != std::string::npos) continue;
    std::string term(raw);
    for (auto& c : term) c = lower(c);
    for (std::size_t pos = lowered.find(term); pos != std::string::npos;
         pos = lowered.find(term, pos + 1)) {
      std::size_t e = pos + term.size();
      if (is_word(term.front()) && !left_boundary(t, pos)) continue;
      if (is_word(term.back()) && !right_boundary(t, e)) continue;
      if (pos > 0 && e < t.size() && is_placeholder(t.substr(pos - 1, e - pos + 2))) continue;
      out.push_back({pos, e});
    }
  }
  return out;
}

std::vector<Span> scan_normalized(std::string_view text, Category category, const Config& config) {
  std::vector<Match> hits;
  auto append = [&](std::vector<Match> more) { hits.insert(hits.end(), more.begin(), more.end()); };
  switch (category) {
    case Category::IdNumber:
      append(ssn_matches(text));
      append(record_number_matches(text));
      break;
    case Category::Phone: append(phone_matches(text)); break;
    case Category::Date:
      append(numeric_date_matches(text));
      append(textual_date_matches(text));
      break;
    case Category::Email: append(email_matches(text)); break;
    case Category::Url: append(url_matches(text)); break;
    case Category::Address: append(address_matches(text)); break;
    case Category::Name:
      append(honorific_name_matches(text));
      append(gazetteer_matches(text, config.name_gazetteer));
      break;
    case Category::CustomTerm: append(gazetteer_matches(text, config.term_gazetteer)); break;
  }

  std::sort(hits.begin(), hits.end(), [](const Match& a, const Match& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.end > b.end;
  });
  std::vector<Span> spans;
  std::size_t last_end = 0;
  for (const auto& m : hits) {
    if (!spans.empty() && m.start < last_end) continue;
    spans.push_back({m.start, m.end, category, std::string(text.substr(m.start, m.end - m.start))});
    last_end = m.end;
  }
  return spans;
}

}  // namespace pxt::phi::detail
