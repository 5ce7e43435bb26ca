#pragma once

#include <string_view>
#include <vector>

#include "pxt/phi.hpp"

namespace pxt::phi::detail {

struct Match {
  std::size_t start;
  std::size_t end;
};

// Raw rule hits on already-normalized text, possibly overlapping.
std::vector<Match> ssn_matches(std::string_view text);
std::vector<Match> record_number_matches(std::string_view text);
std::vector<Match> phone_matches(std::string_view text);
std::vector<Match> numeric_date_matches(std::string_view text);
std::vector<Match> textual_date_matches(std::string_view text);
std::vector<Match> email_matches(std::string_view text);
std::vector<Match> url_matches(std::string_view text);
std::vector<Match> address_matches(std::string_view text);
std::vector<Match> honorific_name_matches(std::string_view text);
std::vector<Match> gazetteer_matches(std::string_view text, const std::vector<std::string>& terms);

/// Category scan on normalized text: raw hits reduced leftmost-longest.
std::vector<Span> scan_normalized(std::string_view text, Category category, const Config& config);

}  // namespace pxt::phi::detail
