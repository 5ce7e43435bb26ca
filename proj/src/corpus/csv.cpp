#include "pxt/csv.hpp"

#include "pxt/error.hpp"

namespace pxt::csv {

std::vector<Row> parse(std::string_view text, const std::string& source_name) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<Row> rows;
  Row current;
  std::string field;
  std::size_t line = 1;
  std::size_t i = 0;
  bool in_record = false;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    // blank lines carry no record
    if (current.fields.size() > 1 || !current.fields.front().empty()) rows.push_back(std::move(current));
    current = Row{};
    in_record = false;
  };

  while (i < text.size()) {
    if (!in_record) {
      current.line = line;
      in_record = true;
    }
    char c = text[i];
    if (c == '"' && field.empty()) {
      std::size_t quote_line = line;
      ++i;
      bool closed = false;
      while (i < text.size()) {
        char q = text[i];
        if (q == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        if (q == '\n') ++line;
        field.push_back(q);
        ++i;
      }
      if (!closed) {
        throw Error(ErrorCode::MalformedRecord, "unterminated quoted field", source_name, quote_line);
      }
      if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        throw Error(ErrorCode::MalformedRecord, "unexpected character after closing quote",
                    source_name, line);
      }
      continue;
    }
    if (c == ',') {
      end_field();
      ++i;
      continue;
    }
    if (c == '\r' || c == '\n') {
      end_record();
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ++i;
      ++line;
      continue;
    }
    if (c == '"') {
      throw Error(ErrorCode::MalformedRecord, "quote inside unquoted field", source_name, line);
    }
    field.push_back(c);
    ++i;
  }
  if (in_record) end_record();
  return rows;
}

std::string quote(std::string_view field) {
  bool needs = field.empty() ? false : field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs && !field.empty() && (field.front() == ' ' || field.back() == ' ')) needs = true;
  if (!needs) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += quote(fields[i]);
  }
  out.push_back('\n');
  return out;
}

}  // namespace pxt::csv
