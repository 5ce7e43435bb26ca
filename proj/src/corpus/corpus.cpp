#include "pxt/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "pxt/csv.hpp"
#include "pxt/error.hpp"

namespace pxt {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

struct JsonLine {
  std::size_t line;
  json value;
};

std::vector<JsonLine> parse_jsonl(std::string_view text, const std::string& source) {
  std::vector<JsonLine> out;
  std::size_t line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line;
    if (!trim(raw).empty()) {
      json v = json::parse(raw, nullptr, false);
      if (v.is_discarded() || !v.is_object()) {
        throw Error(ErrorCode::MalformedRecord, "line is not a JSON object", source, line);
      }
      out.push_back({line, std::move(v)});
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

std::string require_string(const json& obj, const char* key, const std::string& source,
                           std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorCode::MalformedRecord, std::string("missing string key '") + key + "'", source,
                line);
  }
  return it->get<std::string>();
}

class Header {
 public:
  Header(const csv::Row& row) {
    for (std::size_t i = 0; i < row.fields.size(); ++i) {
      index_.emplace(trim(row.fields[i]), i);
      names_.push_back(trim(row.fields[i]));
    }
  }
  std::optional<std::size_t> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

 private:
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> names_;
};

void check_width(const csv::Row& row, const Header& header, const std::string& source) {
  if (row.fields.size() != header.size()) {
    throw Error(ErrorCode::MalformedRecord,
                "expected " + std::to_string(header.size()) + " fields, found " +
                    std::to_string(row.fields.size()),
                source, row.line);
  }
}

Rating parse_rating(const std::string& cell, const SurveyVariable& var, const std::string& source,
                    std::size_t line) {
  std::string v = trim(cell);
  if (v.empty()) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw Error(ErrorCode::MalformedRecord, "rating '" + var.name + "' is not an integer: '" + v + "'",
                source, line);
  }
  if (value < var.min_rating || value > var.max_rating) {
    throw Error(ErrorCode::MalformedRecord,
                "rating '" + var.name + "' = " + v + " outside [" + std::to_string(var.min_rating) +
                    ", " + std::to_string(var.max_rating) + "]",
                source, line);
  }
  return value;
}

void assign(SurveyRecord& rec, const SurveyVariable& var, const std::optional<std::string>& cell,
            const std::string& source, std::size_t line) {
  Categorical value;
  if (cell && !trim(*cell).empty()) value = *cell;
  switch (var.kind) {
    case VariableKind::Demographic: rec.demographics[var.name] = value; break;
    case VariableKind::MultipleChoice: rec.mc_answers[var.name] = value; break;
    case VariableKind::Rating:
      rec.ratings[var.name] = value ? parse_rating(*value, var, source, line) : Rating{};
      break;
  }
}

bool parse_binary(const std::string& cell, bool& out) {
  std::string v = trim(cell);
  if (v == "0") {
    out = false;
    return true;
  }
  if (v == "1") {
    out = true;
    return true;
  }
  return false;
}

void check_unique_ids(const std::vector<Comment>& comments, const std::vector<std::size_t>& lines,
                      const std::string& source) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < comments.size(); ++i) {
    if (!seen.insert(comments[i].id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate comment id '" + comments[i].id + "'", source,
                  lines[i]);
    }
  }
}

}  // namespace

std::optional<DataFormat> parse_data_format(std::string_view name) {
  if (name == "csv") return DataFormat::Csv;
  if (name == "jsonl") return DataFormat::Jsonl;
  return std::nullopt;
}

std::string_view to_string(DataFormat format) {
  return format == DataFormat::Csv ? "csv" : "jsonl";
}

Categorical SurveyRecord::category(const std::string& variable) const {
  if (auto it = demographics.find(variable); it != demographics.end()) return it->second;
  if (auto it = mc_answers.find(variable); it != mc_answers.end()) return it->second;
  if (auto it = ratings.find(variable); it != ratings.end()) {
    if (!it->second) return std::nullopt;
    return std::to_string(*it->second);
  }
  return std::nullopt;
}

const SurveyVariable* SurveySchema::find(std::string_view name) const {
  for (const auto& v : variables) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

std::vector<Comment> parse_comments(std::string_view text, DataFormat format,
                                    const std::string& source,
                                    std::vector<std::string>* empty_text_ids) {
  std::vector<Comment> out;
  std::vector<std::size_t> lines;
  if (format == DataFormat::Jsonl) {
    for (const auto& rec : parse_jsonl(text, source)) {
      out.push_back({require_string(rec.value, "id", source, rec.line),
                     require_string(rec.value, "text", source, rec.line)});
      lines.push_back(rec.line);
    }
  } else {
    auto rows = csv::parse(text, source);
    if (!rows.empty()) {
      Header header(rows.front());
      auto id_col = header.find("id");
      auto text_col = header.find("text");
      if (!id_col || !text_col) {
        throw Error(ErrorCode::MalformedRecord, "header must contain 'id' and 'text'", source,
                    rows.front().line);
      }
      for (std::size_t r = 1; r < rows.size(); ++r) {
        check_width(rows[r], header, source);
        std::string id = trim(rows[r].fields[*id_col]);
        if (id.empty()) throw Error(ErrorCode::MalformedRecord, "empty id", source, rows[r].line);
        out.push_back({std::move(id), rows[r].fields[*text_col]});
        lines.push_back(rows[r].line);
      }
    }
  }
  check_unique_ids(out, lines, source);
  if (empty_text_ids) {
    for (const auto& c : out) {
      if (trim(c.text).empty()) empty_text_ids->push_back(c.id);
    }
  }
  return out;
}

std::vector<SurveyRecord> parse_survey_records(std::string_view text, DataFormat format,
                                               const SurveySchema& schema,
                                               const std::string& source) {
  std::vector<SurveyRecord> out;
  if (format == DataFormat::Csv) {
    auto rows = csv::parse(text, source);
    if (rows.empty()) return out;
    Header header(rows.front());
    auto id_col = header.find(schema.id_column);
    if (!id_col) {
      throw Error(ErrorCode::UnknownColumn, "id column '" + schema.id_column + "' not in header",
                  source, rows.front().line);
    }
    std::vector<std::size_t> cols;
    for (const auto& var : schema.variables) {
      auto c = header.find(var.column);
      if (!c) {
        throw Error(ErrorCode::UnknownColumn,
                    "column '" + var.column + "' (variable '" + var.name + "') not in header", source,
                    rows.front().line);
      }
      cols.push_back(*c);
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
      check_width(rows[r], header, source);
      SurveyRecord rec;
      rec.comment_id = trim(rows[r].fields[*id_col]);
      if (rec.comment_id.empty()) {
        throw Error(ErrorCode::MalformedRecord, "empty comment id", source, rows[r].line);
      }
      for (std::size_t v = 0; v < schema.variables.size(); ++v) {
        assign(rec, schema.variables[v], rows[r].fields[cols[v]], source, rows[r].line);
      }
      out.push_back(std::move(rec));
    }
    return out;
  }

  auto records = parse_jsonl(text, source);
  std::set<std::string> seen_keys;
  for (const auto& rec : records) {
    for (auto it = rec.value.begin(); it != rec.value.end(); ++it) seen_keys.insert(it.key());
  }
  if (!records.empty()) {
    for (const auto& var : schema.variables) {
      if (!seen_keys.count(var.column)) {
        throw Error(ErrorCode::UnknownColumn,
                    "key '" + var.column + "' (variable '" + var.name + "') absent from every record",
                    source, records.front().line);
      }
    }
  }
  for (const auto& rec : records) {
    SurveyRecord sr;
    sr.comment_id = require_string(rec.value, schema.id_column.c_str(), source, rec.line);
    for (const auto& var : schema.variables) {
      std::optional<std::string> cell;
      auto it = rec.value.find(var.column);
      if (it != rec.value.end() && !it->is_null()) {
        if (it->is_string()) {
          cell = it->get<std::string>();
        } else if (it->is_number_integer()) {
          cell = std::to_string(it->get<long long>());
        } else {
          throw Error(ErrorCode::MalformedRecord, "key '" + var.column + "' must be string or integer",
                      source, rec.line);
        }
      }
      assign(sr, var, cell, source, rec.line);
    }
    out.push_back(std::move(sr));
  }
  return out;
}

std::vector<AnnotationSet> parse_annotations(std::string_view text, DataFormat format,
                                             const std::string& source,
                                             std::optional<std::string> default_annotator) {
  std::vector<AnnotationSet> out;
  std::vector<std::size_t> lines;
  const auto& names = topic_names();

  if (format == DataFormat::Csv) {
    auto rows = csv::parse(text, source);
    if (rows.empty()) return out;
    Header header(rows.front());
    auto id_col = header.find("comment_id");
    auto ann_col = header.find("annotator_id");
    if (!id_col) {
      throw Error(ErrorCode::MalformedRecord, "header must contain 'comment_id'", source,
                  rows.front().line);
    }
    if (!ann_col && !default_annotator) {
      throw Error(ErrorCode::MalformedRecord, "header must contain 'annotator_id'", source,
                  rows.front().line);
    }
    std::array<std::size_t, kTopicCount> topic_cols{};
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == *id_col || (ann_col && c == *ann_col)) continue;
      if (!topic_index(header.names()[c])) {
        throw Error(ErrorCode::UnknownTopicColumn,
                    "column '" + header.names()[c] + "' is not a canonical topic", source,
                    rows.front().line);
      }
    }
    for (std::size_t t = 0; t < kTopicCount; ++t) {
      auto c = header.find(std::string(names[t]));
      if (!c) {
        throw Error(ErrorCode::UnknownTopicColumn, "missing topic column '" + std::string(names[t]) + "'",
                    source, rows.front().line);
      }
      topic_cols[t] = *c;
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
      check_width(rows[r], header, source);
      AnnotationSet a;
      a.comment_id = trim(rows[r].fields[*id_col]);
      a.annotator_id = ann_col ? trim(rows[r].fields[*ann_col]) : *default_annotator;
      if (a.comment_id.empty() || a.annotator_id.empty()) {
        throw Error(ErrorCode::MalformedRecord, "empty comment or annotator id", source, rows[r].line);
      }
      for (std::size_t t = 0; t < kTopicCount; ++t) {
        bool bit = false;
        if (!parse_binary(rows[r].fields[topic_cols[t]], bit)) {
          throw Error(ErrorCode::NonBinaryLabel,
                      "'" + std::string(names[t]) + "' = '" + rows[r].fields[topic_cols[t]] + "'",
                      source, rows[r].line);
        }
        a.labels.set(t, bit);
      }
      out.push_back(std::move(a));
      lines.push_back(rows[r].line);
    }
  } else {
    for (const auto& rec : parse_jsonl(text, source)) {
      AnnotationSet a;
      a.comment_id = require_string(rec.value, "comment_id", source, rec.line);
      if (rec.value.contains("annotator_id") || !default_annotator) {
        a.annotator_id = require_string(rec.value, "annotator_id", source, rec.line);
      } else {
        a.annotator_id = *default_annotator;
      }
      auto labels = rec.value.find("labels");
      if (labels == rec.value.end() || !labels->is_object()) {
        throw Error(ErrorCode::MalformedRecord, "missing object key 'labels'", source, rec.line);
      }
      for (auto it = labels->begin(); it != labels->end(); ++it) {
        auto idx = topic_index(trim(it.key()));
        if (!idx) {
          throw Error(ErrorCode::UnknownTopicColumn, "'" + it.key() + "' is not a canonical topic",
                      source, rec.line);
        }
        if (!it->is_number_integer() || (it->get<long long>() != 0 && it->get<long long>() != 1)) {
          throw Error(ErrorCode::NonBinaryLabel, "'" + it.key() + "' = " + it->dump(), source, rec.line);
        }
        a.labels.set(*idx, it->get<long long>() == 1);
      }
      out.push_back(std::move(a));
      lines.push_back(rec.line);
    }
  }

  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!seen.emplace(out[i].comment_id, out[i].annotator_id).second) {
      throw Error(ErrorCode::DuplicateId,
                  "second annotation of '" + out[i].comment_id + "' by '" + out[i].annotator_id + "'",
                  source, lines[i]);
    }
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

std::vector<Comment> load_comments(const std::filesystem::path& path, DataFormat format,
                                   std::vector<std::string>* empty_text_ids) {
  return parse_comments(read_file(path), format, path.string(), empty_text_ids);
}

std::vector<SurveyRecord> load_survey_records(const std::filesystem::path& path, DataFormat format,
                                              const SurveySchema& schema) {
  return parse_survey_records(read_file(path), format, schema, path.string());
}

std::vector<AnnotationSet> load_annotations(const std::filesystem::path& path, DataFormat format,
                                            std::optional<std::string> default_annotator) {
  return parse_annotations(read_file(path), format, path.string(), std::move(default_annotator));
}

std::string serialize_comments(const std::vector<Comment>& comments, DataFormat format) {
  std::string out;
  if (format == DataFormat::Csv) {
    out += csv::format_row({"id", "text"});
    for (const auto& c : comments) out += csv::format_row({c.id, c.text});
    return out;
  }
  for (const auto& c : comments) {
    json j = {{"id", c.id}, {"text", c.text}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string serialize_survey_records(const std::vector<SurveyRecord>& records,
                                     const SurveySchema& schema, DataFormat format) {
  auto cell = [](const SurveyRecord& r, const SurveyVariable& v) -> std::optional<std::string> {
    switch (v.kind) {
      case VariableKind::Demographic: {
        auto it = r.demographics.find(v.name);
        return it == r.demographics.end() ? std::nullopt : it->second;
      }
      case VariableKind::MultipleChoice: {
        auto it = r.mc_answers.find(v.name);
        return it == r.mc_answers.end() ? std::nullopt : it->second;
      }
      case VariableKind::Rating: {
        auto it = r.ratings.find(v.name);
        if (it == r.ratings.end() || !it->second) return std::nullopt;
        return std::to_string(*it->second);
      }
    }
    return std::nullopt;
  };

  std::string out;
  if (format == DataFormat::Csv) {
    std::vector<std::string> header{schema.id_column};
    for (const auto& v : schema.variables) header.push_back(v.column);
    out += csv::format_row(header);
    for (const auto& r : records) {
      std::vector<std::string> row{r.comment_id};
      for (const auto& v : schema.variables) row.push_back(cell(r, v).value_or(""));
      out += csv::format_row(row);
    }
    return out;
  }
  for (const auto& r : records) {
    json j = json::object();
    j[schema.id_column] = r.comment_id;
    for (const auto& v : schema.variables) {
      auto c = cell(r, v);
      if (!c) {
        j[v.column] = nullptr;
      } else if (v.kind == VariableKind::Rating) {
        j[v.column] = std::stoi(*c);
      } else {
        j[v.column] = *c;
      }
    }
    out += j.dump() + "\n";
  }
  return out;
}

std::string serialize_annotations(const std::vector<AnnotationSet>& annotations, DataFormat format) {
  const auto& names = topic_names();
  std::string out;
  if (format == DataFormat::Csv) {
    std::vector<std::string> header{"comment_id", "annotator_id"};
    for (auto n : names) header.emplace_back(n);
    out += csv::format_row(header);
    for (const auto& a : annotations) {
      std::vector<std::string> row{a.comment_id, a.annotator_id};
      for (std::size_t t = 0; t < kTopicCount; ++t) row.push_back(a.labels.test(t) ? "1" : "0");
      out += csv::format_row(row);
    }
    return out;
  }
  for (const auto& a : annotations) {
    json labels = json::object();
    for (std::size_t t = 0; t < kTopicCount; ++t) labels[std::string(names[t])] = a.labels.test(t) ? 1 : 0;
    json j = {{"comment_id", a.comment_id}, {"annotator_id", a.annotator_id}, {"labels", labels}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<std::string> dangling_survey_ids(const std::vector<SurveyRecord>& records,
                                             const std::vector<Comment>& comments) {
  std::unordered_set<std::string> ids;
  for (const auto& c : comments) ids.insert(c.id);
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (!ids.count(r.comment_id)) out.push_back(r.comment_id);
  }
  return out;
}

}  // namespace pxt
