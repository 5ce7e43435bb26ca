#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pxt/topics.hpp"

namespace pxt {

enum class DataFormat { Csv, Jsonl };

std::optional<DataFormat> parse_data_format(std::string_view name);
std::string_view to_string(DataFormat format);

struct Comment {
  std::string id;
  std::string text;

  friend bool operator==(const Comment&, const Comment&) = default;
};

/// A categorical survey answer; std::nullopt is the explicit missing marker.
using Categorical = std::optional<std::string>;
/// An ordinal rating; std::nullopt marks a blank answer.
using Rating = std::optional<int>;

struct SurveyRecord {
  std::string comment_id;
  std::map<std::string, Categorical> demographics;
  std::map<std::string, Rating> ratings;
  std::map<std::string, Categorical> mc_answers;

  /// Looks the variable up in all three maps; ratings are rendered as their
  /// decimal value. Returns nullopt for missing values and unknown names.
  Categorical category(const std::string& variable) const;
  friend bool operator==(const SurveyRecord&, const SurveyRecord&) = default;
};

enum class VariableKind { Demographic, Rating, MultipleChoice };

struct SurveyVariable {
  std::string name;    // analysis name, e.g. "Overall Rating"
  std::string column;  // source column / JSON key
  VariableKind kind = VariableKind::Demographic;
  int min_rating = 0;  // inclusive range, ratings only
  int max_rating = 10;
};

struct SurveySchema {
  std::string id_column = "comment_id";
  std::vector<SurveyVariable> variables;

  const SurveyVariable* find(std::string_view name) const;
};

struct AnnotationSet {
  std::string comment_id;
  std::string annotator_id;
  LabelVector labels;

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

// Parsing from in-memory text. `source` is used for error messages only.
// Ids of comments with empty text are appended to `empty_text_ids` when given.
std::vector<Comment> parse_comments(std::string_view text, DataFormat format,
                                    const std::string& source = "<comments>",
                                    std::vector<std::string>* empty_text_ids = nullptr);
std::vector<SurveyRecord> parse_survey_records(std::string_view text, DataFormat format,
                                               const SurveySchema& schema,
                                               const std::string& source = "<survey>");
/// Annotation records. When `default_annotator` is set the annotator column
/// may be omitted (adjudicated gold files).
std::vector<AnnotationSet> parse_annotations(std::string_view text, DataFormat format,
                                             const std::string& source = "<annotations>",
                                             std::optional<std::string> default_annotator = {});

std::vector<Comment> load_comments(const std::filesystem::path& path, DataFormat format,
                                   std::vector<std::string>* empty_text_ids = nullptr);
std::vector<SurveyRecord> load_survey_records(const std::filesystem::path& path, DataFormat format,
                                              const SurveySchema& schema);
std::vector<AnnotationSet> load_annotations(const std::filesystem::path& path, DataFormat format,
                                            std::optional<std::string> default_annotator = {});

std::string serialize_comments(const std::vector<Comment>& comments, DataFormat format);
std::string serialize_survey_records(const std::vector<SurveyRecord>& records,
                                     const SurveySchema& schema, DataFormat format);
std::string serialize_annotations(const std::vector<AnnotationSet>& annotations, DataFormat format);

/// Survey records whose comment_id is not among `comments`.
std::vector<std::string> dangling_survey_ids(const std::vector<SurveyRecord>& records,
                                             const std::vector<Comment>& comments);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace pxt
