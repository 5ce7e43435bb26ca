#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pxt/classify.hpp"
#include "pxt/corpus.hpp"
#include "pxt/error.hpp"
#include "pxt/phi.hpp"
#include "pxt/prompt.hpp"

namespace pxt {

enum class OutputFormat { Json, Csv, Text };

std::optional<OutputFormat> parse_output_format(std::string_view name);
std::string_view to_string(OutputFormat format);

struct PipelineConfig {
  std::filesystem::path source;
  std::string config_sha256;

  // [corpus]
  std::filesystem::path comments;
  DataFormat comments_format = DataFormat::Csv;
  std::optional<std::filesystem::path> annotations;
  DataFormat annotations_format = DataFormat::Csv;
  std::optional<std::filesystem::path> gold;
  DataFormat gold_format = DataFormat::Csv;
  std::optional<std::filesystem::path> survey;
  DataFormat survey_format = DataFormat::Csv;
  SurveySchema schema;

  // [phi]
  phi::Config phi;

  // [classify]
  BackendConfig backend;
  std::optional<std::filesystem::path> classify_input;  // already-redacted comments
  std::optional<std::filesystem::path> template_path;
  std::optional<std::filesystem::path> shots_path;
  std::optional<std::filesystem::path> keywords_path;
  PromptStyle style = PromptStyle::Plain;
  PromptTemplate prompt;
  bool run_id_explicit = false;

  // [eval]
  std::optional<std::filesystem::path> predictions;
  std::vector<std::filesystem::path> runs;

  // [assoc]
  double alpha = 0.05;
  std::string rating_variable = "Overall Rating";
  bool per_topic_logit = false;

  // [output]
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
  OutputFormat format = OutputFormat::Text;

  std::filesystem::path predictions_path() const {
    return predictions ? *predictions : out_dir / "predictions.jsonl";
  }
};

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<OutputFormat> format;
  std::optional<std::size_t> k_shots;
  std::optional<BackendKind> backend;
};

/// Every problem found in a config file.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parses and validates the config file; relative paths resolve against its
/// directory. Throws ConfigError listing every problem found.
PipelineConfig validate_config(const std::filesystem::path& path, const Overrides& overrides = {});
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& source,
                            const Overrides& overrides = {});

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitPartial = 2;

struct PredictionRecord {
  std::string comment_id;
  LabelVector labels;
  std::string raw_response_path;
  std::string run_id;
  int attempts = 0;
};

std::string serialize_predictions(const std::vector<PredictionRecord>& records);
std::vector<PredictionRecord> parse_predictions(std::string_view text, const std::string& source = "<predictions>");
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);

/// Hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

struct RunResult {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> outputs;
  std::vector<std::string> log;
};

RunResult run_redact(const PipelineConfig& config);
RunResult run_classify(const PipelineConfig& config, std::shared_ptr<Transport> transport = nullptr);
RunResult run_evaluate(const PipelineConfig& config);
RunResult run_agreement(const PipelineConfig& config);
RunResult run_associate(const PipelineConfig& config);

/// Runs one subcommand, then writes run.log and manifest.json into the output
/// directory. Module errors are reported on `err` and yield kExitInvalid.
int run_subcommand(const std::string& name, const PipelineConfig& config, std::ostream& err,
                   std::shared_ptr<Transport> transport = nullptr);

}  // namespace pxt
