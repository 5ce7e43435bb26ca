#include <chrono>
#include <ctime>
#include <map>
#include <set>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "pxt/agreement.hpp"
#include "pxt/assoc.hpp"
#include "pxt/metrics.hpp"
#include "pxt/pipeline.hpp"

namespace pxt {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "SHA-256 digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string serialize_predictions(const std::vector<PredictionRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    ordered_json j;
    j["comment_id"] = r.comment_id;
    j["labels"] = r.labels.names();
    j["raw_response"] = r.raw_response_path;
    j["run_id"] = r.run_id;
    j["attempts"] = r.attempts;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<PredictionRecord> parse_predictions(std::string_view text, const std::string& source) {
  std::vector<PredictionRecord> out;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("comment_id") || !j["comment_id"].is_string() ||
        !j.contains("labels") || !j["labels"].is_array()) {
      throw Error(ErrorCode::MalformedRecord, "expected {\"comment_id\": ..., \"labels\": [...]}", source, lineno);
    }
    PredictionRecord r;
    r.comment_id = j["comment_id"].get<std::string>();
    std::vector<std::string> names;
    for (const auto& l : j["labels"]) {
      if (!l.is_string()) throw Error(ErrorCode::MalformedRecord, "labels must be strings", source, lineno);
      names.push_back(l.get<std::string>());
    }
    try {
      r.labels = LabelVector::from_names(names);
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), source, lineno);
    }
    if (j.contains("raw_response") && j["raw_response"].is_string()) r.raw_response_path = j["raw_response"];
    if (j.contains("run_id") && j["run_id"].is_string()) r.run_id = j["run_id"];
    if (j.contains("attempts") && j["attempts"].is_number_integer()) r.attempts = j["attempts"];
    if (!seen.insert(r.comment_id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate prediction for '" + r.comment_id + "'", source, lineno);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PredictionRecord> load_predictions(const fs::path& path) {
  return parse_predictions(read_file(path), path.string());
}

namespace {

std::string safe_file_stem(const std::string& id) {
  std::string out;
  for (char c : id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
              c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

void emit(RunResult& result, const fs::path& path, std::string_view contents) {
  write_file(path, contents);
  result.outputs.push_back(path);
}

std::vector<Comment> load_corpus(const PipelineConfig& c) {
  std::vector<std::string> empty;
  auto comments = load_comments(c.comments, c.comments_format, &empty);
  return comments;
}

std::map<std::string, LabelVector> prediction_map(const std::vector<PredictionRecord>& records) {
  std::map<std::string, LabelVector> out;
  for (const auto& r : records) out.emplace(r.comment_id, r.labels);
  return out;
}

}  // namespace

RunResult run_redact(const PipelineConfig& config) {
  RunResult result;
  std::vector<std::string> empty_ids;
  auto comments = load_comments(config.comments, config.comments_format, &empty_ids);
  for (const auto& id : empty_ids) result.log.push_back(fmt::format("comment '{}' has empty text", id));
  auto corpus = phi::redact_corpus(comments, config.phi);
  emit(result, config.out_dir / "redacted.jsonl", serialize_comments(corpus.redacted, DataFormat::Jsonl));
  switch (config.format) {
    case OutputFormat::Json: emit(result, config.out_dir / "phi_report.json", phi::report_json(corpus.report)); break;
    case OutputFormat::Csv: emit(result, config.out_dir / "phi_report.csv", phi::report_csv(corpus.report)); break;
    case OutputFormat::Text: emit(result, config.out_dir / "phi_report.txt", phi::report_text(corpus.report)); break;
  }
  result.log.push_back(fmt::format("redacted {} comments, {} with PHI", corpus.report.n_comments,
                                   corpus.report.n_with_phi));
  return result;
}

RunResult run_classify(const PipelineConfig& config, std::shared_ptr<Transport> transport) {
  RunResult result;
  std::vector<Comment> comments;
  if (config.classify_input) {
    comments = load_comments(*config.classify_input, DataFormat::Jsonl);
  } else {
    comments = phi::redact_corpus(load_corpus(config), config.phi).redacted;
    result.log.push_back(fmt::format("redacted {} comments in memory before classification", comments.size()));
  }
  Backend backend(config.backend, std::move(transport));
  auto classified = classify_corpus(backend, config.prompt, comments);

  std::vector<PredictionRecord> records;
  for (const auto& o : classified.outputs) {
    PredictionRecord r;
    r.comment_id = o.comment_id;
    r.labels = o.labels;
    r.raw_response_path = "raw/" + safe_file_stem(o.comment_id) + ".txt";
    r.run_id = o.run_id;
    r.attempts = o.attempts;
    write_file(config.out_dir / r.raw_response_path, o.raw_response);
    records.push_back(std::move(r));
  }
  emit(result, config.predictions_path(), serialize_predictions(records));

  std::string failures;
  for (const auto& f : classified.failures) {
    ordered_json j;
    j["comment_id"] = f.comment_id;
    j["error"] = std::string(to_string(f.code));
    j["message"] = f.message;
    j["attempts"] = f.attempts;
    failures += j.dump() + "\n";
    result.log.push_back(fmt::format("comment '{}' failed: {}", f.comment_id, f.message));
  }
  if (!classified.failures.empty()) {
    emit(result, config.out_dir / "failures.jsonl", failures);
    result.exit_code = kExitPartial;
  }
  result.log.push_back(fmt::format("classified {} of {} comments (run {})", records.size(), comments.size(),
                                   config.backend.run_id));
  return result;
}

namespace {

MetricsReport evaluate_against(const std::vector<PredictionRecord>& predictions,
                               const std::vector<AnnotationSet>& gold, const std::string& label,
                               RunResult& result) {
  auto by_id = prediction_map(predictions);
  std::vector<LabelVector> y_true, y_pred;
  for (const auto& g : gold) {
    auto it = by_id.find(g.comment_id);
    if (it == by_id.end()) {
      result.log.push_back(fmt::format("{}: no prediction for gold comment '{}'", label, g.comment_id));
      result.exit_code = kExitPartial;
      continue;
    }
    y_true.push_back(g.labels);
    y_pred.push_back(it->second);
  }
  return overall_metrics(y_true, y_pred);
}

}  // namespace

RunResult run_evaluate(const PipelineConfig& config) {
  if (!config.gold) throw Error(ErrorCode::ConfigInvalid, "[corpus] gold: required by evaluate");
  RunResult result;
  auto gold = load_annotations(*config.gold, config.gold_format, std::string("gold"));

  auto report = evaluate_against(load_predictions(config.predictions_path()), gold, "predictions", result);
  switch (config.format) {
    case OutputFormat::Json: emit(result, config.out_dir / "metrics.json", metrics_json(report)); break;
    case OutputFormat::Csv: emit(result, config.out_dir / "metrics.csv", metrics_csv(report)); break;
    case OutputFormat::Text: emit(result, config.out_dir / "metrics.txt", metrics_text(report)); break;
  }
  if (!config.runs.empty()) {
    std::vector<MetricsReport> reports;
    for (const auto& run : config.runs) {
      reports.push_back(evaluate_against(load_predictions(run), gold, run.filename().string(), result));
    }
    auto aggregate = aggregate_runs(reports);
    switch (config.format) {
      case OutputFormat::Json: emit(result, config.out_dir / "aggregate.json", aggregate_json(aggregate)); break;
      case OutputFormat::Csv: emit(result, config.out_dir / "aggregate.csv", aggregate_csv(aggregate)); break;
      case OutputFormat::Text: emit(result, config.out_dir / "aggregate.txt", aggregate_text(aggregate)); break;
    }
  }
  result.log.push_back(fmt::format("evaluated {} comments; micro-F1 {}", report.n_comments,
                                   format_percent(report.micro_f1)));
  return result;
}

RunResult run_agreement(const PipelineConfig& config) {
  if (!config.annotations) throw Error(ErrorCode::ConfigInvalid, "[corpus] annotations: required by agreement");
  RunResult result;
  auto summary = kappa_summary(load_annotations(*config.annotations, config.annotations_format));
  switch (config.format) {
    case OutputFormat::Json: emit(result, config.out_dir / "agreement.json", kappa_json(summary)); break;
    case OutputFormat::Csv: emit(result, config.out_dir / "agreement.csv", kappa_csv(summary)); break;
    case OutputFormat::Text: emit(result, config.out_dir / "agreement.txt", kappa_text(summary)); break;
  }
  std::string queue;
  for (const auto& id : summary.review_queue) queue += id + "\n";
  emit(result, config.out_dir / "review_queue.txt", queue);
  result.log.push_back(fmt::format("mean kappa {:.4f} over {} comments; {} queued for review", summary.mean_kappa,
                                   summary.per_comment.size(), summary.review_queue.size()));
  return result;
}

RunResult run_associate(const PipelineConfig& config) {
  if (!config.survey) throw Error(ErrorCode::ConfigInvalid, "[corpus] survey: required by associate");
  if (config.schema.variables.empty()) throw Error(ErrorCode::ConfigInvalid, "[assoc]: no survey variables listed");
  RunResult result;
  auto records = load_survey_records(*config.survey, config.survey_format, config.schema);
  auto predictions = prediction_map(load_predictions(config.predictions_path()));
  std::size_t unmatched = 0;
  for (const auto& r : records) unmatched += predictions.count(r.comment_id) == 0;
  if (unmatched > 0) result.log.push_back(fmt::format("{} survey records have no prediction", unmatched));

  auto grid = association_matrix(predictions, records, config.schema, config.alpha);
  emit(result, config.out_dir / "association.csv", grid_csv(grid));
  emit(result, config.out_dir / "association.html", grid_html(grid));
  if (config.format == OutputFormat::Json) emit(result, config.out_dir / "association.json", grid_json(grid));
  for (const auto& cell : grid.cells) {
    if (cell.status == CellStatus::Failed) {
      result.log.push_back(fmt::format("{} x {}: {}", cell.topic, cell.variable, cell.note));
      result.exit_code = kExitPartial;
    }
  }

  if (const auto* rating = config.schema.find(config.rating_variable);
      rating && rating->kind == VariableKind::Rating) {
    try {
      auto report = rating_analysis(predictions, records, *rating, config.per_topic_logit);
      switch (config.format) {
        case OutputFormat::Json: emit(result, config.out_dir / "regression.json", regression_json(report)); break;
        case OutputFormat::Csv: emit(result, config.out_dir / "regression.csv", regression_csv(report)); break;
        case OutputFormat::Text: emit(result, config.out_dir / "regression.txt", regression_text(report)); break;
      }
      if (!report.converged) {
        result.log.push_back("rating model did not converge; partial results written");
        result.exit_code = kExitPartial;
      }
    } catch (const Error& e) {
      result.log.push_back(fmt::format("rating analysis skipped: {}", e.what()));
      result.exit_code = kExitPartial;
    }
  }
  result.log.push_back(fmt::format("association grid {} x {} over {} comments", grid.topics.size(),
                                   grid.variables.size(), grid.n_joined));
  return result;
}

namespace {

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(t)));
}

}  // namespace

int run_subcommand(const std::string& name, const PipelineConfig& config, std::ostream& err,
                   std::shared_ptr<Transport> transport) {
  const auto started = std::chrono::system_clock::now();
  RunResult result;
  try {
    if (name == "redact") result = run_redact(config);
    else if (name == "classify") result = run_classify(config, std::move(transport));
    else if (name == "evaluate") result = run_evaluate(config);
    else if (name == "agreement") result = run_agreement(config);
    else if (name == "associate") result = run_associate(config);
    else throw Error(ErrorCode::ConfigInvalid, "unknown subcommand '" + name + "'");
  } catch (const Error& e) {
    std::string where = e.file().empty() ? "" : fmt::format(" ({}:{})", e.file(), e.line());
    result.log.push_back(fmt::format("error [{}]{}: {}", to_string(e.code()), where, e.what()));
    result.exit_code = kExitInvalid;
  }
  const auto finished = std::chrono::system_clock::now();

  std::string log;
  for (const auto& line : result.log) log += line + "\n";
  for (const auto& line : result.log) {
    if (result.exit_code != kExitOk) err << line << "\n";
  }
  try {
    write_file(config.out_dir / "run.log", log);
    ordered_json m;
    m["tool"] = "pxtopics";
    m["version"] = PXT_VERSION;
    m["subcommand"] = name;
    m["config"] = config.source.string();
    m["config_sha256"] = config.config_sha256;
    m["seed"] = config.seed;
    m["run_id"] = config.backend.run_id;
    m["started_at"] = utc_timestamp(started);
    m["finished_at"] = utc_timestamp(finished);
    m["exit_code"] = result.exit_code;
    auto& outputs = m["outputs"] = ordered_json::array();
    for (const auto& p : result.outputs) outputs.push_back(p.lexically_relative(config.out_dir).generic_string());
    write_file(config.out_dir / "manifest.json", m.dump(2) + "\n");
  } catch (const Error& e) {
    err << "error writing run records: " << e.what() << "\n";
    return kExitInvalid;
  }
  return result.exit_code;
}

}  // namespace pxt
