#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pxt/pipeline.hpp"

using namespace pxt;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = PXT_SOURCE_DIR;
const fs::path kSample = kRoot / "data/sample";
const fs::path kGolden = kRoot / "tests/golden";

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("pxt-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

PipelineConfig sample_config(const fs::path& out, std::optional<OutputFormat> format = {}) {
  Overrides o;
  o.out = out;
  o.format = format;
  return validate_config(kSample / "config.ini", o);
}

std::vector<std::string> config_errors(const std::string& text, const fs::path& dir) {
  auto path = dir / "config.ini";
  write_file(path, text);
  try {
    validate_config(path);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& errors, const std::string& needle) {
  return std::any_of(errors.begin(), errors.end(), [&](const std::string& e) { return e.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("sample config validates") {
  TempDir tmp;
  auto c = sample_config(tmp.path);
  CHECK(c.comments == kSample / "comments.csv");
  CHECK(c.out_dir == tmp.path);
  CHECK(c.seed == 42);
  CHECK(c.backend.kind == BackendKind::RuleBased);
  CHECK(c.schema.variables.size() == 6);
  CHECK(c.schema.variables[0].name == "Building");
  CHECK(c.per_topic_logit);
  CHECK(c.config_sha256.size() == 64);
  CHECK(c.backend.run_id.rfind("run-", 0) == 0);

  Overrides k;
  k.k_shots = 3;
  k.out = tmp.path;
  auto c3 = validate_config(kSample / "config.ini", k);
  CHECK(c3.backend.k_shots == 3);
  CHECK(c3.backend.run_id != c.backend.run_id);
}

TEST_CASE("config errors are collected") {
  TempDir tmp;
  write_file(tmp.path / "comments.csv", "id,text\n1,hello\n");
  write_file(tmp.path / "kw.tsv", "hello\tPositive Feedback\n");

  auto errors = config_errors(
      "[corpus]\ncomments = comments.csv\n[classify]\nkeywords = kw.tsv\ntemplate = missing_template.txt\n"
      "[assoc]\nalpha = 1.5\n",
      tmp.path);
  REQUIRE(errors.size() == 2);
  CHECK(any_contains(errors, "[classify] template"));
  CHECK(any_contains(errors, "[assoc] alpha"));

  auto more = config_errors(
      "[corpus]\ncomments = nope.csv\nbogus = 1\n[classify]\nbackend = telepathy\napi_key = sk-123\n"
      "[output]\nformat = xml\n[extra]\nx = 1\n",
      tmp.path);
  CHECK(any_contains(more, "[corpus] comments"));
  CHECK(any_contains(more, "bogus"));
  CHECK(any_contains(more, "telepathy"));
  CHECK(any_contains(more, "api_key"));
  CHECK(any_contains(more, "xml"));
  CHECK(any_contains(more, "[extra]"));
  CHECK(more.size() >= 6);

  auto shots = config_errors(
      "[corpus]\ncomments = comments.csv\n[classify]\nkeywords = kw.tsv\nshots = shots.jsonl\nk_shots = 2\n", tmp.path);
  CHECK(any_contains(shots, "shots"));

  write_file(tmp.path / "shots.jsonl", "{\"text\": \"Dr. Smith was great\", \"labels\": [\"Positive Feedback\"]}\n");
  auto dirty = config_errors(
      "[corpus]\ncomments = comments.csv\n[classify]\nkeywords = kw.tsv\nshots = shots.jsonl\nk_shots = 1\n", tmp.path);
  CHECK(any_contains(dirty, "PHI"));

  CHECK(config_errors("[corpus]\ncomments = comments.csv\n[classify]\nkeywords = kw.tsv\n", tmp.path).empty());
}

TEST_CASE("prediction records round trip") {
  std::vector<PredictionRecord> recs{{"c1", LabelVector::from_indices({0, 3}), "raw/c1.txt", "r", 2},
                                     {"c2", LabelVector{}, "raw/c2.txt", "r", 1}};
  auto back = parse_predictions(serialize_predictions(recs));
  REQUIRE(back.size() == 2);
  CHECK(back[0].labels == recs[0].labels);
  CHECK(back[1].labels.none());
  CHECK(back[0].attempts == 2);
  CHECK_THROWS_AS(parse_predictions("{\"comment_id\":\"a\",\"labels\":[\"Parking\"]}\n"), Error);
  CHECK_THROWS_AS(parse_predictions("{\"comment_id\":\"a\",\"labels\":[]}\n{\"comment_id\":\"a\",\"labels\":[]}\n"),
                  Error);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("classify and evaluate reproduce the golden files") {
  TempDir tmp;
  auto text = sample_config(tmp.path);
  REQUIRE(run_classify(text).exit_code == kExitOk);
  CHECK(read_file(tmp.path / "predictions.jsonl") == read_file(kGolden / "predictions.jsonl"));
  REQUIRE(run_evaluate(text).exit_code == kExitOk);
  CHECK(read_file(tmp.path / "metrics.txt") == read_file(kGolden / "metrics.txt"));
  REQUIRE(run_evaluate(sample_config(tmp.path, OutputFormat::Json)).exit_code == kExitOk);
  CHECK(read_file(tmp.path / "metrics.json") == read_file(kGolden / "metrics.json"));

  auto raw = read_file(tmp.path / "raw/c01.txt");
  CHECK(raw.front() == '[');
}

TEST_CASE("stored runs aggregate to the golden table") {
  TempDir tmp;
  Overrides o;
  o.out = tmp.path;
  auto c = validate_config(kGolden / "aggregate.ini", o);
  REQUIRE(c.runs.size() == 3);
  REQUIRE(run_evaluate(c).exit_code == kExitOk);
  auto text = read_file(tmp.path / "aggregate.txt");
  CHECK(text == read_file(kGolden / "aggregate.txt"));
  CHECK(text.find(" ± ") != std::string::npos);
}

TEST_CASE("redaction output is a fixpoint") {
  TempDir tmp;
  auto c = sample_config(tmp.path);
  REQUIRE(run_redact(c).exit_code == kExitOk);
  auto redacted = load_comments(tmp.path / "redacted.jsonl", DataFormat::Jsonl);
  REQUIRE(redacted.size() == 20);
  for (const auto& r : redacted) {
    CAPTURE(r.text);
    CHECK(phi::detect_all(r.text, c.phi).empty());
    CHECK(phi::redact(r.text, c.phi).redacted_text == r.text);
  }
  CHECK(read_file(tmp.path / "phi_report.txt").find("Phone") != std::string::npos);

  auto c2 = c;
  c2.comments = tmp.path / "redacted.jsonl";
  c2.comments_format = DataFormat::Jsonl;
  c2.out_dir = tmp.path / "second";
  REQUIRE(run_redact(c2).exit_code == kExitOk);
  CHECK(read_file(c2.out_dir / "redacted.jsonl") == read_file(tmp.path / "redacted.jsonl"));
}

TEST_CASE("agreement and associate on the sample") {
  TempDir tmp;
  auto c = sample_config(tmp.path);
  CHECK(run_agreement(c).exit_code == kExitOk);
  auto agreement = read_file(tmp.path / "agreement.txt");
  CHECK(agreement.find("Mean Cohen's kappa") != std::string::npos);
  auto queue = read_file(tmp.path / "review_queue.txt");
  CHECK(queue.find("c04") != std::string::npos);

  REQUIRE(run_classify(c).exit_code == kExitOk);
  CHECK(run_associate(c).exit_code == kExitOk);
  auto grid = read_file(tmp.path / "association.csv");
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 7);
  CHECK(read_file(tmp.path / "association.html").find("<table") != std::string::npos);
  CHECK(read_file(tmp.path / "regression.txt").find("Overall Rating") != std::string::npos);
}

TEST_CASE("missing predictions give a partial exit") {
  TempDir tmp;
  auto c = sample_config(tmp.path);
  write_file(tmp.path / "predictions.jsonl", "{\"comment_id\":\"c01\",\"labels\":[\"Positive Feedback\"]}\n");
  CHECK(run_evaluate(c).exit_code == kExitPartial);
}

TEST_CASE("run_subcommand writes a manifest") {
  TempDir tmp;
  auto c = sample_config(tmp.path);
  std::ostringstream err;
  CHECK(run_subcommand("classify", c, err) == kExitOk);
  auto manifest = nlohmann::json::parse(read_file(tmp.path / "manifest.json"));
  CHECK(manifest["subcommand"] == "classify");
  CHECK(manifest["config_sha256"] == c.config_sha256);
  CHECK(manifest["seed"] == 42);
  CHECK(manifest["exit_code"] == 0);
  CHECK(manifest["run_id"] == c.backend.run_id);
  CHECK(manifest.contains("started_at"));
  CHECK(manifest["outputs"].size() >= 1);
  CHECK(fs::exists(tmp.path / "run.log"));

  auto no_gold = c;
  no_gold.gold.reset();
  CHECK(run_subcommand("evaluate", no_gold, err) == kExitInvalid);
  CHECK(err.str().find("gold") != std::string::npos);
  CHECK(run_subcommand("frobnicate", c, err) == kExitInvalid);
}
