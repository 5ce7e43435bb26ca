#include <charconv>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "pxt/pipeline.hpp"

namespace pxt {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

std::optional<OutputFormat> parse_output_format(std::string_view name) {
  if (name == "json") return OutputFormat::Json;
  if (name == "csv") return OutputFormat::Csv;
  if (name == "text") return OutputFormat::Text;
  return std::nullopt;
}

std::string_view to_string(OutputFormat format) {
  switch (format) {
    case OutputFormat::Json: return "json";
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Text: return "text";
  }
  return "?";
}

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out = fmt::format("{} configuration error(s)", errors.size());
  for (const auto& e : errors) out += "\n  " + e;
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    if (comma == std::string_view::npos) comma = s.size();
    std::string item = trim(s.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(std::move(item));
    pos = comma + 1;
  }
  return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"corpus",
       {"comments", "comments_format", "annotations", "annotations_format", "gold", "gold_format", "survey",
        "survey_format", "survey_id_column"}},
      {"phi", {"name_gazetteer", "term_gazetteer", "categories", "sample_size", "seed"}},
      {"classify",
       {"backend", "input", "keywords", "template", "shots", "k_shots", "style", "endpoint", "model", "temperature",
        "timeout_ms", "max_retries", "min_request_interval_ms", "initial_backoff_ms", "max_backoff_ms",
        "max_in_flight", "api_key_env", "run_id"}},
      {"eval", {"predictions", "runs"}},
      {"assoc",
       {"alpha", "rating_variable", "logit", "demographics", "ratings", "multiple_choice", "rating_range"}},
      {"output", {"dir", "seed", "format"}},
  };
  return keys;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, fs::path base, std::vector<std::string>& errors)
      : tree_(tree), base_(std::move(base)), errors_(errors) {}

  void check_structure() {
    for (const auto& [section, body] : tree_) {
      auto it = known_keys().find(section);
      if (body.empty() && !body.data().empty()) {
        errors_.push_back(fmt::format("key '{}' appears outside any section", section));
        continue;
      }
      if (it == known_keys().end()) {
        errors_.push_back(fmt::format("unknown section [{}]", section));
        continue;
      }
      for (const auto& [key, value] : body) {
        if (key == "api_key" || key == "token" || key == "secret") {
          errors_.push_back(fmt::format("[{}] {}: secrets are read from the environment variable named by "
                                        "[classify] api_key_env, never from the config file",
                                        section, key));
        } else if (section == "assoc" && (key.rfind("range.", 0) == 0 || key.rfind("column.", 0) == 0)) {
          continue;
        } else if (!it->second.count(key)) {
          errors_.push_back(fmt::format("unknown key [{}] {}", section, key));
        }
      }
    }
  }

  const pt::ptree* section(const std::string& name) const {
    auto it = tree_.find(name);
    return it == tree_.not_found() ? nullptr : &it->second;
  }

  std::optional<std::string> str(const std::string& sec, const std::string& key) const {
    const auto* s = section(sec);
    if (!s) return std::nullopt;
    auto it = s->find(key);
    if (it == s->not_found()) return std::nullopt;
    return it->second.data();
  }

  std::optional<fs::path> path(const std::string& sec, const std::string& key, bool must_exist = true) {
    auto v = str(sec, key);
    if (!v) return std::nullopt;
    if (v->empty()) {
      errors_.push_back(fmt::format("[{}] {}: empty path", sec, key));
      return std::nullopt;
    }
    fs::path p = fs::path(*v).is_absolute() ? fs::path(*v) : base_ / *v;
    p = p.lexically_normal();
    if (must_exist && !fs::exists(p)) {
      errors_.push_back(fmt::format("[{}] {}: file not found: {}", sec, key, p.string()));
      return std::nullopt;
    }
    return p;
  }

  template <typename T>
  std::optional<T> integer(const std::string& sec, const std::string& key) {
    auto v = str(sec, key);
    if (!v) return std::nullopt;
    T out{};
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size()) {
      errors_.push_back(fmt::format("[{}] {}: expected a non-negative integer, got '{}'", sec, key, *v));
      return std::nullopt;
    }
    return out;
  }

  std::optional<double> real(const std::string& sec, const std::string& key) {
    auto v = str(sec, key);
    if (!v) return std::nullopt;
    try {
      std::size_t used = 0;
      double d = std::stod(*v, &used);
      if (used == v->size()) return d;
    } catch (const std::exception&) {
    }
    errors_.push_back(fmt::format("[{}] {}: expected a number, got '{}'", sec, key, *v));
    return std::nullopt;
  }

  DataFormat data_format(const std::string& sec, const std::string& key, DataFormat fallback) {
    auto v = str(sec, key);
    if (!v) return fallback;
    auto f = parse_data_format(*v);
    if (!f) {
      errors_.push_back(fmt::format("[{}] {}: expected csv or jsonl, got '{}'", sec, key, *v));
      return fallback;
    }
    return *f;
  }

  void error(std::string message) { errors_.push_back(std::move(message)); }

 private:
  const pt::ptree& tree_;
  fs::path base_;
  std::vector<std::string>& errors_;
};

std::optional<std::pair<int, int>> parse_range(const std::string& s) {
  auto dash = s.find('-', 1);
  if (dash == std::string::npos) return std::nullopt;
  int lo = 0, hi = 0;
  std::string a = trim(s.substr(0, dash)), b = trim(s.substr(dash + 1));
  auto r1 = std::from_chars(a.data(), a.data() + a.size(), lo);
  auto r2 = std::from_chars(b.data(), b.data() + b.size(), hi);
  if (r1.ec != std::errc() || r2.ec != std::errc() || r1.ptr != a.data() + a.size() ||
      r2.ptr != b.data() + b.size() || lo > hi) {
    return std::nullopt;
  }
  return std::pair{lo, hi};
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : Error(ErrorCode::ConfigInvalid, join_errors(errors)), errors_(std::move(errors)) {}

PipelineConfig parse_config(std::string_view text, const fs::path& source, const Overrides& overrides) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({fmt::format("{}:{}: {}", source.string(), e.line(), e.message())});
  }

  std::vector<std::string> errors;
  Reader r(tree, source.parent_path(), errors);
  r.check_structure();

  PipelineConfig c;
  c.source = source;
  c.config_sha256 = sha256_hex(text);

  // [corpus]
  if (auto p = r.path("corpus", "comments")) {
    c.comments = *p;
  } else if (!r.str("corpus", "comments")) {
    r.error("[corpus] comments: required key is missing");
  }
  c.comments_format = r.data_format("corpus", "comments_format", DataFormat::Csv);
  c.annotations = r.path("corpus", "annotations");
  c.annotations_format = r.data_format("corpus", "annotations_format", DataFormat::Csv);
  c.gold = r.path("corpus", "gold");
  c.gold_format = r.data_format("corpus", "gold_format", DataFormat::Csv);
  c.survey = r.path("corpus", "survey");
  c.survey_format = r.data_format("corpus", "survey_format", DataFormat::Csv);
  if (auto id = r.str("corpus", "survey_id_column")) c.schema.id_column = *id;

  // [output]
  if (auto d = r.path("output", "dir", false)) c.out_dir = *d;
  else c.out_dir = (source.parent_path() / "out").lexically_normal();
  if (auto s = r.integer<std::uint64_t>("output", "seed")) c.seed = *s;
  if (auto f = r.str("output", "format")) {
    if (auto ff = parse_output_format(*f)) c.format = *ff;
    else r.error(fmt::format("[output] format: expected json, csv or text, got '{}'", *f));
  }
  if (overrides.out) c.out_dir = *overrides.out;
  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.format) c.format = *overrides.format;

  // [phi]
  c.phi.seed = c.seed;
  if (auto p = r.path("phi", "name_gazetteer")) c.phi.name_gazetteer = phi::load_gazetteer(*p);
  if (auto p = r.path("phi", "term_gazetteer")) c.phi.term_gazetteer = phi::load_gazetteer(*p);
  if (auto cats = r.str("phi", "categories"); cats && trim(*cats) != "all") {
    c.phi.enabled.clear();
    for (const auto& name : split_list(*cats)) {
      if (auto cat = phi::parse_category(name)) c.phi.enabled.insert(*cat);
      else r.error(fmt::format("[phi] categories: unknown category '{}'", name));
    }
  }
  if (auto n = r.integer<std::size_t>("phi", "sample_size")) c.phi.sample_size = *n;
  if (auto s = r.integer<std::uint64_t>("phi", "seed")) c.phi.seed = *s;

  // [classify]
  BackendConfig& b = c.backend;
  if (auto kind = r.str("classify", "backend")) {
    if (*kind == "rules") b.kind = BackendKind::RuleBased;
    else if (*kind == "remote") b.kind = BackendKind::RemoteLlm;
    else r.error(fmt::format("[classify] backend: expected rules or remote, got '{}'", *kind));
  }
  if (overrides.backend) b.kind = *overrides.backend;
  c.classify_input = r.path("classify", "input");
  c.keywords_path = r.path("classify", "keywords");
  c.template_path = r.path("classify", "template");
  c.shots_path = r.path("classify", "shots");
  if (auto style = r.str("classify", "style")) {
    if (*style == "plain") c.style = PromptStyle::Plain;
    else if (*style == "chain_of_thought" || *style == "cot") c.style = PromptStyle::ChainOfThought;
    else r.error(fmt::format("[classify] style: expected plain or chain_of_thought, got '{}'", *style));
  }
  if (auto k = r.integer<std::size_t>("classify", "k_shots")) b.k_shots = *k;
  if (overrides.k_shots) b.k_shots = *overrides.k_shots;
  if (auto v = r.str("classify", "endpoint")) b.endpoint = *v;
  if (auto v = r.str("classify", "model")) b.model = *v;
  if (auto v = r.real("classify", "temperature")) {
    if (*v < 0) r.error("[classify] temperature: must be >= 0");
    b.temperature = *v;
  }
  if (auto v = r.integer<long>("classify", "timeout_ms")) b.timeout = std::chrono::milliseconds(*v);
  if (auto v = r.integer<int>("classify", "max_retries")) b.max_retries = *v;
  if (auto v = r.integer<long>("classify", "min_request_interval_ms")) b.min_request_interval = std::chrono::milliseconds(*v);
  if (auto v = r.integer<long>("classify", "initial_backoff_ms")) b.initial_backoff = std::chrono::milliseconds(*v);
  if (auto v = r.integer<long>("classify", "max_backoff_ms")) b.max_backoff = std::chrono::milliseconds(*v);
  if (auto v = r.integer<std::size_t>("classify", "max_in_flight")) {
    if (*v == 0) r.error("[classify] max_in_flight: must be >= 1");
    b.max_in_flight = *v;
  }
  if (auto v = r.str("classify", "api_key_env")) b.api_key_env = *v;
  if (auto v = r.str("classify", "run_id")) {
    b.run_id = *v;
    c.run_id_explicit = true;
  }
  b.phi = c.phi;

  auto guarded = [&](const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      r.error(fmt::format("[classify] {}: {}", key, e.what()));
    }
  };
  if (c.keywords_path) guarded("keywords", [&] { b.keywords = load_keyword_table(*c.keywords_path); });
  if (b.kind == BackendKind::RuleBased && !c.keywords_path && !r.str("classify", "keywords")) {
    r.error("[classify] keywords: required for the rules backend");
  }
  if (c.template_path) {
    guarded("template", [&] { c.prompt = load_prompt_template(*c.template_path, c.style); });
  } else if (!r.str("classify", "template")) {
    c.prompt = default_prompt_template();
    c.prompt.style = c.style;
  }
  if (c.shots_path) guarded("shots", [&] { b.shot_pool = load_shot_pool(*c.shots_path); });
  if (b.k_shots > b.shot_pool.size()) {
    r.error(fmt::format("[classify] k_shots: {} exceeds the shot pool of {}", b.k_shots, b.shot_pool.size()));
  } else {
    for (std::size_t i = 0; i < b.k_shots; ++i) {
      if (!phi::detect_all(b.shot_pool[i].text, c.phi).empty()) {
        r.error(fmt::format("[classify] shots: example {} contains PHI", i + 1));
      }
    }
  }
  if (b.kind == BackendKind::RemoteLlm && b.endpoint.empty()) r.error("[classify] endpoint: required for remote");

  // [eval]
  c.predictions = r.path("eval", "predictions", false);
  if (auto runs = r.str("eval", "runs")) {
    std::size_t listed = 0;
    for (const auto& item : split_list(*runs)) {
      ++listed;
      fs::path p = fs::path(item).is_absolute() ? fs::path(item) : source.parent_path() / item;
      p = p.lexically_normal();
      if (!fs::exists(p)) r.error(fmt::format("[eval] runs: file not found: {}", p.string()));
      c.runs.push_back(p);
    }
    if (listed == 1) r.error("[eval] runs: aggregation needs at least 2 runs");
  }

  // [assoc]
  if (auto a = r.real("assoc", "alpha")) {
    if (!(*a > 0.0 && *a < 1.0)) r.error(fmt::format("[assoc] alpha: {} is outside (0, 1)", *a));
    c.alpha = *a;
  }
  if (auto v = r.str("assoc", "rating_variable")) c.rating_variable = *v;
  if (auto v = r.str("assoc", "logit")) {
    if (*v == "joint") c.per_topic_logit = false;
    else if (*v == "per_topic") c.per_topic_logit = true;
    else r.error(fmt::format("[assoc] logit: expected joint or per_topic, got '{}'", *v));
  }
  std::pair<int, int> default_range{0, 10};
  if (auto v = r.str("assoc", "rating_range")) {
    if (auto range = parse_range(*v)) default_range = *range;
    else r.error(fmt::format("[assoc] rating_range: expected 'min-max', got '{}'", *v));
  }
  std::set<std::string> seen;
  auto add_variables = [&](const std::string& key, VariableKind kind) {
    auto list = r.str("assoc", key);
    if (!list) return;
    for (const auto& name : split_list(*list)) {
      if (!seen.insert(name).second) {
        r.error(fmt::format("[assoc] {}: variable '{}' listed twice", key, name));
        continue;
      }
      SurveyVariable var;
      var.name = name;
      var.column = r.str("assoc", "column." + name).value_or(name);
      var.kind = kind;
      var.min_rating = default_range.first;
      var.max_rating = default_range.second;
      if (auto range = r.str("assoc", "range." + name)) {
        if (kind != VariableKind::Rating) {
          r.error(fmt::format("[assoc] range.{}: ranges apply to ratings only", name));
        } else if (auto parsed = parse_range(*range)) {
          var.min_rating = parsed->first;
          var.max_rating = parsed->second;
        } else {
          r.error(fmt::format("[assoc] range.{}: expected 'min-max', got '{}'", name, *range));
        }
      }
      c.schema.variables.push_back(std::move(var));
    }
  };
  add_variables("demographics", VariableKind::Demographic);
  add_variables("ratings", VariableKind::Rating);
  add_variables("multiple_choice", VariableKind::MultipleChoice);
  if (const auto* assoc = r.section("assoc")) {
    for (const auto& [key, value] : *assoc) {
      for (std::string prefix : {"range.", "column."}) {
        if (key.rfind(prefix, 0) == 0 && !seen.count(key.substr(prefix.size()))) {
          r.error(fmt::format("[assoc] {}: '{}' is not a listed variable", key, key.substr(prefix.size())));
        }
      }
    }
    if (const auto* v = c.schema.find(c.rating_variable); r.str("assoc", "rating_variable") &&
                                                          (!v || v->kind != VariableKind::Rating)) {
      r.error(fmt::format("[assoc] rating_variable: '{}' is not listed under ratings", c.rating_variable));
    }
  }

  if (!errors.empty()) throw ConfigError(std::move(errors));

  if (!c.run_id_explicit) {
    std::string basis = fmt::format("{}|{}|{}|{}", c.config_sha256, c.seed, b.k_shots,
                                    b.kind == BackendKind::RemoteLlm ? "remote" : "rules");
    b.run_id = "run-" + sha256_hex(basis).substr(0, 12);
  }
  return c;
}

PipelineConfig validate_config(const fs::path& path, const Overrides& overrides) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError({e.what()});
  }
  return parse_config(text, path, overrides);
}

}  // namespace pxt
