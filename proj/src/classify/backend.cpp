#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "pxt/classify.hpp"

namespace pxt {

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

KeywordTable parse_keyword_table(std::string_view text, const std::string& source) {
  KeywordTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::MalformedRecord, "expected 'keyword<TAB>topic'", source, lineno);
    }
    std::string keyword = to_lower(trim(line.substr(0, tab)));
    std::string topic = trim(line.substr(tab + 1));
    auto idx = topic_index(topic);
    if (!idx) throw Error(ErrorCode::UnknownLabel, "'" + topic + "' is not a canonical topic", source, lineno);
    if (keyword.empty()) throw Error(ErrorCode::MalformedRecord, "empty keyword", source, lineno);
    table.entries.emplace_back(std::move(keyword), *idx);
  }
  return table;
}

KeywordTable load_keyword_table(const std::filesystem::path& path) {
  return parse_keyword_table(read_file(path), path.string());
}

LabelVector rule_backend_classify(std::string_view comment_text, const KeywordTable& table) {
  std::string lowered = to_lower(comment_text);
  LabelVector v;
  for (const auto& [keyword, topic] : table.entries) {
    if (lowered.find(keyword) != std::string::npos) v.set(topic);
  }
  return v;
}

std::string chat_request_body(const std::string& model, const std::string& prompt, double temperature) {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", prompt}}});
  j["temperature"] = temperature;
  return j.dump();
}

std::string chat_response_text(const std::string& body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("choices") || !j["choices"].is_array() ||
      j["choices"].empty()) {
    throw Error(ErrorCode::ParseFailed, "response has no choices");
  }
  const auto& first = j["choices"][0];
  if (!first.contains("message") || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    throw Error(ErrorCode::ParseFailed, "first choice has no message content");
  }
  return first["message"]["content"].get<std::string>();
}

void RateLimiter::acquire() {
  if (interval_.count() <= 0) return;
  std::lock_guard lock(mutex_);
  auto now = std::chrono::steady_clock::now();
  if (now < next_) {
    std::this_thread::sleep_until(next_);
    now = next_;
  }
  next_ = now + interval_;
}

Backend::Backend(BackendConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      limiter_(std::make_unique<RateLimiter>(config_.min_request_interval)) {
  if (config_.k_shots > config_.shot_pool.size()) {
    throw Error(ErrorCode::ConfigInvalid, "k_shots = " + std::to_string(config_.k_shots) +
                                              " exceeds shot pool of " +
                                              std::to_string(config_.shot_pool.size()));
  }
  if (config_.temperature < 0) throw Error(ErrorCode::ConfigInvalid, "temperature must be >= 0");
  if (config_.max_retries < 0) throw Error(ErrorCode::ConfigInvalid, "max_retries must be >= 0");
  for (std::size_t i = 0; i < config_.k_shots; ++i) {
    if (!phi::detect_all(config_.shot_pool[i].text, config_.phi).empty()) {
      throw Error(ErrorCode::UnredactedText, "shot example " + std::to_string(i + 1) + " contains PHI");
    }
  }
  if (config_.kind == BackendKind::RemoteLlm && !transport_) transport_ = make_http_transport();
}

std::vector<ShotExample> Backend::shots() const {
  return {config_.shot_pool.begin(), config_.shot_pool.begin() + static_cast<std::ptrdiff_t>(config_.k_shots)};
}

std::chrono::milliseconds Backend::backoff(int retry) const {
  auto delay = config_.initial_backoff;
  for (int i = 1; i < retry && delay < config_.max_backoff; ++i) delay *= 2;
  return std::min(delay, config_.max_backoff);
}

ClassificationOutput Backend::classify(const PromptTemplate& tmpl, const Comment& comment) {
  if (!phi::detect_all(comment.text, config_.phi).empty()) {
    throw ClassifyError(ErrorCode::UnredactedText,
                        "comment '" + comment.id + "' still contains PHI; refusing to classify", 0, {});
  }
  if (config_.kind == BackendKind::RemoteLlm) return classify_remote(tmpl, comment);

  ClassificationOutput out;
  out.comment_id = comment.id;
  out.labels = rule_backend_classify(comment.text, config_.keywords);
  out.raw_response = render_answer(out.labels);
  out.run_id = config_.run_id;
  out.attempts = 1;
  return out;
}

ClassificationOutput Backend::classify_remote(const PromptTemplate& tmpl, const Comment& comment) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ClassifyError(ErrorCode::BackendUnavailable,
                        "environment variable " + config_.api_key_env + " is not set", 0, {});
  }
  const std::string prompt = build_prompt(tmpl, canonical_topics(), shots(), comment.text);
  const std::string body = chat_request_body(config_.model, prompt, config_.temperature);
  const HttpHeaders headers{{"Authorization", std::string("Bearer ") + key},
                            {"Content-Type", "application/json"}};

  ErrorCode last_code = ErrorCode::BackendUnavailable;
  std::string last_message;
  std::string last_raw;
  int attempts = 0;
  for (int attempt = 1; attempt <= config_.max_retries + 1; ++attempt) {
    attempts = attempt;
    if (attempt > 1) std::this_thread::sleep_for(backoff(attempt - 1));
    limiter_->acquire();

    HttpResponse resp;
    try {
      resp = transport_->post(config_.endpoint, headers, body, config_.timeout);
    } catch (const TransportError& e) {
      last_code = ErrorCode::BackendUnavailable;
      last_message = e.what();
      continue;
    }
    if (resp.status == 429 || resp.status >= 500) {
      last_code = ErrorCode::BackendUnavailable;
      last_message = "HTTP " + std::to_string(resp.status);
      continue;
    }
    if (resp.status < 200 || resp.status >= 300) {
      throw ClassifyError(ErrorCode::BackendUnavailable,
                          "HTTP " + std::to_string(resp.status) + " is not retryable", attempts, resp.body);
    }
    std::string text;
    try {
      text = chat_response_text(resp.body);
    } catch (const Error& e) {
      last_code = ErrorCode::BackendUnavailable;
      last_message = e.what();
      last_raw = resp.body;
      continue;
    }
    last_raw = text;
    try {
      ClassificationOutput out;
      out.labels = parse_response(text, canonical_topics());
      out.comment_id = comment.id;
      out.raw_response = std::move(text);
      out.run_id = config_.run_id;
      out.attempts = attempts;
      return out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnknownLabel && e.code() != ErrorCode::EmptyResponse) throw;
      last_code = ErrorCode::ParseFailed;
      last_message = e.what();
    }
  }
  throw ClassifyError(last_code,
                      "comment '" + comment.id + "' failed after " + std::to_string(attempts) +
                          " attempts: " + last_message,
                      attempts, last_raw);
}

ClassificationOutput classify_comment(Backend& backend, const PromptTemplate& tmpl, const Comment& comment) {
  return backend.classify(tmpl, comment);
}

CorpusClassification classify_corpus(Backend& backend, const PromptTemplate& tmpl,
                                     const std::vector<Comment>& comments) {
  struct Slot {
    std::optional<ClassificationOutput> output;
    std::optional<ClassificationFailure> failure;
  };
  std::vector<Slot> slots(comments.size());
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next++; i < comments.size(); i = next++) {
      try {
        slots[i].output = backend.classify(tmpl, comments[i]);
      } catch (const ClassifyError& e) {
        slots[i].failure = ClassificationFailure{comments[i].id, e.code(), e.what(), e.attempts()};
      } catch (const Error& e) {
        slots[i].failure = ClassificationFailure{comments[i].id, e.code(), e.what(), 0};
      }
    }
  };

  std::size_t workers = backend.config().kind == BackendKind::RemoteLlm
                            ? std::clamp<std::size_t>(backend.config().max_in_flight, 1, std::max<std::size_t>(comments.size(), 1))
                            : 1;
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  CorpusClassification result;
  for (auto& s : slots) {
    if (s.output) result.outputs.push_back(std::move(*s.output));
    if (s.failure) result.failures.push_back(std::move(*s.failure));
  }
  return result;
}

}  // namespace pxt
