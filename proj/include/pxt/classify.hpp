#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pxt/corpus.hpp"
#include "pxt/error.hpp"
#include "pxt/phi.hpp"
#include "pxt/prompt.hpp"
#include "pxt/topics.hpp"

namespace pxt {

// ---------------------------------------------------------------------------
// Offline keyword backend

struct KeywordTable {
  // lower-case substring -> topic index
  std::vector<std::pair<std::string, std::size_t>> entries;
};

/// Tab-separated "keyword<TAB>Topic Name" lines; '#' comments allowed.
KeywordTable load_keyword_table(const std::filesystem::path& path);
KeywordTable parse_keyword_table(std::string_view text, const std::string& source = "<keywords>");

/// Bit i is set iff some keyword of topic i occurs in the lower-cased text.
LabelVector rule_backend_classify(std::string_view comment_text, const KeywordTable& table);

// ---------------------------------------------------------------------------
// Remote chat-completion transport

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// Connection-level failure (refused, reset, timed out).
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& url, const HttpHeaders& headers,
                            const std::string& body, std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib client; http:// and https:// endpoints.
std::shared_ptr<Transport> make_http_transport();

std::string chat_request_body(const std::string& model, const std::string& prompt, double temperature);
/// Text of choices[0].message.content. Throws ParseFailed on other shapes.
std::string chat_response_text(const std::string& body);

// ---------------------------------------------------------------------------
// Backend

enum class BackendKind { RemoteLlm, RuleBased };

struct BackendConfig {
  BackendKind kind = BackendKind::RuleBased;
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4-turbo";
  double temperature = 0.0;
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 3;
  std::chrono::milliseconds min_request_interval{0};
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{30'000};
  std::size_t max_in_flight = 1;
  std::size_t k_shots = 0;
  std::vector<ShotExample> shot_pool;
  std::string api_key_env = "OPENAI_API_KEY";
  std::string run_id = "run";
  KeywordTable keywords;
  phi::Config phi;  // every outgoing text must scan clean under this config
};

struct ClassificationOutput {
  std::string comment_id;
  LabelVector labels;
  std::string raw_response;
  std::string run_id;
  int attempts = 0;
};

/// Failure after the retry budget, or a refused send. Carries the attempt
/// count and the last raw response seen.
class ClassifyError : public Error {
 public:
  ClassifyError(ErrorCode code, const std::string& message, int attempts, std::string raw)
      : Error(code, message), attempts_(attempts), raw_(std::move(raw)) {}
  int attempts() const noexcept { return attempts_; }
  const std::string& raw_response() const noexcept { return raw_; }

 private:
  int attempts_;
  std::string raw_;
};

/// Serializes request starts to at most one per interval.
class RateLimiter {
 public:
  explicit RateLimiter(std::chrono::milliseconds interval) : interval_(interval) {}
  void acquire();

 private:
  std::chrono::milliseconds interval_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point next_{};
};

class Backend {
 public:
  /// Throws ConfigInvalid when k_shots exceeds the pool, UnredactedText when a
  /// shot example still contains PHI.
  explicit Backend(BackendConfig config, std::shared_ptr<Transport> transport = nullptr);

  const BackendConfig& config() const noexcept { return config_; }
  std::vector<ShotExample> shots() const;

  ClassificationOutput classify(const PromptTemplate& tmpl, const Comment& comment);

 private:
  ClassificationOutput classify_remote(const PromptTemplate& tmpl, const Comment& comment);
  std::chrono::milliseconds backoff(int retry) const;

  BackendConfig config_;
  std::shared_ptr<Transport> transport_;
  std::unique_ptr<RateLimiter> limiter_;
};

ClassificationOutput classify_comment(Backend& backend, const PromptTemplate& tmpl, const Comment& comment);

struct ClassificationFailure {
  std::string comment_id;
  ErrorCode code = ErrorCode::BackendUnavailable;
  std::string message;
  int attempts = 0;
};

struct CorpusClassification {
  std::vector<ClassificationOutput> outputs;  // input order, failures skipped
  std::vector<ClassificationFailure> failures;
};

/// Runs every comment with at most max_in_flight concurrent requests.
CorpusClassification classify_corpus(Backend& backend, const PromptTemplate& tmpl,
                                     const std::vector<Comment>& comments);

}  // namespace pxt
