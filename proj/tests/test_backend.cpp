#include <doctest.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <deque>
#include <thread>

#include <nlohmann/json.hpp>

#include "pxt/classify.hpp"

using namespace pxt;
using namespace std::chrono_literals;

namespace {

constexpr const char* kKeyEnv = "PXT_TEST_API_KEY";

std::string chat_body(const std::string& content) {
  nlohmann::json j;
  j["choices"] = {{{"message", {{"role", "assistant"}, {"content", content}}}}};
  return j.dump();
}

// Replays scripted responses; a status of -1 throws a TransportError.
class ScriptedTransport : public Transport {
 public:
  explicit ScriptedTransport(std::deque<HttpResponse> script) : script_(std::move(script)) {}

  HttpResponse post(const std::string& url, const HttpHeaders& headers, const std::string& body,
                    std::chrono::milliseconds) override {
    std::lock_guard lock(mutex_);
    ++calls;
    last_url = url;
    last_headers = headers;
    last_body = body;
    if (script_.empty()) return {200, chat_body("[]")};
    auto r = script_.front();
    script_.pop_front();
    if (r.status == -1) throw TransportError("connection refused");
    return r;
  }

  int calls = 0;
  std::string last_url;
  HttpHeaders last_headers;
  std::string last_body;

 private:
  std::mutex mutex_;
  std::deque<HttpResponse> script_;
};

// Answers from the comment text embedded in the prompt.
class EchoTransport : public Transport {
 public:
  HttpResponse post(const std::string&, const HttpHeaders&, const std::string& body,
                    std::chrono::milliseconds) override {
    auto prompt = nlohmann::json::parse(body)["messages"][0]["content"].get<std::string>();
    if (prompt.find("fail permanently") != std::string::npos) return {400, "bad request"};
    std::this_thread::sleep_for(1ms);
    return {200, chat_body(prompt.find("Comment: \"the food") != std::string::npos ? "[\"Issues with Food Service\"]" : "[]")};
  }
};

BackendConfig remote_config() {
  BackendConfig c;
  c.kind = BackendKind::RemoteLlm;
  c.endpoint = "http://stub.invalid/v1/chat/completions";
  c.api_key_env = kKeyEnv;
  c.initial_backoff = 1ms;
  c.max_backoff = 4ms;
  c.max_retries = 3;
  c.run_id = "test-run";
  return c;
}

struct KeyGuard {
  KeyGuard() { setenv(kKeyEnv, "sk-test", 1); }
  ~KeyGuard() { unsetenv(kKeyEnv); }
};

}  // namespace

TEST_CASE("rule backend") {
  auto table = parse_keyword_table("great\tPositive Feedback\nnoisy\tNoisy Environment\nfood\tIssues with Food Service\n");
  CHECK(rule_backend_classify("everything was GREAT", table) == LabelVector::from_indices({0}));
  CHECK(rule_backend_classify("room was noisy and food was cold", table) == LabelVector::from_indices({1, 6}));
  CHECK(rule_backend_classify("xyzzy", table).none());

  BackendConfig c;
  c.keywords = table;
  Backend b(c);
  auto out = b.classify(default_prompt_template(), {"c1", "the food was cold"});
  CHECK(out.labels.test(6));
  CHECK(out.attempts == 1);

  try {
    parse_keyword_table("okay\tParking\n");
    FAIL("expected UnknownLabel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownLabel);
  }
}

TEST_CASE("remote backend retries") {
  KeyGuard key;
  auto tmpl = default_prompt_template();
  const Comment comment{"c1", "the nurses were kind"};

  SUBCASE("first attempt") {
    auto t = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{200, chat_body("[\"Positive Feedback\"]")}});
    Backend b(remote_config(), t);
    auto out = b.classify(tmpl, comment);
    CHECK(out.labels == LabelVector::from_indices({0}));
    CHECK(out.attempts == 1);
    CHECK(out.raw_response == "[\"Positive Feedback\"]");
    CHECK(out.run_id == "test-run");
    CHECK(t->last_url == "http://stub.invalid/v1/chat/completions");
    bool has_auth = false;
    for (const auto& [k, v] : t->last_headers) has_auth |= k == "Authorization" && v == "Bearer sk-test";
    CHECK(has_auth);
    auto body = nlohmann::json::parse(t->last_body);
    CHECK(body["model"] == "gpt-4-turbo");
    CHECK(body["temperature"] == 0.0);
    CHECK(body["messages"][0]["content"].get<std::string>().find("the nurses were kind") != std::string::npos);
  }
  SUBCASE("two failures then success") {
    auto t = std::make_shared<ScriptedTransport>(
        std::deque<HttpResponse>{{503, ""}, {-1, ""}, {200, chat_body("[\"Positive Feedback\"]")}});
    Backend b(remote_config(), t);
    auto out = b.classify(tmpl, comment);
    CHECK(out.attempts == 3);
    CHECK(t->calls == 3);
  }
  SUBCASE("rate limited then malformed then unknown label then success") {
    auto t = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{
        {429, ""}, {200, "{}"}, {200, chat_body("[\"Parking\"]")}, {200, chat_body("Noisy Environment")}});
    Backend b(remote_config(), t);
    auto out = b.classify(tmpl, comment);
    CHECK(out.attempts == 4);
    CHECK(out.labels == LabelVector::from_indices({1}));
  }
  SUBCASE("budget exhausted") {
    auto t = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{500, ""}, {500, ""}, {500, ""}, {500, ""}});
    Backend b(remote_config(), t);
    try {
      b.classify(tmpl, comment);
      FAIL("expected ClassifyError");
    } catch (const ClassifyError& e) {
      CHECK(e.code() == ErrorCode::BackendUnavailable);
      CHECK(e.attempts() == 4);
    }
  }
  SUBCASE("unparseable answers exhaust into ParseFailed") {
    std::deque<HttpResponse> script(4, HttpResponse{200, chat_body("[\"Parking\"]")});
    auto t = std::make_shared<ScriptedTransport>(script);
    Backend b(remote_config(), t);
    try {
      b.classify(tmpl, comment);
      FAIL("expected ClassifyError");
    } catch (const ClassifyError& e) {
      CHECK(e.code() == ErrorCode::ParseFailed);
      CHECK(e.raw_response() == "[\"Parking\"]");
    }
  }
  SUBCASE("client errors are not retried") {
    auto t = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{401, "unauthorized"}});
    Backend b(remote_config(), t);
    CHECK_THROWS_AS(b.classify(tmpl, comment), ClassifyError);
    CHECK(t->calls == 1);
  }
}

TEST_CASE("missing API key") {
  unsetenv(kKeyEnv);
  auto t = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{});
  Backend b(remote_config(), t);
  try {
    b.classify(default_prompt_template(), {"c1", "fine"});
    FAIL("expected ClassifyError");
  } catch (const ClassifyError& e) {
    CHECK(e.code() == ErrorCode::BackendUnavailable);
    CHECK(std::string(e.what()).find(kKeyEnv) != std::string::npos);
  }
  CHECK(t->calls == 0);
}

TEST_CASE("unredacted text never leaves the process") {
  KeyGuard key;
  auto t = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{});
  Backend b(remote_config(), t);
  try {
    b.classify(default_prompt_template(), {"c1", "call me at 555-123-4567"});
    FAIL("expected ClassifyError");
  } catch (const ClassifyError& e) {
    CHECK(e.code() == ErrorCode::UnredactedText);
  }
  CHECK(t->calls == 0);

  auto c = remote_config();
  c.shot_pool = {{"Dr. Smith was great", LabelVector::from_indices({0})}};
  c.k_shots = 1;
  CHECK_THROWS_AS(Backend(c, t), Error);
  c.k_shots = 2;
  CHECK_THROWS_AS(Backend(c, t), Error);
}

TEST_CASE("rate limiter spaces request starts") {
  RateLimiter limiter(20ms);
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 4; ++i) limiter.acquire();
  CHECK(std::chrono::steady_clock::now() - start >= 60ms);
}

TEST_CASE("corpus classification keeps order and records failures") {
  KeyGuard key;
  std::vector<Comment> comments;
  for (int i = 0; i < 20; ++i) {
    std::string text = i % 3 == 0 ? "the food was cold" : "all fine";
    if (i == 13) text = "fail permanently";
    comments.push_back({"c" + std::to_string(i), text});
  }
  auto c = remote_config();
  c.max_in_flight = 4;
  Backend b(c, std::make_shared<EchoTransport>());
  auto result = classify_corpus(b, default_prompt_template(), comments);
  REQUIRE(result.outputs.size() == 19);
  REQUIRE(result.failures.size() == 1);
  CHECK(result.failures[0].comment_id == "c13");
  std::size_t k = 0;
  for (int i = 0; i < 20; ++i) {
    if (i == 13) continue;
    CHECK(result.outputs[k].comment_id == "c" + std::to_string(i));
    CHECK(result.outputs[k].labels.test(6) == (i % 3 == 0));
    ++k;
  }

  CHECK(classify_corpus(b, default_prompt_template(), {}).outputs.empty());
}

TEST_CASE("rule backend corpus is stable") {
  BackendConfig c;
  c.keywords = parse_keyword_table("cold\tIssues with Food Service\nloud\tNoisy Environment\n");
  Backend b(c);
  std::vector<Comment> comments;
  for (int i = 0; i < 20; ++i) comments.push_back({"c" + std::to_string(i), i % 2 ? "cold soup" : "loud room"});
  auto a = classify_corpus(b, default_prompt_template(), comments);
  auto again = classify_corpus(b, default_prompt_template(), comments);
  REQUIRE(a.outputs.size() == 20);
  for (int i = 0; i < 20; ++i) CHECK(a.outputs[i].labels == again.outputs[i].labels);
}

TEST_CASE("wire format against a local server") {
  KeyGuard key;
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (hits++ == 0) {
      res.status = 503;
      return;
    }
    seen_auth = req.get_header_value("Authorization");
    auto j = nlohmann::json::parse(req.body);
    std::string answer = j["messages"][0]["content"].get<std::string>().find("Comment: \"so noisy") != std::string::npos
                             ? "[\"Noisy Environment\"]"
                             : "[]";
    res.set_content(chat_body(answer), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto c = remote_config();
  c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  c.timeout = 5000ms;
  Backend b(c, make_http_transport());
  auto out = b.classify(default_prompt_template(), {"c1", "so noisy at night"});
  CHECK(out.labels == LabelVector::from_indices({1}));
  CHECK(out.attempts == 2);
  CHECK(seen_auth == "Bearer sk-test");

  server.stop();
  thread.join();

  c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  c.max_retries = 0;
  c.timeout = 500ms;
  Backend dead(c, make_http_transport());
  CHECK_THROWS_AS(dead.classify(default_prompt_template(), {"c1", "hello"}), ClassifyError);
}

TEST_CASE("chat response extraction") {
  CHECK(chat_response_text(chat_body("hi")) == "hi");
  CHECK_THROWS_AS(chat_response_text("{\"choices\":[]}"), Error);
  CHECK_THROWS_AS(chat_response_text("not json"), Error);
  auto req = nlohmann::json::parse(chat_request_body("m", "prompt text", 0.5));
  CHECK(req["messages"][0]["role"] == "user");
  CHECK(req["temperature"] == 0.5);
}
