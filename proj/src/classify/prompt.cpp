#include "pxt/prompt.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pxt/corpus.hpp"
#include "pxt/error.hpp"

namespace pxt {

namespace {

constexpr std::string_view kTopicsTag = "{{TOPICS}}";
constexpr std::string_view kExamplesTag = "{{EXAMPLES}}";
constexpr std::string_view kCommentTag = "{{COMMENT}}";

constexpr std::string_view kDefaultLayout =
    "You are helping a hospital patient-experience team review free-text comments from "
    "post-discharge surveys. Read the patient comment and assign every topic that applies. A "
    "comment can match several topics or none. Use only the topics below, spelled exactly as "
    "written. Personal details in the comment have been replaced by tags such as [NAME] or "
    "[DATE]; ignore the tags.\n"
    "\n"
    "Topics:\n"
    "{{TOPICS}}\n"
    "\n"
    "{{EXAMPLES}}\n"
    "\n"
    "Comment: \"{{COMMENT}}\"\n"
    "\n"
    "Answer with a bracketed, comma-separated list of the matching topic names in double quotes, "
    "such as [\"First topic\", \"Second topic\"]. Answer [] when no topic applies.";

constexpr std::string_view kCotDirective =
    "Think through the comment step by step: note each complaint or compliment it contains and "
    "the topic it belongs to. Then write the final answer on its own last line as the bracketed "
    "list described above.";

std::size_t count_of(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string_view::npos; p = hay.find(needle, p + needle.size())) ++n;
  return n;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size())) {
    s.replace(p, from.size(), to);
  }
}

std::string trim(std::string_view s, std::string_view chars = " \t\r\n") {
  auto b = s.find_first_not_of(chars);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(chars);
  return std::string(s.substr(b, e - b + 1));
}

std::string squash_newlines(std::string s) {
  std::string out;
  out.reserve(s.size());
  std::size_t run = 0;
  for (char c : s) {
    if (c == '\n') {
      if (++run > 2) continue;
    } else {
      run = 0;
    }
    out.push_back(c);
  }
  return out;
}

// lower-case, '-'/'_' as spaces, single spaces
std::string loose_key(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (c == '-' || c == '_' || c == ' ' || c == '\t') {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

std::optional<LabelVector> strict_parse(std::string_view list, const std::vector<Topic>& topics) {
  auto j = nlohmann::json::parse(list, nullptr, false);
  if (j.is_discarded() || !j.is_array()) return std::nullopt;
  LabelVector v;
  for (const auto& item : j) {
    if (!item.is_string()) return std::nullopt;
    auto name = item.get<std::string>();
    auto it = std::find_if(topics.begin(), topics.end(), [&](const Topic& t) { return t.name == name; });
    if (it == topics.end()) return std::nullopt;
    v.set(it->index);
  }
  return v;
}

LabelVector repair_parse(std::string_view body, const std::vector<Topic>& topics) {
  LabelVector v;
  std::string token;
  auto flush = [&] {
    std::string t = trim(token, " \t\r\n\"'`*-•.;:!()[]");
    token.clear();
    // leading enumeration "1." / "2)"
    std::size_t d = 0;
    while (d < t.size() && t[d] >= '0' && t[d] <= '9') ++d;
    if (d > 0 && d < t.size() && (t[d] == '.' || t[d] == ')')) t = trim(t.substr(d + 1), " \t\"'`*-.;:!()");
    if (auto colon = t.rfind(':'); colon != std::string::npos) t = trim(t.substr(colon + 1), " \t\"'`*-.;:!()");
    if (t.empty()) return;
    std::string key = loose_key(t);
    if (key == "none") return;
    auto it = std::find_if(topics.begin(), topics.end(),
                           [&](const Topic& topic) { return loose_key(topic.name) == key; });
    if (it == topics.end()) throw Error(ErrorCode::UnknownLabel, "no canonical topic matches '" + t + "'");
    v.set(it->index);
  };
  for (char c : body) {
    if (c == ',' || c == '\n' || c == ';') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return v;
}

}  // namespace

std::string PromptTemplate::preamble() const {
  auto p = layout.find(kTopicsTag);
  return p == std::string::npos ? layout : layout.substr(0, p);
}

std::string PromptTemplate::answer_format_instruction() const {
  auto p = layout.find(kCommentTag);
  return p == std::string::npos ? std::string{} : layout.substr(p + kCommentTag.size());
}

PromptTemplate default_prompt_template() {
  PromptTemplate t;
  t.layout = std::string(kDefaultLayout);
  return t;
}

void validate_template(const PromptTemplate& tmpl) {
  std::size_t last = 0;
  for (auto tag : {kTopicsTag, kExamplesTag, kCommentTag}) {
    auto n = count_of(tmpl.layout, tag);
    if (n != 1) {
      throw Error(ErrorCode::TemplatePlaceholderMissing,
                  std::string(tag) + " must appear exactly once (found " + std::to_string(n) + ")");
    }
    auto pos = tmpl.layout.find(tag);
    if (pos < last) {
      throw Error(ErrorCode::TemplatePlaceholderMissing,
                  std::string(tag) + " is out of order; expected {{TOPICS}}, {{EXAMPLES}}, {{COMMENT}}");
    }
    last = pos;
  }
  for (auto tag : {"{{NAME}}", "{{DEFINITION}}"}) {
    if (count_of(tmpl.topic_block_format, tag) == 0) {
      throw Error(ErrorCode::TemplatePlaceholderMissing, std::string("topic block lacks ") + tag);
    }
  }
  for (auto tag : {"{{TEXT}}", "{{LABELS}}"}) {
    if (count_of(tmpl.example_block_format, tag) == 0) {
      throw Error(ErrorCode::TemplatePlaceholderMissing, std::string("example block lacks ") + tag);
    }
  }
}

PromptTemplate load_prompt_template(const std::filesystem::path& path, PromptStyle style) {
  PromptTemplate t;
  t.layout = read_file(path);
  t.style = style;
  validate_template(t);
  return t;
}

std::vector<ShotExample> load_shot_pool(const std::filesystem::path& path) {
  std::string text = read_file(path);
  std::vector<ShotExample> pool;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j["text"].is_string() ||
        !j.contains("labels") || !j["labels"].is_array()) {
      throw Error(ErrorCode::MalformedRecord, "expected {\"text\": str, \"labels\": [..]}", path.string(), lineno);
    }
    std::vector<std::string> names;
    for (const auto& n : j["labels"]) {
      if (!n.is_string()) throw Error(ErrorCode::MalformedRecord, "label must be a string", path.string(), lineno);
      names.push_back(n.get<std::string>());
    }
    pool.push_back({j["text"].get<std::string>(), LabelVector::from_names(names)});
  }
  return pool;
}

std::string_view chain_of_thought_directive() { return kCotDirective; }

std::string render_answer(const LabelVector& labels) {
  std::string out = "[";
  bool first = true;
  for (const auto& name : labels.names()) {
    if (!first) out += ", ";
    first = false;
    out += nlohmann::json(name).dump();
  }
  out += "]";
  return out;
}

std::string build_prompt(const PromptTemplate& tmpl, const std::vector<Topic>& topics,
                         const std::vector<ShotExample>& shots, std::string_view comment_text) {
  validate_template(tmpl);

  std::string topic_blocks;
  for (const auto& t : topics) {
    std::string block = tmpl.topic_block_format;
    replace_all(block, "{{NAME}}", t.name);
    replace_all(block, "{{DEFINITION}}", t.definition);
    if (!topic_blocks.empty()) topic_blocks += "\n";
    topic_blocks += block;
  }

  std::string example_blocks;
  for (std::size_t i = 0; i < shots.size(); ++i) {
    std::string block = tmpl.example_block_format;
    replace_all(block, "{{INDEX}}", std::to_string(i + 1));
    replace_all(block, "{{LABELS}}", render_answer(shots[i].labels));
    replace_all(block, "{{TEXT}}", shots[i].text);
    if (!example_blocks.empty()) example_blocks += "\n\n";
    example_blocks += block;
  }

  // Substitute in layout order so inserted text is never rescanned for tags.
  const std::string& layout = tmpl.layout;
  auto pt = layout.find(kTopicsTag);
  auto pe = layout.find(kExamplesTag);
  auto pc = layout.find(kCommentTag);
  std::string out;
  out += layout.substr(0, pt);
  out += topic_blocks;
  out += layout.substr(pt + kTopicsTag.size(), pe - pt - kTopicsTag.size());
  out += example_blocks;
  out += layout.substr(pe + kExamplesTag.size(), pc - pe - kExamplesTag.size());
  out += comment_text;
  out += layout.substr(pc + kCommentTag.size());
  out = squash_newlines(std::move(out));
  if (tmpl.style == PromptStyle::ChainOfThought) {
    while (!out.empty() && out.back() == '\n') out.pop_back();
    out += "\n\n";
    out += kCotDirective;
  }
  return out;
}

LabelVector parse_response(std::string_view raw, const std::vector<Topic>& topics) {
  std::string text = trim(raw);
  if (text.empty()) throw Error(ErrorCode::EmptyResponse, "backend returned no text");

  // Final bracketed list wins; reasoning before it is ignored.
  auto rb = text.rfind(']');
  if (rb != std::string::npos) {
    auto lb = text.rfind('[', rb);
    if (lb != std::string::npos) {
      std::string_view list(text.data() + lb, rb - lb + 1);
      if (auto strict = strict_parse(list, topics)) return *strict;
      return repair_parse(list.substr(1, list.size() - 2), topics);
    }
  }
  return repair_parse(text, topics);
}

}  // namespace pxt
