#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pxt/topics.hpp"

namespace pxt {

enum class PromptStyle { Plain, ChainOfThought };

/// Prompt layout. `layout` holds the preamble, the {{TOPICS}}, {{EXAMPLES}}
/// and {{COMMENT}} placeholders (each exactly once, in that order) and the
/// answer-format instruction after them.
struct PromptTemplate {
  std::string layout;
  std::string topic_block_format = "- {{NAME}}: {{DEFINITION}}";
  std::string example_block_format = "Example {{INDEX}}:\nComment: \"{{TEXT}}\"\nTopics: {{LABELS}}";
  PromptStyle style = PromptStyle::Plain;

  /// Text before {{TOPICS}}.
  std::string preamble() const;
  /// Text after {{COMMENT}}.
  std::string answer_format_instruction() const;
};

/// The bundled default layout.
PromptTemplate default_prompt_template();

/// Reads a layout file. Throws TemplatePlaceholderMissing when a placeholder
/// is absent, repeated or out of order.
PromptTemplate load_prompt_template(const std::filesystem::path& path,
                                    PromptStyle style = PromptStyle::Plain);
void validate_template(const PromptTemplate& tmpl);

struct ShotExample {
  std::string text;  // already redacted
  LabelVector labels;
};

/// JSONL, one {"text": ..., "labels": ["Topic", ...]} per line.
std::vector<ShotExample> load_shot_pool(const std::filesystem::path& path);

/// Appended to chain-of-thought prompts.
std::string_view chain_of_thought_directive();

std::string build_prompt(const PromptTemplate& tmpl, const std::vector<Topic>& topics,
                         const std::vector<ShotExample>& shots, std::string_view comment_text);

/// Canonical answer list: ["Positive Feedback", "Noisy Environment"].
std::string render_answer(const LabelVector& labels);

/// Strict path: last bracketed JSON list of exact names. Repair path: split on
/// commas/newlines, strip quotes and punctuation, match case-insensitively.
/// Throws EmptyResponse or UnknownLabel.
LabelVector parse_response(std::string_view raw, const std::vector<Topic>& topics);

}  // namespace pxt
