#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pxt {

inline constexpr std::size_t kTopicCount = 10;

struct Topic {
  std::size_t index = 0;
  std::string name;
  std::string definition;
};

/// The ten feedback topics in their fixed canonical order. Every label
/// vector, prompt and report in the project is laid out in this order.
const std::vector<Topic>& canonical_topics();

const std::array<std::string_view, kTopicCount>& topic_names();

std::optional<std::size_t> topic_index(std::string_view exact_name);

/// Ordered topic assignment; bit i belongs to canonical topic i.
class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::bitset<kTopicCount> bits) : bits_(bits) {}

  static LabelVector from_mask(std::uint16_t mask) {
    return LabelVector(std::bitset<kTopicCount>(mask & ((1u << kTopicCount) - 1)));
  }
  static LabelVector from_indices(std::initializer_list<std::size_t> indices);

  /// Throws UnknownLabel when a name is not canonical (exact match).
  static LabelVector from_names(const std::vector<std::string>& names);

  bool test(std::size_t topic) const { return bits_.test(topic); }
  void set(std::size_t topic, bool value = true) { bits_.set(topic, value); }
  std::size_t count() const noexcept { return bits_.count(); }
  bool none() const noexcept { return bits_.none(); }
  std::uint16_t mask() const noexcept { return static_cast<std::uint16_t>(bits_.to_ulong()); }
  const std::bitset<kTopicCount>& bits() const noexcept { return bits_; }

  /// Names of the set topics, canonical order.
  std::vector<std::string> names() const;

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::bitset<kTopicCount> bits_;
};

}  // namespace pxt
