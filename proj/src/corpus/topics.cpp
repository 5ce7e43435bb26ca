#include "pxt/topics.hpp"

#include "pxt/error.hpp"

namespace pxt {

namespace {

struct TopicEntry {
  std::string_view name;
  std::string_view definition;
};

constexpr std::array<TopicEntry, kTopicCount> kTopicTable{{
    {"Positive Feedback",
     "Comments expressing satisfaction or compliments about any aspect of the service, staff, or "
     "facility."},
    {"Noisy Environment",
     "Feedback about excessive noise levels within the hospital disrupting comfort or rest."},
    {"Missing Personal Belongings",
     "Complaints about lost or missing personal items during the stay."},
    {"Miscellaneous",
     "Any feedback that does not fit into the above categories but is still valuable for quality "
     "improvement."},
    {"Staff-related Issues",
     "Cases where the patient interaction with staff didn't meet their expectations or when "
     "communication was missing, unclear, insufficient, in a rude manner, or not helpful. Also, "
     "situations where staff did not respond timely or adequately to patient needs or inquiries "
     "because they either were busy (due to a bottleneck in the process) or they ignored the "
     "patient. Additionally, concerns or observations about staff members not maintaining proper "
     "hygiene (e.g., Staff didn't wear gloves). And feedback on staff failing to maintain patient "
     "confidentiality or privacy."},
    {"Long Waiting Time",
     "General complaints about long waits to receive attention from any staff member, or in the "
     "emergency room, or in hallways for rooms, procedures, or assistance, or for the discharge "
     "process, or to be assigned a bed, for hospital-provided transportation (this includes "
     "indoors and outdoors transportation), or to be admitted into the hospital, or for scheduled "
     "medical procedures, or for food."},
    {"Issues with Food Service",
     "Negative feedback regarding the taste, quality, or presentation of food. Also, complaints "
     "about food being served too hot or too cold. Additionally, comments where food was not "
     "provided or available when expected or indicating a lack of options or variety in the food "
     "offered. And situations where patients needed help ordering food but did not receive "
     "adequate assistance."},
    {"Room-related Issues",
     "Feedback related to the physical state of the room being inadequate. Also, remarks on the "
     "cleanliness of the room/hospital being unsatisfactory. Additionally, problems or conflicts "
     "arising from sharing a room with another patient. And feedback related to the room being "
     "too hot, too cold, or having inconsistent temperatures. Including also, issues related to "
     "the hospital bed, such as comfort or functionality. In addition to, situations where "
     "patients were informed that no rooms were available upon arrival or admission."},
    {"Medical-related Issues",
     "Feedback mentioning any complications or unexpected issues during medical procedures (e.g., "
     "reaction). Additionally, comments on inadequate pain relief or management. Also, feedback "
     "regarding incorrect diagnosis received during the stay. And observations or concerns "
     "regarding staff members lacking necessary professional medical skills."},
    {"Discharge-related Issues",
     "Concerns about delays or excessive waiting for the discharge process. Also, issues related "
     "to errors or confusion over discharge paperwork or any bad discharge experience."},
}};

}  // namespace

const std::vector<Topic>& canonical_topics() {
  static const std::vector<Topic> topics = [] {
    std::vector<Topic> out;
    out.reserve(kTopicCount);
    for (std::size_t i = 0; i < kTopicCount; ++i) {
      out.push_back(Topic{i, std::string(kTopicTable[i].name), std::string(kTopicTable[i].definition)});
    }
    return out;
  }();
  return topics;
}

const std::array<std::string_view, kTopicCount>& topic_names() {
  static const std::array<std::string_view, kTopicCount> names = [] {
    std::array<std::string_view, kTopicCount> out{};
    for (std::size_t i = 0; i < kTopicCount; ++i) out[i] = kTopicTable[i].name;
    return out;
  }();
  return names;
}

std::optional<std::size_t> topic_index(std::string_view exact_name) {
  for (std::size_t i = 0; i < kTopicCount; ++i) {
    if (kTopicTable[i].name == exact_name) return i;
  }
  return std::nullopt;
}

LabelVector LabelVector::from_indices(std::initializer_list<std::size_t> indices) {
  LabelVector v;
  for (auto i : indices) v.set(i);
  return v;
}

LabelVector LabelVector::from_names(const std::vector<std::string>& names) {
  LabelVector v;
  for (const auto& name : names) {
    auto idx = topic_index(name);
    if (!idx) throw Error(ErrorCode::UnknownLabel, "not a canonical topic: '" + name + "'");
    v.set(*idx);
  }
  return v;
}

std::vector<std::string> LabelVector::names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < kTopicCount; ++i) {
    if (bits_.test(i)) out.emplace_back(kTopicTable[i].name);
  }
  return out;
}

}  // namespace pxt
