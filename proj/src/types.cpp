#include "cascadelab/types.hpp"

#include "cascadelab/interner.hpp"

namespace cascadelab {

std::string_view to_string(PostKind kind) {
  switch (kind) {
    case PostKind::original: return "original";
    case PostKind::repost: return "repost";
    case PostKind::reply: return "reply";
    case PostKind::quote: return "quote";
  }
  return "original";
}

std::optional<PostKind> parse_post_kind(std::string_view text) {
  if (text == "original") return PostKind::original;
  if (text == "repost") return PostKind::repost;
  if (text == "reply") return PostKind::reply;
  if (text == "quote") return PostKind::quote;
  return std::nullopt;
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::kh: return "KH";
    case Label::nh: return "NH";
    case Label::unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

std::uint32_t Interner::intern(std::string_view id) {
  if (auto it = index_.find(id); it != index_.end()) return it->second;
  const auto next = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(id);
  index_.emplace(names_.back(), next);
  return next;
}

std::optional<std::uint32_t> Interner::find(std::string_view id) const {
  if (auto it = index_.find(id); it != index_.end()) return it->second;
  return std::nullopt;
}

}  // namespace cascadelab
