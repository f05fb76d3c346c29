#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cascadelab {

// Dense indices assigned at ingestion. External ids live in the snapshot's
// interners; every analytic works on these.
using UserIndex = std::uint32_t;
using PostIndex = std::uint32_t;
using Timestamp = std::int64_t;

inline constexpr std::uint32_t kNoIndex = std::numeric_limits<std::uint32_t>::max();

enum class PostKind : std::uint8_t { original = 0, repost = 1, reply = 2, quote = 3 };

enum class Label : std::uint8_t { unlabeled = 0, kh = 1, nh = 2 };

std::string_view to_string(PostKind kind);
std::optional<PostKind> parse_post_kind(std::string_view text);

std::string_view to_string(Label label);

// Thrown for inputs that make an analysis impossible (unreadable source,
// empty corpus, bad configuration). Per-record problems go to diagnostics.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cascadelab
