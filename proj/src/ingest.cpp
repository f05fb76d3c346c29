#include <algorithm>
#include <fstream>
#include <istream>

#include <json.hpp>

#include "cascadelab/snapshot.hpp"

namespace cascadelab {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Absent keys and explicit nulls are both treated as "not given".
const json* field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

bool read_optional_string(const json& obj, const char* key, std::optional<std::string>& out) {
  const json* v = field(obj, key);
  if (v == nullptr) return true;
  if (!v->is_string()) return false;
  out = v->get<std::string>();
  return true;
}

bool read_optional_number(const json& obj, const char* key, std::optional<double>& out) {
  const json* v = field(obj, key);
  if (v == nullptr) return true;
  if (!v->is_number()) return false;
  out = v->get<double>();
  return true;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

std::optional<PostEvent> parse_post_record(std::string_view line) {
  json obj = json::parse(line.begin(), line.end(), nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded() || !obj.is_object()) return std::nullopt;

  PostEvent ev;
  const json* post_id = field(obj, "post_id");
  const json* user_id = field(obj, "user_id");
  const json* ts = field(obj, "ts");
  const json* kind = field(obj, "kind");
  if (post_id == nullptr || !post_id->is_string()) return std::nullopt;
  if (user_id == nullptr || !user_id->is_string()) return std::nullopt;
  if (ts == nullptr || !ts->is_number_integer()) return std::nullopt;
  if (kind == nullptr || !kind->is_string()) return std::nullopt;

  ev.post_id = post_id->get<std::string>();
  ev.user_id = user_id->get<std::string>();
  if (ev.post_id.empty() || ev.user_id.empty()) return std::nullopt;
  if (ts->is_number_unsigned()) {
    const auto raw = ts->get<std::uint64_t>();
    if (raw > static_cast<std::uint64_t>(std::numeric_limits<Timestamp>::max())) return std::nullopt;
    ev.ts = static_cast<Timestamp>(raw);
  } else {
    ev.ts = ts->get<Timestamp>();
  }
  if (ev.ts < 0) return std::nullopt;

  auto parsed_kind = parse_post_kind(kind->get<std::string>());
  if (!parsed_kind) return std::nullopt;
  ev.kind = *parsed_kind;

  if (!read_optional_string(obj, "parent_id", ev.parent_id)) return std::nullopt;
  if (ev.parent_id.has_value() != (ev.kind != PostKind::original)) return std::nullopt;
  if (ev.parent_id && ev.parent_id->empty()) return std::nullopt;

  if (const json* att = field(obj, "attachment")) {
    if (!att->is_boolean()) return std::nullopt;
    ev.attachment = att->get<bool>();
  }
  if (!read_optional_string(obj, "group_id", ev.group_id)) return std::nullopt;
  if (!read_optional_string(obj, "topic_id", ev.topic_id)) return std::nullopt;
  if (!read_optional_string(obj, "body", ev.body)) return std::nullopt;

  if (!read_optional_number(obj, "likes", ev.engagement.likes) ||
      !read_optional_number(obj, "dislikes", ev.engagement.dislikes) ||
      !read_optional_number(obj, "score", ev.engagement.score) ||
      !read_optional_number(obj, "reply_count", ev.engagement.replies) ||
      !read_optional_number(obj, "repost_count", ev.engagement.reposts)) {
    return std::nullopt;
  }
  return ev;
}

void PostIngester::add_line(std::string_view line) {
  const auto text = trim(line);
  if (text.empty()) return;
  ++store_.diagnostics.input_records;
  auto ev = parse_post_record(text);
  if (!ev) {
    ++store_.diagnostics.malformed_lines;
    return;
  }
  admit(std::move(*ev));
}

void PostIngester::add_event(PostEvent event) {
  ++store_.diagnostics.input_records;
  admit(std::move(event));
}

void PostIngester::admit(PostEvent event) {
  auto& diag = store_.diagnostics;
  if (!seen_.insert(event.post_id).second) {
    ++diag.duplicate_post_ids;
    return;
  }
  store_.posts.push_back(std::move(event));
  ++diag.accepted;
}

PostStore PostIngester::finish() && {
  for (const auto& ev : store_.posts) {
    if (ev.parent_id && !seen_.contains(*ev.parent_id)) ++store_.diagnostics.dangling_parents;
  }
  seen_.clear();
  return std::move(store_);
}

PostStore ingest_posts(std::istream& in) {
  if (!in) throw Error("posts source is not readable");
  PostIngester ingester;
  std::string line;
  while (std::getline(in, line)) ingester.add_line(line);
  if (in.bad()) throw Error("read error on posts source");
  return std::move(ingester).finish();
}

PostStore ingest_posts(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return ingest_posts(in);
}

void FollowIngester::add_line(std::string_view line) {
  const auto text = trim(line);
  if (text.empty()) return;
  if (first_line_) {
    first_line_ = false;
    if (text == "follower_id,followee_id") return;
  }
  const auto comma = text.find(',');
  if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos) {
    ++store_.diagnostics.input_records;
    ++store_.diagnostics.malformed_lines;
    return;
  }
  add_edge(unquote(trim(text.substr(0, comma))), unquote(trim(text.substr(comma + 1))));
}

void FollowIngester::add_edge(std::string_view follower, std::string_view followee) {
  auto& diag = store_.diagnostics;
  first_line_ = false;
  ++diag.input_records;
  if (follower.empty() || followee.empty()) {
    ++diag.malformed_lines;
  } else if (follower == followee) {
    ++diag.self_follows;
  } else {
    raw_.emplace_back(store_.users.intern(follower), store_.users.intern(followee));
  }
}

FollowStore FollowIngester::finish() && {
  std::sort(raw_.begin(), raw_.end());
  const auto last = std::unique(raw_.begin(), raw_.end());
  store_.diagnostics.duplicate_edges = static_cast<std::uint64_t>(raw_.end() - last);
  raw_.erase(last, raw_.end());
  store_.diagnostics.accepted = raw_.size();
  store_.edges = std::move(raw_);
  return std::move(store_);
}

FollowStore ingest_follows(std::istream& in) {
  if (!in) throw Error("follows source is not readable");
  FollowIngester ingester;
  std::string line;
  while (std::getline(in, line)) ingester.add_line(line);
  if (in.bad()) throw Error("read error on follows source");
  return std::move(ingester).finish();
}

FollowStore ingest_follows(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return ingest_follows(in);
}

FollowStore ingest_follows(std::span<const FollowEdge> edges) {
  FollowIngester ingester;
  for (const auto& e : edges) ingester.add_edge(e.follower, e.followee);
  return std::move(ingester).finish();
}

}  // namespace cascadelab
