#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cascadelab/interner.hpp"
#include "cascadelab/types.hpp"

namespace cascadelab {

// Platform engagement counters carried by a post. Any of them may be missing
// from the input, in which case the derived account features are absent too.
struct Engagement {
  std::optional<double> likes;
  std::optional<double> dislikes;
  std::optional<double> score;
  std::optional<double> replies;
  std::optional<double> reposts;

  bool operator==(const Engagement&) const = default;
};

/// One record of the posts JSONL stream, still keyed by external ids.
struct PostEvent {
  std::string post_id;
  std::string user_id;
  Timestamp ts = 0;
  PostKind kind = PostKind::original;
  std::optional<std::string> parent_id;
  bool attachment = false;
  std::optional<std::string> group_id;
  std::optional<std::string> topic_id;
  std::optional<std::string> body;
  Engagement engagement;
};

struct FollowEdge {
  std::string follower;
  std::string followee;
};

struct IngestDiagnostics {
  std::uint64_t input_records = 0;
  std::uint64_t accepted = 0;
  std::uint64_t malformed_lines = 0;
  std::uint64_t duplicate_post_ids = 0;
  // Accepted posts whose parent id never appears. Kept in the store but
  // excluded from cascade and repost-network analysis.
  std::uint64_t dangling_parents = 0;
  // Accepted reposts whose parent chain loops back on itself.
  std::uint64_t cyclic_parents = 0;
  std::uint64_t duplicate_edges = 0;
  std::uint64_t self_follows = 0;

  std::uint64_t rejected() const {
    return malformed_lines + duplicate_post_ids + duplicate_edges + self_follows;
  }
  bool operator==(const IngestDiagnostics&) const = default;
};

struct PostStore {
  std::vector<PostEvent> posts;  // input order, first occurrence of each id
  IngestDiagnostics diagnostics;
};

struct FollowStore {
  Interner users;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // (follower, followee), sorted
  IngestDiagnostics diagnostics;
};

/// Parses one JSONL record. Returns nullopt when the record violates the schema.
std::optional<PostEvent> parse_post_record(std::string_view line);

/// Line-at-a-time posts ingestion; blank lines are not records.
class PostIngester {
 public:
  void add_line(std::string_view line);
  void add_event(PostEvent event);
  PostStore finish() &&;

 private:
  void admit(PostEvent event);

  PostStore store_;
  std::unordered_set<std::string> seen_;
};

/// Line-at-a-time follows ingestion. A leading `follower_id,followee_id`
/// header is skipped.
class FollowIngester {
 public:
  void add_line(std::string_view line);
  void add_edge(std::string_view follower, std::string_view followee);
  FollowStore finish() &&;

 private:
  FollowStore store_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> raw_;
  bool first_line_ = true;
};

PostStore ingest_posts(std::istream& in);
PostStore ingest_posts(const std::filesystem::path& path);

FollowStore ingest_follows(std::istream& in);
FollowStore ingest_follows(const std::filesystem::path& path);
FollowStore ingest_follows(std::span<const FollowEdge> edges);

/// Per-post data as seen by analytics.
struct Post {
  UserIndex author = kNoIndex;
  Timestamp ts = 0;
  PostKind kind = PostKind::original;
  PostIndex parent = kNoIndex;  // direct parent, kNoIndex if none or dangling
  // For reposts: the first non-repost ancestor (the content being shared),
  // kNoIndex when the chain does not resolve. For other kinds: the post itself.
  PostIndex source = kNoIndex;
  bool attachment = false;
  bool in_group = false;
  bool in_topic = false;

  bool operator==(const Post&) const = default;
};

/// Immutable, validated view of posts, follows, and per-user activity.
///
/// Posts are ordered by (timestamp, input order); a post's dense index is its
/// position in that order. Follow adjacency is stored twice (out and in) in
/// CSR form with neighbor lists sorted ascending.
class Snapshot {
 public:
  std::size_t num_users() const { return users_.size(); }
  std::size_t num_posts() const { return posts_.size(); }
  std::size_t num_follow_edges() const { return out_targets_.size(); }

  const Post& post(PostIndex p) const { return posts_[p]; }
  std::span<const Post> posts() const { return posts_; }

  const std::string& post_id(PostIndex p) const { return post_ids_.name(p); }
  const std::string& user_id(UserIndex u) const { return users_.name(u); }
  std::optional<PostIndex> find_post(std::string_view id) const { return post_ids_.find(id); }
  std::optional<UserIndex> find_user(std::string_view id) const { return users_.find(id); }

  std::optional<std::string_view> body(PostIndex p) const;
  std::optional<std::string_view> group_id(PostIndex p) const;
  std::optional<std::string_view> topic_id(PostIndex p) const;
  const Engagement& engagement(PostIndex p) const { return engagement_[p]; }

  /// Users that `u` follows.
  std::span<const UserIndex> followees(UserIndex u) const;
  /// Users that follow `u`.
  std::span<const UserIndex> followers(UserIndex u) const;
  bool follows(UserIndex follower, UserIndex followee) const;

  std::uint32_t post_count(UserIndex u) const { return post_count_[u]; }
  std::uint32_t original_count(UserIndex u) const { return original_count_[u]; }
  std::optional<Timestamp> first_post_ts(UserIndex u) const;
  std::optional<Timestamp> last_post_ts(UserIndex u) const;
  /// Seconds from the user's first post to the corpus end; absent for post-less users.
  std::optional<Timestamp> activity_span_seconds(UserIndex u) const;
  Timestamp corpus_end() const { return corpus_end_; }

  /// Reposts whose source is `root`, in snapshot (time) order.
  std::span<const PostIndex> reposts_of(PostIndex root) const;

  const IngestDiagnostics& diagnostics() const { return diagnostics_; }

  void serialize(std::ostream& out) const;
  static Snapshot deserialize(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static Snapshot load(const std::filesystem::path& path);

  friend Snapshot build_snapshot(const PostStore& posts, const FollowStore& follows);

 private:
  Interner users_;
  Interner post_ids_;
  std::vector<Post> posts_;
  std::vector<std::string> bodies_;
  std::vector<std::uint8_t> has_body_;
  std::vector<std::string> groups_;
  std::vector<std::string> topics_;
  std::vector<Engagement> engagement_;

  std::vector<std::uint64_t> out_offsets_;
  std::vector<UserIndex> out_targets_;
  std::vector<std::uint64_t> in_offsets_;
  std::vector<UserIndex> in_sources_;

  std::vector<std::uint32_t> post_count_;
  std::vector<std::uint32_t> original_count_;
  std::vector<Timestamp> first_ts_;
  std::vector<Timestamp> last_ts_;
  Timestamp corpus_end_ = 0;

  std::vector<std::uint64_t> repost_offsets_;
  std::vector<PostIndex> repost_list_;

  IngestDiagnostics diagnostics_;
};

/// Builds the snapshot. Throws Error if the post store is empty.
Snapshot build_snapshot(const PostStore& posts, const FollowStore& follows);

}  // namespace cascadelab
