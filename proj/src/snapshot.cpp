#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "cascadelab/snapshot.hpp"

namespace cascadelab {
namespace {

void build_csr(std::size_t n, const std::vector<std::pair<UserIndex, UserIndex>>& edges,
               std::vector<std::uint64_t>& offsets, std::vector<UserIndex>& targets) {
  offsets.assign(n + 1, 0);
  for (const auto& [from, to] : edges) ++offsets[from + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  targets.assign(edges.size(), 0);
  std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& [from, to] : edges) targets[cursor[from]++] = to;
  for (std::size_t u = 0; u < n; ++u) {
    std::sort(targets.begin() + static_cast<std::ptrdiff_t>(offsets[u]),
              targets.begin() + static_cast<std::ptrdiff_t>(offsets[u + 1]));
  }
}

// Binary cache format: magic, version, then every field in declaration order,
// little-endian, length-prefixed sequences. Field-by-field so padding never
// leaks into the bytes.
constexpr std::array<char, 8> kMagic = {'C', 'L', 'S', 'N', 'A', 'P', '\0', '\x01'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "snapshot cache assumes little-endian");

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <typename T>
  void pod(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void opt(const std::optional<double>& v) {
    pod<std::uint8_t>(v.has_value());
    pod<double>(v.value_or(0.0));
  }
  template <typename T>
  void vec(const std::vector<T>& v) {
    pod<std::uint64_t>(v.size());
    if constexpr (std::is_arithmetic_v<T>) {
      out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
    } else {
      for (const auto& s : v) str(s);
    }
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  template <typename T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) throw Error("truncated snapshot cache");
    return v;
  }
  std::uint64_t length() {
    const auto n = pod<std::uint64_t>();
    if (n > (std::uint64_t{1} << 40)) throw Error("corrupt snapshot cache");
    return n;
  }
  std::string str() {
    std::string s(length(), '\0');
    in_.read(s.data(), static_cast<std::streamsize>(s.size()));
    if (!in_) throw Error("truncated snapshot cache");
    return s;
  }
  std::optional<double> opt() {
    const bool has = pod<std::uint8_t>() != 0;
    const double v = pod<double>();
    return has ? std::optional<double>(v) : std::nullopt;
  }
  template <typename T>
  std::vector<T> vec() {
    std::vector<T> v(length());
    if constexpr (std::is_arithmetic_v<T>) {
      in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
      if (!in_) throw Error("truncated snapshot cache");
    } else {
      for (auto& s : v) s = str();
    }
    return v;
  }

 private:
  std::istream& in_;
};

}  // namespace

std::optional<std::string_view> Snapshot::body(PostIndex p) const {
  if (!has_body_[p]) return std::nullopt;
  return std::string_view(bodies_[p]);
}

std::optional<std::string_view> Snapshot::group_id(PostIndex p) const {
  if (!posts_[p].in_group) return std::nullopt;
  return std::string_view(groups_[p]);
}

std::optional<std::string_view> Snapshot::topic_id(PostIndex p) const {
  if (!posts_[p].in_topic) return std::nullopt;
  return std::string_view(topics_[p]);
}

std::span<const UserIndex> Snapshot::followees(UserIndex u) const {
  return std::span<const UserIndex>(out_targets_).subspan(out_offsets_[u], out_offsets_[u + 1] - out_offsets_[u]);
}

std::span<const UserIndex> Snapshot::followers(UserIndex u) const {
  return std::span<const UserIndex>(in_sources_).subspan(in_offsets_[u], in_offsets_[u + 1] - in_offsets_[u]);
}

bool Snapshot::follows(UserIndex follower, UserIndex followee) const {
  const auto list = followees(follower);
  return std::binary_search(list.begin(), list.end(), followee);
}

std::optional<Timestamp> Snapshot::first_post_ts(UserIndex u) const {
  if (post_count_[u] == 0) return std::nullopt;
  return first_ts_[u];
}

std::optional<Timestamp> Snapshot::last_post_ts(UserIndex u) const {
  if (post_count_[u] == 0) return std::nullopt;
  return last_ts_[u];
}

std::optional<Timestamp> Snapshot::activity_span_seconds(UserIndex u) const {
  if (post_count_[u] == 0) return std::nullopt;
  return corpus_end_ - first_ts_[u];
}

std::span<const PostIndex> Snapshot::reposts_of(PostIndex root) const {
  return std::span<const PostIndex>(repost_list_)
      .subspan(repost_offsets_[root], repost_offsets_[root + 1] - repost_offsets_[root]);
}

Snapshot build_snapshot(const PostStore& store, const FollowStore& follows) {
  if (store.posts.empty()) throw Error("empty post store: nothing to analyze");
  if (store.posts.size() >= kNoIndex) throw Error("too many posts for 32-bit indices");

  Snapshot s;
  const auto& events = store.posts;
  const std::size_t n_posts = events.size();

  std::vector<std::size_t> order(n_posts);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return events[a].ts < events[b].ts; });

  for (const auto i : order) s.post_ids_.intern(events[i].post_id);
  for (const auto i : order) s.users_.intern(events[i].user_id);
  for (const auto& name : follows.users.names()) s.users_.intern(name);
  if (s.users_.size() >= kNoIndex) throw Error("too many users for 32-bit indices");

  s.posts_.resize(n_posts);
  s.bodies_.resize(n_posts);
  s.has_body_.assign(n_posts, 0);
  s.groups_.resize(n_posts);
  s.topics_.resize(n_posts);
  s.engagement_.resize(n_posts);
  for (std::size_t p = 0; p < n_posts; ++p) {
    const auto& ev = events[order[p]];
    Post& post = s.posts_[p];
    post.author = *s.users_.find(ev.user_id);
    post.ts = ev.ts;
    post.kind = ev.kind;
    post.attachment = ev.attachment;
    if (ev.parent_id) post.parent = s.post_ids_.find(*ev.parent_id).value_or(kNoIndex);
    if (ev.body) {
      s.bodies_[p] = *ev.body;
      s.has_body_[p] = 1;
    }
    if (ev.group_id) {
      post.in_group = true;
      s.groups_[p] = *ev.group_id;
    }
    if (ev.topic_id) {
      post.in_topic = true;
      s.topics_[p] = *ev.topic_id;
    }
    s.engagement_[p] = ev.engagement;
  }

  s.diagnostics_ = store.diagnostics;
  s.diagnostics_.input_records += follows.diagnostics.input_records;
  s.diagnostics_.accepted += follows.diagnostics.accepted;
  s.diagnostics_.malformed_lines += follows.diagnostics.malformed_lines;
  s.diagnostics_.duplicate_edges += follows.diagnostics.duplicate_edges;
  s.diagnostics_.self_follows += follows.diagnostics.self_follows;

  // Resolve each repost to the content it ultimately shares.
  enum : std::uint8_t { kUnvisited, kActive, kDone };
  std::vector<std::uint8_t> state(n_posts, kUnvisited);
  std::vector<PostIndex> chain;
  for (PostIndex p = 0; p < n_posts; ++p) {
    if (state[p] == kDone) continue;
    chain.clear();
    PostIndex cur = p;
    PostIndex resolved = kNoIndex;
    bool cyclic = false;
    while (true) {
      if (state[cur] == kDone) {
        resolved = s.posts_[cur].source;
        break;
      }
      if (state[cur] == kActive) {
        cyclic = true;
        break;
      }
      const Post& post = s.posts_[cur];
      if (post.kind != PostKind::repost) {
        state[cur] = kDone;
        s.posts_[cur].source = cur;
        resolved = cur;
        break;
      }
      state[cur] = kActive;
      chain.push_back(cur);
      if (post.parent == kNoIndex) break;  // dangling, already diagnosed
      cur = post.parent;
    }
    if (cyclic) s.diagnostics_.cyclic_parents += chain.size();
    for (const auto c : chain) {
      s.posts_[c].source = cyclic ? kNoIndex : resolved;
      state[c] = kDone;
    }
  }

  const std::size_t n_users = s.users_.size();
  s.post_count_.assign(n_users, 0);
  s.original_count_.assign(n_users, 0);
  s.first_ts_.assign(n_users, 0);
  s.last_ts_.assign(n_users, 0);
  for (const auto& post : s.posts_) {
    const auto u = post.author;
    if (s.post_count_[u] == 0) s.first_ts_[u] = post.ts;
    s.last_ts_[u] = post.ts;
    ++s.post_count_[u];
    if (post.kind == PostKind::original) ++s.original_count_[u];
    s.corpus_end_ = std::max(s.corpus_end_, post.ts);
  }

  std::vector<std::pair<UserIndex, UserIndex>> out_edges;
  std::vector<std::pair<UserIndex, UserIndex>> in_edges;
  out_edges.reserve(follows.edges.size());
  in_edges.reserve(follows.edges.size());
  for (const auto& [a, b] : follows.edges) {
    const auto u = *s.users_.find(follows.users.name(a));
    const auto v = *s.users_.find(follows.users.name(b));
    out_edges.emplace_back(u, v);
    in_edges.emplace_back(v, u);
  }
  build_csr(n_users, out_edges, s.out_offsets_, s.out_targets_);
  build_csr(n_users, in_edges, s.in_offsets_, s.in_sources_);

  s.repost_offsets_.assign(n_posts + 1, 0);
  for (const auto& post : s.posts_) {
    if (post.kind == PostKind::repost && post.source != kNoIndex) ++s.repost_offsets_[post.source + 1];
  }
  std::partial_sum(s.repost_offsets_.begin(), s.repost_offsets_.end(), s.repost_offsets_.begin());
  s.repost_list_.assign(s.repost_offsets_.back(), 0);
  std::vector<std::uint64_t> cursor(s.repost_offsets_.begin(), s.repost_offsets_.end() - 1);
  for (PostIndex p = 0; p < n_posts; ++p) {
    const auto& post = s.posts_[p];
    if (post.kind == PostKind::repost && post.source != kNoIndex) s.repost_list_[cursor[post.source]++] = p;
  }
  return s;
}

void Snapshot::serialize(std::ostream& out) const {
  Writer w(out);
  out.write(kMagic.data(), kMagic.size());
  w.pod(kVersion);
  w.vec(users_.names());
  w.vec(post_ids_.names());
  w.pod<std::uint64_t>(posts_.size());
  for (std::size_t p = 0; p < posts_.size(); ++p) {
    const auto& post = posts_[p];
    w.pod(post.author);
    w.pod(post.ts);
    w.pod(static_cast<std::uint8_t>(post.kind));
    w.pod(post.parent);
    w.pod(post.source);
    w.pod<std::uint8_t>(post.attachment);
    w.pod<std::uint8_t>(post.in_group);
    w.pod<std::uint8_t>(post.in_topic);
    const auto& e = engagement_[p];
    w.opt(e.likes);
    w.opt(e.dislikes);
    w.opt(e.score);
    w.opt(e.replies);
    w.opt(e.reposts);
  }
  w.vec(bodies_);
  w.vec(has_body_);
  w.vec(groups_);
  w.vec(topics_);
  w.vec(out_offsets_);
  w.vec(out_targets_);
  w.vec(in_offsets_);
  w.vec(in_sources_);
  w.vec(post_count_);
  w.vec(original_count_);
  w.vec(first_ts_);
  w.vec(last_ts_);
  w.pod(corpus_end_);
  w.vec(repost_offsets_);
  w.vec(repost_list_);
  const auto& d = diagnostics_;
  for (auto v : {d.input_records, d.accepted, d.malformed_lines, d.duplicate_post_ids, d.dangling_parents,
                 d.cyclic_parents, d.duplicate_edges, d.self_follows}) {
    w.pod(v);
  }
  if (!out) throw Error("failed writing snapshot cache");
}

Snapshot Snapshot::deserialize(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error("not a snapshot cache (bad magic)");
  Reader r(in);
  if (r.pod<std::uint32_t>() != kVersion) throw Error("unsupported snapshot cache version");

  Snapshot s;
  for (const auto& name : r.vec<std::string>()) s.users_.intern(name);
  for (const auto& name : r.vec<std::string>()) s.post_ids_.intern(name);
  const auto n_posts = r.length();
  s.posts_.resize(n_posts);
  s.engagement_.resize(n_posts);
  for (std::size_t p = 0; p < n_posts; ++p) {
    auto& post = s.posts_[p];
    post.author = r.pod<UserIndex>();
    post.ts = r.pod<Timestamp>();
    const auto kind = r.pod<std::uint8_t>();
    if (kind > 3) throw Error("corrupt snapshot cache");
    post.kind = static_cast<PostKind>(kind);
    post.parent = r.pod<PostIndex>();
    post.source = r.pod<PostIndex>();
    post.attachment = r.pod<std::uint8_t>() != 0;
    post.in_group = r.pod<std::uint8_t>() != 0;
    post.in_topic = r.pod<std::uint8_t>() != 0;
    auto& e = s.engagement_[p];
    e.likes = r.opt();
    e.dislikes = r.opt();
    e.score = r.opt();
    e.replies = r.opt();
    e.reposts = r.opt();
  }
  s.bodies_ = r.vec<std::string>();
  s.has_body_ = r.vec<std::uint8_t>();
  s.groups_ = r.vec<std::string>();
  s.topics_ = r.vec<std::string>();
  s.out_offsets_ = r.vec<std::uint64_t>();
  s.out_targets_ = r.vec<UserIndex>();
  s.in_offsets_ = r.vec<std::uint64_t>();
  s.in_sources_ = r.vec<UserIndex>();
  s.post_count_ = r.vec<std::uint32_t>();
  s.original_count_ = r.vec<std::uint32_t>();
  s.first_ts_ = r.vec<Timestamp>();
  s.last_ts_ = r.vec<Timestamp>();
  s.corpus_end_ = r.pod<Timestamp>();
  s.repost_offsets_ = r.vec<std::uint64_t>();
  s.repost_list_ = r.vec<PostIndex>();
  auto& d = s.diagnostics_;
  for (auto* v : {&d.input_records, &d.accepted, &d.malformed_lines, &d.duplicate_post_ids, &d.dangling_parents,
                  &d.cyclic_parents, &d.duplicate_edges, &d.self_follows}) {
    *v = r.pod<std::uint64_t>();
  }

  const auto n_users = s.users_.size();
  if (s.bodies_.size() != n_posts || s.has_body_.size() != n_posts || s.groups_.size() != n_posts ||
      s.topics_.size() != n_posts || s.post_ids_.size() != n_posts || s.out_offsets_.size() != n_users + 1 ||
      s.in_offsets_.size() != n_users + 1 || s.post_count_.size() != n_users ||
      s.repost_offsets_.size() != n_posts + 1 || s.out_offsets_.back() != s.out_targets_.size() ||
      s.in_offsets_.back() != s.in_sources_.size() || s.repost_offsets_.back() != s.repost_list_.size()) {
    throw Error("corrupt snapshot cache (inconsistent sizes)");
  }
  return s;
}

void Snapshot::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  serialize(out);
}

Snapshot Snapshot::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return deserialize(in);
}

}  // namespace cascadelab
