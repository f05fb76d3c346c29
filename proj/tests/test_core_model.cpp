#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "cascadelab/snapshot.hpp"
#include "test_support.hpp"

using namespace cascadelab;
using cascadelab::testing::CorpusBuilder;
using cascadelab::testing::Rng;

namespace {

PostStore posts_from(const std::string& text) {
  std::istringstream in(text);
  return ingest_posts(in);
}

FollowStore follows_from(const std::string& text) {
  std::istringstream in(text);
  return ingest_follows(in);
}

}  // namespace

TEST_CASE("interner assigns dense ids in first-seen order") {
  Interner in;
  CHECK(in.intern("b") == 0);
  CHECK(in.intern("a") == 1);
  CHECK(in.intern("b") == 0);
  CHECK(in.size() == 2);
  CHECK(in.find("a") == 1u);
  CHECK_FALSE(in.find("zz").has_value());
  CHECK(in.name(1) == "a");
}

TEST_CASE("parse_post_record accepts the schema") {
  auto ev = parse_post_record(
      R"({"post_id":"p1","user_id":"u1","ts":100,"kind":"original","attachment":true,"group_id":"g","body":"hi","likes":3})");
  REQUIRE(ev.has_value());
  CHECK(ev->post_id == "p1");
  CHECK(ev->user_id == "u1");
  CHECK(ev->ts == 100);
  CHECK(ev->kind == PostKind::original);
  CHECK(ev->attachment);
  CHECK(ev->group_id == "g");
  CHECK_FALSE(ev->topic_id.has_value());
  CHECK(ev->body == "hi");
  CHECK(ev->engagement.likes == 3.0);
  CHECK_FALSE(ev->engagement.dislikes.has_value());

  auto rp = parse_post_record(R"({"post_id":"p2","user_id":"u2","ts":5,"kind":"repost","parent_id":"p1"})");
  REQUIRE(rp.has_value());
  CHECK(rp->parent_id == "p1");

  // Explicit nulls mean "absent".
  CHECK(parse_post_record(R"({"post_id":"p","user_id":"u","ts":1,"kind":"original","parent_id":null})"));
}

TEST_CASE("parse_post_record rejects schema violations") {
  const char* bad[] = {
      "not json",
      "[1,2]",
      R"({"user_id":"u","ts":1,"kind":"original"})",
      R"({"post_id":"p","ts":1,"kind":"original"})",
      R"({"post_id":"p","user_id":"u","kind":"original"})",
      R"({"post_id":"p","user_id":"u","ts":-1,"kind":"original"})",
      R"({"post_id":"p","user_id":"u","ts":1.5,"kind":"original"})",
      R"({"post_id":"p","user_id":"u","ts":"1","kind":"original"})",
      R"({"post_id":"p","user_id":"u","ts":1,"kind":"share"})",
      R"({"post_id":"p","user_id":"u","ts":1,"kind":"repost"})",
      R"({"post_id":"p","user_id":"u","ts":1,"kind":"original","parent_id":"q"})",
      R"({"post_id":"p","user_id":"u","ts":1,"kind":"original","attachment":"yes"})",
      R"({"post_id":"p","user_id":"u","ts":1,"kind":"original","likes":"many"})",
      R"({"post_id":"","user_id":"u","ts":1,"kind":"original"})",
      R"({"post_id":7,"user_id":"u","ts":1,"kind":"original"})",
  };
  for (const char* line : bad) {
    CAPTURE(line);
    CHECK_FALSE(parse_post_record(line).has_value());
  }
}

TEST_CASE("consistent input yields no diagnostics") {
  const auto store = posts_from(
      R"({"post_id":"a","user_id":"u1","ts":1,"kind":"original"})"
      "\n"
      R"({"post_id":"b","user_id":"u2","ts":2,"kind":"original"})"
      "\n"
      R"({"post_id":"c","user_id":"u3","ts":3,"kind":"original"})"
      "\n"
      R"({"post_id":"d","user_id":"u2","ts":4,"kind":"repost","parent_id":"a"})"
      "\n");
  CHECK(store.posts.size() == 4);
  CHECK(store.diagnostics == IngestDiagnostics{4, 4, 0, 0, 0, 0, 0, 0});
}

TEST_CASE("dangling parent is stored, counted, and excluded from cascades") {
  const auto store = posts_from(
      R"({"post_id":"a","user_id":"u1","ts":1,"kind":"original"})"
      "\n"
      R"({"post_id":"b","user_id":"u2","ts":2,"kind":"original"})"
      "\n"
      R"({"post_id":"c","user_id":"u3","ts":3,"kind":"original"})"
      "\n"
      R"({"post_id":"d","user_id":"u2","ts":4,"kind":"repost","parent_id":"zzz"})"
      "\n");
  CHECK(store.posts.size() == 4);
  CHECK(store.diagnostics.dangling_parents == 1);
  const auto snap = build_snapshot(store, FollowStore{});
  const auto d = *snap.find_post("d");
  CHECK(snap.post(d).parent == kNoIndex);
  CHECK(snap.post(d).source == kNoIndex);
  for (PostIndex p = 0; p < snap.num_posts(); ++p) CHECK(snap.reposts_of(p).empty());
}

TEST_CASE("malformed lines and duplicate ids are diagnosed; blank lines are not records") {
  const auto store = posts_from(
      R"({"post_id":"a","user_id":"u1","ts":1,"kind":"original"})"
      "\n\n   \n"
      "garbage\n"
      R"({"post_id":"a","user_id":"u9","ts":7,"kind":"original"})"
      "\n");
  CHECK(store.posts.size() == 1);
  CHECK(store.posts[0].user_id == "u1");  // first occurrence wins
  const auto& d = store.diagnostics;
  CHECK(d.input_records == 3);
  CHECK(d.malformed_lines == 1);
  CHECK(d.duplicate_post_ids == 1);
  CHECK(d.accepted + d.rejected() == d.input_records);
}

TEST_CASE("follows ingestion deduplicates and drops self-follows") {
  auto dup = follows_from("follower_id,followee_id\nA,B\nA,B\nB,A\n");
  CHECK(dup.edges.size() == 2);
  CHECK(dup.diagnostics.duplicate_edges == 1);

  auto self = follows_from("A,A\n");
  CHECK(self.edges.empty());
  CHECK(self.diagnostics.self_follows == 1);

  auto bad = follows_from("A,B,C\n,B\nA,B\n");
  CHECK(bad.edges.size() == 1);
  CHECK(bad.diagnostics.malformed_lines == 2);
  CHECK(bad.diagnostics.accepted + bad.diagnostics.rejected() == bad.diagnostics.input_records);
}

TEST_CASE("unreadable sources are fatal") {
  CHECK_THROWS_AS(ingest_posts(std::filesystem::path("/nonexistent/posts.jsonl")), Error);
  CHECK_THROWS_AS(ingest_follows(std::filesystem::path("/nonexistent/follows.csv")), Error);
}

TEST_CASE("empty post store is fatal") {
  CHECK_THROWS_AS(build_snapshot(PostStore{}, FollowStore{}), Error);
}

TEST_CASE("posts are ordered by time then input order") {
  auto snap = CorpusBuilder{}
                  .original("late", "u1", 50)
                  .original("tie1", "u2", 10)
                  .original("tie2", "u3", 10)
                  .original("early", "u1", 1)
                  .build();
  CHECK(snap.post_id(0) == "early");
  CHECK(snap.post_id(1) == "tie1");
  CHECK(snap.post_id(2) == "tie2");
  CHECK(snap.post_id(3) == "late");
  for (PostIndex p = 1; p < snap.num_posts(); ++p) CHECK(snap.post(p - 1).ts <= snap.post(p).ts);
}

TEST_CASE("repost chains resolve to the first non-repost ancestor") {
  auto snap = CorpusBuilder{}
                  .original("a", "A", 1)
                  .repost("r1", "B", 2, "a")
                  .repost("r2", "C", 3, "r1")
                  .reply("q", "D", 4, "a")
                  .repost("r3", "E", 5, "q")
                  .build();
  const auto a = *snap.find_post("a");
  const auto q = *snap.find_post("q");
  CHECK(snap.post(*snap.find_post("r1")).source == a);
  CHECK(snap.post(*snap.find_post("r2")).source == a);
  CHECK(snap.post(*snap.find_post("r2")).parent == *snap.find_post("r1"));
  CHECK(snap.post(q).source == q);
  CHECK(snap.post(*snap.find_post("r3")).source == q);
  const auto reposts = snap.reposts_of(a);
  REQUIRE(reposts.size() == 2);
  CHECK(snap.post_id(reposts[0]) == "r1");
  CHECK(snap.post_id(reposts[1]) == "r2");
}

TEST_CASE("cyclic repost chains are diagnosed and unresolved") {
  auto snap = CorpusBuilder{}
                  .original("a", "A", 1)
                  .repost("x", "B", 2, "y")
                  .repost("y", "C", 3, "x")
                  .build();
  CHECK(snap.diagnostics().cyclic_parents == 2);
  CHECK(snap.post(*snap.find_post("x")).source == kNoIndex);
  CHECK(snap.post(*snap.find_post("y")).source == kNoIndex);
}

TEST_CASE("activity span runs from the first post to the corpus end") {
  auto snap = CorpusBuilder{}
                  .original("a", "U", 100)
                  .original("b", "U", 500)
                  .original("c", "V", 964)
                  .follow("W", "U")
                  .build();
  const auto u = *snap.find_user("U");
  CHECK(snap.corpus_end() == 964);
  CHECK(snap.activity_span_seconds(u) == 864);
  CHECK(snap.first_post_ts(u) == 100);
  CHECK(snap.last_post_ts(u) == 500);

  // Present from follows alone, with zero posts.
  const auto w = snap.find_user("W");
  REQUIRE(w.has_value());
  CHECK(snap.post_count(*w) == 0);
  CHECK_FALSE(snap.activity_span_seconds(*w).has_value());
}

TEST_CASE("follow adjacency is stored both ways and sorted") {
  Rng rng(11);
  const auto snap = cascadelab::testing::random_snapshot(rng, 30, 60, 300);
  std::size_t out_total = 0;
  std::size_t in_total = 0;
  for (UserIndex u = 0; u < snap.num_users(); ++u) {
    const auto out = snap.followees(u);
    const auto in = snap.followers(u);
    CHECK(std::is_sorted(out.begin(), out.end()));
    CHECK(std::adjacent_find(out.begin(), out.end()) == out.end());
    CHECK(std::is_sorted(in.begin(), in.end()));
    for (UserIndex v : out) {
      CHECK(snap.follows(u, v));
      const auto back = snap.followers(v);
      CHECK(std::binary_search(back.begin(), back.end(), u));
    }
    out_total += out.size();
    in_total += in.size();
  }
  CHECK(out_total == snap.num_follow_edges());
  CHECK(in_total == snap.num_follow_edges());
}

TEST_CASE("post kinds and category counts survive ingestion") {
  // Scaled-down corpus with the category proportions of the original dataset.
  const std::size_t total = 21207;
  const std::size_t replies = 6601;
  const std::size_t quotes = 2085;
  const std::size_t reposts = 5850;
  CorpusBuilder b;
  b.original("root", "u0", 0);
  std::size_t made = 1;
  auto add = [&](PostKind kind, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i, ++made) {
      const std::string id = "p" + std::to_string(made);
      const std::string user = "u" + std::to_string(made % 97);
      switch (kind) {
        case PostKind::reply: b.reply(id, user, static_cast<Timestamp>(made), "root"); break;
        case PostKind::quote: b.quote(id, user, static_cast<Timestamp>(made), "root"); break;
        case PostKind::repost: b.repost(id, user, static_cast<Timestamp>(made), "root"); break;
        case PostKind::original: b.original(id, user, static_cast<Timestamp>(made)); break;
      }
    }
  };
  add(PostKind::reply, replies);
  add(PostKind::quote, quotes);
  add(PostKind::repost, reposts);
  add(PostKind::original, total - replies - quotes - reposts - 1);
  const auto snap = b.build();
  std::size_t counts[4] = {};
  for (const auto& p : snap.posts()) ++counts[static_cast<int>(p.kind)];
  CHECK(snap.num_posts() == total);
  CHECK(counts[static_cast<int>(PostKind::reply)] == replies);
  CHECK(counts[static_cast<int>(PostKind::quote)] == quotes);
  CHECK(counts[static_cast<int>(PostKind::repost)] == reposts);

  std::istringstream bytes(cascadelab::testing::serialized(snap));
  const auto copy = Snapshot::deserialize(bytes);
  std::size_t again[4] = {};
  for (const auto& p : copy.posts()) ++again[static_cast<int>(p.kind)];
  CHECK(std::equal(std::begin(counts), std::end(counts), std::begin(again)));
}

TEST_CASE("snapshot serialization round-trips and is idempotent") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    CAPTURE(seed);
    Rng rng(seed);
    const auto snap = cascadelab::testing::random_snapshot(rng, 1 + rng.uniform(0, 40), 1 + rng.uniform(0, 120),
                                                           rng.uniform(0, 200));
    const auto bytes = cascadelab::testing::serialized(snap);
    std::istringstream in(bytes);
    const auto copy = Snapshot::deserialize(in);
    CHECK(cascadelab::testing::serialized(copy) == bytes);
    CHECK(copy.num_users() == snap.num_users());
    CHECK(copy.num_posts() == snap.num_posts());
    CHECK(copy.diagnostics() == snap.diagnostics());
    for (PostIndex p = 0; p < snap.num_posts(); ++p) {
      CHECK(copy.post(p) == snap.post(p));
      CHECK(copy.post_id(p) == snap.post_id(p));
      CHECK(copy.engagement(p) == snap.engagement(p));
    }
    for (UserIndex u = 0; u < snap.num_users(); ++u) {
      CHECK(copy.user_id(u) == snap.user_id(u));
      CHECK(std::ranges::equal(copy.followees(u), snap.followees(u)));
      CHECK(std::ranges::equal(copy.followers(u), snap.followers(u)));
      CHECK(copy.post_count(u) == snap.post_count(u));
    }

    // Building twice from the same inputs gives identical bytes.
    Rng again(seed);
    const auto twin = cascadelab::testing::random_snapshot(again, 1 + again.uniform(0, 40),
                                                           1 + again.uniform(0, 120), again.uniform(0, 200));
    CHECK(cascadelab::testing::serialized(twin) == bytes);
  }
}

TEST_CASE("snapshot file save and load") {
  Rng rng(3);
  const auto snap = cascadelab::testing::random_snapshot(rng, 10, 40, 30);
  const auto path = std::filesystem::temp_directory_path() / "cascadelab_core_model_test.bin";
  snap.save(path);
  const auto loaded = Snapshot::load(path);
  CHECK(cascadelab::testing::serialized(loaded) == cascadelab::testing::serialized(snap));
  std::filesystem::remove(path);
}

TEST_CASE("corrupt snapshot bytes are rejected") {
  Rng rng(5);
  const auto bytes = cascadelab::testing::serialized(cascadelab::testing::random_snapshot(rng, 5, 10, 5));
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::istringstream a(bad_magic);
  CHECK_THROWS_AS(Snapshot::deserialize(a), Error);
  std::istringstream b(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(Snapshot::deserialize(b), Error);
}

TEST_CASE("conservation holds on random record streams") {
  Rng rng(99);
  for (int round = 0; round < 50; ++round) {
    PostIngester ing;
    const auto n = rng.uniform(0, 60);
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto id = "p" + std::to_string(rng.uniform(0, 30));
      switch (rng.uniform(0, 3)) {
        case 0: ing.add_line("{broken"); break;
        case 1: ing.add_line(R"({"post_id":")" + id + R"(","user_id":"u","ts":1,"kind":"original"})"); break;
        case 2:
          ing.add_line(R"({"post_id":")" + id + R"(","user_id":"u","ts":2,"kind":"repost","parent_id":"p)" +
                       std::to_string(rng.uniform(0, 40)) + "\"}");
          break;
        default: ing.add_line(""); break;
      }
    }
    const auto store = std::move(ing).finish();
    const auto& d = store.diagnostics;
    CHECK(d.accepted + d.rejected() == d.input_records);
    CHECK(d.accepted == store.posts.size());
  }
}
