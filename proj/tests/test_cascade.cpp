#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <tuple>
#include <vector>

#include "cascadelab/cascade.hpp"
#include "oracles.hpp"

using namespace cascadelab;
using namespace cascadelab::testing;

namespace {

std::vector<std::uint32_t> parents_of(const CascadeTree& tree) {
  std::vector<std::uint32_t> p;
  for (const auto& n : tree.nodes) p.push_back(n.parent == kNoIndex ? 0 : n.parent);
  return p;
}

CascadeMetrics brute_metrics(const std::vector<std::uint32_t>& parents) {
  const std::size_t n = parents.size();
  std::vector<std::uint32_t> depth(n, 0);
  for (std::size_t i = 1; i < n; ++i) {
    // Walk to the root rather than trusting parent order.
    std::uint32_t d = 0;
    for (std::size_t x = i; x != 0; x = parents[x]) ++d;
    depth[i] = d;
  }
  CascadeMetrics m;
  m.size = n;
  m.depth = *std::max_element(depth.begin(), depth.end());
  std::map<std::uint32_t, std::uint64_t> per_level;
  double sum = 0.0;
  for (auto d : depth) {
    ++per_level[d];
    sum += d;
  }
  m.breadth = 0;
  for (const auto& [d, c] : per_level) m.breadth = std::max(m.breadth, c);
  m.avg_depth = sum / static_cast<double>(n);
  m.structural_virality = n <= 1 ? 0.0 : 2.0 * static_cast<double>(bfs_wiener(parents)) / (static_cast<double>(n) * (n - 1));
  return m;
}

}  // namespace

TEST_CASE("least recent influencer picks the earliest exposure") {
  // C follows both the root author A and B, who reposted later than A posted.
  auto snap = CorpusBuilder{}
                  .original("a", "A", 1)
                  .repost("b", "B", 2, "a")
                  .repost("c", "C", 3, "b")
                  .follow("B", "A")
                  .follow("C", "A")
                  .follow("C", "B")
                  .build();
  const auto tree = build_cascade(snap, *snap.find_post("a"));
  REQUIRE(tree.size() == 3);
  CHECK(tree.nodes[2].user == *snap.find_user("C"));
  CHECK(tree.nodes[2].parent == 0);
  CHECK(tree.nodes[2].depth == 1);
}

TEST_CASE("cascade edge cases") {
  auto snap = CorpusBuilder{}
                  .original("a", "A", 10)
                  .original("z", "Z", 11)
                  .repost("r1", "B", 12, "a")
                  .repost("r2", "D", 13, "a")
                  .repost("again", "B", 14, "a")
                  .repost("same_second", "E", 12, "a")
                  .reply("rep", "F", 15, "a")
                  .follow("B", "A")
                  .follow("E", "B")
                  .follow("F", "A")
                  .build();
  SUBCASE("zero reposts -> single node") {
    const auto tree = build_cascade(snap, *snap.find_post("z"));
    CHECK(tree.size() == 1);
    const auto m = compute_metrics(tree);
    CHECK(m.size == 1);
    CHECK(m.depth == 0);
    CHECK(m.breadth == 1);
    CHECK(m.avg_depth == 0.0);
    CHECK(m.removed == 0);
  }
  SUBCASE("unattached reposters are removed; repeats count once; exposure must strictly precede") {
    const auto tree = build_cascade(snap, *snap.find_post("a"));
    CHECK(tree.size() == 2);        // A and B; replies never extend cascades
    CHECK(tree.removed == 2);       // D follows nobody, E saw B only in the same second
    CHECK(tree.nodes[1].post == *snap.find_post("r1"));
  }
  SUBCASE("non-original roots are rejected") {
    CHECK_THROWS_AS(build_cascade(snap, *snap.find_post("r1")), Error);
    CHECK_THROWS_AS(build_cascade(snap, *snap.find_post("rep")), Error);
  }
}

TEST_CASE("metric examples") {
  CascadeTree chain;
  chain.nodes = {{0, 0, 0, kNoIndex, 0}, {1, 1, 10, 0, 1}, {2, 2, 20, 1, 2}};
  auto m = compute_metrics(chain);
  CHECK(m.size == 3);
  CHECK(m.depth == 2);
  CHECK(m.breadth == 1);
  CHECK(m.avg_depth == doctest::Approx(1.0));

  CascadeTree s;
  s.nodes = {{0, 0, 0, kNoIndex, 0}};
  for (std::uint32_t i = 1; i <= 4; ++i) s.nodes.push_back({i, i, i, 0, 1});
  m = compute_metrics(s);
  CHECK(m.size == 5);
  CHECK(m.depth == 1);
  CHECK(m.breadth == 4);
  CHECK(m.avg_depth == doctest::Approx(0.8));
}

TEST_CASE("structural virality closed forms") {
  CHECK(structural_virality(path(3)) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(structural_virality(star(3)) == doctest::Approx(1.5).epsilon(1e-15));
  for (std::size_t k = 1; k <= 10; ++k) {
    CAPTURE(k);
    CHECK(structural_virality(star(k)) == doctest::Approx(2.0 * k / (k + 1.0)).epsilon(1e-15));
  }
  CHECK(structural_virality(std::vector<std::uint32_t>{0}) == 0.0);
  CHECK(structural_virality(path(2)) == 1.0);
}

TEST_CASE("Wiener index DP equals the BFS oracle on random trees") {
  Rng rng(42);
  for (int round = 0; round < 1000; ++round) {
    const auto parents = random_parents(rng, 1 + rng.uniform(0, 199));
    REQUIRE(wiener_index(parents) == bfs_wiener(parents));
  }
  const std::vector<std::uint32_t> bad{0, 1};
  CHECK_THROWS_AS(wiener_index(bad), Error);
}

TEST_CASE("compute_metrics equals brute-force recomputation") {
  Rng rng(43);
  for (int round = 0; round < 500; ++round) {
    const auto parents = random_parents(rng, 1 + rng.uniform(0, 120));
    CascadeTree tree;
    for (std::size_t i = 0; i < parents.size(); ++i) {
      const auto parent = i == 0 ? kNoIndex : parents[i];
      const auto depth = i == 0 ? 0 : tree.nodes[parent].depth + 1;
      tree.nodes.push_back({static_cast<UserIndex>(i), static_cast<PostIndex>(i), static_cast<Timestamp>(i), parent, depth});
    }
    const auto got = compute_metrics(tree);
    const auto want = brute_metrics(parents);
    CHECK(got.size == want.size);
    CHECK(got.depth == want.depth);
    CHECK(got.breadth == want.breadth);
    CHECK(got.avg_depth == doctest::Approx(want.avg_depth).epsilon(1e-12));
    CHECK(got.structural_virality == doctest::Approx(want.structural_virality).epsilon(1e-12));
    CHECK(got.depth <= got.size - 1);
    CHECK(got.avg_depth <= got.depth);
    CHECK((got.structural_virality == 0.0) == (got.size <= 1));
  }
}

TEST_CASE("LRIF trees match the reference and satisfy tree validity") {
  Rng rng(2718);
  for (int round = 0; round < 1000; ++round) {
    const auto snap = random_cascade_snapshot(rng);
    const auto root = *snap.find_post("root");
    const auto tree = build_cascade(snap, root);
    const auto [ref, removed] = reference_lrif(snap, root);

    CHECK(tree.removed == removed);
    REQUIRE(tree.size() == ref.size());
    std::set<UserIndex> users;
    for (std::size_t i = 0; i < tree.size(); ++i) {
      const auto& n = tree.nodes[i];
      CHECK(users.insert(n.user).second);
      CHECK(n.user == ref[i].user);
      CHECK(n.post == ref[i].post);
      CHECK(n.depth == ref[i].depth);
      if (i == 0) {
        CHECK(n.parent == kNoIndex);
        continue;
      }
      REQUIRE(n.parent < i);
      const auto& parent = tree.nodes[n.parent];
      CHECK(parent.user == ref[i].parent_user);
      CHECK(parent.ts < n.ts);
      CHECK(n.depth == parent.depth + 1);
      CHECK(snap.follows(n.user, parent.user));
      // No followed in-tree user appeared strictly earlier than the chosen parent.
      for (std::size_t j = 0; j < i; ++j) {
        const auto& other = tree.nodes[j];
        if (other.ts < n.ts && snap.follows(n.user, other.user)) {
          CHECK(std::tie(parent.ts, parent.user) <= std::tie(other.ts, other.user));
        }
      }
    }
  }
}

TEST_CASE("temporal profile examples") {
  CascadeTree chain;
  chain.nodes = {{0, 0, 100, kNoIndex, 0}, {1, 1, 110, 0, 1}, {2, 2, 120, 1, 2}};
  const auto size = temporal_profile(chain, CascadeMetric::size);
  REQUIRE(size.size() == 3);
  CHECK(size[0].value == 1);
  CHECK(size[0].elapsed == 0);
  CHECK(size[1].value == 2);
  CHECK(size[1].elapsed == 10);
  CHECK(size[2].value == 3);
  CHECK(size[2].elapsed == 20);
  const auto depth = temporal_profile(chain, CascadeMetric::depth);
  REQUIRE(depth.size() == 3);
  CHECK(depth[0].value == 0);
  CHECK(depth[1].value == 1);
  CHECK(depth[1].elapsed == 10);
  CHECK(depth[2].value == 2);
  CHECK(depth[2].elapsed == 20);
}

TEST_CASE("temporal profile ends at the final metrics") {
  Rng rng(8);
  for (int round = 0; round < 300; ++round) {
    const auto snap = random_cascade_snapshot(rng);
    const auto tree = build_cascade(snap, *snap.find_post("root"));
    const auto m = compute_metrics(tree);
    for (CascadeMetric metric : kAllCascadeMetrics) {
      CAPTURE(to_string(metric));
      const auto series = temporal_profile(tree, metric);
      REQUIRE_FALSE(series.empty());
      CHECK(series.back().value == doctest::Approx(metric_value(m, metric)).epsilon(1e-9));
      for (std::size_t i = 1; i < series.size(); ++i) {
        CHECK(series[i].elapsed >= series[i - 1].elapsed);
        if (metric == CascadeMetric::size || metric == CascadeMetric::depth || metric == CascadeMetric::breadth) {
          CHECK(series[i].value == series[i - 1].value + 1);
        }
      }
    }
    // Running virality after each event matches recomputation on the prefix.
    const auto vir = temporal_profile(tree, CascadeMetric::virality);
    const auto parents = parents_of(tree);
    for (std::size_t k = 1; k < tree.size(); ++k) {
      std::vector<std::uint32_t> prefix(parents.begin(), parents.begin() + static_cast<std::ptrdiff_t>(k + 1));
      CHECK(vir[k].value == doctest::Approx(structural_virality(prefix)).epsilon(1e-9));
    }
  }
}

TEST_CASE("early adopter fractions") {
  CascadeTree t;
  t.nodes = {{0, 0, 0, kNoIndex, 0}, {1, 1, 1, 0, 1}, {2, 2, 2, 0, 1}, {3, 3, 3, 1, 2}};
  const std::vector<CascadeTree> trees{t};
  const std::vector<Label> all_kh(4, Label::kh);
  for (const auto& d : early_adopter_profile(trees, all_kh)) CHECK(d.kh_fraction == 1.0);

  const std::vector<Label> none(4, Label::unlabeled);
  const auto p = early_adopter_profile(trees, none);
  REQUIRE(p.size() == 2);
  for (const auto& d : p) {
    CHECK(d.kh_fraction == 0.0);
    CHECK(d.nh_fraction == 0.0);
  }

  const std::vector<Label> mixed{Label::kh, Label::kh, Label::nh, Label::unlabeled};
  const auto q = early_adopter_profile(trees, mixed);
  REQUIRE(q.size() == 2);
  CHECK(q[0].depth == 1);
  CHECK(q[0].reposters == 2);
  CHECK(q[0].kh_fraction == 0.5);
  CHECK(q[0].nh_fraction == 0.5);
  CHECK(q[1].depth == 2);
  CHECK(q[1].reposters == 1);
}

TEST_CASE("population filter keeps labeled originals in the subset") {
  CorpusBuilder b;
  auto post = [&](const std::string& id, const std::string& user, PostKind kind, bool att, bool group, bool topic) {
    PostEvent e;
    e.post_id = id;
    e.user_id = user;
    e.ts = static_cast<Timestamp>(id.size());
    e.kind = kind;
    if (kind != PostKind::original) e.parent_id = "k1";
    e.attachment = att;
    if (group) e.group_id = "g";
    if (topic) e.topic_id = "t";
    b.event(std::move(e));
  };
  post("k1", "K", PostKind::original, true, false, false);
  post("k2", "K", PostKind::original, false, true, false);
  post("k3", "K", PostKind::original, false, false, true);
  post("kreply", "K", PostKind::reply, true, true, true);
  post("kquote", "K", PostKind::quote, true, true, true);
  post("n1", "N", PostKind::original, true, true, true);
  const auto snap = b.build();
  std::vector<Label> labels(snap.num_users(), Label::unlabeled);
  labels[*snap.find_user("K")] = Label::kh;
  labels[*snap.find_user("N")] = Label::nh;

  auto ids = [&](PopulationFilter f) {
    std::vector<std::string> out;
    for (auto p : filter_population(snap, labels, f)) out.push_back(snap.post_id(p));
    std::sort(out.begin(), out.end());
    return out;
  };
  CHECK(ids({Label::kh, PostSubset::all}) == std::vector<std::string>{"k1", "k2", "k3"});
  CHECK(ids({Label::kh, PostSubset::attachments}) == std::vector<std::string>{"k1"});
  CHECK(ids({Label::kh, PostSubset::in_group}) == std::vector<std::string>{"k2"});
  CHECK(ids({Label::kh, PostSubset::in_topic}) == std::vector<std::string>{"k3"});
  CHECK(ids({Label::nh, PostSubset::all}) == std::vector<std::string>{"n1"});
}

TEST_CASE("parallel cascade construction is deterministic") {
  Rng rng(9);
  const auto snap = random_snapshot(rng, 40, 600, 500);
  std::vector<PostIndex> roots;
  for (PostIndex p = 0; p < snap.num_posts(); ++p) {
    if (snap.post(p).kind == PostKind::original) roots.push_back(p);
  }
  const auto a = build_cascades(snap, roots, 1);
  const auto b = build_cascades(snap, roots, 6);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].root_post == b[i].root_post);
    CHECK(a[i].removed == b[i].removed);
    REQUIRE(a[i].size() == b[i].size());
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      CHECK(a[i].nodes[j].user == b[i].nodes[j].user);
      CHECK(a[i].nodes[j].parent == b[i].nodes[j].parent);
    }
  }
}

TEST_CASE("metric and subset names round-trip") {
  for (CascadeMetric m : kAllCascadeMetrics) CHECK(parse_cascade_metric(to_string(m)) == m);
  for (PostSubset s : kAllSubsets) CHECK(parse_post_subset(to_string(s)) == s);
  CHECK_FALSE(parse_cascade_metric("bogus").has_value());
  CHECK_FALSE(parse_post_subset("bogus").has_value());
}
