// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cascadelab/pipeline.hpp"
#include "oracles.hpp"

using namespace cascadelab;
using namespace cascadelab::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failed checks so each criterion reports what went wrong.
class Verdict {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ = failed_ || !ok;
  }
  void note(const std::string& text) { notes_.push_back(text); }
  bool passed() const { return !failed_; }
  std::string detail() const {
    std::string out;
    for (const auto& n : notes_) out += (out.empty() ? "" : "; ") + n;
    for (const auto& f : failures_) out += (out.empty() ? "" : "; ") + ("failed: " + f);
    return out;
  }

 private:
  bool failed_ = false;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void degroot_toy(Verdict& v) {
  const auto snap = toy_snapshot();
  const auto A = *snap.find_user("A");
  const auto B = *snap.find_user("B");
  const auto C = *snap.find_user("C");
  const auto t0 = Clock::now();
  const auto belief = build_belief_network(build_repost_network(snap));
  const std::vector<UserIndex> seeds{A};
  DegrootOptions one;
  one.iterations = 1;
  const auto state = run_degroot(belief, seeds, one);
  const double elapsed = seconds_since(t0);
  v.check(std::fabs(state.belief[A] - 1.0) <= 1e-9, "belief(A) = " + fmt(state.belief[A]));
  v.check(std::fabs(state.belief[B] - 0.75) <= 1e-9, "belief(B) = " + fmt(state.belief[B]));
  v.check(std::fabs(state.belief[C] - 1.0 / 3.0) <= 1e-9, "belief(C) = " + fmt(state.belief[C]));
  v.check(elapsed < 1e-3, "runtime " + fmt(elapsed * 1e3) + " ms");
  v.note("beliefs " + fmt(state.belief[A]) + ", " + fmt(state.belief[B]) + ", " + fmt(state.belief[C]) + " in " +
         fmt(elapsed * 1e6, 3) + " us");
}

void degroot_oracle(Verdict& v) {
  Rng rng(31337);
  double worst_belief = 0.0;
  double worst_row = 0.0;
  for (int round = 0; round < 200; ++round) {
    const auto g = random_network(rng, 50);
    const auto belief = build_belief_network(RepostNetwork::from_counts(g.n, g.arcs, g.self));
    const auto seeds = random_seeds(rng, g.n);
    const auto expected = oracle_beliefs(dense_matrix(g), seeds, 5);
    const auto got = run_degroot(belief, seeds).belief;
    for (std::size_t u = 0; u < g.n; ++u) worst_belief = std::max(worst_belief, std::fabs(got[u] - expected[u]));
    for (UserIndex u = 0; u < g.n; ++u) {
      double sum = 0.0;
      for (const auto& e : belief.row(u)) sum += e.weight;
      worst_row = std::max(worst_row, std::fabs(sum - 1.0));
    }
  }
  v.check(worst_belief <= 1e-9, "max belief error " + fmt(worst_belief));
  v.check(worst_row <= 1e-9, "max row-sum error " + fmt(worst_row));
  v.note("200 networks, max |b - M^5 b0| = " + fmt(worst_belief, 3) + ", max row error = " + fmt(worst_row, 3));
}

void virality(Verdict& v) {
  Rng rng(42);
  int mismatches = 0;
  for (int round = 0; round < 1000; ++round) {
    const auto parents = random_parents(rng, 1 + rng.uniform(0, 199));
    mismatches += wiener_index(parents) != bfs_wiener(parents);
  }
  v.check(mismatches == 0, std::to_string(mismatches) + " Wiener mismatches");
  v.check(std::fabs(structural_virality(path(3)) - 4.0 / 3.0) <= 1e-12, "path-3");
  for (std::size_t k = 1; k <= 10; ++k) {
    v.check(std::fabs(structural_virality(star(k)) - 2.0 * k / (k + 1.0)) <= 1e-12, "star-" + std::to_string(k));
  }
  v.check(structural_virality(std::vector<std::uint32_t>{0}) == 0.0, "single node");
  v.note("1000 random trees exact, closed forms hold");
}

void lrif(Verdict& v) {
  auto fig = CorpusBuilder{}
                 .original("a", "A", 1)
                 .repost("b", "B", 2, "a")
                 .repost("c", "C", 3, "b")
                 .follow("B", "A")
                 .follow("C", "A")
                 .follow("C", "B")
                 .build();
  const auto t = build_cascade(fig, *fig.find_post("a"));
  v.check(t.size() == 3 && t.nodes[2].user == *fig.find_user("C") && t.nodes[2].parent == 0, "C attaches to A");

  Rng rng(2718);
  int bad = 0;
  std::size_t nodes = 0;
  for (int round = 0; round < 1000; ++round) {
    const auto snap = random_cascade_snapshot(rng);
    const auto tree = build_cascade(snap, *snap.find_post("root"));
    bool ok = tree.nodes[0].parent == kNoIndex;
    std::set<UserIndex> users;
    for (std::size_t i = 0; i < tree.size() && ok; ++i) {
      const auto& n = tree.nodes[i];
      ok = users.insert(n.user).second;
      if (i == 0 || !ok) continue;
      ok = n.parent < i;
      if (!ok) break;
      const auto& parent = tree.nodes[n.parent];
      ok = parent.ts < n.ts && snap.follows(n.user, parent.user);
      // Brute-force candidate scan: no followed in-tree user was exposed earlier.
      for (std::size_t j = 0; j < tree.size() && ok; ++j) {
        const auto& other = tree.nodes[j];
        if (other.ts < n.ts && snap.follows(n.user, other.user)) {
          ok = std::tie(parent.ts, parent.user) <= std::tie(other.ts, other.user);
        }
      }
    }
    const auto [ref, removed] = reference_lrif(snap, tree.root_post);
    ok = ok && ref.size() == tree.size() && removed == tree.removed;
    bad += !ok;
    nodes += tree.size();
  }
  v.check(bad == 0, std::to_string(bad) + " invalid trees");
  v.note("earlier exposure wins; 1000 random cascades (" + std::to_string(nodes) + " nodes) valid");
}

void ks(Verdict& v) {
  Rng rng(500);
  int mismatches = 0;
  for (int round = 0; round < 500; ++round) {
    const bool discrete = rng.coin();
    auto sample = [&] {
      std::vector<double> s(1 + rng.uniform(0, 60));
      const double shift = rng.real(-1.0, 1.0);
      for (auto& x : s) x = discrete ? static_cast<double>(rng.uniform(0, 6)) : rng.real() + shift;
      return s;
    };
    const auto a = sample();
    const auto b = sample();
    mismatches += ks_two_sample(a, b).d != brute_ks_d(a, b);
  }
  v.check(mismatches == 0, std::to_string(mismatches) + " D mismatches");
  const std::vector<double> same{1, 2, 2, 5, 9};
  const auto id = ks_two_sample(same, same);
  v.check(id.d == 0.0 && id.p_value == 1.0, "identical samples");
  double worst_p = 0.0;
  for (std::size_t n = 10; n <= 40; n += 5) {
    std::vector<double> lo(n);
    std::vector<double> hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = static_cast<double>(i);
      hi[i] = 1000.0 + static_cast<double>(i);
    }
    const auto r = ks_two_sample(lo, hi);
    v.check(r.d == 1.0 && r.p_value < 0.01, "disjoint n=" + std::to_string(n));
    worst_p = std::max(worst_p, r.p_value);
  }
  v.note("500 pairs exact; disjoint max p = " + fmt(worst_p, 3));
}

void network(Verdict& v) {
  const double ratio = directed_density(1055, 42400) / directed_density(62827, 7450000);
  v.check(ratio >= 19.0 && ratio <= 21.0, "ratio " + fmt(ratio));
  v.note("density ratio " + fmt(ratio, 4));
}

void accounts(Verdict& v) {
  AccountCounts c;
  c.posts = 206;
  c.followers = 212;
  c.followings = 232;
  c.span_seconds = static_cast<Timestamp>(152 * kSecondsPerDay);
  const auto f = normalize_account(c);
  v.check(f.posts_per_day && std::fabs(*f.posts_per_day - 1.355) <= 0.01, "posts/day");
  v.check(f.follower_following_ratio && std::fabs(*f.follower_following_ratio - 0.91379) <= 1e-5, "F:F");
  v.note("posts/day " + fmt(f.posts_per_day.value_or(std::nan("")), 4) + ", F:F " +
         fmt(f.follower_following_ratio.value_or(std::nan("")), 5));
}

fs::path scratch_path(const std::string& name) {
  return fs::temp_directory_path() / ("cascade-lab-acceptance-" + name);
}

fs::path scratch(const std::string& name) {
  auto dir = scratch_path(name);
  fs::remove_all(dir);
  return dir;
}

void discrimination(Verdict& v) {
  const auto t0 = Clock::now();
  GenConfig gen;  // 10K users, 5% hateful, h = 0.9, hateful users repost more
  const auto corpus = generate(gen);
  std::stringstream bundle;
  write_bundle(bundle, corpus, gen);

  RunConfig cfg;
  cfg.threads = 1;
  cfg.out_dir = scratch("synthetic");
  auto inputs = read_bundle(bundle);
  const auto truth = inputs.truth;
  Pipeline p(cfg, std::move(inputs));
  p.run_all();
  const double elapsed = seconds_since(t0);

  const auto rec = evaluate_recovery(p.snapshot(), p.labels(), truth);
  v.check(rec.precision && *rec.precision >= 0.9, "precision " + fmt(rec.precision.value_or(0.0)));

  const auto summary = summarize(p.records(), "all", cfg.cascade_alpha);
  const SummaryRow* size_row = nullptr;
  for (const auto& r : summary.rows) {
    if (r.metric == CascadeMetric::size) size_row = &r;
  }
  v.check(size_row != nullptr, "size comparison present");
  if (size_row) {
    const auto& c = size_row->comparison;
    v.check(c.mean_kh > c.mean_nh, "mean size KH " + fmt(c.mean_kh) + " vs NH " + fmt(c.mean_nh));
    v.check(c.ks.p_value < 0.01, "KS p " + fmt(c.ks.p_value));
    v.note("mean size KH " + fmt(c.mean_kh, 4) + " vs NH " + fmt(c.mean_nh, 4) + ", KS p = " + fmt(c.ks.p_value, 3));
  }

  std::vector<CascadeTree> kh_rooted;
  std::vector<CascadeTree> nh_rooted;
  const auto labels = p.labels();
  for (const auto& tree : p.trees()) {
    const auto root_label = labels[tree.root().user];
    (root_label == Label::kh ? kh_rooted : nh_rooted).push_back(tree);
  }
  auto depth1 = [&](const std::vector<CascadeTree>& trees) {
    for (const auto& row : early_adopter_profile(trees, labels)) {
      if (row.depth == 1) return row.kh_fraction;
    }
    return std::nan("");
  };
  const double kh_frac = depth1(kh_rooted);
  const double nh_frac = depth1(nh_rooted);
  v.check(kh_frac > nh_frac, "depth-1 KH fraction " + fmt(kh_frac) + " vs " + fmt(nh_frac));
  v.check(elapsed < 60.0, "wall clock " + fmt(elapsed) + " s");
  v.note("precision " + fmt(rec.precision.value_or(0.0), 3) + " (" + std::to_string(rec.true_positive) + "/" +
         std::to_string(rec.labeled_kh) + ")");
  v.note("depth-1 KH fraction " + fmt(kh_frac, 3) + " vs " + fmt(nh_frac, 3));
  v.note("generate + full pipeline " + fmt(elapsed, 3) + " s");
}

std::map<std::string, std::string> digests(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  const auto m = nlohmann::json::parse(in);
  std::map<std::string, std::string> out;
  for (const auto& a : m["artifacts"]) out[a["file"]] = a["sha256"];
  return out;
}

void performance(Verdict& v) {
  GenConfig gen;
  gen.n_users = 50000;
  gen.duration_days = 28.0;
  gen.seed = 9;
  const auto corpus = generate(gen);
  const auto inputs_dir = scratch("perf-inputs");
  fs::create_directories(inputs_dir);
  {
    std::ofstream posts(inputs_dir / "posts.jsonl", std::ios::binary);
    write_posts_jsonl(posts, corpus.posts);
    std::ofstream follows(inputs_dir / "follows.csv", std::ios::binary);
    write_follows_csv(follows, corpus.follows);
  }

  auto run = [&](unsigned threads, const std::string& name) {
    RunConfig cfg;
    cfg.posts = inputs_dir / "posts.jsonl";
    cfg.follows = inputs_dir / "follows.csv";
    cfg.threads = threads;
    cfg.out_dir = scratch(name);
    const auto t0 = Clock::now();
    Pipeline p(cfg, load_inputs(cfg));
    p.write_ingest();
    p.write_labels();
    p.write_cascades();
    const double elapsed = seconds_since(t0);
    p.write_manifest();
    return std::pair{elapsed, p.snapshot().num_posts()};
  };
  const auto [single, events] = run(1, "perf-1");
  const auto [multi, events8] = run(8, "perf-8");
  v.check(events >= 1000000, std::to_string(events) + " events");
  v.check(single < 120.0, "threads=1 took " + fmt(single) + " s");
  v.check(multi < 120.0, "threads=8 took " + fmt(multi) + " s");
  const auto a = digests(scratch_path("perf-1"));
  const auto b = digests(scratch_path("perf-8"));
  v.check(!a.empty() && a == b, "artifacts differ between thread counts");
  v.note(std::to_string(events) + " events; ingest+label+cascades " + fmt(single, 3) + " s (1 thread), " +
         fmt(multi, 3) + " s (8 threads); " + std::to_string(a.size()) + " artifacts byte-identical");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
      {"DeGroot toy reproduction", degroot_toy},
      {"DeGroot matrix-power oracle", degroot_oracle},
      {"structural virality", virality},
      {"LRIF correctness", lrif},
      {"KS test", ks},
      {"network density ratio", network},
      {"account normalization", accounts},
      {"end-to-end synthetic discrimination", discrimination},
      {"performance and determinism", performance},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    failed += !v.passed();
    std::printf("%s  %zu. %s: %s\n", v.passed() ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
