#include "cascadelab/cascade.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <unordered_map>

#include "cascadelab/parallel.hpp"

namespace cascadelab {

CascadeTree build_cascade(const Snapshot& snapshot, PostIndex root_post) {
  if (root_post >= snapshot.num_posts()) throw Error("root post out of range");
  const Post& root = snapshot.post(root_post);
  if (root.kind != PostKind::original) throw Error("cascade root must be an original post");

  CascadeTree tree;
  tree.root_post = root_post;
  tree.nodes.push_back({root.author, root_post, root.ts, kNoIndex, 0});

  const auto reposts = snapshot.reposts_of(root_post);
  if (reposts.empty()) return tree;

  // user -> node index, or kNoIndex for users whose first repost was removed
  std::unordered_map<UserIndex, std::uint32_t> seen;
  seen.reserve(reposts.size() + 1);
  seen.emplace(root.author, 0);

  for (const PostIndex p : reposts) {
    const Post& ev = snapshot.post(p);
    const UserIndex u = ev.author;
    if (!seen.try_emplace(u, kNoIndex).second) continue;

    std::uint32_t best = kNoIndex;
    auto consider = [&](std::uint32_t node) {
      const auto& cand = tree.nodes[node];
      if (cand.ts >= ev.ts) return;
      if (best == kNoIndex) {
        best = node;
        return;
      }
      const auto& cur = tree.nodes[best];
      if (cand.ts < cur.ts || (cand.ts == cur.ts && cand.user < cur.user)) best = node;
    };

    const auto followees = snapshot.followees(u);
    if (tree.nodes.size() < followees.size()) {
      for (std::uint32_t node = 0; node < tree.nodes.size(); ++node) {
        if (snapshot.follows(u, tree.nodes[node].user)) consider(node);
      }
    } else {
      for (const UserIndex v : followees) {
        auto it = seen.find(v);
        if (it != seen.end() && it->second != kNoIndex) consider(it->second);
      }
    }

    if (best == kNoIndex) {
      ++tree.removed;
      continue;
    }
    const auto index = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.push_back({u, p, ev.ts, best, tree.nodes[best].depth + 1});
    seen[u] = index;
  }
  return tree;
}

std::uint64_t wiener_index(std::span<const std::uint32_t> parents) {
  const std::size_t n = parents.size();
  if (n <= 1) return 0;
  std::vector<std::uint64_t> subtree(n, 1);
  for (std::size_t i = n - 1; i >= 1; --i) {
    if (parents[i] >= i) throw Error("parent index must precede child index");
    subtree[parents[i]] += subtree[i];
  }
  std::uint64_t total = 0;
  for (std::size_t i = 1; i < n; ++i) total += subtree[i] * (n - subtree[i]);
  return total;
}

namespace {

std::vector<std::uint32_t> parent_array(const CascadeTree& tree) {
  std::vector<std::uint32_t> parents(tree.nodes.size());
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) parents[i] = tree.nodes[i].parent;
  return parents;
}

double virality_from_wiener(std::uint64_t wiener, std::size_t n) {
  if (n <= 1) return 0.0;
  const double nd = static_cast<double>(n);
  return 2.0 * static_cast<double>(wiener) / (nd * (nd - 1.0));
}

}  // namespace

std::uint64_t wiener_index(const CascadeTree& tree) { return wiener_index(parent_array(tree)); }

double structural_virality(std::span<const std::uint32_t> parents) {
  return virality_from_wiener(wiener_index(parents), parents.size());
}

double structural_virality(const CascadeTree& tree) { return structural_virality(parent_array(tree)); }

CascadeMetrics compute_metrics(const CascadeTree& tree) {
  CascadeMetrics m;
  m.size = tree.nodes.size();
  m.removed = tree.removed;
  std::vector<std::uint64_t> per_depth;
  std::uint64_t depth_sum = 0;
  for (const auto& node : tree.nodes) {
    if (node.depth >= per_depth.size()) per_depth.resize(node.depth + 1, 0);
    ++per_depth[node.depth];
    depth_sum += node.depth;
    m.depth = std::max(m.depth, node.depth);
  }
  m.breadth = per_depth.empty() ? 0 : *std::max_element(per_depth.begin(), per_depth.end());
  m.avg_depth = m.size == 0 ? 0.0 : static_cast<double>(depth_sum) / static_cast<double>(m.size);
  m.structural_virality = structural_virality(tree);
  return m;
}

std::string_view to_string(CascadeMetric metric) {
  switch (metric) {
    case CascadeMetric::size: return "size";
    case CascadeMetric::breadth: return "breadth";
    case CascadeMetric::depth: return "depth";
    case CascadeMetric::avg_depth: return "avg_depth";
    case CascadeMetric::virality: return "virality";
  }
  return "size";
}

std::optional<CascadeMetric> parse_cascade_metric(std::string_view text) {
  for (const auto m : kAllCascadeMetrics) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

double metric_value(const CascadeMetrics& m, CascadeMetric metric) {
  switch (metric) {
    case CascadeMetric::size: return static_cast<double>(m.size);
    case CascadeMetric::breadth: return static_cast<double>(m.breadth);
    case CascadeMetric::depth: return static_cast<double>(m.depth);
    case CascadeMetric::avg_depth: return m.avg_depth;
    case CascadeMetric::virality: return m.structural_virality;
  }
  return 0.0;
}

std::vector<TemporalPoint> temporal_profile(const CascadeTree& tree, CascadeMetric metric) {
  std::vector<TemporalPoint> series;
  if (tree.nodes.empty()) return series;
  const Timestamp t0 = tree.root().ts;
  const std::size_t n = tree.nodes.size();

  switch (metric) {
    case CascadeMetric::size:
      for (std::size_t i = 0; i < n; ++i) series.push_back({static_cast<double>(i + 1), tree.nodes[i].ts - t0});
      break;
    case CascadeMetric::depth: {
      std::uint32_t reached = 0;
      series.push_back({0.0, 0});
      for (std::size_t i = 1; i < n; ++i) {
        while (reached < tree.nodes[i].depth) {
          ++reached;
          series.push_back({static_cast<double>(reached), tree.nodes[i].ts - t0});
        }
      }
      break;
    }
    case CascadeMetric::breadth: {
      std::vector<std::uint64_t> per_depth{1};
      std::uint64_t reached = 1;
      series.push_back({1.0, 0});
      for (std::size_t i = 1; i < n; ++i) {
        const auto d = tree.nodes[i].depth;
        if (d >= per_depth.size()) per_depth.resize(d + 1, 0);
        const auto level = ++per_depth[d];
        while (reached < level) {
          ++reached;
          series.push_back({static_cast<double>(reached), tree.nodes[i].ts - t0});
        }
      }
      break;
    }
    case CascadeMetric::avg_depth: {
      std::uint64_t depth_sum = 0;
      series.push_back({0.0, 0});
      for (std::size_t i = 1; i < n; ++i) {
        depth_sum += tree.nodes[i].depth;
        series.push_back({static_cast<double>(depth_sum) / static_cast<double>(i + 1), tree.nodes[i].ts - t0});
      }
      break;
    }
    case CascadeMetric::virality: {
      // Adding leaf x under p raises the Wiener index by D(p) + n, where
      // D(p) = n*depth(p) + sum(depth) - 2 * sum over non-root ancestors a
      // of p (inclusive) of |subtree(a)|.
      std::vector<std::uint64_t> subtree(n, 0);
      subtree[0] = 1;
      std::uint64_t wiener = 0;
      std::uint64_t depth_sum = 0;
      series.push_back({0.0, 0});
      for (std::size_t i = 1; i < n; ++i) {
        const auto& node = tree.nodes[i];
        const std::uint64_t existing = i;
        const auto p = node.parent;
        std::uint64_t shared = 0;
        for (auto a = p; a != 0 && a != kNoIndex; a = tree.nodes[a].parent) shared += subtree[a];
        const std::uint64_t dist_from_parent = existing * tree.nodes[p].depth + depth_sum - 2 * shared;
        wiener += dist_from_parent + existing;
        depth_sum += node.depth;
        for (auto a = static_cast<std::uint32_t>(i); a != kNoIndex; a = tree.nodes[a].parent) ++subtree[a];
        series.push_back({virality_from_wiener(wiener, i + 1), node.ts - t0});
      }
      break;
    }
  }
  return series;
}

std::vector<DepthProfile> early_adopter_profile(std::span<const CascadeTree> trees, std::span<const Label> labels) {
  std::map<std::uint32_t, std::array<std::uint64_t, 3>> counts;  // depth -> {all, kh, nh}
  for (const auto& tree : trees) {
    for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
      const auto& node = tree.nodes[i];
      auto& c = counts[node.depth];
      ++c[0];
      const Label l = node.user < labels.size() ? labels[node.user] : Label::unlabeled;
      if (l == Label::kh) ++c[1];
      if (l == Label::nh) ++c[2];
    }
  }
  std::vector<DepthProfile> out;
  for (const auto& [depth, c] : counts) {
    const double all = static_cast<double>(c[0]);
    out.push_back({depth, c[0], static_cast<double>(c[1]) / all, static_cast<double>(c[2]) / all});
  }
  return out;
}

std::string_view to_string(PostSubset subset) {
  switch (subset) {
    case PostSubset::all: return "all";
    case PostSubset::attachments: return "attachments";
    case PostSubset::in_group: return "in_group";
    case PostSubset::in_topic: return "in_topic";
  }
  return "all";
}

std::optional<PostSubset> parse_post_subset(std::string_view text) {
  for (const auto s : kAllSubsets) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

bool in_subset(const Post& post, PostSubset subset) {
  switch (subset) {
    case PostSubset::all: return true;
    case PostSubset::attachments: return post.attachment;
    case PostSubset::in_group: return post.in_group;
    case PostSubset::in_topic: return post.in_topic;
  }
  return false;
}

std::vector<PostIndex> filter_population(const Snapshot& snapshot, std::span<const Label> labels,
                                         const PopulationFilter& filter) {
  if (labels.size() != snapshot.num_users()) throw Error("label vector does not match user count");
  std::vector<PostIndex> roots;
  const auto posts = snapshot.posts();
  for (PostIndex p = 0; p < posts.size(); ++p) {
    const Post& post = posts[p];
    if (post.kind != PostKind::original || labels[post.author] != filter.group) continue;
    if (in_subset(post, filter.subset)) roots.push_back(p);
  }
  return roots;
}

std::vector<CascadeTree> build_cascades(const Snapshot& snapshot, std::span<const PostIndex> roots,
                                        unsigned threads) {
  std::vector<CascadeTree> trees(roots.size());
  parallel_for(roots.size(), threads, [&](std::size_t i) { trees[i] = build_cascade(snapshot, roots[i]); });
  return trees;
}

}  // namespace cascadelab
