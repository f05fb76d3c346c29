#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cascadelab/snapshot.hpp"

namespace cascadelab {

/// Influence tree of one root post. Nodes are stored in attachment order,
/// which is event-time order; node 0 is the root and every parent index is
/// smaller than its child's.
struct CascadeTree {
  struct Node {
    UserIndex user = kNoIndex;
    PostIndex post = kNoIndex;  // the root post, or the node's repost event
    Timestamp ts = 0;
    std::uint32_t parent = kNoIndex;  // node index; kNoIndex for the root
    std::uint32_t depth = 0;
  };

  PostIndex root_post = kNoIndex;
  std::vector<Node> nodes;
  std::uint32_t removed = 0;  // reposters with no qualifying influencer

  const Node& root() const { return nodes.front(); }
  std::size_t size() const { return nodes.size(); }
};

struct CascadeMetrics {
  std::uint64_t size = 1;
  std::uint32_t depth = 0;
  std::uint64_t breadth = 1;
  double avg_depth = 0.0;
  double structural_virality = 0.0;
  std::uint32_t removed = 0;
};

/// Least-recent-influencer reconstruction. Throws Error if root_post is not
/// an original post.
CascadeTree build_cascade(const Snapshot& snapshot, PostIndex root_post);

/// Sum of distances over unordered node pairs of a tree given as a parent
/// array (parents[0] ignored, parents[i] < i). O(n) via subtree sizes.
std::uint64_t wiener_index(std::span<const std::uint32_t> parents);
std::uint64_t wiener_index(const CascadeTree& tree);

/// Mean distance over ordered pairs; 0 for n <= 1.
double structural_virality(const CascadeTree& tree);
double structural_virality(std::span<const std::uint32_t> parents);

CascadeMetrics compute_metrics(const CascadeTree& tree);

enum class CascadeMetric : std::uint8_t { size, breadth, depth, avg_depth, virality };
std::string_view to_string(CascadeMetric metric);
std::optional<CascadeMetric> parse_cascade_metric(std::string_view text);
inline constexpr CascadeMetric kAllCascadeMetrics[] = {CascadeMetric::size, CascadeMetric::breadth,
                                                      CascadeMetric::depth, CascadeMetric::avg_depth,
                                                      CascadeMetric::virality};
double metric_value(const CascadeMetrics& m, CascadeMetric metric);

struct TemporalPoint {
  double value;
  Timestamp elapsed;
};

/// Replays the tree in event order. For size, breadth and depth: one point
/// per integer level v giving the first elapsed time the running value
/// reached v. For avg_depth and virality: the running value after each event.
std::vector<TemporalPoint> temporal_profile(const CascadeTree& tree, CascadeMetric metric);

struct DepthProfile {
  std::uint32_t depth;
  std::uint64_t reposters;
  double kh_fraction;
  double nh_fraction;
};

/// Per-depth label mix of reposters (depth >= 1) across all trees; depths
/// with no reposters are omitted.
std::vector<DepthProfile> early_adopter_profile(std::span<const CascadeTree> trees, std::span<const Label> labels);

enum class PostSubset : std::uint8_t { all, attachments, in_group, in_topic };
std::string_view to_string(PostSubset subset);
std::optional<PostSubset> parse_post_subset(std::string_view text);
inline constexpr PostSubset kAllSubsets[] = {PostSubset::all, PostSubset::attachments, PostSubset::in_group,
                                             PostSubset::in_topic};

bool in_subset(const Post& post, PostSubset subset);

struct PopulationFilter {
  Label group = Label::kh;
  PostSubset subset = PostSubset::all;
};

/// Original posts by users carrying `filter.group`, restricted to the subset.
/// Replies, quotes and reposts are never roots.
std::vector<PostIndex> filter_population(const Snapshot& snapshot, std::span<const Label> labels,
                                         const PopulationFilter& filter);

/// Builds trees for many roots; output order follows `roots` for any thread count.
std::vector<CascadeTree> build_cascades(const Snapshot& snapshot, std::span<const PostIndex> roots,
                                        unsigned threads = 1);

}  // namespace cascadelab
