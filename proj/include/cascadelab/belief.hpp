#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <tuple>
#include <vector>

#include "cascadelab/snapshot.hpp"

namespace cascadelab {

struct RepostNetworkOptions {
  // Only kind=repost events count by default. These widen the notion of
  // "reposting an author" to replies and quotes.
  bool count_replies = false;
  bool count_quotes = false;
};

/// User-level repost counts. weight(u->v) is how often u reposted content
/// authored by v; the self-loop weight(u->u) is u's original-post count.
class RepostNetwork {
 public:
  struct Arc {
    UserIndex target;
    std::uint64_t weight;
  };

  std::size_t num_users() const { return self_.size(); }
  /// Off-diagonal arcs out of u, sorted by target.
  std::span<const Arc> arcs(UserIndex u) const;
  std::uint64_t self_weight(UserIndex u) const { return self_[u]; }
  /// S(u): total out-weight including the self-loop.
  std::uint64_t out_weight(UserIndex u) const { return total_[u]; }
  std::uint64_t weight(UserIndex from, UserIndex to) const;
  std::uint64_t skipped_events() const { return skipped_; }

  /// Direct construction from counts. Arcs with from == to add to the self-loop.
  static RepostNetwork from_counts(std::size_t n_users,
                                   std::span<const std::tuple<UserIndex, UserIndex, std::uint64_t>> arcs,
                                   std::span<const std::uint64_t> self_weights);

 private:
  friend RepostNetwork build_repost_network(const Snapshot&, const RepostNetworkOptions&);
  std::vector<std::uint64_t> offsets_;
  std::vector<Arc> arcs_;
  std::vector<std::uint64_t> self_;
  std::vector<std::uint64_t> total_;
  std::uint64_t skipped_ = 0;
};

/// Self-reposts and reposts whose chain does not resolve are skipped and counted.
RepostNetwork build_repost_network(const Snapshot& snapshot, const RepostNetworkOptions& options = {});

/// Row-stochastic influence matrix: row u lists the users whose beliefs u
/// averages over (reposted authors plus u itself) with their weights.
class BeliefNetwork {
 public:
  struct Entry {
    UserIndex source;
    double weight;
  };

  std::size_t num_users() const { return offsets_.size() - 1; }
  std::span<const Entry> row(UserIndex u) const;
  double self_retention(UserIndex u) const;
  /// Weight of v's belief in u's update; 0 if v does not influence u.
  double influence(UserIndex v, UserIndex u) const;
  /// max_u |sum_v w(u <- v) - 1|.
  double max_row_error() const;

 private:
  friend BeliefNetwork build_belief_network(const RepostNetwork&);
  std::vector<std::uint64_t> offsets_{0};
  std::vector<Entry> entries_;
};

BeliefNetwork build_belief_network(const RepostNetwork& repost);

struct DegrootOptions {
  std::uint32_t iterations = 5;
  bool clamp_seeds = false;
  unsigned threads = 1;
  // Called with the iteration index (0 = initial assignment) and the beliefs.
  std::function<void(std::uint32_t, std::span<const double>)> on_iteration;
};

struct StrataBounds {
  std::array<double, 3> cuts{0.25, 0.50, 0.75};
};

struct ClassifyOptions {
  double hate_threshold = 0.75;
  double nonhate_threshold = 0.25;
  std::uint32_t min_posts = 5;
};

struct BeliefState {
  std::vector<double> belief;
  std::uint32_t iteration = 0;
  std::vector<std::uint8_t> stratum;
  std::vector<Label> label;
};

/// Synchronous DeGroot updates from b0 = 1 on seeds, 0 elsewhere. Only
/// `belief` and `iteration` are filled; see stratify / classify_users.
BeliefState run_degroot(const BeliefNetwork& network, std::span<const UserIndex> seeds,
                        const DegrootOptions& options = {});

std::uint8_t stratum_of(double belief, const StrataBounds& bounds = {});
std::vector<std::uint8_t> stratify(std::span<const double> beliefs, const StrataBounds& bounds = {});

std::vector<Label> classify_users(std::span<const double> beliefs, std::span<const std::uint32_t> post_counts,
                                  const ClassifyOptions& options = {});
std::vector<Label> classify_users(const BeliefState& state, const Snapshot& snapshot,
                                  const ClassifyOptions& options = {});

}  // namespace cascadelab
