#include "cascadelab/belief.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cascadelab/parallel.hpp"

namespace cascadelab {
namespace {

RepostNetwork::Arc make_arc(UserIndex target, std::uint64_t weight) { return {target, weight}; }

}  // namespace

std::span<const RepostNetwork::Arc> RepostNetwork::arcs(UserIndex u) const {
  return std::span<const Arc>(arcs_).subspan(offsets_[u], offsets_[u + 1] - offsets_[u]);
}

std::uint64_t RepostNetwork::weight(UserIndex from, UserIndex to) const {
  if (from == to) return self_[from];
  const auto row = arcs(from);
  auto it = std::lower_bound(row.begin(), row.end(), to, [](const Arc& a, UserIndex t) { return a.target < t; });
  return (it != row.end() && it->target == to) ? it->weight : 0;
}

RepostNetwork RepostNetwork::from_counts(std::size_t n_users,
                                         std::span<const std::tuple<UserIndex, UserIndex, std::uint64_t>> arcs,
                                         std::span<const std::uint64_t> self_weights) {
  if (self_weights.size() != n_users) throw Error("self weight count does not match user count");
  RepostNetwork net;
  net.self_.assign(self_weights.begin(), self_weights.end());
  std::vector<std::tuple<UserIndex, UserIndex, std::uint64_t>> sorted;
  for (const auto& [from, to, w] : arcs) {
    if (from >= n_users || to >= n_users) throw Error("arc endpoint out of range");
    if (from == to) {
      net.self_[from] += w;
    } else if (w > 0) {
      sorted.emplace_back(from, to, w);
    }
  }
  std::sort(sorted.begin(), sorted.end());
  net.offsets_.assign(n_users + 1, 0);
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const auto& [from, to, w] = sorted[k];
    if (k > 0 && std::get<0>(sorted[k - 1]) == from && std::get<1>(sorted[k - 1]) == to) {
      net.arcs_.back().weight += w;
    } else {
      net.arcs_.push_back(make_arc(to, w));
      ++net.offsets_[from + 1];
    }
  }
  std::partial_sum(net.offsets_.begin(), net.offsets_.end(), net.offsets_.begin());
  net.total_.assign(n_users, 0);
  for (std::size_t u = 0; u < n_users; ++u) {
    net.total_[u] = net.self_[u];
    for (const auto& a : net.arcs(static_cast<UserIndex>(u))) net.total_[u] += a.weight;
  }
  return net;
}

RepostNetwork build_repost_network(const Snapshot& snapshot, const RepostNetworkOptions& options) {
  const auto n_users = snapshot.num_users();
  std::vector<std::tuple<UserIndex, UserIndex, std::uint64_t>> arcs;
  std::vector<std::uint64_t> self(n_users, 0);
  std::uint64_t skipped = 0;

  for (const auto& post : snapshot.posts()) {
    switch (post.kind) {
      case PostKind::original:
        ++self[post.author];
        continue;
      case PostKind::repost:
        break;
      case PostKind::reply:
        if (!options.count_replies) continue;
        break;
      case PostKind::quote:
        if (!options.count_quotes) continue;
        break;
    }
    // Replies and quotes point at a parent that may itself be a repost;
    // credit whoever authored the content underneath.
    PostIndex target = post.kind == PostKind::repost ? post.source : kNoIndex;
    if (post.kind != PostKind::repost && post.parent != kNoIndex) target = snapshot.post(post.parent).source;
    if (target == kNoIndex) {
      ++skipped;
      continue;
    }
    const auto author = snapshot.post(target).author;
    if (author == post.author) {
      ++skipped;
      continue;
    }
    arcs.emplace_back(post.author, author, 1);
  }
  auto net = RepostNetwork::from_counts(n_users, arcs, self);
  net.skipped_ = skipped;
  return net;
}

std::span<const BeliefNetwork::Entry> BeliefNetwork::row(UserIndex u) const {
  return std::span<const Entry>(entries_).subspan(offsets_[u], offsets_[u + 1] - offsets_[u]);
}

double BeliefNetwork::influence(UserIndex v, UserIndex u) const {
  const auto r = row(u);
  auto it = std::lower_bound(r.begin(), r.end(), v, [](const Entry& e, UserIndex s) { return e.source < s; });
  return (it != r.end() && it->source == v) ? it->weight : 0.0;
}

double BeliefNetwork::self_retention(UserIndex u) const { return influence(u, u); }

double BeliefNetwork::max_row_error() const {
  double worst = 0.0;
  for (std::size_t u = 0; u + 1 < offsets_.size(); ++u) {
    double sum = 0.0;
    for (const auto& e : row(static_cast<UserIndex>(u))) sum += e.weight;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

BeliefNetwork build_belief_network(const RepostNetwork& repost) {
  BeliefNetwork net;
  const auto n = repost.num_users();
  net.offsets_.assign(n + 1, 0);
  net.entries_.reserve(n);
  for (UserIndex u = 0; u < n; ++u) {
    const auto total = repost.out_weight(u);
    if (total == 0) {
      net.entries_.push_back({u, 1.0});
    } else {
      const double s = static_cast<double>(total);
      const auto self = repost.self_weight(u);
      bool self_placed = self == 0;
      for (const auto& arc : repost.arcs(u)) {
        if (!self_placed && u < arc.target) {
          net.entries_.push_back({u, static_cast<double>(self) / s});
          self_placed = true;
        }
        net.entries_.push_back({arc.target, static_cast<double>(arc.weight) / s});
      }
      if (!self_placed) net.entries_.push_back({u, static_cast<double>(self) / s});
    }
    net.offsets_[u + 1] = net.entries_.size();
  }
  return net;
}

BeliefState run_degroot(const BeliefNetwork& network, std::span<const UserIndex> seeds,
                        const DegrootOptions& options) {
  const auto n = network.num_users();
  BeliefState state;
  std::vector<double> current(n, 0.0);
  for (const auto s : seeds) {
    if (s >= n) throw Error("seed user out of range");
    current[s] = 1.0;
  }
  if (options.on_iteration) options.on_iteration(0, current);

  std::vector<double> next(n, 0.0);
  for (std::uint32_t it = 1; it <= options.iterations; ++it) {
    parallel_for(n, options.threads, [&](std::size_t u) {
      double acc = 0.0;
      for (const auto& e : network.row(static_cast<UserIndex>(u))) acc += e.weight * current[e.source];
      next[u] = std::clamp(acc, 0.0, 1.0);
    });
    if (options.clamp_seeds) {
      for (const auto s : seeds) next[s] = 1.0;
    }
    current.swap(next);
    if (options.on_iteration) options.on_iteration(it, current);
  }
  state.belief = std::move(current);
  state.iteration = options.iterations;
  return state;
}

std::uint8_t stratum_of(double belief, const StrataBounds& bounds) {
  std::uint8_t s = 0;
  for (const double cut : bounds.cuts) {
    if (belief >= cut) ++s;
  }
  return s;
}

std::vector<std::uint8_t> stratify(std::span<const double> beliefs, const StrataBounds& bounds) {
  if (!std::is_sorted(bounds.cuts.begin(), bounds.cuts.end())) throw Error("strata bounds must be ascending");
  std::vector<std::uint8_t> strata(beliefs.size());
  std::transform(beliefs.begin(), beliefs.end(), strata.begin(), [&](double b) { return stratum_of(b, bounds); });
  return strata;
}

std::vector<Label> classify_users(std::span<const double> beliefs, std::span<const std::uint32_t> post_counts,
                                  const ClassifyOptions& options) {
  if (beliefs.size() != post_counts.size()) throw Error("belief and post-count vectors differ in length");
  std::vector<Label> labels(beliefs.size(), Label::unlabeled);
  for (std::size_t u = 0; u < beliefs.size(); ++u) {
    if (post_counts[u] < options.min_posts) continue;
    if (beliefs[u] >= options.hate_threshold) {
      labels[u] = Label::kh;
    } else if (beliefs[u] < options.nonhate_threshold) {
      labels[u] = Label::nh;
    }
  }
  return labels;
}

std::vector<Label> classify_users(const BeliefState& state, const Snapshot& snapshot, const ClassifyOptions& options) {
  std::vector<std::uint32_t> counts(snapshot.num_users());
  for (UserIndex u = 0; u < counts.size(); ++u) counts[u] = snapshot.post_count(u);
  return classify_users(state.belief, counts, options);
}

}  // namespace cascadelab
