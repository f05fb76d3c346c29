#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cascadelab/snapshot.hpp"

namespace cascadelab {

struct ClassRates {
  double posts_per_day = 0.5;    // originals, replies and quotes
  double reposts_per_day = 0.3;
  double likes_per_post = 1.5;
  double dislikes_per_post = 0.05;
};

/// Generator parameters. Defaults give a 10K-user corpus with a 5% hateful
/// community whose members post and repost more than everyone else.
struct GenConfig {
  std::uint32_t n_users = 10000;
  double hate_fraction = 0.05;
  double homophily = 0.9;  // P(follow or repost choice stays within class)
  double mean_follows = 20.0;
  ClassRates hateful{3.0, 4.0, 2.6, 0.13};
  ClassRates normal{0.5, 0.3, 1.5, 0.05};
  double reply_fraction = 0.10;  // share of non-repost events that are replies
  double quote_fraction = 0.05;
  double keyword_probability = 0.5;  // per hateful original
  double attachment_probability = 0.45;
  double group_probability = 0.05;
  double topic_probability = 0.05;
  double duration_days = 14.0;
  double recency_days = 2.0;      // how far back a reposter looks
  std::uint32_t recent_posts = 8;  // per-followee posts visible to reposters
  std::int64_t start_ts = 1500000000;
  std::uint64_t seed = 1;
  std::vector<std::string> hate_terms;  // empty: terms of the default lexicon
};

/// Applies one `key=value` setting. Throws Error on an unknown key or bad value.
void set_gen_option(GenConfig& config, std::string_view key, std::string_view value);
/// Every setting as key/value strings accepted by set_gen_option (hate_terms excluded).
std::vector<std::pair<std::string, std::string>> gen_options(const GenConfig& config);
/// Reads `key = value` lines ('#' comments) on top of `config`.
void read_gen_config(std::istream& in, GenConfig& config);
void read_gen_config(const std::filesystem::path& path, GenConfig& config);
/// Throws Error describing the first infeasible setting.
void validate(const GenConfig& config);

struct SynthCorpus {
  std::vector<std::string> user_ids;
  std::vector<std::uint8_t> hateful;  // per user, planted ground truth
  std::vector<PostEvent> posts;        // time order
  std::vector<FollowEdge> follows;
};

SynthCorpus generate(const GenConfig& config);

void write_posts_jsonl(std::ostream& out, std::span<const PostEvent> posts);
void write_follows_csv(std::ostream& out, std::span<const FollowEdge> follows);
/// `user_id,hateful`
void write_truth_csv(std::ostream& out, const SynthCorpus& corpus);

}  // namespace cascadelab
