#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cascadelab/cascade.hpp"
#include "cascadelab/snapshot.hpp"

namespace cascadelab {

struct CcdfPoint {
  double x;
  double p;  // P(X >= x)
};

/// One point per distinct sample value, ascending x. Throws Error on empty input.
std::vector<CcdfPoint> ccdf(std::span<const double> samples);

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

struct KsResult {
  double d = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value at
/// effective size n_a*n_b/(n_a+n_b). Throws Error if either sample is empty.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

double mean_of(std::span<const double> values);
double median_of(std::span<const double> values);

struct GroupComparison {
  std::size_t n_kh = 0;
  std::size_t n_nh = 0;
  double mean_kh = 0.0;
  double mean_nh = 0.0;
  double median_kh = 0.0;
  double median_nh = 0.0;
  KsResult ks;
  bool significant = false;
};

GroupComparison compare_groups(std::span<const double> kh, std::span<const double> nh, double alpha = 0.01);

/// One cascade with its root's label and metrics.
struct CascadeRecord {
  PostIndex root_post = kNoIndex;
  UserIndex root_user = kNoIndex;
  Label label = Label::unlabeled;
  CascadeMetrics metrics;
};

struct SummaryRow {
  std::string subset;
  CascadeMetric metric;
  GroupComparison comparison;
};

struct Summary {
  std::vector<SummaryRow> rows;
  std::vector<std::string> warnings;
};

/// KH vs NH comparison for every cascade metric of one population subset.
/// A subset missing either group yields warnings and no rows.
Summary summarize(std::span<const CascadeRecord> cascades, std::string_view subset, double alpha = 0.01);

struct AccountCounts {
  std::uint64_t posts = 0;
  std::uint64_t followers = 0;
  std::uint64_t followings = 0;
  std::optional<Timestamp> span_seconds;  // first post to corpus end
  std::optional<double> likes;
  std::optional<double> dislikes;
  std::optional<double> score;
  std::optional<double> replies;
  std::optional<double> reposts;
};

struct AccountFeatures {
  std::optional<double> posts_per_day;
  std::optional<double> followers_per_day;
  std::optional<double> followings_per_day;
  std::optional<double> likes_per_post;
  std::optional<double> dislikes_per_post;
  std::optional<double> score_per_post;
  std::optional<double> replies_per_post;
  std::optional<double> reposts_per_post;
  std::optional<double> follower_following_ratio;
};

inline constexpr double kSecondsPerDay = 86400.0;

/// Per-day rates divide by the activity span in days, clamped to at least
/// one day; per-post rates divide by the post count.
AccountFeatures normalize_account(const AccountCounts& counts);

std::vector<AccountCounts> account_counts(const Snapshot& snapshot);
AccountFeatures account_characteristics(const Snapshot& snapshot, UserIndex user);

enum class AccountFeature : std::uint8_t {
  posts, followers, followings, likes, dislikes, score, replies, reposts, follower_following
};
inline constexpr AccountFeature kAllAccountFeatures[] = {
    AccountFeature::posts,    AccountFeature::followers, AccountFeature::followings,
    AccountFeature::likes,    AccountFeature::dislikes,  AccountFeature::score,
    AccountFeature::replies,  AccountFeature::reposts,   AccountFeature::follower_following};
std::string_view to_string(AccountFeature feature);
std::optional<double> feature_value(const AccountFeatures& f, AccountFeature feature);

struct AccountSummaryRow {
  AccountFeature feature;
  GroupComparison comparison;
};

/// KH vs NH comparison per account feature; features absent for every
/// member of a group are skipped.
std::vector<AccountSummaryRow> summarize_accounts(std::span<const AccountFeatures> features,
                                                  std::span<const Label> labels, double alpha = 0.001);

struct SubgraphStats {
  std::uint64_t nodes = 0;
  std::uint64_t edges = 0;
  double density = 0.0;
  double reciprocity = 0.0;
};

/// E / (N (N - 1)); 0 when N < 2.
double directed_density(std::uint64_t nodes, std::uint64_t edges);

struct NetworkCharacteristics {
  SubgraphStats combined;  // induced on KH and NH users together
  SubgraphStats kh;
  SubgraphStats nh;
  std::uint64_t kh_to_kh = 0;
  std::uint64_t kh_to_nh = 0;
  std::uint64_t nh_to_kh = 0;
  std::uint64_t nh_to_nh = 0;
  // Edge counts over possible ordered pairs for each (follower, followee) class.
  double rate_kh_kh = 0.0;
  double rate_kh_nh = 0.0;
  double rate_nh_kh = 0.0;
  double rate_nh_nh = 0.0;
  std::optional<double> density_ratio;        // kh.density / nh.density
  std::optional<double> nh_kh_over_kh_nh;      // rate_nh_kh / rate_kh_nh
  std::optional<double> kh_kh_over_kh_nh;      // rate_kh_kh / rate_kh_nh
};

/// Throws Error if either label class is empty.
NetworkCharacteristics network_characteristics(const Snapshot& snapshot, std::span<const Label> labels);

/// Reciprocity over an explicit edge list (duplicates must be removed).
double reciprocity(std::span<const std::pair<UserIndex, UserIndex>> edges);

struct CcdfSeries {
  std::string name;
  std::vector<CcdfPoint> points;
};

/// Standalone SVG of one or more CCDFs on log-log axes. The x axis plots
/// x + 1 so that zero-valued metrics (depth, virality) stay visible.
void write_ccdf_svg(std::ostream& out, std::string_view title, std::span<const CcdfSeries> series);

}  // namespace cascadelab
