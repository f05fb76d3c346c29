#include "cascadelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace cascadelab {

std::vector<CcdfPoint> ccdf(std::span<const double> samples) {
  if (samples.empty()) throw Error("ccdf of an empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<CcdfPoint> out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i] == sorted[i - 1]) continue;
    out.push_back({sorted[i], static_cast<double>(sorted.size() - i) / n});
  }
  return out;
}

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  constexpr double kEps = 1e-10;
  if (lambda < 1.18) {
    // Jacobi theta form of the CDF converges fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double scale = -pi2 / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int k = 1; k < 100; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(odd * odd * scale);
      cdf += term;
      if (term < kEps) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < kEps) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error("KS test needs two non-empty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());

  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= x) ++i;
    while (j < sb.size() && sb[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  // Once one sample is exhausted its ECDF is 1; the gap only shrinks from there.
  const double ne = na * nb / (na + nb);
  return {d, kolmogorov_survival(std::sqrt(ne) * d)};
}

double mean_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (const double v : sorted) sum += v;
  return sum / static_cast<double>(sorted.size());
}

double median_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

GroupComparison compare_groups(std::span<const double> kh, std::span<const double> nh, double alpha) {
  GroupComparison c;
  c.n_kh = kh.size();
  c.n_nh = nh.size();
  c.mean_kh = mean_of(kh);
  c.mean_nh = mean_of(nh);
  c.median_kh = median_of(kh);
  c.median_nh = median_of(nh);
  if (!kh.empty() && !nh.empty()) {
    c.ks = ks_two_sample(kh, nh);
    c.significant = c.ks.p_value < alpha;
  }
  return c;
}

Summary summarize(std::span<const CascadeRecord> cascades, std::string_view subset, double alpha) {
  Summary summary;
  std::size_t n_kh = 0;
  std::size_t n_nh = 0;
  for (const auto& c : cascades) {
    n_kh += c.label == Label::kh;
    n_nh += c.label == Label::nh;
  }
  if (n_kh == 0) summary.warnings.push_back("subset " + std::string(subset) + ": no KH cascades");
  if (n_nh == 0) summary.warnings.push_back("subset " + std::string(subset) + ": no NH cascades");
  if (n_kh == 0 || n_nh == 0) return summary;

  for (const auto metric : kAllCascadeMetrics) {
    std::vector<double> kh;
    std::vector<double> nh;
    kh.reserve(n_kh);
    nh.reserve(n_nh);
    for (const auto& c : cascades) {
      if (c.label == Label::kh) kh.push_back(metric_value(c.metrics, metric));
      if (c.label == Label::nh) nh.push_back(metric_value(c.metrics, metric));
    }
    summary.rows.push_back({std::string(subset), metric, compare_groups(kh, nh, alpha)});
  }
  return summary;
}

AccountFeatures normalize_account(const AccountCounts& counts) {
  AccountFeatures f;
  if (counts.posts > 0 && counts.span_seconds) {
    const double days = std::max(1.0, static_cast<double>(*counts.span_seconds) / kSecondsPerDay);
    f.posts_per_day = static_cast<double>(counts.posts) / days;
    f.followers_per_day = static_cast<double>(counts.followers) / days;
    f.followings_per_day = static_cast<double>(counts.followings) / days;
  }
  if (counts.posts > 0) {
    const double posts = static_cast<double>(counts.posts);
    auto per_post = [&](const std::optional<double>& total) -> std::optional<double> {
      if (!total) return std::nullopt;
      return *total / posts;
    };
    f.likes_per_post = per_post(counts.likes);
    f.dislikes_per_post = per_post(counts.dislikes);
    f.score_per_post = per_post(counts.score);
    f.replies_per_post = per_post(counts.replies);
    f.reposts_per_post = per_post(counts.reposts);
  }
  if (counts.followings > 0) {
    f.follower_following_ratio = static_cast<double>(counts.followers) / static_cast<double>(counts.followings);
  }
  return f;
}

std::vector<AccountCounts> account_counts(const Snapshot& snapshot) {
  std::vector<AccountCounts> out(snapshot.num_users());
  for (UserIndex u = 0; u < out.size(); ++u) {
    auto& c = out[u];
    c.posts = snapshot.post_count(u);
    c.followers = snapshot.followers(u).size();
    c.followings = snapshot.followees(u).size();
    c.span_seconds = snapshot.activity_span_seconds(u);
  }
  auto add = [](std::optional<double>& total, const std::optional<double>& v) {
    if (v) total = total.value_or(0.0) + *v;
  };
  for (PostIndex p = 0; p < snapshot.num_posts(); ++p) {
    const auto& e = snapshot.engagement(p);
    auto& c = out[snapshot.post(p).author];
    add(c.likes, e.likes);
    add(c.dislikes, e.dislikes);
    add(c.score, e.score);
    add(c.replies, e.replies);
    add(c.reposts, e.reposts);
  }
  return out;
}

AccountFeatures account_characteristics(const Snapshot& snapshot, UserIndex user) {
  if (user >= snapshot.num_users()) throw Error("user out of range");
  AccountCounts c;
  c.posts = snapshot.post_count(user);
  c.followers = snapshot.followers(user).size();
  c.followings = snapshot.followees(user).size();
  c.span_seconds = snapshot.activity_span_seconds(user);
  auto add = [](std::optional<double>& total, const std::optional<double>& v) {
    if (v) total = total.value_or(0.0) + *v;
  };
  for (PostIndex p = 0; p < snapshot.num_posts(); ++p) {
    if (snapshot.post(p).author != user) continue;
    const auto& e = snapshot.engagement(p);
    add(c.likes, e.likes);
    add(c.dislikes, e.dislikes);
    add(c.score, e.score);
    add(c.replies, e.replies);
    add(c.reposts, e.reposts);
  }
  return normalize_account(c);
}

std::string_view to_string(AccountFeature feature) {
  switch (feature) {
    case AccountFeature::posts: return "post";
    case AccountFeature::followers: return "follower";
    case AccountFeature::followings: return "following";
    case AccountFeature::likes: return "like";
    case AccountFeature::dislikes: return "dislike";
    case AccountFeature::score: return "score";
    case AccountFeature::replies: return "reply";
    case AccountFeature::reposts: return "repost";
    case AccountFeature::follower_following: return "F:F";
  }
  return "post";
}

std::optional<double> feature_value(const AccountFeatures& f, AccountFeature feature) {
  switch (feature) {
    case AccountFeature::posts: return f.posts_per_day;
    case AccountFeature::followers: return f.followers_per_day;
    case AccountFeature::followings: return f.followings_per_day;
    case AccountFeature::likes: return f.likes_per_post;
    case AccountFeature::dislikes: return f.dislikes_per_post;
    case AccountFeature::score: return f.score_per_post;
    case AccountFeature::replies: return f.replies_per_post;
    case AccountFeature::reposts: return f.reposts_per_post;
    case AccountFeature::follower_following: return f.follower_following_ratio;
  }
  return std::nullopt;
}

std::vector<AccountSummaryRow> summarize_accounts(std::span<const AccountFeatures> features,
                                                  std::span<const Label> labels, double alpha) {
  if (features.size() != labels.size()) throw Error("feature and label vectors differ in length");
  std::vector<AccountSummaryRow> rows;
  for (const auto feature : kAllAccountFeatures) {
    std::vector<double> kh;
    std::vector<double> nh;
    for (std::size_t u = 0; u < features.size(); ++u) {
      const auto v = feature_value(features[u], feature);
      if (!v) continue;
      if (labels[u] == Label::kh) kh.push_back(*v);
      if (labels[u] == Label::nh) nh.push_back(*v);
    }
    if (kh.empty() || nh.empty()) continue;
    rows.push_back({feature, compare_groups(kh, nh, alpha)});
  }
  return rows;
}

double directed_density(std::uint64_t nodes, std::uint64_t edges) {
  if (nodes < 2) return 0.0;
  const double n = static_cast<double>(nodes);
  return static_cast<double>(edges) / (n * (n - 1.0));
}

double reciprocity(std::span<const std::pair<UserIndex, UserIndex>> edges) {
  if (edges.empty()) return 0.0;
  std::vector<std::pair<UserIndex, UserIndex>> sorted(edges.begin(), edges.end());
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t mutual = 0;
  for (const auto& [a, b] : sorted) {
    if (std::binary_search(sorted.begin(), sorted.end(), std::make_pair(b, a))) ++mutual;
  }
  return static_cast<double>(mutual) / static_cast<double>(sorted.size());
}

NetworkCharacteristics network_characteristics(const Snapshot& snapshot, std::span<const Label> labels) {
  if (labels.size() != snapshot.num_users()) throw Error("label vector does not match user count");
  NetworkCharacteristics nc;
  std::uint64_t n_kh = 0;
  std::uint64_t n_nh = 0;
  for (const auto l : labels) {
    n_kh += l == Label::kh;
    n_nh += l == Label::nh;
  }
  if (n_kh == 0) throw Error("network characteristics: no KH users");
  if (n_nh == 0) throw Error("network characteristics: no NH users");

  std::uint64_t mutual_kh = 0;
  std::uint64_t mutual_nh = 0;
  std::uint64_t mutual_all = 0;
  for (UserIndex u = 0; u < labels.size(); ++u) {
    const Label lu = labels[u];
    if (lu == Label::unlabeled) continue;
    for (const UserIndex v : snapshot.followees(u)) {
      const Label lv = labels[v];
      if (lv == Label::unlabeled) continue;
      const bool mutual = snapshot.follows(v, u);
      mutual_all += mutual;
      if (lu == Label::kh && lv == Label::kh) {
        ++nc.kh_to_kh;
        mutual_kh += mutual;
      } else if (lu == Label::kh) {
        ++nc.kh_to_nh;
      } else if (lv == Label::kh) {
        ++nc.nh_to_kh;
      } else {
        ++nc.nh_to_nh;
        mutual_nh += mutual;
      }
    }
  }
  auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  nc.kh = {n_kh, nc.kh_to_kh, directed_density(n_kh, nc.kh_to_kh), ratio(mutual_kh, nc.kh_to_kh)};
  nc.nh = {n_nh, nc.nh_to_nh, directed_density(n_nh, nc.nh_to_nh), ratio(mutual_nh, nc.nh_to_nh)};
  const auto all_edges = nc.kh_to_kh + nc.kh_to_nh + nc.nh_to_kh + nc.nh_to_nh;
  nc.combined = {n_kh + n_nh, all_edges, directed_density(n_kh + n_nh, all_edges), ratio(mutual_all, all_edges)};

  const double kh = static_cast<double>(n_kh);
  const double nh = static_cast<double>(n_nh);
  nc.rate_kh_kh = nc.kh.density;
  nc.rate_nh_nh = nc.nh.density;
  nc.rate_kh_nh = static_cast<double>(nc.kh_to_nh) / (kh * nh);
  nc.rate_nh_kh = static_cast<double>(nc.nh_to_kh) / (kh * nh);
  if (nc.nh.density > 0.0) nc.density_ratio = nc.kh.density / nc.nh.density;
  if (nc.rate_kh_nh > 0.0) {
    nc.nh_kh_over_kh_nh = nc.rate_nh_kh / nc.rate_kh_nh;
    nc.kh_kh_over_kh_nh = nc.rate_kh_kh / nc.rate_kh_nh;
  }
  return nc;
}

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_ccdf_svg(std::ostream& out, std::string_view title, std::span<const CcdfSeries> series) {
  constexpr double kWidth = 480, kHeight = 360, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
  constexpr const char* kColors[] = {"#c0392b", "#2471a3", "#229954", "#7d3c98", "#d68910"};

  double max_x = 1.0;
  double min_p = 1.0;
  for (const auto& s : series) {
    for (const auto& pt : s.points) {
      if (pt.x < 0.0 || pt.p <= 0.0) continue;
      max_x = std::max(max_x, pt.x + 1.0);
      min_p = std::min(min_p, pt.p);
    }
  }
  const double x_decades = std::max(1.0, std::ceil(std::log10(max_x)));
  const double y_decades = std::max(1.0, std::ceil(-std::log10(min_p)));
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + plot_w * std::log10(x + 1.0) / x_decades; };
  auto py = [&](double p) { return kTop + plot_h * (-std::log10(p)) / y_decades; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"14\">" << xml_escape(title) << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = 0; d <= static_cast<int>(x_decades); ++d) {
    const double x = kLeft + plot_w * d / x_decades;
    out << "<text x=\"" << fmt("%.1f", x) << "\" y=\"" << kHeight - kBottom + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">1e" << d << "</text>\n";
  }
  for (int d = 0; d <= static_cast<int>(y_decades); ++d) {
    const double y = kTop + plot_h * d / y_decades;
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt("%.1f", y + 3)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">1e-" << d << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">x + 1</text>\n";
  out << "<text x=\"14\" y=\"" << kTop + plot_h / 2 << "\" transform=\"rotate(-90 14 " << kTop + plot_h / 2
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">P(X &gt;= x)</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& pt : series[i].points) {
      if (pt.x < 0.0 || pt.p <= 0.0) continue;
      out << fmt("%.2f", px(pt.x)) << ',' << fmt("%.2f", py(pt.p)) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << kWidth - kRight - 8 << "\" y=\"" << kTop + 16 + 14 * static_cast<double>(i)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">"
        << xml_escape(series[i].name) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace cascadelab
