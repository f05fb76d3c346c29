#include "cascadelab/synthgen.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <tuple>
#include <unordered_set>

#include <json.hpp>

#include "cascadelab/lexicon.hpp"
#include "cascadelab/table.hpp"

namespace cascadelab {
namespace {

// std::mt19937_64 is fully specified by the standard; the distributions are
// not, so the transforms below are local to keep output identical across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }
  std::uint64_t geometric_mean(double mean) {
    if (mean <= 0.0) return 0;
    const double p = 1.0 / (1.0 + mean);
    return static_cast<std::uint64_t>(std::floor(std::log1p(-uniform()) / std::log1p(-p)));
  }

 private:
  std::mt19937_64 engine_;
};

constexpr std::string_view kBenignWords[] = {
    "the",    "news",  "today",  "really", "think",   "people", "great",  "video",  "morning", "weather",
    "game",   "coffee", "music", "watch",  "look",    "story",  "world",  "city",   "local",   "market",
    "family", "friend", "happy", "long",   "week",    "free",   "speech", "right",  "media",   "post",
    "photo",  "share",  "new",   "read",   "article", "thanks", "good",   "night",  "work",    "time"};

enum class EventType : std::uint8_t { original, reply, quote, repost };

struct PendingEvent {
  std::int64_t ts;
  std::uint32_t user;
  std::uint32_t seq;
  EventType type;
};

std::string make_body(Rng& rng, const std::vector<std::string>& terms, bool with_term) {
  const auto words = 4 + rng.below(8);
  const auto term_at = with_term ? rng.below(words + 1) : words + 1;
  std::string body;
  for (std::uint64_t i = 0; i <= words; ++i) {
    if (i == term_at) {
      if (!body.empty()) body += ' ';
      body += terms[rng.below(terms.size())];
    }
    if (i == words) break;
    if (!body.empty()) body += ' ';
    body += kBenignWords[rng.below(std::size(kBenignWords))];
  }
  return body;
}

double parse_double(std::string_view key, std::string_view value) {
  double v = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    throw Error("bad value for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view value) {
  Int v{};
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    throw Error("bad value for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

void set_gen_option(GenConfig& c, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "n_users") c.n_users = parse_int<std::uint32_t>(key, value);
  else if (key == "hate_fraction") c.hate_fraction = parse_double(key, value);
  else if (key == "homophily") c.homophily = parse_double(key, value);
  else if (key == "mean_follows") c.mean_follows = parse_double(key, value);
  else if (key == "hateful_posts_per_day") c.hateful.posts_per_day = parse_double(key, value);
  else if (key == "hateful_reposts_per_day") c.hateful.reposts_per_day = parse_double(key, value);
  else if (key == "hateful_likes_per_post") c.hateful.likes_per_post = parse_double(key, value);
  else if (key == "hateful_dislikes_per_post") c.hateful.dislikes_per_post = parse_double(key, value);
  else if (key == "normal_posts_per_day") c.normal.posts_per_day = parse_double(key, value);
  else if (key == "normal_reposts_per_day") c.normal.reposts_per_day = parse_double(key, value);
  else if (key == "normal_likes_per_post") c.normal.likes_per_post = parse_double(key, value);
  else if (key == "normal_dislikes_per_post") c.normal.dislikes_per_post = parse_double(key, value);
  else if (key == "reply_fraction") c.reply_fraction = parse_double(key, value);
  else if (key == "quote_fraction") c.quote_fraction = parse_double(key, value);
  else if (key == "keyword_probability") c.keyword_probability = parse_double(key, value);
  else if (key == "attachment_probability") c.attachment_probability = parse_double(key, value);
  else if (key == "group_probability") c.group_probability = parse_double(key, value);
  else if (key == "topic_probability") c.topic_probability = parse_double(key, value);
  else if (key == "duration_days") c.duration_days = parse_double(key, value);
  else if (key == "recency_days") c.recency_days = parse_double(key, value);
  else if (key == "recent_posts") c.recent_posts = parse_int<std::uint32_t>(key, value);
  else if (key == "start_ts") c.start_ts = parse_int<std::int64_t>(key, value);
  else if (key == "seed") c.seed = parse_int<std::uint64_t>(key, value);
  else throw Error("unknown generator option '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, std::string>> gen_options(const GenConfig& c) {
  auto d = [](double v) { return format_double(v); };
  return {{"n_users", std::to_string(c.n_users)},
          {"hate_fraction", d(c.hate_fraction)},
          {"homophily", d(c.homophily)},
          {"mean_follows", d(c.mean_follows)},
          {"hateful_posts_per_day", d(c.hateful.posts_per_day)},
          {"hateful_reposts_per_day", d(c.hateful.reposts_per_day)},
          {"hateful_likes_per_post", d(c.hateful.likes_per_post)},
          {"hateful_dislikes_per_post", d(c.hateful.dislikes_per_post)},
          {"normal_posts_per_day", d(c.normal.posts_per_day)},
          {"normal_reposts_per_day", d(c.normal.reposts_per_day)},
          {"normal_likes_per_post", d(c.normal.likes_per_post)},
          {"normal_dislikes_per_post", d(c.normal.dislikes_per_post)},
          {"reply_fraction", d(c.reply_fraction)},
          {"quote_fraction", d(c.quote_fraction)},
          {"keyword_probability", d(c.keyword_probability)},
          {"attachment_probability", d(c.attachment_probability)},
          {"group_probability", d(c.group_probability)},
          {"topic_probability", d(c.topic_probability)},
          {"duration_days", d(c.duration_days)},
          {"recency_days", d(c.recency_days)},
          {"recent_posts", std::to_string(c.recent_posts)},
          {"start_ts", std::to_string(c.start_ts)},
          {"seed", std::to_string(c.seed)}};
}

void read_gen_config(std::istream& in, GenConfig& config) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text(line);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty() || text.front() == '[') continue;  // tolerate INI/TOML section headers
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw Error("config line " + std::to_string(line_no) + ": expected key=value");
    auto value = trim(text.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    set_gen_option(config, trim(text.substr(0, eq)), value);
  }
}

void read_gen_config(const std::filesystem::path& path, GenConfig& config) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  read_gen_config(in, config);
}

void validate(const GenConfig& c) {
  auto probability = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(std::string(name) + " must lie in [0,1]");
  };
  if (c.n_users < 2) throw Error("n_users must be at least 2");
  if (!(c.hate_fraction > 0.0 && c.hate_fraction < 1.0)) throw Error("hate_fraction must lie in (0,1)");
  const auto n_hate = static_cast<std::uint32_t>(std::llround(c.hate_fraction * c.n_users));
  if (n_hate == 0 || n_hate >= c.n_users) throw Error("hate_fraction leaves one class empty");
  probability(c.homophily, "homophily");
  if (!(c.mean_follows > 0.0)) throw Error("mean_follows must be positive");
  if (c.mean_follows >= static_cast<double>(c.n_users)) throw Error("mean_follows must be below n_users");
  for (const auto* r : {&c.hateful, &c.normal}) {
    if (!(r->posts_per_day > 0.0) || !(r->reposts_per_day > 0.0)) throw Error("posting rates must be positive");
    if (r->likes_per_post < 0.0 || r->dislikes_per_post < 0.0) throw Error("engagement rates must be non-negative");
  }
  probability(c.reply_fraction, "reply_fraction");
  probability(c.quote_fraction, "quote_fraction");
  if (c.reply_fraction + c.quote_fraction > 1.0) throw Error("reply_fraction + quote_fraction exceeds 1");
  probability(c.keyword_probability, "keyword_probability");
  probability(c.attachment_probability, "attachment_probability");
  probability(c.group_probability, "group_probability");
  probability(c.topic_probability, "topic_probability");
  if (!(c.duration_days > 0.0)) throw Error("duration_days must be positive");
  if (!(c.recency_days > 0.0)) throw Error("recency_days must be positive");
  if (c.recent_posts == 0) throw Error("recent_posts must be positive");
  if (c.start_ts < 0) throw Error("start_ts must be non-negative");
}

SynthCorpus generate(const GenConfig& config) {
  validate(config);
  Rng rng(config.seed);
  const std::uint32_t n = config.n_users;
  std::vector<std::string> terms = config.hate_terms;
  if (terms.empty()) terms = default_lexicon().terms();

  SynthCorpus corpus;
  corpus.user_ids.resize(n);
  const int width = static_cast<int>(std::to_string(n - 1).size());
  for (std::uint32_t u = 0; u < n; ++u) {
    auto digits = std::to_string(u);
    corpus.user_ids[u] = "u" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
  }

  // Plant the hateful class on a random subset.
  const auto n_hate = static_cast<std::uint32_t>(std::llround(config.hate_fraction * n));
  std::vector<std::uint32_t> perm(n);
  for (std::uint32_t u = 0; u < n; ++u) perm[u] = u;
  for (std::uint32_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
  corpus.hateful.assign(n, 0);
  for (std::uint32_t i = 0; i < n_hate; ++i) corpus.hateful[perm[i]] = 1;

  // Follow graph: class-homophilous preferential attachment. Each class keeps
  // an urn holding every member once plus once per follower gained.
  std::array<std::vector<std::uint32_t>, 2> urn;
  for (std::uint32_t u = 0; u < n; ++u) urn[corpus.hateful[u]].push_back(u);
  std::vector<std::vector<std::uint32_t>> followees(n);
  std::vector<std::uint32_t> order(n);
  for (std::uint32_t u = 0; u < n; ++u) order[u] = u;
  for (std::uint32_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  const std::uint64_t max_out = std::max<std::uint64_t>(1, n / 2);
  for (const auto u : order) {
    const auto own = corpus.hateful[u];
    const auto want = std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::llround(rng.exponential(config.mean_follows))), 1, max_out);
    std::unordered_set<std::uint32_t> chosen;
    for (std::uint64_t k = 0; k < want; ++k) {
      std::uint8_t cls = rng.bernoulli(config.homophily) ? own : static_cast<std::uint8_t>(1 - own);
      if (urn[cls].size() <= 1 && cls == own) cls = static_cast<std::uint8_t>(1 - own);
      for (int attempt = 0; attempt < 20; ++attempt) {
        const auto v = urn[cls][rng.below(urn[cls].size())];
        if (v == u || chosen.contains(v)) continue;
        chosen.insert(v);
        followees[u].push_back(v);
        urn[cls].push_back(v);
        break;
      }
    }
  }
  for (std::uint32_t u = 0; u < n; ++u) {
    std::sort(followees[u].begin(), followees[u].end());
    for (const auto v : followees[u]) corpus.follows.push_back({corpus.user_ids[u], corpus.user_ids[v]});
  }

  // Poisson event times per user, integer seconds strictly increasing per user.
  const double duration_s = config.duration_days * 86400.0;
  std::vector<PendingEvent> events;
  for (std::uint32_t u = 0; u < n; ++u) {
    const auto& rates = corpus.hateful[u] ? config.hateful : config.normal;
    const double rate = (rates.posts_per_day + rates.reposts_per_day) / 86400.0;
    const double repost_share = rates.reposts_per_day / (rates.posts_per_day + rates.reposts_per_day);
    double t = rng.exponential(1.0 / rate);
    std::int64_t last = -1;
    std::uint32_t seq = 0;
    while (t < duration_s) {
      auto ts = std::max<std::int64_t>(static_cast<std::int64_t>(t), last + 1);
      last = ts;
      EventType type = EventType::repost;
      if (!rng.bernoulli(repost_share)) {
        const double r = rng.uniform();
        type = r < config.reply_fraction                           ? EventType::reply
               : r < config.reply_fraction + config.quote_fraction ? EventType::quote
                                                                   : EventType::original;
      }
      events.push_back({config.start_ts + ts, u, seq++, type});
      t += rng.exponential(1.0 / rate);
    }
  }
  std::sort(events.begin(), events.end(), [](const PendingEvent& a, const PendingEvent& b) {
    return std::tie(a.ts, a.user, a.seq) < std::tie(b.ts, b.user, b.seq);
  });

  // Replay in time order. Each user exposes its last few shareable posts
  // (originals and reposts) to followers.
  struct Shared {
    std::uint32_t post;
    std::uint32_t source;  // original post index
  };
  std::vector<std::vector<Shared>> recent(n);
  std::vector<std::uint32_t> post_author;
  std::vector<std::uint32_t> reply_counts;
  std::vector<std::uint32_t> repost_counts;
  std::unordered_set<std::uint64_t> reposted;  // (user << 32) | source
  const auto recency_s = static_cast<std::int64_t>(config.recency_days * 86400.0);
  std::vector<Shared> same_pool;
  std::vector<Shared> other_pool;

  auto next_id = [&] { return "p" + std::to_string(corpus.posts.size()); };
  auto push_recent = [&](std::uint32_t u, Shared s) {
    auto& ring = recent[u];
    if (ring.size() == config.recent_posts) ring.erase(ring.begin());
    ring.push_back(s);
  };

  for (const auto& ev : events) {
    const auto u = ev.user;
    const auto own = corpus.hateful[u];
    EventType type = ev.type;

    std::optional<Shared> target;
    if (type != EventType::original) {
      same_pool.clear();
      other_pool.clear();
      for (const auto v : followees[u]) {
        for (const auto& s : recent[v]) {
          const auto& p = corpus.posts[s.post];
          if (p.ts >= ev.ts || ev.ts - p.ts > recency_s) continue;
          const auto src_author = post_author[s.source];
          if (src_author == u) continue;
          if (type == EventType::repost && reposted.contains((std::uint64_t{u} << 32) | s.source)) continue;
          (corpus.hateful[src_author] == own ? same_pool : other_pool).push_back(s);
        }
      }
      const bool prefer_same = rng.bernoulli(config.homophily);
      auto* pool = prefer_same ? &same_pool : &other_pool;
      if (pool->empty()) pool = prefer_same ? &other_pool : &same_pool;
      if (!pool->empty()) target = (*pool)[rng.below(pool->size())];
    }
    if (type == EventType::repost && !target) continue;
    if (!target) type = EventType::original;

    PostEvent post;
    post.post_id = next_id();
    post.user_id = corpus.user_ids[u];
    post.ts = ev.ts;
    const auto index = static_cast<std::uint32_t>(corpus.posts.size());
    const auto& rates = own ? config.hateful : config.normal;
    switch (type) {
      case EventType::repost:
        post.kind = PostKind::repost;
        post.parent_id = corpus.posts[target->post].post_id;
        reposted.insert((std::uint64_t{u} << 32) | target->source);
        ++repost_counts[target->post];
        break;
      case EventType::reply:
      case EventType::quote:
        post.kind = type == EventType::reply ? PostKind::reply : PostKind::quote;
        post.parent_id = corpus.posts[target->post].post_id;
        if (type == EventType::reply) ++reply_counts[target->post];
        post.body = make_body(rng, terms, false);
        break;
      case EventType::original:
        post.kind = PostKind::original;
        post.body = make_body(rng, terms, own && rng.bernoulli(config.keyword_probability));
        break;
    }
    if (post.kind != PostKind::repost) {
      post.attachment = rng.bernoulli(config.attachment_probability);
      if (rng.bernoulli(config.group_probability)) post.group_id = "g" + std::to_string(rng.below(20));
      if (rng.bernoulli(config.topic_probability)) post.topic_id = "t" + std::to_string(rng.below(50));
    }
    const auto likes = rng.geometric_mean(rates.likes_per_post);
    const auto dislikes = rng.geometric_mean(rates.dislikes_per_post);
    post.engagement.likes = static_cast<double>(likes);
    post.engagement.dislikes = static_cast<double>(dislikes);
    post.engagement.score = static_cast<double>(likes) - static_cast<double>(dislikes);

    corpus.posts.push_back(std::move(post));
    post_author.push_back(u);
    reply_counts.push_back(0);
    repost_counts.push_back(0);
    if (type == EventType::original) push_recent(u, {index, index});
    if (type == EventType::repost) push_recent(u, {index, target->source});
  }
  for (std::size_t p = 0; p < corpus.posts.size(); ++p) {
    corpus.posts[p].engagement.replies = reply_counts[p];
    corpus.posts[p].engagement.reposts = repost_counts[p];
  }
  return corpus;
}

void write_posts_jsonl(std::ostream& out, std::span<const PostEvent> posts) {
  for (const auto& p : posts) {
    nlohmann::ordered_json obj;
    obj["post_id"] = p.post_id;
    obj["user_id"] = p.user_id;
    obj["ts"] = p.ts;
    obj["kind"] = std::string(to_string(p.kind));
    if (p.parent_id) obj["parent_id"] = *p.parent_id;
    obj["attachment"] = p.attachment;
    if (p.group_id) obj["group_id"] = *p.group_id;
    if (p.topic_id) obj["topic_id"] = *p.topic_id;
    if (p.body) obj["body"] = *p.body;
    auto put = [&](const char* key, const std::optional<double>& v) {
      if (!v) return;
      if (*v == std::floor(*v) && std::abs(*v) < 9e15) {
        obj[key] = static_cast<std::int64_t>(*v);
      } else {
        obj[key] = *v;
      }
    };
    put("likes", p.engagement.likes);
    put("dislikes", p.engagement.dislikes);
    put("score", p.engagement.score);
    put("reply_count", p.engagement.replies);
    put("repost_count", p.engagement.reposts);
    out << obj.dump() << '\n';
  }
}

void write_follows_csv(std::ostream& out, std::span<const FollowEdge> follows) {
  out << "follower_id,followee_id\n";
  for (const auto& e : follows) out << e.follower << ',' << e.followee << '\n';
}

void write_truth_csv(std::ostream& out, const SynthCorpus& corpus) {
  out << "user_id,hateful\n";
  for (std::size_t u = 0; u < corpus.user_ids.size(); ++u) {
    out << corpus.user_ids[u] << ',' << static_cast<int>(corpus.hateful[u]) << '\n';
  }
}

}  // namespace cascadelab
