#include "cascadelab/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "cascadelab/digest.hpp"
#include "cascadelab/parallel.hpp"

namespace cascadelab {
namespace fs = std::filesystem;
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lexicon_text(const Lexicon& lexicon) {
  std::string text;
  for (const auto& term : lexicon.terms()) text += term + "\n";
  return text;
}

Cell user_cell(const Snapshot& s, UserIndex u) {
  if (u == kNoIndex) return std::monostate{};
  return s.user_id(u);
}

Cell comparison_count(std::size_t n) { return static_cast<std::uint64_t>(n); }

std::vector<Cell> comparison_cells(const GroupComparison& c) {
  return {comparison_count(c.n_kh), comparison_count(c.n_nh), c.mean_kh, c.mean_nh, c.median_kh,
          c.median_nh, c.ks.d, c.ks.p_value, static_cast<std::int64_t>(c.significant ? 1 : 0)};
}

const std::vector<std::string> kComparisonColumns = {"n_kh",     "n_nh",      "mean_kh", "mean_nh",    "median_kh",
                                                     "median_nh", "ks_d", "p_value", "significant"};

nlohmann::ordered_json number_json(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.007199254740992e15) {
    return static_cast<std::int64_t>(v);
  }
  return v;
}

}  // namespace

fs::path default_out_dir() {
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return "cascade-lab-out";
}

std::map<std::string, bool> read_truth_csv(std::istream& in) {
  std::map<std::string, bool> truth;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const auto text = trim(line);
    if (text.empty()) continue;
    if (first) {
      first = false;
      if (text == "user_id,hateful") continue;
    }
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) throw Error("malformed truth line: " + std::string(text));
    const auto value = trim(text.substr(comma + 1));
    if (value != "0" && value != "1") throw Error("malformed truth line: " + std::string(text));
    truth[std::string(trim(text.substr(0, comma)))] = value == "1";
  }
  return truth;
}

Inputs load_inputs(const RunConfig& config) {
  Inputs inputs;
  if (!config.posts.empty()) {
    if (config.follows.empty()) throw Error("a follows file is required together with posts");
    const auto posts = ingest_posts(config.posts);
    const auto follows = ingest_follows(config.follows);
    inputs.snapshot = build_snapshot(posts, follows);
    inputs.digests.push_back({"posts", config.posts.string(), sha256_file(config.posts)});
    inputs.digests.push_back({"follows", config.follows.string(), sha256_file(config.follows)});
  } else if (!config.snapshot.empty()) {
    inputs.snapshot = Snapshot::load(config.snapshot);
    inputs.digests.push_back({"snapshot", config.snapshot.string(), sha256_file(config.snapshot)});
  } else {
    throw Error("no input given: pass posts and follows, a snapshot, or a bundle on stdin");
  }
  if (!config.truth.empty()) {
    std::ifstream in(config.truth);
    if (!in) throw Error("cannot open " + config.truth.string());
    inputs.truth = read_truth_csv(in);
    inputs.digests.push_back({"truth", config.truth.string(), sha256_file(config.truth)});
  }
  return inputs;
}

void write_bundle(std::ostream& out, const SynthCorpus& corpus, const GenConfig& config) {
  out << kBundleHeader << "\n#section generator\n";
  for (const auto& [key, value] : gen_options(config)) out << key << '=' << value << '\n';
  out << "#section posts\n";
  write_posts_jsonl(out, corpus.posts);
  out << "#section follows\n";
  write_follows_csv(out, corpus.follows);
  out << "#section truth\n";
  write_truth_csv(out, corpus);
}

Inputs read_bundle(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kBundleHeader) throw Error("input is not a cascade-lab bundle");

  enum Section { none = -1, posts = 0, follows = 1, truth = 2, generator = 3 };
  const std::array<std::string_view, 4> names = {"posts", "follows", "truth", "generator"};
  std::array<Sha256, 3> hashes;
  std::array<bool, 4> seen{};
  std::vector<std::pair<std::string, std::string>> settings;
  Section section = none;
  PostIngester post_ingester;
  FollowIngester follow_ingester;
  std::stringstream truth_text;

  while (std::getline(in, line)) {
    const auto text = trim(line);
    if (text.starts_with("#section ")) {
      const auto name = trim(text.substr(9));
      const auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) throw Error("unknown bundle section: " + std::string(name));
      section = static_cast<Section>(it - names.begin());
      if (seen[section]) throw Error("repeated bundle section: " + std::string(name));
      seen[section] = true;
      continue;
    }
    if (section == none) {
      if (text.empty()) continue;
      throw Error("bundle data before the first section");
    }
    if (section == generator) {
      if (text.empty()) continue;
      const auto eq = text.find('=');
      if (eq == std::string_view::npos) throw Error("malformed generator line in bundle");
      settings.emplace_back(text.substr(0, eq), text.substr(eq + 1));
      continue;
    }
    hashes[section].update(line);
    hashes[section].update("\n");
    switch (section) {
      case posts: post_ingester.add_line(line); break;
      case follows: follow_ingester.add_line(line); break;
      case truth: truth_text << line << '\n'; break;
      case none:
      case generator: break;
    }
  }
  if (in.bad()) throw Error("read error on bundle input");
  if (!seen[posts] || !seen[follows]) throw Error("bundle lacks a posts or follows section");

  Inputs inputs;
  inputs.snapshot = build_snapshot(std::move(post_ingester).finish(), std::move(follow_ingester).finish());
  for (int s = posts; s <= truth; ++s) {
    if (seen[s]) inputs.digests.push_back({std::string(names[s]), "bundle", hashes[s].hex_digest()});
  }
  if (seen[truth]) inputs.truth = read_truth_csv(truth_text);
  inputs.generator = std::move(settings);
  return inputs;
}

Recovery evaluate_recovery(const Snapshot& snapshot, std::span<const Label> labels,
                           const std::map<std::string, bool>& truth) {
  Recovery r;
  for (const auto& [id, hateful] : truth) r.planted += hateful ? 1 : 0;
  for (UserIndex u = 0; u < labels.size(); ++u) {
    if (labels[u] != Label::kh) continue;
    ++r.labeled_kh;
    const auto it = truth.find(snapshot.user_id(u));
    if (it != truth.end() && it->second) ++r.true_positive;
  }
  if (r.labeled_kh > 0) r.precision = static_cast<double>(r.true_positive) / static_cast<double>(r.labeled_kh);
  if (r.planted > 0) r.recall = static_cast<double>(r.true_positive) / static_cast<double>(r.planted);
  return r;
}

Pipeline::Pipeline(RunConfig config, Inputs inputs) : config_(std::move(config)), inputs_(std::move(inputs)) {
  if (config_.threads == 0) throw Error("thread count must be at least 1");
  fs::create_directories(config_.out_dir);
  // A manifest left over from an earlier run would certify artifacts this run has not yet written.
  fs::remove(config_.out_dir / "manifest.json");
}

const Lexicon& Pipeline::lexicon() {
  if (!lexicon_) {
    if (config_.lexicon.empty()) {
      lexicon_ = default_lexicon();
      inputs_.digests.push_back({"lexicon", "builtin", sha256_hex(lexicon_text(*lexicon_))});
    } else {
      lexicon_ = load_lexicon(config_.lexicon);
      inputs_.digests.push_back({"lexicon", config_.lexicon.string(), sha256_file(config_.lexicon)});
    }
  }
  return *lexicon_;
}

const Labeling& Pipeline::labeling() {
  if (labeling_) return *labeling_;
  const Snapshot& snap = snapshot();
  Labeling l;
  l.tags = tag_explicit_hate(snap, lexicon(), config_.threads);
  l.seeds = select_seed_users(l.tags, config_.seed_min_posts);
  if (l.seeds.empty()) warnings_.push_back("no seed users; every belief stays at 0");

  const auto repost = build_repost_network(snap, config_.repost);
  const auto network = build_belief_network(repost);
  DegrootOptions options;
  options.iterations = config_.iterations;
  options.clamp_seeds = config_.clamp_seeds;
  options.threads = config_.threads;
  if (config_.dump_trajectory) {
    options.on_iteration = [&l](std::uint32_t, std::span<const double> b) { l.trajectory.emplace_back(b.begin(), b.end()); };
  }
  l.state = run_degroot(network, l.seeds, options);
  l.state.stratum = stratify(l.state.belief, config_.strata);
  l.state.label = classify_users(l.state, snap, config_.classify);

  count("flagged_posts", static_cast<double>(l.tags.flagged_total));
  count("seed_users", static_cast<double>(l.seeds.size()));
  count("repost_events_skipped", static_cast<double>(repost.skipped_events()));
  count("kh_users", static_cast<double>(std::count(l.state.label.begin(), l.state.label.end(), Label::kh)));
  count("nh_users", static_cast<double>(std::count(l.state.label.begin(), l.state.label.end(), Label::nh)));
  labeling_ = std::move(l);
  return *labeling_;
}

std::span<const CascadeTree> Pipeline::trees() {
  if (trees_) return *trees_;
  const Snapshot& snap = snapshot();
  const auto labels = this->labels();
  std::vector<PostIndex> roots;
  for (PostIndex p = 0; p < snap.num_posts(); ++p) {
    const Post& post = snap.post(p);
    if (post.kind == PostKind::original && labels[post.author] != Label::unlabeled) roots.push_back(p);
  }
  trees_ = build_cascades(snap, roots, config_.threads);
  records_.resize(trees_->size());
  parallel_for(trees_->size(), config_.threads, [&](std::size_t i) {
    const auto& tree = (*trees_)[i];
    const UserIndex author = snap.post(tree.root_post).author;
    records_[i] = CascadeRecord{tree.root_post, author, labels[author], compute_metrics(tree)};
  });
  std::uint64_t removed = 0;
  for (const auto& r : records_) removed += r.metrics.removed;
  count("cascades", static_cast<double>(records_.size()));
  count("reposters_removed", static_cast<double>(removed));
  return *trees_;
}

std::span<const CascadeRecord> Pipeline::records() {
  trees();
  return records_;
}

bool Pipeline::in_filter(PostIndex root) const {
  return !config_.filter || in_subset(snapshot().post(root), *config_.filter);
}

void Pipeline::count(const std::string& key, double value) {
  for (auto& [k, v] : counts_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  counts_.emplace_back(key, value);
}

void Pipeline::emit_table(const std::string& stem, const Table& table) {
  const auto path = write_table_file(config_.out_dir, stem, table, config_.format);
  if (std::find(artifacts_.begin(), artifacts_.end(), path) == artifacts_.end()) artifacts_.push_back(path);
}

void Pipeline::emit_file(const std::string& name, const std::string& content) {
  const auto path = config_.out_dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw Error("write failed for " + path.string());
  if (std::find(artifacts_.begin(), artifacts_.end(), path) == artifacts_.end()) artifacts_.push_back(path);
}

void Pipeline::write_ingest() {
  const Snapshot& snap = snapshot();
  const auto& d = snap.diagnostics();
  Table t{{"diagnostic", "count"}, {}};
  const std::pair<const char*, std::uint64_t> rows[] = {
      {"input_records", d.input_records},       {"accepted", d.accepted},
      {"rejected", d.rejected()},               {"malformed_lines", d.malformed_lines},
      {"duplicate_post_ids", d.duplicate_post_ids}, {"dangling_parents", d.dangling_parents},
      {"cyclic_parents", d.cyclic_parents},     {"duplicate_edges", d.duplicate_edges},
      {"self_follows", d.self_follows},         {"users", snap.num_users()},
      {"posts", snap.num_posts()},              {"follow_edges", snap.num_follow_edges()}};
  for (const auto& [name, value] : rows) t.add_row({std::string(name), value});
  emit_table("ingest_diagnostics", t);

  std::ostringstream bin;
  snap.serialize(bin);
  emit_file("snapshot.bin", bin.str());

  count("users", static_cast<double>(snap.num_users()));
  count("posts", static_cast<double>(snap.num_posts()));
  count("follow_edges", static_cast<double>(snap.num_follow_edges()));
  count("rejected_records", static_cast<double>(d.rejected()));
}

void Pipeline::write_labels() {
  const Snapshot& snap = snapshot();
  const auto& l = labeling();
  std::vector<std::uint8_t> is_seed(snap.num_users(), 0);
  for (UserIndex u : l.seeds) is_seed[u] = 1;

  Table labels{{"user_id", "belief", "stratum", "label", "posts", "keyword_posts", "seed"}, {}};
  for (UserIndex u = 0; u < snap.num_users(); ++u) {
    labels.add_row({snap.user_id(u), l.state.belief[u], static_cast<std::uint64_t>(l.state.stratum[u]),
                    std::string(to_string(l.state.label[u])), static_cast<std::uint64_t>(snap.post_count(u)),
                    static_cast<std::uint64_t>(l.tags.keyword_posts[u]), static_cast<std::uint64_t>(is_seed[u])});
  }
  emit_table("labels", labels);

  Table strata{{"stratum", "lower", "upper", "users"}, {}};
  std::array<std::uint64_t, 4> per_stratum{};
  for (auto s : l.state.stratum) ++per_stratum[s];
  const auto& cuts = config_.strata.cuts;
  for (std::size_t s = 0; s < 4; ++s) {
    strata.add_row({static_cast<std::uint64_t>(s), s == 0 ? 0.0 : cuts[s - 1], s == 3 ? 1.0 : cuts[s], per_stratum[s]});
  }
  emit_table("strata", strata);

  if (config_.dump_trajectory) {
    Table traj{{"iteration", "user_id", "belief"}, {}};
    for (std::size_t it = 0; it < l.trajectory.size(); ++it) {
      for (UserIndex u = 0; u < snap.num_users(); ++u) {
        traj.add_row({static_cast<std::uint64_t>(it), snap.user_id(u), l.trajectory[it][u]});
      }
    }
    emit_table("beliefs_by_iteration", traj);
  }

  if (!inputs_.truth.empty()) {
    const auto r = evaluate_recovery(snap, l.state.label, inputs_.truth);
    Table rec{{"measure", "value"}, {}};
    rec.add_row({std::string("planted"), r.planted});
    rec.add_row({std::string("labeled_kh"), r.labeled_kh});
    rec.add_row({std::string("true_positive"), r.true_positive});
    rec.add_row({std::string("precision"), optional_cell(r.precision)});
    rec.add_row({std::string("recall"), optional_cell(r.recall)});
    emit_table("recovery", rec);
    if (r.precision) count("kh_precision", *r.precision);
  }
}

void Pipeline::write_cascades() {
  const Snapshot& snap = snapshot();
  const auto all = trees();
  Table nodes{{"root_post_id", "post_id", "user_id", "parent_user_id", "depth", "elapsed_s"}, {}};
  Table temporal{{"root_post_id", "metric", "value", "elapsed_s"}, {}};
  for (const auto& tree : all) {
    if (!in_filter(tree.root_post)) continue;
    const auto& root_id = snap.post_id(tree.root_post);
    const Timestamp t0 = tree.root().ts;
    for (const auto& n : tree.nodes) {
      const UserIndex parent_user = n.parent == kNoIndex ? kNoIndex : tree.nodes[n.parent].user;
      nodes.add_row({root_id, snap.post_id(n.post), snap.user_id(n.user), user_cell(snap, parent_user),
                     static_cast<std::uint64_t>(n.depth), static_cast<std::int64_t>(n.ts - t0)});
    }
    if (tree.size() < 2) continue;
    for (CascadeMetric m : kAllCascadeMetrics) {
      for (const auto& pt : temporal_profile(tree, m)) {
        temporal.add_row({root_id, std::string(to_string(m)), pt.value, static_cast<std::int64_t>(pt.elapsed)});
      }
    }
  }
  emit_table("cascade_trees", nodes);
  emit_table("temporal", temporal);
}

void Pipeline::write_metrics() {
  const Snapshot& snap = snapshot();
  Table t{{"root_post_id", "root_user_id", "label", "size", "depth", "breadth", "avg_depth", "virality", "removed"},
          {}};
  for (const auto& r : records()) {
    if (!in_filter(r.root_post)) continue;
    const auto& m = r.metrics;
    t.add_row({snap.post_id(r.root_post), snap.user_id(r.root_user), std::string(to_string(r.label)), m.size,
               static_cast<std::uint64_t>(m.depth), m.breadth, m.avg_depth, m.structural_virality,
               static_cast<std::uint64_t>(m.removed)});
  }
  emit_table("cascades", t);
}

void Pipeline::write_stats() {
  const Snapshot& snap = snapshot();
  const auto recs = records();
  const auto all_trees = trees();
  const auto labels = this->labels();

  std::vector<PostSubset> subsets;
  if (config_.filter) {
    subsets.push_back(*config_.filter);
  } else {
    subsets.assign(std::begin(kAllSubsets), std::end(kAllSubsets));
  }

  Table summary{{"subset", "metric"}, {}};
  summary.columns.insert(summary.columns.end(), kComparisonColumns.begin(), kComparisonColumns.end());
  for (PostSubset subset : subsets) {
    std::vector<CascadeRecord> chosen;
    for (const auto& r : recs) {
      if (in_subset(snap.post(r.root_post), subset)) chosen.push_back(r);
    }
    const auto s = summarize(chosen, to_string(subset), config_.cascade_alpha);
    for (const auto& w : s.warnings) warnings_.push_back(w);
    for (const auto& row : s.rows) {
      std::vector<Cell> cells{row.subset, std::string(to_string(row.metric))};
      const auto rest = comparison_cells(row.comparison);
      cells.insert(cells.end(), rest.begin(), rest.end());
      summary.add_row(std::move(cells));
    }
  }
  emit_table("cascade_summary", summary);

  // Distribution plots use the filtered population (all roots by default).
  Table ccdf_table{{"metric", "group", "x", "p"}, {}};
  for (CascadeMetric m : kAllCascadeMetrics) {
    std::vector<CcdfSeries> series;
    for (Label group : {Label::kh, Label::nh}) {
      std::vector<double> values;
      for (const auto& r : recs) {
        if (r.label == group && in_filter(r.root_post)) values.push_back(metric_value(r.metrics, m));
      }
      if (values.empty()) continue;
      CcdfSeries s{std::string(to_string(group)), ccdf(values)};
      for (const auto& pt : s.points) {
        ccdf_table.add_row({std::string(to_string(m)), s.name, pt.x, pt.p});
      }
      series.push_back(std::move(s));
    }
    if (config_.svg && !series.empty()) {
      std::ostringstream svg;
      write_ccdf_svg(svg, "CCDF of cascade " + std::string(to_string(m)), series);
      emit_file("ccdf_" + std::string(to_string(m)) + ".svg", svg.str());
    }
  }
  emit_table("ccdf", ccdf_table);

  Table early{{"root_label", "depth", "reposters", "kh_fraction", "nh_fraction"}, {}};
  for (Label group : {Label::kh, Label::nh}) {
    std::vector<CascadeTree> chosen;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (recs[i].label == group && in_filter(recs[i].root_post)) chosen.push_back(all_trees[i]);
    }
    for (const auto& d : early_adopter_profile(chosen, labels)) {
      early.add_row({std::string(to_string(group)), static_cast<std::uint64_t>(d.depth), d.reposters,
                     d.kh_fraction, d.nh_fraction});
    }
  }
  emit_table("early_adopters", early);

  // Mean time for cascades of each root class to first reach each level.
  std::map<std::tuple<Label, CascadeMetric, std::uint64_t>, std::vector<double>> reach;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (!in_filter(recs[i].root_post) || all_trees[i].size() < 2) continue;
    for (CascadeMetric m : {CascadeMetric::size, CascadeMetric::breadth, CascadeMetric::depth}) {
      for (const auto& pt : temporal_profile(all_trees[i], m)) {
        reach[{recs[i].label, m, static_cast<std::uint64_t>(pt.value)}].push_back(static_cast<double>(pt.elapsed));
      }
    }
  }
  Table tsum{{"root_label", "metric", "level", "cascades", "mean_elapsed_s", "median_elapsed_s"}, {}};
  for (const auto& [key, times] : reach) {
    const auto& [label, metric, level] = key;
    tsum.add_row({std::string(to_string(label)), std::string(to_string(metric)), level,
                  static_cast<std::uint64_t>(times.size()), mean_of(times), median_of(times)});
  }
  emit_table("temporal_summary", tsum);
}

void Pipeline::write_network() {
  const auto labels = this->labels();
  const bool has_kh = std::find(labels.begin(), labels.end(), Label::kh) != labels.end();
  const bool has_nh = std::find(labels.begin(), labels.end(), Label::nh) != labels.end();
  if (!has_kh || !has_nh) {
    warnings_.push_back("network characteristics skipped: a label class is empty");
    return;
  }
  const auto nc = network_characteristics(snapshot(), labels);

  Table net{{"subgraph", "nodes", "edges", "density", "reciprocity"}, {}};
  const std::pair<const char*, const SubgraphStats*> graphs[] = {{"KH+NH", &nc.combined}, {"KH", &nc.kh}, {"NH", &nc.nh}};
  for (const auto& [name, g] : graphs) net.add_row({std::string(name), g->nodes, g->edges, g->density, g->reciprocity});
  emit_table("network", net);

  Table rates{{"follower", "followee", "edges", "rate"}, {}};
  rates.add_row({std::string("KH"), std::string("KH"), nc.kh_to_kh, nc.rate_kh_kh});
  rates.add_row({std::string("KH"), std::string("NH"), nc.kh_to_nh, nc.rate_kh_nh});
  rates.add_row({std::string("NH"), std::string("KH"), nc.nh_to_kh, nc.rate_nh_kh});
  rates.add_row({std::string("NH"), std::string("NH"), nc.nh_to_nh, nc.rate_nh_nh});
  emit_table("follow_rates", rates);

  Table ratios{{"ratio", "value"}, {}};
  ratios.add_row({std::string("density_kh_over_nh"), optional_cell(nc.density_ratio)});
  ratios.add_row({std::string("rate_nh_kh_over_kh_nh"), optional_cell(nc.nh_kh_over_kh_nh)});
  ratios.add_row({std::string("rate_kh_kh_over_kh_nh"), optional_cell(nc.kh_kh_over_kh_nh)});
  emit_table("network_ratios", ratios);
  if (nc.density_ratio) count("density_ratio", *nc.density_ratio);
}

void Pipeline::write_accounts() {
  const Snapshot& snap = snapshot();
  const auto labels = this->labels();
  const auto counts = account_counts(snap);
  std::vector<AccountFeatures> features(counts.size());
  for (std::size_t u = 0; u < counts.size(); ++u) features[u] = normalize_account(counts[u]);

  Table t{{"user_id", "label"}, {}};
  for (AccountFeature f : kAllAccountFeatures) t.columns.emplace_back(to_string(f));
  for (UserIndex u = 0; u < snap.num_users(); ++u) {
    std::vector<Cell> row{snap.user_id(u), std::string(to_string(labels[u]))};
    for (AccountFeature f : kAllAccountFeatures) row.push_back(optional_cell(feature_value(features[u], f)));
    t.add_row(std::move(row));
  }
  emit_table("accounts", t);

  Table summary{{"feature"}, {}};
  summary.columns.insert(summary.columns.end(), kComparisonColumns.begin(), kComparisonColumns.end());
  for (const auto& row : summarize_accounts(features, labels, config_.account_alpha)) {
    std::vector<Cell> cells{std::string(to_string(row.feature))};
    const auto rest = comparison_cells(row.comparison);
    cells.insert(cells.end(), rest.begin(), rest.end());
    summary.add_row(std::move(cells));
  }
  emit_table("account_summary", summary);
}

void Pipeline::write_manifest() {
  using nlohmann::ordered_json;
  lexicon();  // the lexicon digest is part of every manifest

  auto path_or_null = [](const fs::path& p) -> ordered_json {
    if (p.empty()) return nullptr;
    return p.string();
  };
  ordered_json params;
  params["posts"] = path_or_null(config_.posts);
  params["follows"] = path_or_null(config_.follows);
  params["lexicon"] = path_or_null(config_.lexicon);
  params["snapshot"] = path_or_null(config_.snapshot);
  params["truth"] = path_or_null(config_.truth);
  params["iterations"] = config_.iterations;
  params["strata"] = config_.strata.cuts;
  params["hate_threshold"] = config_.classify.hate_threshold;
  params["nonhate_threshold"] = config_.classify.nonhate_threshold;
  params["min_posts"] = config_.classify.min_posts;
  params["seed_min_posts"] = config_.seed_min_posts;
  params["clamp_seeds"] = config_.clamp_seeds;
  params["count_replies"] = config_.repost.count_replies;
  params["count_quotes"] = config_.repost.count_quotes;
  params["filter"] = config_.filter ? ordered_json(std::string(to_string(*config_.filter))) : ordered_json(nullptr);
  params["cascade_alpha"] = config_.cascade_alpha;
  params["account_alpha"] = config_.account_alpha;
  params["seed"] = config_.seed;
  params["format"] = config_.format == TableFormat::csv ? "csv" : "json";
  params["svg"] = config_.svg;
  params["dump_trajectory"] = config_.dump_trajectory;

  ordered_json m;
  m["tool"] = "cascade-lab";
  m["manifest_version"] = 1;
  m["parameters"] = std::move(params);
  if (!inputs_.generator.empty()) {
    m["generator"] = ordered_json::object();
    for (const auto& [key, value] : inputs_.generator) m["generator"][key] = value;
  }
  m["inputs"] = ordered_json::array();
  for (const auto& d : inputs_.digests) {
    m["inputs"].push_back({{"name", d.name}, {"origin", d.origin}, {"sha256", d.sha256}});
  }
  m["counts"] = ordered_json::object();
  for (const auto& [key, value] : counts_) m["counts"][key] = number_json(value);
  m["artifacts"] = ordered_json::array();
  for (const auto& p : artifacts_) {
    m["artifacts"].push_back(
        {{"file", p.filename().string()}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}});
  }
  m["warnings"] = warnings_;

  const auto final_path = config_.out_dir / "manifest.json";
  const auto tmp_path = config_.out_dir / "manifest.json.tmp";
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp_path.string());
    out << m.dump(2) << '\n';
    if (!out) throw Error("write failed for " + tmp_path.string());
  }
  fs::rename(tmp_path, final_path);
}

void Pipeline::run_all() {
  write_ingest();
  write_labels();
  write_cascades();
  write_metrics();
  write_stats();
  write_network();
  write_accounts();
  write_manifest();
}

}  // namespace cascadelab
