#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cascadelab/belief.hpp"
#include "cascadelab/cascade.hpp"
#include "cascadelab/lexicon.hpp"
#include "cascadelab/snapshot.hpp"
#include "cascadelab/stats.hpp"
#include "cascadelab/synthgen.hpp"
#include "cascadelab/table.hpp"

namespace cascadelab {

inline constexpr const char* kOutDirEnv = "CASCADE_LAB_OUT";
inline constexpr const char* kBundleHeader = "#cascade-lab-bundle v1";

struct RunConfig {
  std::filesystem::path posts;
  std::filesystem::path follows;
  std::filesystem::path lexicon;   // empty: built-in lexicon
  std::filesystem::path snapshot;  // load this instead of posts/follows
  std::filesystem::path truth;     // optional `user_id,hateful` ground truth
  std::filesystem::path out_dir = "cascade-lab-out";

  std::uint32_t iterations = 5;
  StrataBounds strata;
  ClassifyOptions classify;
  std::uint32_t seed_min_posts = 10;
  bool clamp_seeds = false;
  RepostNetworkOptions repost;
  std::optional<PostSubset> filter;  // none: every subset where applicable
  double cascade_alpha = 0.01;
  double account_alpha = 0.001;

  unsigned threads = 1;
  std::uint64_t seed = 1;
  TableFormat format = TableFormat::csv;
  bool svg = true;
  bool dump_trajectory = false;
};

/// Default output directory: $CASCADE_LAB_OUT if set, else "cascade-lab-out".
std::filesystem::path default_out_dir();

struct InputDigest {
  std::string name;
  std::string origin;
  std::string sha256;
};

struct Inputs {
  Snapshot snapshot;
  std::vector<InputDigest> digests;
  std::map<std::string, bool> truth;  // external user id -> planted hateful
  std::vector<std::pair<std::string, std::string>> generator;  // settings echoed from a bundle
};

/// Reads posts/follows (or the snapshot cache) and the optional truth file.
Inputs load_inputs(const RunConfig& config);

/// Self-contained stream of a synthetic corpus: generator settings, posts,
/// follows and truth sections after a header line.
void write_bundle(std::ostream& out, const SynthCorpus& corpus, const GenConfig& config);
Inputs read_bundle(std::istream& in);

std::map<std::string, bool> read_truth_csv(std::istream& in);

struct Labeling {
  ExplicitHateTags tags;
  std::vector<UserIndex> seeds;
  BeliefState state;  // stratum and label filled
  std::vector<std::vector<double>> trajectory;  // only with dump_trajectory
};

struct Recovery {
  std::uint64_t planted = 0;
  std::uint64_t labeled_kh = 0;
  std::uint64_t true_positive = 0;
  std::optional<double> precision;
  std::optional<double> recall;
};

Recovery evaluate_recovery(const Snapshot& snapshot, std::span<const Label> labels,
                           const std::map<std::string, bool>& truth);

/// Lazily computed pipeline stages over one snapshot. Each write_* call
/// emits one group of artifacts into the output directory and records it
/// for the manifest.
class Pipeline {
 public:
  Pipeline(RunConfig config, Inputs inputs);

  const RunConfig& config() const { return config_; }
  const Snapshot& snapshot() const { return inputs_.snapshot; }
  const Lexicon& lexicon();
  const Labeling& labeling();
  std::span<const Label> labels() { return labeling().state.label; }
  /// Cascades rooted at every original post of a KH or NH user, in post order.
  std::span<const CascadeTree> trees();
  std::span<const CascadeRecord> records();

  void write_ingest();
  void write_labels();
  void write_cascades();
  void write_metrics();
  void write_stats();
  void write_network();
  void write_accounts();
  /// Always written last; lists every artifact emitted so far with its digest.
  void write_manifest();

  void run_all();

  const std::vector<std::filesystem::path>& artifacts() const { return artifacts_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  void emit_table(const std::string& stem, const Table& table);
  void emit_file(const std::string& name, const std::string& content);
  void count(const std::string& key, double value);
  bool in_filter(PostIndex root) const;

  RunConfig config_;
  Inputs inputs_;
  std::optional<Lexicon> lexicon_;
  std::optional<Labeling> labeling_;
  std::optional<std::vector<CascadeTree>> trees_;
  std::vector<CascadeRecord> records_;
  std::vector<std::filesystem::path> artifacts_;
  std::vector<std::string> warnings_;
  std::vector<std::pair<std::string, double>> counts_;
};

}  // namespace cascadelab
