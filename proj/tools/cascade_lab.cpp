#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cascadelab/pipeline.hpp"
#include "cascadelab/synthgen.hpp"

namespace fs = std::filesystem;
using namespace cascadelab;

namespace {

struct SynthArgs {
  fs::path config_file;
  std::vector<std::string> settings;  // key=value
  fs::path out;
  std::optional<std::uint32_t> n_users;
  std::optional<double> hate_fraction;
  std::optional<double> homophily;
  std::optional<double> duration_days;
  std::optional<std::uint64_t> seed;
};

std::string one_line(std::string text) {
  for (auto& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  body(out);
  if (!out) throw Error("write failed for " + path.string());
}

void run_synth(const SynthArgs& args) {
  GenConfig config;
  if (!args.config_file.empty()) read_gen_config(args.config_file, config);
  if (args.n_users) config.n_users = *args.n_users;
  if (args.hate_fraction) config.hate_fraction = *args.hate_fraction;
  if (args.homophily) config.homophily = *args.homophily;
  if (args.duration_days) config.duration_days = *args.duration_days;
  for (const auto& kv : args.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error("expected key=value, got '" + kv + "'");
    set_gen_option(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed) config.seed = *args.seed;
  const auto corpus = generate(config);

  if (args.out.empty()) {
    write_bundle(std::cout, corpus, config);
    std::cout.flush();
    if (!std::cout) throw Error("write failed on stdout");
    return;
  }
  fs::create_directories(args.out);
  write_file(args.out / "posts.jsonl", [&](std::ostream& o) { write_posts_jsonl(o, corpus.posts); });
  write_file(args.out / "follows.csv", [&](std::ostream& o) { write_follows_csv(o, corpus.follows); });
  write_file(args.out / "truth.csv", [&](std::ostream& o) { write_truth_csv(o, corpus); });
  write_file(args.out / "generator.conf", [&](std::ostream& o) {
    for (const auto& [key, value] : gen_options(config)) o << key << " = " << value << '\n';
  });
  std::cerr << "wrote " << corpus.posts.size() << " posts, " << corpus.follows.size() << " follows to "
            << args.out.string() << "\n";
}

Inputs gather_inputs(const RunConfig& config) {
  if (config.posts.empty() && config.snapshot.empty()) return read_bundle(std::cin);
  return load_inputs(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascade reconstruction, belief-propagation labelling and diffusion statistics."};
  app.set_config("--config", "", "INI/TOML file of option values; flags given on the command line win");
  app.require_subcommand(1);

  RunConfig config;
  config.out_dir = default_out_dir();
  std::string format = "csv";
  std::string filter;
  std::vector<double> strata;
  bool no_svg = false;

  auto add_pipeline_options = [&](CLI::App* cmd) {
    cmd->add_option("--posts", config.posts, "Posts JSONL file");
    cmd->add_option("--follows", config.follows, "Follows CSV file");
    cmd->add_option("--snapshot", config.snapshot, "Binary snapshot written by an earlier ingest");
    cmd->add_option("--lexicon", config.lexicon, "Hate lexicon, one term per line (default: built-in)");
    cmd->add_option("--truth", config.truth, "Ground-truth user_id,hateful CSV for recovery scoring");
    cmd->add_option("--out", config.out_dir, std::string("Output directory (default: $") + kOutDirEnv + " or cascade-lab-out)");
    cmd->add_option("--iterations", config.iterations, "DeGroot iterations")->capture_default_str();
    cmd->add_option("--strata", strata, "Three ascending stratum cut points")->expected(3)->delimiter(',');
    cmd->add_option("--hate-threshold", config.classify.hate_threshold, "Belief at or above which a user is KH")
        ->capture_default_str();
    cmd->add_option("--nonhate-threshold", config.classify.nonhate_threshold, "Belief below which a user is NH")
        ->capture_default_str();
    cmd->add_option("--min-posts", config.classify.min_posts, "Posts required for a KH/NH label")
        ->capture_default_str();
    cmd->add_option("--seed-min-posts", config.seed_min_posts, "Keyword posts required for a seed user")
        ->capture_default_str();
    cmd->add_flag("--clamp-seeds", config.clamp_seeds, "Hold seed beliefs at 1 during propagation");
    cmd->add_flag("--count-replies", config.repost.count_replies, "Count replies as reposts of the parent's author");
    cmd->add_flag("--count-quotes", config.repost.count_quotes, "Count quotes as reposts of the parent's author");
    cmd->add_option("--filter", filter, "Root subset: all, attachments, in_group, in_topic");
    cmd->add_option("--cascade-alpha", config.cascade_alpha, "Significance level for cascade comparisons")
        ->capture_default_str();
    cmd->add_option("--account-alpha", config.account_alpha, "Significance level for account comparisons")
        ->capture_default_str();
    cmd->add_option("--threads", config.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--seed", config.seed, "Random seed")->capture_default_str();
    cmd->add_option("--format", format, "Tabular artifact format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("--no-svg", no_svg, "Skip CCDF plots");
    cmd->add_flag("--dump-trajectory", config.dump_trajectory, "Write per-iteration beliefs");
  };

  struct Stage {
    const char* name;
    const char* help;
    void (*action)(Pipeline&);
  };
  const Stage stages[] = {
      {"ingest", "Validate inputs and write diagnostics plus a snapshot", [](Pipeline& p) { p.write_ingest(); }},
      {"label", "Tag, seed, propagate beliefs and classify users", [](Pipeline& p) { p.write_labels(); }},
      {"cascades", "Reconstruct influence trees and temporal series", [](Pipeline& p) { p.write_cascades(); }},
      {"metrics", "Per-cascade size, depth, breadth and virality", [](Pipeline& p) { p.write_metrics(); }},
      {"stats", "KH vs NH cascade comparisons, CCDFs, early adopters", [](Pipeline& p) { p.write_stats(); }},
      {"network", "Follow-graph density, reciprocity and cross-class rates", [](Pipeline& p) { p.write_network(); }},
      {"accounts", "Normalized account characteristics", [](Pipeline& p) { p.write_accounts(); }},
      {"report", "Every statistics artifact (stats, network, accounts)",
       [](Pipeline& p) {
         p.write_stats();
         p.write_network();
         p.write_accounts();
       }},
      {"run", "Whole pipeline", [](Pipeline& p) {
         p.write_ingest();
         p.write_labels();
         p.write_cascades();
         p.write_metrics();
         p.write_stats();
         p.write_network();
         p.write_accounts();
       }},
  };
  std::vector<std::pair<CLI::App*, const Stage*>> commands;
  for (const auto& stage : stages) {
    CLI::App* cmd = app.add_subcommand(stage.name, stage.help);
    add_pipeline_options(cmd);
    commands.emplace_back(cmd, &stage);
  }

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus (bundle on stdout unless --out)");
  synth_cmd->add_option("--out", synth.out, "Write posts.jsonl, follows.csv and truth.csv here");
  synth_cmd->add_option("--gen-config", synth.config_file, "Generator key=value file");
  synth_cmd->add_option("--set", synth.settings, "Generator override key=value (repeatable)");
  synth_cmd->add_option("--users", synth.n_users, "Number of users");
  synth_cmd->add_option("--hate-fraction", synth.hate_fraction, "Share of planted hateful users");
  synth_cmd->add_option("--homophily", synth.homophily, "Within-class follow and repost preference");
  synth_cmd->add_option("--days", synth.duration_days, "Simulated duration in days");
  synth_cmd->add_option("--seed", synth.seed, "Random seed (default: generator config, else 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << one_line(e.what()) << "\n";
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (synth_cmd->parsed()) {
      run_synth(synth);
      return 0;
    }
    config.format = format == "json" ? TableFormat::json : TableFormat::csv;
    config.svg = !no_svg;
    if (!strata.empty()) std::copy(strata.begin(), strata.end(), config.strata.cuts.begin());
    if (!filter.empty()) {
      config.filter = parse_post_subset(filter);
      if (!config.filter) throw Error("unknown filter '" + filter + "'");
    }
    for (const auto& [cmd, stage] : commands) {
      if (!cmd->parsed()) continue;
      Pipeline pipeline(config, gather_inputs(config));
      stage->action(pipeline);
      pipeline.write_manifest();
      for (const auto& w : pipeline.warnings()) std::cerr << "warning: " << one_line(w) << "\n";
      std::cerr << "wrote " << pipeline.artifacts().size() + 1 << " artifacts to " << config.out_dir.string()
                << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << one_line(e.what()) << "\n";
    return 1;
  }
}
