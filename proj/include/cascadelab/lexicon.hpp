#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cascadelab/snapshot.hpp"

namespace cascadelab {

/// Splits text into lowercase ASCII alphanumeric tokens. Every other byte
/// (punctuation, whitespace, non-ASCII) is a delimiter.
std::vector<std::string> tokenize(std::string_view text);

class Lexicon {
 public:
  Lexicon() = default;
  /// Builds from already-normalized terms of one or two tokens.
  static Lexicon from_terms(const std::vector<std::string>& terms);

  void add_term(std::string_view term);

  const std::set<std::string>& unigrams() const { return unigrams_; }
  const std::set<std::pair<std::string, std::string>>& bigrams() const { return bigrams_; }
  std::size_t size() const { return unigrams_.size() + bigrams_.size(); }
  bool empty() const { return size() == 0; }

  /// Every term in canonical form ("a" or "a b"), unigrams first.
  std::vector<std::string> terms() const;

 private:
  std::set<std::string> unigrams_;
  std::set<std::pair<std::string, std::string>> bigrams_;
};

/// One term per line, '#' starts a comment, blank lines ignored.
/// Throws Error naming every line with more than two tokens, or when no terms remain.
Lexicon load_lexicon(std::istream& in);
Lexicon load_lexicon(const std::filesystem::path& path);

/// The 45-term stand-in lexicon shipped in data/lexicon.txt.
Lexicon default_lexicon();

/// Distinct matched terms in order of first occurrence in the body.
std::vector<std::string> match_post(const Lexicon& lexicon, std::string_view body);

struct ExplicitHateTags {
  std::vector<std::uint8_t> flagged;           // per post
  std::vector<std::uint32_t> keyword_posts;    // per user
  std::uint64_t flagged_total = 0;
  std::uint64_t total_posts = 0;

  double flagged_fraction() const {
    return total_posts == 0 ? 0.0 : static_cast<double>(flagged_total) / static_cast<double>(total_posts);
  }
};

ExplicitHateTags tag_explicit_hate(const Snapshot& snapshot, const Lexicon& lexicon, unsigned threads = 1);

/// Users with at least `min_keyword_posts` flagged posts, ascending.
std::vector<UserIndex> select_seed_users(const ExplicitHateTags& tags, std::uint32_t min_keyword_posts = 10);

}  // namespace cascadelab
