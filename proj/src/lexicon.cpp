#include "cascadelab/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "cascadelab/parallel.hpp"

namespace cascadelab {
namespace detail {
extern const std::string_view kDefaultLexiconText;
}

namespace {

bool is_token_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char c : text) {
    if (is_token_char(c)) {
      current.push_back(ascii_lower(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

void Lexicon::add_term(std::string_view term) {
  auto tokens = tokenize(term);
  if (tokens.size() == 1) {
    unigrams_.insert(std::move(tokens[0]));
  } else if (tokens.size() == 2) {
    bigrams_.emplace(std::move(tokens[0]), std::move(tokens[1]));
  } else {
    throw Error("lexicon term must have one or two tokens: '" + std::string(term) + "'");
  }
}

Lexicon Lexicon::from_terms(const std::vector<std::string>& terms) {
  Lexicon lex;
  for (const auto& t : terms) lex.add_term(t);
  return lex;
}

std::vector<std::string> Lexicon::terms() const {
  std::vector<std::string> out(unigrams_.begin(), unigrams_.end());
  for (const auto& [a, b] : bigrams_) out.push_back(a + " " + b);
  return out;
}

Lexicon load_lexicon(std::istream& in) {
  if (!in) throw Error("lexicon source is not readable");
  Lexicon lex;
  std::vector<std::size_t> bad_lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text(line);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    const auto tokens = tokenize(text);
    if (tokens.empty()) continue;
    if (tokens.size() > 2) {
      bad_lines.push_back(line_no);
      continue;
    }
    lex.add_term(text);
  }
  if (!bad_lines.empty()) {
    std::ostringstream msg;
    msg << "lexicon terms with more than two tokens on line(s)";
    for (std::size_t i = 0; i < bad_lines.size(); ++i) msg << (i == 0 ? " " : ", ") << bad_lines[i];
    throw Error(msg.str());
  }
  if (lex.empty()) throw Error("lexicon has no terms");
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return load_lexicon(in);
}

Lexicon default_lexicon() {
  std::istringstream in{std::string(detail::kDefaultLexiconText)};
  return load_lexicon(in);
}

std::vector<std::string> match_post(const Lexicon& lexicon, std::string_view body) {
  std::vector<std::string> matches;
  const auto tokens = tokenize(body);
  auto add = [&](std::string term) {
    if (std::find(matches.begin(), matches.end(), term) == matches.end()) matches.push_back(std::move(term));
  };
  const auto& bigrams = lexicon.bigrams();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (lexicon.unigrams().contains(tokens[i])) add(tokens[i]);
    if (i + 1 < tokens.size() && !bigrams.empty()) {
      std::pair<std::string, std::string> key(tokens[i], tokens[i + 1]);
      if (bigrams.contains(key)) add(key.first + " " + key.second);
    }
  }
  return matches;
}

ExplicitHateTags tag_explicit_hate(const Snapshot& snapshot, const Lexicon& lexicon, unsigned threads) {
  ExplicitHateTags tags;
  const auto n_posts = snapshot.num_posts();
  tags.flagged.assign(n_posts, 0);
  tags.keyword_posts.assign(snapshot.num_users(), 0);
  tags.total_posts = n_posts;

  parallel_for(n_posts, threads, [&](std::size_t p) {
    const auto body = snapshot.body(static_cast<PostIndex>(p));
    if (body && !match_post(lexicon, *body).empty()) tags.flagged[p] = 1;
  });
  for (std::size_t p = 0; p < n_posts; ++p) {
    if (tags.flagged[p]) {
      ++tags.flagged_total;
      ++tags.keyword_posts[snapshot.post(static_cast<PostIndex>(p)).author];
    }
  }
  return tags;
}

std::vector<UserIndex> select_seed_users(const ExplicitHateTags& tags, std::uint32_t min_keyword_posts) {
  std::vector<UserIndex> seeds;
  for (UserIndex u = 0; u < tags.keyword_posts.size(); ++u) {
    if (tags.keyword_posts[u] >= min_keyword_posts) seeds.push_back(u);
  }
  return seeds;
}

}  // namespace cascadelab
