#pragma once
// Turn text -> candidate concepts: tokenize, coarse POS tag, lemmatize, and
// drop stopwords. All resources are immutable after construction, so one
// ConceptExtractor can be shared by any number of threads.

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace cskit {

struct Token {
  std::string surface;
  std::size_t position = 0;  // 0-based index within the text

  friend bool operator==(const Token&, const Token&) = default;
};

enum class Pos : std::uint8_t { noun, verb, adj, other };

std::string_view to_string(Pos pos);
// Accepts NOUN/VERB/ADJ/OTHER; throws std::invalid_argument otherwise.
Pos parse_pos(std::string_view tag);

struct TaggedToken {
  Token token;
  Pos pos;
};

// Sorted, duplicate-free set of concept lemmas.
using ConceptSet = std::vector<std::string>;

// Whitespace split, leading/trailing punctuation detached, English clitics
// ("n't", "'s", "'re", "'ll", "'ve", "'d", "'m") split into their own tokens.
std::vector<Token> tokenize(std::string_view text);

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  // Exactly one tag per input token.
  virtual std::vector<Pos> tag(std::span<const Token> tokens) const = 0;
};

// Lexicon lookup on the lowercased surface, then suffix heuristics for
// unknown words, defaulting to NOUN. Case-insensitive throughout.
class LexiconTagger final : public PosTagger {
 public:
  // Lines of "word<TAB>TAG"; '#' comments allowed.
  explicit LexiconTagger(std::string_view lexicon_tsv);
  static std::shared_ptr<const LexiconTagger> load(const std::filesystem::path& path);

  std::vector<Pos> tag(std::span<const Token> tokens) const override;
  Pos tag_word(std::string_view lowercase_word) const;
  std::size_t lexicon_size() const { return lexicon_.size(); }

 private:
  std::unordered_map<std::string, Pos> lexicon_;
};

std::vector<TaggedToken> tag_pos(const PosTagger& tagger, std::span<const Token> tokens);

// Suffix-rule lemmatizer with an exception table keyed by (form, pos).
class Lemmatizer {
 public:
  // Lines of "form<TAB>POS<TAB>lemma".
  explicit Lemmatizer(std::string_view exceptions_tsv);
  static std::shared_ptr<const Lemmatizer> load(const std::filesystem::path& path);

  std::string lemmatize(std::string_view surface, Pos pos) const;
  std::size_t exception_count() const { return exceptions_.size(); }

 private:
  std::string apply_rules(const std::string& word, Pos pos) const;

  std::unordered_map<std::string, std::string> exceptions_;  // "form\tPOS" -> lemma
};

class StopwordList {
 public:
  explicit StopwordList(std::string_view text);
  static std::shared_ptr<const StopwordList> load(const std::filesystem::path& path);

  bool contains(std::string_view lowercase_word) const;
  // In file order.
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_set<std::string> set_;
};

struct ExtractorResources {
  std::shared_ptr<const PosTagger> tagger;
  std::shared_ptr<const Lemmatizer> lemmatizer;
  std::shared_ptr<const StopwordList> stopwords;

  // Resources compiled into the library.
  static ExtractorResources defaults();
};

class ConceptExtractor {
 public:
  ConceptExtractor();  // default resources
  explicit ConceptExtractor(ExtractorResources resources);

  ConceptSet extract(std::string_view text) const;

  const PosTagger& tagger() const { return *res_.tagger; }
  const Lemmatizer& lemmatizer() const { return *res_.lemmatizer; }
  const StopwordList& stopwords() const { return *res_.stopwords; }

 private:
  ExtractorResources res_;
};

// Convenience wrappers over a process-wide default extractor.
ConceptSet extract_concepts(std::string_view text);
std::string lemmatize(std::string_view surface, Pos pos);
const ConceptExtractor& default_extractor();

// Union of sorted sets, still sorted and unique.
ConceptSet merge_concepts(const ConceptSet& a, const ConceptSet& b);

}  // namespace cskit
