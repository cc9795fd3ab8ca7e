#include "cskit/concepts.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include "cskit/embedded_data.hpp"
#include "cskit/kg_store.hpp"
#include "cskit/text_util.hpp"

namespace cskit {

std::string_view to_string(Pos pos) {
  switch (pos) {
    case Pos::noun: return "NOUN";
    case Pos::verb: return "VERB";
    case Pos::adj: return "ADJ";
    case Pos::other: return "OTHER";
  }
  return "OTHER";
}

Pos parse_pos(std::string_view tag) {
  if (tag == "NOUN") return Pos::noun;
  if (tag == "VERB") return Pos::verb;
  if (tag == "ADJ") return Pos::adj;
  if (tag == "OTHER") return Pos::other;
  throw std::invalid_argument("unknown POS tag '" + std::string(tag) + "'");
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

// Multi-byte punctuation treated like ASCII punctuation at token edges.
constexpr std::array<std::string_view, 11> kUnicodePunct = {
    "“", "”", "‘", "’", "—", "–",
    "…", "«", "»", "¿", "¡"};

bool is_ascii_punct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
         (c >= '{' && c <= '~');
}

// Length in bytes of the punctuation unit at the start of s, or 0.
std::size_t punct_prefix(std::string_view s) {
  if (s.empty()) return 0;
  if (is_ascii_punct(s.front())) return 1;
  for (std::string_view p : kUnicodePunct) {
    if (s.starts_with(p)) return p.size();
  }
  return 0;
}

std::size_t punct_suffix(std::string_view s) {
  if (s.empty()) return 0;
  if (is_ascii_punct(s.back())) return 1;
  for (std::string_view p : kUnicodePunct) {
    if (s.ends_with(p)) return p.size();
  }
  return 0;
}

// Clitics in both apostrophe spellings.
constexpr std::array<std::string_view, 14> kClitics = {
    "n't", "n’t", "'s", "’s", "'re", "’re", "'ll",
    "’ll", "'ve", "’ve", "'d", "’d", "'m", "’m"};

bool is_clitic(std::string_view lower) {
  return std::find(kClitics.begin(), kClitics.end(), lower) != kClitics.end();
}

// Peels clitics off the right of a word core.
void split_core(std::string_view core, std::vector<std::string>& out) {
  std::vector<std::string_view> tail;
  for (bool again = true; again;) {
    again = false;
    std::string lower = to_lower(core);
    for (std::string_view clitic : kClitics) {
      if (core.size() > clitic.size() && std::string_view(lower).ends_with(clitic)) {
        tail.push_back(core.substr(core.size() - clitic.size()));
        core.remove_suffix(clitic.size());
        again = true;
        break;
      }
    }
  }
  out.emplace_back(core);
  for (auto it = tail.rbegin(); it != tail.rend(); ++it) out.emplace_back(*it);
}

void split_chunk(std::string_view chunk, std::vector<std::string>& out) {
  if (is_clitic(to_lower(chunk))) {
    out.emplace_back(chunk);
    return;
  }
  // leading punctuation, identical units grouped ("...", "--")
  while (std::size_t n = punct_prefix(chunk)) {
    std::string_view unit = chunk.substr(0, n);
    std::size_t len = n;
    while (chunk.substr(len).starts_with(unit)) len += n;
    out.emplace_back(chunk.substr(0, len));
    chunk.remove_prefix(len);
    if (is_clitic(to_lower(chunk))) break;
  }
  std::vector<std::string_view> trailing;
  while (std::size_t n = punct_suffix(chunk)) {
    std::string_view unit = chunk.substr(chunk.size() - n);
    std::size_t len = n;
    while (len + n <= chunk.size() && chunk.substr(chunk.size() - len - n, n) == unit) len += n;
    trailing.push_back(chunk.substr(chunk.size() - len));
    chunk.remove_suffix(len);
  }
  if (!chunk.empty()) split_core(chunk, out);
  for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) out.emplace_back(*it);
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<std::string> pieces;
  for (std::string_view chunk : split_whitespace(text)) split_chunk(chunk, pieces);
  std::vector<Token> tokens;
  tokens.reserve(pieces.size());
  for (std::size_t i = 0; i < pieces.size(); ++i) tokens.push_back(Token{std::move(pieces[i]), i});
  return tokens;
}

// ---------------------------------------------------------------------------
// Tagger

namespace {

bool has_alpha(std::string_view s) { return std::any_of(s.begin(), s.end(), is_ascii_alpha); }
bool has_digit(std::string_view s) { return std::any_of(s.begin(), s.end(), is_ascii_digit); }

// "kind of", "sort of", ...: classifier nouns that hedge rather than refer
constexpr std::array<std::string_view, 7> kClassifiers = {"kind",  "sort", "type", "lot",
                                                          "lots",  "bit",  "couple"};

bool ends_with_any(std::string_view w, std::initializer_list<std::string_view> suffixes,
                   std::size_t min_len) {
  if (w.size() < min_len) return false;
  for (std::string_view s : suffixes) {
    if (w.ends_with(s)) return true;
  }
  return false;
}

}  // namespace

LexiconTagger::LexiconTagger(std::string_view lexicon_tsv) {
  for (std::string_view line : data_lines(lexicon_tsv)) {
    auto fields = split(line, '\t');
    if (fields.size() != 2) {
      throw std::invalid_argument("bad tagger lexicon line: " + std::string(line));
    }
    lexicon_.insert_or_assign(to_lower(trim(fields[0])), parse_pos(trim(fields[1])));
  }
}

std::shared_ptr<const LexiconTagger> LexiconTagger::load(const std::filesystem::path& path) {
  return std::make_shared<const LexiconTagger>(read_file(path));
}

Pos LexiconTagger::tag_word(std::string_view w) const {
  if (!has_alpha(w) || has_digit(w)) return Pos::other;
  if (auto it = lexicon_.find(std::string(w)); it != lexicon_.end()) return it->second;
  if (ends_with_any(w, {"ing"}, 5) || ends_with_any(w, {"ed"}, 4)) return Pos::verb;
  if (ends_with_any(w, {"ly"}, 4)) return Pos::other;
  if (ends_with_any(w, {"ous", "ful", "ive", "able", "ible", "less"}, 5) ||
      ends_with_any(w, {"ish"}, 6)) {
    return Pos::adj;
  }
  return Pos::noun;
}

std::vector<Pos> LexiconTagger::tag(std::span<const Token> tokens) const {
  std::vector<Pos> tags;
  tags.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string w = to_lower(tokens[i].surface);
    bool classifier = i + 1 < tokens.size() && to_lower(tokens[i + 1].surface) == "of" &&
                      std::find(kClassifiers.begin(), kClassifiers.end(), w) != kClassifiers.end();
    tags.push_back(classifier ? Pos::other : tag_word(w));
  }
  return tags;
}

std::vector<TaggedToken> tag_pos(const PosTagger& tagger, std::span<const Token> tokens) {
  std::vector<Pos> tags = tagger.tag(tokens);
  if (tags.size() != tokens.size()) {
    throw std::logic_error("POS tagger returned " + std::to_string(tags.size()) + " tags for " +
                           std::to_string(tokens.size()) + " tokens");
  }
  std::vector<TaggedToken> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) out.push_back(TaggedToken{tokens[i], tags[i]});
  return out;
}

// ---------------------------------------------------------------------------
// Lemmatizer

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// 'y' counts as a vowel except word-initially; 'u' after 'q' does not.
bool vowel_at(std::string_view w, std::size_t i) {
  char c = w[i];
  if (c == 'y') return i > 0;
  if (c == 'u' && i > 0 && w[i - 1] == 'q') return false;
  return is_vowel(c);
}

bool consonant_at(std::string_view w, std::size_t i) { return is_ascii_alpha(w[i]) && !vowel_at(w, i); }

bool has_vowel(std::string_view w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (vowel_at(w, i)) return true;
  }
  return false;
}

int vowel_groups(std::string_view w) {
  int groups = 0;
  bool in_group = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    bool v = vowel_at(w, i);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  return groups;
}

std::string key(std::string_view form, Pos pos) {
  std::string k(form);
  k += '\t';
  k += to_string(pos);
  return k;
}

// Undoes consonant doubling and restores a dropped silent 'e' on a stem left
// after removing -ing/-ed/-er/-est.
std::string restore_stem(std::string stem) {
  const std::size_t n = stem.size();
  if (n < 2) return stem;
  const char last = stem[n - 1];
  const char prev = stem[n - 2];

  if (last == prev && consonant_at(stem, n - 1)) {
    if (std::string_view("bdgmnprtv").find(last) != std::string_view::npos) {
      stem.pop_back();
      return stem;
    }
    // travell-ing, cancell-ed: only multi-syllable -ell stems undouble
    if (last == 'l' && n >= 3 && stem[n - 3] == 'e' && vowel_groups(stem) > 1) stem.pop_back();
    return stem;
  }

  auto add_e = [&] { return stem + 'e'; };
  auto consonant_before = [&](std::size_t i) { return i < n && consonant_at(stem, i); };
  std::string_view s = stem;

  if (last == 'u' || last == 'v' || last == 'c') return add_e();
  if ((last == 's' || last == 'z') && prev != last) return add_e();
  if (last == 'l' && std::string_view("bcdfgkptz").find(prev) != std::string_view::npos) {
    return add_e();
  }
  if (s.ends_with("dg") || s.ends_with("rg") || s.ends_with("lg") || s.ends_with("ang") ||
      s.ends_with("eng")) {
    return add_e();
  }
  if (last == 'g' && vowel_at(stem, n - 2)) return add_e();
  if (n >= 3) {
    // consonant + vowel + consonant endings that overwhelmingly take a silent e
    std::string_view end2 = s.substr(n - 2);
    static constexpr std::array<std::string_view, 15> kSilentE = {
        "id", "ud", "od", "ad", "ut", "ot", "ak", "ik", "ok", "ap", "ib", "in", "um", "ur", "ir"};
    bool pre_consonant = consonant_before(n - 3);
    if (pre_consonant && std::find(kSilentE.begin(), kSilentE.end(), end2) != kSilentE.end()) {
      return add_e();
    }
    if (end2 == "ar" && pre_consonant) return add_e();
    if (end2 == "at" && (pre_consonant || stem[n - 3] == 'u' || stem[n - 3] == 'i')) {
      return add_e();
    }
    if (end2 == "et" && (stem[n - 3] == 'l' || stem[n - 3] == 'p')) return add_e();
    if (end2 == "or" && n >= 4 && consonant_before(n - 3) && consonant_before(n - 4)) {
      return add_e();
    }
  }
  // single-syllable consonant-vowel-consonant stem (hop -> hope, writ -> write)
  if (vowel_groups(stem) == 1 && consonant_at(stem, n - 1) &&
      std::string_view("wxy").find(last) == std::string_view::npos && vowel_at(stem, n - 2) &&
      (n < 3 || consonant_at(stem, n - 3))) {
    return add_e();
  }
  return stem;
}

std::string noun_rules(const std::string& w) {
  std::string_view s = w;
  const std::size_t n = w.size();
  if (n <= 3) return w;
  if (s.ends_with("ae")) return w.substr(0, n - 1);
  if (s.ends_with("ies")) return n > 4 ? w.substr(0, n - 3) + 'y' : w.substr(0, n - 1);
  if (s.ends_with("sses") || s.ends_with("xes") || s.ends_with("ches") || s.ends_with("shes") ||
      s.ends_with("zzes")) {
    return w.substr(0, n - 2);
  }
  if (s.ends_with("ss") || s.ends_with("us") || s.ends_with("is")) return w;
  if (s.ends_with("s")) return w.substr(0, n - 1);
  return w;
}

std::string verb_rules(const std::string& w) {
  std::string_view s = w;
  const std::size_t n = w.size();
  if (n <= 3) return w;
  if (s.ends_with("ies")) return n > 4 ? w.substr(0, n - 3) + 'y' : w.substr(0, n - 1);
  if (s.ends_with("sses") || s.ends_with("xes") || s.ends_with("ches") || s.ends_with("shes") ||
      s.ends_with("zzes") || s.ends_with("oes")) {
    return w.substr(0, n - 2);
  }
  if (s.ends_with("ss") || s.ends_with("us") || s.ends_with("is")) return w;
  if (s.ends_with("s")) return w.substr(0, n - 1);
  if (s.ends_with("ing") && n > 4) {
    std::string stem = w.substr(0, n - 3);
    if (has_vowel(stem)) return restore_stem(stem);
    return w;
  }
  if (s.ends_with("ied")) return n > 4 ? w.substr(0, n - 3) + 'y' : w.substr(0, n - 1);
  if (s.ends_with("eed") || s.ends_with("ued")) return w.substr(0, n - 1);
  if (s.ends_with("yed") || s.ends_with("oed")) return w.substr(0, n - 2);
  if (s.ends_with("ed")) {
    std::string stem = w.substr(0, n - 2);
    if (has_vowel(stem)) return restore_stem(stem);
  }
  return w;
}

std::string adj_rules(const std::string& w) {
  std::string_view s = w;
  const std::size_t n = w.size();
  if (s.ends_with("iest") && n > 5) return w.substr(0, n - 4) + 'y';
  if (s.ends_with("ier") && n > 4) return w.substr(0, n - 3) + 'y';
  if (s.ends_with("est") && n > 4) {
    std::string stem = w.substr(0, n - 3);
    if (has_vowel(stem)) return restore_stem(stem);
  }
  if (s.ends_with("er") && n > 3) {
    std::string stem = w.substr(0, n - 2);
    if (has_vowel(stem)) return restore_stem(stem);
  }
  return w;
}

}  // namespace

Lemmatizer::Lemmatizer(std::string_view exceptions_tsv) {
  for (std::string_view line : data_lines(exceptions_tsv)) {
    auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw std::invalid_argument("bad lemma exception line: " + std::string(line));
    }
    exceptions_.insert_or_assign(key(to_lower(trim(fields[0])), parse_pos(trim(fields[1]))),
                                 to_lower(trim(fields[2])));
  }
}

std::shared_ptr<const Lemmatizer> Lemmatizer::load(const std::filesystem::path& path) {
  return std::make_shared<const Lemmatizer>(read_file(path));
}

std::string Lemmatizer::apply_rules(const std::string& word, Pos pos) const {
  switch (pos) {
    case Pos::noun: return noun_rules(word);
    case Pos::verb: return verb_rules(word);
    case Pos::adj: return adj_rules(word);
    case Pos::other: return word;
  }
  return word;
}

std::string Lemmatizer::lemmatize(std::string_view surface, Pos pos) const {
  std::string w = to_lower(surface);
  if (pos == Pos::other) return w;
  // Iterate to a fixed point so lemmatize(lemmatize(w)) == lemmatize(w).
  for (int pass = 0; pass < 4; ++pass) {
    if (auto it = exceptions_.find(key(w, pos)); it != exceptions_.end()) {
      if (it->second == w) return w;
      w = it->second;
      continue;
    }
    std::string next = apply_rules(w, pos);
    if (next == w) return w;
    w = std::move(next);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Stopwords

StopwordList::StopwordList(std::string_view text) {
  for (std::string_view line : data_lines(text)) {
    std::string w = to_lower(line);
    if (set_.insert(w).second) words_.push_back(std::move(w));
  }
}

std::shared_ptr<const StopwordList> StopwordList::load(const std::filesystem::path& path) {
  return std::make_shared<const StopwordList>(read_file(path));
}

bool StopwordList::contains(std::string_view lowercase_word) const {
  return set_.contains(std::string(lowercase_word));
}

// ---------------------------------------------------------------------------
// Extractor

ExtractorResources ExtractorResources::defaults() {
  static const ExtractorResources res{
      std::make_shared<const LexiconTagger>(data::tagger_lexicon()),
      std::make_shared<const Lemmatizer>(data::lemma_exceptions()),
      std::make_shared<const StopwordList>(data::stopwords())};
  return res;
}

ConceptExtractor::ConceptExtractor() : ConceptExtractor(ExtractorResources::defaults()) {}

ConceptExtractor::ConceptExtractor(ExtractorResources resources) : res_(std::move(resources)) {
  if (!res_.tagger || !res_.lemmatizer || !res_.stopwords) {
    throw std::invalid_argument("ConceptExtractor: missing resource");
  }
}

ConceptSet ConceptExtractor::extract(std::string_view text) const {
  std::vector<Token> tokens = tokenize(text);
  std::vector<Pos> tags = res_.tagger->tag(tokens);
  ConceptSet out;
  for (std::size_t i = 0; i < tokens.size() && i < tags.size(); ++i) {
    if (tags[i] == Pos::other) continue;
    const std::string& surface = tokens[i].surface;
    if (!has_alpha(surface) || has_digit(surface)) continue;
    if (res_.stopwords->contains(to_lower(surface))) continue;
    std::string lemma = res_.lemmatizer->lemmatize(surface, tags[i]);
    if (!is_valid_concept(lemma) || res_.stopwords->contains(lemma)) continue;
    out.push_back(std::move(lemma));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const ConceptExtractor& default_extractor() {
  static const ConceptExtractor extractor;
  return extractor;
}

ConceptSet extract_concepts(std::string_view text) { return default_extractor().extract(text); }

std::string lemmatize(std::string_view surface, Pos pos) {
  return default_extractor().lemmatizer().lemmatize(surface, pos);
}

ConceptSet merge_concepts(const ConceptSet& a, const ConceptSet& b) {
  ConceptSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace cskit
