#include "cskit/prompts.hpp"

#include <array>
#include <istream>
#include <ostream>

#include "cskit/corpus.hpp"
#include "cskit/embedded_data.hpp"
#include "cskit/text_util.hpp"

namespace cskit {

namespace {

constexpr std::array<std::string_view, 8> kUnicodePunct = {"…", "”", "“", "’",
                                                           "‘", "»", "«", "—"};

bool is_ascii_punct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

// Length of a punctuation or space unit ending at s.end(), 0 if none.
std::size_t trailing_unit(std::string_view s) {
  if (s.empty()) return 0;
  char c = s.back();
  if (is_ascii_space(c) || is_ascii_punct(c)) return 1;
  for (std::string_view p : kUnicodePunct) {
    if (s.ends_with(p)) return p.size();
  }
  return 0;
}

std::size_t leading_unit(std::string_view s) {
  if (s.empty()) return 0;
  if (is_ascii_punct(s.front())) return 1;
  for (std::string_view p : kUnicodePunct) {
    if (s.starts_with(p)) return p.size();
  }
  return 0;
}

std::string_view strip_punct(std::string_view w) {
  while (std::size_t n = leading_unit(w)) w.remove_prefix(n);
  while (std::size_t n = trailing_unit(w)) w.remove_suffix(n);
  return w;
}

// Drops a possessive or other clitic: "Tracy's" -> "Tracy", "I'm" -> "I".
std::string_view strip_clitic(std::string_view w) {
  for (std::string_view apos : {std::string_view("'"), std::string_view("’")}) {
    auto pos = w.find(apos);
    if (pos != std::string_view::npos && pos > 0) return w.substr(0, pos);
  }
  return w;
}

bool ends_sentence(std::string_view raw) {
  // Closing quotes/brackets after the terminator still end the sentence.
  while (!raw.empty()) {
    char c = raw.back();
    if (c == '.' || c == '!' || c == '?') return true;
    if (c == '"' || c == '\'' || c == ')' || c == ']') {
      raw.remove_suffix(1);
      continue;
    }
    if (raw.ends_with("”") || raw.ends_with("’")) {
      raw.remove_suffix(3);
      continue;
    }
    if (raw.ends_with("…")) return true;
    return false;
  }
  return false;
}

bool is_title_case(std::string_view w) {
  if (w.size() < 2 || !is_ascii_upper(w[0])) return false;
  for (std::size_t i = 1; i < w.size(); ++i) {
    char c = w[i];
    if (!((c >= 'a' && c <= 'z') || c == '-')) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(PromptRejection r) { return r == PromptRejection::too_short ? "too-short" : "no-name"; }

PromptSelector::PromptSelector() : PromptSelector(data::first_names()) {}

PromptSelector::PromptSelector(std::string_view names_text) {
  for (std::string_view line : data_lines(names_text)) names_.emplace(line);
}

std::string_view PromptSelector::core(std::string_view text) {
  while (std::size_t n = trailing_unit(text)) text.remove_suffix(n);
  return text;
}

std::size_t PromptSelector::word_count(std::string_view text) { return split_whitespace(core(text)).size(); }

bool PromptSelector::has_inner_punctuation(std::string_view text) {
  return core(text).find_first_of(",.;") != std::string_view::npos;
}

bool PromptSelector::has_person_name(std::string_view text) const {
  auto words = split_whitespace(core(text));
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::string_view w = strip_clitic(strip_punct(words[i]));
    if (w.empty()) continue;
    if (names_.contains(std::string(w))) return true;
    bool sentence_start = i == 0 || ends_sentence(words[i - 1]);
    if (!sentence_start && w != "I" && is_title_case(w)) return true;
  }
  return false;
}

std::optional<PromptRejection> PromptSelector::decide(std::string_view text) const {
  if (word_count(text) <= 15 && !has_inner_punctuation(text)) return PromptRejection::too_short;
  if (!has_person_name(text)) return PromptRejection::no_name;
  return std::nullopt;
}

PromptSelection select_prompts(const std::vector<ContextRow>& contexts, const PromptSelector& selector) {
  PromptSelection out;
  for (const ContextRow& row : contexts) {
    if (auto reason = selector.decide(row.text)) {
      out.rejected.push_back({row, *reason});
    } else {
      out.kept.push_back(row);
    }
  }
  return out;
}

std::vector<ContextRow> read_contexts_tsv(std::istream& in, const std::string& source_name) {
  std::vector<ContextRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw CorpusError(source_name + ":" + std::to_string(line_no) + ": expected id<TAB>context");
    }
    rows.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  if (in.bad()) throw IoError("read error in " + source_name);
  return rows;
}

void write_kept_tsv(std::ostream& out, const std::vector<ContextRow>& rows) {
  for (const auto& r : rows) out << r.id << '\t' << r.text << '\n';
}

void write_rejected_tsv(std::ostream& out, const std::vector<RejectedContext>& rows) {
  for (const auto& r : rows) out << r.row.id << '\t' << r.row.text << '\t' << to_string(r.reason) << '\n';
}

}  // namespace cskit
