#pragma once
// Selection of story contexts usable as dialogue prompts: long or
// multi-clause, and mentioning a person.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace cskit {

enum class PromptRejection { too_short, no_name };

std::string_view to_string(PromptRejection r);

struct ContextRow {
  std::string id;
  std::string text;

  friend bool operator==(const ContextRow&, const ContextRow&) = default;
};

struct RejectedContext {
  ContextRow row;
  PromptRejection reason;
};

struct PromptSelection {
  std::vector<ContextRow> kept;
  std::vector<RejectedContext> rejected;
};

class PromptSelector {
 public:
  PromptSelector();  // bundled first-name gazetteer
  explicit PromptSelector(std::string_view names_text);

  // nullopt when kept. The length test is checked before the name test.
  std::optional<PromptRejection> decide(std::string_view text) const;

  // Text with trailing whitespace and the trailing punctuation run removed.
  static std::string_view core(std::string_view text);
  static std::size_t word_count(std::string_view text);
  // Comma, period or semicolon anywhere in the core text.
  static bool has_inner_punctuation(std::string_view text);
  bool has_person_name(std::string_view text) const;

 private:
  std::unordered_set<std::string> names_;
};

PromptSelection select_prompts(const std::vector<ContextRow>& contexts, const PromptSelector& selector = {});

// id<TAB>context per line; blank lines skipped. Throws CorpusError on a line
// without a tab.
std::vector<ContextRow> read_contexts_tsv(std::istream& in, const std::string& source_name = "<input>");
void write_kept_tsv(std::ostream& out, const std::vector<ContextRow>& rows);
void write_rejected_tsv(std::ostream& out, const std::vector<RejectedContext>& rows);

}  // namespace cskit
