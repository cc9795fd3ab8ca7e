#pragma once
// Default resource files compiled into the library (see data/).

#include <string_view>

namespace cskit::data {

std::string_view stopwords();
std::string_view tagger_lexicon();
std::string_view lemma_exceptions();
std::string_view first_names();

}  // namespace cskit::data
