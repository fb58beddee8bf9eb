// SPDX-License-Identifier: Apache-2.0
//
// Text helpers shared by the search index, the synthesis leakage checks and
// answer matching in the verifier and trajectory filters.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sf {

/// Lowercase, strip ASCII punctuation, collapse whitespace runs to one space.
std::string normalize_answer(std::string_view text);

/// Index tokenizer: lowercase, split on non-alphanumerics, drop tokens shorter
/// than two bytes. Bytes >= 0x80 count as word characters so UTF-8 survives.
std::vector<std::string> tokenize(std::string_view text);

/// Same split as tokenize() but also reports the byte offset of every token.
struct TokenSpan {
  std::string token;
  std::size_t offset = 0;
};
std::vector<TokenSpan> tokenize_with_offsets(std::string_view text);

/// True when the normalized form is a (possibly signed/decimal) number.
bool is_numeric_answer(std::string_view text);

/// Normalized containment in either direction; numeric answers must match
/// exactly after normalization.
bool answers_match(std::string_view predicted, std::string_view gold);

/// True iff normalize(needle) occurs inside normalize(haystack).
bool normalized_contains(std::string_view haystack, std::string_view needle);

std::string slugify(std::string_view text);
std::string to_lower(std::string_view text);
std::string trim(std::string_view text);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

/// Replace every occurrence of `from` in `text`.
std::string replace_all(std::string text, std::string_view from, std::string_view to);

/// Fill `{slot}` placeholders from (name, value) pairs. Unknown slots stay.
std::string fill_template(std::string_view tmpl,
                          const std::vector<std::pair<std::string, std::string>>& slots);

}  // namespace sf
