// SPDX-License-Identifier: Apache-2.0
#include "searchforge/text.hpp"

#include <cctype>
#include <cstdio>

#include "searchforge/error.hpp"

namespace sf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::DanglingEdge: return "DanglingEdge";
    case ErrorCode::CycleInDag: return "CycleInDag";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::ForeignVertex: return "ForeignVertex";
    case ErrorCode::GraphTooLarge: return "GraphTooLarge";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::UniverseTooLarge: return "UniverseTooLarge";
    case ErrorCode::Uncoverable: return "Uncoverable";
    case ErrorCode::SizeRangeInfeasible: return "SizeRangeInfeasible";
    case ErrorCode::NoEligibleNode: return "NoEligibleNode";
    case ErrorCode::MissingTemplate: return "MissingTemplate";
    case ErrorCode::AnswerLeakage: return "AnswerLeakage";
    case ErrorCode::MissingComplexityReport: return "MissingComplexityReport";
    case ErrorCode::PluginFailure: return "PluginFailure";
    case ErrorCode::EnvironmentUnreachable: return "EnvironmentUnreachable";
    case ErrorCode::MissingPassRate: return "MissingPassRate";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptyQuery: return "EmptyQuery";
    case ErrorCode::TemplateExhaustion: return "TemplateExhaustion";
    case ErrorCode::InsufficientDistractors: return "InsufficientDistractors";
    case ErrorCode::PortInUse: return "PortInUse";
    case ErrorCode::AlreadyFinalized: return "AlreadyFinalized";
    case ErrorCode::UnknownTool: return "UnknownTool";
    case ErrorCode::QuestionAloneExceedsBudget: return "QuestionAloneExceedsBudget";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::DegenerateGroup: return "DegenerateGroup";
    case ErrorCode::MissingRatios: return "MissingRatios";
    case ErrorCode::AllMasked: return "AllMasked";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (c < 0x80 && std::ispunct(c)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::vector<TokenSpan> tokenize_with_offsets(std::string_view text) {
  std::vector<TokenSpan> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    if (i - start >= 2) {
      std::string tok(text.substr(start, i - start));
      for (auto& ch : tok) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      out.push_back({std::move(tok), start});
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    if (i - start >= 2) {
      std::string tok(text.substr(start, i - start));
      for (auto& ch : tok) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      out.push_back(std::move(tok));
    }
  }
  return out;
}

bool is_numeric_answer(std::string_view text) {
  // Checked on the raw text (trimmed, thousands separators removed) because
  // normalization would eat the decimal point.
  std::string t = trim(text);
  std::string s;
  for (char c : t)
    if (c != ',' && c != '_') s.push_back(c);
  if (s.empty()) return false;
  std::size_t i = 0;
  if (s[0] == '-' || s[0] == '+') i = 1;
  bool digit = false, dot = false;
  for (; i < s.size(); ++i) {
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      digit = true;
    } else if (s[i] == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digit;
}

namespace {

std::string canonical_number(std::string_view text) {
  std::string s;
  for (char c : trim(text))
    if (c != ',' && c != '_' && c != '+') s.push_back(c);
  if (s.find('.') != std::string::npos) {
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
  }
  bool neg = !s.empty() && s[0] == '-';
  std::string digits = neg ? s.substr(1) : s;
  std::size_t nz = 0;
  while (nz + 1 < digits.size() && digits[nz] == '0' && digits[nz + 1] != '.') ++nz;
  digits = digits.substr(nz);
  if (digits.empty() || digits == "0") return "0";
  return neg ? "-" + digits : digits;
}

}  // namespace

bool answers_match(std::string_view predicted, std::string_view gold) {
  if (is_numeric_answer(gold) || is_numeric_answer(predicted)) {
    if (!is_numeric_answer(gold) || !is_numeric_answer(predicted)) return false;
    return canonical_number(predicted) == canonical_number(gold);
  }
  std::string p = normalize_answer(predicted);
  std::string g = normalize_answer(gold);
  if (p.empty() || g.empty()) return false;
  return p.find(g) != std::string::npos || g.find(p) != std::string::npos;
}

bool normalized_contains(std::string_view haystack, std::string_view needle) {
  std::string n = normalize_answer(needle);
  if (n.empty()) return false;
  return normalize_answer(haystack).find(n) != std::string::npos;
}

std::string slugify(std::string_view text) {
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (!out.empty() && out.back() != '-') {
      out.push_back('-');
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  if (out.empty()) out = "page";
  return out;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  if (from.empty()) return text;
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

std::string fill_template(std::string_view tmpl,
                          const std::vector<std::pair<std::string, std::string>>& slots) {
  std::string out(tmpl);
  for (const auto& [name, value] : slots) out = replace_all(std::move(out), "{" + name + "}", value);
  return out;
}

}  // namespace sf
