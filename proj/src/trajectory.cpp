// SPDX-License-Identifier: Apache-2.0
#include "searchforge/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "searchforge/error.hpp"
#include "searchforge/text.hpp"

namespace sf {

using ojson = nlohmann::ordered_json;

std::vector<Step> Trajectory::all_steps() const {
  std::vector<Step> out = archived;
  out.insert(out.end(), steps.begin(), steps.end());
  return out;
}

ToolRegistry ToolRegistry::defaults() {
  ToolRegistry r;
  for (const char* n : {"search", "visit", "PythonInterpreter", "google_scholar", "google_maps"}) r.add(n);
  return r;
}

std::int64_t ContextPolicy::threshold() const {
  if (!(threshold_fraction > 0.0 && threshold_fraction <= 1.0))
    throw Error(ErrorCode::ConfigInvalid, "threshold_fraction must be in (0, 1]");
  if (window_budget <= 0) throw Error(ErrorCode::ConfigInvalid, "window_budget must be positive");
  return static_cast<std::int64_t>(std::floor(threshold_fraction * static_cast<double>(window_budget)));
}

std::int64_t estimate_tokens(std::size_t chars) { return static_cast<std::int64_t>((chars + 3) / 4); }

std::string render_tool_call(const ToolAction& a) {
  std::string body = "{\"name\":" + ojson(a.tool_name).dump() + ",\"arguments\":" + a.arguments.dump() + "}";
  // '<' only occurs inside JSON strings, so escaping it keeps the closing tag unique.
  body = replace_all(std::move(body), "<", "\\u003c");
  std::string out = "<tool_call>" + body;
  if (!a.code.empty()) {
    std::string code = replace_all(replace_all(replace_all(a.code, "&", "&amp;"), "<", "&lt;"), ">", "&gt;");
    out += "<code>" + code + "</code>";
  }
  return out + "</tool_call>";
}

namespace {

std::size_t step_chars(const Step& s) {
  return s.thought.size() + render_tool_call(s.action).size() + s.observation.size();
}

std::size_t context_chars(const Trajectory& t) {
  std::size_t n = t.question.size() + t.minimal_spec.size();
  for (const auto& s : t.steps) n += step_chars(s);
  return n;
}

}  // namespace

std::int64_t estimate_tokens(const Trajectory& t) { return estimate_tokens(context_chars(t)); }

std::int64_t total_tokens(const Trajectory& t) {
  std::size_t n = context_chars(t);
  for (const auto& s : t.archived) n += step_chars(s);
  return estimate_tokens(n);
}

Trajectory make_trajectory(std::string id, std::string question) {
  Trajectory t;
  t.id = std::move(id);
  t.question = std::move(question);
  t.token_estimate = estimate_tokens(t);
  return t;
}

void append_step(Trajectory& t, Step s, const ToolRegistry& tools) {
  if (t.finalized()) throw Error(ErrorCode::AlreadyFinalized, "trajectory '" + t.id + "' already has a final answer");
  if (!tools.contains(s.action.tool_name)) throw Error(ErrorCode::UnknownTool, s.action.tool_name);
  if (!s.action.arguments.is_object()) throw Error(ErrorCode::MalformedRecord, "tool arguments must be a JSON object");
  t.steps.push_back(std::move(s));
  t.token_estimate = estimate_tokens(t);
}

void finalize(Trajectory& t, std::string answer) {
  if (t.finalized()) throw Error(ErrorCode::AlreadyFinalized, "trajectory '" + t.id + "' already has a final answer");
  t.final_answer = std::move(answer);
}

bool apply_discard_all(Trajectory& t, const ContextPolicy& p) {
  const std::int64_t limit = p.threshold();
  t.token_estimate = estimate_tokens(t);
  if (t.token_estimate <= limit) return false;
  std::string spec = fill_template(p.minimal_spec, {{"question", t.question}});
  std::int64_t retained = estimate_tokens(t.question.size() + spec.size());
  if (retained > limit)
    throw Error(ErrorCode::QuestionAloneExceedsBudget,
                "question and minimal spec need " + std::to_string(retained) + " tokens, threshold " + std::to_string(limit));
  t.resets.push_back({t.step_count(), t.token_estimate});
  for (auto& s : t.steps) t.archived.push_back(std::move(s));
  t.steps.clear();
  t.minimal_spec = std::move(spec);
  t.token_estimate = estimate_tokens(t);
  return true;
}

std::size_t apply_rollback_force_answer(Trajectory& t, const ContextPolicy& p) {
  const std::int64_t limit = p.threshold();
  t.token_estimate = estimate_tokens(t);
  std::size_t dropped = 0;
  while (t.token_estimate > limit) {
    if (t.steps.empty())
      throw Error(ErrorCode::QuestionAloneExceedsBudget,
                  "no round left to roll back at " + std::to_string(t.token_estimate) + " tokens");
    t.archived.push_back(std::move(t.steps.back()));
    t.steps.pop_back();
    ++dropped;
    t.token_estimate = estimate_tokens(t);
  }
  return dropped;
}

// ---------------------------------------------------------------------------
// Text record

namespace {

std::string esc(const std::string& s) {
  return replace_all(replace_all(replace_all(s, "&", "&amp;"), "<", "&lt;"), ">", "&gt;");
}

std::string unesc(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '&') {
      if (s.substr(i, 4) == "&lt;") {
        out.push_back('<');
        i += 3;
        continue;
      }
      if (s.substr(i, 4) == "&gt;") {
        out.push_back('>');
        i += 3;
        continue;
      }
      if (s.substr(i, 5) == "&amp;") {
        out.push_back('&');
        i += 4;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

std::string element(const std::string& tag, const std::string& content) {
  return "<" + tag + ">" + esc(content) + "</" + tag + ">\n";
}

class Reader {
 public:
  explicit Reader(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (i_ < s_.size() && (s_[i_] == '\n' || s_[i_] == ' ' || s_[i_] == '\r' || s_[i_] == '\t')) ++i_;
  }
  bool at(std::string_view lit) {
    skip_ws();
    return s_.substr(i_, lit.size()) == lit;
  }
  void expect(std::string_view lit) {
    if (!at(lit)) malformed("expected " + std::string(lit));
    i_ += lit.size();
  }
  /// Raw text up to (not including) `close`, which is consumed.
  std::string_view until(std::string_view close) {
    std::size_t end = s_.find(close, i_);
    if (end == std::string_view::npos) malformed("unclosed element, missing " + std::string(close));
    std::string_view out = s_.substr(i_, end - i_);
    i_ = end + close.size();
    return out;
  }
  std::string text_element(const std::string& tag) {
    expect("<" + tag + ">");
    std::string_view raw = until("</" + tag + ">");
    if (raw.find('<') != std::string_view::npos) malformed("unexpected tag inside <" + tag + ">");
    return unesc(raw);
  }
  bool done() {
    skip_ws();
    return i_ >= s_.size();
  }
  [[noreturn]] void malformed(const std::string& why) const {
    throw Error(ErrorCode::MalformedRecord, why + " at offset " + std::to_string(i_));
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
};

ToolAction parse_tool_call_body(Reader& r) {
  r.expect("<tool_call>");
  std::string_view inner = r.until("</tool_call>");
  std::string_view json_part = inner;
  ToolAction a;
  std::size_t lt = inner.find('<');
  if (lt != std::string_view::npos) {
    json_part = inner.substr(0, lt);
    std::string_view rest = inner.substr(lt);
    if (rest.substr(0, 6) != "<code>" || rest.size() < 13 || rest.substr(rest.size() - 7) != "</code>")
      throw Error(ErrorCode::MalformedRecord, "unexpected content inside <tool_call>");
    std::string_view code = rest.substr(6, rest.size() - 13);
    if (code.find('<') != std::string_view::npos) throw Error(ErrorCode::MalformedRecord, "unexpected tag inside <code>");
    a.code = unesc(code);
  }
  ojson j = ojson::parse(json_part, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("name") || !j["name"].is_string() || !j.contains("arguments") ||
      !j["arguments"].is_object())
    throw Error(ErrorCode::MalformedRecord, "tool_call must hold {\"name\": string, \"arguments\": object}");
  a.tool_name = j["name"].get<std::string>();
  a.arguments = j["arguments"];
  return a;
}

void rebuild(Trajectory& t, std::vector<Step> all) {
  std::size_t cut = t.resets.empty() ? 0 : t.resets.back().at_step;
  if (cut > all.size()) throw Error(ErrorCode::MalformedRecord, "reset after the last step");
  t.archived.assign(std::make_move_iterator(all.begin()), std::make_move_iterator(all.begin() + static_cast<long>(cut)));
  t.steps.assign(std::make_move_iterator(all.begin() + static_cast<long>(cut)), std::make_move_iterator(all.end()));
  for (std::size_t i = 1; i < t.resets.size(); ++i)
    if (t.resets[i].at_step <= t.resets[i - 1].at_step)
      throw Error(ErrorCode::MalformedRecord, "resets must be strictly increasing in step index");
  t.token_estimate = estimate_tokens(t);
}

}  // namespace

std::string serialize(const Trajectory& t) {
  std::string out = "<trajectory>\n";
  out += element("id", t.id);
  out += element("question", t.question);
  if (!t.minimal_spec.empty()) out += element("minimal_spec", t.minimal_spec);
  std::vector<Step> all = t.all_steps();
  std::size_t next_reset = 0;
  for (std::size_t i = 0; i <= all.size(); ++i) {
    while (next_reset < t.resets.size() && t.resets[next_reset].at_step == i) {
      out += "<reset tokens_before=\"" + std::to_string(t.resets[next_reset].tokens_before) + "\"/>\n";
      ++next_reset;
    }
    if (i == all.size()) break;
    const Step& s = all[i];
    out += s.failed ? "<step failed=\"true\">\n" : "<step>\n";
    out += element("think", s.thought);
    out += render_tool_call(s.action) + "\n";
    out += element("tool_response", s.observation);
    out += "</step>\n";
  }
  if (t.final_answer) out += element("answer", *t.final_answer);
  out += "</trajectory>\n";
  return out;
}

Trajectory deserialize(const std::string& record) {
  Reader r(record);
  Trajectory t;
  r.expect("<trajectory>");
  t.id = r.text_element("id");
  t.question = r.text_element("question");
  if (r.at("<minimal_spec>")) t.minimal_spec = r.text_element("minimal_spec");
  std::vector<Step> all;
  for (;;) {
    if (r.at("<reset tokens_before=\"")) {
      r.expect("<reset tokens_before=\"");
      std::string_view num = r.until("\"/>");
      ResetRecord rr;
      rr.at_step = all.size();
      try {
        std::size_t used = 0;
        rr.tokens_before = std::stoll(std::string(num), &used);
        if (used != num.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        r.malformed("bad tokens_before");
      }
      t.resets.push_back(rr);
      continue;
    }
    if (r.at("<step")) {
      Step s;
      if (r.at("<step failed=\"true\">")) {
        r.expect("<step failed=\"true\">");
        s.failed = true;
      } else {
        r.expect("<step>");
      }
      s.thought = r.text_element("think");
      s.action = parse_tool_call_body(r);
      s.observation = r.text_element("tool_response");
      r.expect("</step>");
      all.push_back(std::move(s));
      continue;
    }
    break;
  }
  if (r.at("<answer>")) t.final_answer = r.text_element("answer");
  r.expect("</trajectory>");
  if (!r.done()) r.malformed("trailing content");
  rebuild(t, std::move(all));
  return t;
}

// ---------------------------------------------------------------------------
// JSONL

nlohmann::json trajectory_to_json(const Trajectory& t) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : t.all_steps()) {
    nlohmann::json js = {{"thought", s.thought},
                         {"tool_name", s.action.tool_name},
                         {"arguments", nlohmann::json::parse(s.action.arguments.dump())},
                         {"observation", s.observation},
                         {"failed", s.failed}};
    if (!s.action.code.empty()) js["code"] = s.action.code;
    steps.push_back(std::move(js));
  }
  nlohmann::json resets = nlohmann::json::array();
  for (const auto& r : t.resets) resets.push_back({{"at_step", r.at_step}, {"tokens_before", r.tokens_before}});
  nlohmann::json j = {{"id", t.id},
                      {"question", t.question},
                      {"minimal_spec", t.minimal_spec},
                      {"steps", steps},
                      {"resets", resets},
                      {"final_answer", t.final_answer ? nlohmann::json(*t.final_answer) : nlohmann::json()},
                      {"token_estimate", t.token_estimate},
                      {"record", serialize(t)}};
  return j;
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
  // The text record is authoritative: it preserves argument key order.
  if (j.contains("record") && j["record"].is_string()) return deserialize(j["record"].get<std::string>());
  try {
    Trajectory t;
    t.id = j.at("id").get<std::string>();
    t.question = j.at("question").get<std::string>();
    t.minimal_spec = j.value("minimal_spec", "");
    std::vector<Step> all;
    for (const auto& js : j.at("steps")) {
      Step s;
      s.thought = js.value("thought", "");
      s.action.tool_name = js.at("tool_name").get<std::string>();
      s.action.arguments = ojson::parse(js.value("arguments", nlohmann::json::object()).dump());
      s.action.code = js.value("code", "");
      s.observation = js.value("observation", "");
      s.failed = js.value("failed", false);
      all.push_back(std::move(s));
    }
    for (const auto& jr : j.value("resets", nlohmann::json::array()))
      t.resets.push_back({jr.at("at_step").get<std::size_t>(), jr.at("tokens_before").get<std::int64_t>()});
    if (j.contains("final_answer") && j["final_answer"].is_string()) t.final_answer = j["final_answer"].get<std::string>();
    rebuild(t, std::move(all));
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  }
}

void write_trajectories_jsonl(std::ostream& out, const std::vector<Trajectory>& ts) {
  for (const auto& t : ts) out << trajectory_to_json(t).dump() << '\n';
}

std::vector<Trajectory> read_trajectories_jsonl(std::istream& in) {
  std::vector<Trajectory> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": not JSON");
    try {
      out.push_back(trajectory_from_json(j));
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// SFT filter

double failed_fraction(const Trajectory& t) {
  std::size_t n = t.step_count();
  if (n == 0) return 0.0;
  std::size_t failed = 0;
  for (const auto& s : t.archived) failed += s.failed;
  for (const auto& s : t.steps) failed += s.failed;
  return static_cast<double>(failed) / static_cast<double>(n);
}

std::vector<Trajectory> sft_filter(const std::vector<Trajectory>& ts, const std::map<std::string, std::string>& gold,
                                   const SftConfig& cfg, SftStats* stats) {
  SftStats st;
  st.input = ts.size();
  std::vector<std::string> question_order;
  std::map<std::string, const Trajectory*> best;
  for (const auto& t : ts) {
    auto g = gold.find(t.question);
    if (!t.final_answer || g == gold.end() || !answers_match(*t.final_answer, g->second)) {
      ++st.wrong_answer;
      continue;
    }
    if (total_tokens(t) > cfg.max_tokens) {
      ++st.over_length;
      continue;
    }
    if (failed_fraction(t) > cfg.max_failed_fraction) {
      ++st.too_many_failures;
      continue;
    }
    auto [it, inserted] = best.emplace(t.question, &t);
    if (inserted) {
      question_order.push_back(t.question);
      continue;
    }
    ++st.duplicates;
    const Trajectory* cur = it->second;
    if (t.step_count() < cur->step_count() || (t.step_count() == cur->step_count() && t.id < cur->id)) it->second = &t;
  }
  std::vector<Trajectory> out;
  for (const auto& q : question_order) out.push_back(*best[q]);
  st.kept = out.size();
  if (stats) *stats = st;
  return out;
}

}  // namespace sf
