// SPDX-License-Identifier: Apache-2.0
#include "searchforge/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <istream>

#include "searchforge/error.hpp"
#include "searchforge/text.hpp"

namespace sf {

std::vector<double> group_advantages(const std::vector<double>& rewards, double eps_std) {
  if (rewards.empty()) throw Error(ErrorCode::InvalidArgument, "group needs at least one reward");
  if (!(eps_std >= 0)) throw Error(ErrorCode::InvalidArgument, "eps_std must be >= 0");
  // Centre on the smallest reward first: a constant shift then cancels before
  // any rounding happens in the mean and variance.
  const double base = *std::min_element(rewards.begin(), rewards.end());
  const std::size_t k = rewards.size();
  std::vector<double> c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = rewards[i] - base;
  double mean = 0;
  for (double x : c) mean += x;
  mean /= static_cast<double>(k);
  double var = 0;
  for (double x : c) var += (x - mean) * (x - mean);
  var /= static_cast<double>(k);
  const double sd = std::sqrt(var);
  const double denom = sd + eps_std;
  if (denom == 0) throw Error(ErrorCode::DegenerateGroup, "zero reward spread with eps_std = 0");
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = (c[i] - mean) / denom;
  return out;
}

double clipped_term(double rho, double advantage, const ClipConfig& cfg) {
  const double clipped = std::clamp(rho, 1.0 - cfg.eps_low, 1.0 + cfg.eps_high);
  return std::min(rho * advantage, clipped * advantage);
}

double clipped_objective(const RolloutGroup& group, const std::vector<double>& advantages, const ClipConfig& cfg) {
  if (!group.ratios) throw Error(ErrorCode::MissingRatios, "group '" + group.query_id + "' has no importance ratios");
  if (cfg.eps_low < 0 || cfg.eps_high < 0) throw Error(ErrorCode::InvalidArgument, "clip epsilons must be >= 0");
  const auto& rho = *group.ratios;
  const std::size_t k = group.rewards.size();
  if (rho.size() != k || advantages.size() != k || (!group.masks.empty() && group.masks.size() != k))
    throw Error(ErrorCode::InvalidArgument, "rewards, ratios, masks and advantages must have equal length");
  double sum = 0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!group.masks.empty() && group.masks[i]) continue;
    sum += clipped_term(rho[i], advantages[i], cfg);
    ++used;
  }
  if (used == 0) throw Error(ErrorCode::AllMasked, "every sample in group '" + group.query_id + "' is masked");
  return sum / static_cast<double>(used);
}

bool has_repetition(std::string_view text, std::size_t window, std::size_t count) {
  if (window == 0 || count < 2) return false;
  const std::size_t span = window * count;
  if (text.size() < span) return false;
  for (std::size_t p = 1; p <= window; ++p) {
    // run = length of the current stretch where text[i] == text[i + p]
    std::size_t run = 0;
    for (std::size_t i = 0; i + p < text.size(); ++i) {
      run = text[i] == text[i + p] ? run + 1 : 0;
      if (run + p >= span) return true;
    }
  }
  return false;
}

AbnormalVerdict classify_abnormal(const Trajectory& t, const AbnormalRules& rules) {
  AbnormalVerdict v;
  v.over_length = total_tokens(t) > rules.max_tokens;
  v.too_many_failures = failed_fraction(t) > rules.max_failed_fraction;
  if (rules.detect_repetition) {
    if (t.final_answer) v.repetition = has_repetition(*t.final_answer, rules.repetition_window, rules.repetition_count);
    for (const auto* part : {&t.archived, &t.steps})
      for (const auto& s : *part)
        v.repetition = v.repetition || has_repetition(s.thought, rules.repetition_window, rules.repetition_count);
  }
  return v;
}

std::vector<bool> abnormal_mask(const std::vector<Trajectory>& ts, const AbnormalRules& rules) {
  std::vector<bool> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back(classify_abnormal(t, rules).any());
  return out;
}

nlohmann::json group_to_json(const RolloutGroup& g) {
  nlohmann::json j = {{"query_id", g.query_id}, {"rewards", g.rewards}};
  if (g.ratios) j["ratios"] = *g.ratios;
  if (!g.masks.empty()) j["masks"] = g.masks;
  return j;
}

RolloutGroup group_from_json(const nlohmann::json& j) {
  try {
    RolloutGroup g;
    g.query_id = j.value("query_id", "");
    g.rewards = j.at("rewards").get<std::vector<double>>();
    if (j.contains("ratios") && !j["ratios"].is_null()) g.ratios = j["ratios"].get<std::vector<double>>();
    if (j.contains("masks")) g.masks = j["masks"].get<std::vector<bool>>();
    if (g.rewards.empty()) throw Error(ErrorCode::MalformedRecord, "empty rewards");
    if ((g.ratios && g.ratios->size() != g.rewards.size()) || (!g.masks.empty() && g.masks.size() != g.rewards.size()))
      throw Error(ErrorCode::MalformedRecord, "rewards, ratios and masks differ in length");
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  }
}

std::vector<RolloutGroup> read_groups_jsonl(std::istream& in) {
  std::vector<RolloutGroup> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    try {
      if (j.is_discarded()) throw Error(ErrorCode::MalformedRecord, "not JSON");
      out.push_back(group_from_json(j));
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

GroupAudit audit_group(const RolloutGroup& g, const ClipConfig& cfg) {
  GroupAudit a;
  a.query_id = g.query_id;
  try {
    a.advantages = group_advantages(g.rewards, cfg.eps_std);
    if (g.ratios) a.objective = clipped_objective(g, a.advantages, cfg);
  } catch (const Error& e) {
    a.error = e.what();
  }
  return a;
}

nlohmann::json audit_to_json(const GroupAudit& a) {
  nlohmann::json j = {{"query_id", a.query_id}, {"advantages", a.advantages}};
  j["objective"] = a.objective ? nlohmann::json(*a.objective) : nlohmann::json();
  if (a.error) j["error"] = *a.error;
  return j;
}

}  // namespace sf
