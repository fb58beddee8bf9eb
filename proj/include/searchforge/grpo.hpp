// SPDX-License-Identifier: Apache-2.0
//
// Group-relative advantages, the asymmetric clipped surrogate, and masking of
// abnormal rollouts.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "searchforge/trajectory.hpp"

namespace sf {

struct ClipConfig {
  double eps_low = 0.2;
  double eps_high = 0.28;
  double eps_std = 1e-6;
};

struct RolloutGroup {
  std::string query_id;
  std::vector<double> rewards;
  std::optional<std::vector<double>> ratios;
  /// true = excluded from the objective.
  std::vector<bool> masks;
};

/// (r_k - mean) / (population std + eps_std). Throws DegenerateGroup when the
/// spread is zero and eps_std is zero, InvalidArgument on an empty group or
/// negative eps_std.
std::vector<double> group_advantages(const std::vector<double>& rewards, double eps_std);

/// min(rho * A, clip(rho, 1 - eps_low, 1 + eps_high) * A).
double clipped_term(double rho, double advantage, const ClipConfig& cfg);

/// Mean of clipped_term over unmasked samples. Throws MissingRatios,
/// AllMasked, InvalidArgument on length mismatch.
double clipped_objective(const RolloutGroup& group, const std::vector<double>& advantages, const ClipConfig& cfg);

struct AbnormalRules {
  std::int64_t max_tokens = 131072;
  double max_failed_fraction = 0.3;
  bool detect_repetition = true;
  std::size_t repetition_window = 64;
  std::size_t repetition_count = 8;
};

/// True when some period p <= window repeats over at least window * count
/// consecutive characters.
bool has_repetition(std::string_view text, std::size_t window = 64, std::size_t count = 8);

struct AbnormalVerdict {
  bool over_length = false;
  bool too_many_failures = false;
  bool repetition = false;
  bool any() const { return over_length || too_many_failures || repetition; }
};

AbnormalVerdict classify_abnormal(const Trajectory& t, const AbnormalRules& rules);
std::vector<bool> abnormal_mask(const std::vector<Trajectory>& ts, const AbnormalRules& rules = {});

nlohmann::json group_to_json(const RolloutGroup& g);
RolloutGroup group_from_json(const nlohmann::json& j);
/// Throws MalformedRecord with the line number.
std::vector<RolloutGroup> read_groups_jsonl(std::istream& in);

struct GroupAudit {
  std::string query_id;
  std::vector<double> advantages;
  std::optional<double> objective;
  std::optional<std::string> error;
};

/// Advantages and, when ratios are present, the objective for one group.
/// Errors are captured in the audit rather than thrown.
GroupAudit audit_group(const RolloutGroup& g, const ClipConfig& cfg);
nlohmann::json audit_to_json(const GroupAudit& a);

}  // namespace sf
