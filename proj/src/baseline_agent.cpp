// SPDX-License-Identifier: Apache-2.0
#include "searchforge/agent.hpp"

#include <cctype>
#include <algorithm>
#include <random>
#include <set>

#include "searchforge/text.hpp"

namespace sf {

namespace {

std::string format_results(const std::vector<SearchResult>& results) {
  std::string out;
  for (std::size_t i = 0; i < results.size(); ++i) {
    out += std::to_string(i + 1) + ". " + results[i].title + " (" + results[i].url + ")\n" + results[i].snippet + "\n";
  }
  return out;
}

std::size_t coverage(const std::set<std::string>& question_terms, const std::string& text) {
  std::size_t n = 0;
  std::set<std::string> seen;
  for (const auto& tok : tokenize(text))
    if (question_terms.count(tok) && seen.insert(tok).second) ++n;
  return n;
}

// "Identify X: a; b; c." -> ("X", {"a", "b", "c"}). Empty placeholder when the
// question does not follow that shape.
std::pair<std::string, std::vector<std::string>> split_clauses(const std::string& q) {
  std::pair<std::string, std::vector<std::string>> out;
  auto colon = q.find(':');
  if (q.rfind("Identify ", 0) != 0 || colon == std::string::npos) return out;
  out.first = trim(q.substr(9, colon - 9));
  std::string rest = q.substr(colon + 1);
  std::size_t start = 0;
  for (;;) {
    auto end = rest.find(';', start);
    std::string clause = trim(rest.substr(start, end == std::string::npos ? std::string::npos : end - start));
    while (!clause.empty() && clause.back() == '.') clause.pop_back();
    if (!clause.empty()) out.second.push_back(clause);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

bool mentions_word(const std::string& clause, const std::string& word) {
  auto boundary = [&](std::size_t i) { return i >= clause.size() || !std::isalnum(static_cast<unsigned char>(clause[i])); };
  for (auto pos = clause.find(word); pos != std::string::npos; pos = clause.find(word, pos + 1))
    if ((pos == 0 || boundary(pos - 1)) && boundary(pos + word.size())) return true;
  return false;
}

}  // namespace

RolloutResult baseline_rollout(const TaskSpec& t, SearchBackend& search, int rollout_index,
                               const BaselineAgentConfig& cfg) {
  RolloutResult result;
  Trajectory traj = make_trajectory(t.id + "/r" + std::to_string(rollout_index), t.question_text);

  auto results = search.search({t.question_text}, cfg.top_k).at(0);
  Step s1;
  s1.thought = "Search the whole question first.";
  s1.action.tool_name = "search";
  s1.action.arguments = nlohmann::ordered_json{{"query", {t.question_text}}};
  s1.observation = format_results(results);
  s1.failed = results.empty();
  append_step(traj, std::move(s1));

  // Pages already named in the question are clues, not answers.
  const std::string nq = normalize_answer(t.question_text);
  std::vector<const SearchResult*> candidates;
  for (const auto& r : results) {
    std::string nt = normalize_answer(r.title);
    if (nt.empty() || nq.find(nt) != std::string::npos) continue;
    candidates.push_back(&r);
    if (static_cast<int>(candidates.size()) >= cfg.max_candidates) break;
  }
  if (candidates.empty()) {
    result.consistent = false;
    finalize(traj, "");
    result.trajectory = std::move(traj);
    return result;
  }

  std::vector<std::string> urls;
  for (const auto* c : candidates) urls.push_back(c->url);
  auto pages = search.visit(urls, t.question_text);
  Step s2;
  s2.thought = "Read the candidate pages and compare them with the clues.";
  s2.action.tool_name = "visit";
  s2.action.arguments = nlohmann::ordered_json{{"url", urls}, {"goal", t.question_text}};
  for (const auto& p : pages) s2.observation += p.url + "\n" + p.content + "\n\n";
  s2.failed = std::all_of(pages.begin(), pages.end(), [](const VisitResult& p) { return p.status != VisitStatus::Ok; });
  append_step(traj, std::move(s2));

  // Rank by clauses about the unknown that the page states once the
  // candidate's name is substituted, then by plain term coverage.
  const auto [placeholder, clauses] = split_clauses(t.question_text);
  std::set<std::string> terms;
  for (const auto& tok : tokenize(t.question_text)) terms.insert(tok);
  std::size_t open_clauses = 0;
  for (const auto& c : clauses) open_clauses += !placeholder.empty() && mentions_word(c, placeholder);
  std::vector<std::size_t> verified(candidates.size(), 0);
  std::vector<std::size_t> cov(candidates.size(), 0);
  for (std::size_t i = 0; i < candidates.size() && i < pages.size(); ++i) {
    if (pages[i].status != VisitStatus::Ok) continue;
    cov[i] = coverage(terms, candidates[i]->title + " " + pages[i].content);
    for (const auto& c : clauses) {
      if (placeholder.empty() || !mentions_word(c, placeholder)) continue;
      std::string filled = c;
      std::size_t pos = 0;
      while ((pos = filled.find(placeholder, pos)) != std::string::npos) {
        filled.replace(pos, placeholder.size(), candidates[i]->title);
        pos += candidates[i]->title.size();
      }
      verified[i] += normalized_contains(pages[i].content, filled);
    }
  }
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return verified[a] != verified[b] ? verified[a] > verified[b] : cov[a] > cov[b];
  });

  std::mt19937_64 rng(fnv1a64(t.id, cfg.seed ^ 0x9e3779b97f4a7c15ULL) + static_cast<std::uint64_t>(rollout_index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t pick = 0;
  while (pick + 1 < order.size() && unit(rng) >= cfg.greedy_probability) ++pick;
  const std::size_t chosen = order[pick];

  result.final_answer = candidates[chosen]->title;
  result.consistent = open_clauses > 0 ? verified[chosen] == open_clauses : cov[chosen] == cov[order[0]] && cov[chosen] > 0;
  finalize(traj, result.final_answer);
  result.trajectory = std::move(traj);
  return result;
}

AgentPlugin make_baseline_agent(BaselineAgentConfig cfg) {
  return [cfg](const TaskSpec& t, SearchBackend& search, int i) { return baseline_rollout(t, search, i, cfg); };
}

ConsistencyPlugin make_evidence_checker() {
  return [](const TaskSpec& t, const EvidenceBundle& b) {
    ConsistencyVerdict v;
    if (b.passages.empty()) {
      v.note = "no passages to check";
      return v;
    }
    for (const auto& e : t.subgraph.edges()) {
      for (const NodeId* id : {&e.source, &e.target}) {
        if (*id == t.answer_node) continue;
        const std::string& label = t.subgraph.node(*id).label;
        bool found = std::any_of(b.passages.begin(), b.passages.end(),
                                 [&](const std::string& p) { return normalized_contains(p, label); });
        if (!found) {
          v.consistent = false;
          v.note = "no evidence passage mentions '" + label + "'";
          return v;
        }
      }
    }
    v.note = "all triple endpoints grounded";
    return v;
  };
}

}  // namespace sf
