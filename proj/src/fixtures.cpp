// SPDX-License-Identifier: Apache-2.0
#include "searchforge/fixtures.hpp"

#include <array>
#include <cstdio>
#include <map>
#include <random>
#include <set>

#include "searchforge/synthesis.hpp"
#include "searchforge/text.hpp"

namespace sf {

namespace {

constexpr std::array kOnsets = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "dr",
                                "gr", "kr", "tr", "th", "st", "sk", "vr", "zh"};
constexpr std::array kVowels = {"a", "e", "i", "o", "u", "ae", "ou", "ei"};
constexpr std::array kCodas = {"", "n", "r", "l", "s", "th", "m", "x"};

constexpr std::array kFiller = {
    "river", "market", "winter", "season", "report", "garden", "harbor", "council", "bridge", "valley",
    "archive", "museum", "railway", "festival", "library", "province", "century", "treaty", "journal", "estate",
    "painting", "concert", "orchard", "factory", "quarry", "lighthouse", "monastery", "observatory", "parliament",
    "senate", "tribunal", "meadow", "canal", "glacier", "summit", "plateau", "delta", "lagoon", "forest", "island",
    "harvest", "voyage", "expedition", "chronicle", "survey", "census", "ledger", "charter", "statute", "manuscript",
    "engine", "signal", "circuit", "crystal", "mineral", "compound", "theorem", "lecture", "seminar", "academy",
    "the", "of", "and", "was", "its", "with", "from", "during", "after", "before", "near", "under", "over",
    "many", "several", "early", "late", "northern", "southern", "eastern", "western", "old", "new", "great", "small"};

std::string syllable(std::mt19937_64& rng) {
  std::string s = kOnsets[rng() % kOnsets.size()];
  s += kVowels[rng() % kVowels.size()];
  s += kCodas[rng() % kCodas.size()];
  return s;
}

std::string name_word(std::mt19937_64& rng, int syllables) {
  std::string w;
  for (int i = 0; i < syllables; ++i) w += syllable(rng);
  w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

enum class Kind { Person, Place, Organization, Work };
constexpr std::array kKinds = {Kind::Person, Kind::Place, Kind::Organization, Kind::Work};

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Person: return "person";
    case Kind::Place: return "place";
    case Kind::Organization: return "organization";
    case Kind::Work: return "work";
  }
  return "general";
}

const char* kind_noun(Kind k) {
  switch (k) {
    case Kind::Person: return "scholar";
    case Kind::Place: return "town";
    case Kind::Organization: return "institution";
    case Kind::Work: return "book";
  }
  return "topic";
}

std::string make_label(std::mt19937_64& rng, Kind k) {
  switch (k) {
    case Kind::Person: return name_word(rng, 2) + " " + name_word(rng, 3);
    case Kind::Place: return name_word(rng, 3);
    case Kind::Organization: {
      static constexpr std::array kSuffix = {"Institute", "Society", "Company", "Abbey", "College"};
      return name_word(rng, 3) + " " + kSuffix[rng() % kSuffix.size()];
    }
    case Kind::Work: {
      static constexpr std::array kHead = {"Chronicle", "Songs", "Letters", "Atlas", "Treatise"};
      return std::string("The ") + kHead[rng() % kHead.size()] + " of " + name_word(rng, 3);
    }
  }
  return name_word(rng, 3);
}

std::string relation_for(Kind a, Kind b) {
  static const std::map<std::pair<Kind, Kind>, std::string> table = {
      {{Kind::Person, Kind::Place}, "born_in"},        {{Kind::Person, Kind::Organization}, "works_at"},
      {{Kind::Person, Kind::Person}, "collaborated_with"}, {{Kind::Person, Kind::Work}, "authored"},
      {{Kind::Place, Kind::Place}, "located_in"},      {{Kind::Place, Kind::Person}, "named_after"},
      {{Kind::Organization, Kind::Place}, "located_in"}, {{Kind::Organization, Kind::Person}, "founded_by"},
      {{Kind::Organization, Kind::Organization}, "member_of"}, {{Kind::Work, Kind::Place}, "named_after"},
      {{Kind::Work, Kind::Person}, "named_after"},      {{Kind::Work, Kind::Work}, "named_after"},
      {{Kind::Work, Kind::Organization}, "named_after"}, {{Kind::Place, Kind::Organization}, "named_after"},
      {{Kind::Place, Kind::Work}, "named_after"},       {{Kind::Organization, Kind::Work}, "named_after"},
  };
  return table.at({a, b});
}

std::string filler_sentence(std::mt19937_64& rng, int words) {
  std::string s;
  for (int i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += kFiller[rng() % kFiller.size()];
  }
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s + ".";
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string wiki_url(const std::string& title) { return "https://en.wikipedia.org/wiki/" + replace_all(title, " ", "_"); }

}  // namespace

World make_world(const WorldConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const TemplateLibrary phrases = TemplateLibrary::defaults();
  World w;
  std::set<std::string> used_labels;
  std::set<std::string> used_tokens;

  struct Entity {
    NodeId id;
    std::string label;
    Kind kind;
    std::vector<std::string> sentences;
    std::map<std::string, std::string> attributes;
  };

  for (int gi = 0; gi < cfg.graphs; ++gi) {
    const std::string gid = "world-g" + std::to_string(gi);
    std::vector<Entity> ents;
    for (int i = 0; i < cfg.nodes_per_graph; ++i) {
      Entity e;
      e.kind = kKinds[rng() % kKinds.size()];
      // Labels are unique and share no name word with earlier labels.
      for (;;) {
        e.label = make_label(rng, e.kind);
        bool fresh = !used_labels.count(normalize_answer(e.label));
        for (const auto& tok : tokenize(e.label)) {
          bool generic = tok == "the" || tok == "of" || tok == "institute" || tok == "society" || tok == "company" ||
                         tok == "abbey" || tok == "college" || tok == "chronicle" || tok == "songs" ||
                         tok == "letters" || tok == "atlas" || tok == "treatise";
          if (!generic && used_tokens.count(tok)) fresh = false;
        }
        if (fresh) break;
      }
      used_labels.insert(normalize_answer(e.label));
      for (const auto& tok : tokenize(e.label)) used_tokens.insert(tok);
      e.id = gid + "-n" + std::to_string(i);
      e.sentences.push_back(e.label + " is a " + kind_noun(e.kind) + ".");
      if (e.kind == Kind::Place && unit(rng) < 0.5) {
        e.attributes["lat"] = fixed2(40.0 + unit(rng) * 10.0);
        e.attributes["lon"] = fixed2(-5.0 + unit(rng) * 20.0);
      }
      if (e.kind == Kind::Person && unit(rng) < 0.5)
        e.attributes["citations"] = std::to_string(200 + static_cast<int>(unit(rng) * 20000));
      ents.push_back(std::move(e));
    }

    std::vector<GraphEdge> edges;
    auto link = [&](int a, int b) {
      const std::string rel = relation_for(ents[a].kind, ents[b].kind);
      edges.push_back({ents[a].id, ents[b].id, rel});
      const std::string sentence =
          fill_template(phrases.templates.at(rel), {{"source", ents[a].label}, {"target", ents[b].label}}) + ".";
      ents[a].sentences.push_back(sentence);
      ents[b].sentences.push_back(sentence);
    };
    const int n = cfg.nodes_per_graph;
    for (int i = 0; i + 1 < n; ++i) link(i, i + 1);
    for (int i = 0; i + 2 < n; ++i)
      if (unit(rng) < cfg.strip_probability) link(i, i + 2);
    for (int i = 0; i + 3 < n; ++i)
      if (unit(rng) < cfg.chord_probability) link(i, i + 3);

    std::vector<GraphNode> nodes;
    for (auto& e : ents) {
      GraphNode node;
      node.id = e.id;
      node.label = e.label;
      node.role = unit(rng) < cfg.given_probability ? NodeRole::Given : NodeRole::Intermediate;
      node.attributes = e.attributes;
      node.attributes["kind"] = kind_name(e.kind);
      const DocumentId doc_id = "doc-" + slugify(e.label);
      node.evidence.insert(doc_id);
      nodes.push_back(std::move(node));

      Document d;
      d.id = doc_id;
      d.title = e.label;
      d.url = wiki_url(e.label);
      d.entity_domain = kind_name(e.kind);
      for (std::size_t s = 0; s < e.sentences.size(); ++s) d.body += (s ? "\n" : "") + e.sentences[s];
      w.corpus.add(std::move(d));
      w.entity_labels.push_back(e.label);
    }
    w.graphs.push_back(build_graph(std::move(nodes), std::move(edges), true, gid));
  }

  for (std::size_t i = 0; w.corpus.size() < cfg.base_documents; ++i) {
    Document d;
    std::string title;
    do {
      title = name_word(rng, 2) + " " + kFiller[rng() % 60];
      title[title.find(' ') + 1] = static_cast<char>(std::toupper(static_cast<unsigned char>(title[title.find(' ') + 1])));
    } while (used_labels.count(normalize_answer(title)));
    d.id = "bg-" + std::to_string(i);
    d.title = title;
    d.url = i % 3 == 0 ? "https://archive.example.org/page/" + std::to_string(i) : wiki_url(title + " " + std::to_string(i));
    d.body = title + " is a " + kFiller[rng() % 60] + ".";
    const int sentences = 2 + static_cast<int>(rng() % 3);
    for (int s = 0; s < sentences; ++s) d.body += "\n" + filler_sentence(rng, 6 + static_cast<int>(rng() % 6));
    w.corpus.add(std::move(d));
  }
  return w;
}

std::vector<Document> make_distractors(const World& w, std::size_t count, std::uint64_t seed, double confuser_fraction) {
  std::mt19937_64 rng(seed ^ 0xd1b54a32d192ed03ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Document> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Document d;
    d.id = "noise-" + std::to_string(i);
    d.url = "https://noise.example.net/" + std::to_string(seed) + "/" + std::to_string(i);
    d.is_distractor = true;
    if (!w.entity_labels.empty() && unit(rng) < confuser_fraction) {
      const std::string& label = w.entity_labels[rng() % w.entity_labels.size()];
      d.title = "Notes on " + label;
      d.body = label + ". " + label + " " + kFiller[rng() % 60] + ". " + label + ".";
    } else {
      d.title = filler_sentence(rng, 3);
      d.title.pop_back();
      d.body = filler_sentence(rng, 8) + "\n" + filler_sentence(rng, 8);
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<ReasoningGraph> reference_shapes() {
  auto make = [](const std::string& id, const std::vector<std::pair<int, int>>& pairs) {
    std::vector<GraphNode> nodes;
    const char* names[] = {"a", "b", "c", "d"};
    for (int i = 0; i < 4; ++i) {
      GraphNode n;
      n.id = names[i];
      n.label = std::string("Entity ") + static_cast<char>('A' + i);
      n.role = i == 0 ? NodeRole::Given : NodeRole::Intermediate;
      n.evidence.insert(id + "-doc-" + names[i]);
      nodes.push_back(std::move(n));
    }
    std::vector<GraphEdge> edges;
    for (auto [s, t] : pairs) edges.push_back({names[s], names[t], "related_to"});
    return build_graph(std::move(nodes), std::move(edges), true, id);
  };
  return {make("chain", {{0, 1}, {1, 2}, {2, 3}}), make("cycle", {{0, 1}, {1, 2}, {2, 3}, {0, 3}}),
          make("clique", {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}})};
}

}  // namespace sf
