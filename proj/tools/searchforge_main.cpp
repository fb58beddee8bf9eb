// SPDX-License-Identifier: Apache-2.0
//
// searchforge: command-line driver for corpus ingestion, indexing, task
// synthesis, verification, serving, metrics, trajectory filtering and GRPO
// audits.
//
// Exit codes: 0 ok, 1 usage/config, 2 data, 3 environment.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "searchforge/agent.hpp"
#include "searchforge/complexity.hpp"
#include "searchforge/completeness.hpp"
#include "searchforge/corpus.hpp"
#include "searchforge/env_service.hpp"
#include "searchforge/error.hpp"
#include "searchforge/fixtures.hpp"
#include "searchforge/grpo.hpp"
#include "searchforge/index.hpp"
#include "searchforge/obfuscation.hpp"
#include "searchforge/pipeline.hpp"
#include "searchforge/synthesis.hpp"
#include "searchforge/text.hpp"
#include "searchforge/trajectory.hpp"
#include "searchforge/verifier.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Settings {
  std::optional<std::uint64_t> seed;
  // paths
  std::string corpus, graphs, tasks, trajectories, gold, groups, distractors, reports;
  std::string out = ".";
  std::string server;  // host:port of a running service
  // synthesis
  int k_min = 2, k_max = 3, msd_min = 2, subgraphs = 10, size_min = 4, size_max = 8;
  // env
  int port = 8080, top_k = 10;
  double k1 = 1.2, b = 0.75, noise_ratio = 0.0;
  // rl
  double eps_low = 0.2, eps_high = 0.28, eps_std = 1e-6, band_low = 0.0, band_high = 1.0;
  // trajectory filter
  std::int64_t max_tokens = 131072;
  double max_failed_fraction = 0.3;
  sf::PipelineConfig verifier;
  int rollouts = 4;
};

[[noreturn]] void config_error(const std::string& msg) { throw sf::Error(sf::ErrorCode::ConfigInvalid, msg); }

void load_config(const std::string& path, Settings& s) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) config_error("config " + path + " is not a JSON object");
  try {
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (auto p = j.value("paths", json::object()); !p.empty()) {
      s.corpus = p.value("corpus", s.corpus);
      s.graphs = p.value("graphs", s.graphs);
      s.tasks = p.value("tasks", s.tasks);
      s.trajectories = p.value("trajectories", s.trajectories);
      s.gold = p.value("gold", s.gold);
      s.groups = p.value("groups", s.groups);
      s.distractors = p.value("distractors", s.distractors);
      s.out = p.value("out", s.out);
    }
    if (auto y = j.value("synthesis", json::object()); !y.empty()) {
      s.k_min = y.value("k_min", s.k_min);
      s.k_max = y.value("k_max", s.k_max);
      s.msd_min = y.value("msd_min", s.msd_min);
      s.subgraphs = y.value("subgraphs_per_graph", s.subgraphs);
      s.size_min = y.value("size_min", s.size_min);
      s.size_max = y.value("size_max", s.size_max);
    }
    if (auto e = j.value("env", json::object()); !e.empty()) {
      s.port = e.value("port", s.port);
      s.top_k = e.value("top_k", s.top_k);
      s.k1 = e.value("k1", s.k1);
      s.b = e.value("b", s.b);
      s.noise_ratio = e.value("noise_ratio", s.noise_ratio);
      s.server = e.value("server", s.server);
    }
    if (auto r = j.value("rl", json::object()); !r.empty()) {
      s.eps_low = r.value("eps_low", s.eps_low);
      s.eps_high = r.value("eps_high", s.eps_high);
      s.eps_std = r.value("eps_std", s.eps_std);
      s.band_low = r.value("band_low", s.band_low);
      s.band_high = r.value("band_high", s.band_high);
    }
    if (auto t = j.value("trajectory", json::object()); !t.empty()) {
      s.max_tokens = t.value("max_tokens", s.max_tokens);
      s.max_failed_fraction = t.value("max_failed_fraction", s.max_failed_fraction);
    }
    if (j.contains("verifier")) s.verifier = sf::pipeline_config_from_json(j["verifier"]);
  } catch (const json::exception& e) {
    config_error(std::string("config ") + path + ": " + e.what());
  }
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) config_error("missing --" + what);
  if (!fs::is_regular_file(path)) config_error(what + " file not found: " + path);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sf::Error(sf::ErrorCode::Io, "cannot read " + path);
  return in;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name, std::ios::binary);
  if (!out) throw sf::Error(sf::ErrorCode::Io, "cannot write " + (fs::path(dir) / name).string());
  return out;
}

std::vector<sf::ReasoningGraph> read_graphs(const std::string& path) {
  auto in = open_in(path);
  std::vector<sf::ReasoningGraph> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (sf::trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw sf::Error(sf::ErrorCode::MalformedRecord, path + ":" + std::to_string(n) + ": not JSON");
    out.push_back(sf::graph_from_json(j));
  }
  return out;
}

std::vector<sf::TaskSpec> read_tasks(const std::string& path) {
  auto in = open_in(path);
  std::vector<sf::TaskSpec> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (sf::trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw sf::Error(sf::ErrorCode::MalformedRecord, path + ":" + std::to_string(n) + ": not JSON");
    out.push_back(sf::task_from_json(j));
  }
  return out;
}

sf::Corpus read_corpus(const std::string& path, sf::IngestStats* st = nullptr) {
  auto in = open_in(path);
  return sf::ingest_corpus(in, st);
}

std::shared_ptr<const sf::IndexSnapshot> build_index(const Settings& s) {
  require_file(s.corpus, "corpus");
  return std::make_shared<const sf::IndexSnapshot>(sf::IndexSnapshot::build(read_corpus(s.corpus), {s.k1, s.b}));
}

// ---------------------------------------------------------------------------

int cmd_ingest(const Settings& s, bool obfuscate) {
  require_file(s.corpus, "corpus");
  sf::IngestStats st;
  sf::Corpus c = read_corpus(s.corpus, &st);
  json summary = {{"records", st.records}, {"malformed", st.malformed}, {"duplicates", st.duplicates}, {"kept", st.kept}};
  if (obfuscate) {
    auto res = sf::obfuscate_urls(c, sf::default_url_templates(), sf::keyword_domain_classifier, s.seed.value_or(0));
    auto map_out = open_out(s.out, "url_mapping.tsv");
    sf::write_mapping_tsv(map_out, res.mapping);
    summary["obfuscated"] = res.mapping.size();
    c = std::move(res.corpus);
  }
  if (s.noise_ratio > 0) {
    require_file(s.distractors, "distractors");
    sf::Corpus pool = read_corpus(s.distractors);
    c = sf::inject_noise(c, pool.documents(), s.noise_ratio);
    summary["distractors"] = c.size() - c.evidence_count();
  }
  auto out = open_out(s.out, "corpus.jsonl");
  sf::write_corpus_jsonl(out, c);
  summary["documents"] = c.size();
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_index(const Settings& s) {
  auto idx = build_index(s);
  std::cout << json{{"documents", idx->doc_count()},
                    {"vocabulary", idx->vocabulary_size()},
                    {"avg_doc_length", idx->avg_doc_length()},
                    {"build_hash", idx->build_hash()},
                    {"k1", s.k1},
                    {"b", s.b}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_synth(const Settings& s) {
  if (!s.seed) config_error("synth needs --seed");
  require_file(s.graphs, "graphs");
  sf::SynthesisConfig cfg;
  cfg.seed = *s.seed;
  cfg.k_min = s.k_min;
  cfg.k_max = s.k_max;
  cfg.msd_min = s.msd_min;
  cfg.subgraphs_per_graph = s.subgraphs;
  cfg.size_min = s.size_min;
  cfg.size_max = s.size_max;
  sf::SynthesisStats st;
  auto tasks = sf::synthesize(read_graphs(s.graphs), cfg, &st);
  auto out = open_out(s.out, "tasks.jsonl");
  for (const auto& t : tasks) out << sf::task_to_json(t).dump() << "\n";
  std::cout << json{{"graphs", st.graphs},
                    {"subgraphs", st.subgraphs},
                    {"candidates", st.candidates},
                    {"gate_rejected", st.gate_rejected},
                    {"render_rejected", st.render_rejected},
                    {"emitted", st.emitted}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_verify(const Settings& s) {
  require_file(s.tasks, "tasks");
  auto tasks = read_tasks(s.tasks);
  std::unique_ptr<sf::SearchBackend> backend;
  std::shared_ptr<const sf::IndexSnapshot> idx;
  if (!s.server.empty()) {
    auto colon = s.server.rfind(':');
    if (colon == std::string::npos) config_error("--server must be host:port");
    backend = std::make_unique<sf::HttpSearchBackend>(s.server.substr(0, colon), std::stoi(s.server.substr(colon + 1)));
  } else {
    idx = build_index(s);
    backend = std::make_unique<sf::LocalSearchBackend>(idx);
  }
  sf::VerifierEnv env{backend.get(), idx ? &idx->corpus() : nullptr};
  sf::VerifierPlugins plugins;
  sf::BaselineAgentConfig ac;
  ac.seed = s.seed.value_or(0);
  plugins.agent = sf::make_baseline_agent(ac);
  plugins.checker = sf::make_evidence_checker();
  std::vector<sf::VerificationReport> reports;
  for (const auto& t : tasks) reports.push_back(sf::run_pipeline(t, s.verifier.stages, env, plugins, s.verifier.options));
  auto out = open_out(s.out, "reports.jsonl");
  sf::write_reports_jsonl(out, reports);
  std::size_t kept = 0;
  std::vector<sf::VerificationReport> eligible;
  for (const auto& r : reports) {
    if (r.final == sf::FinalDecision::Kept) {
      ++kept;
      if (r.pass_rate) eligible.push_back(r);
    }
  }
  auto curated = sf::curate_rl_queries(eligible, s.band_low, s.band_high);
  auto cur_out = open_out(s.out, "rl_queries.txt");
  for (const auto& id : curated) cur_out << id << "\n";
  std::cout << json{{"tasks", tasks.size()}, {"kept", kept}, {"filtered", reports.size() - kept}, {"curated", curated.size()}}
                   .dump()
            << "\n";
  return 0;
}

sf::EnvService* g_service = nullptr;

int cmd_serve(const Settings& s) {
  auto idx = build_index(s);
  sf::EnvConfig cfg;
  cfg.port = s.port;
  cfg.top_k = s.top_k;
  sf::EnvService service(idx, cfg);
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  std::cerr << "serving " << idx->doc_count() << " documents on " << cfg.host << ":" << cfg.port << " (build "
            << idx->build_hash() << ")\n";
  service.run();
  g_service = nullptr;
  return 0;
}

int cmd_metrics(const Settings& s, bool reference) {
  std::vector<sf::ReasoningGraph> graphs;
  if (reference) {
    graphs = sf::reference_shapes();
  } else {
    require_file(s.graphs, "graphs");
    graphs = read_graphs(s.graphs);
  }
  for (const auto& g : graphs) {
    json j = sf::complexity_to_json(sf::compute_complexity(g));
    j["graph"] = g.id();
    std::cout << j.dump() << "\n";
  }
  return 0;
}

int cmd_traj_filter(const Settings& s) {
  require_file(s.trajectories, "trajectories");
  require_file(s.gold, "gold");
  auto tin = open_in(s.trajectories);
  auto ts = sf::read_trajectories_jsonl(tin);
  std::map<std::string, std::string> gold;
  auto gin = open_in(s.gold);
  std::string line;
  while (std::getline(gin, line)) {
    if (sf::trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("question") || !j.contains("answer"))
      throw sf::Error(sf::ErrorCode::MalformedRecord, "gold lines need question and answer");
    gold[j["question"].get<std::string>()] = j["answer"].get<std::string>();
  }
  sf::SftConfig cfg{s.max_tokens, s.max_failed_fraction};
  sf::SftStats st;
  auto kept = sf::sft_filter(ts, gold, cfg, &st);
  auto out = open_out(s.out, "sft.jsonl");
  sf::write_trajectories_jsonl(out, kept);
  std::cout << json{{"input", st.input},
                    {"wrong_answer", st.wrong_answer},
                    {"over_length", st.over_length},
                    {"too_many_failures", st.too_many_failures},
                    {"duplicates", st.duplicates},
                    {"kept", st.kept}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_grpo(const Settings& s) {
  require_file(s.groups, "groups");
  auto in = open_in(s.groups);
  sf::ClipConfig cfg{s.eps_low, s.eps_high, s.eps_std};
  int failures = 0;
  for (const auto& g : sf::read_groups_jsonl(in)) {
    auto audit = sf::audit_group(g, cfg);
    failures += audit.error.has_value();
    std::cout << sf::audit_to_json(audit).dump() << "\n";
  }
  return failures ? 2 : 0;
}

int cmd_demo(const Settings& s) {
  sf::DemoConfig cfg;
  cfg.seed = s.seed.value_or(42);
  cfg.noise_ratio = s.noise_ratio > 0 ? s.noise_ratio : 5.0;
  cfg.synthesis.k_min = s.k_min;
  cfg.synthesis.k_max = s.k_max;
  cfg.synthesis.msd_min = s.msd_min;
  cfg.synthesis.subgraphs_per_graph = s.subgraphs;
  cfg.verifier = s.verifier;
  cfg.band_low = s.band_low;
  cfg.band_high = s.band_high;
  sf::DemoArtifacts art;
  auto summary = sf::end_to_end_demo(cfg, &art);
  auto tout = open_out(s.out, "tasks.jsonl");
  for (const auto& t : art.tasks) tout << sf::task_to_json(t).dump() << "\n";
  auto rout = open_out(s.out, "reports.jsonl");
  sf::write_reports_jsonl(rout, art.reports);
  auto sout = open_out(s.out, "summary.json");
  sout << summary.to_json().dump(2) << "\n";
  std::cout << summary.to_json().dump(2) << "\n";
  return summary.ok() ? 0 : 2;
}

int cmd_world(const Settings& s) {
  sf::WorldConfig wc;
  wc.seed = s.seed.value_or(wc.seed);
  sf::World w = sf::make_world(wc);
  auto cout_ = open_out(s.out, "corpus.jsonl");
  sf::write_corpus_jsonl(cout_, w.corpus);
  auto gout = open_out(s.out, "graphs.jsonl");
  for (const auto& g : w.graphs) gout << sf::graph_to_jsonl(g) << "\n";
  const auto n = static_cast<std::size_t>(std::llround(std::max(s.noise_ratio, 5.0) * static_cast<double>(w.corpus.size())));
  sf::Corpus pool;
  for (auto& d : sf::make_distractors(w, n, wc.seed)) pool.add(std::move(d));
  auto dout = open_out(s.out, "distractors.jsonl");
  sf::write_corpus_jsonl(dout, pool);
  std::cout << json{{"documents", w.corpus.size()}, {"graphs", w.graphs.size()}, {"distractors", pool.size()}}.dump() << "\n";
  return 0;
}

int exit_code_for(sf::ErrorCode c) {
  switch (c) {
    case sf::ErrorCode::ConfigInvalid:
    case sf::ErrorCode::InvalidArgument:
      return 1;
    case sf::ErrorCode::EnvironmentUnreachable:
    case sf::ErrorCode::PortInUse:
    case sf::ErrorCode::Timeout:
      return 3;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"searchforge: synthesize, verify and serve search-agent tasks"};
  app.require_subcommand(1);
  Settings flags;
  std::string config_path;
  std::uint64_t seed = 0;
  bool reference = false;
  bool obfuscate = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file; flags override it")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--out", flags.out, "output directory");
  };

  auto* ingest = app.add_subcommand("ingest", "dedupe a corpus JSONL, optionally obfuscate urls and add noise");
  common(ingest);
  ingest->add_option("--corpus", flags.corpus, "corpus JSONL");
  ingest->add_option("--distractors", flags.distractors, "distractor JSONL pool");
  ingest->add_option("--noise-ratio", flags.noise_ratio, "distractors per evidence document");
  ingest->add_flag("--obfuscate", obfuscate, "rewrite encyclopedia urls");

  auto* index = app.add_subcommand("index", "build the BM25 index and print its statistics");
  common(index);
  index->add_option("--corpus", flags.corpus, "corpus JSONL");

  auto* synth = app.add_subcommand("synth", "synthesize tasks from reasoning graphs");
  common(synth);
  synth->add_option("--graphs", flags.graphs, "graph JSONL");
  synth->add_option("--k-min", flags.k_min, "minimum treewidth");
  synth->add_option("--k-max", flags.k_max, "maximum treewidth");
  synth->add_option("--msd-min", flags.msd_min, "minimum source dispersion");
  synth->add_option("--subgraphs", flags.subgraphs, "subgraphs sampled per graph");

  auto* verify = app.add_subcommand("verify", "run the verifier pipeline and curate RL queries");
  common(verify);
  verify->add_option("--tasks", flags.tasks, "task JSONL");
  verify->add_option("--corpus", flags.corpus, "corpus JSONL for a local index");
  verify->add_option("--server", flags.server, "host:port of a running service");
  verify->add_option("--band-low", flags.band_low, "exclusive lower pass-rate bound");
  verify->add_option("--band-high", flags.band_high, "exclusive upper pass-rate bound");

  auto* serve = app.add_subcommand("serve", "serve /search, /visit, /python and /healthz");
  common(serve);
  serve->add_option("--corpus", flags.corpus, "corpus JSONL");
  serve->add_option("--port", flags.port, "listen port")->check(CLI::Range(0, 65535));
  serve->add_option("--top-k", flags.top_k, "default results per query")->check(CLI::PositiveNumber);

  auto* metrics = app.add_subcommand("metrics", "print complexity reports for graphs");
  common(metrics);
  metrics->add_option("--graphs", flags.graphs, "graph JSONL");
  metrics->add_flag("--reference", reference, "use the built-in chain, cycle and clique");

  auto* traj = app.add_subcommand("traj-filter", "filter trajectories for supervised fine-tuning");
  common(traj);
  traj->add_option("--trajectories", flags.trajectories, "trajectory JSONL");
  traj->add_option("--gold", flags.gold, "JSONL of {question, answer}");
  traj->add_option("--max-tokens", flags.max_tokens, "length limit");
  traj->add_option("--max-failed-fraction", flags.max_failed_fraction, "failed-step limit");

  auto* grpo = app.add_subcommand("grpo", "print advantages and clipped objectives for rollout groups");
  common(grpo);
  grpo->add_option("--groups", flags.groups, "group JSONL");
  grpo->add_option("--eps-low", flags.eps_low, "lower clip");
  grpo->add_option("--eps-high", flags.eps_high, "upper clip");
  grpo->add_option("--eps-std", flags.eps_std, "std stabilizer");

  auto* demo = app.add_subcommand("demo", "run the whole pipeline on the generated fixture world");
  common(demo);
  demo->add_option("--noise-ratio", flags.noise_ratio, "distractors per evidence document");
  demo->add_option("--k-min", flags.k_min, "minimum treewidth");
  demo->add_option("--k-max", flags.k_max, "maximum treewidth");
  demo->add_option("--msd-min", flags.msd_min, "minimum source dispersion");
  demo->add_option("--band-low", flags.band_low, "exclusive lower pass-rate bound");
  demo->add_option("--band-high", flags.band_high, "exclusive upper pass-rate bound");

  auto* world = app.add_subcommand("world", "write the generated fixture world as JSONL");
  common(world);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    Settings s;
    if (!config_path.empty()) load_config(config_path, s);
    // Flags win over the config file; only explicitly given flags apply.
    CLI::App* sub = app.get_subcommands().front();
    auto set = [&](const char* name) {
      auto* opt = sub->get_option_no_throw(std::string("--") + name);
      return opt && opt->count() > 0;
    };
    if (set("seed")) s.seed = seed;
    if (set("out")) s.out = flags.out;
    if (set("corpus")) s.corpus = flags.corpus;
    if (set("distractors")) s.distractors = flags.distractors;
    if (set("noise-ratio")) s.noise_ratio = flags.noise_ratio;
    if (set("graphs")) s.graphs = flags.graphs;
    if (set("k-min")) s.k_min = flags.k_min;
    if (set("k-max")) s.k_max = flags.k_max;
    if (set("msd-min")) s.msd_min = flags.msd_min;
    if (set("subgraphs")) s.subgraphs = flags.subgraphs;
    if (set("tasks")) s.tasks = flags.tasks;
    if (set("server")) s.server = flags.server;
    if (set("band-low")) s.band_low = flags.band_low;
    if (set("band-high")) s.band_high = flags.band_high;
    if (set("port")) s.port = flags.port;
    if (set("top-k")) s.top_k = flags.top_k;
    if (set("trajectories")) s.trajectories = flags.trajectories;
    if (set("gold")) s.gold = flags.gold;
    if (set("max-tokens")) s.max_tokens = flags.max_tokens;
    if (set("max-failed-fraction")) s.max_failed_fraction = flags.max_failed_fraction;
    if (set("groups")) s.groups = flags.groups;
    if (set("eps-low")) s.eps_low = flags.eps_low;
    if (set("eps-high")) s.eps_high = flags.eps_high;
    if (set("eps-std")) s.eps_std = flags.eps_std;
    if (s.k_min > s.k_max) config_error("--k-min exceeds --k-max");
    if (s.band_low >= s.band_high) config_error("--band-low must be below --band-high");

    const std::string name = sub->get_name();
    if (name == "ingest") return cmd_ingest(s, obfuscate);
    if (name == "index") return cmd_index(s);
    if (name == "synth") return cmd_synth(s);
    if (name == "verify") return cmd_verify(s);
    if (name == "serve") return cmd_serve(s);
    if (name == "metrics") return cmd_metrics(s, reference);
    if (name == "traj-filter") return cmd_traj_filter(s);
    if (name == "grpo") return cmd_grpo(s);
    if (name == "demo") return cmd_demo(s);
    if (name == "world") return cmd_world(s);
    return 1;
  } catch (const sf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
