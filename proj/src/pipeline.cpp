// SPDX-License-Identifier: Apache-2.0
#include "searchforge/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "searchforge/error.hpp"
#include "searchforge/obfuscation.hpp"

namespace sf {

std::size_t count_gate_violations(const std::vector<TaskSpec>& tasks, int k_min, int msd_min) {
  std::size_t bad = 0;
  for (const auto& t : tasks) {
    if (!t.complexity || !t.complexity->treewidth_exact || !t.complexity->msd) {
      ++bad;
      continue;
    }
    if (*t.complexity->treewidth_exact < k_min || *t.complexity->msd < msd_min) ++bad;
  }
  return bad;
}

nlohmann::json DemoSummary::to_json() const {
  nlohmann::json timing = nlohmann::json::object();
  for (const auto& t : timings) timing[t.stage] = t.seconds;
  return {{"ingested", ingested},
          {"obfuscated_urls", obfuscated_urls},
          {"residual_source_urls", residual_source_urls},
          {"distractors", distractors},
          {"corpus_documents", corpus_documents},
          {"index_hash", index_hash},
          {"synthesis",
           {{"graphs", synthesis.graphs},
            {"subgraphs", synthesis.subgraphs},
            {"candidates", synthesis.candidates},
            {"gate_rejected", synthesis.gate_rejected},
            {"render_rejected", synthesis.render_rejected},
            {"emitted", synthesis.emitted}}},
          {"tasks", tasks},
          {"gate_violations", gate_violations},
          {"completeness", completeness.to_json()},
          {"verified_kept", kept},
          {"verified_filtered", filtered},
          {"curated", curated},
          {"seconds", timing},
          {"ok", ok()}};
}

DemoSummary end_to_end_demo(const DemoConfig& cfg, DemoArtifacts* artifacts) {
  DemoSummary sum;
  DemoArtifacts local;
  DemoArtifacts& art = artifacts ? *artifacts : local;

  auto stage = [&](const std::string& name, auto&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const Error& e) {
      throw Error(e.code(), "stage " + name + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::InvalidArgument, "stage " + name + ": " + e.what());
    }
    sum.timings.push_back({name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
  };

  World world;
  Corpus corpus;
  stage("ingest", [&] {
    world = make_world(cfg.world);
    std::stringstream jsonl;
    write_corpus_jsonl(jsonl, world.corpus);
    IngestStats st;
    corpus = ingest_corpus(jsonl, &st);
    sum.ingested = st.kept;
  });

  stage("obfuscate", [&] {
    ObfuscationConfig oc;
    auto res = obfuscate_urls(corpus, default_url_templates(), keyword_domain_classifier, cfg.seed, oc);
    art.url_mapping = res.mapping;
    sum.obfuscated_urls = res.mapping.size();
    corpus = std::move(res.corpus);
    for (const auto& d : corpus.documents()) sum.residual_source_urls += url_matches_hosts(d.url, oc.host_patterns);
  });

  stage("noise", [&] {
    const auto want = static_cast<std::size_t>(std::llround(cfg.noise_ratio * static_cast<double>(corpus.evidence_count())));
    auto pool = make_distractors(world, want, cfg.seed, cfg.confuser_fraction);
    corpus = inject_noise(corpus, pool, cfg.noise_ratio);
    sum.distractors = corpus.size() - corpus.evidence_count();
    sum.corpus_documents = corpus.size();
  });

  stage("index", [&] {
    art.index = std::make_shared<const IndexSnapshot>(IndexSnapshot::build(std::move(corpus)));
    sum.index_hash = art.index->build_hash();
  });

  stage("synthesize", [&] {
    SynthesisConfig sc = cfg.synthesis;
    sc.seed = cfg.seed;
    art.tasks = synthesize(world.graphs, sc, &sum.synthesis);
    sum.tasks = art.tasks.size();
    sum.gate_violations = count_gate_violations(art.tasks, sc.k_min, sc.msd_min);
  });

  stage("completeness", [&] { sum.completeness = check_evidence_completeness(art.tasks, *art.index, cfg.completeness_top_k); });

  if (cfg.verify) {
    stage("verify", [&] {
      LocalSearchBackend backend(art.index);
      VerifierEnv env{&backend, &art.index->corpus()};
      VerifierPlugins plugins;
      BaselineAgentConfig ac;
      ac.seed = cfg.seed;
      plugins.agent = make_baseline_agent(ac);
      plugins.checker = make_evidence_checker();
      for (const auto& t : art.tasks) {
        auto r = run_pipeline(t, cfg.verifier.stages, env, plugins, cfg.verifier.options);
        (r.final == FinalDecision::Kept ? sum.kept : sum.filtered)++;
        art.reports.push_back(std::move(r));
      }
    });
    stage("curate", [&] {
      std::vector<VerificationReport> eligible;
      for (const auto& r : art.reports)
        if (r.final == FinalDecision::Kept && r.pass_rate) eligible.push_back(r);
      art.curated = curate_rl_queries(eligible, cfg.band_low, cfg.band_high);
      sum.curated = art.curated.size();
    });
  }
  return sum;
}

}  // namespace sf
