#include <cstdlib>

#include "corpusmix/embeddings.hpp"
#include "corpusmix/error.hpp"
#include "corpusmix/io.hpp"
#include "corpusmix/pipeline.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace corpusmix;
namespace fs = std::filesystem;

namespace {

const char* const kWords[] = {"river", "engine", "theory", "market", "garden", "signal", "protein", "orbit",
                              "ledger", "canvas", "harbor", "lattice", "meadow", "kernel", "circuit", "fabric"};

// A small on-disk workspace: corpus with text, embeddings with sidecar.
struct Workspace {
  testing::TempDir dir;
  fs::path corpus = dir / "corpus.jsonl";
  fs::path embeddings = dir / "emb.f32";
  fs::path out = dir / "out";
  std::size_t n;

  explicit Workspace(std::size_t docs = 300, std::uint64_t seed = 9) : n(docs) {
    Rng rng(seed);
    std::vector<Document> corpus_docs;
    std::vector<std::string> ids;
    const char* domains[] = {"arxiv", "books", "wikipedia"};
    for (std::size_t i = 0; i < n; ++i) {
      Document d;
      d.doc_id = "doc-" + std::to_string(i);
      d.domain = domains[i % 3];
      std::string text = "The";
      const std::size_t words = 5 + rng.below(120);
      for (std::size_t w = 0; w < words; ++w) {
        text += ' ';
        text += kWords[rng.below(16)];
        if (w % 9 == 8) text += '.';
      }
      text += '.';
      d.text = text;
      d.token_count = words + 1;
      corpus_docs.push_back(d);
      ids.push_back(d.doc_id);
    }
    testing::write_corpus(corpus, corpus_docs);
    write_embedding_file(embeddings, default_sidecar_path(embeddings), ids,
                         testing::blob_embeddings(n, 16, 3, 0.3, seed));
  }

  PipelineConfig config() const {
    PipelineConfig c;
    c.corpus = {corpus};
    c.embeddings = embeddings;
    c.fallback_quality = true;
    c.output_dir = out;
    return c;
  }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CORPUSMIX_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("config JSON round trip and unknown keys") {
  PipelineConfig c;
  c.corpus = {"a.jsonl", "b.jsonl"};
  c.alpha = 0.3;
  c.k = 12;
  c.init = KMeansInit::kRandom;
  c.weighting = WeightingMode::kQualityOnly;
  const auto back = PipelineConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK_THROWS_WITH_AS(PipelineConfig::from_json({{"alpah", 0.5}}), doctest::Contains("alpah"), Error);
  CHECK_THROWS_AS(PipelineConfig::from_json({{"init", "kmeans"}}), Error);
}

TEST_CASE("validate names the missing input") {
  PipelineConfig c;
  c.corpus = {"/nonexistent/corpus.jsonl"};
  CHECK_THROWS_WITH_AS(run_manifest(c), doctest::Contains("/nonexistent/corpus.jsonl"), Error);
  c.corpus.clear();
  CHECK_THROWS_AS(run_manifest(c), Error);
}

TEST_CASE("manifest stage writes stats and a config snapshot") {
  Workspace ws(60);
  const auto m = run_manifest(ws.config());
  CHECK(m.total_docs == 60);
  CHECK(CorpusManifest::from_json(read_json_file(ws.out / artifacts::kManifest)) == m);
  const auto snap = read_json_file(ws.out / "manifest.config.json");
  CHECK(snap["stage"] == "manifest");
  CHECK(snap["alpha"] == 0.8);
  const std::string first = testing::slurp(ws.out / artifacts::kManifest);
  run_manifest(ws.config());
  CHECK(testing::slurp(ws.out / artifacts::kManifest) == first);
}

TEST_CASE("full pipeline is deterministic") {
  Workspace ws;
  const auto cfg = ws.config();
  CHECK(run_annotate_fallback(cfg) == ws.n);
  const auto clusters = run_cluster(cfg);
  CHECK(clusters.clustering.k == default_cluster_count(ws.n));
  const auto first = run_mix(cfg);
  const std::string plan = testing::slurp(ws.out / artifacts::kPlan);
  const std::string dataset = testing::slurp(ws.out / artifacts::kDataset);
  const std::string summary = testing::slurp(ws.out / artifacts::kSummary);
  CHECK_FALSE(dataset.empty());

  run_cluster(cfg);
  run_mix(cfg);
  CHECK(testing::slurp(ws.out / artifacts::kPlan) == plan);
  CHECK(testing::slurp(ws.out / artifacts::kDataset) == dataset);
  CHECK(testing::slurp(ws.out / artifacts::kSummary) == summary);

  // The summary agrees with the plan and with the default target.
  const auto s = read_json_file(ws.out / artifacts::kSummary);
  CHECK(s["target_tokens"] == first.summary.target_tokens);
  CHECK(first.summary.target_tokens == build_manifest(load_corpus(ws.corpus)).total_tokens);
  CHECK(read_json_file(ws.out / "mix.config.json")["target_tokens"] == first.summary.target_tokens);
  CHECK(read_plan(ws.out / artifacts::kPlan).counts == first.plan.counts);
}

TEST_CASE("alpha endpoints match the single-measure modes") {
  Workspace ws(240);
  auto cfg = ws.config();
  run_cluster(cfg);

  cfg.alpha = 0.0;
  const auto mixed = run_mix(cfg);
  const std::string mixed_plan = testing::slurp(ws.out / artifacts::kPlan);
  cfg.alpha = 0.8;
  cfg.weighting = WeightingMode::kQualityOnly;
  const auto quality = run_mix(cfg);
  CHECK(mixed.plan.weights == quality.plan.weights);
  CHECK(testing::slurp(ws.out / artifacts::kPlan) == mixed_plan);

  cfg.weighting = WeightingMode::kMixed;
  cfg.alpha = 1.0;
  const auto div = run_mix(cfg);
  cfg.weighting = WeightingMode::kDiversityOnly;
  cfg.alpha = 0.2;
  CHECK(run_mix(cfg).plan.weights == div.plan.weights);
}

TEST_CASE("stages report missing upstream artifacts") {
  Workspace ws(50);
  const auto cfg = ws.config();
  CHECK_THROWS_WITH_AS(run_report(cfg, ReportKind::kOverlap), doctest::Contains("clusters.jsonl"), Error);
  CHECK_THROWS_WITH_AS(run_report(cfg, ReportKind::kOverlap), doctest::Contains("report"), Error);
  CHECK_THROWS_WITH_AS(run_mix(cfg), doctest::Contains("run `cluster` first"), Error);
  CHECK_THROWS_WITH_AS(run_report(cfg, ReportKind::kCounts), doctest::Contains("plan.jsonl"), Error);
}

TEST_CASE("reports match the library") {
  Workspace ws(200);
  const auto cfg = ws.config();
  run_cluster(cfg);
  const auto mix = run_mix(cfg);
  CHECK(run_report(cfg, ReportKind::kCounts, true) == count_report(mix.plan).to_json());
  CHECK(fs::exists(ws.out / "report_counts.svg"));
  const auto domains = run_report(cfg, ReportKind::kDomains);
  for (const auto& [d, share] : emergent_domain_weights(mix.plan))
    CHECK(domains["weights"][d].get<double>() == doctest::Approx(share).epsilon(1e-15));
  const auto overlap = run_report(cfg, ReportKind::kOverlap, true);
  CHECK(overlap["domains"].size() == 3);
  CHECK(testing::slurp(ws.out / "report_overlap.svg").rfind("<svg", 0) == 0);
  CHECK(run_report(cfg, ReportKind::kQuality)["bins"] == 11);
  CHECK(run_report(cfg, ReportKind::kDiversity)["bins"] == 50);
}

TEST_CASE("a failing stage leaves earlier artifacts intact") {
  Workspace ws(80);
  auto cfg = ws.config();
  run_cluster(cfg);
  run_mix(cfg);
  const std::string plan = testing::slurp(ws.out / artifacts::kPlan);
  cfg.quality = ws.dir / "bad_quality.jsonl";
  testing::write_text(*cfg.quality, "{\"id\":\"doc-0\",\"quality\":42}\n");
  CHECK_THROWS_WITH_AS(run_mix(cfg), doctest::Contains("bad_quality.jsonl:1"), Error);
  CHECK(testing::slurp(ws.out / artifacts::kPlan) == plan);
}

TEST_CASE("output directory from the environment") {
  Workspace ws(30);
  auto cfg = ws.config();
  const fs::path env_dir = ws.dir / "from-env";
  ::setenv("CORPUSMIX_OUTPUT_DIR", env_dir.c_str(), 1);
  cfg.apply_environment();
  ::unsetenv("CORPUSMIX_OUTPUT_DIR");
  CHECK(cfg.output_dir == env_dir);
  run_manifest(cfg);
  CHECK(fs::exists(env_dir / artifacts::kManifest));
}

TEST_CASE("command-line tool") {
  Workspace ws(120);
  const std::string base = "--corpus " + quoted(ws.corpus) + " --embeddings " + quoted(ws.embeddings) +
                           " --fallback-quality -o " + quoted(ws.out);
  CHECK(run_cli("manifest " + base) == 0);
  CHECK(fs::exists(ws.out / artifacts::kManifest));
  CHECK(run_cli("manifest --corpus /nonexistent.jsonl -o " + quoted(ws.out)) == 1);
  CHECK(run_cli("report --kind overlap " + base) == 1);
  CHECK(run_cli("cluster " + base) == 0);
  CHECK(run_cli("mix " + base + " --alpha 0.5 --tau 0.3") == 0);
  CHECK(read_json_file(ws.out / "mix.config.json")["alpha"] == 0.5);
  CHECK(run_cli("report --kind counts --svg " + base) == 0);
  CHECK(fs::exists(ws.out / "report_counts.svg"));
  CHECK(run_cli("report --kind bogus " + base) == 1);
  CHECK(run_cli("mix " + base + " --alpha 2") == 1);

  // Flags override the config file.
  const fs::path config = ws.dir / "run.json";
  testing::write_text(config, nlohmann::json{{"corpus", ws.corpus.string()},
                                             {"fallback_quality", true},
                                             {"output_dir", (ws.dir / "cfg-out").string()},
                                             {"tau", 0.5}}
                                  .dump());
  CHECK(run_cli("annotate-fallback -c " + quoted(config) + " --tau 0.7") == 0);
  const auto snap = read_json_file(ws.dir / "cfg-out" / "annotate-fallback.config.json");
  CHECK(snap["tau"] == 0.7);

  testing::write_lines(ws.dir / "pred.jsonl", {{{"id", "a"}, {"score", 3}}, {{"id", "b"}, {"score", 5}}});
  testing::write_lines(ws.dir / "gold.jsonl", {{{"id", "a"}, {"score", 3}}, {{"id", "b"}, {"score", 6}}});
  CHECK(run_cli("evaluate --predictions " + quoted(ws.dir / "pred.jsonl") + " --labels " +
                quoted(ws.dir / "gold.jsonl")) == 0);
}
