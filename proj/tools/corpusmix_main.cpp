// corpusmix: sample-wise corpus mixing from the command line.
//
//   corpusmix manifest          --corpus c.jsonl -o out/
//   corpusmix annotate-fallback --corpus c.jsonl -o out/
//   corpusmix cluster           --corpus c.jsonl --embeddings e.f32 -o out/
//   corpusmix mix               --config run.json [--alpha 0.8 --tau 0.2 --target-tokens N]
//   corpusmix report --kind overlap|quality|diversity|counts|domains [--svg]
//   corpusmix evaluate --predictions p.jsonl --labels l.jsonl

#include <iostream>

#include "CLI11.hpp"
#include "corpusmix/error.hpp"
#include "corpusmix/pipeline.hpp"

namespace {

using corpusmix::PipelineConfig;

struct Flags {
  std::string config_path;
  std::vector<std::string> corpus;
  std::string quality, embeddings, embedding_ids, diversity, output_dir;
  bool fallback_quality = false, skip_duplicates = false;
  double alpha = 0, tau = 0, token_factor = 0;
  std::uint64_t target_tokens = 0, seed = 0;
  std::size_t k = 0;
  int kmeans_iters = 0;
  std::string init, separation, weighting;
  std::vector<std::string> report_domains;
};

PipelineConfig resolve(const Flags& f, CLI::App& app) {
  PipelineConfig c = f.config_path.empty() ? PipelineConfig{} : PipelineConfig::from_file(f.config_path);
  const auto given = [&](const char* name) { return app.get_option(name)->count() > 0; };
  if (given("--corpus")) c.corpus.assign(f.corpus.begin(), f.corpus.end());
  if (given("--quality")) c.quality = f.quality;
  if (given("--embeddings")) c.embeddings = f.embeddings;
  if (given("--embedding-ids")) c.embedding_ids = f.embedding_ids;
  if (given("--diversity")) c.diversity = f.diversity;
  if (given("--fallback-quality")) c.fallback_quality = f.fallback_quality;
  if (given("--skip-duplicates")) c.skip_duplicates = f.skip_duplicates;
  if (given("--alpha")) c.alpha = f.alpha;
  if (given("--tau")) c.tau = f.tau;
  if (given("--target-tokens")) c.target_tokens = f.target_tokens;
  if (given("--k")) c.k = f.k;
  if (given("--kmeans-iters")) c.kmeans_iters = f.kmeans_iters;
  if (given("--seed")) c.seed = f.seed;
  if (given("--token-factor")) c.token_factor = f.token_factor;
  if (given("--report-domains")) c.report_domains = f.report_domains;
  if (given("--output-dir")) c.output_dir = f.output_dir;
  // Reuse the config parser for enum-valued flags.
  nlohmann::json enums = c.to_json();
  if (given("--init")) enums["init"] = f.init;
  if (given("--separation")) enums["separation"] = f.separation;
  if (given("--weighting")) enums["weighting"] = f.weighting;
  const PipelineConfig parsed = PipelineConfig::from_json(enums);
  c.init = parsed.init;
  c.separation = parsed.separation;
  c.weighting = parsed.weighting;
  c.apply_environment();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample-wise pretraining corpus mixing"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("-c,--config", f.config_path, "JSON pipeline config")->check(CLI::ExistingFile);
  app.add_option("--corpus", f.corpus, "Corpus JSONL shard(s)");
  app.add_option("--quality", f.quality, "Quality annotation JSONL (id, quality)");
  app.add_option("--embeddings", f.embeddings, "float32 embedding matrix");
  app.add_option("--embedding-ids", f.embedding_ids, "Embedding sidecar JSONL");
  app.add_option("--diversity", f.diversity, "Diversity annotation JSONL (id, diversity)");
  app.add_flag("--fallback-quality", f.fallback_quality, "Score quality with the built-in heuristic");
  app.add_flag("--skip-duplicates", f.skip_duplicates, "Drop duplicate doc ids instead of failing");
  app.add_option("--alpha", f.alpha, "Diversity weight in [0,1]");
  app.add_option("--tau", f.tau, "Softmax temperature");
  app.add_option("--target-tokens", f.target_tokens, "Token budget (0 = source size)");
  app.add_option("--k", f.k, "Cluster count (default floor(sqrt(N)))");
  app.add_option("--kmeans-iters", f.kmeans_iters, "K-means iterations");
  app.add_option("--seed", f.seed, "Random seed");
  app.add_option("--init", f.init, "K-means seeding: kmeans++ or random");
  app.add_option("--separation", f.separation, "Separation aggregate: mean or min");
  app.add_option("--weighting", f.weighting, "mixed, quality-only or diversity-only");
  app.add_option("--token-factor", f.token_factor, "Tokens per whitespace word");
  app.add_option("--report-domains", f.report_domains, "Domains to include in the overlap report");
  app.add_option("-o,--output-dir", f.output_dir, "Output directory");

  auto* manifest = app.add_subcommand("manifest", "Write corpus statistics");
  auto* fallback = app.add_subcommand("annotate-fallback", "Write heuristic quality scores");
  auto* cluster = app.add_subcommand("cluster", "Cluster embeddings and write diversity scores");
  auto* mix = app.add_subcommand("mix", "Build the sampling plan and assemble the dataset");
  auto* report = app.add_subcommand("report", "Write an analysis report");
  std::string kind;
  bool svg = false;
  report->add_option("--kind", kind, "overlap, quality, diversity, counts or domains")->required();
  report->add_flag("--svg", svg, "Also write an SVG rendering");
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against labels (ACC/MAE/MSE/CACC)");
  std::string predictions, labels, field = "score";
  evaluate->add_option("--predictions", predictions)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--labels", labels)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--field", field, "Score field name in both files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (evaluate->parsed()) {
      std::cout << corpusmix::evaluate_score_files(predictions, labels, field).to_json().dump() << '\n';
      return 0;
    }
    const PipelineConfig config = resolve(f, app);
    if (manifest->parsed()) {
      const auto m = corpusmix::run_manifest(config);
      std::cerr << "manifest: " << m.total_docs << " docs, " << m.total_tokens << " tokens\n";
    } else if (fallback->parsed()) {
      std::cerr << "annotate-fallback: scored " << corpusmix::run_annotate_fallback(config) << " documents\n";
    } else if (cluster->parsed()) {
      const auto run = corpusmix::run_cluster(config);
      std::cerr << "cluster: k=" << run.clustering.k << " over " << run.doc_ids.size() << " documents\n";
    } else if (mix->parsed()) {
      const auto run = corpusmix::run_mix(config);
      std::cerr << "mix: " << run.summary.realized_docs << " docs, " << run.summary.realized_tokens
                << " tokens (target " << run.summary.target_tokens << ")\n";
    } else if (report->parsed()) {
      corpusmix::run_report(config, corpusmix::parse_report_kind(kind), svg);
      std::cerr << "report: wrote report_" << kind << ".json\n";
    }
  } catch (const corpusmix::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
