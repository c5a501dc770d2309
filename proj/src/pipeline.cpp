#include "corpusmix/pipeline.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "corpusmix/embeddings.hpp"
#include "corpusmix/error.hpp"
#include "corpusmix/io.hpp"
#include "corpusmix/log.hpp"
#include "corpusmix/svg.hpp"

namespace corpusmix {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json optional_path(const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); }

const char* init_name(KMeansInit init) { return init == KMeansInit::kPlusPlus ? "kmeans++" : "random"; }
const char* separation_name(SeparationMode m) { return m == SeparationMode::kMean ? "mean" : "min"; }

// Runs one stage, prefixing any failure with the stage name.
template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(std::string(name) + ": " + e.what());
  } catch (const fs::filesystem_error& e) {
    throw Error(std::string(name) + ": " + e.what());
  }
}

void write_resolved_config(const PipelineConfig& config, const std::string& stage_name) {
  json snapshot = config.to_json();
  snapshot["stage"] = stage_name;
  write_json_file(config.artifact(stage_name + ".config.json"), snapshot);
}

std::vector<Document> load(const PipelineConfig& config) {
  LoadOptions options;
  options.token_factor = config.token_factor;
  options.skip_duplicates = config.skip_duplicates;
  return load_corpus(std::span<const fs::path>(config.corpus), CorpusFormat::kJsonl, options);
}

std::string first_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < 10; ++i) out += (i ? ", " : "") + ids[i];
  if (ids.size() > 10) out += ", ...";
  return out;
}

void require_artifact(const fs::path& path, const std::string& what, const std::string& producer) {
  if (!fs::exists(path))
    throw Error("missing " + what + " artifact " + path.string() + " (run `" + producer + "` first)");
}

// Quality annotations from the configured file, the fallback artifact or the
// heuristic scorer, in that order of preference.
void attach_quality(const PipelineConfig& config, std::vector<Document>& corpus) {
  if (config.quality) {
    const auto report = attach_annotations(corpus, *config.quality, AnnotationKind::kQuality);
    if (!report.unannotated.empty())
      throw Error(std::to_string(report.unannotated.size()) + " document(s) lack a quality score: " +
                  first_ids(report.unannotated));
    return;
  }
  if (!config.fallback_quality)
    throw Error("no quality annotations configured; pass --quality or enable --fallback-quality");
  const auto fallback = config.artifact(artifacts::kFallbackQuality);
  if (fs::exists(fallback)) {
    const auto report = attach_annotations(corpus, fallback, AnnotationKind::kQuality);
    if (report.unannotated.empty()) return;
  }
  for (auto& doc : corpus)
    if (!doc.quality_score) doc.quality_score = heuristic_quality(doc);
}

void attach_diversity(const PipelineConfig& config, std::vector<Document>& corpus) {
  fs::path source;
  if (config.diversity) {
    source = *config.diversity;
  } else {
    source = config.artifact(artifacts::kClusters);
    require_artifact(source, "clustering", "cluster");
  }
  const auto report = attach_annotations(corpus, source, AnnotationKind::kDiversity);
  if (!report.unannotated.empty())
    throw Error(std::to_string(report.unannotated.size()) + " document(s) lack a diversity score in " +
                source.string() + ": " + first_ids(report.unannotated));
}

}  // namespace

json PipelineConfig::to_json() const {
  json paths = json::array();
  for (const auto& p : corpus) paths.push_back(p.string());
  return {{"corpus", paths},
          {"quality", optional_path(quality)},
          {"embeddings", optional_path(embeddings)},
          {"embedding_ids", optional_path(embedding_ids)},
          {"diversity", optional_path(diversity)},
          {"fallback_quality", fallback_quality},
          {"alpha", alpha},
          {"tau", tau},
          {"target_tokens", target_tokens},
          {"k", k ? json(*k) : json(nullptr)},
          {"kmeans_iters", kmeans_iters},
          {"seed", seed},
          {"init", init_name(init)},
          {"separation", separation_name(separation)},
          {"weighting", to_string(weighting)},
          {"token_factor", token_factor},
          {"skip_duplicates", skip_duplicates},
          {"report_domains", report_domains ? json(*report_domains) : json(nullptr)},
          {"output_dir", output_dir.string()}};
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  if (!j.is_object()) throw Error("config must be a JSON object");
  static const std::set<std::string> known = {
      "corpus", "quality", "embeddings", "embedding_ids", "diversity", "fallback_quality",
      "alpha", "tau", "target_tokens", "k", "kmeans_iters", "seed", "init", "separation",
      "weighting", "token_factor", "skip_duplicates", "report_domains", "output_dir", "stage"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw Error("unknown config key: " + key);

  PipelineConfig c;
  try {
    const auto path_opt = [&](const char* key, std::optional<fs::path>& dst) {
      if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<std::string>();
    };
    if (j.contains("corpus")) {
      const auto& v = j.at("corpus");
      if (v.is_string()) {
        c.corpus.push_back(v.get<std::string>());
      } else {
        for (const auto& p : v) c.corpus.push_back(p.get<std::string>());
      }
    }
    path_opt("quality", c.quality);
    path_opt("embeddings", c.embeddings);
    path_opt("embedding_ids", c.embedding_ids);
    path_opt("diversity", c.diversity);
    c.fallback_quality = j.value("fallback_quality", c.fallback_quality);
    c.alpha = j.value("alpha", c.alpha);
    c.tau = j.value("tau", c.tau);
    c.target_tokens = j.value("target_tokens", c.target_tokens);
    if (j.contains("k") && !j.at("k").is_null()) c.k = j.at("k").get<std::size_t>();
    c.kmeans_iters = j.value("kmeans_iters", c.kmeans_iters);
    c.seed = j.value("seed", c.seed);
    if (j.contains("init")) {
      const auto s = j.at("init").get<std::string>();
      if (s == "kmeans++") c.init = KMeansInit::kPlusPlus;
      else if (s == "random") c.init = KMeansInit::kRandom;
      else throw Error("init must be \"kmeans++\" or \"random\"");
    }
    if (j.contains("separation")) {
      const auto s = j.at("separation").get<std::string>();
      if (s == "mean") c.separation = SeparationMode::kMean;
      else if (s == "min") c.separation = SeparationMode::kMin;
      else throw Error("separation must be \"mean\" or \"min\"");
    }
    if (j.contains("weighting")) c.weighting = parse_weighting_mode(j.at("weighting").get<std::string>());
    c.token_factor = j.value("token_factor", c.token_factor);
    c.skip_duplicates = j.value("skip_duplicates", c.skip_duplicates);
    if (j.contains("report_domains") && !j.at("report_domains").is_null())
      c.report_domains = j.at("report_domains").get<std::vector<std::string>>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(std::string("malformed config: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::from_file(const fs::path& path) {
  try {
    return from_json(read_json_file(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void PipelineConfig::apply_environment() {
  if (const char* dir = std::getenv("CORPUSMIX_OUTPUT_DIR"); dir && *dir) output_dir = dir;
}

void PipelineConfig::validate() const {
  if (corpus.empty()) throw Error("no corpus file configured");
  const auto check = [](const fs::path& p, const char* what) {
    if (!fs::exists(p)) throw Error(std::string(what) + " not found: " + p.string());
  };
  for (const auto& p : corpus) check(p, "corpus file");
  if (quality) check(*quality, "quality file");
  if (embeddings) check(*embeddings, "embedding file");
  if (embedding_ids) check(*embedding_ids, "embedding sidecar");
  if (diversity) check(*diversity, "diversity file");
  if (!(alpha >= 0 && alpha <= 1)) throw Error("alpha must lie in [0, 1]");
  if (!(tau > 0)) throw Error("tau must be positive");
  if (kmeans_iters < 0) throw Error("kmeans_iters must be non-negative");
  if (k && *k == 0) throw Error("k must be positive");
  if (!(token_factor > 0)) throw Error("token_factor must be positive");
}

CorpusManifest run_manifest(const PipelineConfig& config) {
  return stage("manifest", [&] {
    config.validate();
    const auto corpus = load(config);
    const auto manifest = build_manifest(corpus);
    write_resolved_config(config, "manifest");
    write_json_file(config.artifact(artifacts::kManifest), manifest.to_json());
    return manifest;
  });
}

std::size_t run_annotate_fallback(const PipelineConfig& config) {
  return stage("annotate-fallback", [&] {
    config.validate();
    const auto corpus = load(config);
    write_resolved_config(config, "annotate-fallback");
    AtomicFile out(config.artifact(artifacts::kFallbackQuality));
    std::size_t scored = 0;
    for (const auto& doc : corpus) {
      if (!doc.text) {
        log::warn("annotate-fallback: document " + doc.doc_id + " has no text, left unscored");
        continue;
      }
      out.stream() << json{{"id", doc.doc_id}, {"quality", heuristic_quality(doc)}}.dump() << '\n';
      ++scored;
    }
    out.commit();
    return scored;
  });
}

ClusterRun run_cluster(const PipelineConfig& config) {
  return stage("cluster", [&] {
    config.validate();
    if (!config.embeddings) throw Error("no embedding file configured");
    auto corpus = load(config);
    const auto sidecar = config.embedding_ids.value_or(default_sidecar_path(*config.embeddings));
    AnnotationOptions options;
    options.sidecar = sidecar;
    const auto report = attach_annotations(corpus, *config.embeddings, AnnotationKind::kEmbedding, options);
    if (!report.unannotated.empty())
      throw Error(std::to_string(report.unannotated.size()) + " document(s) have no embedding: " +
                  first_ids(report.unannotated));
    const EmbeddingFile file = read_embedding_file(*config.embeddings, sidecar);

    std::vector<std::size_t> rows;
    ClusterRun run;
    rows.reserve(corpus.size());
    for (const auto& doc : corpus) {
      rows.push_back(*doc.embedding_ref);
      run.doc_ids.push_back(doc.doc_id);
    }
    const EmbeddingStore store = normalize_embeddings(file.store.select(rows));

    KMeansOptions km;
    km.k = config.k.value_or(0);
    km.iterations = config.kmeans_iters;
    km.seed = config.seed;
    km.init = config.init;
    run.clustering = kmeans(store, km);
    compute_cluster_stats(run.clustering, store, config.separation);

    write_resolved_config(config, "cluster");
    write_clustering(config.artifact(artifacts::kCentroids), config.artifact(artifacts::kClusters), run.doc_ids,
                     run.clustering);
    write_json_file(config.artifact(artifacts::kClusteringInfo),
                    {{"k", run.clustering.k},
                     {"dim", run.clustering.dim},
                     {"rows", store.rows()},
                     {"sizes", run.clustering.sizes},
                     {"reseeds", run.clustering.reseeds},
                     {"objective_trace", run.clustering.objective_trace},
                     {"compactness", run.clustering.compactness},
                     {"separation", run.clustering.separation}});
    return run;
  });
}

MixRun run_mix(const PipelineConfig& config) {
  return stage("mix", [&] {
    config.validate();
    auto loaded = load(config);
    std::vector<Document> corpus;
    corpus.reserve(loaded.size());
    std::size_t ineligible = 0;
    for (auto& doc : loaded) {
      if (doc.eligible_for_sampling()) {
        corpus.push_back(std::move(doc));
      } else {
        ++ineligible;
      }
    }
    if (ineligible)
      log::warn("mix: " + std::to_string(ineligible) + " zero-token document(s) excluded from sampling");
    if (corpus.empty()) throw Error("no documents with tokens to sample");

    const SamplerConfig probe{config.alpha, config.tau, 1, config.seed};
    const bool need_quality = config.weighting == WeightingMode::kQualityOnly ||
                              (config.weighting == WeightingMode::kMixed && probe.alpha < 1.0);
    const bool need_diversity = config.weighting == WeightingMode::kDiversityOnly ||
                                (config.weighting == WeightingMode::kMixed && probe.alpha > 0.0);
    if (need_quality) attach_quality(config, corpus);
    if (need_diversity) attach_diversity(config, corpus);

    std::vector<double> quality, diversity;
    if (need_quality)
      for (const auto& d : corpus) quality.push_back(*d.quality_score);
    if (need_diversity)
      for (const auto& d : corpus) diversity.push_back(*d.diversity_raw);

    const CorpusManifest manifest = build_manifest(corpus);
    SamplerConfig sampler{config.alpha, config.tau,
                          config.target_tokens ? config.target_tokens : manifest.total_tokens, config.seed};
    PipelineConfig resolved = config;
    resolved.target_tokens = sampler.target_tokens;

    MixRun run;
    run.plan = build_plan({corpus, quality, diversity, manifest}, sampler, config.weighting);
    write_resolved_config(resolved, "mix");
    write_plan(config.artifact(artifacts::kPlan), run.plan);
    run.summary = assemble_dataset(corpus, run.plan, config.artifact(artifacts::kDataset), sampler.target_tokens);
    json summary = run.summary.to_json();
    summary["target_docs"] = run.plan.target_docs;
    summary["source"] = manifest.to_json();
    write_json_file(config.artifact(artifacts::kSummary), summary);
    return run;
  });
}

ReportKind parse_report_kind(std::string_view name) {
  if (name == "overlap") return ReportKind::kOverlap;
  if (name == "quality") return ReportKind::kQuality;
  if (name == "diversity") return ReportKind::kDiversity;
  if (name == "counts") return ReportKind::kCounts;
  if (name == "domains") return ReportKind::kDomains;
  throw Error("unknown report kind: " + std::string(name));
}

std::string to_string(ReportKind kind) {
  switch (kind) {
    case ReportKind::kOverlap: return "overlap";
    case ReportKind::kQuality: return "quality";
    case ReportKind::kDiversity: return "diversity";
    case ReportKind::kCounts: return "counts";
    case ReportKind::kDomains: return "domains";
  }
  return "unknown";
}

json run_report(const PipelineConfig& config, ReportKind kind, bool svg) {
  const std::string name = to_string(kind);
  return stage("report", [&] {
    json out;
    std::string picture;
    switch (kind) {
      case ReportKind::kOverlap: {
        config.validate();
        const auto clusters_path = config.artifact(artifacts::kClusters);
        require_artifact(clusters_path, "clustering", "cluster");
        const auto corpus = load(config);
        const auto index = index_by_id(corpus);
        const auto records = read_cluster_assignments(clusters_path);
        std::vector<Document> covered;
        std::vector<std::uint32_t> assignment;
        for (const auto& r : records) {
          auto it = index.find(r.doc_id);
          if (it == index.end()) throw Error("clustering references unknown doc_id " + r.doc_id);
          covered.push_back(corpus[it->second]);
          assignment.push_back(r.cluster);
        }
        const auto matrix = overlap_matrix(assignment, covered, config.report_domains);
        out = matrix.to_json();
        if (svg) picture = svg::heatmap(matrix);
        break;
      }
      case ReportKind::kQuality:
      case ReportKind::kDiversity: {
        config.validate();
        auto corpus = load(config);
        if (kind == ReportKind::kQuality) {
          attach_quality(config, corpus);
        } else {
          attach_diversity(config, corpus);
        }
        const auto report =
            distribution_report(corpus, kind == ReportKind::kQuality ? Measure::kQuality : Measure::kDiversity);
        out = report.to_json();
        if (svg) {
          std::vector<std::string> labels;
          std::vector<double> means;
          for (const auto& [domain, dist] : report.per_domain) {
            labels.push_back(domain);
            means.push_back(dist.mean);
          }
          picture = svg::bar_chart("Mean " + name + " per domain", labels, means);
        }
        break;
      }
      case ReportKind::kCounts:
      case ReportKind::kDomains: {
        const auto plan_path = config.artifact(artifacts::kPlan);
        require_artifact(plan_path, "sampling plan", "mix");
        const auto plan = read_plan(plan_path);
        std::vector<std::string> labels;
        std::vector<double> values;
        if (kind == ReportKind::kCounts) {
          const auto report = count_report(plan);
          out = report.to_json();
          for (const auto& [count, b] : report.buckets) {
            labels.push_back(std::to_string(count));
            values.push_back(b.mean_weight);
          }
          if (svg) picture = svg::bar_chart("Mean sampling weight per count", labels, values);
        } else {
          const auto shares = emergent_domain_weights(plan);
          out = {{"kind", "domains"}, {"weights", shares}};
          for (const auto& [domain, share] : shares) {
            labels.push_back(domain);
            values.push_back(share);
          }
          if (svg) picture = svg::bar_chart("Emergent domain token share", labels, values);
        }
        break;
      }
    }
    write_json_file(config.artifact("report_" + name + ".json"), out);
    if (svg) {
      AtomicFile file(config.artifact("report_" + name + ".svg"));
      file.stream() << picture;
      file.commit();
    }
    return out;
  });
}

}  // namespace corpusmix
