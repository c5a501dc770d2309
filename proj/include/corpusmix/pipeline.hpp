#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "corpusmix/analysis.hpp"
#include "corpusmix/corpus.hpp"
#include "corpusmix/diversity.hpp"
#include "corpusmix/quality.hpp"
#include "corpusmix/sampler.hpp"
#include "json.hpp"

namespace corpusmix {

/// Everything a pipeline run needs. Loaded from a JSON config file, then
/// overridden by command-line flags and the environment.
struct PipelineConfig {
  std::vector<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> quality;         // JSONL {id, quality}
  std::optional<std::filesystem::path> embeddings;      // float32 matrix
  std::optional<std::filesystem::path> embedding_ids;   // sidecar, default <embeddings>.ids.jsonl
  std::optional<std::filesystem::path> diversity;       // JSONL {id, diversity}; default: cluster output
  bool fallback_quality = false;  // score with the heuristic when no quality file is given

  double alpha = 0.8;
  double tau = 0.2;
  std::uint64_t target_tokens = 0;  // 0 means "same as the source corpus"
  std::optional<std::size_t> k;
  int kmeans_iters = 50;
  std::uint64_t seed = 1024;
  KMeansInit init = KMeansInit::kPlusPlus;
  SeparationMode separation = SeparationMode::kMean;
  WeightingMode weighting = WeightingMode::kMixed;

  double token_factor = 1.0;
  bool skip_duplicates = false;
  std::optional<std::vector<std::string>> report_domains;  // overlap report filter

  std::filesystem::path output_dir = "corpusmix-out";

  nlohmann::json to_json() const;
  // Unknown keys are rejected so typos do not silently fall back to defaults.
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig from_file(const std::filesystem::path& path);

  // CORPUSMIX_OUTPUT_DIR replaces output_dir when set.
  void apply_environment();
  // Checks numeric ranges and that every referenced input path exists.
  void validate() const;

  std::filesystem::path artifact(const std::string& name) const { return output_dir / name; }
};

// Artifact names inside the output directory.
namespace artifacts {
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kFallbackQuality = "quality.fallback.jsonl";
inline constexpr const char* kCentroids = "centroids.f32";
inline constexpr const char* kClusters = "clusters.jsonl";
inline constexpr const char* kClusteringInfo = "clustering.json";
inline constexpr const char* kPlan = "plan.jsonl";
inline constexpr const char* kDataset = "dataset.jsonl";
inline constexpr const char* kSummary = "summary.json";
}  // namespace artifacts

CorpusManifest run_manifest(const PipelineConfig& config);

// Heuristic scores for every document with text, as a quality annotation file.
std::size_t run_annotate_fallback(const PipelineConfig& config);

struct ClusterRun {
  Clustering clustering;
  std::vector<std::string> doc_ids;
};

ClusterRun run_cluster(const PipelineConfig& config);

struct MixRun {
  SamplingPlan plan;
  MixSummary summary;
};

MixRun run_mix(const PipelineConfig& config);

enum class ReportKind { kOverlap, kQuality, kDiversity, kCounts, kDomains };

ReportKind parse_report_kind(std::string_view name);
std::string to_string(ReportKind kind);

// Writes report_<kind>.json (and .svg when requested) and returns the JSON.
nlohmann::json run_report(const PipelineConfig& config, ReportKind kind, bool svg = false);

}  // namespace corpusmix
