#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "corpusmix/corpus.hpp"
#include "json.hpp"

namespace corpusmix {

struct SamplerConfig {
  double alpha = 0.8;  // weight on diversity versus quality
  double tau = 0.2;    // softmax temperature
  std::uint64_t target_tokens = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

// Min-max scaling onto [0, 1]. A constant vector maps to 0.5 everywhere.
std::vector<double> minmax_normalize(std::span<const double> values);

// p = alpha * d + (1 - alpha) * q, element-wise.
std::vector<double> sampling_weights(std::span<const double> d_norm,
                                     std::span<const double> q_norm, double alpha);

// Real-valued target document count: T_tgt / T_src * |D_src|.
double target_doc_count(std::uint64_t target_tokens, const CorpusManifest& manifest);

// c_i = target_docs * softmax(p / tau)_i, computed with max subtraction.
std::vector<double> sampling_frequencies(std::span<const double> p, double tau,
                                         double target_docs);

// floor(c) plus one more with probability frac(c). Draw i depends only on
// (seed, i).
std::vector<std::uint64_t> stochastic_round(std::span<const double> frequencies,
                                            std::uint64_t seed);

/// Per-document sampling decisions for one corpus, aligned with corpus order.
struct SamplingPlan {
  std::vector<std::string> doc_ids;
  std::vector<std::string> domains;
  std::vector<std::uint64_t> tokens;
  std::vector<double> quality_norm;
  std::vector<double> diversity_norm;
  std::vector<double> weights;
  std::vector<double> frequencies;
  std::vector<std::uint64_t> counts;

  double target_docs = 0;
  double expected_tokens = 0;       // sum of c_i * tokens_i
  std::uint64_t realized_tokens = 0;  // sum of count_i * tokens_i
  std::uint64_t realized_docs = 0;

  std::size_t size() const { return counts.size(); }
};

// Writes one JSONL line per document followed by nothing else; aggregates
// are recomputed on read.
void write_plan(const std::filesystem::path& path, const SamplingPlan& plan);
SamplingPlan read_plan(const std::filesystem::path& path);

enum class WeightingMode { kMixed, kQualityOnly, kDiversityOnly };

WeightingMode parse_weighting_mode(std::string_view name);
std::string to_string(WeightingMode mode);

/// Inputs for build_plan: raw quality and diversity per document. A measure
/// that the weighting does not use may be left empty.
struct PlanInputs {
  std::span<const Document> corpus;
  std::span<const double> quality;
  std::span<const double> diversity;
  CorpusManifest manifest;
};

// Normalize, weight, size, softmax and round in one pass.
SamplingPlan build_plan(const PlanInputs& inputs, const SamplerConfig& config,
                        WeightingMode mode = WeightingMode::kMixed);

struct DiscardedDoc {
  std::string doc_id;
  double weight = 0;
};

struct MixSummary {
  std::uint64_t realized_docs = 0;
  std::uint64_t realized_tokens = 0;
  std::uint64_t target_tokens = 0;
  double expected_tokens = 0;
  double discarded_fraction = 0;
  std::map<std::string, double> domain_weights;  // token share per domain
  std::map<std::uint64_t, std::uint64_t> count_histogram;
  std::vector<DiscardedDoc> discarded;

  double budget_error() const;  // (realized - target) / target
  nlohmann::json to_json() const;
};

/// Writes every document `count` times as JSONL; the first copy keeps its id,
/// later copies get `<id>#<replica>`, and every line carries `replica`. The
/// file is written to a temporary name and renamed on success.
MixSummary assemble_dataset(std::span<const Document> corpus, const SamplingPlan& plan,
                            const std::filesystem::path& output, std::uint64_t target_tokens);

}  // namespace corpusmix
