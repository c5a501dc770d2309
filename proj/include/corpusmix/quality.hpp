#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corpusmix/corpus.hpp"
#include "json.hpp"

namespace corpusmix {

inline constexpr int kMinQuality = 0;
inline constexpr int kMaxQuality = 10;

/// Seven-dimension quality label. Five binary dimensions plus two with a
/// {0,1,2} span; the total is their sum and lies in [0, 10].
struct QualityRubric {
  int clarity = 0;
  int completeness = 0;
  int structure_style = 0;
  int content_accuracy = 0;
  int significance = 0;
  int knowledge_richness = 0;
  int logicality_depth = 0;

  int total() const;
  // Throws when any dimension is outside its declared range.
  void validate() const;
};

struct DecodedScore {
  int score = 0;
  std::vector<double> class_probs;  // length K + 1
  bool monotone = true;             // thresholds were non-increasing
};

/// Turns K ordinal-head outputs, entry t being P(score > t), into a class
/// distribution over 0..K and its argmax:
///
///   probs[0] = 1 - t[0]
///   probs[i] = t[i-1] - t[i]      1 <= i <= K-1
///   probs[K] = t[K-1]
///
/// Ties go to the lower score. Non-monotone inputs are decoded anyway (some
/// probabilities come out negative) and flagged with a warning.
DecodedScore decode_ordinal(std::span<const double> thresholds);

// Deterministic stand-in scorer built from surface features of the text.
// It does not approximate a trained evaluator; real pipelines should attach
// precomputed scores instead.
int heuristic_quality(std::string_view text);
int heuristic_quality(const Document& doc);

struct ScorerMetrics {
  double acc = 0;
  double mae = 0;
  double mse = 0;
  double cacc = 0;  // fraction with |pred - label| <= 1

  nlohmann::json to_json() const;
};

ScorerMetrics evaluate_scorer(std::span<const int> predictions, std::span<const int> labels);

// Reads a JSONL file of {"id": ..., <field>: int}; throws on duplicates or
// out-of-range scores.
std::map<std::string, int> read_score_file(const std::filesystem::path& path,
                                           std::string_view field = "score");

// Joins predictions and labels by id. Ids present in only one file are an error.
ScorerMetrics evaluate_score_files(const std::filesystem::path& predictions,
                                   const std::filesystem::path& labels,
                                   std::string_view field = "score");

}  // namespace corpusmix
