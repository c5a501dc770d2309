#include "corpusmix/quality.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "corpusmix/error.hpp"
#include "corpusmix/io.hpp"
#include "corpusmix/log.hpp"

namespace corpusmix {

int QualityRubric::total() const {
  return clarity + completeness + structure_style + content_accuracy + significance +
         knowledge_richness + logicality_depth;
}

void QualityRubric::validate() const {
  const auto check = [](int v, int hi, const char* name) {
    if (v < 0 || v > hi)
      throw Error(std::string("rubric dimension ") + name + "=" + std::to_string(v) + " outside 0.." +
                  std::to_string(hi));
  };
  check(clarity, 1, "clarity");
  check(completeness, 1, "completeness");
  check(structure_style, 1, "structure_style");
  check(content_accuracy, 1, "content_accuracy");
  check(significance, 1, "significance");
  check(knowledge_richness, 2, "knowledge_richness");
  check(logicality_depth, 2, "logicality_depth");
}

DecodedScore decode_ordinal(std::span<const double> thresholds) {
  if (thresholds.empty()) throw Error("decode_ordinal: empty threshold vector");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] >= 0.0 && thresholds[i] <= 1.0))
      throw Error("decode_ordinal: threshold " + std::to_string(i) + " outside [0, 1]");
  }
  const std::size_t k = thresholds.size();
  DecodedScore out;
  out.class_probs.resize(k + 1);
  out.class_probs[0] = 1.0 - thresholds[0];
  for (std::size_t i = 1; i < k; ++i) {
    out.class_probs[i] = thresholds[i - 1] - thresholds[i];
    if (thresholds[i] > thresholds[i - 1]) out.monotone = false;
  }
  out.class_probs[k] = thresholds[k - 1];
  if (!out.monotone) log::warn("decode_ordinal: thresholds are not monotone non-increasing");

  std::size_t best = 0;
  for (std::size_t i = 1; i <= k; ++i)
    if (out.class_probs[i] > out.class_probs[best]) best = i;
  out.score = static_cast<int>(best);
  return out;
}

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace

// Three feature groups, at most 4 + 3 + 3 points:
//   length band on word count
//   type-token ratio band on lower-cased alphanumeric word forms (10+ words)
//   sentence completeness: terminal punctuation at the end, capitalized
//   opening, and a plausible mean sentence length
int heuristic_quality(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (const char ch : text) {
    if (is_space(static_cast<unsigned char>(ch))) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  if (words.empty()) return 0;

  const std::size_t n = words.size();
  int score = n < 10 ? 0 : n < 50 ? 1 : n < 200 ? 2 : n < 1000 ? 3 : 4;

  std::set<std::string> forms;
  for (const auto& w : words) {
    std::string form;
    for (const char ch : w) {
      const auto u = static_cast<unsigned char>(ch);
      if (std::isalnum(u) || u >= 0x80) form.push_back(static_cast<char>(std::tolower(u)));
    }
    if (!form.empty()) forms.insert(std::move(form));
  }
  const double ttr = static_cast<double>(forms.size()) / static_cast<double>(n);
  // Too few words to say anything about lexical variety.
  if (n >= 10) score += ttr >= 0.5 ? 3 : ttr >= 0.35 ? 2 : ttr >= 0.2 ? 1 : 0;

  std::size_t end = text.size();
  while (end > 0 && is_space(static_cast<unsigned char>(text[end - 1]))) --end;
  std::size_t last = end;
  while (last > 0 && (text[last - 1] == '"' || text[last - 1] == '\'' || text[last - 1] == ')')) --last;
  if (last > 0 && is_terminal(text[last - 1])) ++score;

  const auto first_alpha = std::find_if(text.begin(), text.end(),
                                        [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
  if (first_alpha != text.end() && std::isupper(static_cast<unsigned char>(*first_alpha))) ++score;

  std::size_t sentences = 0;
  for (std::size_t i = 0; i < end; ++i) {
    if (is_terminal(text[i]) && (i + 1 == end || is_space(static_cast<unsigned char>(text[i + 1]))))
      ++sentences;
  }
  if (sentences > 0) {
    const double mean_len = static_cast<double>(n) / static_cast<double>(sentences);
    if (mean_len >= 5 && mean_len <= 40) ++score;
  }
  return std::clamp(score, kMinQuality, kMaxQuality);
}

int heuristic_quality(const Document& doc) {
  if (!doc.text) throw Error("heuristic_quality: document " + doc.doc_id + " has no text");
  return heuristic_quality(*doc.text);
}

nlohmann::json ScorerMetrics::to_json() const {
  return {{"acc", acc}, {"mae", mae}, {"mse", mse}, {"cacc", cacc}};
}

ScorerMetrics evaluate_scorer(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size())
    throw Error("evaluate_scorer: " + std::to_string(predictions.size()) + " predictions vs " +
                std::to_string(labels.size()) + " labels");
  if (predictions.empty()) throw Error("evaluate_scorer: empty inputs");
  std::size_t exact = 0, close = 0;
  double abs_sum = 0, sq_sum = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int p = predictions[i], l = labels[i];
    if (p < kMinQuality || p > kMaxQuality || l < kMinQuality || l > kMaxQuality)
      throw Error("evaluate_scorer: score outside 0..10 at index " + std::to_string(i));
    const int diff = std::abs(p - l);
    exact += diff == 0;
    close += diff <= 1;
    abs_sum += diff;
    sq_sum += static_cast<double>(diff) * diff;
  }
  const double n = static_cast<double>(predictions.size());
  return {static_cast<double>(exact) / n, abs_sum / n, sq_sum / n, static_cast<double>(close) / n};
}

std::map<std::string, int> read_score_file(const std::filesystem::path& path, std::string_view field) {
  std::map<std::string, int> scores;
  for_each_jsonl(path, [&](const nlohmann::json& rec, std::size_t line) {
    const auto where = location(path, line);
    auto id = rec.find("id");
    auto value = rec.find(std::string(field));
    if (id == rec.end() || !id->is_string()) throw Error(where + ": missing string field \"id\"");
    if (value == rec.end() || !value->is_number_integer())
      throw Error(where + ": missing integer field \"" + std::string(field) + "\"");
    const auto v = value->get<long long>();
    if (v < kMinQuality || v > kMaxQuality) throw Error(where + ": score outside 0..10");
    if (!scores.emplace(id->get<std::string>(), static_cast<int>(v)).second)
      throw Error(where + ": duplicate id " + id->get<std::string>());
  });
  return scores;
}

ScorerMetrics evaluate_score_files(const std::filesystem::path& predictions,
                                   const std::filesystem::path& labels, std::string_view field) {
  const auto pred = read_score_file(predictions, field);
  const auto gold = read_score_file(labels, field);
  std::vector<int> p, l;
  for (const auto& [id, score] : gold) {
    auto it = pred.find(id);
    if (it == pred.end()) throw Error("no prediction for id " + id + " in " + predictions.string());
    p.push_back(it->second);
    l.push_back(score);
  }
  if (pred.size() != gold.size()) {
    for (const auto& [id, _] : pred)
      if (!gold.count(id)) throw Error("no label for id " + id + " in " + labels.string());
  }
  return evaluate_scorer(p, l);
}

}  // namespace corpusmix
