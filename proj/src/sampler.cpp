#include "corpusmix/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "corpusmix/error.hpp"
#include "corpusmix/io.hpp"
#include "corpusmix/log.hpp"
#include "corpusmix/parallel.hpp"
#include "corpusmix/random.hpp"

namespace corpusmix {

using nlohmann::json;

void SamplerConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0, 1], got " + std::to_string(alpha));
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error("tau must be positive, got " + std::to_string(tau));
  if (target_tokens < 1) throw Error("target_tokens must be at least 1");
}

std::vector<double> minmax_normalize(std::span<const double> values) {
  if (values.empty()) throw Error("minmax_normalize: empty input");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i])) throw Error("minmax_normalize: non-finite value at index " + std::to_string(i));
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<double> out(values.size(), 0.5);
  if (hi == lo) return out;
  const double span = hi - lo;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - lo) / span;
  return out;
}

std::vector<double> sampling_weights(std::span<const double> d_norm, std::span<const double> q_norm,
                                     double alpha) {
  if (d_norm.size() != q_norm.size())
    throw Error("sampling_weights: " + std::to_string(d_norm.size()) + " diversity vs " +
                std::to_string(q_norm.size()) + " quality values");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("sampling_weights: alpha outside [0, 1]");
  std::vector<double> p(d_norm.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(d_norm[i] >= 0 && d_norm[i] <= 1 && q_norm[i] >= 0 && q_norm[i] <= 1))
      throw Error("sampling_weights: input outside [0, 1] at index " + std::to_string(i));
    p[i] = alpha * d_norm[i] + (1.0 - alpha) * q_norm[i];
  }
  return p;
}

double target_doc_count(std::uint64_t target_tokens, const CorpusManifest& manifest) {
  if (manifest.total_tokens == 0) throw Error("target_doc_count: source corpus has zero tokens");
  if (manifest.total_docs == 0) throw Error("target_doc_count: source corpus has zero documents");
  // One rounding step: exact product first, then a single division.
  const unsigned __int128 product =
      static_cast<unsigned __int128>(target_tokens) * static_cast<unsigned __int128>(manifest.total_docs);
  return static_cast<double>(product) / static_cast<double>(manifest.total_tokens);
}

std::vector<double> sampling_frequencies(std::span<const double> p, double tau, double target_docs) {
  if (p.empty()) throw Error("sampling_frequencies: empty weight vector");
  if (!(tau > 0.0)) throw Error("sampling_frequencies: tau must be positive");
  if (!(target_docs >= 0.0)) throw Error("sampling_frequencies: negative target document count");
  for (std::size_t i = 0; i < p.size(); ++i)
    if (!std::isfinite(p[i])) throw Error("sampling_frequencies: non-finite weight at index " + std::to_string(i));

  const double peak = *std::max_element(p.begin(), p.end());
  std::vector<double> e(p.size());
  parallel_chunks(p.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) e[i] = std::exp((p[i] - peak) / tau);
  });
  // Neumaier summation in index order keeps the normalizer deterministic.
  double sum = 0, comp = 0;
  for (const double v : e) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  sum += comp;
  const double scale = target_docs / sum;
  parallel_chunks(p.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) e[i] *= scale;
  });
  return e;
}

std::vector<std::uint64_t> stochastic_round(std::span<const double> frequencies, std::uint64_t seed) {
  std::vector<std::uint64_t> counts(frequencies.size());
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    const double c = frequencies[i];
    if (!(c >= 0.0) || !std::isfinite(c))
      throw Error("stochastic_round: invalid frequency at index " + std::to_string(i));
    const double whole = std::floor(c);
    const double frac = c - whole;
    counts[i] = static_cast<std::uint64_t>(whole) + (counter_uniform(seed, i) < frac ? 1 : 0);
  }
  return counts;
}

WeightingMode parse_weighting_mode(std::string_view name) {
  if (name == "mixed") return WeightingMode::kMixed;
  if (name == "quality-only") return WeightingMode::kQualityOnly;
  if (name == "diversity-only") return WeightingMode::kDiversityOnly;
  throw Error("unknown weighting mode: " + std::string(name));
}

std::string to_string(WeightingMode mode) {
  switch (mode) {
    case WeightingMode::kMixed: return "mixed";
    case WeightingMode::kQualityOnly: return "quality-only";
    case WeightingMode::kDiversityOnly: return "diversity-only";
  }
  return "mixed";
}

namespace {

void finalize_aggregates(SamplingPlan& plan) {
  plan.expected_tokens = 0;
  plan.realized_tokens = 0;
  plan.realized_docs = 0;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    plan.expected_tokens += plan.frequencies[i] * static_cast<double>(plan.tokens[i]);
    plan.realized_tokens += plan.counts[i] * plan.tokens[i];
    plan.realized_docs += plan.counts[i];
  }
}

}  // namespace

SamplingPlan build_plan(const PlanInputs& inputs, const SamplerConfig& config, WeightingMode mode) {
  config.validate();
  const std::size_t n = inputs.corpus.size();
  if (n == 0) throw Error("build_plan: empty corpus");
  const bool need_quality = mode == WeightingMode::kQualityOnly ||
                            (mode == WeightingMode::kMixed && config.alpha < 1.0);
  const bool need_diversity = mode == WeightingMode::kDiversityOnly ||
                              (mode == WeightingMode::kMixed && config.alpha > 0.0);
  if (need_quality && inputs.quality.size() != n)
    throw Error("build_plan: quality scores cover " + std::to_string(inputs.quality.size()) + " of " +
                std::to_string(n) + " documents");
  if (need_diversity && inputs.diversity.size() != n)
    throw Error("build_plan: diversity scores cover " + std::to_string(inputs.diversity.size()) + " of " +
                std::to_string(n) + " documents");

  SamplingPlan plan;
  plan.doc_ids.reserve(n);
  plan.domains.reserve(n);
  plan.tokens.reserve(n);
  for (const auto& doc : inputs.corpus) {
    if (!doc.eligible_for_sampling()) throw Error("build_plan: document " + doc.doc_id + " has no tokens");
    plan.doc_ids.push_back(doc.doc_id);
    plan.domains.push_back(doc.domain);
    plan.tokens.push_back(doc.token_count);
  }
  plan.quality_norm = inputs.quality.size() == n ? minmax_normalize(inputs.quality) : std::vector<double>(n, 0.0);
  plan.diversity_norm =
      inputs.diversity.size() == n ? minmax_normalize(inputs.diversity) : std::vector<double>(n, 0.0);

  switch (mode) {
    case WeightingMode::kMixed:
      plan.weights = sampling_weights(plan.diversity_norm, plan.quality_norm, config.alpha);
      break;
    case WeightingMode::kQualityOnly: plan.weights = plan.quality_norm; break;
    case WeightingMode::kDiversityOnly: plan.weights = plan.diversity_norm; break;
  }
  plan.target_docs = target_doc_count(config.target_tokens, inputs.manifest);
  plan.frequencies = sampling_frequencies(plan.weights, config.tau, plan.target_docs);
  plan.counts = stochastic_round(plan.frequencies, config.seed);
  finalize_aggregates(plan);
  return plan;
}

void write_plan(const std::filesystem::path& path, const SamplingPlan& plan) {
  AtomicFile out(path);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const json rec = {{"id", plan.doc_ids[i]},
                      {"domain", plan.domains[i]},
                      {"tokens", plan.tokens[i]},
                      {"quality_norm", plan.quality_norm[i]},
                      {"diversity_norm", plan.diversity_norm[i]},
                      {"weight", plan.weights[i]},
                      {"frequency", plan.frequencies[i]},
                      {"count", plan.counts[i]}};
    out.stream() << rec.dump() << '\n';
  }
  out.commit();
}

SamplingPlan read_plan(const std::filesystem::path& path) {
  SamplingPlan plan;
  for_each_jsonl(path, [&](const json& rec, std::size_t line) {
    try {
      plan.doc_ids.push_back(rec.at("id").get<std::string>());
      plan.domains.push_back(rec.at("domain").get<std::string>());
      plan.tokens.push_back(rec.at("tokens").get<std::uint64_t>());
      plan.quality_norm.push_back(rec.at("quality_norm").get<double>());
      plan.diversity_norm.push_back(rec.at("diversity_norm").get<double>());
      plan.weights.push_back(rec.at("weight").get<double>());
      plan.frequencies.push_back(rec.at("frequency").get<double>());
      plan.counts.push_back(rec.at("count").get<std::uint64_t>());
    } catch (const json::exception& e) {
      throw Error(location(path, line) + ": malformed plan record: " + e.what());
    }
  });
  double target = 0;
  for (const double c : plan.frequencies) target += c;
  plan.target_docs = target;
  finalize_aggregates(plan);
  return plan;
}

double MixSummary::budget_error() const {
  return (static_cast<double>(realized_tokens) - static_cast<double>(target_tokens)) /
         static_cast<double>(target_tokens);
}

json MixSummary::to_json() const {
  json hist = json::object();
  for (const auto& [count, docs] : count_histogram) hist[std::to_string(count)] = docs;
  json discarded_list = json::array();
  for (const auto& d : discarded) discarded_list.push_back({{"id", d.doc_id}, {"weight", d.weight}});
  return {{"realized_docs", realized_docs},
          {"realized_tokens", realized_tokens},
          {"target_tokens", target_tokens},
          {"expected_tokens", expected_tokens},
          {"budget_error", target_tokens ? budget_error() : 0.0},
          {"discarded_fraction", discarded_fraction},
          {"domain_weights", domain_weights},
          {"count_histogram", hist},
          {"discarded", discarded_list}};
}

MixSummary assemble_dataset(std::span<const Document> corpus, const SamplingPlan& plan,
                            const std::filesystem::path& output, std::uint64_t target_tokens) {
  if (plan.size() != corpus.size())
    throw Error("assemble_dataset: plan has " + std::to_string(plan.size()) + " counts for " +
                std::to_string(corpus.size()) + " documents");
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (plan.doc_ids[i] != corpus[i].doc_id)
      throw Error("assemble_dataset: plan row " + std::to_string(i) + " is " + plan.doc_ids[i] +
                  " but corpus row is " + corpus[i].doc_id);

  MixSummary summary;
  summary.target_tokens = target_tokens;
  summary.expected_tokens = plan.expected_tokens;
  std::map<std::string, std::uint64_t> domain_tokens;
  AtomicFile out(output);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Document& doc = corpus[i];
    const std::uint64_t count = plan.counts[i];
    ++summary.count_histogram[count];
    domain_tokens.try_emplace(doc.domain, 0);
    if (count == 0) {
      summary.discarded.push_back({doc.doc_id, plan.weights[i]});
      continue;
    }
    json rec = {{"id", doc.doc_id}, {"domain", doc.domain}, {"tokens", doc.token_count}};
    if (doc.text) rec["text"] = *doc.text;
    for (std::uint64_t r = 0; r < count; ++r) {
      rec["id"] = r == 0 ? doc.doc_id : doc.doc_id + "#" + std::to_string(r);
      rec["replica"] = r;
      out.stream() << rec.dump() << '\n';
    }
    summary.realized_docs += count;
    summary.realized_tokens += count * doc.token_count;
    domain_tokens[doc.domain] += count * doc.token_count;
  }
  out.commit();

  summary.discarded_fraction =
      static_cast<double>(summary.discarded.size()) / static_cast<double>(std::max<std::size_t>(1, corpus.size()));
  if (summary.realized_tokens == 0) {
    log::warn("assemble_dataset: every count is zero, the dataset is empty");
  } else {
    for (const auto& [domain, tokens] : domain_tokens)
      summary.domain_weights[domain] = static_cast<double>(tokens) / static_cast<double>(summary.realized_tokens);
  }
  return summary;
}

}  // namespace corpusmix
