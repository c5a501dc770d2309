#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corpusmix/corpus.hpp"
#include "corpusmix/sampler.hpp"
#include "json.hpp"

namespace corpusmix {

/// Cell (i, j) is the percentage of domain i's clusters that also contain at
/// least one document of domain j. Rows of domains with no documents are
/// undefined.
struct OverlapMatrix {
  std::vector<std::string> domains;
  std::vector<std::vector<double>> cells;
  std::vector<bool> defined;
  std::vector<std::size_t> cluster_counts;  // clusters touched per domain

  nlohmann::json to_json() const;
};

// `domains` restricts and orders the rows/columns; by default all domains
// present in the corpus, sorted. Documents outside the list are ignored.
OverlapMatrix overlap_matrix(std::span<const std::uint32_t> assignment,
                             std::span<const Document> corpus,
                             std::optional<std::vector<std::string>> domains = std::nullopt);

enum class Measure { kQuality, kDiversity };

Measure parse_measure(std::string_view name);

struct DomainDistribution {
  std::vector<std::uint64_t> histogram;
  double mean = 0;
  std::uint64_t n = 0;
};

/// Quality uses 11 integer bins (0..10). Diversity uses 50 uniform bins over
/// the observed [min, max] of the whole corpus, recorded in range_lo/range_hi.
struct DistributionReport {
  Measure measure = Measure::kQuality;
  double range_lo = 0;
  double range_hi = 0;
  std::size_t bins = 0;
  std::map<std::string, DomainDistribution> per_domain;

  nlohmann::json to_json() const;
};

DistributionReport distribution_report(std::span<const Document> corpus, Measure measure);

struct CountBucket {
  std::uint64_t docs = 0;
  double proportion = 0;
  double mean_weight = 0;
};

struct CountReport {
  std::map<std::uint64_t, CountBucket> buckets;
  double overall_mean_weight = 0;
  double discarded_fraction = 0;

  nlohmann::json to_json() const;
};

CountReport count_report(const SamplingPlan& plan);

// Token share of each domain in the dataset the plan would assemble.
std::map<std::string, double> emergent_domain_weights(const SamplingPlan& plan);

}  // namespace corpusmix
