#include "corpusmix/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "corpusmix/error.hpp"
#include "corpusmix/log.hpp"

namespace corpusmix {

using nlohmann::json;

namespace {

// Neumaier-compensated running sum.
class Sum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0, comp_ = 0;
};

}  // namespace

json OverlapMatrix::to_json() const {
  json rows = json::array();
  for (std::size_t i = 0; i < domains.size(); ++i) {
    json row = json::array();
    for (const double v : cells[i]) row.push_back(defined[i] ? json(v) : json(nullptr));
    rows.push_back(std::move(row));
  }
  return {{"kind", "overlap"}, {"domains", domains}, {"cells", rows}, {"cluster_counts", cluster_counts}};
}

OverlapMatrix overlap_matrix(std::span<const std::uint32_t> assignment, std::span<const Document> corpus,
                             std::optional<std::vector<std::string>> domains) {
  if (assignment.size() != corpus.size())
    throw Error("overlap_matrix: clustering covers " + std::to_string(assignment.size()) + " of " +
                std::to_string(corpus.size()) + " documents");
  OverlapMatrix m;
  if (domains) {
    m.domains = *domains;
  } else {
    std::set<std::string> seen;
    for (const auto& doc : corpus) seen.insert(doc.domain);
    m.domains.assign(seen.begin(), seen.end());
  }
  if (m.domains.empty()) throw Error("overlap_matrix: no domains");
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < m.domains.size(); ++i)
    if (!column.emplace(m.domains[i], i).second) throw Error("overlap_matrix: duplicate domain " + m.domains[i]);

  std::uint32_t k = 0;
  for (const auto a : assignment) k = std::max(k, a + 1);
  const std::size_t d = m.domains.size();
  std::vector<std::vector<char>> present(d, std::vector<char>(k, 0));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto it = column.find(corpus[i].domain);
    if (it == column.end()) continue;
    present[it->second][assignment[i]] = 1;
  }

  m.cells.assign(d, std::vector<double>(d, 0.0));
  m.defined.assign(d, true);
  m.cluster_counts.assign(d, 0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::uint32_t c = 0; c < k; ++c) m.cluster_counts[i] += present[i][c];
    if (m.cluster_counts[i] == 0) {
      m.defined[i] = false;
      std::fill(m.cells[i].begin(), m.cells[i].end(), std::numeric_limits<double>::quiet_NaN());
      log::warn("overlap_matrix: domain " + m.domains[i] + " has no documents; row undefined");
      continue;
    }
    for (std::size_t j = 0; j < d; ++j) {
      std::size_t shared = 0;
      for (std::uint32_t c = 0; c < k; ++c) shared += present[i][c] && present[j][c];
      m.cells[i][j] = 100.0 * static_cast<double>(shared) / static_cast<double>(m.cluster_counts[i]);
    }
  }
  return m;
}

Measure parse_measure(std::string_view name) {
  if (name == "quality") return Measure::kQuality;
  if (name == "diversity") return Measure::kDiversity;
  throw Error("unknown measure: " + std::string(name));
}

json DistributionReport::to_json() const {
  json domains = json::object();
  for (const auto& [name, dist] : per_domain)
    domains[name] = {{"histogram", dist.histogram}, {"mean", dist.mean}, {"n", dist.n}};
  return {{"kind", measure == Measure::kQuality ? "quality" : "diversity"},
          {"bins", bins},
          {"range", {range_lo, range_hi}},
          {"per_domain", domains}};
}

DistributionReport distribution_report(std::span<const Document> corpus, Measure measure) {
  if (corpus.empty()) throw Error("distribution_report: empty corpus");
  std::vector<double> values(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Document& doc = corpus[i];
    if (measure == Measure::kQuality) {
      if (!doc.quality_score) throw Error("distribution_report: document " + doc.doc_id + " has no quality score");
      values[i] = *doc.quality_score;
    } else {
      if (!doc.diversity_raw)
        throw Error("distribution_report: document " + doc.doc_id + " has no diversity score");
      values[i] = *doc.diversity_raw;
    }
  }

  DistributionReport report;
  report.measure = measure;
  if (measure == Measure::kQuality) {
    report.bins = 11;
    report.range_lo = 0;
    report.range_hi = 10;
  } else {
    report.bins = 50;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    report.range_lo = *lo;
    report.range_hi = *hi;
  }

  std::map<std::string, Sum> sums;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto& dist = report.per_domain[corpus[i].domain];
    if (dist.histogram.empty()) dist.histogram.assign(report.bins, 0);
    std::size_t bin = 0;
    if (measure == Measure::kQuality) {
      bin = static_cast<std::size_t>(values[i]);
    } else if (report.range_hi > report.range_lo) {
      const double t = (values[i] - report.range_lo) / (report.range_hi - report.range_lo);
      bin = std::min(report.bins - 1, static_cast<std::size_t>(t * static_cast<double>(report.bins)));
    }
    ++dist.histogram[bin];
    ++dist.n;
    sums[corpus[i].domain].add(values[i]);
  }
  for (auto& [name, dist] : report.per_domain) dist.mean = sums[name].value() / static_cast<double>(dist.n);
  return report;
}

json CountReport::to_json() const {
  json rows = json::array();
  for (const auto& [count, b] : buckets)
    rows.push_back({{"count", count}, {"docs", b.docs}, {"proportion", b.proportion}, {"mean_weight", b.mean_weight}});
  return {{"kind", "counts"},
          {"buckets", rows},
          {"overall_mean_weight", overall_mean_weight},
          {"discarded_fraction", discarded_fraction}};
}

CountReport count_report(const SamplingPlan& plan) {
  if (plan.size() == 0) throw Error("count_report: empty plan");
  if (plan.weights.size() != plan.size()) throw Error("count_report: plan weights misaligned with counts");
  CountReport report;
  std::map<std::uint64_t, Sum> weight_sums;
  Sum overall;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    ++report.buckets[plan.counts[i]].docs;
    weight_sums[plan.counts[i]].add(plan.weights[i]);
    overall.add(plan.weights[i]);
  }
  const double n = static_cast<double>(plan.size());
  for (auto& [count, b] : report.buckets) {
    b.proportion = static_cast<double>(b.docs) / n;
    b.mean_weight = weight_sums[count].value() / static_cast<double>(b.docs);
  }
  report.overall_mean_weight = overall.value() / n;
  auto zero = report.buckets.find(0);
  report.discarded_fraction = zero == report.buckets.end() ? 0.0 : zero->second.proportion;
  return report;
}

std::map<std::string, double> emergent_domain_weights(const SamplingPlan& plan) {
  if (plan.size() == 0) throw Error("emergent_domain_weights: empty plan");
  std::map<std::string, std::uint64_t> tokens;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const std::uint64_t t = plan.counts[i] * plan.tokens[i];
    tokens[plan.domains[i]] += t;
    total += t;
  }
  if (total == 0) throw Error("emergent_domain_weights: the plan selects no tokens");
  std::map<std::string, double> shares;
  for (const auto& [domain, t] : tokens) shares[domain] = static_cast<double>(t) / static_cast<double>(total);
  return shares;
}

}  // namespace corpusmix
