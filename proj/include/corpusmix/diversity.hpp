#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "corpusmix/embeddings.hpp"

namespace corpusmix {

enum class KMeansInit { kPlusPlus, kRandom };
enum class SeparationMode { kMean, kMin };

struct KMeansOptions {
  std::size_t k = 0;  // 0 selects floor(sqrt(N))
  int iterations = 50;
  std::uint64_t seed = 1024;
  KMeansInit init = KMeansInit::kPlusPlus;
};

std::size_t default_cluster_count(std::size_t n);

/// Result of spherical K-means plus the per-cluster statistics used for
/// diversity. compactness/separation are empty until compute_cluster_stats().
struct Clustering {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> centroids;         // k x dim, unit rows
  std::vector<std::uint32_t> assignment;  // one entry per row
  std::vector<std::size_t> sizes;        // members per cluster
  std::vector<double> compactness;
  std::vector<double> separation;
  // Objective (sum of 1 - dot to the assigned centroid) after each
  // assignment step; entry 0 follows seeding.
  std::vector<double> objective_trace;
  std::size_t reseeds = 0;

  std::span<const double> centroid(std::size_t j) const {
    return {centroids.data() + j * dim, dim};
  }
  bool empty_cluster(std::size_t j) const { return sizes[j] == 0; }
};

/// Spherical K-means over unit rows: nearest centroid by cosine distance,
/// centroids re-normalized after every update. Ties go to the lower cluster
/// index. Empty clusters are re-seeded with the point farthest from its
/// centroid. The computation runs over rows in a canonical (lexicographic)
/// order so the partition does not depend on input row order.
Clustering kmeans(const EmbeddingStore& store, const KMeansOptions& options = {});

// Sum of cosine distances from each row to its assigned centroid.
double spherical_objective(const EmbeddingStore& store, const Clustering& clustering);

// Mean cosine distance of members to their centroid; singletons give 0.
std::vector<double> cluster_compactness(const Clustering& clustering, const EmbeddingStore& store);

// Mean (or min) cosine distance from each centroid to the other non-empty
// centroids. Requires at least two non-empty clusters.
std::vector<double> cluster_separation(const Clustering& clustering,
                                       SeparationMode mode = SeparationMode::kMean);

// Fills compactness and separation. With a single cluster separation is left
// empty and diversity falls back to compactness alone.
void compute_cluster_stats(Clustering& clustering, const EmbeddingStore& store,
                           SeparationMode mode = SeparationMode::kMean);

// d(x) = compactness[j] * separation[j] for x in cluster j.
std::vector<double> diversity_scores(const Clustering& clustering);

// Centroid matrix in the embedding file format (ids "cluster-<j>") plus a
// JSONL of doc_id, cluster, compactness, separation, diversity.
void write_clustering(const std::filesystem::path& centroid_matrix,
                      const std::filesystem::path& assignments_jsonl,
                      std::span<const std::string> doc_ids, const Clustering& clustering);

struct ClusterRecord {
  std::string doc_id;
  std::uint32_t cluster = 0;
  double compactness = 0;
  double separation = 0;
  double diversity = 0;
};

std::vector<ClusterRecord> read_cluster_assignments(const std::filesystem::path& assignments_jsonl);

}  // namespace corpusmix
