#include "corpusmix/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "corpusmix/error.hpp"
#include "corpusmix/io.hpp"
#include "corpusmix/log.hpp"
#include "corpusmix/parallel.hpp"
#include "corpusmix/random.hpp"

namespace corpusmix {

std::size_t default_cluster_count(std::size_t n) {
  auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  // Guard against sqrt rounding for large perfect squares.
  while (k * k > n) --k;
  while ((k + 1) * (k + 1) <= n) ++k;
  return std::max<std::size_t>(k, 1);
}

namespace {

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  return std::max(0.0, 1.0 - dot(a, b));
}

// Working state for one K-means run over rows in canonical order.
class SphericalKMeans {
 public:
  SphericalKMeans(const EmbeddingStore& points, std::size_t k)
      : x_(points), n_(points.rows()), dim_(points.dim()), k_(k),
        centroids_(k * dim_), assignment_(n_, 0), best_dot_(n_, 0), sizes_(k, 0) {}

  void seed_plus_plus(Rng& rng) {
    std::vector<std::size_t> chosen;
    chosen.push_back(static_cast<std::size_t>(rng.below(n_)));
    std::vector<double> dist(n_);
    for (std::size_t i = 0; i < n_; ++i) dist[i] = cosine_distance(x_.row(i), x_.row(chosen[0]));
    std::vector<bool> taken(n_, false);
    taken[chosen[0]] = true;
    while (chosen.size() < k_) {
      double total = 0;
      for (std::size_t i = 0; i < n_; ++i)
        if (!taken[i]) total += dist[i];
      std::size_t pick = n_;
      if (total > 0) {
        const double target = rng.uniform() * total;
        double acc = 0;
        for (std::size_t i = 0; i < n_; ++i) {
          if (taken[i] || dist[i] <= 0) continue;
          acc += dist[i];
          pick = i;
          if (acc > target) break;
        }
      }
      if (pick == n_) {
        // Every remaining point coincides with a chosen centre.
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < n_; ++i)
          if (!taken[i]) rest.push_back(i);
        pick = rest[rng.below(rest.size())];
      }
      taken[pick] = true;
      chosen.push_back(pick);
      for (std::size_t i = 0; i < n_; ++i)
        dist[i] = std::min(dist[i], cosine_distance(x_.row(i), x_.row(pick)));
    }
    set_centroids(chosen);
  }

  void seed_random(Rng& rng) {
    std::vector<std::size_t> idx(n_);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < k_; ++i) std::swap(idx[i], idx[i + rng.below(n_ - i)]);
    idx.resize(k_);
    set_centroids(idx);
  }

  // Nearest centroid for every row; returns true if any assignment changed.
  bool assign() {
    std::vector<char> changed(n_, 0);
    parallel_chunks(n_, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const auto row = x_.row(i);
        std::uint32_t best = 0;
        double best_dot = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k_; ++j) {
          const double d = dot(row, centroid(j));
          if (d > best_dot) {
            best_dot = d;
            best = static_cast<std::uint32_t>(j);
          }
        }
        changed[i] = assignment_[i] != best;
        assignment_[i] = best;
        best_dot_[i] = best_dot;
      }
    }, 256);
    recount();
    return std::any_of(changed.begin(), changed.end(), [](char c) { return c != 0; });
  }

  double objective() const {
    double s = 0;
    for (std::size_t i = 0; i < n_; ++i) s += 1.0 - best_dot_[i];
    return s;
  }

  // Moves the point farthest from its centroid (taken from a cluster with at
  // least two members) into each empty cluster. Returns the number of moves.
  std::size_t reseed_empty() {
    std::size_t moves = 0;
    for (std::size_t j = 0; j < k_; ++j) {
      if (sizes_[j] != 0) continue;
      std::size_t far = n_;
      double far_dist = -1;
      for (std::size_t i = 0; i < n_; ++i) {
        if (sizes_[assignment_[i]] < 2) continue;
        const double d = 1.0 - best_dot_[i];
        if (d > far_dist) {
          far_dist = d;
          far = i;
        }
      }
      if (far == n_) break;
      --sizes_[assignment_[far]];
      assignment_[far] = static_cast<std::uint32_t>(j);
      ++sizes_[j];
      const auto row = x_.row(far);
      std::copy(row.begin(), row.end(), centroids_.begin() + j * dim_);
      best_dot_[far] = dot(row, row);
      ++moves;
    }
    return moves;
  }

  // Centroid j becomes the normalized sum of its members, accumulated in row
  // order. A zero sum keeps the previous centroid.
  void update() {
    std::vector<double> sums(k_ * dim_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto row = x_.row(i);
      double* s = sums.data() + assignment_[i] * dim_;
      for (std::size_t c = 0; c < dim_; ++c) s[c] += row[c];
    }
    for (std::size_t j = 0; j < k_; ++j) {
      if (sizes_[j] == 0) continue;
      double* s = sums.data() + j * dim_;
      double norm = 0;
      for (std::size_t c = 0; c < dim_; ++c) norm += s[c] * s[c];
      norm = std::sqrt(norm);
      if (norm == 0) continue;
      for (std::size_t c = 0; c < dim_; ++c) centroids_[j * dim_ + c] = s[c] / norm;
    }
  }

  bool has_empty() const {
    return std::any_of(sizes_.begin(), sizes_.end(), [](std::size_t s) { return s == 0; });
  }

  const std::vector<double>& centroids() const { return centroids_; }
  const std::vector<std::uint32_t>& assignment() const { return assignment_; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }

 private:
  std::span<const double> centroid(std::size_t j) const { return {centroids_.data() + j * dim_, dim_}; }

  void set_centroids(const std::vector<std::size_t>& rows) {
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const auto r = x_.row(rows[j]);
      std::copy(r.begin(), r.end(), centroids_.begin() + j * dim_);
    }
  }

  void recount() {
    std::fill(sizes_.begin(), sizes_.end(), 0);
    for (const auto a : assignment_) ++sizes_[a];
  }

  const EmbeddingStore& x_;
  std::size_t n_, dim_, k_;
  std::vector<double> centroids_;
  std::vector<std::uint32_t> assignment_;
  std::vector<double> best_dot_;
  std::vector<std::size_t> sizes_;
};

}  // namespace

Clustering kmeans(const EmbeddingStore& store, const KMeansOptions& options) {
  const std::size_t n = store.rows();
  if (n == 0) throw Error("kmeans: empty embedding store");
  if (!store.rows_unit_norm(1e-6)) throw Error("kmeans: embeddings are not L2-normalized");
  const std::size_t k = options.k == 0 ? default_cluster_count(n) : options.k;
  if (k < 1) throw Error("kmeans: k must be at least 1");
  if (k > n)
    throw Error("kmeans: k=" + std::to_string(k) + " exceeds the number of points " + std::to_string(n));
  if (options.iterations < 0) throw Error("kmeans: negative iteration count");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = store.row(a), rb = store.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  const EmbeddingStore canon = store.select(perm);

  SphericalKMeans km(canon, k);
  Rng rng(options.seed);
  if (options.init == KMeansInit::kPlusPlus) {
    km.seed_plus_plus(rng);
  } else {
    km.seed_random(rng);
  }

  Clustering out;
  out.k = k;
  out.dim = store.dim();
  km.assign();
  out.objective_trace.push_back(km.objective());
  for (int it = 0; it < options.iterations; ++it) {
    const std::size_t moved = km.reseed_empty();
    out.reseeds += moved;
    km.update();
    const bool changed = km.assign();
    out.objective_trace.push_back(km.objective());
    if (!changed && moved == 0) break;
  }
  // Resolve clusters left empty by the last assignment.
  for (std::size_t guard = 0; guard < k && km.has_empty(); ++guard) {
    const std::size_t moved = km.reseed_empty();
    if (moved == 0) break;
    out.reseeds += moved;
    km.update();
    km.assign();
    out.objective_trace.push_back(km.objective());
  }
  if (out.reseeds > 0) log::warn("kmeans: re-seeded " + std::to_string(out.reseeds) + " empty cluster(s)");

  out.centroids = km.centroids();
  out.sizes = km.sizes();
  out.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.assignment[perm[i]] = km.assignment()[i];
  return out;
}

double spherical_objective(const EmbeddingStore& store, const Clustering& clustering) {
  double s = 0;
  for (std::size_t i = 0; i < store.rows(); ++i)
    s += 1.0 - dot(store.row(i), clustering.centroid(clustering.assignment[i]));
  return s;
}

std::vector<double> cluster_compactness(const Clustering& clustering, const EmbeddingStore& store) {
  if (clustering.assignment.size() != store.rows())
    throw Error("cluster_compactness: assignment covers " + std::to_string(clustering.assignment.size()) +
                " rows, store has " + std::to_string(store.rows()));
  std::vector<double> sum(clustering.k, 0.0);
  std::vector<std::size_t> members(clustering.k, 0);
  for (std::size_t i = 0; i < store.rows(); ++i) {
    const auto j = clustering.assignment[i];
    if (j >= clustering.k) throw Error("cluster_compactness: assignment index out of range");
    sum[j] += cosine_distance(store.row(i), clustering.centroid(j));
    ++members[j];
  }
  std::vector<double> out(clustering.k, 0.0);
  for (std::size_t j = 0; j < clustering.k; ++j) {
    if (members[j] == 0) throw Error("cluster_compactness: cluster " + std::to_string(j) + " is empty");
    out[j] = members[j] == 1 ? 0.0 : sum[j] / static_cast<double>(members[j]);
  }
  return out;
}

std::vector<double> cluster_separation(const Clustering& clustering, SeparationMode mode) {
  std::vector<std::size_t> live;
  for (std::size_t j = 0; j < clustering.k; ++j)
    if (clustering.sizes.empty() || clustering.sizes[j] > 0) live.push_back(j);
  if (live.size() < 2)
    throw Error("cluster_separation: undefined with fewer than two clusters; "
                "use compactness-only diversity");
  std::vector<double> out(clustering.k, 0.0);
  for (const std::size_t j : live) {
    double acc = mode == SeparationMode::kMean ? 0.0 : std::numeric_limits<double>::infinity();
    for (const std::size_t l : live) {
      if (l == j) continue;
      const double d = cosine_distance(clustering.centroid(j), clustering.centroid(l));
      acc = mode == SeparationMode::kMean ? acc + d : std::min(acc, d);
    }
    out[j] = mode == SeparationMode::kMean ? acc / static_cast<double>(live.size() - 1) : acc;
  }
  return out;
}

void compute_cluster_stats(Clustering& clustering, const EmbeddingStore& store, SeparationMode mode) {
  clustering.compactness = cluster_compactness(clustering, store);
  const auto live = std::count_if(clustering.sizes.begin(), clustering.sizes.end(),
                                  [](std::size_t s) { return s > 0; });
  if (live >= 2) {
    clustering.separation = cluster_separation(clustering, mode);
  } else {
    clustering.separation.clear();
  }
  const auto singletons = std::count(clustering.sizes.begin(), clustering.sizes.end(), std::size_t{1});
  if (singletons > 0)
    log::warn(std::to_string(singletons) + " singleton cluster(s): their members get diversity 0");
}

std::vector<double> diversity_scores(const Clustering& clustering) {
  if (clustering.compactness.size() != clustering.k)
    throw Error("diversity_scores: compactness not computed");
  const bool fallback = clustering.separation.empty();
  if (!fallback && clustering.separation.size() != clustering.k)
    throw Error("diversity_scores: separation has the wrong length");
  if (fallback) log::warn("diversity_scores: single cluster, using compactness alone");
  std::vector<double> per_cluster(clustering.k);
  for (std::size_t j = 0; j < clustering.k; ++j)
    per_cluster[j] = fallback ? clustering.compactness[j]
                              : clustering.compactness[j] * clustering.separation[j];
  std::vector<double> out(clustering.assignment.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = per_cluster[clustering.assignment[i]];
  return out;
}

void write_clustering(const std::filesystem::path& centroid_matrix,
                      const std::filesystem::path& assignments_jsonl,
                      std::span<const std::string> doc_ids, const Clustering& clustering) {
  if (doc_ids.size() != clustering.assignment.size())
    throw Error("write_clustering: doc ids do not match the assignment");
  std::vector<std::string> names(clustering.k);
  for (std::size_t j = 0; j < clustering.k; ++j) names[j] = "cluster-" + std::to_string(j);
  write_embedding_file(centroid_matrix, default_sidecar_path(centroid_matrix), names,
                       EmbeddingStore(clustering.dim, clustering.centroids, true));

  const auto diversity = diversity_scores(clustering);
  AtomicFile out(assignments_jsonl);
  for (std::size_t i = 0; i < doc_ids.size(); ++i) {
    const auto j = clustering.assignment[i];
    nlohmann::json rec = {{"id", doc_ids[i]},
                          {"cluster", j},
                          {"compactness", clustering.compactness[j]},
                          {"separation", clustering.separation.empty() ? nlohmann::json(nullptr)
                                                                       : nlohmann::json(clustering.separation[j])},
                          {"diversity", diversity[i]}};
    out.stream() << rec.dump() << '\n';
  }
  out.commit();
}

std::vector<ClusterRecord> read_cluster_assignments(const std::filesystem::path& assignments_jsonl) {
  std::vector<ClusterRecord> out;
  for_each_jsonl(assignments_jsonl, [&](const nlohmann::json& rec, std::size_t line) {
    try {
      ClusterRecord r;
      r.doc_id = rec.at("id").get<std::string>();
      r.cluster = rec.at("cluster").get<std::uint32_t>();
      r.compactness = rec.at("compactness").get<double>();
      r.separation = rec.at("separation").is_null() ? 0.0 : rec.at("separation").get<double>();
      r.diversity = rec.at("diversity").get<double>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(location(assignments_jsonl, line) + ": malformed cluster record: " + e.what());
    }
  });
  return out;
}

}  // namespace corpusmix
