#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace corpusmix {

/// Dense row-major matrix of embeddings, one row per document.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(std::size_t dim, std::vector<double> values, bool normalized = false);

  std::size_t dim() const { return dim_; }
  std::size_t rows() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
  bool normalized() const { return normalized_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<double> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }

  const std::vector<double>& values() const { return values_; }

  // Returns a store containing the listed rows in the given order.
  EmbeddingStore select(std::span<const std::size_t> indices) const;

  // Throws on non-finite entries, naming the row.
  void check_finite() const;
  // True when every row norm lies within `tolerance` of 1.
  bool rows_unit_norm(double tolerance = 1e-6) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
  bool normalized_ = false;
};

// Scales every row to unit L2 norm. Throws if a row is all zeros.
EmbeddingStore normalize_embeddings(const EmbeddingStore& store);

double dot(std::span<const double> a, std::span<const double> b);

/// On-disk embedding matrix.
///
/// The matrix file holds rows*dim IEEE-754 float32 values, little-endian,
/// row-major, with no header. The sidecar is JSONL: the first line is the
/// header {"dim": D, "rows": N, "dtype": "float32le"}, then one line
/// {"row": i, "id": "..."} per row in row order.
struct EmbeddingFile {
  std::vector<std::string> ids;
  EmbeddingStore store;
};

std::filesystem::path default_sidecar_path(const std::filesystem::path& matrix);

void write_embedding_file(const std::filesystem::path& matrix,
                          const std::filesystem::path& sidecar,
                          std::span<const std::string> ids, const EmbeddingStore& store);

EmbeddingFile read_embedding_file(const std::filesystem::path& matrix,
                                  const std::filesystem::path& sidecar);

}  // namespace corpusmix
