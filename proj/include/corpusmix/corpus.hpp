#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace corpusmix {

/// One corpus sample plus the annotation slots filled in by later stages.
struct Document {
  std::string doc_id;
  std::string domain;
  std::optional<std::string> text;
  std::uint64_t token_count = 0;

  std::optional<int> quality_score;           // 0..10
  std::optional<std::size_t> embedding_ref;   // row in an EmbeddingStore
  std::optional<double> diversity_raw;
  std::optional<double> weight;
  std::optional<std::uint64_t> count;

  bool eligible_for_sampling() const { return token_count >= 1; }
};

enum class CorpusFormat { kJsonl };

CorpusFormat parse_corpus_format(std::string_view name);

struct LoadOptions {
  // Tokens per whitespace-separated word when a record has no `tokens` field.
  double token_factor = 1.0;
  // Drop later records whose id was already seen instead of failing.
  bool skip_duplicates = false;
};

// Stand-in tokenizer: whitespace word count times `factor`, rounded to nearest.
std::uint64_t count_tokens(std::string_view text, double factor = 1.0);

/// Streams documents from a JSONL corpus file in file order.
///
/// Each line is an object carrying `id`, `domain` and at least one of `text`
/// and `tokens`. Blank lines are skipped. Malformed records raise an Error
/// naming the file and line. Duplicate ids are collected while streaming and
/// reported by finish(), so one pass can list every duplicate.
class CorpusReader {
 public:
  CorpusReader(const std::filesystem::path& path, LoadOptions options = {});

  std::optional<Document> next();

  // Throws if duplicate ids were seen and skip_duplicates is off.
  void finish() const;

  const std::vector<std::string>& duplicate_ids() const { return duplicates_; }
  std::size_t line_number() const { return line_no_; }

 private:
  std::filesystem::path path_;
  LoadOptions options_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
  std::map<std::string, std::size_t> seen_;
  std::vector<std::string> duplicates_;
};

std::vector<Document> load_corpus(const std::filesystem::path& path,
                                  CorpusFormat format = CorpusFormat::kJsonl,
                                  LoadOptions options = {});

// Loads several shards in order. Ids must be unique across shards.
std::vector<Document> load_corpus(std::span<const std::filesystem::path> paths,
                                  CorpusFormat format = CorpusFormat::kJsonl,
                                  LoadOptions options = {});

struct DomainStats {
  std::uint64_t doc_count = 0;
  std::uint64_t token_count = 0;

  bool operator==(const DomainStats&) const = default;
};

/// Aggregate corpus statistics. Partial manifests from independent shards
/// combine with merge(), which is associative and commutative.
struct CorpusManifest {
  std::uint64_t total_docs = 0;
  std::uint64_t total_tokens = 0;
  std::map<std::string, DomainStats> per_domain;

  void add(const Document& doc);
  void merge(const CorpusManifest& other);
  // Checks totals against the per-domain breakdown.
  bool consistent() const;

  nlohmann::json to_json() const;
  static CorpusManifest from_json(const nlohmann::json& j);

  bool operator==(const CorpusManifest&) const = default;
};

CorpusManifest build_manifest(std::span<const Document> corpus);

enum class AnnotationKind { kQuality, kEmbedding, kDiversity };

AnnotationKind parse_annotation_kind(std::string_view name);

struct AnnotationOptions {
  // Report annotation ids that match no document instead of failing.
  bool allow_unknown_ids = false;
  // Embedding sidecar (row index -> doc_id); defaults to `<path>.ids.jsonl`.
  std::optional<std::filesystem::path> sidecar;
};

struct AnnotationReport {
  std::size_t attached = 0;
  std::vector<std::string> unannotated;   // documents left without the annotation
  std::vector<std::string> unknown_ids;   // annotation ids with no document
};

/// Joins a side file of annotations onto `corpus` by doc_id.
///
/// quality:   JSONL with `id` and integer `quality` in 0..10
/// diversity: JSONL with `id` and non-negative `diversity`
/// embedding: binary float32 matrix plus sidecar; sets embedding_ref to the row
AnnotationReport attach_annotations(std::vector<Document>& corpus,
                                    const std::filesystem::path& annotations,
                                    AnnotationKind kind,
                                    const AnnotationOptions& options = {});

// Index from doc_id to position; throws on duplicate ids.
std::map<std::string, std::size_t> index_by_id(std::span<const Document> corpus);

}  // namespace corpusmix
