#include "corpusmix/corpus.hpp"

#include <cmath>
#include <sstream>

#include "corpusmix/embeddings.hpp"
#include "corpusmix/error.hpp"
#include "corpusmix/io.hpp"
#include "corpusmix/log.hpp"

namespace corpusmix {

using nlohmann::json;

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::kJsonl;
  throw Error("unknown corpus format: " + std::string(name));
}

std::uint64_t count_tokens(std::string_view text, double factor) {
  std::uint64_t words = 0;
  bool in_word = false;
  for (const char ch : text) {
    const bool space = ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v';
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return static_cast<std::uint64_t>(std::llround(static_cast<double>(words) * factor));
}

namespace {

std::string join(const std::vector<std::string>& items, std::size_t limit = 20) {
  std::ostringstream out;
  for (std::size_t i = 0; i < items.size() && i < limit; ++i) {
    if (i) out << ", ";
    out << items[i];
  }
  if (items.size() > limit) out << ", ... (" << items.size() << " total)";
  return out.str();
}

Document parse_document(const json& record, const std::filesystem::path& path, std::size_t line,
                        const LoadOptions& options) {
  const auto where = [&] { return location(path, line); };
  Document doc;
  auto id = record.find("id");
  if (id == record.end() || !id->is_string() || id->get<std::string>().empty())
    throw Error(where() + ": record missing string field \"id\"");
  doc.doc_id = id->get<std::string>();
  auto domain = record.find("domain");
  if (domain == record.end() || !domain->is_string())
    throw Error(where() + ": record " + doc.doc_id + " missing string field \"domain\"");
  doc.domain = domain->get<std::string>();

  auto text = record.find("text");
  auto tokens = record.find("tokens");
  if (text != record.end()) {
    if (!text->is_string()) throw Error(where() + ": field \"text\" must be a string");
    doc.text = text->get<std::string>();
  }
  if (tokens != record.end()) {
    if (!tokens->is_number_unsigned() && !(tokens->is_number_integer() && tokens->get<long long>() >= 0))
      throw Error(where() + ": field \"tokens\" must be a non-negative integer");
    doc.token_count = tokens->get<std::uint64_t>();
  } else if (doc.text) {
    doc.token_count = count_tokens(*doc.text, options.token_factor);
  } else {
    throw Error(where() + ": record " + doc.doc_id + " has neither \"text\" nor \"tokens\"");
  }
  return doc;
}

}  // namespace

CorpusReader::CorpusReader(const std::filesystem::path& path, LoadOptions options)
    : path_(path), options_(options), in_(path) {
  if (!in_) throw Error("cannot read corpus file: " + path.string());
}

std::optional<Document> CorpusReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(location(path_, line_no_) + ": malformed JSON: " + e.what());
    }
    if (!record.is_object()) throw Error(location(path_, line_no_) + ": record is not an object");
    Document doc = parse_document(record, path_, line_no_, options_);
    auto [it, inserted] = seen_.emplace(doc.doc_id, line_no_);
    if (!inserted) {
      duplicates_.push_back(doc.doc_id);
      if (options_.skip_duplicates) {
        log::warn(location(path_, line_no_) + ": skipping duplicate id " + doc.doc_id +
                  " (first seen on line " + std::to_string(it->second) + ")");
      }
      continue;
    }
    return doc;
  }
  return std::nullopt;
}

void CorpusReader::finish() const {
  if (!duplicates_.empty() && !options_.skip_duplicates) {
    throw Error(path_.string() + ": " + std::to_string(duplicates_.size()) +
                " duplicate doc_id(s): " + join(duplicates_));
  }
}

std::vector<Document> load_corpus(const std::filesystem::path& path, CorpusFormat format,
                                  LoadOptions options) {
  return load_corpus(std::span<const std::filesystem::path>(&path, 1), format, options);
}

std::vector<Document> load_corpus(std::span<const std::filesystem::path> paths,
                                  CorpusFormat format, LoadOptions options) {
  if (format != CorpusFormat::kJsonl) throw Error("unsupported corpus format");
  std::vector<Document> docs;
  std::map<std::string, std::string> owner;
  std::vector<std::string> cross_shard;
  for (const auto& path : paths) {
    CorpusReader reader(path, options);
    while (auto doc = reader.next()) {
      if (paths.size() > 1) {
        auto [it, inserted] = owner.emplace(doc->doc_id, path.string());
        if (!inserted) {
          cross_shard.push_back(doc->doc_id);
          if (options.skip_duplicates) continue;
        }
      }
      docs.push_back(std::move(*doc));
    }
    reader.finish();
  }
  if (!cross_shard.empty() && !options.skip_duplicates)
    throw Error("duplicate doc_id(s) across shards: " + join(cross_shard));
  return docs;
}

void CorpusManifest::add(const Document& doc) {
  ++total_docs;
  total_tokens += doc.token_count;
  auto& d = per_domain[doc.domain];
  ++d.doc_count;
  d.token_count += doc.token_count;
}

void CorpusManifest::merge(const CorpusManifest& other) {
  total_docs += other.total_docs;
  total_tokens += other.total_tokens;
  for (const auto& [name, stats] : other.per_domain) {
    auto& d = per_domain[name];
    d.doc_count += stats.doc_count;
    d.token_count += stats.token_count;
  }
}

bool CorpusManifest::consistent() const {
  std::uint64_t docs = 0, tokens = 0;
  for (const auto& [_, s] : per_domain) {
    docs += s.doc_count;
    tokens += s.token_count;
  }
  return docs == total_docs && tokens == total_tokens;
}

json CorpusManifest::to_json() const {
  json domains = json::object();
  for (const auto& [name, s] : per_domain)
    domains[name] = {{"docs", s.doc_count}, {"tokens", s.token_count}};
  return {{"total_docs", total_docs}, {"total_tokens", total_tokens}, {"per_domain", domains}};
}

CorpusManifest CorpusManifest::from_json(const json& j) {
  CorpusManifest m;
  try {
    m.total_docs = j.at("total_docs").get<std::uint64_t>();
    m.total_tokens = j.at("total_tokens").get<std::uint64_t>();
    for (const auto& [name, s] : j.at("per_domain").items())
      m.per_domain[name] = {s.at("docs").get<std::uint64_t>(), s.at("tokens").get<std::uint64_t>()};
  } catch (const json::exception& e) {
    throw Error(std::string("malformed manifest: ") + e.what());
  }
  if (!m.consistent()) throw Error("manifest totals disagree with per-domain counts");
  return m;
}

CorpusManifest build_manifest(std::span<const Document> corpus) {
  if (corpus.empty()) throw Error("cannot build a manifest for an empty corpus");
  CorpusManifest m;
  for (const auto& doc : corpus) m.add(doc);
  return m;
}

AnnotationKind parse_annotation_kind(std::string_view name) {
  if (name == "quality") return AnnotationKind::kQuality;
  if (name == "embedding") return AnnotationKind::kEmbedding;
  if (name == "diversity") return AnnotationKind::kDiversity;
  throw Error("unknown annotation kind: " + std::string(name));
}

std::map<std::string, std::size_t> index_by_id(std::span<const Document> corpus) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!index.emplace(corpus[i].doc_id, i).second)
      throw Error("duplicate doc_id in corpus: " + corpus[i].doc_id);
  }
  return index;
}

AnnotationReport attach_annotations(std::vector<Document>& corpus,
                                    const std::filesystem::path& annotations, AnnotationKind kind,
                                    const AnnotationOptions& options) {
  const auto index = index_by_id(corpus);
  std::vector<bool> hit(corpus.size(), false);
  AnnotationReport report;
  std::vector<std::string> duplicates;

  // Resolved values are staged and applied only once the whole file is valid.
  std::vector<std::pair<std::size_t, json>> staged;
  const auto stage = [&](const std::string& id, json value, const std::string& where) {
    auto it = index.find(id);
    if (it == index.end()) {
      report.unknown_ids.push_back(id);
      return;
    }
    if (hit[it->second]) {
      duplicates.push_back(where + " " + id);
      return;
    }
    hit[it->second] = true;
    staged.emplace_back(it->second, std::move(value));
  };

  if (kind == AnnotationKind::kEmbedding) {
    const auto sidecar = options.sidecar.value_or(default_sidecar_path(annotations));
    const EmbeddingFile file = read_embedding_file(annotations, sidecar);
    for (std::size_t row = 0; row < file.ids.size(); ++row)
      stage(file.ids[row], json(row), location(sidecar, row + 2));
  } else {
    const char* field = kind == AnnotationKind::kQuality ? "quality" : "diversity";
    for_each_jsonl(annotations, [&](const json& record, std::size_t line) {
      const auto where = location(annotations, line);
      auto id = record.find("id");
      if (id == record.end() || !id->is_string()) throw Error(where + ": missing string field \"id\"");
      auto value = record.find(field);
      if (value == record.end()) throw Error(where + ": missing field \"" + field + "\"");
      if (kind == AnnotationKind::kQuality) {
        if (!value->is_number_integer())
          throw Error(where + ": \"quality\" must be an integer");
        const auto q = value->get<long long>();
        if (q < 0 || q > 10) throw Error(where + ": quality " + std::to_string(q) + " outside 0..10");
      } else {
        if (!value->is_number()) throw Error(where + ": \"diversity\" must be a number");
        const double d = value->get<double>();
        if (!std::isfinite(d) || d < 0) throw Error(where + ": diversity must be finite and >= 0");
      }
      stage(id->get<std::string>(), *value, where);
    });
  }

  if (!duplicates.empty())
    throw Error("duplicate annotation(s) in " + annotations.string() + ": " + join(duplicates));
  if (!report.unknown_ids.empty() && !options.allow_unknown_ids)
    throw Error(annotations.string() + ": annotation for unknown doc_id(s): " + join(report.unknown_ids));

  for (auto& [pos, value] : staged) {
    Document& doc = corpus[pos];
    switch (kind) {
      case AnnotationKind::kQuality: doc.quality_score = value.get<int>(); break;
      case AnnotationKind::kDiversity: doc.diversity_raw = value.get<double>(); break;
      case AnnotationKind::kEmbedding: doc.embedding_ref = value.get<std::size_t>(); break;
    }
  }
  report.attached = staged.size();
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (!hit[i]) report.unannotated.push_back(corpus[i].doc_id);
  if (!report.unknown_ids.empty())
    log::warn(annotations.string() + ": ignored " + std::to_string(report.unknown_ids.size()) +
              " annotation(s) for unknown doc_id(s): " + join(report.unknown_ids));
  return report;
}

}  // namespace corpusmix
