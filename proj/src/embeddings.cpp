#include "corpusmix/embeddings.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "corpusmix/error.hpp"
#include "corpusmix/io.hpp"
#include "json.hpp"

namespace corpusmix {

using nlohmann::json;

EmbeddingStore::EmbeddingStore(std::size_t dim, std::vector<double> values, bool normalized)
    : dim_(dim), values_(std::move(values)), normalized_(normalized) {
  if (dim_ == 0) throw Error("embedding dimension must be positive");
  if (values_.size() % dim_ != 0)
    throw Error("embedding values (" + std::to_string(values_.size()) +
                ") are not a multiple of dim " + std::to_string(dim_));
}

EmbeddingStore EmbeddingStore::select(std::span<const std::size_t> indices) const {
  std::vector<double> out;
  out.reserve(indices.size() * dim_);
  for (const std::size_t i : indices) {
    if (i >= rows()) throw Error("embedding row " + std::to_string(i) + " out of range");
    const auto r = row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  return EmbeddingStore(dim_, std::move(out), normalized_);
}

void EmbeddingStore::check_finite() const {
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      throw Error("non-finite embedding value in row " + std::to_string(i / dim_));
}

bool EmbeddingStore::rows_unit_norm(double tolerance) const {
  for (std::size_t i = 0; i < rows(); ++i) {
    const auto r = row(i);
    if (std::abs(std::sqrt(dot(r, r)) - 1.0) > tolerance) return false;
  }
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

EmbeddingStore normalize_embeddings(const EmbeddingStore& store) {
  store.check_finite();
  std::vector<double> out = store.values();
  const std::size_t dim = store.dim();
  for (std::size_t i = 0; i < store.rows(); ++i) {
    double* r = out.data() + i * dim;
    double norm = 0;
    for (std::size_t c = 0; c < dim; ++c) norm += r[c] * r[c];
    norm = std::sqrt(norm);
    if (norm == 0) throw Error("cannot normalize all-zero embedding at row " + std::to_string(i));
    for (std::size_t c = 0; c < dim; ++c) r[c] /= norm;
  }
  return EmbeddingStore(dim, std::move(out), true);
}

std::filesystem::path default_sidecar_path(const std::filesystem::path& matrix) {
  auto p = matrix;
  p += ".ids.jsonl";
  return p;
}

namespace {

void put_f32le(std::ostream& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  const char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                         static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
  out.write(bytes, 4);
}

float get_f32le(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

}  // namespace

void write_embedding_file(const std::filesystem::path& matrix, const std::filesystem::path& sidecar,
                          std::span<const std::string> ids, const EmbeddingStore& store) {
  if (ids.size() != store.rows())
    throw Error("embedding ids (" + std::to_string(ids.size()) + ") do not match rows (" +
                std::to_string(store.rows()) + ")");
  AtomicFile bin(matrix, true);
  for (const double v : store.values()) put_f32le(bin.stream(), static_cast<float>(v));
  AtomicFile side(sidecar);
  side.stream() << json{{"dim", store.dim()}, {"rows", store.rows()}, {"dtype", "float32le"}}.dump()
                << '\n';
  for (std::size_t i = 0; i < ids.size(); ++i)
    side.stream() << json{{"row", i}, {"id", ids[i]}}.dump() << '\n';
  bin.commit();
  side.commit();
}

EmbeddingFile read_embedding_file(const std::filesystem::path& matrix,
                                  const std::filesystem::path& sidecar) {
  std::ifstream side(sidecar);
  if (!side) throw Error("cannot read embedding sidecar: " + sidecar.string());
  std::string line;
  if (!std::getline(side, line)) throw Error(sidecar.string() + ": missing header line");
  std::size_t dim = 0, rows = 0;
  try {
    const json header = json::parse(line);
    dim = header.at("dim").get<std::size_t>();
    rows = header.at("rows").get<std::size_t>();
    if (header.contains("dtype") && header.at("dtype") != "float32le")
      throw Error(sidecar.string() + ":1: unsupported dtype " + header.at("dtype").dump());
  } catch (const json::exception& e) {
    throw Error(sidecar.string() + ":1: malformed header: " + e.what());
  }
  if (dim == 0) throw Error(sidecar.string() + ":1: dim must be positive");

  EmbeddingFile file;
  file.ids.reserve(rows);
  std::size_t line_no = 1;
  while (std::getline(side, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json rec = json::parse(line);
      const auto row = rec.at("row").get<std::size_t>();
      if (row != file.ids.size())
        throw Error(location(sidecar, line_no) + ": expected row " + std::to_string(file.ids.size()) +
                    ", found " + std::to_string(row));
      file.ids.push_back(rec.at("id").get<std::string>());
    } catch (const json::exception& e) {
      throw Error(location(sidecar, line_no) + ": malformed sidecar record: " + e.what());
    }
  }
  if (file.ids.size() != rows)
    throw Error(sidecar.string() + ": header declares " + std::to_string(rows) + " rows, found " +
                std::to_string(file.ids.size()));

  std::ifstream bin(matrix, std::ios::binary);
  if (!bin) throw Error("cannot read embedding matrix: " + matrix.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  const std::size_t expected = rows * dim * 4;
  if (bytes.size() != expected)
    throw Error(matrix.string() + ": size " + std::to_string(bytes.size()) + " bytes, expected " +
                std::to_string(expected) + " for " + std::to_string(rows) + "x" + std::to_string(dim));
  std::vector<double> values(rows * dim);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = get_f32le(bytes.data() + 4 * i);
  file.store = rows == 0 ? EmbeddingStore() : EmbeddingStore(dim, std::move(values));
  file.store.check_finite();
  return file;
}

}  // namespace corpusmix
