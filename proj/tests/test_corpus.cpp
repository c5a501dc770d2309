#include <set>

#include "corpusmix/corpus.hpp"
#include "corpusmix/error.hpp"
#include "corpusmix/io.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace corpusmix;
using nlohmann::json;

TEST_CASE("load_corpus yields valid records in file order") {
  testing::TempDir dir;
  testing::write_lines(dir / "c.jsonl", {{{"id", "a"}, {"domain", "wiki"}, {"text", "one two three"}},
                                         {{"id", "b"}, {"domain", "c4"}, {"tokens", 12}},
                                         {{"id", "c"}, {"domain", "wiki"}, {"text", "x"}, {"tokens", 9}}});
  const auto docs = load_corpus(dir / "c.jsonl");
  REQUIRE(docs.size() == 3);
  CHECK(docs[0].doc_id == "a");
  CHECK(docs[1].doc_id == "b");
  CHECK(docs[2].doc_id == "c");
  CHECK(docs[0].token_count == 3);
  CHECK(docs[1].token_count == 12);
  CHECK_FALSE(docs[1].text.has_value());
  // An explicit token count wins over the word-count rule.
  CHECK(docs[2].token_count == 9);
}

TEST_CASE("token stand-in counts whitespace words times the factor") {
  CHECK(count_tokens("") == 0);
  CHECK(count_tokens("  hello \t world\n") == 2);
  CHECK(count_tokens("a b c d", 1.5) == 6);
  CHECK(count_tokens("a b c", 1.3) == 4);  // 3.9 rounds to 4
}

TEST_CASE("missing domain is reported with its line number") {
  testing::TempDir dir;
  testing::write_text(dir / "c.jsonl",
                      "{\"id\":\"a\",\"domain\":\"x\",\"tokens\":1}\n\n{\"id\":\"b\",\"tokens\":3}\n");
  try {
    load_corpus(dir / "c.jsonl");
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("c.jsonl:3") != std::string::npos);
    CHECK(msg.find("domain") != std::string::npos);
  }
}

TEST_CASE("malformed records are rejected") {
  testing::TempDir dir;
  SUBCASE("bad json") {
    testing::write_text(dir / "c.jsonl", "{\"id\":\"a\",\"domain\":\"x\",\"tokens\":1}\n{not json\n");
    CHECK_THROWS_WITH_AS(load_corpus(dir / "c.jsonl"), doctest::Contains("c.jsonl:2"), Error);
  }
  SUBCASE("no id") {
    testing::write_text(dir / "c.jsonl", "{\"domain\":\"x\",\"tokens\":1}\n");
    CHECK_THROWS_WITH_AS(load_corpus(dir / "c.jsonl"), doctest::Contains("\"id\""), Error);
  }
  SUBCASE("neither text nor tokens") {
    testing::write_text(dir / "c.jsonl", "{\"id\":\"a\",\"domain\":\"x\"}\n");
    CHECK_THROWS_WITH_AS(load_corpus(dir / "c.jsonl"), doctest::Contains("neither"), Error);
  }
  SUBCASE("negative tokens") {
    testing::write_text(dir / "c.jsonl", "{\"id\":\"a\",\"domain\":\"x\",\"tokens\":-4}\n");
    CHECK_THROWS_AS(load_corpus(dir / "c.jsonl"), Error);
  }
  SUBCASE("unreadable file") {
    CHECK_THROWS_WITH_AS(load_corpus(dir / "nope.jsonl"), doctest::Contains("nope.jsonl"), Error);
  }
}

TEST_CASE("duplicate ids in a 1000-record file are all listed") {
  testing::TempDir dir;
  std::vector<json> records;
  for (int i = 0; i < 1000; ++i) records.push_back({{"id", "d" + std::to_string(i)}, {"domain", "x"}, {"tokens", 5}});
  records[400]["id"] = "d17";
  records[901]["id"] = "d555";
  testing::write_lines(dir / "c.jsonl", records);

  // Independent recount straight from the file lines.
  std::map<std::string, int> seen;
  for_each_jsonl(dir / "c.jsonl", [&](const json& r, std::size_t) { ++seen[r["id"].get<std::string>()]; });
  std::set<std::string> expected;
  for (const auto& [id, n] : seen)
    if (n > 1) expected.insert(id);
  REQUIRE(expected == std::set<std::string>{"d17", "d555"});

  try {
    load_corpus(dir / "c.jsonl");
    FAIL("expected duplicate error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    for (const auto& id : expected) CHECK(msg.find(id) != std::string::npos);
    CHECK(msg.find("2 duplicate") != std::string::npos);
  }

  LoadOptions skip;
  skip.skip_duplicates = true;
  const auto docs = load_corpus(dir / "c.jsonl", CorpusFormat::kJsonl, skip);
  CHECK(docs.size() == 998);
}

TEST_CASE("duplicates across shards are fatal") {
  testing::TempDir dir;
  testing::write_lines(dir / "a.jsonl", {{{"id", "x"}, {"domain", "d"}, {"tokens", 1}}});
  testing::write_lines(dir / "b.jsonl", {{{"id", "x"}, {"domain", "d"}, {"tokens", 1}}});
  const std::vector<std::filesystem::path> shards = {dir / "a.jsonl", dir / "b.jsonl"};
  CHECK_THROWS_WITH_AS(load_corpus(shards), doctest::Contains("x"), Error);
}

TEST_CASE("manifest of a single document") {
  Document d;
  d.doc_id = "only";
  d.domain = "wiki";
  d.token_count = 7;
  const auto m = build_manifest(std::span<const Document>(&d, 1));
  CHECK(m.total_docs == 1);
  CHECK(m.total_tokens == 7);
  CHECK(m.per_domain.at("wiki") == DomainStats{1, 7});
  CHECK_THROWS_AS(build_manifest(std::span<const Document>{}), Error);
}

TEST_CASE("manifest matches the generator ledger and a brute-force recount") {
  const auto corpus = testing::synthetic_corpus(10000, 42);
  const auto m = build_manifest(corpus.docs);
  CHECK(m.total_docs == 10000);
  CHECK(m.total_tokens == corpus.total_tokens);
  REQUIRE(m.per_domain.size() == corpus.ledger.size());
  for (const auto& [domain, counts] : corpus.ledger) {
    CHECK(m.per_domain.at(domain).doc_count == counts.first);
    CHECK(m.per_domain.at(domain).token_count == counts.second);
  }
  CHECK(m.consistent());
  CHECK(build_manifest(corpus.docs) == m);  // idempotent
}

TEST_CASE("partial manifests merge associatively") {
  const auto corpus = testing::synthetic_corpus(3000, 9);
  std::span<const Document> all(corpus.docs);
  const auto a = build_manifest(all.subspan(0, 1000));
  const auto b = build_manifest(all.subspan(1000, 700));
  const auto c = build_manifest(all.subspan(1700));
  CorpusManifest left = a;
  left.merge(b);
  left.merge(c);
  CorpusManifest bc = b;
  bc.merge(c);
  CorpusManifest right = a;
  right.merge(bc);
  CHECK(left == right);
  CHECK(left == build_manifest(all));
  CHECK(CorpusManifest::from_json(left.to_json()) == left);
}

TEST_CASE("manifest pipeline output is byte-identical across runs") {
  testing::TempDir dir;
  const auto corpus = testing::synthetic_corpus(500, 3);
  testing::write_corpus(dir / "c.jsonl", corpus.docs);
  const auto dump = [&] { return build_manifest(load_corpus(dir / "c.jsonl")).to_json().dump(); };
  CHECK(dump() == dump());
}

TEST_CASE("quality annotations join by doc id") {
  testing::TempDir dir;
  const auto base = testing::synthetic_corpus(20, 5);
  std::vector<json> q;
  for (std::size_t i = 0; i < base.docs.size(); ++i) q.push_back({{"id", base.docs[i].doc_id}, {"quality", int(i % 11)}});

  SUBCASE("full coverage") {
    auto docs = base.docs;
    testing::write_lines(dir / "q.jsonl", q);
    const auto r = attach_annotations(docs, dir / "q.jsonl", AnnotationKind::kQuality);
    CHECK(r.attached == 20);
    CHECK(r.unannotated.empty());
    for (std::size_t i = 0; i < docs.size(); ++i) CHECK(docs[i].quality_score == int(i % 11));
  }
  SUBCASE("five ids missing are listed") {
    auto docs = base.docs;
    std::vector<json> partial(q.begin() + 5, q.end());
    testing::write_lines(dir / "q.jsonl", partial);
    const auto r = attach_annotations(docs, dir / "q.jsonl", AnnotationKind::kQuality);
    CHECK(r.attached == 15);
    REQUIRE(r.unannotated.size() == 5);
    for (int i = 0; i < 5; ++i) {
      CHECK(r.unannotated[i] == docs[i].doc_id);
      CHECK_FALSE(docs[i].quality_score.has_value());
    }
  }
  SUBCASE("unknown id is an error unless allowed") {
    auto docs = base.docs;
    auto extra = q;
    extra.push_back({{"id", "ghost"}, {"quality", 3}});
    testing::write_lines(dir / "q.jsonl", extra);
    CHECK_THROWS_WITH_AS(attach_annotations(docs, dir / "q.jsonl", AnnotationKind::kQuality),
                         doctest::Contains("ghost"), Error);
    CHECK_FALSE(docs[0].quality_score.has_value());  // nothing applied on failure
    AnnotationOptions lenient;
    lenient.allow_unknown_ids = true;
    const auto r = attach_annotations(docs, dir / "q.jsonl", AnnotationKind::kQuality, lenient);
    CHECK(r.unknown_ids == std::vector<std::string>{"ghost"});
    CHECK(r.attached == 20);
  }
  SUBCASE("duplicate annotation is an error") {
    auto docs = base.docs;
    auto dup = q;
    dup.push_back(q[3]);
    testing::write_lines(dir / "q.jsonl", dup);
    CHECK_THROWS_WITH_AS(attach_annotations(docs, dir / "q.jsonl", AnnotationKind::kQuality),
                         doctest::Contains(base.docs[3].doc_id.c_str()), Error);
  }
  SUBCASE("out-of-range quality is an error") {
    auto docs = base.docs;
    testing::write_lines(dir / "q.jsonl", {{{"id", docs[0].doc_id}, {"quality", 11}}});
    CHECK_THROWS_WITH_AS(attach_annotations(docs, dir / "q.jsonl", AnnotationKind::kQuality),
                         doctest::Contains("q.jsonl:1"), Error);
  }
}

TEST_CASE("embedding annotations round-trip through the binary format") {
  testing::TempDir dir;
  auto docs = testing::synthetic_corpus(30, 8).docs;
  const auto store = testing::blob_embeddings(30, 12, 3, 0.2, 77);
  // Write the rows in reverse so embedding_ref must come from the sidecar.
  std::vector<std::string> ids;
  std::vector<std::size_t> reversed;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    ids.push_back(docs[docs.size() - 1 - i].doc_id);
    reversed.push_back(docs.size() - 1 - i);
  }
  const auto written = store.select(reversed);
  write_embedding_file(dir / "e.f32", default_sidecar_path(dir / "e.f32"), ids, written);

  const auto r = attach_annotations(docs, dir / "e.f32", AnnotationKind::kEmbedding);
  CHECK(r.attached == 30);
  const auto file = read_embedding_file(dir / "e.f32", default_sidecar_path(dir / "e.f32"));
  CHECK(file.store.rows() == 30);
  CHECK(file.store.dim() == 12);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    REQUIRE(docs[i].embedding_ref.has_value());
    CHECK(*docs[i].embedding_ref == docs.size() - 1 - i);
    const auto got = file.store.row(*docs[i].embedding_ref);
    const auto want = store.row(i);
    for (std::size_t d = 0; d < 12; ++d) CHECK(got[d] == static_cast<double>(static_cast<float>(want[d])));
  }
}

TEST_CASE("diversity annotations") {
  testing::TempDir dir;
  auto docs = testing::synthetic_corpus(3, 1).docs;
  testing::write_lines(dir / "d.jsonl", {{{"id", docs[0].doc_id}, {"diversity", 0.25}},
                                         {{"id", docs[2].doc_id}, {"diversity", 1.5}}});
  const auto r = attach_annotations(docs, dir / "d.jsonl", AnnotationKind::kDiversity);
  CHECK(docs[0].diversity_raw == 0.25);
  CHECK(docs[2].diversity_raw == 1.5);
  CHECK(r.unannotated == std::vector<std::string>{docs[1].doc_id});
  testing::write_lines(dir / "bad.jsonl", {{{"id", docs[0].doc_id}, {"diversity", -1}}});
  CHECK_THROWS_AS(attach_annotations(docs, dir / "bad.jsonl", AnnotationKind::kDiversity), Error);
}
