#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "tplscan/corpusgen.hpp"
#include "tplscan/rng.hpp"
#include "tplscan/store.hpp"

using namespace tplscan;

namespace {

LibraryRecord make_record(const std::string& group, const std::string& artifact,
                          const std::string& version, std::uint64_t seed) {
  Rng rng(seed);
  LibraryRecord rec;
  rec.key = {group, artifact, version};
  rec.source_bundle_digest = Hash128::of("src:" + rec.key.to_string());
  rec.features.class_count = 1 + rng.below(20);
  std::size_t methods = 1 + rng.below(30);
  for (std::size_t i = 0; i < methods; ++i) {
    Hash128 coarse = Hash128::of("coarse:" + std::to_string(seed) + ":" + std::to_string(i));
    rec.features.coarse_set.push_back(coarse);
    FineEntry e;
    e.ref = {"C" + std::to_string(i % 5), "m" + std::to_string(i)};
    e.digest = {3 << (i % 3), "digest" + std::to_string(i), "dd" + std::to_string(i)};
    rec.features.fine_map[coarse].push_back(std::move(e));
  }
  std::sort(rec.features.coarse_set.begin(), rec.features.coarse_set.end());
  rec.features.t1 = t1_hash(rec.features.coarse_set);
  rec.features.package_roots = {"com/" + artifact};
  return rec;
}

}  // namespace

TEST_CASE("add and find records") {
  SignatureDb db;
  db.add_record(make_record("g", "a", "1.0", 1));
  db.add_record(make_record("g", "a", "2.0", 2));
  CHECK(db.size() == 2);
  REQUIRE(db.find({"g", "a", "1.0"}) != nullptr);
  CHECK(db.find({"g", "a", "1.0"})->key.version == "1.0");
  CHECK(db.find({"g", "a", "9.9"}) == nullptr);
}

TEST_CASE("duplicate coordinates are rejected with context") {
  SignatureDb db;
  db.add_record(make_record("g", "a", "1.0", 1));
  try {
    db.add_record(make_record("g", "a", "1.0", 99));
    FAIL("expected DbError");
  } catch (const DbError& e) {
    CHECK(std::string(e.what()).find("g:a:1.0") != std::string::npos);
    CHECK(std::string(e.what()).find("existing") != std::string::npos);
  }
}

TEST_CASE("t1 and package indexes answer queries") {
  SignatureDb db;
  auto rec = make_record("g", "a", "1.0", 1);
  Hash128 t1 = rec.features.t1;
  db.add_record(rec);
  db.add_record(make_record("g", "b", "1.0", 2));

  auto hits = db.query_t1(t1);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0] == LibraryKey{"g", "a", "1.0"});
  CHECK(db.query_t1(Hash128::of("nothing")).empty());

  auto pkg_hits = db.query_pkg("com/a");
  REQUIRE(pkg_hits.size() == 1);
  CHECK(pkg_hits[0] == LibraryKey{"g", "a", "1.0"});
  CHECK(db.query_pkg("org/none").empty());
}

TEST_CASE("index lookups are independent of insertion order") {
  std::vector<LibraryRecord> records;
  for (std::uint64_t i = 0; i < 20; ++i)
    records.push_back(make_record("g", "art" + std::to_string(i % 4), "v" + std::to_string(i), i));

  SignatureDb forward, backward;
  for (const auto& r : records) forward.add_record(r);
  for (auto it = records.rbegin(); it != records.rend(); ++it) backward.add_record(*it);
  CHECK(forward == backward);
  for (const auto& r : records) {
    CHECK(forward.query_t1(r.features.t1) == backward.query_t1(r.features.t1));
    for (const auto& root : r.features.package_roots)
      CHECK(forward.query_pkg(root) == backward.query_pkg(root));
  }
}

TEST_CASE("serialize/deserialize round-trips") {
  SignatureDb db;
  for (std::uint64_t i = 0; i < 50; ++i)
    db.add_record(make_record("g" + std::to_string(i % 7), "a", "v" + std::to_string(i), i));
  std::string blob = db.serialize();
  SignatureDb copy = SignatureDb::deserialize(blob);
  CHECK(copy == db);
  CHECK(copy.serialize() == blob);
}

TEST_CASE("save/load via file") {
  SignatureDb db;
  db.add_record(make_record("g", "a", "1.0", 5));
  std::string path = "test_store_tmp.sigdb";
  db.save(path);
  SignatureDb loaded = SignatureDb::load(path);
  CHECK(loaded == db);
  std::remove(path.c_str());
}

TEST_CASE("large database round-trips") {
  SignatureDb db;
  for (std::uint64_t i = 0; i < 1000; ++i)
    db.add_record(make_record("g" + std::to_string(i / 10), "a" + std::to_string(i % 10),
                              "v" + std::to_string(i), i));
  CHECK(db.size() == 1000);
  SignatureDb copy = SignatureDb::deserialize(db.serialize());
  CHECK(copy == db);
}

TEST_CASE("corrupt inputs are rejected") {
  SignatureDb db;
  db.add_record(make_record("g", "a", "1.0", 1));
  std::string blob = db.serialize();

  SECTION("bad magic") {
    std::string bad = blob;
    bad[0] = 'X';
    CHECK_THROWS_AS(SignatureDb::deserialize(bad), DbError);
  }
  SECTION("unsupported format version") {
    std::string bad = blob;
    bad[6] = 99;
    CHECK_THROWS_AS(SignatureDb::deserialize(bad), DbError);
  }
  SECTION("truncation at every prefix length") {
    for (std::size_t len : {std::size_t{0}, std::size_t{3}, std::size_t{10}, blob.size() / 2,
                            blob.size() - 1})
      CHECK_THROWS_AS(SignatureDb::deserialize(blob.substr(0, len)), DbError);
  }
  SECTION("trailing bytes") {
    CHECK_THROWS_AS(SignatureDb::deserialize(blob + "x"), DbError);
  }
}

TEST_CASE("add_library extracts the host candidate of a library bundle") {
  CorpusSpec spec;
  spec.seed = 11;
  spec.n_libraries = 1;
  spec.versions_per_library = 2;
  spec.apps = 0;
  Corpus corpus = generate_corpus(spec);

  SignatureDb db;
  for (const auto& lib : corpus.libraries) {
    auto warnings = db.add_library(lib);
    CHECK(warnings.empty());
  }
  CHECK(db.size() == 2);
  const LibraryRecord* rec =
      db.find({corpus.libraries[0].meta.group_id, corpus.libraries[0].meta.artifact_id,
               corpus.libraries[0].meta.version});
  REQUIRE(rec != nullptr);
  std::size_t methods = 0;
  for (const auto& cls : corpus.libraries[0].classes) methods += cls.methods.size();
  CHECK(rec->features.method_count() == methods);

  ProgramBundle app;
  app.kind = BundleKind::app;
  app.meta.app_package = "com.x";
  CHECK_THROWS_AS(db.add_library(app), DbError);
}
