#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>
#include <string>

#include "tplscan/bundle_io.hpp"
#include "tplscan/corpusgen.hpp"
#include "tplscan/features.hpp"

using namespace tplscan;

namespace {

CorpusSpec small_spec(std::uint64_t seed) {
  CorpusSpec spec;
  spec.seed = seed;
  spec.n_libraries = 5;
  spec.versions_per_library = 4;
  spec.apps = 6;
  spec.libs_per_app_min = 2;
  spec.libs_per_app_max = 4;
  return spec;
}

Hash128 t1_of(const ProgramBundle& lib) {
  std::vector<const ClassDef*> classes;
  for (const auto& c : lib.classes) classes.push_back(&c);
  return module_features(classes).t1;
}

}  // namespace

TEST_CASE("generation is deterministic under a fixed seed") {
  Corpus a = generate_corpus(small_spec(100));
  Corpus b = generate_corpus(small_spec(100));
  REQUIRE(a.libraries.size() == b.libraries.size());
  for (std::size_t i = 0; i < a.libraries.size(); ++i)
    CHECK(write_bundle(a.libraries[i]) == write_bundle(b.libraries[i]));
  REQUIRE(a.apps.size() == b.apps.size());
  for (std::size_t i = 0; i < a.apps.size(); ++i)
    CHECK(write_bundle(a.apps[i]) == write_bundle(b.apps[i]));
  CHECK(a.manifest.size() == b.manifest.size());

  Corpus c = generate_corpus(small_spec(101));
  CHECK(write_bundle(a.libraries[0]) != write_bundle(c.libraries[0]));
}

TEST_CASE("corpus dimensions match the generation parameters") {
  CorpusSpec spec = small_spec(1);
  Corpus corpus = generate_corpus(spec);
  CHECK(corpus.libraries.size() == spec.n_libraries * spec.versions_per_library);
  CHECK(corpus.apps.size() == spec.apps);
  CHECK(corpus.manifest.size() == spec.apps);
  for (const auto& [app_id, truth] : corpus.manifest) {
    CHECK(truth.size() >= spec.libs_per_app_min);
    CHECK(truth.size() <= spec.libs_per_app_max);
    // embedded libraries are pairwise distinct
    std::set<std::pair<std::string, std::string>> libs;
    for (const auto& t : truth) libs.insert({t.group_id, t.artifact_id});
    CHECK(libs.size() == truth.size());
  }
}

TEST_CASE("all bundles validate and version coordinates are unique") {
  Corpus corpus = generate_corpus(small_spec(2));
  std::set<std::string> keys;
  for (const auto& lib : corpus.libraries) {
    CHECK_NOTHROW(validate_bundle(lib));
    std::string key = lib.meta.group_id + ":" + lib.meta.artifact_id + ":" + lib.meta.version;
    CHECK(keys.insert(key).second);
  }
  for (const auto& app : corpus.apps) CHECK_NOTHROW(validate_bundle(app));
}

TEST_CASE("distinct versions of a library have distinct t1") {
  Corpus corpus = generate_corpus(small_spec(3));
  std::map<std::string, std::set<std::string>> t1s;  // lib -> t1 hex set
  std::map<std::string, std::size_t> versions;
  for (const auto& lib : corpus.libraries) {
    std::string name = lib.meta.group_id + ":" + lib.meta.artifact_id;
    t1s[name].insert(t1_of(lib).hex());
    ++versions[name];
  }
  for (const auto& [name, set] : t1s) CHECK(set.size() == versions[name]);
}

TEST_CASE("rate 0 produces identical versions") {
  CorpusSpec spec = small_spec(4);
  spec.inter_version_edit_rate = 0.0;
  spec.add_remove_rate = 0.0;
  Corpus corpus = generate_corpus(spec);
  for (std::size_t lib = 0; lib < spec.n_libraries; ++lib) {
    const ProgramBundle& v0 = corpus.libraries[lib * spec.versions_per_library];
    for (std::size_t v = 1; v < spec.versions_per_library; ++v) {
      const ProgramBundle& vk = corpus.libraries[lib * spec.versions_per_library + v];
      CHECK(vk.classes == v0.classes);  // only the version string differs
      CHECK(vk.meta.version != v0.meta.version);
    }
  }
}

TEST_CASE("manifest is self-consistent with the embedded classes") {
  Corpus corpus = generate_corpus(small_spec(5));
  std::map<std::string, const ProgramBundle*> by_key;
  for (const auto& lib : corpus.libraries)
    by_key[lib.meta.group_id + ":" + lib.meta.artifact_id + ":" + lib.meta.version] = &lib;

  for (const auto& app : corpus.apps) {
    const auto& truth = corpus.manifest.at(app.meta.app_package);
    std::map<std::string, const ClassDef*> app_classes;
    for (const auto& c : app.classes) app_classes[c.class_id] = &c;
    for (const auto& t : truth) {
      const ProgramBundle* lib = by_key.at(t.group_id + ":" + t.artifact_id + ":" + t.version);
      // every library class is embedded verbatim
      for (const auto& cls : lib->classes) {
        auto it = app_classes.find(cls.class_id);
        REQUIRE(it != app_classes.end());
        CHECK(*it->second == cls);
      }
    }
  }
}

TEST_CASE("host classes live under the app namespace") {
  Corpus corpus = generate_corpus(small_spec(6));
  for (const auto& app : corpus.apps) {
    bool found_host = false;
    for (const auto& c : app.classes)
      if (c.package_path.size() >= 2 &&
          "com." + c.package_path[1] == app.meta.app_package) {
        found_host = true;
        break;
      }
    CHECK(found_host);
  }
}
