#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "tplscan/bundle_io.hpp"
#include "tplscan/corpusgen.hpp"
#include "tplscan/mutate.hpp"

using namespace tplscan;

namespace {

const char* kMinimalApp =
    "@meta kind=app\n"
    "@meta app_package=com.demo\n"
    "@class C1 pkg=com/util\n"
    "@method run entry=0\n"
    "@block 0:\n"
    "push\n"
    "add\n"
    "ret\n";

const char* kLibraryHeader =
    "@meta kind=library\n"
    "@meta group_id=com.squareup\n"
    "@meta artifact_id=okio\n"
    "@meta version=2.4.3\n"
    "@meta packaging=skinny\n";

}  // namespace

TEST_CASE("minimal app bundle parses") {
  ProgramBundle b = parse_bundle(kMinimalApp);
  CHECK(b.kind == BundleKind::app);
  CHECK(b.meta.app_package == "com.demo");
  REQUIRE(b.classes.size() == 1);
  CHECK(b.classes[0].class_id == "C1");
  CHECK(b.classes[0].package_path == std::vector<std::string>{"com", "util"});
  REQUIRE(b.classes[0].methods.size() == 1);
  const MethodDef& m = b.classes[0].methods[0];
  CHECK(m.method_id == "run");
  REQUIRE(m.blocks.size() == 1);
  CHECK(m.blocks[0].opcodes == std::vector<std::uint8_t>{1, 16, 43});  // push add ret
  CHECK(b.dependency_edges.empty());
}

TEST_CASE("library bundle with cfg edges and deps parses") {
  std::string text = std::string(kLibraryHeader) +
      "@class A pkg=com/squareup/okio\n"
      "@method f entry=0\n"
      "@block 0:\n"
      "push\n"
      "@block 1:\n"
      "ret\n"
      "@edge 0 1\n"
      "@class B pkg=com/squareup/okio\n"
      "@method g entry=0\n"
      "@block 0:\n"
      "@dep A B method_call\n"
      "@dep B A inheritance\n";
  ProgramBundle b = parse_bundle(text);
  CHECK(b.kind == BundleKind::library);
  CHECK(b.meta.group_id == "com.squareup");
  REQUIRE(b.classes.size() == 2);
  CHECK(b.classes[0].methods[0].edges == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});
  REQUIRE(b.dependency_edges.size() == 2);
  CHECK(b.dependency_edges[0].kind == EdgeKind::method_call);
  CHECK(b.dependency_edges[1].kind == EdgeKind::inheritance);
}

TEST_CASE("comments, blank lines and CRLF are tolerated") {
  std::string text =
      "# header comment\r\n"
      "@meta kind=app\r\n"
      "\r\n"
      "@meta app_package=com.demo  # trailing comment\n"
      "@class C pkg=x/y\n"
      "@method m entry=0\n"
      "@block 0:\n"
      "push  # still an opcode line\n";
  ProgramBundle b = parse_bundle(text);
  CHECK(b.meta.app_package == "com.demo");
  CHECK(b.classes[0].methods[0].blocks[0].opcodes == std::vector<std::uint8_t>{1});
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse_bundle("@meta kind=app\n@meta app_package=a\n@bogus x\n");
    FAIL("expected BundleError");
  } catch (const BundleError& e) {
    CHECK(e.kind() == BundleError::Kind::syntax);
    CHECK(e.line() == 3);
    CHECK(e.column() >= 1);
  }
}

TEST_CASE("unknown mnemonic is rejected") {
  std::string text =
      "@meta kind=app\n@meta app_package=a\n@class C pkg=x\n@method m entry=0\n@block 0:\nfrobnicate\n";
  CHECK_THROWS_MATCHES(parse_bundle(text), BundleError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("frobnicate")));
}

TEST_CASE("missing library version is a semantic error naming the field") {
  std::string text =
      "@meta kind=library\n@meta group_id=g\n@meta artifact_id=a\n";
  try {
    parse_bundle(text);
    FAIL("expected BundleError");
  } catch (const BundleError& e) {
    CHECK(e.kind() == BundleError::Kind::semantic);
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }
}

TEST_CASE("dangling dependency edge names the missing class") {
  std::string text =
      "@meta kind=app\n@meta app_package=a\n@class C1 pkg=x\n@method m entry=0\n@block 0:\n"
      "@dep C1 C2 inheritance\n";
  try {
    parse_bundle(text);
    FAIL("expected BundleError");
  } catch (const BundleError& e) {
    CHECK(e.kind() == BundleError::Kind::semantic);
    CHECK(e.entity().find("C2") != std::string::npos);
  }
}

TEST_CASE("error corpus: every malformed document is rejected with a location") {
  const char* corpus[] = {
      "",                                                        // no kind
      "@meta kind=widget\n",                                     // bad kind value
      "@meta kind=app\n",                                        // missing app_package
      "@meta kind=app\n@meta app_package=a\n@meta color=red\n",  // unknown key
      "@meta kind=app\n@meta app_package=a\n@method m entry=0\n",        // method outside class
      "@meta kind=app\n@meta app_package=a\n@class C pkg=x\n@block 0:\n",  // block outside method
      "@meta kind=app\n@meta app_package=a\n@class C pkg=x\npush\n",       // opcode outside block
      "@meta kind=app\n@meta app_package=a\n@class C pkg=x\n"
      "@method m entry=0\n@block 1:\n",                          // out-of-sequence block
      "@meta kind=app\n@meta app_package=a\n@class C pkg=x\n"
      "@method m entry=5\n@block 0:\n",                          // entry out of range
      "@meta kind=app\n@meta app_package=a\n@class C pkg=x\n"
      "@method m entry=0\n@block 0:\n@edge 0 7\n",               // edge endpoint out of range
      "@meta kind=app\n@meta app_package=a\n@class C pkg=x\n@class C pkg=y\n",  // dup class
      "@meta kind=app\n@meta app_package=a\n@class C pkg=x\n"
      "@method m entry=0\n@block 0:\n@method m entry=0\n@block 0:\n",  // dup method
      "@meta kind=app\n@meta app_package=a\n@class C pkg=x\n@method m\n",  // missing entry=
      "@meta kind=library\n@meta group_id=g\n@meta artifact_id=a\n@meta version=1\n"
      "@meta packaging=fat\n@meta dep=g:a:1:\n",                 // fat dep without root
      "@meta kind=app\n@meta app_package=a\n@class C pkg=x\n"
      "@method m entry=0\n@block 0:\npush extra\n",              // trailing content
      "@meta kind=app\n@meta app_package=a\n@class C pkg=x\n@dep C D banana\n",  // bad edge kind
  };
  for (const char* doc : corpus) {
    INFO(doc);
    CHECK_THROWS_AS(parse_bundle(doc), BundleError);
  }
}

TEST_CASE("round-trip: minimal and empty-class-list bundles") {
  ProgramBundle app = parse_bundle(kMinimalApp);
  CHECK(parse_bundle(write_bundle(app)) == app);

  ProgramBundle lib = parse_bundle(kLibraryHeader);
  CHECK(lib.classes.empty());
  CHECK(parse_bundle(write_bundle(lib)) == lib);
}

TEST_CASE("round-trip: fat library with declared deps") {
  std::string text = std::string(kLibraryHeader);
  text.replace(text.find("skinny"), 6, "fat");
  text +=
      "@meta dep=io.netty:netty:4.1.0:io/netty\n"
      "@class H pkg=com/squareup/okio\n"
      "@method m entry=0\n@block 0:\npush\n"
      "@class N pkg=io/netty/buf\n"
      "@method m entry=0\n@block 0:\npop\n";
  ProgramBundle b = parse_bundle(text);
  CHECK(b.meta.packaging == Packaging::fat);
  REQUIRE(b.meta.declared_deps.size() == 1);
  CHECK(b.meta.declared_deps[0].root_package == "io/netty");
  CHECK(parse_bundle(write_bundle(b)) == b);
}

TEST_CASE("round-trip property over generated and mutated bundles") {
  CorpusSpec spec;
  spec.seed = 42;
  spec.n_libraries = 3;
  spec.versions_per_library = 2;
  spec.apps = 2;
  Corpus corpus = generate_corpus(spec);
  for (const auto& lib : corpus.libraries) CHECK(parse_bundle(write_bundle(lib)) == lib);
  for (const auto& app : corpus.apps) CHECK(parse_bundle(write_bundle(app)) == app);

  MutationSpec mspec;
  mspec.seed = 7;
  mspec.ops = {{MutOpKind::rename, 0.0}, {MutOpKind::junk, 0.05}, {MutOpKind::cfr, 0.1}};
  ProgramBundle mutated = mutate(corpus.libraries[0], mspec).bundle;
  CHECK(parse_bundle(write_bundle(mutated)) == mutated);
}

TEST_CASE("serialization is deterministic") {
  ProgramBundle b = parse_bundle(kMinimalApp);
  CHECK(write_bundle(b) == write_bundle(b));
}
