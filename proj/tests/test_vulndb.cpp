#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "tplscan/vulndb.hpp"

using namespace tplscan;

namespace {

std::string line(const std::string& vuln_id, const std::string& group, const std::string& artifact,
                 const std::string& versions, double cvss) {
  return "{\"vuln_id\":\"" + vuln_id + "\",\"source\":\"cve\",\"group_id\":\"" + group +
         "\",\"artifact_id\":\"" + artifact + "\",\"affected_versions\":[" + versions +
         "],\"cvss\":" + std::to_string(cvss) + ",\"description\":\"d\"}\n";
}

}  // namespace

TEST_CASE("severity bands match at every boundary") {
  CHECK(severity_from_cvss(0.1) == Severity::low);
  CHECK(severity_from_cvss(3.9) == Severity::low);
  CHECK(severity_from_cvss(4.0) == Severity::medium);
  CHECK(severity_from_cvss(6.9) == Severity::medium);
  CHECK(severity_from_cvss(7.0) == Severity::high);
  CHECK(severity_from_cvss(8.9) == Severity::high);
  CHECK(severity_from_cvss(9.0) == Severity::critical);
  CHECK(severity_from_cvss(9.8) == Severity::critical);
  CHECK(severity_from_cvss(10.0) == Severity::critical);
  CHECK_THROWS_AS(severity_from_cvss(0.0), VulnError);
  CHECK_THROWS_AS(severity_from_cvss(0.04), VulnError);
  CHECK_THROWS_AS(severity_from_cvss(10.1), VulnError);
  CHECK_THROWS_AS(severity_from_cvss(-1.0), VulnError);
}

TEST_CASE("import parses records and derives severity") {
  VulnDb db = vuln_import(line("CVE-2020-1", "g", "a", "\"1.0\",\"1.1\"", 9.8));
  REQUIRE(db.records().size() == 1);
  const VulnRecord& rec = db.records()[0];
  CHECK(rec.vuln_id == "CVE-2020-1");
  CHECK(rec.severity == Severity::critical);
  CHECK(rec.affected_versions == std::vector<std::string>{"1.0", "1.1"});
}

TEST_CASE("duplicate vuln ids with same coordinates merge version lists") {
  VulnDb db = vuln_import(line("CVE-1", "g", "a", "\"1.0\",\"1.2\"", 5.0) +
                          line("CVE-1", "g", "a", "\"1.1\",\"1.2\"", 5.0));
  REQUIRE(db.records().size() == 1);
  CHECK(db.records()[0].affected_versions == std::vector<std::string>{"1.0", "1.1", "1.2"});
}

TEST_CASE("import errors carry line numbers") {
  auto check_error = [](const std::string& doc, const std::string& needle) {
    try {
      vuln_import(doc);
      FAIL("expected VulnError for: " << doc);
    } catch (const VulnError& e) {
      std::string what = e.what();
      INFO(what);
      CHECK(what.find("line") != std::string::npos);
      CHECK(what.find(needle) != std::string::npos);
    }
  };
  check_error("not json\n", "invalid JSON");
  check_error("{\"vuln_id\":\"V\"}\n", "missing field");
  check_error(line("V", "g", "a", "\"1.0\"", 0.0), "out of range");
  check_error(line("V", "g", "a", "\"1.0\"", 11.0), "out of range");
  check_error(line("V", "g", "a", "", 5.0), "non-empty");
  check_error("{\"vuln_id\":\"V\",\"source\":\"blog\",\"group_id\":\"g\",\"artifact_id\":\"a\","
              "\"affected_versions\":[\"1\"],\"cvss\":5}\n",
              "source");
  // second line is the bad one
  check_error(line("V", "g", "a", "\"1.0\"", 5.0) + "broken\n", "line 2");
}

TEST_CASE("blank lines are skipped") {
  VulnDb db = vuln_import("\n" + line("V", "g", "a", "\"1.0\"", 5.0) + "\n  \n");
  CHECK(db.records().size() == 1);
}

TEST_CASE("lookup matches coordinates and affected version") {
  VulnDb db = vuln_import(line("CVE-1", "g", "a", "\"1.0\",\"1.1\"", 7.5) +
                          line("CVE-2", "g", "b", "\"1.0\"", 3.0));
  CHECK(db.lookup({"g", "a", "1.0"}).size() == 1);
  CHECK(db.lookup({"g", "a", "1.2"}).empty());   // patched version
  CHECK(db.lookup({"g", "zzz", "1.0"}).empty()); // unknown artifact
  CHECK(db.lookup({"other", "a", "1.0"}).empty());
}

TEST_CASE("annotate joins winners against the vulnerability records") {
  VulnDb db = vuln_import(line("CVE-1", "g", "a", "\"2.0\"", 8.0));

  MatchReport report;
  report.app_id = "com.demo";
  CandidateResult cand;
  cand.candidate_id = "C";
  cand.outcome = StageOutcome::version_matched;
  MatchDetail d;
  d.db_key = {"g", "a", "2.0"};
  d.tss = 1.0;
  cand.winners.push_back(d);
  report.candidates.push_back(cand);

  auto findings = annotate(report, db);
  REQUIRE(findings.size() == 1);
  CHECK(findings[0].app_id == "com.demo");
  CHECK(findings[0].vuln_id == "CVE-1");
  CHECK(findings[0].severity == Severity::high);
  CHECK_FALSE(findings[0].tied_versions_note);

  // clean app: no winners, no findings
  MatchReport clean;
  clean.app_id = "com.clean";
  CHECK(annotate(clean, db).empty());
}

TEST_CASE("tied winners produce a conservative union with a note") {
  VulnDb db = vuln_import(line("CVE-1", "g", "a", "\"2.0\"", 8.0));

  MatchReport report;
  report.app_id = "com.demo";
  CandidateResult cand;
  cand.candidate_id = "C";
  cand.outcome = StageOutcome::version_matched;
  cand.ambiguous = true;
  for (const char* v : {"2.0", "2.3"}) {
    MatchDetail d;
    d.db_key = {"g", "a", v};
    d.tss = 1.0;
    cand.winners.push_back(d);
  }
  report.candidates.push_back(cand);

  auto findings = annotate(report, db);
  REQUIRE(findings.size() == 1);  // only 2.0 is vulnerable
  CHECK(findings[0].library.version == "2.0");
  CHECK(findings[0].tied_versions_note);
}

TEST_CASE("annotate is monotone in the vulnerability set") {
  MatchReport report;
  report.app_id = "com.demo";
  CandidateResult cand;
  MatchDetail d;
  d.db_key = {"g", "a", "1.0"};
  cand.winners.push_back(d);
  report.candidates.push_back(cand);

  VulnDb small = vuln_import(line("CVE-1", "g", "a", "\"1.0\"", 5.0));
  VulnDb big = vuln_import(line("CVE-1", "g", "a", "\"1.0\"", 5.0) +
                           line("CVE-2", "g", "a", "\"1.0\"", 9.0));
  auto f_small = annotate(report, small);
  auto f_big = annotate(report, big);
  CHECK(f_big.size() >= f_small.size());
  for (const auto& f : f_small) {
    bool present = false;
    for (const auto& g : f_big)
      if (g.vuln_id == f.vuln_id) present = true;
    CHECK(present);
  }
}
