#pragma once

#include <string>

#include <json.hpp>

#include "tplscan/match.hpp"
#include "tplscan/store.hpp"
#include "tplscan/vulndb.hpp"

namespace tplscan {

inline constexpr int kReportVersion = 1;

inline nlohmann::json match_detail_json(const MatchDetail& d) {
  return {
      {"group_id", d.db_key.group_id},
      {"artifact_id", d.db_key.artifact_id},
      {"version", d.db_key.version},
      {"tss", d.tss},
      {"matched_exact", d.matched_exact},
      {"matched_fuzzy", d.matched_fuzzy},
      {"matched_total", d.matched_total},
      {"db_method_count", d.db_method_count},
  };
}

// Scan report. Wall-clock data lives exclusively under "timing" so reports
// can be compared for determinism with that one field dropped.
inline nlohmann::json report_json(const MatchReport& report,
                                  const std::vector<Finding>* findings = nullptr) {
  nlohmann::json out;
  out["report_version"] = kReportVersion;
  out["app"] = report.app_id;
  out["config"] = {
      {"theta", report.config.theta},
      {"delta", report.config.delta},
      {"coarse_overlap", report.config.coarse_overlap},
      {"class_ratio", report.config.class_ratio},
  };
  out["candidates"] = nlohmann::json::array();
  for (const auto& cand : report.candidates) {
    nlohmann::json c;
    c["candidate_id"] = cand.candidate_id;
    c["class_count"] = cand.class_count;
    c["method_count"] = cand.method_count;
    c["outcome"] = to_string(cand.outcome);
    c["ambiguous"] = cand.ambiguous;
    c["winners"] = nlohmann::json::array();
    for (const auto& w : cand.winners) c["winners"].push_back(match_detail_json(w));
    out["candidates"].push_back(std::move(c));
  }
  if (findings) {
    out["findings"] = nlohmann::json::array();
    for (const auto& f : *findings)
      out["findings"].push_back({
          {"library",
           {{"group_id", f.library.group_id},
            {"artifact_id", f.library.artifact_id},
            {"version", f.library.version}}},
          {"vuln_id", f.vuln_id},
          {"severity", to_string(f.severity)},
          {"cvss", f.cvss},
          {"tied_versions_note", f.tied_versions_note},
      });
  }
  out["timing"] = {
      {"decouple_ms", report.timings.decouple_ms},
      {"match_ms", report.timings.match_ms},
  };
  return out;
}

// The report minus its timing field; equal inputs must produce equal values.
inline nlohmann::json report_determinism_view(nlohmann::json report) {
  report.erase("timing");
  return report;
}

inline std::string export_jsonl(const SignatureDb& db) {
  std::string out;
  for (const auto& [key, rec] : db.records()) {
    nlohmann::json j;
    j["group_id"] = key.group_id;
    j["artifact_id"] = key.artifact_id;
    j["version"] = key.version;
    j["t1"] = rec.features.t1.hex();
    j["class_count"] = rec.features.class_count;
    j["method_count"] = rec.features.method_count();
    j["package_roots"] = rec.features.package_roots;
    j["source_bundle_digest"] = rec.source_bundle_digest.hex();
    nlohmann::json methods = nlohmann::json::array();
    for (const auto& [hash, entries] : rec.features.fine_map)
      for (const auto& e : entries)
        methods.push_back({
            {"class_id", e.ref.class_id},
            {"method_id", e.ref.method_id},
            {"coarse", hash.hex()},
            {"fine", e.digest.to_string()},
        });
    j["methods"] = std::move(methods);
    out += j.dump();
    out += "\n";
  }
  return out;
}

}  // namespace tplscan
