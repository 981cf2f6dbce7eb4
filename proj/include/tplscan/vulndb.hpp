#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tplscan/match.hpp"

namespace tplscan {

enum class Severity { low, medium, high, critical };

inline const char* to_string(Severity s) {
  switch (s) {
    case Severity::low: return "low";
    case Severity::medium: return "medium";
    case Severity::high: return "high";
    case Severity::critical: return "critical";
  }
  return "?";
}

enum class VulnSource { cve, security_bug };

class VulnError : public std::runtime_error {
public:
  explicit VulnError(const std::string& what) : std::runtime_error(what) {}
};

// CVSS v3.0 bands: low [0.1,3.9], medium [4.0,6.9], high [7.0,8.9],
// critical [9.0,10.0]. Scores below 0.1 or above 10 are rejected.
inline Severity severity_from_cvss(double cvss) {
  long tenths = std::lround(cvss * 10.0);
  if (tenths < 1 || tenths > 100) throw VulnError("cvss score out of range: " + std::to_string(cvss));
  if (tenths <= 39) return Severity::low;
  if (tenths <= 69) return Severity::medium;
  if (tenths <= 89) return Severity::high;
  return Severity::critical;
}

struct VulnRecord {
  std::string vuln_id;
  VulnSource source = VulnSource::cve;
  std::string group_id;
  std::string artifact_id;
  std::vector<std::string> affected_versions;  // explicit list, sorted unique
  double cvss = 0.0;
  Severity severity = Severity::low;
  std::string description;
};

class VulnDb {
public:
  const std::vector<VulnRecord>& records() const { return records_; }

  void add(VulnRecord rec) {
    // same vuln_id + coordinates: merge the affected version lists
    for (auto& existing : records_) {
      if (existing.vuln_id == rec.vuln_id && existing.group_id == rec.group_id &&
          existing.artifact_id == rec.artifact_id) {
        existing.affected_versions.insert(existing.affected_versions.end(),
                                          rec.affected_versions.begin(),
                                          rec.affected_versions.end());
        std::sort(existing.affected_versions.begin(), existing.affected_versions.end());
        existing.affected_versions.erase(
            std::unique(existing.affected_versions.begin(), existing.affected_versions.end()),
            existing.affected_versions.end());
        return;
      }
    }
    std::sort(rec.affected_versions.begin(), rec.affected_versions.end());
    rec.affected_versions.erase(std::unique(rec.affected_versions.begin(), rec.affected_versions.end()),
                                rec.affected_versions.end());
    records_.push_back(std::move(rec));
  }

  std::vector<const VulnRecord*> lookup(const LibraryKey& key) const {
    std::vector<const VulnRecord*> out;
    for (const auto& rec : records_)
      if (rec.group_id == key.group_id && rec.artifact_id == key.artifact_id &&
          std::binary_search(rec.affected_versions.begin(), rec.affected_versions.end(),
                             key.version))
        out.push_back(&rec);
    return out;
  }

private:
  std::vector<VulnRecord> records_;
};

// One JSON object per line:
// {"vuln_id","source","group_id","artifact_id","affected_versions":[...],"cvss","description"}
inline VulnDb vuln_import(const std::string& jsonl) {
  VulnDb db;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string::npos) end = jsonl.size();
    std::string line = jsonl.substr(start, end - start);
    std::size_t next = end + 1;
    ++line_no;
    start = next;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw VulnError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    auto require = [&](const char* field) -> const nlohmann::json& {
      if (!j.contains(field))
        throw VulnError("line " + std::to_string(line_no) + ": missing field '" + field + "'");
      return j.at(field);
    };
    VulnRecord rec;
    try {
      rec.vuln_id = require("vuln_id").get<std::string>();
      std::string source = require("source").get<std::string>();
      if (source == "cve") rec.source = VulnSource::cve;
      else if (source == "security_bug") rec.source = VulnSource::security_bug;
      else throw VulnError("line " + std::to_string(line_no) + ": source must be cve or security_bug");
      rec.group_id = require("group_id").get<std::string>();
      rec.artifact_id = require("artifact_id").get<std::string>();
      rec.affected_versions = require("affected_versions").get<std::vector<std::string>>();
      rec.cvss = require("cvss").get<double>();
      if (j.contains("description")) rec.description = j.at("description").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw VulnError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (rec.affected_versions.empty())
      throw VulnError("line " + std::to_string(line_no) + ": affected_versions must be non-empty");
    try {
      rec.severity = severity_from_cvss(rec.cvss);
    } catch (const VulnError& e) {
      throw VulnError("line " + std::to_string(line_no) + ": " + e.what());
    }
    db.add(std::move(rec));
  }
  return db;
}

struct Finding {
  std::string app_id;
  LibraryKey library;
  std::string vuln_id;
  Severity severity = Severity::low;
  double cvss = 0.0;
  bool tied_versions_note = false;
};

// Joins a match report against the vulnerability records, taking the union
// over all tied winner versions.
inline std::vector<Finding> annotate(const MatchReport& report, const VulnDb& vulndb) {
  std::vector<Finding> findings;
  for (const auto& cand : report.candidates) {
    for (const auto& winner : cand.winners) {
      for (const auto* rec : vulndb.lookup(winner.db_key)) {
        Finding f;
        f.app_id = report.app_id;
        f.library = winner.db_key;
        f.vuln_id = rec->vuln_id;
        f.severity = rec->severity;
        f.cvss = rec->cvss;
        f.tied_versions_note = cand.ambiguous;
        findings.push_back(std::move(f));
      }
    }
  }
  return findings;
}

}  // namespace tplscan
