#pragma once

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "tplscan/corpusgen.hpp"
#include "tplscan/match.hpp"

namespace tplscan {

struct PrCounts {
  std::size_t tp = 0, fp = 0, fn = 0;

  double precision() const { return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp); }
  double recall() const { return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / (tp + fn); }
  double f1() const {
    double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2 * p * r / (p + r);
  }
};

struct EvalResult {
  PrCounts library_level;
  PrCounts version_level;
  std::size_t apps = 0;
};

// Accumulates one app's report against its ground truth.
//
// Version level: every reported (group, artifact, version) is judged
// individually, so a correct library reported as two wrong tied versions
// costs two false positives and one false negative. Library level: the
// library counts as found when any reported version carries its coordinates.
inline void accumulate_eval(EvalResult& acc, const MatchReport& report,
                            const std::vector<GroundTruthEntry>& truth) {
  std::set<std::pair<std::string, std::string>> truth_libs, reported_libs;
  std::set<std::tuple<std::string, std::string, std::string>> truth_versions, reported_versions;
  for (const auto& t : truth) {
    truth_libs.insert({t.group_id, t.artifact_id});
    truth_versions.insert({t.group_id, t.artifact_id, t.version});
  }
  for (const auto& cand : report.candidates)
    for (const auto& w : cand.winners) {
      reported_libs.insert({w.db_key.group_id, w.db_key.artifact_id});
      reported_versions.insert({w.db_key.group_id, w.db_key.artifact_id, w.db_key.version});
    }

  for (const auto& lib : reported_libs)
    truth_libs.contains(lib) ? ++acc.library_level.tp : ++acc.library_level.fp;
  for (const auto& lib : truth_libs)
    if (!reported_libs.contains(lib)) ++acc.library_level.fn;

  for (const auto& v : reported_versions)
    truth_versions.contains(v) ? ++acc.version_level.tp : ++acc.version_level.fp;
  for (const auto& v : truth_versions)
    if (!reported_versions.contains(v)) ++acc.version_level.fn;

  ++acc.apps;
}

}  // namespace tplscan
