#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tplscan/decouple.hpp"
#include "tplscan/features.hpp"
#include "tplscan/store.hpp"

namespace tplscan {

enum class StageOutcome { t1_exact, coarse_full, version_matched, unmatched };

inline const char* to_string(StageOutcome o) {
  switch (o) {
    case StageOutcome::t1_exact: return "t1_exact";
    case StageOutcome::coarse_full: return "coarse_full";
    case StageOutcome::version_matched: return "version_matched";
    case StageOutcome::unmatched: return "unmatched";
  }
  return "?";
}

struct MatchDetail {
  LibraryKey db_key;
  double tss = 0.0;
  std::size_t matched_exact = 0;
  std::size_t matched_fuzzy = 0;
  std::size_t db_method_count = 0;
  std::size_t matched_total = 0;
};

struct CandidateResult {
  std::string candidate_id;
  std::size_t class_count = 0;
  std::size_t method_count = 0;
  StageOutcome outcome = StageOutcome::unmatched;
  bool ambiguous = false;
  std::vector<MatchDetail> winners;  // all argmax ties, sorted by db key
};

struct StageTimings {
  double decouple_ms = 0.0;
  double features_ms = 0.0;
  double match_ms = 0.0;
};

struct MatchReport {
  std::string app_id;
  std::vector<CandidateResult> candidates;
  MatcherConfig config;
  StageTimings timings;
};

// Package-name obfuscation heuristic: single-letter segments or long hex
// blobs carry no usable namespace information.
inline bool is_obfuscated_pkg(const std::string& root) {
  std::size_t start = 0;
  while (start <= root.size()) {
    std::size_t end = root.find('/', start);
    if (end == std::string::npos) end = root.size();
    std::string_view seg(root.data() + start, end - start);
    if (seg.size() == 1) return true;
    if (seg.size() >= 16) {
      bool hex = true;
      for (char c : seg)
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'))) {
          hex = false;
          break;
        }
      if (hex) return true;
    }
    start = end + 1;
  }
  return false;
}

// Class-count prefilter: keep iff min/max >= class_ratio.
inline bool filter_class_count(std::size_t candidate_classes, std::size_t record_classes,
                               const MatcherConfig& config) {
  if (candidate_classes == 0 || record_classes == 0) return candidate_classes == record_classes;
  double lo = static_cast<double>(std::min(candidate_classes, record_classes));
  double hi = static_cast<double>(std::max(candidate_classes, record_classes));
  return lo / hi >= config.class_ratio;
}

// Multiset containment of the record's coarse features in the candidate's:
// |cand ∩ db| / |db|.
inline double coarse_containment(const std::vector<Hash128>& candidate_sorted,
                                 const std::vector<Hash128>& record_sorted) {
  if (record_sorted.empty()) return 0.0;
  std::size_t matched = 0;
  std::size_t i = 0, j = 0;
  while (i < candidate_sorted.size() && j < record_sorted.size()) {
    if (candidate_sorted[i] < record_sorted[j]) ++i;
    else if (record_sorted[j] < candidate_sorted[i]) ++j;
    else { ++matched; ++i; ++j; }
  }
  return static_cast<double>(matched) / static_cast<double>(record_sorted.size());
}

struct CoarseStageResult {
  enum class Kind { t1_hit, full_hit, potential, none } kind = Kind::none;
  std::vector<LibraryKey> keys;
};

// Stage one: exact T1 lookup, then coarse containment over the surviving
// records. A full containment hit stops the search; records at or above the
// overlap threshold go on to the version stage.
inline CoarseStageResult coarse_stage(const ModuleFeatures& candidate,
                                      const std::vector<LibraryKey>& keyset,
                                      const SignatureDb& db, const MatcherConfig& config) {
  CoarseStageResult result;
  auto t1_keys = db.query_t1(candidate.t1);
  if (!t1_keys.empty()) {
    std::vector<LibraryKey> hits;
    for (const auto& k : t1_keys)
      if (std::binary_search(keyset.begin(), keyset.end(), k)) hits.push_back(k);
    if (!hits.empty()) {
      result.kind = CoarseStageResult::Kind::t1_hit;
      result.keys = std::move(hits);
      return result;
    }
  }
  for (const auto& key : keyset) {
    const LibraryRecord* rec = db.find(key);
    if (!rec) continue;
    double containment = coarse_containment(candidate.coarse_set, rec->features.coarse_set);
    if (containment >= 1.0) {
      result.kind = CoarseStageResult::Kind::full_hit;
      result.keys = {key};
      return result;
    }
    if (containment >= config.coarse_overlap) result.keys.push_back(key);
  }
  if (!result.keys.empty()) result.kind = CoarseStageResult::Kind::potential;
  return result;
}

namespace detail {

// Matched-method accounting against one record: coarse-identical methods are
// pre-paired; the residue is paired greedily by descending MSS with each db
// method consumed once.
inline std::optional<MatchDetail> score_record(const ModuleFeatures& candidate,
                                               const LibraryRecord& record,
                                               const MatcherConfig& config) {
  MatchDetail detail;
  detail.db_key = record.key;
  detail.db_method_count = record.features.method_count();
  if (detail.db_method_count == 0) return std::nullopt;

  std::vector<const FineEntry*> cand_residue, db_residue;
  for (const auto& [hash, cand_entries] : candidate.fine_map) {
    auto it = record.features.fine_map.find(hash);
    std::size_t db_count = it == record.features.fine_map.end() ? 0 : it->second.size();
    std::size_t paired = std::min(cand_entries.size(), db_count);
    detail.matched_exact += paired;
    for (std::size_t i = paired; i < cand_entries.size(); ++i)
      cand_residue.push_back(&cand_entries[i]);
    if (it != record.features.fine_map.end())
      for (std::size_t i = paired; i < it->second.size(); ++i) db_residue.push_back(&it->second[i]);
  }
  for (const auto& [hash, db_entries] : record.features.fine_map)
    if (!candidate.fine_map.contains(hash))
      for (const auto& e : db_entries) db_residue.push_back(&e);

  // at least one exactly matched method, or the record is not comparable
  if (detail.matched_exact == 0) return std::nullopt;

  struct Pair {
    double score;
    const FineEntry* cand;
    const FineEntry* db;
  };
  std::vector<Pair> pairs;
  pairs.reserve(cand_residue.size() * db_residue.size());
  for (const auto* c : cand_residue)
    for (const auto* d : db_residue) {
      double s = mss(c->digest, d->digest);
      if (s >= config.theta) pairs.push_back({s, c, d});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.cand->ref != b.cand->ref) return a.cand->ref < b.cand->ref;
    return a.db->ref < b.db->ref;
  });
  std::vector<const FineEntry*> cand_used, db_used;
  for (const auto& p : pairs) {
    if (std::find(cand_used.begin(), cand_used.end(), p.cand) != cand_used.end()) continue;
    if (std::find(db_used.begin(), db_used.end(), p.db) != db_used.end()) continue;
    cand_used.push_back(p.cand);
    db_used.push_back(p.db);
    ++detail.matched_fuzzy;
  }

  detail.matched_total = detail.matched_exact + detail.matched_fuzzy;
  if (detail.matched_total > detail.db_method_count) {
    detail.matched_total = detail.db_method_count;  // cannot exceed the record
    detail.matched_fuzzy = detail.matched_total - detail.matched_exact;
  }
  detail.tss = static_cast<double>(detail.matched_total) / static_cast<double>(detail.db_method_count);
  return detail;
}

}  // namespace detail

// Stage two: fine-grained version pinpointing over the surviving keys.
// Returns details for records whose TSS reaches the delta threshold.
inline std::vector<MatchDetail> version_stage(const ModuleFeatures& candidate,
                                              const std::vector<LibraryKey>& potential_keys,
                                              const SignatureDb& db, const MatcherConfig& config) {
  std::vector<MatchDetail> out;
  for (const auto& key : potential_keys) {
    const LibraryRecord* rec = db.find(key);
    if (!rec) continue;
    auto detail = detail::score_record(candidate, *rec, config);
    if (detail && detail->tss >= config.delta) out.push_back(*detail);
  }
  return out;
}

namespace detail {

inline CandidateResult identify_candidate(const CandidateModule& candidate, const SignatureDb& db,
                                          const MatcherConfig& config) {
  CandidateResult result;
  result.candidate_id = candidate.candidate_id();
  ModuleFeatures features = module_features(candidate.classes);
  result.class_count = features.class_count;
  result.method_count = features.method_count();
  if (features.coarse_set.empty()) return result;

  // package-index narrowing, skipped entirely when every root looks obfuscated
  std::vector<LibraryKey> keyset;
  std::vector<std::string> usable_roots;
  for (const auto& root : features.package_roots)
    if (!is_obfuscated_pkg(root)) usable_roots.push_back(root);
  if (!usable_roots.empty()) {
    for (const auto& root : usable_roots)
      for (const auto& key : db.query_pkg(root)) keyset.push_back(key);
    std::sort(keyset.begin(), keyset.end());
    keyset.erase(std::unique(keyset.begin(), keyset.end()), keyset.end());
  } else {
    for (const auto& [key, rec] : db.records()) keyset.push_back(key);
  }

  // class-count prefilter
  std::vector<LibraryKey> filtered;
  for (const auto& key : keyset) {
    const LibraryRecord* rec = db.find(key);
    if (rec && filter_class_count(features.class_count, rec->features.class_count, config))
      filtered.push_back(key);
  }

  auto coarse = coarse_stage(features, filtered, db, config);
  switch (coarse.kind) {
    case CoarseStageResult::Kind::t1_hit: {
      result.outcome = StageOutcome::t1_exact;
      for (const auto& key : coarse.keys) {
        const LibraryRecord* rec = db.find(key);
        MatchDetail d;
        d.db_key = key;
        d.db_method_count = rec->features.method_count();
        d.matched_exact = d.matched_total = d.db_method_count;
        d.tss = 1.0;
        result.winners.push_back(d);
      }
      break;
    }
    case CoarseStageResult::Kind::full_hit: {
      result.outcome = StageOutcome::coarse_full;
      const LibraryRecord* rec = db.find(coarse.keys.front());
      MatchDetail d;
      d.db_key = coarse.keys.front();
      d.db_method_count = rec->features.method_count();
      d.matched_exact = d.matched_total = d.db_method_count;
      d.tss = 1.0;
      result.winners.push_back(d);
      break;
    }
    case CoarseStageResult::Kind::potential: {
      auto details = version_stage(features, coarse.keys, db, config);
      if (details.empty()) break;
      double best = 0.0;
      for (const auto& d : details) best = std::max(best, d.tss);
      for (const auto& d : details)
        if (d.tss == best) result.winners.push_back(d);
      std::sort(result.winners.begin(), result.winners.end(),
                [](const MatchDetail& a, const MatchDetail& b) { return a.db_key < b.db_key; });
      result.outcome = StageOutcome::version_matched;
      break;
    }
    case CoarseStageResult::Kind::none:
      break;
  }
  result.ambiguous = result.winners.size() > 1;
  return result;
}

}  // namespace detail

// Full identification pipeline for one app bundle. Candidates are evaluated
// independently (in parallel up to `jobs`) and reduced in candidate order.
inline MatchReport identify(const ProgramBundle& bundle, const SignatureDb& db,
                            const MatcherConfig& config, unsigned jobs = 1) {
  using clock = std::chrono::steady_clock;
  MatchReport report;
  report.app_id = bundle.meta.app_package;
  report.config = config;

  auto t0 = clock::now();
  auto survivors = strip_primary(bundle);
  auto cdg = build_cdg(survivors, bundle.dependency_edges);
  auto candidates = split_candidates(cdg);
  auto t1 = clock::now();
  report.timings.decouple_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  report.candidates.resize(candidates.size());
  if (jobs <= 1 || candidates.size() <= 1) {
    for (std::size_t i = 0; i < candidates.size(); ++i)
      report.candidates[i] = detail::identify_candidate(candidates[i], db, config);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= candidates.size()) break;
        report.candidates[i] = detail::identify_candidate(candidates[i], db, config);
      }
    };
    std::vector<std::thread> pool;
    unsigned n = std::min<unsigned>(jobs, static_cast<unsigned>(candidates.size()));
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  auto t2 = clock::now();
  report.timings.match_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
  return report;
}

}  // namespace tplscan
