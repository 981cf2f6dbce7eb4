#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tplscan/bundle.hpp"
#include "tplscan/cfg.hpp"
#include "tplscan/ctph.hpp"

namespace tplscan {

// Matching thresholds; defaults per the evaluated operating point.
struct MatcherConfig {
  double theta = 0.85;          // method similarity threshold
  double delta = 0.95;          // library similarity threshold
  double coarse_overlap = 0.70; // coarse containment needed to stay a candidate
  double class_ratio = 0.40;    // class-count prefilter

  bool valid() const {
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    return in01(theta) && in01(delta) && in01(coarse_overlap) && in01(class_ratio);
  }
};

struct MethodSignature {
  Hash128 coarse;
  CtphDigest fine;
  std::size_t opcode_len = 0;

  bool operator==(const MethodSignature&) const = default;
};

struct MethodRef {
  std::string class_id;
  std::string method_id;

  auto operator<=>(const MethodRef&) const = default;
};

// Fuzzy digest over the method's opcode bytes concatenated in canonical
// serial order (unreachable blocks excluded).
inline CtphDigest fine_digest(const MethodDef& method, const CanonicalCfg& canonical) {
  std::vector<std::uint8_t> stream;
  for (std::size_t block : canonical.order) {
    const auto& ops = method.blocks[block].opcodes;
    stream.insert(stream.end(), ops.begin(), ops.end());
  }
  return ctph(stream);
}

inline MethodSignature method_signature(const MethodDef& method) {
  CanonicalCfg canonical = canonicalize_cfg(method);
  MethodSignature sig;
  sig.coarse = coarse_hash(canonical);
  sig.fine = fine_digest(method, canonical);
  sig.opcode_len = 0;
  for (std::size_t block : canonical.order) sig.opcode_len += method.blocks[block].opcodes.size();
  return sig;
}

// Two-segment package root ("com/squareup", or the single segment).
inline std::string package_root(const ClassDef& cls) {
  if (cls.package_path.empty()) return "";
  std::string root = cls.package_path[0];
  if (cls.package_path.size() > 1) root += "/" + cls.package_path[1];
  return root;
}

struct FineEntry {
  MethodRef ref;
  CtphDigest digest;

  bool operator==(const FineEntry&) const = default;
};

struct ModuleFeatures {
  Hash128 t1;
  std::vector<Hash128> coarse_set;                  // sorted multiset of coarse hashes
  std::map<Hash128, std::vector<FineEntry>> fine_map; // entries sorted by method ref
  std::size_t class_count = 0;                      // classes with >= 1 method
  std::vector<std::string> package_roots;           // sorted, unique

  bool operator==(const ModuleFeatures&) const = default;

  std::size_t method_count() const { return coarse_set.size(); }
};

template <typename ClassRange>
ModuleFeatures module_features(const ClassRange& classes) {
  ModuleFeatures out;
  for (const auto* cls : classes) {
    if (!cls->methods.empty()) ++out.class_count;
    std::string root = package_root(*cls);
    if (!root.empty()) out.package_roots.push_back(root);
    for (const auto& method : cls->methods) {
      MethodSignature sig = method_signature(method);
      out.coarse_set.push_back(sig.coarse);
      out.fine_map[sig.coarse].push_back(FineEntry{{cls->class_id, method.method_id}, sig.fine});
    }
  }
  std::sort(out.coarse_set.begin(), out.coarse_set.end());
  std::sort(out.package_roots.begin(), out.package_roots.end());
  out.package_roots.erase(std::unique(out.package_roots.begin(), out.package_roots.end()),
                          out.package_roots.end());
  for (auto& [hash, entries] : out.fine_map)
    std::sort(entries.begin(), entries.end(),
              [](const FineEntry& a, const FineEntry& b) { return a.ref < b.ref; });
  out.t1 = t1_hash(out.coarse_set);
  return out;
}

}  // namespace tplscan
