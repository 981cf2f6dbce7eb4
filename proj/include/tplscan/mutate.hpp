#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tplscan/bundle.hpp"
#include "tplscan/opcodes.hpp"
#include "tplscan/rng.hpp"

namespace tplscan {

enum class MutOpKind { rename, flatten, junk, dead_code, cfr };

struct MutOp {
  MutOpKind kind = MutOpKind::rename;
  double rate = 0.0;  // used by junk, dead_code, cfr
};

// Obfuscation recipe: transforms applied in listed order, deterministic under
// the seed.
struct MutationSpec {
  std::uint64_t seed = 0;
  std::vector<MutOp> ops;

  static MutationSpec from_json(const nlohmann::json& j) {
    MutationSpec spec;
    spec.seed = j.value("seed", std::uint64_t{0});
    for (const auto& op : j.at("ops")) {
      MutOp m;
      std::string kind = op.at("kind").get<std::string>();
      if (kind == "rename") m.kind = MutOpKind::rename;
      else if (kind == "flatten") m.kind = MutOpKind::flatten;
      else if (kind == "junk") m.kind = MutOpKind::junk;
      else if (kind == "dead_code") m.kind = MutOpKind::dead_code;
      else if (kind == "cfr") m.kind = MutOpKind::cfr;
      else throw std::runtime_error("unknown mutation op '" + kind + "'");
      m.rate = op.value("rate", 0.0);
      if (m.rate < 0.0 || m.rate > 1.0)
        throw std::runtime_error("mutation rate must be in [0,1]");
      spec.ops.push_back(m);
    }
    return spec;
  }
};

struct MutationResult {
  ProgramBundle bundle;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string hex_token(Rng& rng) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (auto& c : out) c = digits[rng.below(16)];
  return out;
}

// Bijective rewrite of class ids and package segments into 16-hex tokens,
// the shape ProGuard-style repackaging produces.
inline void apply_rename(ProgramBundle& bundle, Rng& rng) {
  std::set<std::string> segments, class_ids;
  for (const auto& cls : bundle.classes) {
    class_ids.insert(cls.class_id);
    for (const auto& seg : cls.package_path) segments.insert(seg);
  }
  std::map<std::string, std::string> seg_map, id_map;
  std::set<std::string> used;
  auto fresh = [&] {
    std::string t;
    do t = hex_token(rng); while (!used.insert(t).second);
    return t;
  };
  for (const auto& s : segments) seg_map[s] = fresh();
  for (const auto& s : class_ids) id_map[s] = fresh();
  for (auto& cls : bundle.classes) {
    cls.class_id = id_map[cls.class_id];
    for (auto& seg : cls.package_path) seg = seg_map[seg];
  }
  for (auto& e : bundle.dependency_edges) {
    e.from_class = id_map[e.from_class];
    e.to_class = id_map[e.to_class];
  }
}

inline void apply_flatten(ProgramBundle& bundle) {
  for (auto& cls : bundle.classes) cls.package_path = {"a"};
}

// Inserts a run of ceil(rate*len) no-op mnemonics at one position per block.
// A contiguous run models real junk injection (a dead code sequence), and its
// digest footprint stays local.
inline void apply_junk(ProgramBundle& bundle, double rate, Rng& rng) {
  for (auto& cls : bundle.classes)
    for (auto& method : cls.methods)
      for (auto& block : method.blocks) {
        std::size_t len = block.opcodes.size();
        std::size_t k = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(len)));
        if (k == 0) continue;
        std::size_t pos = rng.below(len + 1);
        block.opcodes.insert(block.opcodes.begin() + static_cast<std::ptrdiff_t>(pos), k, kNopByte);
      }
}

inline void apply_dead_code(ProgramBundle& bundle, double rate, Rng& rng,
                            std::vector<std::string>& warnings) {
  std::set<std::string> called;
  for (const auto& e : bundle.dependency_edges)
    if (e.kind == EdgeKind::method_call) called.insert(e.to_class);
  struct Target { std::size_t cls; std::size_t method; };
  std::vector<Target> eligible;
  std::size_t total_methods = 0;
  for (std::size_t c = 0; c < bundle.classes.size(); ++c) {
    total_methods += bundle.classes[c].methods.size();
    if (called.contains(bundle.classes[c].class_id)) continue;
    for (std::size_t m = 0; m < bundle.classes[c].methods.size(); ++m) eligible.push_back({c, m});
  }
  std::size_t want = static_cast<std::size_t>(rate * static_cast<double>(total_methods));
  if (eligible.empty()) {
    if (want > 0) warnings.push_back("dead_code: no deletable methods (every class is called)");
    return;
  }
  rng.shuffle(eligible);
  std::size_t take = std::min(want, eligible.size());
  std::sort(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(take),
            [](const Target& a, const Target& b) {
              return a.cls != b.cls ? a.cls > b.cls : a.method > b.method;
            });
  for (std::size_t i = 0; i < take; ++i) {
    auto& methods = bundle.classes[eligible[i].cls].methods;
    methods.erase(methods.begin() + static_cast<std::ptrdiff_t>(eligible[i].method));
  }
}

// Splits floor(rate*B) blocks at their midpoint, preserving execution order:
// the first half keeps the in-edges, the second half inherits the out-edges.
inline void apply_cfr(ProgramBundle& bundle, double rate, Rng& rng,
                      std::vector<std::string>& warnings) {
  struct Target { std::size_t cls; std::size_t method; std::size_t block; };
  std::vector<Target> splittable;
  std::size_t total_blocks = 0;
  for (std::size_t c = 0; c < bundle.classes.size(); ++c)
    for (std::size_t m = 0; m < bundle.classes[c].methods.size(); ++m) {
      const auto& blocks = bundle.classes[c].methods[m].blocks;
      total_blocks += blocks.size();
      for (std::size_t b = 0; b < blocks.size(); ++b)
        if (blocks[b].opcodes.size() >= 2) splittable.push_back({c, m, b});
    }
  std::size_t want = static_cast<std::size_t>(rate * static_cast<double>(total_blocks));
  if (want == 0) return;
  if (splittable.empty()) {
    warnings.push_back("cfr: no splittable blocks");
    return;
  }
  rng.shuffle(splittable);
  std::size_t take = std::min(want, splittable.size());
  if (take < want)
    warnings.push_back("cfr: only " + std::to_string(take) + " of " + std::to_string(want) +
                       " requested splits possible");
  for (std::size_t i = 0; i < take; ++i) {
    auto& method = bundle.classes[splittable[i].cls].methods[splittable[i].method];
    std::size_t u = splittable[i].block;
    auto& ops = method.blocks[u].opcodes;
    std::size_t mid = (ops.size() + 1) / 2;
    BasicBlock second;
    second.opcodes.assign(ops.begin() + static_cast<std::ptrdiff_t>(mid), ops.end());
    ops.resize(mid);
    std::size_t v = method.blocks.size();
    method.blocks.push_back(std::move(second));
    for (auto& [a, b] : method.edges)
      if (a == u) a = v;
    method.edges.emplace_back(u, v);
  }
}

}  // namespace detail

// Applies the transforms in order. Identical (seed, ops, input) always yields
// an identical bundle.
inline MutationResult mutate(const ProgramBundle& input, const MutationSpec& spec) {
  MutationResult result;
  result.bundle = input;
  Rng rng(spec.seed);
  for (const auto& op : spec.ops) {
    switch (op.kind) {
      case MutOpKind::rename: detail::apply_rename(result.bundle, rng); break;
      case MutOpKind::flatten: detail::apply_flatten(result.bundle); break;
      case MutOpKind::junk: detail::apply_junk(result.bundle, op.rate, rng); break;
      case MutOpKind::dead_code:
        detail::apply_dead_code(result.bundle, op.rate, rng, result.warnings);
        break;
      case MutOpKind::cfr: detail::apply_cfr(result.bundle, op.rate, rng, result.warnings); break;
    }
  }
  return result;
}

}  // namespace tplscan
