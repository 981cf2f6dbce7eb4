#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "tplscan/bundle.hpp"
#include "tplscan/sha256.hpp"

namespace tplscan {

// CFG reduced to a canonical serial numbering: node count plus the adjacency
// list in serial terms. Identifier- and declaration-order-free by
// construction.
struct CanonicalCfg {
  std::size_t node_count = 0;
  // (parent serial -> child serials), ascending by parent serial, parents
  // without children omitted.
  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> adjacency;
  // serial -> original block index; consumed by fine-feature generation.
  std::vector<std::size_t> order;

  std::string to_string() const {
    std::string s = "n=" + std::to_string(node_count) + ";";
    for (const auto& [parent, children] : adjacency) {
      s += std::to_string(parent);
      s += "->";
      for (std::size_t i = 0; i < children.size(); ++i) {
        if (i) s.push_back(',');
        s += std::to_string(children[i]);
      }
      s.push_back(';');
    }
    return s;
  }
};

// Serial assignment: depth-first from the entry block over reachable blocks.
// At each node the children are ordered by out-degree (desc), then opcode
// count (desc), then original block index (asc), and numbered consecutively in
// that order on first visit.
inline CanonicalCfg canonicalize_cfg(const MethodDef& method) {
  CanonicalCfg result;
  const std::size_t n = method.blocks.size();
  if (n == 0 || method.entry_block >= n) return result;

  // de-duplicated successor lists
  std::vector<std::vector<std::size_t>> succ(n);
  for (auto [a, b] : method.edges) {
    if (a >= n || b >= n) continue;
    auto& s = succ[a];
    if (std::find(s.begin(), s.end(), b) == s.end()) s.push_back(b);
  }

  std::vector<bool> reachable(n, false);
  {
    std::vector<std::size_t> stack{method.entry_block};
    reachable[method.entry_block] = true;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v : succ[u])
        if (!reachable[v]) {
          reachable[v] = true;
          stack.push_back(v);
        }
    }
  }

  auto priority_less = [&](std::size_t a, std::size_t b) {
    if (succ[a].size() != succ[b].size()) return succ[a].size() > succ[b].size();
    std::size_t oa = method.blocks[a].opcodes.size();
    std::size_t ob = method.blocks[b].opcodes.size();
    if (oa != ob) return oa > ob;
    return a < b;
  };

  constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);
  std::vector<std::size_t> serial(n, kUnassigned);
  std::size_t next_serial = 0;
  serial[method.entry_block] = next_serial++;

  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> rows;
  std::vector<std::size_t> expand_stack{method.entry_block};
  while (!expand_stack.empty()) {
    std::size_t u = expand_stack.back();
    expand_stack.pop_back();
    auto children = succ[u];
    std::sort(children.begin(), children.end(), priority_less);
    std::vector<std::size_t> fresh;
    for (std::size_t c : children)
      if (serial[c] == kUnassigned) {
        serial[c] = next_serial++;
        fresh.push_back(c);
      }
    if (!children.empty()) {
      std::vector<std::size_t> child_serials;
      child_serials.reserve(children.size());
      for (std::size_t c : children) child_serials.push_back(serial[c]);
      rows.emplace_back(serial[u], std::move(child_serials));
    }
    // depth-first: expand the highest-priority fresh child next
    for (auto it = fresh.rbegin(); it != fresh.rend(); ++it) expand_stack.push_back(*it);
  }

  result.node_count = next_serial;
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  result.adjacency = std::move(rows);
  result.order.assign(next_serial, 0);
  for (std::size_t block = 0; block < n; ++block)
    if (serial[block] != kUnassigned) result.order[serial[block]] = block;
  return result;
}

// 128-bit hash of the canonical CFG string; the per-method coarse signature.
inline Hash128 coarse_hash(const CanonicalCfg& cfg) { return Hash128::of(cfg.to_string()); }

// Module-level coarse aggregate: hash of the ascending-sorted concatenation of
// the coarse hashes. The empty set maps to the hash of the empty string.
inline Hash128 t1_hash(std::vector<Hash128> coarse_set) {
  std::sort(coarse_set.begin(), coarse_set.end());
  Sha256 h;
  for (const auto& c : coarse_set) h.update(c.bytes.data(), c.bytes.size());
  auto full = h.finish();
  Hash128 out;
  std::copy_n(full.begin(), 16, out.bytes.begin());
  return out;
}

}  // namespace tplscan
