#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tplscan/bundle.hpp"

namespace tplscan {

enum class CandidateOrigin { cdg_component, declared_dep_split };

struct CandidateModule {
  std::vector<const ClassDef*> classes;
  CandidateOrigin origin = CandidateOrigin::cdg_component;
  std::optional<std::string> namespace_hint;

  // Stable candidate identity: the smallest class id in the module.
  std::string candidate_id() const {
    std::string id;
    for (const auto* c : classes)
      if (id.empty() || c->class_id < id) id = c->class_id;
    return id;
  }
};

namespace detail {

inline std::vector<std::string> dotted_to_segments(const std::string& dotted) {
  std::vector<std::string> segs;
  std::size_t start = 0;
  while (start <= dotted.size()) {
    std::size_t end = dotted.find('.', start);
    if (end == std::string::npos) end = dotted.size();
    if (end > start) segs.emplace_back(dotted.substr(start, end - start));
    start = end + 1;
  }
  return segs;
}

// Exact segment-prefix match: com/foo covers com/foo/bar but not com/foobar.
inline bool has_segment_prefix(const std::vector<std::string>& path,
                               const std::vector<std::string>& prefix) {
  if (prefix.empty() || prefix.size() > path.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (path[i] != prefix[i]) return false;
  return true;
}

inline std::vector<std::string> slash_to_segments(const std::string& slashed) {
  std::vector<std::string> segs;
  std::size_t start = 0;
  while (start <= slashed.size()) {
    std::size_t end = slashed.find('/', start);
    if (end == std::string::npos) end = slashed.size();
    if (end > start) segs.emplace_back(slashed.substr(start, end - start));
    start = end + 1;
  }
  return segs;
}

}  // namespace detail

// Drops every class under the host namespaces (app package, application
// namespace, launcher activity package); returns the survivors.
inline std::vector<const ClassDef*> strip_primary(const ProgramBundle& bundle) {
  std::vector<std::vector<std::string>> prefixes;
  for (const auto& dotted : {bundle.meta.app_package, bundle.meta.application_namespace,
                             bundle.meta.launcher_activity_package}) {
    if (dotted.empty()) continue;
    auto segs = detail::dotted_to_segments(dotted);
    if (!segs.empty()) prefixes.push_back(std::move(segs));
  }
  std::vector<const ClassDef*> survivors;
  for (const auto& cls : bundle.classes) {
    bool host = false;
    for (const auto& prefix : prefixes)
      if (detail::has_segment_prefix(cls.package_path, prefix)) {
        host = true;
        break;
      }
    if (!host) survivors.push_back(&cls);
  }
  return survivors;
}

// Undirected class dependency graph over the surviving classes. Edges that
// touch stripped classes are dropped; edge kinds all connect equally.
struct ClassDependencyGraph {
  std::vector<const ClassDef*> classes;
  std::unordered_map<std::string, std::size_t> index;  // class_id -> position
  std::vector<std::vector<std::size_t>> adjacency;
};

inline ClassDependencyGraph build_cdg(const std::vector<const ClassDef*>& classes,
                                      const std::vector<DependencyEdge>& dependency_edges) {
  ClassDependencyGraph g;
  g.classes = classes;
  g.adjacency.resize(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) g.index.emplace(classes[i]->class_id, i);
  for (const auto& e : dependency_edges) {
    auto a = g.index.find(e.from_class);
    auto b = g.index.find(e.to_class);
    if (a == g.index.end() || b == g.index.end()) continue;
    if (a->second == b->second) continue;
    g.adjacency[a->second].push_back(b->second);
    g.adjacency[b->second].push_back(a->second);
  }
  return g;
}

// One candidate per connected component, ordered by the smallest class id in
// the component. Isolated classes are pooled into a single residual candidate
// when there is more than one of them.
inline std::vector<CandidateModule> split_candidates(const ClassDependencyGraph& cdg) {
  const std::size_t n = cdg.classes.size();
  std::vector<std::size_t> component(n, static_cast<std::size_t>(-1));
  std::size_t n_components = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (component[i] != static_cast<std::size_t>(-1)) continue;
    std::vector<std::size_t> stack{i};
    component[i] = n_components;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v : cdg.adjacency[u])
        if (component[v] == static_cast<std::size_t>(-1)) {
          component[v] = n_components;
          stack.push_back(v);
        }
    }
    ++n_components;
  }

  std::vector<CandidateModule> modules(n_components);
  for (std::size_t i = 0; i < n; ++i) modules[component[i]].classes.push_back(cdg.classes[i]);

  // pool isolated classes
  std::vector<CandidateModule> result;
  CandidateModule residual;
  for (auto& m : modules) {
    if (m.classes.size() == 1 && cdg.adjacency[cdg.index.at(m.classes[0]->class_id)].empty())
      residual.classes.push_back(m.classes[0]);
    else
      result.push_back(std::move(m));
  }
  if (!residual.classes.empty()) result.push_back(std::move(residual));

  std::sort(result.begin(), result.end(), [](const CandidateModule& a, const CandidateModule& b) {
    return a.candidate_id() < b.candidate_id();
  });
  return result;
}

struct SkinnySplitResult {
  std::vector<CandidateModule> candidates;  // host candidate first
  std::vector<std::string> warnings;
};

// Splits a library bundle along its declared dependency roots. Skinny bundles
// are a single candidate; fat bundles lose each declared dep's subtree to its
// own candidate.
inline SkinnySplitResult split_skinny_deps(const ProgramBundle& bundle) {
  SkinnySplitResult result;
  CandidateModule host;
  host.origin = CandidateOrigin::cdg_component;

  if (bundle.meta.packaging == Packaging::skinny || bundle.meta.declared_deps.empty()) {
    for (const auto& cls : bundle.classes) host.classes.push_back(&cls);
    result.candidates.push_back(std::move(host));
    return result;
  }

  std::vector<std::pair<const DeclaredDep*, CandidateModule>> splits;
  for (const auto& dep : bundle.meta.declared_deps) {
    CandidateModule m;
    m.origin = CandidateOrigin::declared_dep_split;
    m.namespace_hint = dep.root_package;
    splits.emplace_back(&dep, std::move(m));
  }

  for (const auto& cls : bundle.classes) {
    bool taken = false;
    for (auto& [dep, module] : splits) {
      auto prefix = detail::slash_to_segments(dep->root_package);
      if (detail::has_segment_prefix(cls.package_path, prefix)) {
        module.classes.push_back(&cls);
        taken = true;
        break;
      }
    }
    if (!taken) host.classes.push_back(&cls);
  }

  result.candidates.push_back(std::move(host));
  for (auto& [dep, module] : splits) {
    if (module.classes.empty())
      result.warnings.push_back("declared dep " + dep->group_id + ":" + dep->artifact_id +
                                " root " + dep->root_package + " matches no classes");
    else
      result.candidates.push_back(std::move(module));
  }
  return result;
}

}  // namespace tplscan
