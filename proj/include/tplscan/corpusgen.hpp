#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tplscan/bundle.hpp"
#include "tplscan/opcodes.hpp"
#include "tplscan/rng.hpp"

namespace tplscan {

// Parameters of the synthetic ground-truth corpus.
//
// Each library mixes two method populations: short methods with randomized
// multi-block CFG shapes (they make the coarse feature set discriminative)
// and long 1-2 block methods (they exercise the fuzzy digests). Successive
// versions evolve by in-place method edits plus a small add/remove churn.
struct CorpusSpec {
  std::uint64_t seed = 1;
  std::size_t n_libraries = 50;
  std::size_t versions_per_library = 10;
  double inter_version_edit_rate = 0.15;
  std::size_t methods_per_library_min = 45;
  std::size_t methods_per_library_max = 75;
  std::size_t big_opcodes_min = 450;   // long-method opcode budget
  std::size_t big_opcodes_max = 700;
  double big_method_fraction = 0.20;
  std::size_t apps = 100;
  std::size_t libs_per_app_min = 3;
  std::size_t libs_per_app_max = 8;
  std::size_t host_classes_min = 4;
  std::size_t host_classes_max = 10;
  double add_remove_rate = 0.02;
};

struct GroundTruthEntry {
  std::string group_id;
  std::string artifact_id;
  std::string version;
};

struct Corpus {
  std::vector<ProgramBundle> libraries;  // one bundle per (library, version)
  std::vector<ProgramBundle> apps;
  std::map<std::string, std::vector<GroundTruthEntry>> manifest;  // app id -> truth
};

namespace detail {

inline std::uint8_t random_opcode(Rng& rng) {
  // anything but nop, which is reserved for junk insertion
  return static_cast<std::uint8_t>(1 + rng.below(63));
}

// Short method with a random DAG over 4-7 near-empty blocks; its canonical
// CFG string is what distinguishes it.
inline MethodDef make_shape_method(const std::string& id, Rng& rng) {
  MethodDef m;
  m.method_id = id;
  std::size_t n = rng.range(4, 7);
  m.blocks.resize(n);
  for (auto& b : m.blocks) {
    std::size_t ops = rng.below(2);  // 0 or 1 opcode
    for (std::size_t i = 0; i < ops; ++i) b.opcodes.push_back(random_opcode(rng));
  }
  // spanning chain keeps everything reachable; extra forward edges randomize
  // the shape
  for (std::size_t i = 1; i < n; ++i) m.edges.emplace_back(rng.below(i), i);
  std::size_t extra = rng.below(n);
  for (std::size_t i = 0; i < extra; ++i) {
    std::size_t a = rng.below(n - 1);
    std::size_t b = rng.range(a + 1, n - 1);
    m.edges.emplace_back(a, b);
  }
  m.entry_block = 0;
  return m;
}

// Long method: one big opcode block plus a fan of tiny leaf blocks whose size
// is unique within the library. The big stream feeds the fuzzy digest; the
// unique fan gives every long method its own coarse shape, so methods still
// pair up one-to-one after transforms that split blocks.
inline MethodDef make_big_method(const std::string& id, std::size_t tag, const CorpusSpec& spec,
                                 Rng& rng) {
  MethodDef m;
  m.method_id = id;
  std::size_t total = rng.range(spec.big_opcodes_min, spec.big_opcodes_max);
  m.blocks.resize(1);
  for (std::size_t i = 0; i < total; ++i) m.blocks[0].opcodes.push_back(random_opcode(rng));
  std::size_t fan = 2 + tag;
  for (std::size_t j = 0; j < fan; ++j) {
    BasicBlock leaf;
    if (rng.below(2) == 1) leaf.opcodes.push_back(random_opcode(rng));
    m.blocks.push_back(std::move(leaf));
    m.edges.emplace_back(0, m.blocks.size() - 1);
  }
  m.entry_block = 0;
  return m;
}

// In-place method edit for version evolution: scattered opcode substitutions
// make the fine digest dissimilar; appending a tail block (sometimes forced)
// changes the coarse signature.
inline void evolve_method(MethodDef& method, bool force_structural, Rng& rng) {
  for (auto& block : method.blocks)
    for (auto& op : block.opcodes)
      if (rng.unit() < 0.12) op = random_opcode(rng);
  if (force_structural || rng.below(2) == 0) {
    // single-opcode tail: keeps short blocks below the split threshold of
    // control-flow randomization, so structural churn stays bounded
    BasicBlock tail;
    tail.opcodes.push_back(random_opcode(rng));
    std::size_t from = method.blocks.size() - 1;
    method.blocks.push_back(std::move(tail));
    method.edges.emplace_back(from, method.blocks.size() - 1);
  }
}

inline ProgramBundle make_library_base(std::size_t lib_index, const CorpusSpec& spec, Rng& rng) {
  ProgramBundle lib;
  lib.kind = BundleKind::library;
  lib.meta.group_id = "com.gen" + std::to_string(lib_index);
  lib.meta.artifact_id = "art" + std::to_string(lib_index);
  lib.meta.packaging = Packaging::skinny;

  std::size_t n_methods = rng.range(spec.methods_per_library_min, spec.methods_per_library_max);
  std::size_t n_big = static_cast<std::size_t>(spec.big_method_fraction * static_cast<double>(n_methods));
  if (n_big == 0) n_big = 1;

  // class 0 is the library entry point: a single method and no incoming call
  // edges, so dead-code removal has a small, predictable pool
  std::size_t n_classes = std::max<std::size_t>(3, n_methods / 6);
  std::string pkg_root = "com/art" + std::to_string(lib_index);
  for (std::size_t c = 0; c < n_classes; ++c) {
    ClassDef cls;
    cls.class_id = "L" + std::to_string(lib_index) + "C" + std::to_string(c);
    cls.package_path = {"com", "art" + std::to_string(lib_index), "p" + std::to_string(c % 4)};
    lib.classes.push_back(std::move(cls));
  }

  std::size_t made = 0;
  std::size_t big_made = 0;
  while (made < n_methods) {
    std::size_t cls = made == 0 ? 0 : 1 + rng.below(n_classes - 1);
    std::string id = "m" + std::to_string(made);
    bool big = big_made < n_big && made > 0 && rng.unit() < spec.big_method_fraction * 1.5;
    if (n_methods - made <= n_big - big_made) big = true;  // make up any shortfall
    MethodDef m = big ? make_big_method(id, big_made, spec, rng) : make_shape_method(id, rng);
    if (big) ++big_made;
    lib.classes[cls].methods.push_back(std::move(m));
    ++made;
  }

  // call chain gives every class except class 0 an incoming call edge
  for (std::size_t c = 0; c + 1 < n_classes; ++c)
    lib.dependency_edges.push_back({lib.classes[c].class_id, lib.classes[c + 1].class_id,
                                    EdgeKind::method_call});
  // some variety in edge kinds
  for (std::size_t c = 2; c < n_classes; c += 3)
    lib.dependency_edges.push_back({lib.classes[c].class_id, lib.classes[c - 2].class_id,
                                    EdgeKind::field_reference});
  for (std::size_t c = 1; c < n_classes; c += 4)
    lib.dependency_edges.push_back({lib.classes[c].class_id, lib.classes[0].class_id,
                                    EdgeKind::inheritance});
  return lib;
}

inline void evolve_library(ProgramBundle& lib, const CorpusSpec& spec, Rng& rng,
                           std::size_t version_ordinal) {
  struct Loc { std::size_t cls; std::size_t method; };
  std::vector<Loc> all;
  for (std::size_t c = 0; c < lib.classes.size(); ++c)
    for (std::size_t m = 0; m < lib.classes[c].methods.size(); ++m) all.push_back({c, m});
  std::size_t n_edit = static_cast<std::size_t>(
      std::ceil(spec.inter_version_edit_rate * static_cast<double>(all.size())));
  n_edit = std::min(n_edit, all.size());
  rng.shuffle(all);
  for (std::size_t i = 0; i < n_edit; ++i)
    evolve_method(lib.classes[all[i].cls].methods[all[i].method], i == 0, rng);

  std::size_t churn = static_cast<std::size_t>(
      std::ceil(spec.add_remove_rate * static_cast<double>(all.size())));
  for (std::size_t i = 0; i < churn; ++i) {
    // add a fresh shape method to a random non-entry class
    std::size_t cls = 1 + rng.below(lib.classes.size() - 1);
    std::string id = "v" + std::to_string(version_ordinal) + "n" + std::to_string(i);
    lib.classes[cls].methods.push_back(make_shape_method(id, rng));
    // remove one method from a class that can spare it
    for (std::size_t attempt = 0; attempt < 8; ++attempt) {
      std::size_t rc = 1 + rng.below(lib.classes.size() - 1);
      if (lib.classes[rc].methods.size() > 1) {
        lib.classes[rc].methods.erase(lib.classes[rc].methods.begin() +
                                      static_cast<std::ptrdiff_t>(rng.below(lib.classes[rc].methods.size())));
        break;
      }
    }
  }
}

}  // namespace detail

// Deterministic corpus generation: library version chains plus composed apps
// with an exact ground-truth manifest.
inline Corpus generate_corpus(const CorpusSpec& spec) {
  Corpus corpus;
  Rng rng(spec.seed);

  std::vector<std::vector<std::size_t>> lib_version_index(spec.n_libraries);
  for (std::size_t lib = 0; lib < spec.n_libraries; ++lib) {
    ProgramBundle current = detail::make_library_base(lib, spec, rng);
    for (std::size_t v = 0; v < spec.versions_per_library; ++v) {
      if (v > 0) detail::evolve_library(current, spec, rng, v);
      current.meta.version = "1." + std::to_string(v) + ".0";
      lib_version_index[lib].push_back(corpus.libraries.size());
      corpus.libraries.push_back(current);
    }
  }

  for (std::size_t a = 0; a < spec.apps; ++a) {
    ProgramBundle app;
    app.kind = BundleKind::app;
    std::string app_pkg = "com.app" + std::to_string(a);
    app.meta.app_package = app_pkg;
    app.meta.application_namespace = app_pkg;
    app.meta.launcher_activity_package = app_pkg + ".ui";

    std::string app_id = app_pkg;  // manifest keys on the app package

    // host classes under the app namespace, call-chained among themselves
    std::size_t n_host = rng.range(spec.host_classes_min, spec.host_classes_max);
    for (std::size_t h = 0; h < n_host; ++h) {
      ClassDef cls;
      cls.class_id = "A" + std::to_string(a) + "H" + std::to_string(h);
      cls.package_path = {"com", "app" + std::to_string(a), "core"};
      std::size_t n_methods = rng.range(2, 5);
      for (std::size_t m = 0; m < n_methods; ++m)
        cls.methods.push_back(detail::make_shape_method("h" + std::to_string(m), rng));
      app.classes.push_back(std::move(cls));
      if (h > 0)
        app.dependency_edges.push_back({"A" + std::to_string(a) + "H" + std::to_string(h - 1),
                                        "A" + std::to_string(a) + "H" + std::to_string(h),
                                        EdgeKind::method_call});
    }

    // embed a sample of distinct libraries at random versions
    std::size_t n_libs = rng.range(spec.libs_per_app_min,
                                   std::min(spec.libs_per_app_max, spec.n_libraries));
    std::vector<std::size_t> pool(spec.n_libraries);
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    rng.shuffle(pool);
    for (std::size_t i = 0; i < n_libs; ++i) {
      std::size_t lib = pool[i];
      std::size_t version = rng.below(spec.versions_per_library);
      const ProgramBundle& source = corpus.libraries[lib_version_index[lib][version]];
      for (const auto& cls : source.classes) app.classes.push_back(cls);
      for (const auto& e : source.dependency_edges) app.dependency_edges.push_back(e);
      corpus.manifest[app_id].push_back(
          {source.meta.group_id, source.meta.artifact_id, source.meta.version});
    }
    if (!corpus.manifest.contains(app_id)) corpus.manifest[app_id] = {};
    corpus.apps.push_back(std::move(app));
  }
  return corpus;
}

}  // namespace tplscan
