#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tplscan {

enum class BundleKind { app, library };
enum class EdgeKind { inheritance, method_call, field_reference };
enum class Packaging { skinny, fat };

inline const char* to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::inheritance: return "inheritance";
    case EdgeKind::method_call: return "method_call";
    case EdgeKind::field_reference: return "field_reference";
  }
  return "?";
}

struct DeclaredDep {
  std::string group_id;
  std::string artifact_id;
  std::string version;
  std::string root_package;  // slash-separated

  bool operator==(const DeclaredDep&) const = default;
};

struct BundleMeta {
  // app fields (dotted names)
  std::string app_package;
  std::string application_namespace;
  std::string launcher_activity_package;
  // library fields
  std::string group_id;
  std::string artifact_id;
  std::string version;
  Packaging packaging = Packaging::skinny;
  std::vector<DeclaredDep> declared_deps;

  bool operator==(const BundleMeta&) const = default;
};

struct BasicBlock {
  std::vector<std::uint8_t> opcodes;  // alphabet byte values; operands do not exist

  bool operator==(const BasicBlock&) const = default;
};

struct MethodDef {
  std::string method_id;
  std::vector<BasicBlock> blocks;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t entry_block = 0;

  bool operator==(const MethodDef&) const = default;

  std::size_t opcode_count() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.opcodes.size();
    return n;
  }
};

struct ClassDef {
  std::string class_id;
  std::vector<std::string> package_path;  // slash-separated segments
  std::vector<MethodDef> methods;

  bool operator==(const ClassDef&) const = default;

  std::string package_string() const {
    std::string s;
    for (std::size_t i = 0; i < package_path.size(); ++i) {
      if (i) s.push_back('/');
      s += package_path[i];
    }
    return s;
  }
};

struct DependencyEdge {
  std::string from_class;
  std::string to_class;
  EdgeKind kind = EdgeKind::method_call;

  bool operator==(const DependencyEdge&) const = default;
};

struct ProgramBundle {
  BundleKind kind = BundleKind::app;
  BundleMeta meta;
  std::vector<ClassDef> classes;
  std::vector<DependencyEdge> dependency_edges;

  bool operator==(const ProgramBundle&) const = default;
};

// Parse/validation failure. Syntax errors carry a line/column, semantic errors
// an entity path.
class BundleError : public std::runtime_error {
public:
  enum class Kind { syntax, semantic };

  BundleError(Kind kind, std::string message, std::size_t line = 0, std::size_t column = 0,
              std::string entity = {})
      : std::runtime_error(format(kind, message, line, column, entity)),
        kind_(kind), line_(line), column_(column), entity_(std::move(entity)) {}

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& entity() const { return entity_; }

private:
  static std::string format(Kind kind, const std::string& message, std::size_t line,
                            std::size_t column, const std::string& entity) {
    std::string out = kind == Kind::syntax ? "syntax error" : "semantic error";
    if (line) out += " at line " + std::to_string(line) + ":" + std::to_string(column);
    if (!entity.empty()) out += " [" + entity + "]";
    out += ": " + message;
    return out;
  }

  Kind kind_;
  std::size_t line_, column_;
  std::string entity_;
};

// Checks every structural invariant; throws BundleError (semantic) on the
// first violation.
inline void validate_bundle(const ProgramBundle& bundle) {
  using Kind = BundleError::Kind;
  if (bundle.kind == BundleKind::library) {
    if (bundle.meta.group_id.empty())
      throw BundleError(Kind::semantic, "library metadata missing field 'group_id'", 0, 0, "meta");
    if (bundle.meta.artifact_id.empty())
      throw BundleError(Kind::semantic, "library metadata missing field 'artifact_id'", 0, 0, "meta");
    if (bundle.meta.version.empty())
      throw BundleError(Kind::semantic, "library metadata missing field 'version'", 0, 0, "meta");
    if (bundle.meta.packaging == Packaging::fat)
      for (const auto& d : bundle.meta.declared_deps)
        if (d.root_package.empty())
          throw BundleError(Kind::semantic,
                            "fat packaging requires a root_package on every declared dep", 0, 0,
                            "meta/dep " + d.group_id + ":" + d.artifact_id);
  } else {
    if (bundle.meta.app_package.empty())
      throw BundleError(Kind::semantic, "app metadata missing field 'app_package'", 0, 0, "meta");
  }

  std::vector<std::string> seen;
  for (const auto& cls : bundle.classes) {
    for (const auto& prev : seen)
      if (prev == cls.class_id)
        throw BundleError(Kind::semantic, "duplicate class id", 0, 0, "class " + cls.class_id);
    seen.push_back(cls.class_id);
    for (const auto& seg : cls.package_path) {
      if (seg.empty() || seg.find_first_of(" \t") != std::string::npos)
        throw BundleError(Kind::semantic, "invalid package segment", 0, 0,
                          "class " + cls.class_id);
    }
    std::vector<std::string> method_seen;
    for (const auto& m : cls.methods) {
      std::string path = "class " + cls.class_id + "/method " + m.method_id;
      for (const auto& prev : method_seen)
        if (prev == m.method_id)
          throw BundleError(Kind::semantic, "duplicate method id", 0, 0, path);
      method_seen.push_back(m.method_id);
      if (m.blocks.empty())
        throw BundleError(Kind::semantic, "method has no blocks", 0, 0, path);
      if (m.entry_block >= m.blocks.size())
        throw BundleError(Kind::semantic, "entry block index out of range", 0, 0, path);
      for (auto [a, b] : m.edges)
        if (a >= m.blocks.size() || b >= m.blocks.size())
          throw BundleError(Kind::semantic,
                            "edge endpoint out of range: " + std::to_string(a) + " -> " +
                                std::to_string(b), 0, 0, path);
    }
  }

  for (const auto& e : bundle.dependency_edges) {
    auto exists = [&](const std::string& id) {
      for (const auto& c : bundle.classes)
        if (c.class_id == id) return true;
      return false;
    };
    if (!exists(e.from_class))
      throw BundleError(Kind::semantic, "dependency edge references undeclared class", 0, 0,
                        "class " + e.from_class);
    if (!exists(e.to_class))
      throw BundleError(Kind::semantic, "dependency edge references undeclared class", 0, 0,
                        "class " + e.to_class);
  }
}

}  // namespace tplscan
