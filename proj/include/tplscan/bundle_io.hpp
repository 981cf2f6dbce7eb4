#pragma once

#include <charconv>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "tplscan/bundle.hpp"
#include "tplscan/opcodes.hpp"

namespace tplscan {

namespace detail {

struct Cursor {
  std::string_view line;
  std::size_t line_no = 0;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
  }

  std::string_view token() {
    skip_ws();
    std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
    return line.substr(start, pos - start);
  }

  [[noreturn]] void fail(const std::string& msg, std::size_t col_pos) const {
    throw BundleError(BundleError::Kind::syntax, msg, line_no, col_pos + 1);
  }
};

inline std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> segs;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    segs.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return segs;
}

inline std::string join_path(const std::vector<std::string>& segs) {
  std::string out;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (i) out.push_back('/');
    out += segs[i];
  }
  return out;
}

}  // namespace detail

// Parses the line-oriented bundle format. See docs/bundle_format.md for the
// grammar. Throws BundleError with a location on syntax errors and with an
// entity path on semantic errors.
inline ProgramBundle parse_bundle(std::string_view text) {
  ProgramBundle bundle;
  bool kind_set = false;
  ClassDef* cur_class = nullptr;
  MethodDef* cur_method = nullptr;
  BasicBlock* cur_block = nullptr;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    std::size_t next = end + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

    detail::Cursor cur{raw, line_no, 0};
    cur.skip_ws();
    if (cur.pos >= raw.size() || raw[cur.pos] == '#') {
      start = next;
      continue;
    }

    std::size_t head_col = cur.pos;
    std::string_view head = cur.token();
    if (head == "@meta") {
      std::size_t kv_col = cur.pos;
      std::string_view kv = cur.token();
      std::size_t eq = kv.find('=');
      if (eq == std::string_view::npos) cur.fail("expected key=value after @meta", kv_col);
      std::string_view key = kv.substr(0, eq);
      std::string value(kv.substr(eq + 1));
      if (key == "kind") {
        if (value == "app") bundle.kind = BundleKind::app;
        else if (value == "library") bundle.kind = BundleKind::library;
        else cur.fail("kind must be 'app' or 'library'", kv_col);
        kind_set = true;
      } else if (key == "app_package") bundle.meta.app_package = value;
      else if (key == "application_namespace") bundle.meta.application_namespace = value;
      else if (key == "launcher_activity_package") bundle.meta.launcher_activity_package = value;
      else if (key == "group_id") bundle.meta.group_id = value;
      else if (key == "artifact_id") bundle.meta.artifact_id = value;
      else if (key == "version") bundle.meta.version = value;
      else if (key == "packaging") {
        if (value == "skinny") bundle.meta.packaging = Packaging::skinny;
        else if (value == "fat") bundle.meta.packaging = Packaging::fat;
        else cur.fail("packaging must be 'skinny' or 'fat'", kv_col);
      } else if (key == "dep") {
        // dep=<group>:<artifact>:<version>:<root_package>
        DeclaredDep dep;
        std::vector<std::string> parts;
        std::size_t p = 0;
        while (p <= value.size()) {
          std::size_t c = value.find(':', p);
          if (c == std::string::npos) c = value.size();
          parts.emplace_back(value.substr(p, c - p));
          p = c + 1;
        }
        if (parts.size() != 4) cur.fail("dep must be group:artifact:version:root_package", kv_col);
        dep.group_id = parts[0];
        dep.artifact_id = parts[1];
        dep.version = parts[2];
        dep.root_package = parts[3];
        bundle.meta.declared_deps.push_back(std::move(dep));
      } else cur.fail("unknown meta key '" + std::string(key) + "'", kv_col);
    } else if (head == "@class") {
      std::size_t id_col = cur.pos;
      std::string_view id = cur.token();
      if (id.empty()) cur.fail("expected class id after @class", id_col);
      std::size_t pkg_col = cur.pos;
      std::string_view pkg = cur.token();
      if (!pkg.starts_with("pkg=")) cur.fail("expected pkg=<path> after class id", pkg_col);
      ClassDef cls;
      cls.class_id = std::string(id);
      cls.package_path = detail::split_path(pkg.substr(4));
      bundle.classes.push_back(std::move(cls));
      cur_class = &bundle.classes.back();
      cur_method = nullptr;
      cur_block = nullptr;
    } else if (head == "@method") {
      if (!cur_class) cur.fail("@method outside of a class", head_col);
      std::size_t id_col = cur.pos;
      std::string_view id = cur.token();
      if (id.empty()) cur.fail("expected method id after @method", id_col);
      std::size_t entry_col = cur.pos;
      std::string_view entry = cur.token();
      if (!entry.starts_with("entry=")) cur.fail("expected entry=<index> after method id", entry_col);
      MethodDef m;
      m.method_id = std::string(id);
      auto num = entry.substr(6);
      auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), m.entry_block);
      if (ec != std::errc() || p != num.data() + num.size())
        cur.fail("invalid entry index", entry_col);
      cur_class->methods.push_back(std::move(m));
      cur_method = &cur_class->methods.back();
      cur_block = nullptr;
    } else if (head == "@block") {
      if (!cur_method) cur.fail("@block outside of a method", head_col);
      std::size_t idx_col = cur.pos;
      std::string_view idx = cur.token();
      if (idx.empty() || idx.back() != ':') cur.fail("expected '<index>:' after @block", idx_col);
      idx.remove_suffix(1);
      std::size_t declared = 0;
      auto [p, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), declared);
      if (ec != std::errc() || p != idx.data() + idx.size())
        cur.fail("invalid block index", idx_col);
      if (declared != cur_method->blocks.size())
        cur.fail("block index " + std::to_string(declared) + " out of sequence (expected " +
                     std::to_string(cur_method->blocks.size()) + ")", idx_col);
      cur_method->blocks.emplace_back();
      cur_block = &cur_method->blocks.back();
    } else if (head == "@edge") {
      if (!cur_method) cur.fail("@edge outside of a method", head_col);
      std::size_t a_col = cur.pos;
      std::string_view a = cur.token();
      std::size_t b_col = cur.pos;
      std::string_view b = cur.token();
      std::size_t ai = 0, bi = 0;
      auto [pa, ea] = std::from_chars(a.data(), a.data() + a.size(), ai);
      if (a.empty() || ea != std::errc() || pa != a.data() + a.size())
        cur.fail("invalid edge source index", a_col);
      auto [pb, eb] = std::from_chars(b.data(), b.data() + b.size(), bi);
      if (b.empty() || eb != std::errc() || pb != b.data() + b.size())
        cur.fail("invalid edge target index", b_col);
      cur_method->edges.emplace_back(ai, bi);
    } else if (head == "@dep") {
      std::size_t from_col = cur.pos;
      std::string_view from = cur.token();
      std::size_t to_col = cur.pos;
      std::string_view to = cur.token();
      std::size_t kind_col = cur.pos;
      std::string_view kind = cur.token();
      if (from.empty()) cur.fail("expected source class id after @dep", from_col);
      if (to.empty()) cur.fail("expected target class id", to_col);
      DependencyEdge e;
      e.from_class = std::string(from);
      e.to_class = std::string(to);
      if (kind == "inheritance") e.kind = EdgeKind::inheritance;
      else if (kind == "method_call") e.kind = EdgeKind::method_call;
      else if (kind == "field_reference") e.kind = EdgeKind::field_reference;
      else cur.fail("edge kind must be inheritance, method_call or field_reference", kind_col);
    bundle.dependency_edges.push_back(std::move(e));
    } else if (head.starts_with("@")) {
      cur.fail("unknown directive '" + std::string(head) + "'", head_col);
    } else {
      // opcode mnemonic inside the current block
      if (!cur_block) cur.fail("opcode outside of a block", head_col);
      auto byte = opcode_byte(head);
      if (!byte) cur.fail("unknown mnemonic '" + std::string(head) + "'", head_col);
      cur_block->opcodes.push_back(*byte);
    }
    cur.skip_ws();
    if (cur.pos < raw.size() && raw[cur.pos] != '#')
      cur.fail("trailing content", cur.pos);
    start = next;
  }

  if (!kind_set)
    throw BundleError(BundleError::Kind::semantic, "missing 'kind' in metadata", 0, 0, "meta");
  validate_bundle(bundle);
  return bundle;
}

// Serializes a bundle; parse_bundle(write_bundle(b)) == b for every valid b.
inline std::string write_bundle(const ProgramBundle& bundle) {
  std::ostringstream out;
  out << "@meta kind=" << (bundle.kind == BundleKind::app ? "app" : "library") << "\n";
  const auto& m = bundle.meta;
  if (bundle.kind == BundleKind::app) {
    if (!m.app_package.empty()) out << "@meta app_package=" << m.app_package << "\n";
    if (!m.application_namespace.empty())
      out << "@meta application_namespace=" << m.application_namespace << "\n";
    if (!m.launcher_activity_package.empty())
      out << "@meta launcher_activity_package=" << m.launcher_activity_package << "\n";
  } else {
    out << "@meta group_id=" << m.group_id << "\n";
    out << "@meta artifact_id=" << m.artifact_id << "\n";
    out << "@meta version=" << m.version << "\n";
    out << "@meta packaging=" << (m.packaging == Packaging::fat ? "fat" : "skinny") << "\n";
    for (const auto& d : m.declared_deps)
      out << "@meta dep=" << d.group_id << ":" << d.artifact_id << ":" << d.version << ":"
          << d.root_package << "\n";
  }
  for (const auto& cls : bundle.classes) {
    out << "@class " << cls.class_id << " pkg=" << detail::join_path(cls.package_path) << "\n";
    for (const auto& method : cls.methods) {
      out << "@method " << method.method_id << " entry=" << method.entry_block << "\n";
      for (std::size_t i = 0; i < method.blocks.size(); ++i) {
        out << "@block " << i << ":\n";
        for (auto op : method.blocks[i].opcodes) out << opcode_name(op) << "\n";
      }
      for (auto [a, b] : method.edges) out << "@edge " << a << " " << b << "\n";
    }
  }
  for (const auto& e : bundle.dependency_edges)
    out << "@dep " << e.from_class << " " << e.to_class << " " << to_string(e.kind) << "\n";
  return out.str();
}

}  // namespace tplscan
