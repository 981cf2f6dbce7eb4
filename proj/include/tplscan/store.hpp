#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tplscan/bundle.hpp"
#include "tplscan/bundle_io.hpp"
#include "tplscan/decouple.hpp"
#include "tplscan/features.hpp"

namespace tplscan {

struct LibraryKey {
  std::string group_id;
  std::string artifact_id;
  std::string version;

  auto operator<=>(const LibraryKey&) const = default;

  std::string to_string() const { return group_id + ":" + artifact_id + ":" + version; }
};

struct LibraryRecord {
  LibraryKey key;
  ModuleFeatures features;
  Hash128 source_bundle_digest;

  bool operator==(const LibraryRecord&) const = default;
};

class DbError : public std::runtime_error {
public:
  explicit DbError(const std::string& what) : std::runtime_error(what) {}
};

// Signature database: records plus the indexes the two-stage search consults.
// Indexes are always rebuilt from the records, so persistence only stores the
// records themselves.
class SignatureDb {
public:
  static constexpr std::uint32_t kFormatVersion = 1;

  const std::map<LibraryKey, LibraryRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  void add_record(LibraryRecord record) {
    auto it = records_.find(record.key);
    if (it != records_.end())
      throw DbError("duplicate record " + record.key.to_string() + " (existing record has " +
                    std::to_string(it->second.features.method_count()) + " methods)");
    index_record(record);
    records_.emplace(record.key, std::move(record));
  }

  // Adds the host candidate of a library bundle. Declared-dep splits are not
  // stored under the host key; they belong to their own coordinates.
  std::vector<std::string> add_library(const ProgramBundle& bundle) {
    if (bundle.kind != BundleKind::library) throw DbError("bundle is not a library");
    auto split = split_skinny_deps(bundle);
    LibraryRecord record;
    record.key = {bundle.meta.group_id, bundle.meta.artifact_id, bundle.meta.version};
    record.features = module_features(split.candidates.front().classes);
    record.source_bundle_digest = Hash128::of(write_bundle(bundle));
    add_record(std::move(record));
    return split.warnings;
  }

  const LibraryRecord* find(const LibraryKey& key) const {
    auto it = records_.find(key);
    return it == records_.end() ? nullptr : &it->second;
  }

  std::vector<LibraryKey> query_t1(const Hash128& t1) const {
    auto it = index_t1_.find(t1);
    return it == index_t1_.end() ? std::vector<LibraryKey>{} : it->second;
  }

  std::vector<LibraryKey> query_pkg(const std::string& root) const {
    auto it = index_pkg_.find(root);
    return it == index_pkg_.end() ? std::vector<LibraryKey>{} : it->second;
  }

  const std::map<std::size_t, std::vector<LibraryKey>>& by_class_count() const {
    return index_class_count_;
  }

  bool operator==(const SignatureDb& other) const {
    return records_ == other.records_ && index_t1_ == other.index_t1_ &&
           index_pkg_ == other.index_pkg_ && index_class_count_ == other.index_class_count_;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DbError("cannot open '" + path + "' for writing");
    std::string blob = serialize();
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw DbError("short write to '" + path + "'");
  }

  static SignatureDb load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DbError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
  }

  std::string serialize() const {
    Writer w;
    w.raw(kMagic, 6);
    w.u32(kFormatVersion);
    w.u64(records_.size());
    for (const auto& [key, rec] : records_) {
      w.str(key.group_id);
      w.str(key.artifact_id);
      w.str(key.version);
      w.hash(rec.source_bundle_digest);
      const auto& f = rec.features;
      w.hash(f.t1);
      w.u64(f.class_count);
      w.u64(f.coarse_set.size());
      for (const auto& h : f.coarse_set) w.hash(h);
      w.u64(f.package_roots.size());
      for (const auto& r : f.package_roots) w.str(r);
      w.u64(f.fine_map.size());
      for (const auto& [hash, entries] : f.fine_map) {
        w.hash(hash);
        w.u64(entries.size());
        for (const auto& e : entries) {
          w.str(e.ref.class_id);
          w.str(e.ref.method_id);
          w.u32(e.digest.block_size);
          w.str(e.digest.digest);
          w.str(e.digest.double_digest);
        }
      }
    }
    return std::move(w.out);
  }

  static SignatureDb deserialize(const std::string& blob) {
    Reader r{blob, 0};
    char magic[6];
    r.raw(magic, 6);
    if (std::memcmp(magic, kMagic, 6) != 0) throw DbError("not a signature database (bad magic)");
    std::uint32_t version = r.u32();
    if (version != kFormatVersion)
      throw DbError("unsupported format version " + std::to_string(version) + " (expected " +
                    std::to_string(kFormatVersion) + ")");
    std::uint64_t count = r.u64();
    SignatureDb db;
    for (std::uint64_t i = 0; i < count; ++i) {
      LibraryRecord rec;
      rec.key.group_id = r.str();
      rec.key.artifact_id = r.str();
      rec.key.version = r.str();
      rec.source_bundle_digest = r.hash();
      auto& f = rec.features;
      f.t1 = r.hash();
      f.class_count = r.u64();
      std::uint64_t n_coarse = r.u64();
      f.coarse_set.resize(n_coarse);
      for (auto& h : f.coarse_set) h = r.hash();
      std::uint64_t n_roots = r.u64();
      f.package_roots.resize(n_roots);
      for (auto& root : f.package_roots) root = r.str();
      std::uint64_t n_fine = r.u64();
      for (std::uint64_t j = 0; j < n_fine; ++j) {
        Hash128 h = r.hash();
        std::uint64_t n_entries = r.u64();
        auto& entries = f.fine_map[h];
        entries.resize(n_entries);
        for (auto& e : entries) {
          e.ref.class_id = r.str();
          e.ref.method_id = r.str();
          e.digest.block_size = r.u32();
          e.digest.digest = r.str();
          e.digest.double_digest = r.str();
        }
      }
      db.add_record(std::move(rec));
    }
    if (r.pos != blob.size()) throw DbError("trailing bytes after record data");
    return db;
  }

private:
  static constexpr const char kMagic[7] = "SIGDB\x01";

  struct Writer {
    std::string out;
    void raw(const void* p, std::size_t n) { out.append(static_cast<const char*>(p), n); }
    void u32(std::uint32_t v) {
      for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
      for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
    }
    void str(const std::string& s) {
      u32(static_cast<std::uint32_t>(s.size()));
      out += s;
    }
    void hash(const Hash128& h) { raw(h.bytes.data(), h.bytes.size()); }
  };

  struct Reader {
    const std::string& in;
    std::size_t pos;
    void need(std::size_t n) const {
      if (pos + n > in.size()) throw DbError("truncated database file");
    }
    void raw(void* p, std::size_t n) {
      need(n);
      std::memcpy(p, in.data() + pos, n);
      pos += n;
    }
    std::uint32_t u32() {
      need(4);
      std::uint32_t v = 0;
      for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(in[pos + i])) << (8 * i);
      pos += 4;
      return v;
    }
    std::uint64_t u64() {
      need(8);
      std::uint64_t v = 0;
      for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(in[pos + i])) << (8 * i);
      pos += 8;
      return v;
    }
    std::string str() {
      std::uint32_t n = u32();
      need(n);
      std::string s(in, pos, n);
      pos += n;
      return s;
    }
    Hash128 hash() {
      Hash128 h;
      raw(h.bytes.data(), h.bytes.size());
      return h;
    }
  };

  // Index entries stay sorted so lookups are independent of insertion order.
  static void sorted_insert(std::vector<LibraryKey>& keys, const LibraryKey& key) {
    keys.insert(std::lower_bound(keys.begin(), keys.end(), key), key);
  }

  void index_record(const LibraryRecord& record) {
    sorted_insert(index_t1_[record.features.t1], record.key);
    for (const auto& root : record.features.package_roots)
      sorted_insert(index_pkg_[root], record.key);
    sorted_insert(index_class_count_[record.features.class_count], record.key);
  }

  std::map<LibraryKey, LibraryRecord> records_;
  std::unordered_map<Hash128, std::vector<LibraryKey>, Hash128Hasher> index_t1_;
  std::map<std::string, std::vector<LibraryKey>> index_pkg_;
  std::map<std::size_t, std::vector<LibraryKey>> index_class_count_;
};

}  // namespace tplscan
