// tplscan: build signature databases from library bundles, scan app bundles,
// and annotate matches with known vulnerabilities.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tplscan/bundle_io.hpp"
#include "tplscan/corpusgen.hpp"
#include "tplscan/eval.hpp"
#include "tplscan/match.hpp"
#include "tplscan/mutate.hpp"
#include "tplscan/report_json.hpp"
#include "tplscan/store.hpp"
#include "tplscan/vulndb.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;   // some inputs failed, work continued
constexpr int kExitMissing = 2;   // required database missing
constexpr int kExitFindings = 3;  // --fail-on-findings and findings present

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) std::cout << content;
  else write_file(out_path, content);
}

struct ThresholdFlags {
  double theta = -1, delta = -1, coarse_overlap = -1, class_ratio = -1;

  void attach(CLI::App* cmd) {
    auto unit = CLI::Range(0.0, 1.0);
    cmd->add_option("--theta", theta, "fuzzy method similarity threshold")->check(unit);
    cmd->add_option("--delta", delta, "version similarity threshold")->check(unit);
    cmd->add_option("--coarse-overlap", coarse_overlap, "coarse containment threshold")->check(unit);
    cmd->add_option("--class-ratio", class_ratio, "class count ratio prefilter")->check(unit);
  }

  tplscan::MatcherConfig resolve() const {
    tplscan::MatcherConfig config;
    if (theta >= 0) config.theta = theta;
    if (delta >= 0) config.delta = delta;
    if (coarse_overlap >= 0) config.coarse_overlap = coarse_overlap;
    if (class_ratio >= 0) config.class_ratio = class_ratio;
    if (!config.valid()) throw CLI::ValidationError("thresholds must lie in [0,1]");
    return config;
  }
};

int cmd_build_db(const std::string& dir, const std::string& out_path) {
  auto start = std::chrono::steady_clock::now();
  if (!fs::is_directory(dir)) {
    std::cerr << "error: '" << dir << "' is not a directory\n";
    return kExitPartial;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".bundle")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) std::cerr << "warning: no *.bundle files in '" << dir << "'\n";

  tplscan::SignatureDb db;
  std::size_t failed = 0;
  for (const auto& file : files) {
    try {
      auto bundle = tplscan::parse_bundle(read_file(file.string()));
      auto warnings = db.add_library(bundle);
      for (const auto& w : warnings) std::cerr << file.string() << ": warning: " << w << "\n";
    } catch (const std::exception& e) {
      std::cerr << file.string() << ": error: " << e.what() << "\n";
      ++failed;
    }
  }
  db.save(out_path);
  std::size_t methods = 0;
  for (const auto& [key, rec] : db.records()) methods += rec.features.method_count();
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "records=" << db.size() << " methods=" << methods << " elapsed=" << elapsed << "\n";
  return failed ? kExitPartial : kExitOk;
}

int cmd_scan(const std::string& app_path, const std::string& db_path,
             const std::string& vulndb_path, const std::string& out_path,
             const ThresholdFlags& flags, unsigned jobs, bool fail_on_findings) {
  if (!fs::is_regular_file(db_path)) {
    std::cerr << "error: signature database '" << db_path << "' not found\n";
    return kExitMissing;
  }
  auto config = flags.resolve();
  auto db = tplscan::SignatureDb::load(db_path);
  auto bundle = tplscan::parse_bundle(read_file(app_path));
  auto report = tplscan::identify(bundle, db, config, jobs);

  nlohmann::json j;
  if (vulndb_path.empty()) {
    j = tplscan::report_json(report);
  } else {
    auto vulndb = tplscan::vuln_import(read_file(vulndb_path));
    auto findings = tplscan::annotate(report, vulndb);
    j = tplscan::report_json(report, &findings);
    if (fail_on_findings && !findings.empty()) {
      emit(out_path, j.dump(2) + "\n");
      return kExitFindings;
    }
  }
  emit(out_path, j.dump(2) + "\n");
  return kExitOk;
}

int cmd_vuln_import(const std::string& in_path, const std::string& out_path) {
  auto db = tplscan::vuln_import(read_file(in_path));
  // re-emit normalized: versions sorted/deduped, duplicates merged
  std::string out;
  for (const auto& rec : db.records()) {
    nlohmann::json j{
        {"vuln_id", rec.vuln_id},
        {"source", rec.source == tplscan::VulnSource::cve ? "cve" : "security_bug"},
        {"group_id", rec.group_id},
        {"artifact_id", rec.artifact_id},
        {"affected_versions", rec.affected_versions},
        {"cvss", rec.cvss},
        {"severity", tplscan::to_string(rec.severity)},
        {"description", rec.description},
    };
    out += j.dump();
    out += "\n";
  }
  emit(out_path, out);
  std::cerr << "imported " << db.records().size() << " vulnerability records\n";
  return kExitOk;
}

int cmd_mutate(const std::string& in_path, const std::string& spec_path, std::uint64_t seed,
               const std::vector<std::string>& op_flags, const std::string& out_path) {
  tplscan::MutationSpec spec;
  if (!spec_path.empty()) {
    spec = tplscan::MutationSpec::from_json(nlohmann::json::parse(read_file(spec_path)));
  } else {
    spec.seed = seed;
    for (const auto& flag : op_flags) {
      // kind or kind:rate
      nlohmann::json op;
      auto colon = flag.find(':');
      op["kind"] = flag.substr(0, colon);
      if (colon != std::string::npos) op["rate"] = std::stod(flag.substr(colon + 1));
      spec.ops.push_back(
          tplscan::MutationSpec::from_json({{"seed", 0}, {"ops", {op}}}).ops.front());
    }
  }
  auto bundle = tplscan::parse_bundle(read_file(in_path));
  auto result = tplscan::mutate(bundle, spec);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  emit(out_path, tplscan::write_bundle(result.bundle));
  return kExitOk;
}

int cmd_eval(const std::string& manifest_path, const std::string& db_path,
             const std::string& out_path, const ThresholdFlags& flags, unsigned jobs) {
  if (!fs::is_regular_file(db_path)) {
    std::cerr << "error: signature database '" << db_path << "' not found\n";
    return kExitMissing;
  }
  auto config = flags.resolve();
  auto db = tplscan::SignatureDb::load(db_path);
  nlohmann::json manifest = nlohmann::json::parse(read_file(manifest_path));
  if (!manifest.is_object() || manifest.empty())
    throw std::runtime_error("manifest must be a non-empty object mapping app id to truth list");
  fs::path apps_dir = fs::path(manifest_path).parent_path() / "apps";

  tplscan::EvalResult acc;
  for (const auto& [app_id, truth_json] : manifest.items()) {
    std::vector<tplscan::GroundTruthEntry> truth;
    for (const auto& t : truth_json)
      truth.push_back({t.at("group").get<std::string>(), t.at("artifact").get<std::string>(),
                       t.at("version").get<std::string>()});
    auto bundle = tplscan::parse_bundle(read_file((apps_dir / (app_id + ".bundle")).string()));
    auto report = tplscan::identify(bundle, db, config, jobs);
    tplscan::accumulate_eval(acc, report, truth);
  }

  auto level = [](const tplscan::PrCounts& c) {
    return nlohmann::json{{"tp", c.tp},           {"fp", c.fp},     {"fn", c.fn},
                          {"precision", c.precision()}, {"recall", c.recall()}, {"f1", c.f1()}};
  };
  nlohmann::json j{{"apps", acc.apps},
                   {"library_level", level(acc.library_level)},
                   {"version_level", level(acc.version_level)}};
  emit(out_path, j.dump(2) + "\n");
  std::cerr << "library P=" << acc.library_level.precision() << " R=" << acc.library_level.recall()
            << " | version P=" << acc.version_level.precision()
            << " R=" << acc.version_level.recall() << "\n";
  return kExitOk;
}

int cmd_export(const std::string& db_path, const std::string& out_path) {
  if (!fs::is_regular_file(db_path)) {
    std::cerr << "error: signature database '" << db_path << "' not found\n";
    return kExitMissing;
  }
  emit(out_path, tplscan::export_jsonl(tplscan::SignatureDb::load(db_path)));
  return kExitOk;
}

int cmd_gen_corpus(const tplscan::CorpusSpec& spec, const std::string& out_dir) {
  auto corpus = tplscan::generate_corpus(spec);
  fs::create_directories(fs::path(out_dir) / "libs");
  fs::create_directories(fs::path(out_dir) / "apps");
  for (const auto& lib : corpus.libraries) {
    std::string name = lib.meta.group_id + "_" + lib.meta.artifact_id + "_" + lib.meta.version +
                       ".bundle";
    write_file((fs::path(out_dir) / "libs" / name).string(), tplscan::write_bundle(lib));
  }
  nlohmann::json manifest = nlohmann::json::object();
  for (const auto& app : corpus.apps) {
    std::string app_id = app.meta.app_package;
    write_file((fs::path(out_dir) / "apps" / (app_id + ".bundle")).string(),
               tplscan::write_bundle(app));
    manifest[app_id] = nlohmann::json::array();
    for (const auto& t : corpus.manifest.at(app_id))
      manifest[app_id].push_back(
          {{"group", t.group_id}, {"artifact", t.artifact_id}, {"version", t.version}});
  }
  write_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  std::cout << "libraries=" << corpus.libraries.size() << " apps=" << corpus.apps.size() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"third-party library version scanner"};
  app.require_subcommand(1);

  // build-db
  std::string bd_dir, bd_out;
  auto* build_db = app.add_subcommand("build-db", "build a signature database from library bundles");
  build_db->add_option("dir", bd_dir, "directory of *.bundle library files")->required();
  build_db->add_option("--out", bd_out, "output .sigdb path")->required();

  // scan
  std::string sc_app, sc_db, sc_vulndb, sc_out;
  unsigned sc_jobs = 1;
  bool sc_fail = false;
  ThresholdFlags sc_flags;
  auto* scan = app.add_subcommand("scan", "scan an app bundle against a signature database");
  scan->add_option("app", sc_app, "app bundle file")->required();
  scan->add_option("--db", sc_db, "signature database")->required();
  scan->add_option("--vulndb", sc_vulndb, "vulnerability JSON-lines file");
  scan->add_option("--out", sc_out, "report path (default stdout)");
  scan->add_option("--jobs", sc_jobs, "worker threads")->check(CLI::PositiveNumber);
  scan->add_flag("--fail-on-findings", sc_fail, "exit 3 when vulnerabilities are found");
  sc_flags.attach(scan);

  // vuln-import
  std::string vi_in, vi_out;
  auto* vuln = app.add_subcommand("vuln-import", "validate and normalize a vulnerability feed");
  vuln->add_option("jsonl", vi_in, "vulnerability JSON-lines file")->required();
  vuln->add_option("--out", vi_out, "normalized output path (default stdout)");

  // mutate
  std::string mu_in, mu_spec, mu_out;
  std::uint64_t mu_seed = 0;
  std::vector<std::string> mu_ops;
  auto* mut = app.add_subcommand("mutate", "apply obfuscation transforms to a bundle");
  mut->add_option("bundle", mu_in, "input bundle")->required();
  mut->add_option("--spec", mu_spec, "mutation spec JSON file");
  mut->add_option("--seed", mu_seed, "seed when using --op flags");
  mut->add_option("--op", mu_ops, "transform, e.g. rename or junk:0.05 (repeatable)");
  mut->add_option("--out", mu_out, "output bundle path (default stdout)");

  // eval
  std::string ev_manifest, ev_db, ev_out;
  unsigned ev_jobs = 1;
  ThresholdFlags ev_flags;
  auto* eval = app.add_subcommand("eval", "score scans against a ground-truth manifest");
  eval->add_option("manifest", ev_manifest, "corpus manifest.json (apps/ beside it)")->required();
  eval->add_option("--db", ev_db, "signature database")->required();
  eval->add_option("--out", ev_out, "metrics output path (default stdout)");
  eval->add_option("--jobs", ev_jobs, "worker threads")->check(CLI::PositiveNumber);
  ev_flags.attach(eval);

  // export
  std::string ex_db, ex_out;
  auto* exp = app.add_subcommand("export", "dump a signature database as JSON lines");
  exp->add_option("db", ex_db, "signature database")->required();
  exp->add_option("--out", ex_out, "output path (default stdout)");

  // gen-corpus
  tplscan::CorpusSpec gc_spec;
  std::string gc_out;
  auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic ground-truth corpus");
  gen->add_option("--out", gc_out, "output directory")->required();
  gen->add_option("--seed", gc_spec.seed, "generation seed");
  gen->add_option("--libraries", gc_spec.n_libraries, "number of libraries");
  gen->add_option("--versions", gc_spec.versions_per_library, "versions per library");
  gen->add_option("--apps", gc_spec.apps, "number of apps");
  gen->add_option("--edit-rate", gc_spec.inter_version_edit_rate, "fraction of methods edited per version")
      ->check(CLI::Range(0.0, 1.0));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build_db) return cmd_build_db(bd_dir, bd_out);
    if (*scan) return cmd_scan(sc_app, sc_db, sc_vulndb, sc_out, sc_flags, sc_jobs, sc_fail);
    if (*vuln) return cmd_vuln_import(vi_in, vi_out);
    if (*mut) return cmd_mutate(mu_in, mu_spec, mu_seed, mu_ops, mu_out);
    if (*eval) return cmd_eval(ev_manifest, ev_db, ev_out, ev_flags, ev_jobs);
    if (*exp) return cmd_export(ex_db, ex_out);
    if (*gen) return cmd_gen_corpus(gc_spec, gc_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitOk;
}
