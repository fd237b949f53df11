#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "skelfix/validation.hpp"

namespace skelfix {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EndpointError : std::runtime_error {
  int status;
  EndpointError(std::string msg, int status_)
      : std::runtime_error(std::move(msg)), status(status_) {}
};

struct EmptyBundle : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr const char* kDefaultPromptTemplate =
    "The following function is buggy. Reply with a complete fixed version of "
    "the whole function.\n\n{buggy_function}\n";

struct Config {
  int max_patches_per_bug = 200;
  std::size_t max_candidates_per_skeleton = 500;
  std::size_t max_mods_per_patch = 3;
  Budget budget;  // 5 h wall clock, 300 s per test
  double top_p = 0.95;
  double temperature = 0.8;
  std::string test_command;
  std::optional<std::string> llm_endpoint;
  std::string prompt_template = kDefaultPromptTemplate;
  int compile_error_exit = 2;
  bool keep_going = false;
  int validation_workers = 1;
  std::optional<std::string> extra_sources;
  std::optional<std::string> fl_path;
  std::optional<std::string> report_path;
  bool dump_symbols = false;

  void validate() const {
    if (max_patches_per_bug <= 0)
      throw ConfigError("max_patches_per_bug must be positive");
    if (max_candidates_per_skeleton == 0)
      throw ConfigError("max_candidates_per_skeleton must be positive");
    if (max_mods_per_patch == 0)
      throw ConfigError("max_mods_per_patch must be positive");
    if (top_p <= 0.0 || top_p > 1.0)
      throw ConfigError("top_p must be in (0, 1]");
    if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
    if (budget.per_test_timeout.count() <= 0 ||
        budget.wall_clock_limit < budget.per_test_timeout)
      throw ConfigError(
          "budget requires wall_clock_limit > per_test_timeout > 0");
    if (validation_workers < 1)
      throw ConfigError("validation_workers must be >= 1");
  }
};

// File values override defaults; CLI flags are applied on top by the caller.
inline Config config_from_json(const nlohmann::json& j) {
  Config cfg;
  if (j.contains("max_patches_per_bug"))
    cfg.max_patches_per_bug = j["max_patches_per_bug"].get<int>();
  if (j.contains("max_candidates_per_skeleton"))
    cfg.max_candidates_per_skeleton =
        j["max_candidates_per_skeleton"].get<std::size_t>();
  if (j.contains("max_mods_per_patch"))
    cfg.max_mods_per_patch = j["max_mods_per_patch"].get<std::size_t>();
  if (j.contains("wall_clock_limit_seconds"))
    cfg.budget.wall_clock_limit = std::chrono::milliseconds(
        static_cast<long long>(j["wall_clock_limit_seconds"].get<double>() *
                               1000.0));
  if (j.contains("per_test_timeout_seconds"))
    cfg.budget.per_test_timeout = std::chrono::milliseconds(
        static_cast<long long>(j["per_test_timeout_seconds"].get<double>() *
                               1000.0));
  if (j.contains("top_p")) cfg.top_p = j["top_p"].get<double>();
  if (j.contains("temperature"))
    cfg.temperature = j["temperature"].get<double>();
  if (j.contains("test_command"))
    cfg.test_command = j["test_command"].get<std::string>();
  if (j.contains("llm_endpoint") && !j["llm_endpoint"].is_null())
    cfg.llm_endpoint = j["llm_endpoint"].get<std::string>();
  if (j.contains("prompt_template"))
    cfg.prompt_template = j["prompt_template"].get<std::string>();
  if (j.contains("compile_error_exit"))
    cfg.compile_error_exit = j["compile_error_exit"].get<int>();
  if (j.contains("keep_going")) cfg.keep_going = j["keep_going"].get<bool>();
  if (j.contains("validation_workers"))
    cfg.validation_workers = j["validation_workers"].get<int>();
  return cfg;
}

inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }
  return config_from_json(j);
}

struct FaultRanking {
  struct Entry {
    std::string file;
    std::string function;
    double score = 0.0;
  };
  std::vector<Entry> entries;

  static FaultRanking load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("invalid fl.json: ") + e.what());
    }
    FaultRanking fl;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& e : j) {
      Entry entry;
      entry.file = e.value("file", "");
      entry.function = e.at("function").get<std::string>();
      entry.score = e.value("score", 0.0);
      if (entry.score > prev)
        throw ConfigError("fl.json scores must be non-increasing");
      prev = entry.score;
      fl.entries.push_back(std::move(entry));
    }
    return fl;
  }
};

// Parses *.patch.src files (whole replacement functions) in filename order.
// Unparseable patches are logged and skipped; the list is truncated at
// max_patches_per_bug.
inline std::vector<GuidingPatch> ingest_guiding_patches(
    const std::filesystem::path& patches_dir, const Config& cfg,
    std::vector<std::string>* skip_log = nullptr) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(patches_dir)) {
    for (const auto& e : fs::directory_iterator(patches_dir)) {
      if (!e.is_regular_file()) continue;
      std::string name = e.path().filename().string();
      if (name.size() > 10 &&
          name.substr(name.size() - 10) == ".patch.src")
        files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<GuidingPatch> out;
  for (const fs::path& f : files) {
    if (static_cast<int>(out.size()) >= cfg.max_patches_per_bug) break;
    std::ifstream in(f);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    GuidingPatch g;
    g.patch_id = static_cast<int>(out.size());
    g.source_name = f.filename().string();
    g.raw_text = text;
    try {
      g.unit = parse_function(text);
    } catch (const ParseError& e) {
      if (skip_log)
        skip_log->push_back(f.filename().string() + ": " + e.what());
      continue;
    }
    out.push_back(std::move(g));
  }
  if (out.empty()) throw EmptyBundle("no parseable guiding patches");
  return out;
}

namespace detail {

struct ParsedUrl {
  std::string host_port;  // scheme://host:port
  std::string path;
};

inline ParsedUrl split_url(const std::string& url) {
  ParsedUrl u;
  std::size_t scheme = url.find("://");
  std::size_t path_start =
      url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) {
    u.host_port = url;
    u.path = "/";
  } else {
    u.host_port = url.substr(0, path_start);
    u.path = url.substr(path_start);
  }
  return u;
}

}  // namespace detail

// POSTs {prompt, n, top_p, temperature} to the endpoint and expects
// {"patches": ["...", ...]}.
inline std::vector<GuidingPatch> ingest_from_endpoint(
    const std::string& endpoint, const std::string& buggy_function_text,
    const Config& cfg, std::vector<std::string>* skip_log = nullptr) {
  detail::ParsedUrl url = detail::split_url(endpoint);
  httplib::Client client(url.host_port);
  client.set_read_timeout(60, 0);

  std::string prompt = cfg.prompt_template;
  const std::string key = "{buggy_function}";
  std::size_t pos = prompt.find(key);
  if (pos != std::string::npos)
    prompt.replace(pos, key.size(), buggy_function_text);

  nlohmann::json body{{"prompt", prompt},
                      {"n", cfg.max_patches_per_bug},
                      {"top_p", cfg.top_p},
                      {"temperature", cfg.temperature}};
  httplib::Result res =
      client.Post(url.path, body.dump(), "application/json");
  if (!res) throw EndpointError("endpoint unreachable: " + endpoint, 0);
  if (res->status != 200)
    throw EndpointError("endpoint returned HTTP " +
                            std::to_string(res->status),
                        res->status);
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    throw EndpointError("endpoint returned invalid JSON", res->status);
  }
  if (!parsed.contains("patches") || !parsed["patches"].is_array())
    throw EndpointError("endpoint response lacks a patches array",
                        res->status);

  std::vector<GuidingPatch> out;
  for (const auto& p : parsed["patches"]) {
    if (static_cast<int>(out.size()) >= cfg.max_patches_per_bug) break;
    GuidingPatch g;
    g.patch_id = static_cast<int>(out.size());
    g.source_name = "endpoint#" + std::to_string(g.patch_id);
    g.raw_text = p.get<std::string>();
    try {
      g.unit = parse_function(g.raw_text);
    } catch (const ParseError& e) {
      if (skip_log) skip_log->push_back(g.source_name + ": " + e.what());
      continue;
    }
    out.push_back(std::move(g));
  }
  if (out.empty()) throw EmptyBundle("endpoint produced no parseable patches");
  return out;
}

namespace detail {

inline bool signature_matches(const AstNode& a, const AstNode& b) {
  if (a.token != b.token || a.kind != b.kind) return false;
  std::vector<std::string> pa, pb;
  for (const auto& c : a.children)
    if (c.kind == NodeKind::Parameter) pa.push_back(c.children[0].token);
  for (const auto& c : b.children)
    if (c.kind == NodeKind::Parameter) pb.push_back(c.children[0].token);
  return pa == pb;
}

}  // namespace detail

// Guides usable for one target function: the patch must contain a function
// with the same name and parameter types. Edit scripts are computed here.
inline std::vector<GuidingPatch> prepare_guides_for_function(
    const std::vector<GuidingPatch>& guides, const SourceUnit& buggy_unit,
    const std::string& fn, std::vector<std::string>* skip_log = nullptr) {
  std::vector<GuidingPatch> out;
  const AstNode* buggy_fn = find_method(buggy_unit, fn);
  if (!buggy_fn) return out;
  const AstNode* buggy_body = method_body(*buggy_fn);
  for (const GuidingPatch& g : guides) {
    const AstNode* patch_fn = find_method(g.unit, fn);
    if (!patch_fn || !detail::signature_matches(*buggy_fn, *patch_fn)) {
      if (skip_log)
        skip_log->push_back(g.source_name + ": no function matching '" + fn +
                            "'");
      continue;
    }
    GuidingPatch ready = g;
    const AstNode* patch_body = method_body(*patch_fn);
    ready.edit_script = extract_modifications(
        *buggy_body, *patch_body, match_trees(*buggy_body, *patch_body));
    ready.insert_update_count = count_insert_update(ready.edit_script);
    out.push_back(std::move(ready));
  }
  return out;
}

struct RunResult {
  int exit_code = 20;
  RepairReport report;
  std::optional<nlohmann::json> symbols;
  std::vector<std::string> log;
};

namespace detail {

inline void merge_report(RepairReport& into, RepairReport&& part,
                         const std::string& function) {
  for (auto& p : part.plausible) {
    p.provenance["function"] = function;
    into.plausible.push_back(std::move(p));
  }
  into.stats.candidates_generated += part.stats.candidates_generated;
  into.stats.candidates_validated += part.stats.candidates_validated;
  into.stats.plausible += part.stats.plausible;
  into.stats.failing += part.stats.failing;
  into.stats.compile_errors += part.stats.compile_errors;
  into.stats.timeouts += part.stats.timeouts;
  for (auto& g : part.stats.guides) {
    g["function"] = function;
    into.stats.guides.push_back(std::move(g));
  }
  if (part.status == "budget_exhausted") into.status = "budget_exhausted";
}

}  // namespace detail

// End-to-end repair of one bug directory. Exit code 0 when a plausible patch
// was found, 10 when none was, 20 on configuration errors.
inline RunResult run_repair(const std::filesystem::path& bug_dir,
                            Config cfg) {
  namespace fs = std::filesystem;
  RunResult result;
  auto started = std::chrono::steady_clock::now();

  try {
    cfg.validate();
    if (cfg.test_command.empty())
      throw ConfigError("test_command is required");

    std::ifstream meta_in(bug_dir / "bug.json");
    if (!meta_in) throw ConfigError("missing bug.json");
    nlohmann::json meta = nlohmann::json::parse(meta_in);
    std::string bug_id = meta.value("id", bug_dir.filename().string());
    std::string target_fn = meta.at("function").get<std::string>();

    std::ifstream buggy_in(bug_dir / "buggy.src");
    if (!buggy_in) throw ConfigError("missing buggy.src");
    std::string buggy_text((std::istreambuf_iterator<char>(buggy_in)),
                           std::istreambuf_iterator<char>());
    SourceUnit buggy_unit;
    try {
      buggy_unit = parse_unit(buggy_text);
    } catch (const ParseError& e) {
      throw ConfigError(std::string("buggy.src does not parse: ") + e.what());
    }

    std::vector<SourceUnit> extra_units;
    if (cfg.extra_sources) {
      for (const auto& e : fs::directory_iterator(*cfg.extra_sources)) {
        if (e.path().extension() != ".src") continue;
        std::ifstream in(e.path());
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        try {
          extra_units.push_back(parse_unit(text));
        } catch (const ParseError& ex) {
          result.log.push_back("extra source " + e.path().filename().string() +
                               " skipped: " + ex.what());
        }
      }
    }

    // guiding patches: endpoint when configured, files otherwise
    std::vector<GuidingPatch> raw_guides;
    if (cfg.llm_endpoint) {
      const AstNode* fn = find_method(buggy_unit, target_fn);
      if (!fn) throw ConfigError("bug.json names an unknown function");
      raw_guides = ingest_from_endpoint(*cfg.llm_endpoint, method_text(*fn),
                                        cfg, &result.log);
    } else {
      raw_guides =
          ingest_guiding_patches(bug_dir / "patches", cfg, &result.log);
    }

    if (cfg.dump_symbols) {
      SymbolTable table = collect_scope(buggy_unit, target_fn, extra_units);
      result.symbols = to_json(table);
    }

    // ranked function list: fl.json when present, else the metadata target
    std::vector<std::string> functions;
    fs::path fl_file = cfg.fl_path ? fs::path(*cfg.fl_path)
                                   : bug_dir / "fl.json";
    if (fs::exists(fl_file)) {
      FaultRanking fl = FaultRanking::load(fl_file);
      for (auto& e : fl.entries) functions.push_back(e.function);
      if (functions.empty())
        throw ConfigError("fl.json lists no functions");
    } else {
      functions.push_back(target_fn);
    }

    RepairReport report;
    report.bug_id = bug_id;
    report.status = "no_plausible";

    RepairOptions opts;
    opts.keep_going = cfg.keep_going;
    opts.validation_workers = cfg.validation_workers;
    opts.validation.test_command = cfg.test_command;
    opts.validation.compile_error_exit = cfg.compile_error_exit;
    opts.caps.max_candidates_per_skeleton = cfg.max_candidates_per_skeleton;
    opts.caps.max_mods_per_patch = cfg.max_mods_per_patch;

    for (std::size_t i = 0; i < functions.size(); ++i) {
      auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - started);
      auto remaining = cfg.budget.wall_clock_limit - elapsed;
      if (remaining.count() <= 0) {
        report.status = "budget_exhausted";
        break;
      }
      // remaining wall clock is split evenly across remaining functions and
      // re-balanced after each one
      Budget fn_budget;
      fn_budget.wall_clock_limit =
          remaining / static_cast<long>(functions.size() - i);
      fn_budget.per_test_timeout = cfg.budget.per_test_timeout;

      const std::string& fn = functions[i];
      if (!find_method(buggy_unit, fn)) {
        result.log.push_back("ranked function '" + fn +
                             "' not found in buggy.src; skipped");
        continue;
      }
      std::vector<GuidingPatch> guides = prepare_guides_for_function(
          raw_guides, buggy_unit, fn, &result.log);
      if (guides.empty()) {
        result.log.push_back("no guides match function '" + fn + "'");
        continue;
      }

      RepairContext ctx;
      ctx.buggy_unit = &buggy_unit;
      ctx.function = fn;
      ctx.extra_units = &extra_units;
      ctx.project_dir = bug_dir;
      ctx.patched_filename = "buggy.src";
      ctx.bug_id = bug_id;

      RepairReport part =
          repair_loop(std::move(guides), ctx, fn_budget, opts);
      detail::merge_report(report, std::move(part), fn);
      if (!report.plausible.empty() && !cfg.keep_going) break;
    }

    report.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    if (!report.plausible.empty()) report.status = "plausible_found";

    fs::path report_path = cfg.report_path ? fs::path(*cfg.report_path)
                                           : bug_dir / "report.json";
    std::ofstream out(report_path);
    out << to_json(report).dump(2) << "\n";

    result.report = std::move(report);
    result.exit_code = result.report.plausible.empty() ? 10 : 0;
    return result;
  } catch (const ConfigError& e) {
    result.log.push_back(std::string("config error: ") + e.what());
  } catch (const EmptyBundle& e) {
    result.log.push_back(std::string("config error: ") + e.what());
  } catch (const EndpointError& e) {
    result.log.push_back(std::string("endpoint error: ") + e.what());
  } catch (const UnknownFunction& e) {
    result.log.push_back(std::string("config error: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    result.log.push_back(std::string("config error: ") + e.what());
  }
  result.exit_code = 20;
  result.report.status = "config_error";
  return result;
}

}  // namespace skelfix
