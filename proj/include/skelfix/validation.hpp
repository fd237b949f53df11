#pragma once

#include <fcntl.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "skelfix/instantiation.hpp"

namespace skelfix {

struct WorkspaceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GuidingPatch {
  int patch_id = 0;
  std::string source_name;
  SourceUnit unit;
  std::string raw_text;
  EditScript edit_script;
  int insert_update_count = 0;
};

inline int count_insert_update(const EditScript& script) {
  int n = 0;
  for (const Modification& m : script.modifications)
    if (m.op != ModOp::Delete) ++n;
  return n;
}

// Guides that bring more new material (Insert/Update modifications) rank
// higher; ties fall back to the ingestion order.
inline std::vector<GuidingPatch> rank_guiding_patches(
    std::vector<GuidingPatch> patches) {
  std::stable_sort(patches.begin(), patches.end(),
                   [](const GuidingPatch& a, const GuidingPatch& b) {
                     if (a.insert_update_count != b.insert_update_count)
                       return a.insert_update_count > b.insert_update_count;
                     return a.patch_id < b.patch_id;
                   });
  return patches;
}

struct Budget {
  std::chrono::milliseconds wall_clock_limit{std::chrono::hours(5)};
  std::chrono::milliseconds per_test_timeout{std::chrono::seconds(300)};
};

enum class ValidationStatus { plausible, failing, compile_error, timeout };

inline const char* status_name(ValidationStatus s) {
  switch (s) {
    case ValidationStatus::plausible: return "plausible";
    case ValidationStatus::failing: return "failing";
    case ValidationStatus::compile_error: return "compile_error";
    case ValidationStatus::timeout: return "timeout";
  }
  return "?";
}

struct ValidationOutcome {
  int candidate_id = 0;
  ValidationStatus status = ValidationStatus::failing;
  std::chrono::milliseconds elapsed{0};
  std::string test_output_digest;
};

struct CommandResult {
  int exit_code = -1;  // -1 means the deadline killed it
  std::string output;
};

// Runs `command` through /bin/sh with a hard deadline; the whole process
// group is killed on timeout. stdout and stderr are captured.
inline CommandResult run_command(const std::string& command,
                                 const std::filesystem::path& workdir,
                                 std::chrono::milliseconds timeout) {
  namespace fs = std::filesystem;
  fs::path out_path =
      workdir / (".skelfix_out." + std::to_string(::getpid()) + "." +
                 std::to_string(
                     std::chrono::steady_clock::now().time_since_epoch()
                         .count()));
  int out_fd = ::open(out_path.c_str(), O_CREAT | O_WRONLY | O_TRUNC, 0600);
  if (out_fd < 0) throw WorkspaceError("cannot create output capture file");

  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(out_fd);
    throw WorkspaceError("fork failed");
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    if (::chdir(workdir.c_str()) != 0) ::_exit(127);
    ::dup2(out_fd, STDOUT_FILENO);
    ::dup2(out_fd, STDERR_FILENO);
    ::close(out_fd);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), (char*)nullptr);
    ::_exit(127);
  }
  ::close(out_fd);

  auto deadline = std::chrono::steady_clock::now() + timeout;
  CommandResult res;
  int status = 0;
  bool done = false;
  while (std::chrono::steady_clock::now() < deadline) {
    pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) {
      done = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  if (!done) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
    ::waitpid(pid, &status, 0);
    res.exit_code = -1;
  } else if (WIFEXITED(status)) {
    res.exit_code = WEXITSTATUS(status);
  } else {
    res.exit_code = 128;
  }

  std::ifstream in(out_path, std::ios::binary);
  res.output.assign(std::istreambuf_iterator<char>(in),
                    std::istreambuf_iterator<char>());
  std::error_code ec;
  fs::remove(out_path, ec);
  return res;
}

inline std::string fnv1a_digest(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

// An isolated copy of the project under repair. The patched file is
// overwritten in place and restored from the pristine bytes after each run.
class Workspace {
 public:
  Workspace(const std::filesystem::path& project_dir,
            const std::string& patched_filename,
            const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    root_ = root;
    std::error_code ec;
    fs::create_directories(root_, ec);
    fs::copy(project_dir, root_,
             fs::copy_options::recursive | fs::copy_options::overwrite_existing,
             ec);
    if (ec) throw WorkspaceError("cannot copy project: " + ec.message());
    patched_file_ = root_ / patched_filename;
    std::ifstream in(patched_file_, std::ios::binary);
    if (!in) throw WorkspaceError("missing file: " + patched_file_.string());
    pristine_.assign(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
  }

  ~Workspace() {
    std::error_code ec;
    std::filesystem::remove_all(root_, ec);
  }

  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  const std::filesystem::path& root() const { return root_; }
  const std::filesystem::path& patched_file() const { return patched_file_; }

  void write_patched(const std::string& content) {
    std::ofstream out(patched_file_, std::ios::binary | std::ios::trunc);
    if (!out) throw WorkspaceError("cannot write " + patched_file_.string());
    out << content;
  }

  void restore() {
    std::ofstream out(patched_file_, std::ios::binary | std::ios::trunc);
    out << pristine_;
  }

 private:
  std::filesystem::path root_;
  std::filesystem::path patched_file_;
  std::string pristine_;
};

struct ValidationConfig {
  std::string test_command;  // placeholders: {workdir} {patched_file}
  int compile_error_exit = 2;
};

inline std::string substitute_placeholders(std::string tmpl,
                                           const Workspace& ws) {
  auto replace_all = [&tmpl](const std::string& key,
                             const std::string& value) {
    std::size_t pos = 0;
    while ((pos = tmpl.find(key, pos)) != std::string::npos) {
      tmpl.replace(pos, key.size(), value);
      pos += value.size();
    }
  };
  replace_all("{workdir}", ws.root().string());
  replace_all("{patched_file}", ws.patched_file().string());
  return tmpl;
}

// Writes the patched source into the workspace, runs the test command and
// classifies the result by exit status. The workspace is restored afterwards.
inline ValidationOutcome validate(int candidate_id,
                                  const std::string& patched_unit_text,
                                  Workspace& ws, const Budget& budget,
                                  const ValidationConfig& cfg) {
  ValidationOutcome out;
  out.candidate_id = candidate_id;
  auto started = std::chrono::steady_clock::now();
  ws.write_patched(patched_unit_text);
  CommandResult res = run_command(substitute_placeholders(cfg.test_command, ws),
                                  ws.root(), budget.per_test_timeout);
  ws.restore();
  out.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  out.test_output_digest = fnv1a_digest(res.output);
  if (res.exit_code == -1)
    out.status = ValidationStatus::timeout;
  else if (res.exit_code == 0)
    out.status = ValidationStatus::plausible;
  else if (res.exit_code == cfg.compile_error_exit)
    out.status = ValidationStatus::compile_error;
  else
    out.status = ValidationStatus::failing;
  return out;
}

struct PlausiblePatch {
  std::string function_text;  // whole rewritten unit
  std::string body_text;
  nlohmann::json provenance;
  std::chrono::milliseconds elapsed{0};
};

struct RepairStats {
  std::size_t candidates_generated = 0;
  std::size_t candidates_validated = 0;
  std::size_t plausible = 0;
  std::size_t failing = 0;
  std::size_t compile_errors = 0;
  std::size_t timeouts = 0;
  double wall_seconds = 0.0;
  nlohmann::json guides = nlohmann::json::array();
};

struct RepairReport {
  std::string bug_id;
  std::string status;  // plausible_found | no_plausible | budget_exhausted
  std::vector<PlausiblePatch> plausible;
  RepairStats stats;
};

inline nlohmann::json to_json(const RepairReport& r) {
  nlohmann::json plausible = nlohmann::json::array();
  for (const PlausiblePatch& p : r.plausible) {
    plausible.push_back({{"patch", p.function_text},
                         {"body", p.body_text},
                         {"provenance", p.provenance},
                         {"elapsed_ms", p.elapsed.count()}});
  }
  return nlohmann::json{
      {"bug_id", r.bug_id},
      {"status", r.status},
      {"plausible", std::move(plausible)},
      {"stats",
       {{"candidates_generated", r.stats.candidates_generated},
        {"candidates_validated", r.stats.candidates_validated},
        {"by_status",
         {{"plausible", r.stats.plausible},
          {"failing", r.stats.failing},
          {"compile_error", r.stats.compile_errors},
          {"timeout", r.stats.timeouts}}},
        {"wall_seconds", r.stats.wall_seconds},
        {"guides", r.stats.guides}}}};
}

struct RepairContext {
  const SourceUnit* buggy_unit = nullptr;
  std::string function;
  const std::vector<SourceUnit>* extra_units = nullptr;
  std::filesystem::path project_dir;
  std::string patched_filename;
  std::string bug_id;
};

struct RepairOptions {
  bool keep_going = false;
  int validation_workers = 1;
  ValidationConfig validation;
  InstantiationCaps caps;
};

// Runs the full per-bug loop: guides in rank order, candidates per guide in
// stream order, validation against the external command. The default mode
// stops at the first plausible patch; --keep-going enumerates everything the
// budget allows. Candidate bodies are validated at most once across guides.
inline RepairReport repair_loop(std::vector<GuidingPatch> guides,
                                const RepairContext& ctx, const Budget& budget,
                                const RepairOptions& opts) {
  namespace fs = std::filesystem;
  auto started = std::chrono::steady_clock::now();
  auto elapsed = [&started] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
  };

  RepairReport report;
  report.bug_id = ctx.bug_id;
  report.status = "no_plausible";

  const AstNode* buggy_fn = find_method(*ctx.buggy_unit, ctx.function);
  if (!buggy_fn) {
    report.status = "no_plausible";
    return report;
  }
  const AstNode* buggy_body = method_body(*buggy_fn);
  static const std::vector<SourceUnit> no_extras;
  const std::vector<SourceUnit>& extras =
      ctx.extra_units ? *ctx.extra_units : no_extras;

  SymbolTable table = collect_scope(*ctx.buggy_unit, ctx.function, extras);

  int workers = std::max(1, opts.validation_workers);
  fs::path ws_base = fs::temp_directory_path() /
                     ("skelfix-" + std::to_string(::getpid()) + "-" +
                      fnv1a_digest(ctx.bug_id + ctx.function));
  std::vector<std::unique_ptr<Workspace>> pool;
  for (int i = 0; i < workers; ++i)
    pool.push_back(std::make_unique<Workspace>(
        ctx.project_dir, ctx.patched_filename,
        ws_base / ("w" + std::to_string(i))));

  std::set<std::string> validated_bodies;
  bool budget_exhausted = elapsed() >= budget.wall_clock_limit;
  bool stop_all = false;

  guides = rank_guiding_patches(std::move(guides));

  for (const GuidingPatch& guide : guides) {
    nlohmann::json guide_stat{{"id", guide.patch_id},
                              {"source", guide.source_name},
                              {"insert_update_count",
                               guide.insert_update_count},
                              {"candidates", 0},
                              {"plausible", 0}};
    if (stop_all || budget_exhausted) {
      report.stats.guides.push_back(std::move(guide_stat));
      continue;
    }

    std::vector<std::optional<Skeleton>> skeletons;
    bool guide_ok = true;
    for (const Modification& m : guide.edit_script.modifications) {
      if (m.is_abstractable()) {
        try {
          skeletons.push_back(abstract_modification(m));
        } catch (const NotAbstractable&) {
          guide_ok = false;
          break;
        }
      } else {
        skeletons.push_back(std::nullopt);
      }
    }
    if (!guide_ok || guide.edit_script.modifications.empty()) {
      report.stats.guides.push_back(std::move(guide_stat));
      continue;
    }

    const AstNode* guide_fn = find_method(guide.unit, ctx.function);
    const AstNode* guide_body = guide_fn ? method_body(*guide_fn) : nullptr;
    if (!guide_body) {
      report.stats.guides.push_back(std::move(guide_stat));
      continue;
    }

    GenerationInput in;
    in.buggy_unit = ctx.buggy_unit;
    in.function = ctx.function;
    in.buggy_body = buggy_body;
    in.extra_units = ctx.extra_units;
    in.guide_id = guide.patch_id;
    in.guide_body = guide_body;
    in.caps = opts.caps;

    bool stop_guide = false;

    // sliding window of in-flight validations, committed in dispatch order
    struct InFlight {
      std::future<ValidationOutcome> future;
      std::string unit_text;
      std::string body_text;
      nlohmann::json provenance;
    };
    std::deque<InFlight> window;
    std::size_t dispatched = 0;

    auto commit_one = [&] {
      InFlight f = std::move(window.front());
      window.pop_front();
      ValidationOutcome out = f.future.get();
      report.stats.candidates_validated++;
      switch (out.status) {
        case ValidationStatus::plausible: {
          report.stats.plausible++;
          guide_stat["plausible"] = guide_stat["plausible"].get<int>() + 1;
          PlausiblePatch p;
          p.function_text = std::move(f.unit_text);
          p.body_text = std::move(f.body_text);
          p.provenance = std::move(f.provenance);
          p.elapsed = out.elapsed;
          report.plausible.push_back(std::move(p));
          stop_guide = true;
          if (!opts.keep_going) stop_all = true;
          break;
        }
        case ValidationStatus::failing:
          report.stats.failing++;
          break;
        case ValidationStatus::compile_error:
          report.stats.compile_errors++;
          break;
        case ValidationStatus::timeout:
          report.stats.timeouts++;
          break;
      }
    };
    auto drain = [&] {
      while (!window.empty()) commit_one();
    };

    generate_candidates(
        guide.edit_script, skeletons, table, in,
        [&](CandidatePatch&& cand) {
          report.stats.candidates_generated++;
          guide_stat["candidates"] =
              guide_stat["candidates"].get<int>() + 1;
          std::string body_text = pretty_print(cand.patched_body);
          if (!validated_bodies.insert(body_text).second)
            return !(stop_guide || stop_all);
          if (elapsed() >= budget.wall_clock_limit) {
            budget_exhausted = true;
            return false;
          }
          std::string unit_text_str = unit_with_body(
              *ctx.buggy_unit, ctx.function, cand.patched_body);
          Workspace* ws = pool[dispatched % pool.size()].get();
          ++dispatched;
          InFlight f;
          f.unit_text = unit_text_str;
          f.body_text = std::move(body_text);
          f.provenance = to_json(cand);
          int cid = cand.candidate_id;
          f.future = std::async(
              std::launch::async,
              [cid, unit_text_str, ws, &budget, &opts] {
                return validate(cid, unit_text_str, *ws, budget,
                                opts.validation);
              });
          window.push_back(std::move(f));
          while (window.size() >= static_cast<std::size_t>(workers))
            commit_one();
          return !(stop_guide || stop_all || budget_exhausted);
        });
    drain();
    report.stats.guides.push_back(std::move(guide_stat));
  }

  report.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    started)
          .count();
  if (!report.plausible.empty())
    report.status = "plausible_found";
  else if (budget_exhausted)
    report.status = "budget_exhausted";
  return report;
}

}  // namespace skelfix
