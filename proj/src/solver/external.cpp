// Copyright 2026 The optsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <fstream>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "optsynth/errors.hpp"
#include "optsynth/lp_io.hpp"
#include "optsynth/solver.hpp"

extern char** environ;

namespace optsynth {

namespace {

using Clock = std::chrono::steady_clock;

// Caps concurrently running solver processes across the whole program.
class ProcessSlots {
 public:
  static ProcessSlots& instance() {
    static ProcessSlots slots;
    return slots;
  }

  void acquire(std::size_t capacity) {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return active_ < std::max<std::size_t>(capacity, 1); });
    ++active_;
  }

  void release() {
    {
      std::lock_guard lock(mutex_);
      --active_;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::size_t active_ = 0;
};

class SlotGuard {
 public:
  explicit SlotGuard(std::size_t capacity) { ProcessSlots::instance().acquire(capacity); }
  ~SlotGuard() { ProcessSlots::instance().release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;
};

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
}

std::filesystem::path make_work_dir(const std::filesystem::path& base) {
  const auto root = base.empty() ? std::filesystem::temp_directory_path() : base;
  std::filesystem::create_directories(root);
  std::string templ = (root / "optsynth-solve-XXXXXX").string();
  if (!mkdtemp(templ.data())) {
    throw Error(fmt::format("cannot create work directory under {}: {}", root.string(), std::strerror(errno)));
  }
  return templ;
}

struct ProcessResult {
  bool spawned = false;
  bool killed = false;
  int exit_code = -1;
  std::string spawn_error;
};

ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& log,
                          double wall_limit) {
  ProcessResult result;
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    result.spawn_error = fmt::format("cannot start '{}': {}", argv[0], std::strerror(rc));
    return result;
  }
  result.spawned = true;

  const auto start = Clock::now();
  int status = 0;
  while (true) {
    const pid_t done = waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0 && errno != EINTR) {
      result.spawn_error = fmt::format("waitpid failed: {}", std::strerror(errno));
      return result;
    }
    if (std::chrono::duration<double>(Clock::now() - start).count() > wall_limit) {
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      result.killed = true;
      return result;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  return result;
}

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

std::string tail(const std::string& text, std::size_t n = 2000) {
  return text.size() <= n ? text : text.substr(text.size() - n);
}

}  // namespace

void ExternalSolverSpec::check() const {
  if (command_template.find("{input}") == std::string::npos) {
    throw ConfigError("solver command template must contain {input}");
  }
  if (split_words(command_template).empty()) throw ConfigError("solver command template is empty");
  for (const auto* pattern : {&status_pattern, &objective_pattern, &solution_pattern}) {
    if (pattern->empty()) continue;
    try {
      std::regex re(*pattern);
    } catch (const std::regex_error& e) {
      throw ConfigError(fmt::format("bad solver output pattern '{}': {}", *pattern, e.what()));
    }
  }
  if (max_concurrent == 0) throw ConfigError("max_concurrent must be positive");
}

ExternalSolverSpec ExternalSolverSpec::highs_runner(const std::filesystem::path& script) {
  ExternalSolverSpec spec;
  spec.command_template = "python3 " + script.string() + " {input} {output} {timelimit}";
  spec.status_mapping = {{"optimal", SolveStatus::kOptimal},
                         {"infeasible", SolveStatus::kInfeasible},
                         {"unbounded", SolveStatus::kUnbounded},
                         {"time limit reached", SolveStatus::kTimeLimit},
                         {"iteration limit reached", SolveStatus::kTimeLimit},
                         {"primal infeasible or unbounded", SolveStatus::kError},
                         {"not set", SolveStatus::kError},
                         {"error", SolveStatus::kError}};
  return spec;
}

SolveOutcome solve_external(const ProblemData& pd, const ExternalSolverSpec& spec,
                            const SolverLimits& limits) {
  spec.check();
  limits.check();
  const std::string lp_text = emit_lp(pd);

  SolveOutcome out;
  const auto dir = make_work_dir(spec.work_dir);
  const auto input = dir / "model.lp";
  const auto output = dir / "solution.txt";
  const auto log = dir / "solver.log";
  {
    std::ofstream f(input, std::ios::binary);
    f << lp_text;
  }

  std::vector<std::string> argv;
  for (auto word : split_words(spec.command_template)) {
    replace_all(word, "{input}", input.string());
    replace_all(word, "{output}", output.string());
    replace_all(word, "{timelimit}", format_number(limits.time_limit));
    argv.push_back(std::move(word));
  }

  const auto start = Clock::now();
  ProcessResult proc;
  {
    SlotGuard slot(spec.max_concurrent);
    proc = run_process(argv, log, limits.time_limit + spec.kill_grace);
  }
  out.solve_time = std::chrono::duration<double>(Clock::now() - start).count();

  const std::string solution_text = read_file(output);
  const std::string log_text = read_file(log);
  out.info["exit_code"] = std::to_string(proc.exit_code);
  out.info["output"] = tail(log_text);

  auto finish = [&](SolveOutcome o) {
    if (spec.keep_artifacts) {
      o.info["artifacts"] = dir.string();
    } else {
      std::error_code ec;
      std::filesystem::remove_all(dir, ec);
    }
    return o;
  };

  if (!proc.spawned) {
    out.status = SolveStatus::kError;
    out.info["error"] = proc.spawn_error;
    return finish(out);
  }
  if (proc.killed) {
    out.status = SolveStatus::kTimeLimit;
    out.info["error"] = "solver killed after exceeding the time limit";
    return finish(out);
  }

  const std::regex status_re(spec.status_pattern);
  const std::regex objective_re(spec.objective_pattern);
  std::optional<std::regex> solution_re;
  if (!spec.solution_pattern.empty()) solution_re.emplace(spec.solution_pattern);

  std::map<std::string, std::string> lp_to_name;
  for (const auto& v : pd.variables) lp_to_name[sanitize_name(v.name, NameSanitization::kPermissive)] = v.name;

  std::optional<std::string> status_text;
  std::optional<std::string> objective_text;
  std::map<std::string, double> solution;
  std::istringstream lines(solution_text + "\n" + log_text);
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (!status_text && std::regex_search(line, m, status_re) && m.size() > 1) {
      status_text = m[1].str();
    } else if (!objective_text && std::regex_search(line, m, objective_re) && m.size() > 1) {
      objective_text = m[1].str();
    } else if (solution_re && std::regex_search(line, m, *solution_re) && m.size() > 2) {
      auto it = lp_to_name.find(m[1].str());
      if (it == lp_to_name.end()) continue;
      try {
        solution[it->second] = std::stod(m[2].str());
      } catch (const std::exception&) {
      }
    }
  }

  std::optional<SolveStatus> status;
  if (status_text) {
    out.info["solver_status"] = *status_text;
    const auto key = lowercase(*status_text);
    for (const auto& [text, mapped] : spec.status_mapping) {
      if (lowercase(text) == key) status = mapped;
    }
  }
  if (!status) {
    out.status = SolveStatus::kError;
    out.info["error"] = status_text ? "unmapped solver status '" + *status_text + "'"
                                    : fmt::format("no status in solver output (exit code {})", proc.exit_code);
    return finish(out);
  }
  out.status = *status;
  if (out.status == SolveStatus::kOptimal) {
    double value = 0.0;
    try {
      if (!objective_text) throw std::invalid_argument("missing");
      std::size_t used = 0;
      value = std::stod(*objective_text, &used);
      if (used != objective_text->size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      out.status = SolveStatus::kError;
      out.info["error"] = "unparseable objective '" + objective_text.value_or("") + "'";
      return finish(out);
    }
    out.objective = value;
    out.solution = std::move(solution);
  }
  return finish(out);
}

}  // namespace optsynth
