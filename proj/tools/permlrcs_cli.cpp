// permlrcs: generate instances, run solvers, sweep phase-transition grids and
// time the algorithms against each other.
//
//   permlrcs gen   --config cfg.json --out inst/
//   permlrcs solve --instance inst/ --algo perm-altgdmin --out run/
//   permlrcs phase --config grid.json --out phase/
//   permlrcs bench --out bench/

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "permlrcs/permlrcs.hpp"

namespace fs = std::filesystem;
using namespace permlrcs;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> n, q, m, s, r, algo, out, instance;
  std::optional<std::uint64_t> seed, perm_seed;
  std::optional<int> trials, max_iters, threads;
  std::optional<double> stop_tol;
};

std::vector<Index> parse_list(const std::string& text, const char* name) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw FormatError(std::string("--") + name + ": '" + item + "' is not an integer");
    }
  }
  if (out.empty()) throw FormatError(std::string("--") + name + " is empty");
  return out;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config file");
  cmd->add_option("--n", o.n, "signal dimension (comma list for phase)");
  cmd->add_option("--q", o.q, "number of columns (comma list for phase)");
  cmd->add_option("--m", o.m, "measurements per column (comma list for phase)");
  cmd->add_option("--s", o.s, "permutation block size (comma list for phase)");
  cmd->add_option("--r", o.r, "rank (comma list for phase)");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--algo", o.algo, "algorithm id (comma list for phase/bench)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--trials", o.trials, "Monte-Carlo trials per cell");
  cmd->add_option("--max-iters", o.max_iters, "outer iteration budget T");
  cmd->add_option("--stop-tol", o.stop_tol, "early-stop threshold");
  cmd->add_option("--threads", o.threads, "worker threads (0 = PERMLRCS_THREADS or auto)");
}

// Precedence: command line > config file > built-in defaults.
ExperimentConfig resolve(Command cmd, const Overrides& o) {
  auto cfg = default_config(cmd);
  if (!o.config.empty()) apply_json_file(cfg, o.config);
  if (o.n) cfg.n = parse_list(*o.n, "n");
  if (o.q) cfg.q = parse_list(*o.q, "q");
  if (o.m) cfg.m = parse_list(*o.m, "m");
  if (o.s) cfg.s = parse_list(*o.s, "s");
  if (o.r) cfg.r = parse_list(*o.r, "r");
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  if (o.instance) cfg.instance = *o.instance;
  if (o.trials) cfg.trials = *o.trials;
  if (o.max_iters) cfg.solver.max_iters = *o.max_iters;
  if (o.stop_tol) cfg.solver.stop_tol = *o.stop_tol;
  if (o.threads) cfg.threads = *o.threads;
  if (o.algo) {
    cfg.algorithms.clear();
    std::stringstream ss(*o.algo);
    std::string item;
    while (std::getline(ss, item, ',')) cfg.algorithms.push_back(parse_algorithm(item));
  }
  cfg.solver.validate();
  return cfg;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

int cmd_gen(const Overrides& o) {
  const auto cfg = resolve(Command::kGen, o);
  const Dims d = cfg.single_dims();
  d.validate();
  auto seeds = Seeds::from_master(cfg.seed);
  if (o.perm_seed) seeds.permutation = *o.perm_seed;
  const auto problem = generate_synthetic(d, seeds);
  const auto manifest = write_instance(cfg.out, problem.instance, &problem.truth, seeds);
  std::cout << manifest.string() << '\n';
  return 0;
}

int cmd_solve(const Overrides& o) {
  const auto cfg = resolve(Command::kSolve, o);
  if (cfg.instance.empty()) throw FormatError("solve needs --instance <dir>");
  if (cfg.algorithms.size() != 1) throw FormatError("solve takes exactly one --algo");
  const auto algo = cfg.algorithms.front();
  const auto loaded = read_instance(cfg.instance);
  const auto sc = solver_config_for(algo, cfg);
  const auto res = run_algorithm(algo, loaded.instance, sc, loaded.truth ? &*loaded.truth : nullptr);

  fs::create_directories(cfg.out);
  {
    auto os = csv::open(fs::path(cfg.out) / "trace.csv");
    write_trace_csv(os, res);
  }
  write_json(fs::path(cfg.out) / "result.json", result_json(algo, loaded.instance.dims, res, sc, cfg.instance));
  std::cout << to_string(algo) << ": iterations=" << res.iterations_run << " final_sd=" << res.final_sd()
            << " converged=" << (res.converged ? "true" : "false") << " time_s=" << res.total_time_s() << '\n';
  return 0;
}

int cmd_phase(const Overrides& o) {
  const auto cfg = resolve(Command::kPhase, o);
  const auto rows = run_phase(cfg);
  const auto path = fs::path(cfg.out) / "phase.csv";
  auto os = csv::open(path);
  write_phase_csv(os, rows);
  std::cout << path.string() << '\n';
  for (const auto& r : rows)
    if (r.status.rfind("error", 0) == 0) return 1;
  return 0;
}

int cmd_bench(const Overrides& o) {
  const auto cfg = resolve(Command::kBench, o);
  const auto rep = run_bench(cfg);
  const auto path = fs::path(cfg.out) / "bench.csv";
  {
    auto os = csv::open(path);
    write_bench_csv(os, rep);
  }
  const auto summary = bench_summary_json(rep);
  write_json(fs::path(cfg.out) / "bench_summary.json", summary);
  for (const auto& s : rep.summary)
    std::cout << to_string(s.algorithm) << ": median time to SD<=1e-10 = " << s.median_time_to_threshold()
              << " s\n";
  std::cout << path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally permuted low-rank column-wise sensing: solvers and experiments"};
  app.require_subcommand(1);

  Overrides gen_o, solve_o, phase_o, bench_o;
  auto* gen = app.add_subcommand("gen", "generate a synthetic instance directory");
  add_common(gen, gen_o);
  gen->add_option("--perm-seed", gen_o.perm_seed, "override the permutation seed only");

  auto* solve = app.add_subcommand("solve", "run one solver on an instance directory");
  add_common(solve, solve_o);
  solve->add_option("--instance", solve_o.instance, "instance directory or manifest path");

  auto* phase = app.add_subcommand("phase", "Monte-Carlo phase-transition grid over (s, r)");
  add_common(phase, phase_o);

  auto* bench = app.add_subcommand("bench", "runtime comparison of the algorithms");
  add_common(bench, bench_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_o);
    if (solve->parsed()) return cmd_solve(solve_o);
    if (phase->parsed()) return cmd_phase(phase_o);
    if (bench->parsed()) return cmd_bench(bench_o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
