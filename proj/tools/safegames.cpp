#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "safegames/safegames.hpp"

namespace fs = std::filesystem;
using namespace safegames;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

ScoreWeights parse_weights(const std::string& s) {
  auto parts = split(s, ',');
  if (parts.size() != 3) throw std::invalid_argument("--weights expects three comma separated integers");
  return ScoreWeights{std::stoll(parts[0]), std::stoll(parts[1]), std::stoll(parts[2])};
}

std::vector<Algorithm> parse_algorithms(const std::string& s) {
  std::vector<Algorithm> out;
  for (const auto& name : split(s, ',')) out.push_back(parse_algorithm(name));
  if (out.empty()) throw std::invalid_argument("no algorithms given");
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
}

std::string aiger_text(const aiger::AigCircuit& c, const std::string& path) {
  return fs::path(path).extension() == ".aig" ? aiger::write_binary(c) : aiger::write_ascii(c);
}

std::string literal_name(const aiger::AigCircuit& c, aiger::Literal l) {
  std::string name;
  std::uint32_t v = aiger::lit_var(l);
  for (const auto& in : c.inputs)
    if (aiger::lit_var(in.lit) == v) name = in.name;
  for (const auto& la : c.latches)
    if (aiger::lit_var(la.lit) == v) name = la.name;
  if (name.empty()) name = "v" + std::to_string(v);
  return (aiger::lit_negated(l) ? "!" : "") + name;
}

struct SolveArgs {
  std::string file;
  std::string algo = "classical";
  std::string weights;
  std::string order;
  std::string dot;
  double timeout = 0;
  bool json = false;
  bool deep = false;
  std::size_t cap = 64;
  bool no_early_exit = false;
  std::size_t max_nodes = 0;
};

int run_solve(const SolveArgs& a) {
  auto circuit = std::make_shared<const aiger::AigCircuit>(aiger::parse_file(a.file));
  for (const auto& note : aiger::diagnose(*circuit)) std::cerr << "note: " << note << '\n';
  SolveOptions opts;
  if (!a.weights.empty()) opts.weights = parse_weights(a.weights);
  opts.decompose.deep = a.deep;
  opts.decompose.cap = a.cap;
  opts.early_exit = !a.no_early_exit;
  if (a.max_nodes > 0) opts.manager.max_nodes = a.max_nodes;
  if (a.timeout > 0)
    opts.deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(a.timeout));

  BuildOptions bo;
  bo.manager = opts.manager;
  if (!a.order.empty()) bo.order = split(a.order, ',');
  SymbolicGame g = build_game(circuit, aiger::classify_inputs(*circuit), bo);
  Algorithm algo = parse_algorithm(a.algo);
  SolveOutcome out = run_algorithm(g, algo, opts);

  std::cout << to_string(out.verdict) << '\n';
  if (a.json) {
    nlohmann::json j;
    j["verdict"] = to_string(out.verdict);
    j["algorithm"] = out.algorithm;
    j["iterations"] = out.stats.iterations;
    j["subgames"] = out.stats.subgames;
    j["decomposable"] = out.stats.decomposable;
    j["resolves"] = out.stats.resolves;
    j["merges"] = out.stats.merges;
    j["independent"] = out.stats.independent;
    j["early_exit"] = out.stats.early_exit;
    j["peak_nodes"] = out.stats.peak_nodes;
    j["time_ms"] = out.stats.time_ms;
    j["phase_ms"] = out.stats.phase_ms;
    if (!out.stats.winner.empty()) j["winner"] = out.stats.winner;
    if (!out.message.empty()) j["message"] = out.message;
    std::cout << j.dump() << '\n';
  }
  if (!a.dot.empty() && out.winning_states.valid()) {
    std::ofstream os(a.dot);
    if (!os) throw std::runtime_error("cannot write " + a.dot);
    const auto& names = g.var_names;
    out.manager->to_dot(os, out.winning_states,
                        [&](bdd::var_t v) { return v < names.size() ? names[v] : "x" + std::to_string(v); });
  }
  return exit_code(out.verdict);
}

struct DecomposeArgs {
  std::string file;
  bool deep = false;
  std::size_t cap = 64;
  std::string emit_dir;
};

int run_decompose(const DecomposeArgs& a) {
  auto circuit = aiger::parse_file(a.file);
  DecomposeOptions opts{a.deep, a.cap};
  auto parts = decompose(circuit, circuit.error(), opts);
  std::cout << "parts: " << parts.size() << '\n';
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::cout << "part " << i << ":";
    for (std::size_t k = 0; k < parts[i].size(); ++k)
      std::cout << (k ? " & " : " ") << literal_name(circuit, parts[i][k]);
    std::cout << '\n';
  }
  if (!a.emit_dir.empty()) {
    fs::create_directories(a.emit_dir);
    auto stem = fs::path(a.file).stem().string();
    for (std::size_t i = 0; i < parts.size(); ++i) {
      auto path = fs::path(a.emit_dir) / (stem + "_part" + std::to_string(i) + ".aag");
      write_text(path.string(), aiger::write_ascii(part_circuit(circuit, parts[i])));
    }
  }
  return 0;
}

std::vector<std::pair<int, int>> parse_conflicts(const std::string& s) {
  std::vector<std::pair<int, int>> out;
  for (const auto& item : split(s, ',')) {
    auto ij = split(item, ':');
    if (ij.size() != 2) throw std::invalid_argument("conflict pairs are written i:j");
    out.emplace_back(std::stoi(ij[0]), std::stoi(ij[1]));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safety game solver for AIGER specifications"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "Decide realizability of a game");
  solve_cmd->add_option("file", sa.file, "AIGER file (.aag or .aig)")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--algo", sa.algo, "classical, comp1, comp2, comp3, oracle or portfolio");
  solve_cmd->add_option("--weights", sa.weights, "comp2 score weights alpha,beta,gamma");
  solve_cmd->add_option("--timeout", sa.timeout, "seconds; 0 means none");
  solve_cmd->add_flag("--json", sa.json, "print statistics as JSON after the verdict");
  solve_cmd->add_flag("--deep-decompose", sa.deep, "split parts recursively");
  solve_cmd->add_option("--cap", sa.cap, "part limit for --deep-decompose");
  solve_cmd->add_flag("--no-early-exit", sa.no_early_exit, "finish compositional solves after a local loss");
  solve_cmd->add_option("--order", sa.order, "comma separated variable order (symbol names or literals)");
  solve_cmd->add_option("--max-nodes", sa.max_nodes, "BDD node limit");
  solve_cmd->add_option("--dot", sa.dot, "write the winning states as a DOT graph");

  DecomposeArgs da;
  auto* dec_cmd = app.add_subcommand("decompose", "Split the error output into sub-specifications");
  dec_cmd->add_option("file", da.file, "AIGER file")->required()->check(CLI::ExistingFile);
  dec_cmd->add_flag("--deep-decompose", da.deep, "split parts recursively");
  dec_cmd->add_option("--cap", da.cap, "part limit for --deep-decompose");
  dec_cmd->add_option("--emit-parts", da.emit_dir, "write one circuit per part into this directory");

  auto* gen_cmd = app.add_subcommand("gen", "Generate benchmark games");
  gen_cmd->require_subcommand(1);
  int mult_n = 2;
  std::string mult_out;
  auto* mult_cmd = gen_cmd->add_subcommand("mult", "Boolean matrix multiplication");
  mult_cmd->add_option("--n", mult_n, "matrix dimension (1..8)")->required();
  mult_cmd->add_option("-o,--output", mult_out, "output file, stdout if omitted");
  WashSpec wash;
  std::string wash_conflict_list, wash_out;
  bool wash_no_conflicts = false;
  auto* wash_cmd = gen_cmd->add_subcommand("wash", "Washing system with n tanks");
  wash_cmd->add_option("--tanks", wash.tanks, "number of tanks")->required();
  wash_cmd->add_option("--k", wash.min_fill, "minimum filling duration");
  wash_cmd->add_option("--deadline", wash.deadline, "steps a request may stay pending");
  wash_cmd->add_option("--conflicts", wash_conflict_list, "tank pairs i:j that may not be filled together");
  wash_cmd->add_flag("--no-conflicts", wash_no_conflicts, "disable the default conflict pairs");
  wash_cmd->add_option("-o,--output", wash_out, "output file, stdout if omitted");
  std::uint64_t rand_seed = corpus_seed();
  std::size_t rand_count = 1;
  std::string rand_dir, rand_out;
  auto* rand_cmd = gen_cmd->add_subcommand("random", "Small random games");
  rand_cmd->add_option("--seed", rand_seed, "seed (default: SAFEGAMES_SEED or a fixed value)");
  rand_cmd->add_option("--count", rand_count, "number of games");
  rand_cmd->add_option("--dir", rand_dir, "write random_<i>.aag files here");
  rand_cmd->add_option("-o,--output", rand_out, "output file for a single game");

  std::string bench_dir, bench_algos = "classical,comp1,comp2,comp3", bench_csv, bench_plot;
  double bench_timeout = 60;
  std::size_t bench_jobs = 1, bench_max_nodes = 0;
  auto* bench_cmd = app.add_subcommand("bench", "Run algorithms over a directory of games");
  bench_cmd->add_option("--dir", bench_dir, "directory with .aag/.aig files")->required();
  bench_cmd->add_option("--algos", bench_algos, "comma separated algorithms");
  bench_cmd->add_option("--timeout", bench_timeout, "seconds per run");
  bench_cmd->add_option("--jobs", bench_jobs, "parallel runs");
  bench_cmd->add_option("--csv", bench_csv, "CSV output, stdout if omitted");
  bench_cmd->add_option("--plot", bench_plot, "SVG cactus plot");
  bench_cmd->add_option("--max-nodes", bench_max_nodes, "BDD node limit per run");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) return run_solve(sa);
    if (*dec_cmd) return run_decompose(da);
    if (*mult_cmd) {
      write_text(mult_out, aiger_text(gen_mult(MultSpec{mult_n}), mult_out));
      return 0;
    }
    if (*wash_cmd) {
      if (!wash_conflict_list.empty()) wash.conflicts = parse_conflicts(wash_conflict_list);
      wash.default_conflicts = !wash_no_conflicts;
      write_text(wash_out, aiger_text(gen_wash(wash), wash_out));
      return 0;
    }
    if (*rand_cmd) {
      auto games = random_corpus(rand_count, rand_seed);
      if (!rand_dir.empty()) {
        fs::create_directories(rand_dir);
        for (std::size_t i = 0; i < games.size(); ++i)
          write_text((fs::path(rand_dir) / ("random_" + std::to_string(i) + ".aag")).string(),
                     aiger::write_ascii(games[i]));
      } else {
        if (games.size() != 1) throw std::invalid_argument("--count above 1 needs --dir");
        write_text(rand_out, aiger_text(games.front(), rand_out));
      }
      return 0;
    }
    if (*bench_cmd) {
      BenchOptions bo;
      bo.algorithms = parse_algorithms(bench_algos);
      bo.timeout_seconds = bench_timeout;
      bo.jobs = bench_jobs;
      if (bench_max_nodes > 0) bo.solve.manager.max_nodes = bench_max_nodes;
      bo.tool = fs::path(argv[0]).filename().string();
      auto records = bench_run(bench_dir, bo);
      if (bench_csv.empty())
        emit_csv(records, std::cout);
      else
        emit_csv(records, fs::path(bench_csv));
      if (!bench_plot.empty() && !records.empty()) emit_cactus(records, fs::path(bench_plot));
      std::size_t errors = 0;
      for (const auto& r : records) errors += r.verdict == Verdict::kError;
      return errors == 0 ? 0 : 1;
    }
  } catch (const aiger::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
