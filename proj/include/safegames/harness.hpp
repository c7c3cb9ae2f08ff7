#pragma once

// Batch runner over a directory of AIGER games, with CSV output and cactus
// plots (solved-instance count against per-instance time).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "safegames/aiger.hpp"
#include "safegames/decomp.hpp"
#include "safegames/game.hpp"
#include "safegames/solvers.hpp"

namespace safegames {

struct RunRecord {
  std::string benchmark;
  std::string algorithm;
  Verdict verdict = Verdict::kError;
  double time_ms = 0;
  std::size_t peak_nodes = 0;
  std::size_t subgames = 0;
  bool decomposable = false;
  std::string detail;
};

struct BenchOptions {
  std::vector<Algorithm> algorithms = {Algorithm::kClassical, Algorithm::kComp1, Algorithm::kComp2,
                                       Algorithm::kComp3};
  double timeout_seconds = 60;
  std::size_t jobs = 1;
  SolveOptions solve;
  /// Name of the command line tool, used in reproduction hints.
  std::string tool = "safegames";
};

inline std::vector<std::filesystem::path> list_benchmarks(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    if (ext == ".aag" || ext == ".aig") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

namespace detail {

inline RunRecord run_one(const std::filesystem::path& file, Algorithm algo, const BenchOptions& opts) {
  RunRecord rec;
  rec.benchmark = file.filename().string();
  rec.algorithm = std::string(to_string(algo));
  std::shared_ptr<const aiger::AigCircuit> circuit;
  try {
    circuit = std::make_shared<const aiger::AigCircuit>(aiger::parse_file(file.string()));
  } catch (const std::exception& e) {
    rec.verdict = Verdict::kError;
    rec.detail = e.what();
    return rec;
  }
  auto parts = decompose(*circuit, circuit->error(), opts.solve.decompose);
  rec.subgames = parts.size();
  rec.decomposable = parts.size() >= 2;

  auto start = std::chrono::steady_clock::now();
  auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(opts.timeout_seconds));
  try {
    BuildOptions bo;
    bo.manager = opts.solve.manager;
    SymbolicGame g = build_game(circuit, aiger::classify_inputs(*circuit), bo);
    SolveOptions so = opts.solve;
    so.deadline = deadline;
    SolveOutcome out = run_algorithm(g, algo, so);
    rec.verdict = out.verdict;
    rec.peak_nodes = out.stats.peak_nodes;
    if (!out.message.empty()) rec.detail = out.message;
    if (!out.stats.winner.empty()) rec.detail = "winner=" + out.stats.winner;
  } catch (const bdd::Interrupted&) {
    rec.verdict = Verdict::kTimeout;
  } catch (const bdd::NodeLimitExceeded& e) {
    rec.verdict = Verdict::kTimeout;
    rec.detail = e.what();
  } catch (const std::exception& e) {
    rec.verdict = Verdict::kError;
    rec.detail = e.what();
  }
  rec.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (rec.verdict != Verdict::kError && rec.time_ms > opts.timeout_seconds * 1000.0) rec.verdict = Verdict::kTimeout;
  return rec;
}

}  // namespace detail

/// Runs every algorithm on every benchmark in the directory. Records come
/// back ordered by file name, then by the order of `opts.algorithms`.
/// Conflicting verdicts on one file turn all of its decided records into
/// ERROR records naming the disagreement.
inline std::vector<RunRecord> bench_run(const std::filesystem::path& dir, const BenchOptions& opts) {
  auto files = list_benchmarks(dir);
  const std::size_t na = opts.algorithms.size();
  std::vector<RunRecord> records(files.size() * na);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t k = next++;
      if (k >= records.size()) return;
      records[k] = detail::run_one(files[k / na], opts.algorithms[k % na], opts);
    }
  };
  std::size_t jobs = std::max<std::size_t>(1, std::min(opts.jobs, records.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t f = 0; f < files.size(); ++f) {
    std::set<Verdict> seen;
    std::string summary;
    for (std::size_t a = 0; a < na; ++a) {
      const auto& r = records[f * na + a];
      if (r.verdict == Verdict::kRealizable || r.verdict == Verdict::kUnrealizable) {
        seen.insert(r.verdict);
        summary += (summary.empty() ? "" : " ") + r.algorithm + "=" + std::string(to_string(r.verdict));
      }
    }
    if (seen.size() < 2) continue;
    for (std::size_t a = 0; a < na; ++a) {
      auto& r = records[f * na + a];
      if (r.verdict != Verdict::kRealizable && r.verdict != Verdict::kUnrealizable) continue;
      r.detail = "disagreement " + summary + "; reproduce: " + opts.tool + " solve " + files[f].string() +
                 " --algo " + r.algorithm;
      r.verdict = Verdict::kError;
    }
  }
  return records;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline constexpr const char* kCsvHeader = "benchmark,algorithm,verdict,time_ms,peak_nodes,subgames,decomposable,detail";

inline void emit_csv(const std::vector<RunRecord>& records, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    std::ostringstream t;
    t.setf(std::ios::fixed);
    t.precision(3);
    t << r.time_ms;
    os << csv_escape(r.benchmark) << ',' << csv_escape(r.algorithm) << ',' << to_string(r.verdict) << ','
       << t.str() << ',' << r.peak_nodes << ',' << r.subgames << ',' << (r.decomposable ? 1 : 0) << ','
       << csv_escape(r.detail) << '\n';
  }
}

inline void emit_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  emit_csv(records, os);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

/// SVG cactus plot: one polyline per algorithm, x = number of solved
/// instances, y = time on a log scale. Only decided records are plotted.
inline void emit_cactus(const std::vector<RunRecord>& records, std::ostream& os) {
  if (records.empty()) throw std::invalid_argument("no records to plot");
  std::vector<std::string> algos;
  std::map<std::string, std::vector<double>> times;
  for (const auto& r : records) {
    if (std::find(algos.begin(), algos.end(), r.algorithm) == algos.end()) algos.push_back(r.algorithm);
    if (r.verdict == Verdict::kRealizable || r.verdict == Verdict::kUnrealizable)
      times[r.algorithm].push_back(std::max(r.time_ms, 0.01));
  }
  std::size_t max_count = 1;
  double tmin = 1e300, tmax = 0;
  for (auto& [a, ts] : times) {
    std::sort(ts.begin(), ts.end());
    max_count = std::max(max_count, ts.size());
    if (!ts.empty()) {
      tmin = std::min(tmin, ts.front());
      tmax = std::max(tmax, ts.back());
    }
  }
  if (tmax == 0) tmin = tmax = 1;
  double lo = std::floor(std::log10(tmin)), hi = std::ceil(std::log10(tmax));
  if (hi <= lo) hi = lo + 1;

  const double W = 640, H = 420, left = 70, right = 160, top = 20, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double count) { return left + pw * count / static_cast<double>(max_count); };
  auto py = [&](double ms) { return top + ph * (1.0 - (std::log10(ms) - lo) / (hi - lo)); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
     << "\" stroke=\"black\"/>\n";
  for (double e = lo; e <= hi; e += 1) {
    double y = py(std::pow(10.0, e));
    os << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" font-size=\"11\" text-anchor=\"end\">1e"
       << static_cast<int>(e) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12
     << "\" font-size=\"12\" text-anchor=\"middle\">solved instances</text>\n";
  os << "<text x=\"16\" y=\"" << top + ph / 2 << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << top + ph / 2 << ")\">time (ms, log)</text>\n";
  for (std::size_t i = 0; i < algos.size(); ++i) {
    const auto& ts = times[algos[i]];
    const char* color = colors[i % 6];
    os << "<polyline class=\"series\" data-algorithm=\"" << algos[i] << "\" fill=\"none\" stroke=\"" << color
       << "\" points=\"";
    for (std::size_t k = 0; k < ts.size(); ++k) os << (k ? " " : "") << px(static_cast<double>(k + 1)) << ',' << py(ts[k]);
    os << "\"/>\n";
    double ly = top + 16 + 18 * static_cast<double>(i);
    os << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\"/>\n";
    os << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << algos[i] << " ("
       << ts.size() << ")</text>\n";
  }
  os << "</svg>\n";
}

inline void emit_cactus(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  emit_cactus(records, os);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace safegames
