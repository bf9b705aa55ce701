#include "beamsparse/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace beamsparse {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("scenario: bad numeric value for " + key + ": " + s);
  }
}

long parse_long(const std::string& s, const std::string& key) {
  const double v = parse_double(s, key);
  if (v != std::floor(v))
    throw std::invalid_argument("scenario: integer expected for " + key);
  return static_cast<long>(v);
}

std::vector<double> parse_double_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) out.push_back(parse_double(tok, key));
  if (out.empty()) throw std::invalid_argument("scenario: empty list for " + key);
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& key) {
  std::vector<int> out;
  for (const auto& tok : split(s, ',')) out.push_back(static_cast<int>(parse_long(tok, key)));
  if (out.empty()) throw std::invalid_argument("scenario: empty list for " + key);
  return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

template <typename T>
std::string join_numbers(const std::vector<T>& v) {
  std::vector<std::string> parts;
  for (const T& x : v) parts.push_back(format_number(static_cast<double>(x)));
  return join(parts, ",");
}

std::string join_support(const std::vector<int>& sup) {
  std::vector<std::string> parts;
  for (int i : sup) parts.push_back(std::to_string(i));
  return join(parts, ";");
}

void write_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit: cannot open " + path);
  out << content;
  if (!out) throw std::runtime_error("emit: write failed for " + path);
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mutex;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        if (failed.load()) return;
        try {
          fn(i);
        } catch (const std::exception& e) {
          std::scoped_lock lock(err_mutex);
          if (!failed.exchange(true)) first_error = e.what();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failed.load()) throw std::runtime_error(first_error);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> wsr_column(const DenseTrace& t) {
  std::vector<double> w;
  for (const auto& r : t) w.push_back(r.wsr_bits);
  return w;
}

std::vector<double> wsr_column(const SparseTrace& t) {
  std::vector<double> w;
  for (const auto& r : t) w.push_back(r.wsr_bits);
  return w;
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

Scenario Scenario::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("scenario: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Scenario Scenario::from_string(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("scenario: expected key = value, got: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::invalid_argument("scenario: empty key or value in: " + line);
    if (!kv.emplace(key, val).second)
      throw std::invalid_argument("scenario: duplicate key " + key);
  }

  Scenario sc;
  SystemConfig& cfg = sc.cfg;
  cfg.M = 32;
  cfg.K = 4;
  int k_users = kv.count("K") ? static_cast<int>(parse_long(kv["K"], "K")) : cfg.K;

  auto per_user_ints = [&](const std::string& key, int fallback) {
    if (!kv.count(key)) return std::vector<int>(k_users, fallback);
    std::vector<int> v = parse_int_list(kv[key], key);
    if (static_cast<int>(v.size()) == 1) v.assign(k_users, v[0]);
    if (static_cast<int>(v.size()) != k_users)
      throw std::invalid_argument("scenario: " + key + " must have K entries");
    return v;
  };
  auto per_user_doubles = [&](const std::string& key, double fallback) {
    if (!kv.count(key)) return std::vector<double>(k_users, fallback);
    std::vector<double> v = parse_double_list(kv[key], key);
    if (v.size() == 1) v.assign(k_users, v[0]);
    if (static_cast<int>(v.size()) != k_users)
      throw std::invalid_argument("scenario: " + key + " must have K entries");
    return v;
  };

  static const std::vector<std::string> known = {
      "M",     "K",     "N_k",   "D_k",  "P_max",   "alpha_k",
      "K_s",   "seed",  "trials", "snr_db", "K_s_list", "algorithm",
      "channel", "rbs", "subcarriers_per_rb", "slots", "data_symbols_per_slot",
      "out"};
  for (const auto& [key, val] : kv) {
    (void)val;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("scenario: unknown key " + key);
  }

  cfg.K = k_users;
  if (kv.count("M")) cfg.M = static_cast<int>(parse_long(kv["M"], "M"));
  cfg.N_k = per_user_ints("N_k", 2);
  cfg.D_k = per_user_ints("D_k", 2);
  if (kv.count("P_max")) cfg.P_max = parse_double(kv["P_max"], "P_max");
  cfg.alpha = per_user_doubles("alpha_k", 1.0);
  cfg.K_s = kv.count("K_s") ? static_cast<int>(parse_long(kv["K_s"], "K_s")) : cfg.M / 2;
  if (kv.count("seed")) cfg.seed = static_cast<std::uint64_t>(parse_long(kv["seed"], "seed"));
  cfg.sigma2.assign(k_users, 1.0);  // placeholder; per-SNR values set at run time

  if (kv.count("trials")) sc.trials = static_cast<int>(parse_long(kv["trials"], "trials"));
  if (sc.trials < 1) throw std::invalid_argument("scenario: trials must be >= 1");
  if (kv.count("snr_db")) sc.snr_db = parse_double_list(kv["snr_db"], "snr_db");
  sc.k_s_list = kv.count("K_s_list") ? parse_int_list(kv["K_s_list"], "K_s_list")
                                     : std::vector<int>{cfg.K_s};
  if (kv.count("algorithm")) sc.algorithm = kv["algorithm"];
  if (kv.count("channel")) sc.channel_source = kv["channel"];
  if (kv.count("rbs")) sc.grid.rbs = parse_long(kv["rbs"], "rbs");
  if (kv.count("subcarriers_per_rb"))
    sc.grid.subcarriers_per_rb = parse_long(kv["subcarriers_per_rb"], "subcarriers_per_rb");
  if (kv.count("slots")) sc.grid.slots = parse_long(kv["slots"], "slots");
  if (kv.count("data_symbols_per_slot"))
    sc.grid.data_symbols_per_slot =
        parse_long(kv["data_symbols_per_slot"], "data_symbols_per_slot");
  if (kv.count("out")) sc.out_dir = kv["out"];

  cfg.validate();
  (void)n_sym(sc.grid);
  const std::vector<std::string> algos = {"wmmse", "allsp", "aullsp", "greedy", "all"};
  if (std::find(algos.begin(), algos.end(), sc.algorithm) == algos.end())
    throw std::invalid_argument("scenario: unknown algorithm " + sc.algorithm);
  return sc;
}

Scenario Scenario::desk_default() {
  Scenario sc;
  sc.cfg = SystemConfig::uniform(32, 4, 2, 2, 1.0, 0.1, 16, 1);
  sc.snr_db = {-6, 0, 6, 12, 18};
  sc.k_s_list = {16, 12, 8};
  sc.trials = 20;
  return sc;
}

std::string Scenario::canonical_text() const {
  std::vector<std::string> lines;
  lines.push_back("M = " + std::to_string(cfg.M));
  lines.push_back("K = " + std::to_string(cfg.K));
  lines.push_back("N_k = " + join_numbers(cfg.N_k));
  lines.push_back("D_k = " + join_numbers(cfg.D_k));
  lines.push_back("P_max = " + format_number(cfg.P_max));
  lines.push_back("alpha_k = " + join_numbers(cfg.alpha));
  lines.push_back("K_s = " + std::to_string(cfg.K_s));
  lines.push_back("seed = " + std::to_string(cfg.seed));
  lines.push_back("trials = " + std::to_string(trials));
  lines.push_back("snr_db = " + join_numbers(snr_db));
  lines.push_back("K_s_list = " + join_numbers(k_s_list));
  lines.push_back("algorithm = " + algorithm);
  lines.push_back("channel = " + channel_source);
  lines.push_back("rbs = " + std::to_string(grid.rbs));
  lines.push_back("subcarriers_per_rb = " + std::to_string(grid.subcarriers_per_rb));
  lines.push_back("slots = " + std::to_string(grid.slots));
  lines.push_back("data_symbols_per_slot = " + std::to_string(grid.data_symbols_per_slot));
  // out_dir is deliberately excluded: the hash identifies the experiment,
  // not where its files land.
  std::sort(lines.begin(), lines.end());
  return join(lines, "\n") + "\n";
}

std::string Scenario::hash() const {
  const std::string text = canonical_text();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf).substr(8);  // low 32 bits are plenty for file names
}

std::vector<std::string> Scenario::algorithms() const {
  if (algorithm == "all") return {"wmmse", "allsp", "aullsp", "greedy"};
  return {algorithm};
}

ChannelSet Scenario::make_channel(std::uint64_t seed) const {
  if (channel_source == "synthesize") {
    SystemConfig c = cfg;
    c.seed = seed;
    return synth_channel(c);
  }
  return load_channel(channel_source);
}

int iterations_to_tolerance(const std::vector<double>& wsr, double tol) {
  for (size_t i = 1; i < wsr.size(); ++i) {
    const double rel = std::abs(wsr[i] - wsr[i - 1]) / std::max(std::abs(wsr[i - 1]), 1e-12);
    if (rel < tol) return static_cast<int>(i + 1);
  }
  return static_cast<int>(wsr.size());
}

namespace {

struct CellTask {
  std::string algo;
  int snr_index = 0;
  int k_s = 0;
  int trial = 0;
};

SweepCell solve_cell(const Scenario& sc, const ChannelSet& ch, const std::string& algo,
                     double snr, int k_s, std::uint64_t seed, double wmmse_wsr) {
  SystemConfig cfg = sc.cfg;
  cfg.K_s = k_s;
  cfg.seed = seed;
  cfg.sigma2 = noise_from_snr(cfg, snr);

  SweepCell cell;
  cell.algo = algo;
  cell.snr_db = snr;
  cell.k_s = k_s;
  cell.seed = seed;

  std::vector<double> wsr_iters;
  if (algo == "wmmse") {
    const auto [sol, trace] =
        dense_wmmse_solve(cfg, ch, matched_filter_init(ch, cfg), 50, 1e-5);
    cell.wsr_bits = rate_report(ch, sol.V, cfg).wsr_bits;
    wsr_iters = wsr_column(trace);
  } else if (algo == "allsp") {
    const auto [sol, trace] = allsp_solve(cfg, ch, allsp_init(cfg, ch));
    cell.wsr_bits = rate_report(ch, sol.P, cfg).wsr_bits;
    wsr_iters = wsr_column(trace);
  } else if (algo == "aullsp") {
    const auto [sol, trace] = aullsp_solve(cfg, ch, aullsp_init(cfg, ch));
    cell.wsr_bits = rate_report(ch, sol.P, cfg).wsr_bits;
    wsr_iters = wsr_column(trace);
  } else if (algo == "greedy") {
    const std::vector<int> support = largest_indices(beam_energies(ch), cfg.K_s);
    const auto [dense, trace] =
        wmmse_on_support(cfg, ch, support, matched_filter_init(ch, cfg), 50, 1e-5);
    cell.wsr_bits = rate_report(ch, dense.V, cfg).wsr_bits;
    wsr_iters = wsr_column(trace);
  } else {
    throw std::invalid_argument("run_sweeps: unknown algorithm " + algo);
  }
  cell.iters_to_tol = iterations_to_tolerance(wsr_iters);
  cell.gap_vs_wmmse = (algo == "wmmse" || wmmse_wsr <= 0.0)
                          ? 0.0
                          : 1.0 - cell.wsr_bits / wmmse_wsr;
  const int model_ks = algo == "wmmse" ? sc.cfg.M : k_s;
  const CostReport cost = cost_model(sc.cfg.M, sc.cfg.total_streams(), model_ks, sc.grid);
  cell.sparse_total_mults = cost.sparse_total;
  cell.dense_total_mults = cost.dense_total;
  return cell;
}

}  // namespace

RunSummary run_sweeps(const Scenario& sc, int threads) {
  const std::vector<std::string> algos = sc.algorithms();

  std::vector<ChannelSet> channels(sc.trials);
  parallel_for(sc.trials, threads,
               [&](int t) { channels[t] = sc.make_channel(sc.cfg.seed + t); });

  // Dense reference per (snr, trial); shared by every sparse algorithm at the
  // matched seed.
  const int n_snr = static_cast<int>(sc.snr_db.size());
  std::vector<double> wmmse_wsr(n_snr * sc.trials, 0.0);
  std::vector<int> wmmse_iters(n_snr * sc.trials, 0);
  parallel_for(n_snr * sc.trials, threads, [&](int i) {
    const int si = i / sc.trials;
    const int t = i % sc.trials;
    SystemConfig cfg = sc.cfg;
    cfg.seed = sc.cfg.seed + t;
    cfg.sigma2 = noise_from_snr(cfg, sc.snr_db[si]);
    const auto [sol, trace] =
        dense_wmmse_solve(cfg, channels[t], matched_filter_init(channels[t], cfg), 50, 1e-5);
    wmmse_wsr[i] = rate_report(channels[t], sol.V, cfg).wsr_bits;
    wmmse_iters[i] = iterations_to_tolerance(wsr_column(trace));
  });

  std::vector<CellTask> tasks;
  for (const auto& algo : algos) {
    if (algo == "wmmse") continue;
    for (int si = 0; si < n_snr; ++si)
      for (int k_s : sc.k_s_list)
        for (int t = 0; t < sc.trials; ++t) tasks.push_back({algo, si, k_s, t});
  }

  std::vector<SweepCell> sparse_cells(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), threads, [&](int i) {
    const CellTask& task = tasks[i];
    const double snr = sc.snr_db[task.snr_index];
    const double ref = wmmse_wsr[task.snr_index * sc.trials + task.trial];
    try {
      sparse_cells[i] = solve_cell(sc, channels[task.trial], task.algo, snr, task.k_s,
                                   sc.cfg.seed + task.trial, ref);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_sweeps: cell (" + task.algo + ", snr " +
                               format_number(snr) + " dB, K_s " + std::to_string(task.k_s) +
                               ", seed " + std::to_string(sc.cfg.seed + task.trial) +
                               "): " + e.what());
    }
  });

  RunSummary summary;
  // Deterministic row order: algorithm, then snr, then K_s, then seed.
  for (const auto& algo : algos) {
    if (algo != "wmmse") continue;
    for (int si = 0; si < n_snr; ++si)
      for (int t = 0; t < sc.trials; ++t) {
        SweepCell cell;
        cell.algo = "wmmse";
        cell.snr_db = sc.snr_db[si];
        cell.k_s = sc.cfg.M;
        cell.seed = sc.cfg.seed + t;
        cell.wsr_bits = wmmse_wsr[si * sc.trials + t];
        cell.gap_vs_wmmse = 0.0;
        cell.iters_to_tol = wmmse_iters[si * sc.trials + t];
        const CostReport cost =
            cost_model(sc.cfg.M, sc.cfg.total_streams(), sc.cfg.M, sc.grid);
        cell.sparse_total_mults = cost.sparse_total;
        cell.dense_total_mults = cost.dense_total;
        summary.cells.push_back(cell);
      }
  }
  size_t at = 0;
  for (const auto& algo : algos) {
    if (algo == "wmmse") continue;
    for (int si = 0; si < n_snr; ++si)
      for (size_t ki = 0; ki < sc.k_s_list.size(); ++ki)
        for (int t = 0; t < sc.trials; ++t) summary.cells.push_back(sparse_cells[at++]);
  }
  return summary;
}

double RunSummary::median_wsr(const std::string& algo, double snr, int k_s) const {
  std::vector<double> v;
  for (const auto& c : cells)
    if (c.algo == algo && c.snr_db == snr && (algo == "wmmse" || c.k_s == k_s))
      v.push_back(c.wsr_bits);
  return median(std::move(v));
}

double RunSummary::median_gap(const std::string& algo, double snr, int k_s) const {
  std::vector<double> v;
  for (const auto& c : cells)
    if (c.algo == algo && c.snr_db == snr && (algo == "wmmse" || c.k_s == k_s))
      v.push_back(c.gap_vs_wmmse);
  return median(std::move(v));
}

std::vector<std::string> run_convergence(const Scenario& sc) {
  const double snr = sc.snr_db.front();
  SystemConfig cfg = sc.cfg;
  cfg.sigma2 = noise_from_snr(cfg, snr);
  const ChannelSet ch = sc.make_channel(cfg.seed);
  const std::string prefix = sc.out_dir + "/converge_" + sc.hash();

  std::vector<std::string> written;
  nlohmann::ordered_json summary;
  summary["snr_db"] = snr;
  summary["k_s"] = cfg.K_s;

  auto emit_dense = [&](const std::string& algo, const DenseTrace& trace) {
    std::string csv = "iteration,wsr_bits,power_used\n";
    for (const auto& r : trace)
      csv += std::to_string(r.iteration) + "," + format_number(r.wsr_bits) + "," +
             format_number(r.power_used) + "\n";
    const std::string path = prefix + "_" + algo + ".csv";
    write_file(path, csv);
    written.push_back(path);
    summary[algo]["iters_to_1e-3"] = iterations_to_tolerance(wsr_column(trace));
    summary[algo]["final_wsr_bits"] = trace.back().wsr_bits;
  };
  auto emit_sparse = [&](const std::string& algo, const SparseTrace& trace, int k_users) {
    std::string csv = "iteration,wsr_bits,objective_nats,beta,mu,delta_hamming_change";
    if (algo == "allsp") {
      csv += ",active_beam_indices\n";
    } else {
      for (int k = 0; k < k_users; ++k) csv += ",active_beams_user_" + std::to_string(k);
      csv += "\n";
    }
    for (const auto& r : trace) {
      csv += std::to_string(r.iteration) + "," + format_number(r.wsr_bits) + "," +
             format_number(r.objective_nats) + "," + format_number(r.beta) + "," +
             format_number(r.mu) + "," + std::to_string(r.delta_hamming_change);
      for (const auto& sup : r.active_beams) csv += "," + join_support(sup);
      csv += "\n";
    }
    const std::string path = prefix + "_" + algo + ".csv";
    write_file(path, csv);
    written.push_back(path);
    summary[algo]["iters_to_1e-3"] = iterations_to_tolerance(wsr_column(trace));
    summary[algo]["final_wsr_bits"] = trace.back().wsr_bits;
  };

  for (const auto& algo : sc.algorithms()) {
    if (algo == "wmmse") {
      const auto [sol, trace] =
          dense_wmmse_solve(cfg, ch, matched_filter_init(ch, cfg), 50, 1e-5);
      emit_dense(algo, trace);
    } else if (algo == "greedy") {
      const std::vector<int> support = largest_indices(beam_energies(ch), cfg.K_s);
      const auto [sol, trace] =
          wmmse_on_support(cfg, ch, support, matched_filter_init(ch, cfg), 50, 1e-5);
      emit_dense(algo, trace);
    } else if (algo == "allsp") {
      const auto [sol, trace] = allsp_solve(cfg, ch, allsp_init(cfg, ch));
      emit_sparse(algo, trace, cfg.K);
    } else {
      const auto [sol, trace] = aullsp_solve(cfg, ch, aullsp_init(cfg, ch));
      emit_sparse(algo, trace, cfg.K);
    }
  }

  const std::string json_path = prefix + ".json";
  write_file(json_path, summary.dump(2) + "\n");
  written.push_back(json_path);
  return written;
}

std::vector<ComplexityRow> run_complexity_probe(const std::vector<int>& m_list,
                                                const SystemConfig& dims, int iterations) {
  if (iterations < 1) throw std::invalid_argument("complexity probe: iterations >= 1");
  const long long n = dims.total_rx();
  const long long d = dims.total_streams();
  const long long k_users = dims.K;
  std::vector<ComplexityRow> rows;
  for (int m : m_list) {
    if (m < 2) throw std::invalid_argument("complexity probe: M must be >= 2");
    ComplexityRow r;
    r.m = m;
    r.k_s = m / 2;
    const long long mm = m;
    const long long ks = r.k_s;
    // Dense precoder update: Gram assembly, M x M inversion, solution apply.
    r.wmmse_dominant = mm * mm * mm;
    r.wmmse_total = r.wmmse_dominant + 2 * mm * mm * d;
    // Sparse coefficient update: building H d H^H and the per-user effective
    // channels dominates in M; the N-dimensional algebra is M-independent.
    r.allsp_dominant = 2 * n * n * ks;
    r.allsp_total = r.allsp_dominant + 2 * n * n * d + n * n * n;
    r.aullsp_dominant = k_users * 2 * n * n * ks;
    r.aullsp_total = r.aullsp_dominant + k_users * (2 * n * n * d + n * n * n);
    r.wmmse_dominant *= iterations;
    r.wmmse_total *= iterations;
    r.allsp_dominant *= iterations;
    r.allsp_total *= iterations;
    r.aullsp_dominant *= iterations;
    r.aullsp_total *= iterations;
    rows.push_back(r);
  }
  return rows;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_loglog_slope: need at least two points");
  const size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<std::string> emit_sweep(const RunSummary& summary, const Scenario& sc) {
  std::string csv =
      "algo,snr_db,k_s,seed,wsr_bits,gap_vs_wmmse,iters_to_tol,sparse_total_mults,"
      "dense_total_mults\n";
  for (const auto& c : summary.cells)
    csv += c.algo + "," + format_number(c.snr_db) + "," + std::to_string(c.k_s) + "," +
           std::to_string(c.seed) + "," + format_number(c.wsr_bits) + "," +
           format_number(c.gap_vs_wmmse) + "," + std::to_string(c.iters_to_tol) + "," +
           std::to_string(c.sparse_total_mults) + "," + std::to_string(c.dense_total_mults) +
           "\n";
  const std::string csv_path = sc.out_dir + "/sweep_" + sc.hash() + ".csv";
  write_file(csv_path, csv);

  nlohmann::ordered_json j;
  j["scenario_hash"] = sc.hash();
  j["scenario"] = sc.canonical_text();
  j["points"] = nlohmann::ordered_json::array();
  for (const auto& algo : sc.algorithms()) {
    for (double snr : sc.snr_db) {
      const std::vector<int> ks_list =
          algo == "wmmse" ? std::vector<int>{sc.cfg.M} : sc.k_s_list;
      for (int k_s : ks_list) {
        nlohmann::ordered_json p;
        p["algo"] = algo;
        p["snr_db"] = snr;
        p["k_s"] = k_s;
        p["median_wsr_bits"] = summary.median_wsr(algo, snr, k_s);
        p["median_gap_vs_wmmse"] = summary.median_gap(algo, snr, k_s);
        const CostReport cost =
            cost_model(sc.cfg.M, sc.cfg.total_streams(), k_s, sc.grid);
        p["sparse_total_mults"] = cost.sparse_total;
        p["dense_total_mults"] = cost.dense_total;
        p["reduction_fraction"] = cost.reduction_fraction;
        j["points"].push_back(p);
      }
    }
  }
  const std::string json_path = sc.out_dir + "/sweep_" + sc.hash() + ".json";
  write_file(json_path, j.dump(2) + "\n");
  return {csv_path, json_path};
}

std::vector<std::string> emit_complexity(const std::vector<ComplexityRow>& rows,
                                         const Scenario& sc) {
  std::string csv =
      "m,k_s,wmmse_dominant,wmmse_total,allsp_dominant,allsp_total,aullsp_dominant,"
      "aullsp_total\n";
  std::vector<double> ms, wm, al, au;
  for (const auto& r : rows) {
    csv += std::to_string(r.m) + "," + std::to_string(r.k_s) + "," +
           std::to_string(r.wmmse_dominant) + "," + std::to_string(r.wmmse_total) + "," +
           std::to_string(r.allsp_dominant) + "," + std::to_string(r.allsp_total) + "," +
           std::to_string(r.aullsp_dominant) + "," + std::to_string(r.aullsp_total) + "\n";
    ms.push_back(r.m);
    wm.push_back(static_cast<double>(r.wmmse_dominant));
    al.push_back(static_cast<double>(r.allsp_dominant));
    au.push_back(static_cast<double>(r.aullsp_dominant));
  }
  const std::string csv_path = sc.out_dir + "/complexity_" + sc.hash() + ".csv";
  write_file(csv_path, csv);

  nlohmann::ordered_json j;
  j["scenario_hash"] = sc.hash();
  j["slope_wmmse"] = fit_loglog_slope(ms, wm);
  j["slope_allsp"] = fit_loglog_slope(ms, al);
  j["slope_aullsp"] = fit_loglog_slope(ms, au);
  const std::string json_path = sc.out_dir + "/complexity_" + sc.hash() + ".json";
  write_file(json_path, j.dump(2) + "\n");
  return {csv_path, json_path};
}

std::vector<std::string> emit_oracle(const OracleResult& result, const Scenario& sc) {
  std::string csv = "support,wsr_bits\n";
  for (const auto& entry : result.table) {
    std::vector<std::string> parts;
    for (const auto& sup : entry.supports) parts.push_back(join_support(sup));
    csv += join(parts, "|") + "," + format_number(entry.wsr_bits) + "\n";
  }
  const std::string csv_path = sc.out_dir + "/oracle_" + sc.hash() + ".csv";
  write_file(csv_path, csv);
  return {csv_path};
}

std::vector<std::string> emit_cost(const std::vector<CostReport>& models,
                                   const CostReport& measured, const Scenario& sc) {
  nlohmann::ordered_json j;
  j["scenario_hash"] = sc.hash();
  j["model"] = nlohmann::ordered_json::array();
  for (const auto& m : models) j["model"].push_back(nlohmann::ordered_json::parse(m.to_json()));
  j["measured"] = nlohmann::ordered_json::parse(measured.to_json());
  const std::string path = sc.out_dir + "/cost_" + sc.hash() + ".json";
  write_file(path, j.dump(2) + "\n");
  return {path};
}

}  // namespace beamsparse
