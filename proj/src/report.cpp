#include "npcac/report.hpp"

#include "npcac/presets.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

namespace npcac {

using nlohmann::json;

std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

std::string run_csv(const RunLog& log) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& rec : log.records) {
    out += std::to_string(rec.k);
    for (double v : {rec.y, rec.u, rec.r, rec.e_c, rec.e_p, log10_abs(rec.e_c), log10_abs(rec.e_p)}) {
      out += ',';
      out += format_double(v);
    }
    out += ',';
    out += std::to_string(rec.subiterations);
    out += rec.ridge ? ",1\n" : ",0\n";
  }
  return out;
}

json run_summary(const ConfigDocument& doc, const RunLog& log) {
  json j;
  j["schema"] = kSummarySchema;
  j["csv_schema"] = kCsvSchema;
  j["versions"] = {{"npcac", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"compiler", __VERSION__}};
  j["name"] = doc.sim.name;
  j["seed"] = doc.sim.seed;
  j["steps_requested"] = doc.sim.steps;
  j["steps_completed"] = static_cast<long>(log.records.size());
  j["error"] = log.ok() ? json(nullptr) : json(log.error);
  j["sigma_u"] = {{"value", doc.sim.sigma_u}, {"interpretation", "standard deviation"}};

  json windows = json::array();
  const long done = static_cast<long>(log.records.size());
  for (const auto& w : doc.output.windows) {
    const Window clipped{w.first, std::min(w.last, done)};
    if (clipped.last < clipped.first) continue;
    const Metrics m = metrics(log, clipped);
    windows.push_back({{"first", clipped.first},
                       {"last", clipped.last},
                       {"mean_abs_ec", m.mean_abs_ec},
                       {"mean_abs_ep", m.mean_abs_ep},
                       {"max_abs_u", m.max_abs_u}});
  }
  j["metrics"] = windows;

  long ridge = 0, diverged = 0, qp_iters = 0;
  double max_residual = 0.0, wall = 0.0, max_wall = 0.0;
  for (const auto& r : log.records) {
    ridge += r.ridge ? 1 : 0;
    diverged += r.diverged ? 1 : 0;
    qp_iters += r.qp_iterations;
    max_residual = std::max(max_residual, r.residual);
    wall += r.wall_seconds;
    max_wall = std::max(max_wall, r.wall_seconds);
  }
  j["diagnostics"] = {{"ridge_steps", ridge},
                      {"diverged_rollout_steps", diverged},
                      {"qp_iterations", qp_iters},
                      {"max_fixed_point_residual", max_residual},
                      {"wall_seconds", wall},
                      {"max_step_wall_seconds", max_wall}};
  j["config"] = to_json(doc);
  return j;
}

std::string ghat_table(const ConfigDocument& doc, const RunLog& log, long step) {
  if (log.records.empty()) throw std::invalid_argument("ghat_table: empty run log");
  step = std::clamp(step, 1L, static_cast<long>(log.records.size()));
  const StepRecord& rec = log.records[static_cast<std::size_t>(step - 1)];
  const ModelStructure& s = doc.sim.model;
  const CoefficientVector theta(s, rec.theta);
  const GridSpec& g = doc.output.grid;

  std::string out = "y,G_true,G_hat\n";
  for (int i = 0; i < g.points; ++i) {
    const double y = g.lo + (g.hi - g.lo) * i / (g.points - 1);
    const double truth = evaluate(doc.sim.plant.G.front(), y);
    const double est = eval_Ghat(s, theta, 1, y);
    out += format_double(y) + ',' + format_double(truth) + ',' + format_double(est) + '\n';
  }
  return out;
}

std::string theta_table(const RunLog& log, long every) {
  if (every <= 0) throw std::invalid_argument("theta_table: cadence must be positive");
  std::string out = "k";
  if (!log.records.empty())
    for (Eigen::Index i = 0; i < log.records.front().theta.size(); ++i) out += ",theta" + std::to_string(i);
  out += '\n';
  for (const auto& r : log.records) {
    if (r.k % every != 0) continue;
    out += std::to_string(r.k);
    for (Eigen::Index i = 0; i < r.theta.size(); ++i) out += ',' + format_double(r.theta[i]);
    out += '\n';
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

RunArtifacts write_run(const std::filesystem::path& dir, const std::string& stem, const ConfigDocument& doc,
                       const RunLog& log) {
  std::filesystem::create_directories(dir);
  RunArtifacts a;
  a.csv = dir / (stem + ".csv");
  a.summary = dir / (stem + ".summary.json");
  a.ghat = dir / (stem + ".ghat.csv");
  write_atomic(a.csv, run_csv(log));
  write_atomic(a.summary, run_summary(doc, log).dump(2) + '\n');
  if (!log.records.empty()) write_atomic(a.ghat, ghat_table(doc, log, doc.output.snapshot_step));
  if (doc.output.theta_every > 0) {
    a.theta = dir / (stem + ".theta.csv");
    write_atomic(a.theta, theta_table(log, doc.output.theta_every));
  }
  return a;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

struct SeedOutcome {
  double ec = 0.0;
  double ep = 0.0;
  std::string error;
};

SeedOutcome run_one(SimConfig cfg, std::uint64_t seed, Window window, long steps) {
  cfg.seed = seed;
  if (steps > 0) cfg.steps = steps;
  const RunLog log = run_closed_loop(cfg);
  SeedOutcome out;
  out.error = log.error;
  const Window clipped{window.first, std::min(window.last, static_cast<long>(log.records.size()))};
  if (clipped.last < clipped.first) {
    out.ec = out.ep = std::numeric_limits<double>::infinity();
    if (out.error.empty()) out.error = "window beyond the completed steps";
    return out;
  }
  const Metrics m = metrics(log, clipped);
  out.ec = m.mean_abs_ec;
  out.ep = m.mean_abs_ep;
  return out;
}

}  // namespace

CompareResult compare(const std::vector<std::string>& presets, const std::vector<std::uint64_t>& seeds, Window window,
                      long steps, unsigned threads) {
  if (presets.empty()) throw std::invalid_argument("compare: no presets given");
  if (seeds.empty()) throw std::invalid_argument("compare: no seeds given");
  std::vector<SimConfig> configs;
  for (const auto& p : presets) configs.push_back(preset(p));

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t jobs = presets.size() * seeds.size();
  std::vector<SeedOutcome> outcomes(jobs);
  std::vector<std::future<void>> running;
  std::size_t next = 0;
  auto launch = [&](std::size_t idx) {
    return std::async(std::launch::async, [&, idx] {
      outcomes[idx] = run_one(configs[idx / seeds.size()], seeds[idx % seeds.size()], window, steps);
    });
  };
  while (next < jobs || !running.empty()) {
    while (next < jobs && running.size() < threads) running.push_back(launch(next++));
    running.front().get();
    running.erase(running.begin());
  }

  CompareResult result;
  result.window = window;
  for (std::size_t p = 0; p < presets.size(); ++p) {
    CompareRow row;
    row.preset = presets[p];
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const SeedOutcome& o = outcomes[p * seeds.size() + s];
      row.per_seed_ec.push_back(o.ec);
      row.per_seed_ep.push_back(o.ep);
      if (!o.error.empty()) row.errors.push_back("seed " + std::to_string(seeds[s]) + ": " + o.error);
    }
    row.median_ec = median(row.per_seed_ec);
    row.median_ep = median(row.per_seed_ep);
    result.rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < result.rows.size(); ++i)
    for (std::size_t j = i + 1; j < result.rows.size(); ++j)
      result.ratios.push_back({result.rows[j].preset, result.rows[i].preset,
                               result.rows[j].median_ec / result.rows[i].median_ec,
                               result.rows[j].median_ep / result.rows[i].median_ep});
  return result;
}

std::string format_compare(const CompareResult& r) {
  std::ostringstream os;
  os << "window " << r.window.first << ".." << r.window.last << " (median over seeds)\n";
  os << std::left << std::setw(12) << "preset" << std::setw(16) << "mean|e_c|" << std::setw(16) << "mean|e_p|"
     << "failures\n";
  os << std::setprecision(6);
  for (const auto& row : r.rows)
    os << std::setw(12) << row.preset << std::setw(16) << row.median_ec << std::setw(16) << row.median_ep
       << row.errors.size() << '\n';
  for (const auto& q : r.ratios)
    os << q.numerator << '/' << q.denominator << "  e_c ratio " << q.ec_ratio << "  e_p ratio " << q.ep_ratio << '\n';
  return os.str();
}

json compare_json(const CompareResult& r) {
  json j;
  j["schema"] = "npcac.compare.v1";
  j["window"] = {r.window.first, r.window.last};
  j["rows"] = json::array();
  for (const auto& row : r.rows)
    j["rows"].push_back({{"preset", row.preset},
                         {"median_mean_abs_ec", row.median_ec},
                         {"median_mean_abs_ep", row.median_ep},
                         {"per_seed_mean_abs_ec", row.per_seed_ec},
                         {"per_seed_mean_abs_ep", row.per_seed_ep},
                         {"errors", row.errors}});
  j["ratios"] = json::array();
  for (const auto& q : r.ratios)
    j["ratios"].push_back(
        {{"numerator", q.numerator}, {"denominator", q.denominator}, {"ec", q.ec_ratio}, {"ep", q.ep_ratio}});
  return j;
}

}  // namespace npcac
