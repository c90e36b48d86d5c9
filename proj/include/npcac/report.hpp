#pragma once

/**
 * @file report.hpp
 * @brief Run artifacts: per-step CSV, JSON summary, G-hat grid table and
 * multi-seed comparisons.
 *
 * Numbers are printed with std::to_chars at 17 significant digits, which
 * does not consult the locale. log10 columns use -16 for exact zeros.
 */

#include "npcac/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace npcac {

inline constexpr const char* kCsvSchema = "npcac.run.v1";
inline constexpr const char* kSummarySchema = "npcac.summary.v1";
inline constexpr const char* kVersion = "1.0.0";

inline constexpr const char* kCsvHeader = "k,y,u,r,e_c,e_p,log10_abs_ec,log10_abs_ep,subiters,qp_ridge";

std::string format_double(double x);

std::string run_csv(const RunLog& log);

/// Windows outside the completed range are clipped; empty ones are skipped.
nlohmann::json run_summary(const ConfigDocument& doc, const RunLog& log);

/// Table of (y, G_1(y), Ghat_1(y)) using the estimate logged at `step`.
/// The step is clamped to the last completed step.
std::string ghat_table(const ConfigDocument& doc, const RunLog& log, long step);

/// Estimates every `every` steps: k followed by the coefficient vector.
std::string theta_table(const RunLog& log, long every);

/// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

struct RunArtifacts {
  std::filesystem::path csv;
  std::filesystem::path summary;
  std::filesystem::path ghat;
  std::filesystem::path theta;  // empty unless theta_every > 0
};

/// Writes <stem>.csv, <stem>.summary.json and <stem>.ghat.csv into dir.
RunArtifacts write_run(const std::filesystem::path& dir, const std::string& stem, const ConfigDocument& doc,
                       const RunLog& log);

struct CompareRow {
  std::string preset;
  double median_ec = 0.0;
  double median_ep = 0.0;
  std::vector<double> per_seed_ec;
  std::vector<double> per_seed_ep;
  std::vector<std::string> errors;  // one entry per aborted run
};

struct CompareRatio {
  std::string numerator;
  std::string denominator;
  double ec_ratio = 0.0;
  double ep_ratio = 0.0;
};

struct CompareResult {
  Window window;
  std::vector<CompareRow> rows;
  std::vector<CompareRatio> ratios;  // row j over row i for every i < j
};

double median(std::vector<double> values);

/// Runs every (preset, seed) pair, in parallel when threads > 1. Aborted
/// runs contribute the metrics of their completed steps.
CompareResult compare(const std::vector<std::string>& presets, const std::vector<std::uint64_t>& seeds, Window window,
                      long steps = 0, unsigned threads = 0);

std::string format_compare(const CompareResult& result);
nlohmann::json compare_json(const CompareResult& result);

}  // namespace npcac
