#pragma once

#include <string>
#include <vector>

#include "spgmrf/eval.hpp"
#include "spgmrf/model.hpp"
#include "spgmrf/optimizer.hpp"

namespace spgmrf {

/// Everything a learn run needs, file paths included. The JSON form is
/// strict: unknown keys are rejected so typos fail loudly.
struct RunConfig {
  SpgConfig spg;
  std::string data_path;
  std::string trace_path;      // empty = no trace file
  std::string model_out_path;  // empty = no model file
  std::string experiment;
  bool impute_missing = false;
  bool timing = false;  // adds wall-clock columns; breaks byte-reproducibility
  int threads = 0;
};

inline constexpr int kFormatVersion = 1;

/**
 * Binary dataset CSV: header row x1,...,xp then one 0/1 row per sample.
 * Cells outside {0,1} (empty, NA, anything else) are imputed to 0 when the
 * flag is set and rejected otherwise. Ragged rows name the offending line.
 */
Dataset load_binary_csv(const std::string& path, bool impute_missing_as_zero);
void save_dataset_csv(const std::string& path, const Dataset& data);

ModelParams load_model_json(const std::string& path);
void save_model_json(const std::string& path, const ModelParams& model);

GroundTruth load_truth_json(const std::string& path);
void save_truth_json(const std::string& path, const GroundTruth& truth);

RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& config);

/// Trace CSV columns: iter,tau,gnorm,asym_bound[,time_ms][,exact_obj].
void save_trace_csv(const std::string& path, const std::vector<IterateRecord>& records,
                    bool with_timing, bool with_exact_obj);

struct TraceTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
TraceTable load_trace_csv(const std::string& path);

void save_bounds_csv(const std::string& path,
                     const std::vector<std::tuple<int, double, double>>& rows);

}  // namespace spgmrf
