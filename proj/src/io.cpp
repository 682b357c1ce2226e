#include "spgmrf/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spgmrf/errors.hpp"

namespace spgmrf {

using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw data_error(path + ": invalid JSON: " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw data_error("failed writing " + path);
}

void check_version(const json& j, const std::string& path) {
  if (!j.contains("format_version") || !j["format_version"].is_number_integer())
    throw data_error(path + ": missing format_version");
  if (j["format_version"].get<int>() != kFormatVersion)
    throw data_error(path + ": unsupported format_version " +
                     std::to_string(j["format_version"].get<int>()));
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const std::string& path) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw data_error(path + ": unknown key '" + it.key() + "'");
  }
}

std::vector<double> theta_from_json(const json& j, const std::string& path) {
  if (!j.contains("p") || !j.contains("theta"))
    throw data_error(path + ": model needs 'p' and 'theta'");
  const int p = j["p"].get<int>();
  const auto& arr = j["theta"];
  if (!arr.is_array() || arr.empty()) throw data_error(path + ": theta must be a nonempty array");
  FeatureIndexer idx(p);
  if (static_cast<int>(arr.size()) != idx.m())
    throw data_error(path + ": theta has " + std::to_string(arr.size()) +
                     " entries, expected " + std::to_string(idx.m()));
  std::vector<double> theta(arr.size());
  for (std::size_t k = 0; k < arr.size(); ++k) {
    if (!arr[k].is_number()) throw data_error(path + ": theta entries must be numbers");
    theta[k] = arr[k].get<double>();
    if (!std::isfinite(theta[k])) throw data_error(path + ": non-finite theta entry");
  }
  return theta;
}

json model_to_json(const ModelParams& model) {
  for (double v : model.theta())
    if (!std::isfinite(v)) throw data_error("refusing to save non-finite theta");
  json j;
  j["format_version"] = kFormatVersion;
  j["p"] = model.p();
  j["theta"] = std::vector<double>(model.theta().begin(), model.theta().end());
  return j;
}

}  // namespace

Dataset load_binary_csv(const std::string& path, bool impute_missing_as_zero) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);

  // split on commas keeping empty fields, including a trailing one
  const auto split = [](const std::string& line, std::vector<std::string>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        out.push_back(line.substr(start));
        return;
      }
      out.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
  };

  std::string line;
  std::vector<std::string> cells;
  if (!std::getline(in, line)) throw data_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  split(line, cells);
  const int p = static_cast<int>(cells.size());
  if (p < 1 || cells[0].empty()) throw data_error(path + ": header row has no columns");

  std::vector<Assignment> samples;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    split(line, cells);
    if (static_cast<int>(cells.size()) != p)
      throw data_error(path + ": line " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " cells, expected " + std::to_string(p));
    Assignment a(p);
    for (int col = 0; col < p; ++col) {
      const auto& cell = cells[col];
      if (cell == "1") {
        a.set_bit(col, 1);
      } else if (cell == "0") {
        // default
      } else if (impute_missing_as_zero) {
        // anything else (empty, NA, ...) imputed to 0
      } else {
        throw data_error(path + ": line " + std::to_string(line_no) + " cell '" + cell +
                         "' is not 0/1 (pass the imputation flag to zero-fill)");
      }
    }
    samples.push_back(std::move(a));
  }
  if (samples.empty()) throw data_error(path + ": no sample rows");
  return Dataset(FeatureIndexer(p), std::move(samples));
}

void save_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot open " + path + " for writing");
  const int p = data.p();
  for (int i = 0; i < p; ++i) out << (i ? "," : "") << 'x' << (i + 1);
  out << '\n';
  for (const auto& s : data.samples()) {
    for (int i = 0; i < p; ++i) out << (i ? "," : "") << s.bit(i);
    out << '\n';
  }
  if (!out) throw data_error("failed writing " + path);
}

ModelParams load_model_json(const std::string& path) {
  const json j = load_json_file(path);
  check_version(j, path);
  reject_unknown_keys(j, {"format_version", "p", "theta"}, path);
  auto theta = theta_from_json(j, path);
  const int p = j["p"].get<int>();
  return ModelParams(FeatureIndexer(p), std::move(theta));
}

void save_model_json(const std::string& path, const ModelParams& model) {
  write_json_file(path, model_to_json(model));
}

GroundTruth load_truth_json(const std::string& path) {
  const json j = load_json_file(path);
  check_version(j, path);
  reject_unknown_keys(j, {"format_version", "p", "theta", "edges"}, path);
  auto theta = theta_from_json(j, path);
  const int p = j["p"].get<int>();
  ModelParams model(FeatureIndexer(p), std::move(theta));
  if (!j.contains("edges") || !j["edges"].is_array())
    throw data_error(path + ": truth needs an 'edges' array");
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2) throw data_error(path + ": edges must be [i,j] pairs");
    const int i = e[0].get<int>(), jj = e[1].get<int>();  // 1-based in file
    if (i < 1 || jj <= i || jj > p) throw data_error(path + ": bad edge pair");
    edges.emplace_back(i - 1, jj - 1);
  }
  return GroundTruth{std::move(model), std::move(edges)};
}

void save_truth_json(const std::string& path, const GroundTruth& truth) {
  json j = model_to_json(truth.theta_true);
  json edges = json::array();
  for (const auto& [i, jj] : truth.edges) edges.push_back({i + 1, jj + 1});
  j["edges"] = std::move(edges);
  write_json_file(path, j);
}

RunConfig load_run_config(const std::string& path) {
  const json j = load_json_file(path);
  check_version(j, path);
  reject_unknown_keys(j,
                      {"format_version", "alpha", "lambda", "q", "strategy", "tau_max",
                       "max_iters", "stop_tol", "init_mode", "seed", "beta_total",
                       "init_random_scale", "record_exact", "data", "trace", "model_out",
                       "experiment", "impute_missing", "timing", "threads", "rng"},
                      path);
  RunConfig cfg;
  try {
    if (j.contains("alpha")) cfg.spg.alpha = j["alpha"].get<double>();
    if (j.contains("lambda")) cfg.spg.lambda = j["lambda"].get<double>();
    if (j.contains("q")) cfg.spg.q = j["q"].get<int>();
    if (j.contains("strategy"))
      cfg.spg.strategy = TauStrategy::parse(j["strategy"].get<std::string>());
    if (j.contains("tau_max")) cfg.spg.tau_max = j["tau_max"].get<int>();
    if (j.contains("max_iters")) cfg.spg.max_iters = j["max_iters"].get<int>();
    if (j.contains("stop_tol")) cfg.spg.stop_tol = j["stop_tol"].get<double>();
    if (j.contains("init_mode"))
      cfg.spg.init_mode = parse_init_mode(j["init_mode"].get<std::string>());
    if (j.contains("seed")) cfg.spg.master_seed = j["seed"].get<std::uint64_t>();
    if (j.contains("beta_total")) cfg.spg.beta_total = j["beta_total"].get<double>();
    if (j.contains("init_random_scale"))
      cfg.spg.init_random_scale = j["init_random_scale"].get<double>();
    if (j.contains("record_exact")) cfg.spg.record_exact = j["record_exact"].get<bool>();
    if (j.contains("data")) cfg.data_path = j["data"].get<std::string>();
    if (j.contains("trace")) cfg.trace_path = j["trace"].get<std::string>();
    if (j.contains("model_out")) cfg.model_out_path = j["model_out"].get<std::string>();
    if (j.contains("experiment")) cfg.experiment = j["experiment"].get<std::string>();
    if (j.contains("impute_missing")) cfg.impute_missing = j["impute_missing"].get<bool>();
    if (j.contains("timing")) cfg.timing = j["timing"].get<bool>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  } catch (const json::exception& e) {
    throw data_error(path + ": bad field type: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw data_error(path + ": " + e.what());
  }
  return cfg;
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
  json j;
  j["format_version"] = kFormatVersion;
  j["alpha"] = cfg.spg.alpha;
  j["lambda"] = cfg.spg.lambda;
  j["q"] = cfg.spg.q;
  j["strategy"] = cfg.spg.strategy.str();
  j["tau_max"] = cfg.spg.tau_max;
  j["max_iters"] = cfg.spg.max_iters;
  j["stop_tol"] = cfg.spg.stop_tol;
  j["init_mode"] = to_string(cfg.spg.init_mode);
  j["seed"] = cfg.spg.master_seed;
  j["beta_total"] = cfg.spg.beta_total;
  j["init_random_scale"] = cfg.spg.init_random_scale;
  j["record_exact"] = cfg.spg.record_exact;
  j["data"] = cfg.data_path;
  j["trace"] = cfg.trace_path;
  j["model_out"] = cfg.model_out_path;
  j["experiment"] = cfg.experiment;
  j["impute_missing"] = cfg.impute_missing;
  j["timing"] = cfg.timing;
  j["threads"] = cfg.threads;
  j["rng"] = kRngAlgorithm;
  write_json_file(path, j);
}

namespace {
void write_num(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}
}  // namespace

void save_trace_csv(const std::string& path, const std::vector<IterateRecord>& records,
                    bool with_timing, bool with_exact_obj) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot open " + path + " for writing");
  out << "iter,tau,gnorm,asym_bound";
  if (with_timing) out << ",time_ms";
  if (with_exact_obj) out << ",exact_obj";
  out << '\n';
  for (const auto& r : records) {
    out << r.iter << ',' << r.tau_used << ',';
    write_num(out, r.gnorm);
    out << ',';
    write_num(out, r.asym_bound);
    if (with_timing) {
      out << ',';
      write_num(out, r.wall_ms);
    }
    if (with_exact_obj) {
      out << ',';
      if (!r.exact_obj.has_value())
        throw data_error("trace requested exact_obj but run was not instrumented");
      write_num(out, *r.exact_obj);
    }
    out << '\n';
  }
  if (!out) throw data_error("failed writing " + path);
}

TraceTable load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  TraceTable table;
  std::string line;
  if (!std::getline(in, line)) throw data_error(path + ": empty trace");
  {
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw data_error(path + ": line " + std::to_string(line_no) + " bad number '" + cell +
                         "'");
      }
    }
    if (row.size() != table.columns.size())
      throw data_error(path + ": line " + std::to_string(line_no) + " column count mismatch");
    table.rows.push_back(std::move(row));
  }
  return table;
}

void save_bounds_csv(const std::string& path,
                     const std::vector<std::tuple<int, double, double>>& rows) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot open " + path + " for writing");
  out << "tau,grand_sum,asym_bound\n";
  for (const auto& [tau, gs, ab] : rows) {
    out << tau << ',';
    write_num(out, gs);
    out << ',';
    write_num(out, ab);
    out << '\n';
  }
  if (!out) throw data_error("failed writing " + path);
}

}  // namespace spgmrf
