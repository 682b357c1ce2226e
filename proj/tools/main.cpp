#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spgmrf/errors.hpp"
#include "spgmrf/eval.hpp"
#include "spgmrf/exact.hpp"
#include "spgmrf/io.hpp"
#include "spgmrf/optimizer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spgmrf;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitCapacity = 4;

std::string resolve(const std::string& out_dir, const std::string& path) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(out_dir) / p).string();
}

void echo_config(const std::string& out_dir, const std::string& subcommand, json flags) {
  flags["format_version"] = kFormatVersion;
  flags["subcommand"] = subcommand;
  flags["rng"] = kRngAlgorithm;
  std::ofstream out(fs::path(out_dir) / (subcommand + "_config.json"));
  if (!out) throw data_error("cannot write config echo in " + out_dir);
  out << flags.dump(2) << '\n';
}

ModelParams load_model_or_truth(const std::string& path) {
  try {
    return load_model_json(path);
  } catch (const data_error&) {
    return load_truth_json(path).theta_true;
  }
}

Assignment parse_bitstring(const std::string& s, int p) {
  if (static_cast<int>(s.size()) != p)
    throw data_error("x0 bitstring must have exactly p characters");
  std::vector<int> bits(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw data_error("x0 bitstring must be 0/1");
    bits[i] = s[i] - '0';
  }
  return Assignment::from_bits(bits);
}

struct ExperimentStrategy {
  std::string label;
  TauStrategy strategy;
};

void write_experiment_trace(const std::string& path, const std::vector<IterateRecord>& records,
                            const std::vector<double>& aucs, bool timing) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot open " + path + " for writing");
  out << "iter,tau,gnorm,asym_bound,auc";
  if (timing) out << ",time_ms";
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out << r.iter << ',' << r.tau_used << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.gnorm);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.asym_bound);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.6f", aucs[i]);
    out << buf;
    if (timing) {
      std::snprintf(buf, sizeof(buf), "%.3f", r.wall_ms);
      out << ',' << buf;
    }
    out << '\n';
  }
}

int run(int argc, char** argv) {
  CLI::App app{"sparse binary pairwise Markov network learning with a Gibbs gradient oracle"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "cap worker threads (0 = library default)");

  // generate
  auto* gen = app.add_subcommand("generate", "draw a random sparse ground-truth model");
  int gen_p = 10;
  double gen_edge_prob = 0.3, gen_wlow = 1.0, gen_whigh = 2.0;
  std::uint64_t gen_seed = 0;
  std::string gen_truth_out = "truth.json", gen_dir = ".";
  gen->add_option("--p", gen_p, "node count")->required();
  gen->add_option("--edge-prob", gen_edge_prob, "edge probability");
  gen->add_option("--w-low", gen_wlow, "lower edge-weight magnitude");
  gen->add_option("--w-high", gen_whigh, "upper edge-weight magnitude");
  gen->add_option("--seed", gen_seed, "master seed");
  gen->add_option("--truth-out", gen_truth_out, "output truth JSON");
  gen->add_option("--out-dir", gen_dir, "output directory");

  // sample
  auto* smp = app.add_subcommand("sample", "draw a dataset by burned-in Gibbs chains");
  std::string smp_model, smp_out = "data.csv", smp_dir = ".";
  int smp_n = 1000, smp_burn = 1000;
  std::uint64_t smp_seed = 0;
  smp->add_option("--model", smp_model, "model or truth JSON")->required();
  smp->add_option("--n", smp_n, "sample count");
  smp->add_option("--burn-in", smp_burn, "sweeps per chain before collection");
  smp->add_option("--seed", smp_seed, "master seed");
  smp->add_option("--data-out", smp_out, "output CSV");
  smp->add_option("--out-dir", smp_dir, "output directory");

  // learn
  auto* lrn = app.add_subcommand("learn", "sparse model fit by stochastic proximal gradient");
  std::string lrn_data, lrn_trace, lrn_model_out, lrn_config, lrn_dir = ".";
  std::string lrn_strategy = "tay", lrn_init_mode = "uniform";
  SpgConfig lrn_cfg;
  lrn_cfg.lambda = 0.025;
  bool lrn_impute = false, lrn_timing = false, lrn_exact = false;
  lrn->add_option("--data", lrn_data, "dataset CSV");
  lrn->add_option("--config", lrn_config, "run-config JSON (flags override it)");
  lrn->add_option("--lambda", lrn_cfg.lambda, "L1 weight");
  lrn->add_option("--alpha", lrn_cfg.alpha, "step length");
  lrn->add_option("--q", lrn_cfg.q, "Gibbs chain count");
  lrn->add_option("--strategy", lrn_strategy, "fixed:N | increasing | tay");
  lrn->add_option("--tau-max", lrn_cfg.tau_max, "sweep cap per iteration");
  lrn->add_option("--max-iters", lrn_cfg.max_iters, "iteration cap");
  lrn->add_option("--stop-tol", lrn_cfg.stop_tol, "relative iterate-change stop (0 = off)");
  lrn->add_option("--seed", lrn_cfg.master_seed, "master seed");
  lrn->add_option("--init-mode", lrn_init_mode, "uniform | zeros | data | persistent");
  lrn->add_option("--init-random-scale", lrn_cfg.init_random_scale,
                  "nonzero starts theta uniform in [-s, s]");
  lrn->add_option("--beta-total", lrn_cfg.beta_total, "total confidence budget");
  lrn->add_flag("--impute-missing", lrn_impute, "zero-fill non-binary cells");
  lrn->add_flag("--timing", lrn_timing, "add wall-clock column (not byte-reproducible)");
  lrn->add_flag("--exact-obj", lrn_exact, "record exact objective (small p only)");
  lrn->add_option("--trace", lrn_trace, "per-iteration trace CSV");
  lrn->add_option("--model-out", lrn_model_out, "fitted model JSON");
  lrn->add_option("--out-dir", lrn_dir, "output directory");

  // eval
  auto* evl = app.add_subcommand("eval", "score a fitted model against a ground truth");
  std::string evl_truth, evl_model, evl_out = "metrics.json", evl_dir = ".";
  evl->add_option("--truth", evl_truth, "truth JSON")->required();
  evl->add_option("--model", evl_model, "fitted model JSON")->required();
  evl->add_option("--out", evl_out, "metrics JSON");
  evl->add_option("--out-dir", evl_dir, "output directory");

  // bounds
  auto* bnd = app.add_subcommand("bounds", "mixing-bound trace over a sweep-count range");
  std::string bnd_model, bnd_out = "bounds.csv", bnd_dir = ".";
  int bnd_tau_min = 1, bnd_tau_max = 50;
  bnd->add_option("--model", bnd_model, "model JSON")->required();
  bnd->add_option("--tau-min", bnd_tau_min, "first sweep count");
  bnd->add_option("--tau-max", bnd_tau_max, "last sweep count");
  bnd->add_option("--out", bnd_out, "output CSV (tau,grand_sum,asym_bound)");
  bnd->add_option("--out-dir", bnd_dir, "output directory");

  // oracle
  auto* orc = app.add_subcommand("oracle", "exact enumeration queries for debugging");
  std::string orc_model, orc_data, orc_op, orc_x0;
  double orc_lambda = 0.0;
  int orc_tau = 1;
  bool orc_impute = false;
  orc->add_option("--model", orc_model, "model JSON")->required();
  orc->add_option("--op", orc_op,
                  "log-partition | moments | gradient | objective | tv | kernel")
      ->required();
  orc->add_option("--data", orc_data, "dataset CSV (gradient/objective)");
  orc->add_option("--lambda", orc_lambda, "L1 weight (objective)");
  orc->add_option("--x0", orc_x0, "start state bitstring (tv)");
  orc->add_option("--tau", orc_tau, "sweep count (tv)");
  orc->add_flag("--impute-missing", orc_impute, "zero-fill non-binary cells");

  // experiment
  auto* exp = app.add_subcommand("experiment", "canned end-to-end studies");
  std::string exp_name, exp_dir = ".";
  int exp_p = 10, exp_n = 1000, exp_burn = 1000, exp_iters = 150, exp_tau_fixed = 30;
  int exp_trials = 1, exp_tau_max = 500, exp_q = 2000;
  double exp_edge_prob = 0.3, exp_lambda = 0.025, exp_alpha = 0.4;
  std::uint64_t exp_seed = 0;
  bool exp_timing = false;
  exp->add_option("name", exp_name, "experiment name (paper-synthetic)")->required();
  exp->add_option("--p", exp_p, "node count");
  exp->add_option("--n", exp_n, "sample count");
  exp->add_option("--edge-prob", exp_edge_prob, "edge probability");
  exp->add_option("--burn-in", exp_burn, "data-generation burn-in");
  exp->add_option("--iters", exp_iters, "learning iterations");
  exp->add_option("--tau-fixed", exp_tau_fixed, "tau of the fixed-sweep baseline");
  exp->add_option("--tau-max", exp_tau_max, "sweep cap per iteration");
  exp->add_option("--q", exp_q, "chain count");
  exp->add_option("--lambda", exp_lambda, "L1 weight");
  exp->add_option("--alpha", exp_alpha, "step length");
  exp->add_option("--seed", exp_seed, "master seed");
  exp->add_option("--trials", exp_trials, "independent repetitions");
  std::string exp_init_mode = "zeros";
  exp->add_option("--init-mode", exp_init_mode,
                  "chain init per iteration (default zeros: the fixed-start protocol)");
  exp->add_flag("--timing", exp_timing, "add wall-clock columns (not byte-reproducible)");
  exp->add_option("--out-dir", exp_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;  // --help
    json err{{"error", {{"type", "usage"}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return kExitUsage;
  }

  if (threads > 0) par::set_max_threads(threads);

  if (*gen) {
    fs::create_directories(gen_dir);
    const auto truth = generate_ground_truth(gen_p, gen_edge_prob, gen_wlow, gen_whigh, gen_seed);
    save_truth_json(resolve(gen_dir, gen_truth_out), truth);
    echo_config(gen_dir, "generate",
                {{"p", gen_p},
                 {"edge_prob", gen_edge_prob},
                 {"w_low", gen_wlow},
                 {"w_high", gen_whigh},
                 {"seed", gen_seed},
                 {"truth_out", gen_truth_out}});
    std::cout << json{{"edges", truth.edges.size()}, {"p", gen_p}}.dump() << '\n';
    return 0;
  }

  if (*smp) {
    fs::create_directories(smp_dir);
    const auto model = load_model_or_truth(smp_model);
    GroundTruth truth{model, {}};
    const auto data = sample_dataset(truth, smp_n, smp_burn, smp_seed);
    save_dataset_csv(resolve(smp_dir, smp_out), data);
    echo_config(smp_dir, "sample",
                {{"model", smp_model},
                 {"n", smp_n},
                 {"burn_in", smp_burn},
                 {"seed", smp_seed},
                 {"data_out", smp_out}});
    std::cout << json{{"n", data.n()}, {"p", data.p()}}.dump() << '\n';
    return 0;
  }

  if (*lrn) {
    RunConfig cfg;
    if (!lrn_config.empty()) cfg = load_run_config(lrn_config);
    // explicit flags override the config file
    auto passed = [&](const std::string& name) { return lrn->count(name) > 0; };
    if (passed("--data")) cfg.data_path = lrn_data;
    if (passed("--lambda") || lrn_config.empty()) cfg.spg.lambda = lrn_cfg.lambda;
    if (passed("--alpha") || lrn_config.empty()) cfg.spg.alpha = lrn_cfg.alpha;
    if (passed("--q") || lrn_config.empty()) cfg.spg.q = lrn_cfg.q;
    if (passed("--strategy") || lrn_config.empty())
      cfg.spg.strategy = TauStrategy::parse(lrn_strategy);
    if (passed("--tau-max") || lrn_config.empty()) cfg.spg.tau_max = lrn_cfg.tau_max;
    if (passed("--max-iters") || lrn_config.empty()) cfg.spg.max_iters = lrn_cfg.max_iters;
    if (passed("--stop-tol") || lrn_config.empty()) cfg.spg.stop_tol = lrn_cfg.stop_tol;
    if (passed("--seed") || lrn_config.empty()) cfg.spg.master_seed = lrn_cfg.master_seed;
    if (passed("--init-mode") || lrn_config.empty())
      cfg.spg.init_mode = parse_init_mode(lrn_init_mode);
    if (passed("--init-random-scale") || lrn_config.empty())
      cfg.spg.init_random_scale = lrn_cfg.init_random_scale;
    if (passed("--beta-total") || lrn_config.empty()) cfg.spg.beta_total = lrn_cfg.beta_total;
    if (passed("--impute-missing")) cfg.impute_missing = lrn_impute;
    if (passed("--timing")) cfg.timing = lrn_timing;
    if (passed("--exact-obj")) cfg.spg.record_exact = lrn_exact;
    if (passed("--trace")) cfg.trace_path = lrn_trace;
    if (passed("--model-out")) cfg.model_out_path = lrn_model_out;
    if (threads > 0) cfg.threads = threads;
    if (cfg.threads > 0) par::set_max_threads(cfg.threads);
    if (cfg.data_path.empty()) throw data_error("learn: --data (or a config file) is required");

    fs::create_directories(lrn_dir);
    const auto data = load_binary_csv(cfg.data_path, cfg.impute_missing);
    const auto result = run_spg(data, cfg.spg);

    if (!cfg.model_out_path.empty())
      save_model_json(resolve(lrn_dir, cfg.model_out_path),
                      ModelParams(FeatureIndexer(result.p), result.theta_final));
    if (!cfg.trace_path.empty())
      save_trace_csv(resolve(lrn_dir, cfg.trace_path), result.records, cfg.timing,
                     cfg.spg.record_exact);
    save_run_config((fs::path(lrn_dir) / "learn_config.json").string(), cfg);

    json summary{{"iterations", result.records.size()},
                 {"stopped_by_tol", result.stopped_by_tol},
                 {"final_l1", l1_norm(result.theta_final)},
                 {"final_gnorm", result.records.empty() ? 0.0 : result.records.back().gnorm}};
    std::cout << summary.dump() << '\n';
    return 0;
  }

  if (*evl) {
    fs::create_directories(evl_dir);
    const auto truth = load_truth_json(evl_truth);
    const auto model = load_model_json(evl_model);
    const double auc = structure_auc(model, truth);
    json metrics{{"format_version", kFormatVersion},
                 {"auc", auc},
                 {"p", truth.theta_true.p()},
                 {"true_edges", truth.edges.size()}};
    std::ofstream out(resolve(evl_dir, evl_out));
    if (!out) throw data_error("cannot write " + evl_out);
    out << metrics.dump(2) << '\n';
    echo_config(evl_dir, "eval", {{"truth", evl_truth}, {"model", evl_model}, {"out", evl_out}});
    std::cout << metrics.dump() << '\n';
    return 0;
  }

  if (*bnd) {
    if (bnd_tau_min < 1 || bnd_tau_max < bnd_tau_min)
      throw data_error("bounds: need 1 <= tau-min <= tau-max");
    fs::create_directories(bnd_dir);
    const auto model = load_model_or_truth(bnd_model);
    const auto bound = influence_matrix(model);
    const double sqrt_m = std::sqrt(static_cast<double>(model.m()));
    GrandSumTracker tracker(bound);
    std::vector<std::tuple<int, double, double>> rows;
    for (int tau = 1; tau <= bnd_tau_max; ++tau) {
      tracker.advance();
      if (tau < bnd_tau_min) continue;
      rows.emplace_back(tau, tracker.value(), 2.0 * sqrt_m * tracker.value());
    }
    save_bounds_csv(resolve(bnd_dir, bnd_out), rows);
    echo_config(bnd_dir, "bounds",
                {{"model", bnd_model},
                 {"tau_min", bnd_tau_min},
                 {"tau_max", bnd_tau_max},
                 {"out", bnd_out},
                 {"spectral_proxy", bound.spectral_proxy}});
    if (bound.divergent())
      std::cerr << "warning: influence spectral proxy >= 1; bound may not shrink\n";
    std::cout << json{{"rows", rows.size()}, {"spectral_proxy", bound.spectral_proxy}}.dump()
              << '\n';
    return 0;
  }

  if (*orc) {
    const auto model = load_model_or_truth(orc_model);
    json out{{"op", orc_op}, {"p", model.p()}};
    if (orc_op == "log-partition") {
      out["value"] = log_partition(model);
    } else if (orc_op == "moments") {
      out["value"] = exact_moments(model);
    } else if (orc_op == "gradient" || orc_op == "objective") {
      if (orc_data.empty()) throw data_error("oracle: --data required for " + orc_op);
      const auto data = load_binary_csv(orc_data, orc_impute);
      if (orc_op == "gradient")
        out["value"] = exact_gradient(model, data);
      else
        out["value"] = exact_objective(model, data, orc_lambda);
    } else if (orc_op == "tv") {
      if (orc_x0.empty()) throw data_error("oracle: --x0 required for tv");
      const auto x0 = parse_bitstring(orc_x0, model.p());
      out["value"] = exact_tv_after_tau(model, x0, orc_tau);
      out["tau"] = orc_tau;
    } else if (orc_op == "kernel") {
      if (model.p() > 8) throw capacity_error("oracle: kernel dump limited to p <= 8");
      const auto kernel = gibbs_sweep_kernel(model);
      const std::size_t n = std::size_t{1} << model.p();
      json rows = json::array();
      for (std::size_t r = 0; r < n; ++r)
        rows.push_back(std::vector<double>(kernel.begin() + r * n, kernel.begin() + (r + 1) * n));
      out["value"] = std::move(rows);
    } else {
      throw data_error("oracle: unknown op '" + orc_op + "'");
    }
    std::cout << out.dump() << '\n';
    return 0;
  }

  if (*exp) {
    if (exp_name != "paper-synthetic")
      throw data_error("unknown experiment '" + exp_name + "' (expected paper-synthetic)");
    fs::create_directories(exp_dir);

    const std::vector<ExperimentStrategy> strategies = {
        {"fixed1", TauStrategy::parse("fixed:1")},
        {"fixed" + std::to_string(exp_tau_fixed),
         TauStrategy::parse("fixed:" + std::to_string(exp_tau_fixed))},
        {"inc", TauStrategy::parse("increasing")},
        {"tay", TauStrategy::parse("tay")}};

    json summary{{"format_version", kFormatVersion}, {"experiment", exp_name}};
    json per_strategy = json::object();

    for (int trial = 0; trial < exp_trials; ++trial) {
      const std::uint64_t trial_seed = exp_seed + static_cast<std::uint64_t>(trial);
      auto truth = generate_ground_truth(exp_p, exp_edge_prob, 1.0, 2.0, trial_seed);
      // AUC needs at least one edge and one non-edge; redraw deterministically
      const std::size_t pairs = static_cast<std::size_t>(exp_p) * (exp_p - 1) / 2;
      for (std::uint64_t bump = 1; truth.edges.empty() || truth.edges.size() == pairs; ++bump)
        truth = generate_ground_truth(exp_p, exp_edge_prob, 1.0, 2.0,
                                      trial_seed + 7919 * bump);
      const auto data = sample_dataset(truth, exp_n, exp_burn, trial_seed);
      const std::string suffix = "_trial" + std::to_string(trial);
      save_truth_json((fs::path(exp_dir) / ("truth" + suffix + ".json")).string(), truth);
      save_dataset_csv((fs::path(exp_dir) / ("data" + suffix + ".csv")).string(), data);

      for (const auto& [label, strategy] : strategies) {
        SpgConfig cfg;
        cfg.alpha = exp_alpha;
        cfg.lambda = exp_lambda;
        cfg.q = exp_q;
        cfg.strategy = strategy;
        cfg.tau_max = exp_tau_max;
        cfg.max_iters = exp_iters;
        cfg.init_mode = parse_init_mode(exp_init_mode);
        cfg.master_seed = trial_seed;
        const auto result = run_spg(data, cfg);

        std::vector<double> aucs;
        aucs.reserve(result.records.size());
        for (const auto& rec : result.records)
          aucs.push_back(
              structure_auc(ModelParams(FeatureIndexer(exp_p), rec.theta), truth));
        write_experiment_trace(
            (fs::path(exp_dir) / (label + suffix + ".csv")).string(), result.records, aucs,
            exp_timing);
        save_model_json((fs::path(exp_dir) / ("model_" + label + suffix + ".json")).string(),
                        ModelParams(FeatureIndexer(exp_p), result.theta_final));

        std::vector<int> taus;
        for (const auto& rec : result.records) taus.push_back(rec.tau_used);
        std::sort(taus.begin(), taus.end());
        json entry{{"final_auc", aucs.empty() ? 0.0 : aucs.back()},
                   {"median_tau", taus[taus.size() / 2]},
                   {"iterations", result.records.size()}};
        if (exp_timing) {
          double total = 0.0;
          for (const auto& rec : result.records) total += rec.wall_ms;
          entry["total_ms"] = total;
        }
        per_strategy[label].push_back(std::move(entry));
      }
    }
    summary["trials"] = exp_trials;
    summary["results"] = std::move(per_strategy);
    std::ofstream out(fs::path(exp_dir) / "summary.json");
    out << summary.dump(2) << '\n';
    echo_config(exp_dir, "experiment",
                {{"name", exp_name},
                 {"p", exp_p},
                 {"n", exp_n},
                 {"edge_prob", exp_edge_prob},
                 {"burn_in", exp_burn},
                 {"iters", exp_iters},
                 {"tau_fixed", exp_tau_fixed},
                 {"tau_max", exp_tau_max},
                 {"q", exp_q},
                 {"lambda", exp_lambda},
                 {"alpha", exp_alpha},
                 {"seed", exp_seed},
                 {"init_mode", exp_init_mode},
                 {"trials", exp_trials}});
    std::cout << summary["results"].dump() << '\n';
    return 0;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const capacity_error& e) {
    std::cerr << json{{"error", {{"type", "capacity"}, {"message", e.what()}}}}.dump() << '\n';
    return kExitCapacity;
  } catch (const data_error& e) {
    std::cerr << json{{"error", {{"type", "data"}, {"message", e.what()}}}}.dump() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << json{{"error", {{"type", "usage"}, {"message", e.what()}}}}.dump() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"type", "internal"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  }
}
