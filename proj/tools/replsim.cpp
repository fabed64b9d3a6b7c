// Command-line front end: instance generation, simulation runs, offline
// benchmarks, batching previews, and the property suites.
//
// Exit codes: 0 success, 1 usage error, 2 verification failure,
// 3 incompatible regime pairing.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "replsim/algorithms.hpp"
#include "replsim/batching.hpp"
#include "replsim/engine.hpp"
#include "replsim/experiment.hpp"
#include "replsim/generators.hpp"
#include "replsim/instance.hpp"
#include "replsim/lp.hpp"

namespace {

using namespace replsim;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

std::string basename_no_ext(const std::string& path) {
  size_t slash = path.find_last_of('/');
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  size_t dot = base.find_last_of('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

Instance load_file(const std::string& path) { return Instance::load(slurp(path)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online resource allocation with exogenous replenishment"};
  app.require_subcommand(1);

  // gen <family> --c --n --m --gamma --seed -o out.json
  auto* gen = app.add_subcommand("gen", "generate an instance from a named family");
  GeneratorParams gp;
  std::string gen_out;
  gen->add_option("family", gp.family, "family name")->required();
  gen->add_option("--c", gp.c, "starting inventory scale");
  gen->add_option("--n", gp.n, "number of resources");
  gen->add_option("--m", gp.m, "horizon");
  gen->add_option("--d", gp.d, "resources per bundle, where the family has one");
  gen->add_option("--gamma", gp.gamma, "replenishment-to-inventory ratio");
  gen->add_option("--seed", gp.seed, "generator seed");
  gen->add_option("-o,--output", gen_out, "output file (default stdout)");

  // run: experiment CSV, or a single trace / one perf row
  auto* run_cmd = app.add_subcommand("run", "run simulations against a benchmark");
  ExperimentConfig cfg;
  std::string cfg_path, run_out, wrapper_s = "none", benchmark_s = "lp";
  bool run_json = false, run_row = false;
  run_cmd->add_option("--instance", cfg.instance_file, "instance JSON file");
  run_cmd->add_option("--family", cfg.gen.family, "generator family");
  run_cmd->add_option("--c", cfg.gen.c, "generator inventory scale");
  run_cmd->add_option("--n", cfg.gen.n, "generator resource count");
  run_cmd->add_option("--m", cfg.gen.m, "generator horizon");
  run_cmd->add_option("--d", cfg.gen.d, "generator bundle size");
  run_cmd->add_option("--gamma", cfg.gen.gamma, "generator ratio");
  run_cmd->add_option("--algorithm", cfg.algorithm,
                      "greedy | ib[:psi=exp|zero] | fixed_split:x=<v> | trivial");
  run_cmd->add_option("--wrapper", wrapper_s, "none | batch_adversarial | batch_stochastic");
  run_cmd->add_option("--benchmark", benchmark_s, "lp | exact | both");
  run_cmd->add_option("--trials", cfg.trials, "Monte Carlo trials");
  run_cmd->add_option("--threads", cfg.threads, "worker threads");
  run_cmd->add_option("--seed", cfg.seed, "run seed");
  run_cmd->add_option("--sweep", cfg.sweep, "inventory values, comma separated")
      ->delimiter(',');
  run_cmd->add_option("--config", cfg_path, "JSON config overriding the flags above");
  run_cmd->add_flag("--json", run_json, "emit one full run trace as JSON instead");
  run_cmd->add_flag("--row", run_row,
                    "emit one perf CSV row: instance,algorithm,trials,mean,se,fallback_rate");
  run_cmd->add_option("-o,--output", run_out, "output file (default stdout)");

  // lp solve <instance.json> [--solution out.csv]
  auto* lp_cmd = app.add_subcommand("lp", "offline benchmark");
  auto* lp_solve = lp_cmd->add_subcommand("solve", "build and solve the program");
  std::string lp_in, lp_sol_out, lp_out;
  lp_solve->add_option("instance", lp_in, "instance JSON file")->required();
  lp_solve->add_option("--solution", lp_sol_out, "dump x* as CSV (j,k,z,x)");
  lp_solve->add_option("-o,--output", lp_out, "value output file (default stdout)");
  lp_cmd->require_subcommand(1);

  // batch preview <instance.json> [--eps v] / batch instance <instance.json>
  auto* batch_cmd = app.add_subcommand("batch", "replenishment batching");
  std::string bp_in, bp_out, bi_in, bi_out;
  double bp_eps = -1.0, bi_eps = -1.0;
  auto* batch_prev = batch_cmd->add_subcommand("preview", "lump schedule as CSV");
  batch_prev->add_option("instance", bp_in, "instance JSON file")->required();
  batch_prev->add_option("--eps", bp_eps, "override the fluid discount");
  batch_prev->add_option("-o,--output", bp_out, "output file (default stdout)");
  auto* batch_inst = batch_cmd->add_subcommand("instance", "batched instance as JSON");
  batch_inst->add_option("instance", bi_in, "instance JSON file")->required();
  batch_inst->add_option("--eps", bi_eps, "override the fluid discount");
  batch_inst->add_option("-o,--output", bi_out, "output file (default stdout)");
  batch_cmd->require_subcommand(1);

  // verify <suite>
  auto* verify_cmd = app.add_subcommand("verify", "run a property suite");
  std::string suite;
  verify_cmd->add_option("suite", suite, "sandwich | coupling | lemma41 | lemma42 | chernoff | fallback | hard_instance")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      Instance inst = generate(gp);
      emit(inst.serialize(), gen_out);
      return 0;
    }

    if (*run_cmd) {
      cfg.wrapper = wrapper_s == "batch_adversarial"
                        ? ExperimentConfig::Wrapper::BatchAdversarial
                    : wrapper_s == "batch_stochastic"
                        ? ExperimentConfig::Wrapper::BatchStochastic
                        : ExperimentConfig::Wrapper::None;
      if (wrapper_s != "none" && wrapper_s != "batch_adversarial" &&
          wrapper_s != "batch_stochastic")
        throw std::runtime_error("unknown wrapper '" + wrapper_s + "'");
      cfg.benchmark = benchmark_s == "exact" ? ExperimentConfig::Benchmark::ExactOpt
                      : benchmark_s == "both" ? ExperimentConfig::Benchmark::Both
                                              : ExperimentConfig::Benchmark::LP;
      if (benchmark_s != "lp" && benchmark_s != "exact" && benchmark_s != "both")
        throw std::runtime_error("unknown benchmark '" + benchmark_s + "'");
      cfg.gen.seed = cfg.seed;
      if (!cfg_path.empty()) cfg = parse_experiment_config(slurp(cfg_path), cfg);

      if (run_json || run_row) {
        Instance inst = cfg.instance_file.empty() ? generate(cfg.gen)
                                                  : load_file(cfg.instance_file);
        std::string label = cfg.instance_file.empty()
                                ? cfg.gen.family
                                : basename_no_ext(cfg.instance_file);
        if (cfg.wrapper == ExperimentConfig::Wrapper::BatchStochastic &&
            inst.replenishment.mode == ReplenishmentMode::Adversarial)
          throw IncompatibleError(
              "stochastic batching requires a stochastic replenishment process; under "
              "adversarial replenishment no transformation to the fixed-inventory "
              "setting preserves performance, so this pairing is refused");
        PolicyFactory base = make_policy_factory(cfg.algorithm);
        PolicyFactory factory =
            cfg.wrapper == ExperimentConfig::Wrapper::BatchAdversarial
                ? PolicyFactory([base] { return wrap_adversarial(base()); })
            : cfg.wrapper == ExperimentConfig::Wrapper::BatchStochastic
                ? PolicyFactory([base] { return wrap_stochastic(base()); })
                : base;
        if (run_json) {
          auto policy = factory();
          RunOptions ro;
          ro.seed = cfg.seed;
          emit(run(inst, *policy, ro).to_json() + "\n", run_out);
        } else {
          PerfOptions po;
          po.trials = cfg.trials;
          po.seed = cfg.seed;
          po.threads = cfg.threads;
          PerfResult pr = expected_performance(inst, factory, po);
          emit("instance,algorithm,trials,mean,se,fallback_rate\n" + label + "," +
                   cfg.algorithm + "," + std::to_string(cfg.trials) + "," +
                   fmt(pr.mean) + "," + fmt(pr.se) + "," + fmt(pr.fallback_rate) + "\n",
               run_out);
        }
        return 0;
      }
      emit(run_experiment(cfg), run_out);
      return 0;
    }

    if (*lp_cmd) {
      Instance inst = load_file(lp_in);
      LpModel model = build_lp(inst);
      LpSolution sol = solve_lp(model);
      emit(fmt(sol.value) + "\n", lp_out);
      if (!lp_sol_out.empty()) {
        std::string csv = "j,k,z,x\n";
        for (size_t v = 0; v < model.vars.size(); ++v) {
          const LpVar& var = model.vars[v];
          csv += std::to_string(var.request) + "," + inst.actions[var.action].id + "," +
                 inst.arrivals.type_ids[var.type] + "," + fmt(sol.x[v + 1]) + "\n";
        }
        emit(csv, lp_sol_out);
      }
      return 0;
    }

    if (*batch_cmd) {
      bool preview = batch_prev->parsed();
      Instance inst = load_file(preview ? bp_in : bi_in);
      double eps = preview ? bp_eps : bi_eps;
      BatchedInstance hb =
          inst.replenishment.mode == ReplenishmentMode::Adversarial
              ? build_batched_instance_adversarial(inst)
              : build_batched_instance_stochastic(
                    inst, eps >= 0.0 ? std::optional<double>(eps) : std::nullopt);
      if (preview) {
        std::string csv = "i,j,zeta_B,new_resource_id\n";
        for (const BatchEvent& e : hb.events)
          csv += inst.resources[e.parent].id + "," + std::to_string(e.request) + "," +
                 fmt(e.amount) + "," + e.resource_id + "\n";
        emit(csv, bp_out);
      } else {
        emit(hb.instance.serialize(), bi_out);
      }
      return 0;
    }

    if (*verify_cmd) {
      std::vector<CheckResult> checks = verify_suite(suite);
      bool all = true;
      for (const CheckResult& c : checks) {
        all = all && c.pass;
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail
                  << "\n";
      }
      return all ? 0 : 2;
    }
  } catch (const IncompatibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
