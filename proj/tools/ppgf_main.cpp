#include <iostream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "ppgf/harness.hpp"
#include "ppgf/synth.hpp"

namespace {

struct GlobalOpts {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  int64_t seed = -1;
};

ppgf::RunConfig resolve_config(const GlobalOpts& g) {
  ppgf::RunConfig rc = ppgf::RunConfig::defaults();
  if (!g.config_path.empty()) rc.load_file(g.config_path);
  for (const auto& s : g.sets) {
    const size_t eq = s.find('=');
    if (eq == std::string::npos) ppgf::fail(ppgf::Errc::UsageError, "--set wants KEY=VALUE, got '" + s + "'");
    rc.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (g.seed >= 0) rc.set("seed", std::to_string(g.seed));
  if (!g.out_dir.empty()) rc.set("out_dir", g.out_dir);
#ifdef _OPENMP
  const int threads = static_cast<int>(rc.get_int("threads"));
  if (threads > 0) omp_set_num_threads(threads);
#endif
  return rc;
}

void add_globals(CLI::App* cmd, GlobalOpts& g) {
  cmd->add_option("--config", g.config_path, "configuration file (key = value lines)");
  cmd->add_option("--set", g.sets, "override a config key, KEY=VALUE (repeatable)")->take_all();
  cmd->add_option("--seed", g.seed, "override the seed");
  cmd->add_option("--out", g.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pattern-classified forecasting engine: quantile grouping, calibrated pattern classifier, "
               "within-interval relative regression"};
  app.require_subcommand(1);
  GlobalOpts g;

  auto* prepare = app.add_subcommand("prepare", "ingest a CSV, fit splits/normalizer/grouping, report windows");
  add_globals(prepare, g);

  auto* train = app.add_subcommand("train", "train a model (or run a grid search with --grid)");
  add_globals(train, g);
  bool grid = false;
  train->add_flag("--grid", grid, "exhaustive hyper-parameter grid on the validation split");
  train->add_option("--jobs", [&g](const std::vector<std::string>& v) { g.sets.push_back("jobs=" + v[0]); return true; },
                    "parallel grid workers")->expected(1);

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint on a split, write report files");
  add_globals(evaluate, g);
  std::string ckpt, split;
  evaluate->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  evaluate->add_option("--split", split, "train|valid|test (default test)");

  auto* predict = app.add_subcommand("predict", "run inference on a split, write predictions.csv");
  add_globals(predict, g);
  predict->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  predict->add_option("--split", split, "train|valid|test (default test)");

  auto* ablate = app.add_subcommand("ablate", "train and evaluate the full model plus all single-component removals");
  add_globals(ablate, g);

  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic series CSV");
  add_globals(synth, g);
  std::string kind, synth_out;
  std::vector<std::string> synth_params;
  synth->add_option("kind", kind, "sine | two_regime | long_tail")->required();
  synth->add_option("--param", synth_params, "generator parameter, KEY=VALUE (repeatable)")->take_all();
  synth->add_option("--file", synth_out, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!ckpt.empty()) g.sets.push_back("checkpoint=" + ckpt);
    if (!split.empty()) g.sets.push_back("eval_split=" + split);
    ppgf::RunConfig rc = resolve_config(g);
    const std::string out_dir = rc.get_str("out_dir");

    if (prepare->parsed()) {
      ppgf::cmd_prepare(rc, out_dir);
    } else if (train->parsed()) {
      ppgf::cmd_train(rc, out_dir, grid);
    } else if (evaluate->parsed()) {
      ppgf::cmd_evaluate(rc, out_dir);
    } else if (predict->parsed()) {
      ppgf::cmd_predict(rc, out_dir);
    } else if (ablate->parsed()) {
      ppgf::cmd_ablate(rc, out_dir);
    } else if (synth->parsed()) {
      std::vector<std::pair<std::string, std::string>> kv;
      for (const auto& s : synth_params) {
        const size_t eq = s.find('=');
        if (eq == std::string::npos) ppgf::fail(ppgf::Errc::UsageError, "--param wants KEY=VALUE, got '" + s + "'");
        kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
      }
      const auto values = ppgf::synth_to_csv(kind, kv, static_cast<uint64_t>(rc.get_int("seed")), synth_out);
      std::cout << "wrote " << values.size() << " rows to " << synth_out << "\n";
    }
  } catch (const ppgf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ppgf::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
