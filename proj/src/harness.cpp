#include "ppgf/harness.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "ppgf/checkpoint.hpp"

namespace ppgf {

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) fail(Errc::IoError, "cannot create directory " + path + ": " + ec.message());
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot write " + path);
  out << content;
  if (!out) fail(Errc::IoError, "short write to " + path);
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

namespace {

// the grouping flavor is a data-side concern; read it without building a model config
bool has_equal_width(const RunConfig& rc) {
  const std::string abl = rc.get_str("ablation");
  std::string cur;
  for (size_t i = 0; i <= abl.size(); ++i) {
    if (i == abl.size() || abl[i] == ',') {
      if (cur == "equal_width_grouping") return true;
      cur.clear();
    } else if (abl[i] != ' ') {
      cur += abl[i];
    }
  }
  return false;
}

}  // namespace

PreparedData prepare_data(const RunConfig& rc, bool equal_width_grouping) {
  const std::string path = rc.get_str("path");
  const std::string target = rc.get_str("target_column");
  if (path.empty()) fail(Errc::ConfigError, "config key 'path' is required");
  if (target.empty()) fail(Errc::ConfigError, "config key 'target_column' is required");

  PreparedData pd;
  pd.frame = load_csv(path, target);
  pd.splits = split_chronological(pd.frame, rc.split_spec());
  pd.norm = fit_normalizer(pd.splits.train);
  const int K = static_cast<int>(rc.get_int("groups"));
  const auto train_targets = pd.splits.train.target_column();
  pd.scheme = equal_width_grouping ? fit_grouping_equal_width(train_targets, K) : fit_grouping(train_targets, K);
  const int L = static_cast<int>(rc.get_int("lookback"));
  const int T = static_cast<int>(rc.get_int("horizon"));
  pd.wtrain = make_windows(pd.splits.train, pd.scheme, pd.norm, L, T);
  pd.wvalid = make_windows(pd.splits.valid, pd.scheme, pd.norm, L, T);
  pd.wtest = make_windows(pd.splits.test, pd.scheme, pd.norm, L, T);
  return pd;
}

const WindowedDataset& split_by_name(const PreparedData& pd, const std::string& name) {
  if (name == "train") return pd.wtrain;
  if (name == "valid") return pd.wvalid;
  if (name == "test") return pd.wtest;
  fail(Errc::ConfigError, "eval_split must be train, valid or test, got '" + name + "'");
}

namespace {

// flatten per-step truths for a windowed split
void flatten_truth(const WindowedDataset& w, std::vector<double>* y, std::vector<int>* k, std::vector<int>* k_first) {
  y->assign(w.y.begin(), w.y.end());
  k->assign(w.k.begin(), w.k.end());
  k_first->resize(static_cast<size_t>(w.N));
  for (int i = 0; i < w.N; ++i) (*k_first)[static_cast<size_t>(i)] = w.k[static_cast<size_t>(i) * w.T];
}

void check_consistency(const GroupingScheme& scheme, const InferResult<float>& r) {
  for (size_t i = 0; i < r.y_hat.size(); ++i) {
    if (r.k_hat.empty()) break;
    const int k = r.k_hat[i];
    const double lo = scheme.left[static_cast<size_t>(k - 1)];
    const double hi = scheme.right[static_cast<size_t>(k - 1)];
    if (r.y_hat[i] < lo || (r.delta[i] <= 1.0 && r.y_hat[i] > hi))
      throw std::logic_error("consistency violation: sample " + str(i) + " decoded outside its group interval");
  }
}

std::string csv_opt(const std::optional<double>& v) { return v ? fmt_g(*v) : std::string("--"); }

}  // namespace

EvalReport evaluate_model(const PPGFModel<float>& model, const GroupingScheme& scheme, const WindowedDataset& w,
                          int batch_size) {
  InferResult<float> r = dataset_infer(model, scheme, w, batch_size);
  check_consistency(scheme, r);

  std::vector<double> y_true;
  std::vector<int> k_true, k_true_first;
  flatten_truth(w, &y_true, &k_true, &k_true_first);

  EvalReport rep;
  rep.n = w.N * w.T;
  if (!r.y_hat.empty()) rep.point = point_metrics(y_true, r.y_hat);
  if (!r.k_hat.empty()) {
    rep.macro = macro_classification(k_true, r.k_hat, scheme.K);
    if (!r.y_hat.empty()) {
      rep.per_pattern = per_pattern_report(scheme, y_true, r.y_hat, k_true, r.k_hat);
    } else {
      rep.per_pattern = per_pattern_report(scheme, {}, {}, k_true, r.k_hat);
    }
    std::vector<int> k_final_first(static_cast<size_t>(w.N));
    for (int i = 0; i < w.N; ++i) k_final_first[static_cast<size_t>(i)] = r.k_hat[static_cast<size_t>(i) * w.T];
    rep.confidence = confidence_diagnostics(k_true_first, r.k_aux, k_final_first, r.c_hat);
  }
  return rep;
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["n"] = r.n;
  if (r.point) {
    j["rmse"] = r.point->rmse;
    j["mae"] = r.point->mae;
    if (r.point->corr) j["corr"] = *r.point->corr;
  }
  if (r.macro) {
    j["macro_precision"] = r.macro->precision;
    j["macro_recall"] = r.macro->recall;
    j["macro_f1"] = r.macro->f1;
    nlohmann::json pc = nlohmann::json::array();
    for (const auto& c : r.macro->per_class)
      pc.push_back({{"class", c.cls}, {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}});
    j["per_class"] = pc;
  }
  if (!r.per_pattern.empty()) {
    nlohmann::json pp = nlohmann::json::array();
    for (const auto& p : r.per_pattern) {
      nlohmann::json e = {{"pattern", p.k}, {"count", p.count}};
      if (p.rmse) e["rmse"] = *p.rmse;
      if (p.mae) e["mae"] = *p.mae;
      if (p.corr) e["corr"] = *p.corr;
      e["precision"] = p.cls.precision;
      e["recall"] = p.cls.recall;
      e["f1"] = p.cls.f1;
      pp.push_back(e);
    }
    j["per_pattern"] = pp;
  }
  if (r.confidence) {
    const auto& c = *r.confidence;
    j["confidence"] = {{"mean_c_hat_correct", c.n_correct ? nlohmann::json(c.mean_c_hat_correct) : nlohmann::json()},
                       {"mean_c_hat_incorrect", c.n_incorrect ? nlohmann::json(c.mean_c_hat_incorrect) : nlohmann::json()},
                       {"n_correct", c.n_correct},
                       {"n_incorrect", c.n_incorrect},
                       {"kept_correct", c.kept_correct},
                       {"falsely_calibrated", c.falsely_calibrated},
                       {"successfully_calibrated", c.successfully_calibrated},
                       {"uncalibrated_error", c.uncalibrated_error}};
  }
  return j.dump(2) + "\n";
}

// ---- prepare ---------------------------------------------------------------

void cmd_prepare(const RunConfig& rc, const std::string& out_dir) {
  const bool equal_width = has_equal_width(rc);
  const std::string path = rc.get_str("path");
  const std::string target = rc.get_str("target_column");
  if (path.empty()) fail(Errc::ConfigError, "config key 'path' is required");
  if (target.empty()) fail(Errc::ConfigError, "config key 'target_column' is required");

  PreparedData pd;
  pd.frame = load_csv(path, target);
  pd.splits = split_chronological(pd.frame, rc.split_spec());
  pd.norm = fit_normalizer(pd.splits.train);
  const int K = static_cast<int>(rc.get_int("groups"));
  const auto train_targets = pd.splits.train.target_column();
  pd.scheme = equal_width ? fit_grouping_equal_width(train_targets, K) : fit_grouping(train_targets, K);
  ensure_dir(out_dir);

  // window counting stays informational here: a split too short for one
  // window reports 0 instead of failing the inspection
  const int L = static_cast<int>(rc.get_int("lookback"));
  const int T = static_cast<int>(rc.get_int("horizon"));
  auto window_count = [&](const SeriesFrame& f) { return f.t >= L + T ? f.t - L - T + 1 : 0; };

  std::vector<int> counts(static_cast<size_t>(pd.scheme.K), 0);
  for (double v : train_targets) ++counts[static_cast<size_t>(assign_group(pd.scheme, v) - 1)];

  std::ostringstream os;
  os << "rows t=" << pd.frame.t << " channels D=" << pd.frame.d << " target=" << pd.frame.column_names[static_cast<size_t>(pd.frame.target_col)]
     << "\n";
  os << "splits train/valid/test = " << pd.splits.train.t << "/" << pd.splits.valid.t << "/" << pd.splits.test.t << "\n";
  os << "groups K=" << pd.scheme.K << (equal_width ? " (equal width)" : " (quantile)") << "\n";
  for (int k = 1; k <= pd.scheme.K; ++k)
    os << "  group " << k << ": [" << fmt_g(pd.scheme.left[static_cast<size_t>(k - 1)]) << ", "
       << fmt_g(pd.scheme.right[static_cast<size_t>(k - 1)]) << ") train count " << counts[static_cast<size_t>(k - 1)] << "\n";
  os << "windows train/valid/test = " << window_count(pd.splits.train) << "/" << window_count(pd.splits.valid) << "/"
     << window_count(pd.splits.test) << " (lookback " << L << ", horizon " << T << ")\n";
  std::cout << os.str();

  nlohmann::json scheme_json;
  scheme_json["K"] = pd.scheme.K;
  nlohmann::json bounds = nlohmann::json::array();
  for (int k = 0; k < pd.scheme.K; ++k)
    bounds.push_back({pd.scheme.left[static_cast<size_t>(k)], pd.scheme.right[static_cast<size_t>(k)]});
  scheme_json["boundaries"] = bounds;
  write_text_file(out_dir + "/scheme.json", scheme_json.dump(2) + "\n");

  const auto full_target = pd.frame.target_column();
  const int max_lag = std::min<int>(static_cast<int>(rc.get_int("autocorr_max_lag")), pd.frame.t - 1);
  const auto r = autocorrelation(full_target, max_lag);
  std::ostringstream ac;
  ac << "lag,R\n";
  for (size_t lag = 0; lag < r.size(); ++lag) ac << lag << "," << fmt_g(r[lag]) << "\n";
  write_text_file(out_dir + "/autocorr.csv", ac.str());
}

// ---- train -------------------------------------------------------------------

namespace {

std::string history_csv(const TrainHistory& hist) {
  std::ostringstream os;
  os << "epoch,train_conf,train_cls,train_reg,train_total,val_total,val_rmse\n";
  for (const auto& r : hist.records)
    os << r.epoch << "," << fmt_g(r.train.conf) << "," << fmt_g(r.train.cls) << "," << fmt_g(r.train.reg) << ","
       << fmt_g(r.train.total) << "," << fmt_g(r.val_total) << "," << fmt_g(r.val_rmse) << "\n";
  return os.str();
}

}  // namespace

void cmd_train(const RunConfig& rc, const std::string& out_dir, bool grid) {
  PreparedData pd = prepare_data(rc, has_equal_width(rc));
  const PPGFConfig mcfg = rc.model_config(pd.frame.d);
  const TrainConfig tc = rc.train_config();
  ensure_dir(out_dir);
  write_text_file(out_dir + "/config.resolved", rc.resolved());

  if (grid) {
    const GridSpace space = rc.grid_space();
    std::cout << "grid search over " << space.size() << " combinations\n";
    // per-K windowed datasets (scheme depends on K)
    std::map<int, PreparedData> by_k;
    std::map<int, GridData> gd;
    for (int k : space.groups) {
      RunConfig rk = rc;
      rk.set("groups", str(k));
      by_k.emplace(k, prepare_data(rk, mcfg.has(Ablation::EqualWidthGrouping)));
    }
    for (auto& [k, p] : by_k) gd[k] = GridData{&p.wtrain, &p.wvalid, &p.scheme};
    GridOutcome out = grid_search(space, mcfg, tc, gd, static_cast<size_t>(rc.get_int("grid_budget")),
                                  static_cast<int>(rc.get_int("jobs")));
    std::ostringstream lb;
    lb << "index,lr,groups,lambda1,lambda2,lambda3,status,best_epoch,val_total,val_rmse\n";
    for (const auto& row : out.rows)
      lb << row.index << "," << fmt_g(row.lr) << "," << row.K << "," << fmt_g(row.lambda1) << "," << fmt_g(row.lambda2)
         << "," << fmt_g(row.lambda3) << "," << row.status << "," << row.best_epoch << "," << fmt_g(row.val_total)
         << "," << fmt_g(row.val_rmse) << "\n";
    write_text_file(out_dir + "/leaderboard.csv", lb.str());
    std::cout << "best combination index " << out.best_index << ": lr=" << out.best_config.lr
              << " groups=" << out.best_config.K << " lambda=(" << out.best_config.lambda1 << ","
              << out.best_config.lambda2 << "," << out.best_config.lambda3 << ")\n";

    // retrain the winner on the train split and keep its checkpoint
    const GridData& winner = gd.at(out.best_config.K);
    TrainConfig wtc = tc;
    wtc.lr = out.best_config.lr;
    PPGFModel<float> model = PPGFModel<float>::build(out.best_config);
    auto [best, hist] = fit(std::move(model), *winner.train, *winner.valid, wtc, *winner.scheme);
    write_text_file(out_dir + "/history.csv", history_csv(hist));
    save_checkpoint(best, out_dir + "/best.ckpt");
    std::cout << "best epoch " << hist.best_epoch << ", val L_total " << fmt_g(hist.best_val_total) << "\n";
    return;
  }

  PPGFModel<float> model = PPGFModel<float>::build(mcfg);
  std::cout << "model parameters: " << model.param_count() << "\n";
  auto [best, hist] = fit(std::move(model), pd.wtrain, pd.wvalid, tc, pd.scheme);
  write_text_file(out_dir + "/history.csv", history_csv(hist));
  save_checkpoint(best, out_dir + "/best.ckpt");
  double wall = 0;
  for (const auto& r : hist.records) wall += r.wall_seconds;
  std::cout << "trained " << hist.records.size() << " epochs in " << fmt_g(wall) << " s; best epoch "
            << hist.best_epoch << ", val L_total " << fmt_g(hist.best_val_total) << "\n";
}

// ---- evaluate / predict -------------------------------------------------------

namespace {

PPGFModel<float> load_for_data(const RunConfig& rc, const PreparedData& pd) {
  const std::string ckpt = rc.get_str("checkpoint");
  if (ckpt.empty()) fail(Errc::ConfigError, "config key 'checkpoint' is required (use --checkpoint)");
  PPGFModel<float> model = load_checkpoint<float>(ckpt);
  if (model.cfg.K != pd.scheme.K && model.cfg.classifier())
    fail(Errc::SchemeMismatch, "checkpoint K=" + str(model.cfg.K) + " vs prepared scheme K=" + str(pd.scheme.K));
  if (model.cfg.L != pd.wtrain.L || model.cfg.D != pd.wtrain.D || model.cfg.T != pd.wtrain.T)
    fail(Errc::ConfigError, "checkpoint window (L=" + str(model.cfg.L) + ",D=" + str(model.cfg.D) + ",T=" +
                                str(model.cfg.T) + ") does not match data (L=" + str(pd.wtrain.L) + ",D=" +
                                str(pd.wtrain.D) + ",T=" + str(pd.wtrain.T) + ")");
  return model;
}

std::string predictions_csv(const WindowedDataset& w, const InferResult<float>& r) {
  std::ostringstream os;
  os << "index,y_true,y_pred,k_true,k_pred,c_hat\n";
  for (int i = 0; i < w.N; ++i) {
    for (int t = 0; t < w.T; ++t) {
      const size_t idx = static_cast<size_t>(i) * w.T + t;
      os << idx << "," << fmt_g(w.y[idx]) << ",";
      os << (r.y_hat.empty() ? std::string("--") : fmt_g(r.y_hat[idx])) << ",";
      os << w.k[idx] << ",";
      os << (r.k_hat.empty() ? std::string("--") : str(r.k_hat[idx])) << ",";
      os << (r.c_hat.empty() ? std::string("--") : fmt_g(r.c_hat[static_cast<size_t>(i)])) << "\n";
    }
  }
  return os.str();
}

std::string per_pattern_csv(const std::vector<PatternRecord>& pp) {
  std::ostringstream os;
  os << "pattern,count,rmse,mae,corr,precision,recall,f1\n";
  for (const auto& p : pp)
    os << p.k << "," << p.count << "," << csv_opt(p.rmse) << "," << csv_opt(p.mae) << "," << csv_opt(p.corr) << ","
       << fmt_g(p.cls.precision) << "," << fmt_g(p.cls.recall) << "," << fmt_g(p.cls.f1) << "\n";
  return os.str();
}

}  // namespace

EvalReport cmd_evaluate(const RunConfig& rc, const std::string& out_dir) {
  PreparedData pd = prepare_data(rc, has_equal_width(rc));
  PPGFModel<float> model = load_for_data(rc, pd);
  const WindowedDataset& w = split_by_name(pd, rc.get_str("eval_split"));
  const int bs = static_cast<int>(rc.get_int("batch_size"));

  EvalReport rep = evaluate_model(model, pd.scheme, w, bs);
  ensure_dir(out_dir);
  write_text_file(out_dir + "/report.json", report_to_json(rep));
  InferResult<float> r = dataset_infer(model, pd.scheme, w, bs);
  write_text_file(out_dir + "/predictions.csv", predictions_csv(w, r));
  write_text_file(out_dir + "/report_per_pattern.csv", per_pattern_csv(rep.per_pattern));

  std::ostringstream os;
  os << "evaluated " << rep.n << " sample-steps on split '" << rc.get_str("eval_split") << "'\n";
  if (rep.point)
    os << "RMSE " << fmt_g(rep.point->rmse) << "  MAE " << fmt_g(rep.point->mae) << "  CORR "
       << csv_opt(rep.point->corr) << "\n";
  if (rep.macro)
    os << "macro P " << fmt_g(100 * rep.macro->precision) << "%  R " << fmt_g(100 * rep.macro->recall) << "%  F1 "
       << fmt_g(100 * rep.macro->f1) << "\n";
  std::cout << os.str();
  return rep;
}

void cmd_predict(const RunConfig& rc, const std::string& out_dir) {
  PreparedData pd = prepare_data(rc, has_equal_width(rc));
  PPGFModel<float> model = load_for_data(rc, pd);
  const WindowedDataset& w = split_by_name(pd, rc.get_str("eval_split"));
  InferResult<float> r = dataset_infer(model, pd.scheme, w, static_cast<int>(rc.get_int("batch_size")));
  check_consistency(pd.scheme, r);
  ensure_dir(out_dir);
  write_text_file(out_dir + "/predictions.csv", predictions_csv(w, r));
  std::cout << "wrote " << w.N * w.T << " predictions\n";
}

// ---- ablation ------------------------------------------------------------------

EvalReport run_ablation(const std::string& variant, const RunConfig& rc) {
  RunConfig rv = rc;
  if (!variant.empty()) rv.set("ablation", variant);
  const bool equal_width = !variant.empty() && ablation_from_name(variant) == Ablation::EqualWidthGrouping;
  PreparedData pd = prepare_data(rv, equal_width);
  const PPGFConfig mcfg = rv.model_config(pd.frame.d);
  const TrainConfig tc = rv.train_config();
  PPGFModel<float> model = PPGFModel<float>::build(mcfg);
  auto [best, hist] = fit(std::move(model), pd.wtrain, pd.wvalid, tc, pd.scheme);
  return evaluate_model(best, pd.scheme, pd.wtest, tc.batch_size);
}

std::vector<AblationRow> cmd_ablate(const RunConfig& rc, const std::string& out_dir) {
  // Table layout: the seven single-component removals, then the full model.
  const std::vector<std::pair<std::string, std::string>> variants = {
      {"w/o_relative", "no_relative"},
      {"w/o_classifier", "no_classifier"},
      {"w/o_conv1d", "no_conv"},
      {"w/o_transformer", "no_transformer"},
      {"w/o_grn", "no_grn"},
      {"w/o_group", "equal_width_grouping"},
      {"w/o_confidnet", "no_confidnet"},
      {"ppgf", ""},
  };
  std::vector<AblationRow> rows;
  for (const auto& [display, flag] : variants) {
    std::cout << "ablation " << display << "...\n";
    rows.push_back({display, run_ablation(flag, rc)});
  }
  ensure_dir(out_dir);
  std::ostringstream os;
  os << "variant,rmse,mae,corr,macro_precision,macro_recall,macro_f1\n";
  for (const auto& row : rows) {
    os << row.name << ",";
    if (row.report.point)
      os << fmt_g(row.report.point->rmse) << "," << fmt_g(row.report.point->mae) << ","
         << csv_opt(row.report.point->corr);
    else
      os << "--,--,--";
    os << ",";
    if (row.report.macro)
      // percent convention for the classification columns
      os << fmt_g(100 * row.report.macro->precision) << "," << fmt_g(100 * row.report.macro->recall) << ","
         << fmt_g(100 * row.report.macro->f1);
    else
      os << "--,--,--";
    os << "\n";
  }
  write_text_file(out_dir + "/ablation.csv", os.str());
  std::cout << "wrote " << rows.size() << " rows to " << out_dir << "/ablation.csv\n";
  return rows;
}

}  // namespace ppgf
