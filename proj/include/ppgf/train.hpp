#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <limits>
#include <map>
#include <thread>

#include "ppgf/checkpoint.hpp"
#include "ppgf/model.hpp"

namespace ppgf {

struct TrainConfig {
  int batch_size = 32;
  int max_epochs = 500;
  int patience = 20;  // epochs without validation improvement before stopping
  double lr = 1e-3;
  uint64_t seed = 1;

  void validate() const {
    if (batch_size < 1) fail(Errc::ConfigError, "batch_size must be >= 1");
    if (patience < 1) fail(Errc::ConfigError, "patience must be >= 1");
    if (max_epochs < 1) fail(Errc::ConfigError, "max_epochs must be >= 1");
  }
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  LossBreakdown train;
  double val_total = 0;
  double val_rmse = 0;  // NaN when the variant has no forecasting head
  double wall_seconds = 0;
};

struct TrainHistory {
  std::vector<EpochRecord> records;
  int best_epoch = -1;  // 1-based epoch of the returned snapshot
  double best_val_total = std::numeric_limits<double>::infinity();
};

// Test hook: observes the shuffled sample order of every epoch.
struct FitObserver {
  std::function<void(int epoch, const std::vector<int>& order)> on_epoch;
};

template <typename T>
std::pair<TensorT<T>, LabelBatch<T>> assemble_batch(const WindowedDataset& w, const std::vector<int>& order,
                                                    int begin, int end) {
  const int B = end - begin;
  TensorT<T> x({B, w.L, w.D});
  LabelBatch<T> lab;
  lab.k_flat.resize(static_cast<size_t>(B) * w.T);
  lab.k_first.resize(static_cast<size_t>(B));
  lab.dy = TensorT<T>({B, w.T});
  lab.y_raw = TensorT<T>({B, w.T});
  for (int i = 0; i < B; ++i) {
    const int s = order[static_cast<size_t>(begin + i)];
    std::copy(w.x.begin() + static_cast<int64_t>(s) * w.L * w.D, w.x.begin() + static_cast<int64_t>(s + 1) * w.L * w.D,
              x.data.begin() + static_cast<int64_t>(i) * w.L * w.D);
    for (int t = 0; t < w.T; ++t) {
      const size_t src = static_cast<size_t>(s) * w.T + t;
      const size_t dst = static_cast<size_t>(i) * w.T + t;
      lab.k_flat[dst] = w.k[src] - 1;
      lab.dy.data[dst] = static_cast<T>(w.dy[src]);
      lab.y_raw.data[dst] = static_cast<T>(w.y[src]);
    }
    lab.k_first[static_cast<size_t>(i)] = w.k[static_cast<size_t>(s) * w.T] - 1;
  }
  return {std::move(x), std::move(lab)};
}

// Mean losses over a dataset in fixed index order.
template <typename T>
LossBreakdown dataset_losses(const PPGFModel<T>& model, const WindowedDataset& w, int batch_size) {
  std::vector<int> order(static_cast<size_t>(w.N));
  for (int i = 0; i < w.N; ++i) order[static_cast<size_t>(i)] = i;
  LossBreakdown acc;
  for (int begin = 0; begin < w.N; begin += batch_size) {
    const int end = std::min(w.N, begin + batch_size);
    auto [x, lab] = assemble_batch<T>(w, order, begin, end);
    LossBreakdown lb = model.eval_losses(x, lab);
    const double f = static_cast<double>(end - begin);
    acc.conf += lb.conf * f;
    acc.cls += lb.cls * f;
    acc.reg += lb.reg * f;
    acc.total += lb.total * f;
  }
  acc.conf /= w.N;
  acc.cls /= w.N;
  acc.reg /= w.N;
  acc.total /= w.N;
  return acc;
}

// Inference over a whole dataset, fixed order.
template <typename T>
InferResult<T> dataset_infer(const PPGFModel<T>& model, const GroupingScheme& scheme, const WindowedDataset& w,
                             int batch_size) {
  InferResult<T> all;
  all.B = w.N;
  all.T_steps = w.T;
  std::vector<int> order(static_cast<size_t>(w.N));
  for (int i = 0; i < w.N; ++i) order[static_cast<size_t>(i)] = i;
  for (int begin = 0; begin < w.N; begin += batch_size) {
    const int end = std::min(w.N, begin + batch_size);
    auto [x, lab] = assemble_batch<T>(w, order, begin, end);
    (void)lab;
    InferResult<T> r = model.infer(scheme, x);
    all.k_hat.insert(all.k_hat.end(), r.k_hat.begin(), r.k_hat.end());
    all.y_hat.insert(all.y_hat.end(), r.y_hat.begin(), r.y_hat.end());
    all.delta.insert(all.delta.end(), r.delta.begin(), r.delta.end());
    all.c_hat.insert(all.c_hat.end(), r.c_hat.begin(), r.c_hat.end());
    all.k_aux.insert(all.k_aux.end(), r.k_aux.begin(), r.k_aux.end());
  }
  return all;
}

template <typename T>
double dataset_rmse(const PPGFModel<T>& model, const GroupingScheme& scheme, const WindowedDataset& w,
                    int batch_size) {
  if (!model.cfg.relative()) return std::numeric_limits<double>::quiet_NaN();
  InferResult<T> r = dataset_infer(model, scheme, w, batch_size);
  double se = 0;
  for (size_t i = 0; i < r.y_hat.size(); ++i) {
    const double d = r.y_hat[i] - w.y[i];
    se += d * d;
  }
  return std::sqrt(se / static_cast<double>(r.y_hat.size()));
}

// Mini-batch Adam with seeded shuffling, validation-selected snapshot and
// early stopping. Returns the best model and the per-epoch history.
template <typename T>
std::pair<PPGFModel<T>, TrainHistory> fit(PPGFModel<T> model, const WindowedDataset& train,
                                          const WindowedDataset& valid, const TrainConfig& tc,
                                          const GroupingScheme& scheme, const FitObserver* obs = nullptr) {
  tc.validate();
  if (train.N < 1 || valid.N < 1) fail(Errc::EmptyDataset, "train/valid datasets must be nonempty");

  nn::Adam<T> opt(static_cast<T>(tc.lr));
  Rng shuffle_rng(derive_seed(tc.seed, "shuffle"));
  std::vector<int> order(static_cast<size_t>(train.N));
  for (int i = 0; i < train.N; ++i) order[static_cast<size_t>(i)] = i;

  TrainHistory hist;
  std::vector<TensorT<T>> best_params;
  int since_best = 0;

  for (int epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(order);
    if (obs && obs->on_epoch) obs->on_epoch(epoch, order);
    LossBreakdown acc;
    int batch_index = 0;
    for (int begin = 0; begin < train.N; begin += tc.batch_size, ++batch_index) {
      const int end = std::min(train.N, begin + tc.batch_size);
      try {
        auto [x, lab] = assemble_batch<T>(train, order, begin, end);
        nn::Tape<T> tape;
        Bound<T> b = model.bind(tape, true);
        ForwardVars<T> f = model.forward(b, x);
        LossVars<T> lv = model.losses(b, f, lab);
        model.zero_grads();
        tape.backward(lv.total);
        model.collect_grads(b);
        opt.step(model.params);
        const double fb = static_cast<double>(end - begin);
        LossBreakdown lb = breakdown(lv);
        acc.conf += lb.conf * fb;
        acc.cls += lb.cls * fb;
        acc.reg += lb.reg * fb;
        acc.total += lb.total * fb;
      } catch (const Error& e) {
        if (e.code() == Errc::NonFiniteTensor || e.code() == Errc::NonFiniteLoss || e.code() == Errc::NonFiniteGradient)
          fail(Errc::TrainDiverged, "epoch " + str(epoch) + " batch " + str(batch_index) + ": " + e.what());
        throw;
      }
    }
    acc.conf /= train.N;
    acc.cls /= train.N;
    acc.reg /= train.N;
    acc.total /= train.N;

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train = acc;
    rec.val_total = dataset_losses(model, valid, tc.batch_size).total;
    rec.val_rmse = dataset_rmse(model, scheme, valid, tc.batch_size);
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    hist.records.push_back(rec);

    if (rec.val_total < hist.best_val_total) {
      hist.best_val_total = rec.val_total;
      hist.best_epoch = epoch;
      best_params.clear();
      for (const auto& p : model.params) best_params.push_back(p.value);
      since_best = 0;
    } else {
      ++since_best;
    }
    if (since_best >= tc.patience) break;
  }

  if (!best_params.empty())
    for (size_t i = 0; i < model.params.size(); ++i) model.params[i].value = best_params[i];
  return {std::move(model), std::move(hist)};
}

// ---- grid search ------------------------------------------------------------

struct GridSpace {
  std::vector<double> lr{1e-4, 5e-4, 1e-3, 5e-3};
  std::vector<int> groups{2, 3, 4, 8};
  std::vector<double> lambda1{1, 2, 3, 4, 5};
  std::vector<double> lambda2{1, 2, 3, 4, 5};
  std::vector<double> lambda3{1, 2, 3, 4, 5};

  size_t size() const { return lr.size() * groups.size() * lambda1.size() * lambda2.size() * lambda3.size(); }
};

struct GridRow {
  int index = 0;
  double lr = 0;
  int K = 0;
  double lambda1 = 0, lambda2 = 0, lambda3 = 0;
  std::string status;  // "ok" or "failed"
  int best_epoch = -1;
  double val_total = std::numeric_limits<double>::quiet_NaN();
  double val_rmse = std::numeric_limits<double>::quiet_NaN();
};

struct GridData {
  const WindowedDataset* train = nullptr;
  const WindowedDataset* valid = nullptr;
  const GroupingScheme* scheme = nullptr;
};

struct GridOutcome {
  std::vector<GridRow> rows;
  int best_index = -1;
  PPGFConfig best_config;
};

// Exhaustive search in documented lexicographic order: lr, then groups, then
// lambda1, lambda2, lambda3 (innermost). Combination i trains with seed
// base_seed + i. budget = 0 runs everything; jobs > 1 runs combinations on
// worker threads (rows are independent and merged by index, so output bytes
// do not depend on scheduling).
GridOutcome grid_search(const GridSpace& space, const PPGFConfig& base_cfg, const TrainConfig& base_tc,
                        const std::map<int, GridData>& data_by_k, size_t budget = 0, int jobs = 1);

}  // namespace ppgf
