#include "ppgf/train.hpp"

#include <mutex>

namespace ppgf {

namespace {

struct Combo {
  double lr;
  int K;
  double l1, l2, l3;
};

std::vector<Combo> enumerate(const GridSpace& space) {
  std::vector<Combo> combos;
  combos.reserve(space.size());
  for (double lr : space.lr)
    for (int k : space.groups)
      for (double l1 : space.lambda1)
        for (double l2 : space.lambda2)
          for (double l3 : space.lambda3) combos.push_back({lr, k, l1, l2, l3});
  return combos;
}

}  // namespace

GridOutcome grid_search(const GridSpace& space, const PPGFConfig& base_cfg, const TrainConfig& base_tc,
                        const std::map<int, GridData>& data_by_k, size_t budget, int jobs) {
  if (space.size() == 0) fail(Errc::EmptyGrid, "grid space has no combinations");
  for (int k : space.groups)
    if (!data_by_k.count(k)) fail(Errc::ConfigError, "no prepared dataset for K=" + str(k));

  std::vector<Combo> combos = enumerate(space);
  if (budget > 0 && budget < combos.size()) combos.resize(budget);

  GridOutcome out;
  out.rows.resize(combos.size());

  auto run_one = [&](size_t i) {
    const Combo& c = combos[i];
    GridRow row;
    row.index = static_cast<int>(i);
    row.lr = c.lr;
    row.K = c.K;
    row.lambda1 = c.l1;
    row.lambda2 = c.l2;
    row.lambda3 = c.l3;
    const GridData& gd = data_by_k.at(c.K);
    PPGFConfig cfg = base_cfg;
    cfg.lr = c.lr;
    cfg.K = c.K;
    cfg.lambda1 = c.l1;
    cfg.lambda2 = c.l2;
    cfg.lambda3 = c.l3;
    cfg.seed = base_cfg.seed + i;
    TrainConfig tc = base_tc;
    tc.lr = c.lr;
    tc.seed = cfg.seed;
    try {
      PPGFModel<float> model = PPGFModel<float>::build(cfg);
      auto [best, hist] = fit(std::move(model), *gd.train, *gd.valid, tc, *gd.scheme);
      row.status = "ok";
      row.best_epoch = hist.best_epoch;
      row.val_total = hist.best_val_total;
      row.val_rmse = dataset_rmse(best, *gd.scheme, *gd.valid, tc.batch_size);
    } catch (const Error& e) {
      if (e.code() != Errc::TrainDiverged) throw;
      row.status = "failed";
    }
    out.rows[i] = row;
  };

  if (jobs <= 1) {
    for (size_t i = 0; i < combos.size(); ++i) run_one(i);
  } else {
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mx;
    auto worker = [&] {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= combos.size()) return;
        try {
          run_one(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mx);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(jobs, static_cast<int>(combos.size()));
    pool.reserve(static_cast<size_t>(n));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // rank by validation RMSE over the successful rows
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : out.rows) {
    if (row.status != "ok" || !std::isfinite(row.val_rmse)) continue;
    if (row.val_rmse < best) {
      best = row.val_rmse;
      out.best_index = row.index;
    }
  }
  if (out.best_index < 0) fail(Errc::TrainDiverged, "every grid combination diverged");
  const Combo& c = combos[static_cast<size_t>(out.best_index)];
  out.best_config = base_cfg;
  out.best_config.lr = c.lr;
  out.best_config.K = c.K;
  out.best_config.lambda1 = c.l1;
  out.best_config.lambda2 = c.l2;
  out.best_config.lambda3 = c.l3;
  return out;
}

}  // namespace ppgf
