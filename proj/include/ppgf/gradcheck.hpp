#pragma once

#include <functional>
#include <vector>

#include "ppgf/optimizer.hpp"

namespace ppgf {
namespace nn {

// Central finite differences against already-populated analytic grads.
// loss_fn must recompute the scalar objective from the parameters' current
// values. Relative error uses max(|analytic|, |numeric|, 1e-8) as the
// denominator. skip(name, flat_index) exempts coordinates sitting on known
// nondifferentiable points (ReLU kinks).
template <typename T>
double grad_check(const std::function<T()>& loss_fn, std::vector<Parameter<T>*> params, T eps,
                  const std::function<bool(const std::string&, int64_t)>& skip = nullptr) {
  double worst = 0.0;
  for (Parameter<T>* p : params) {
    for (int64_t i = 0; i < p->value.numel(); ++i) {
      if (skip && skip(p->name, i)) continue;
      const T saved = p->value.data[static_cast<size_t>(i)];
      p->value.data[static_cast<size_t>(i)] = saved + eps;
      const T up = loss_fn();
      p->value.data[static_cast<size_t>(i)] = saved - eps;
      const T dn = loss_fn();
      p->value.data[static_cast<size_t>(i)] = saved;
      if (!std::isfinite(static_cast<double>(up)) || !std::isfinite(static_cast<double>(dn)))
        fail(Errc::NonFiniteLoss, "finite-difference probe of " + p->name);
      const double numeric = (static_cast<double>(up) - static_cast<double>(dn)) / (2.0 * static_cast<double>(eps));
      const double analytic = static_cast<double>(p->grad.data[static_cast<size_t>(i)]);
      const double den = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / den;
      if (rel > worst) worst = rel;
    }
  }
  return worst;
}

}  // namespace nn
}  // namespace ppgf
