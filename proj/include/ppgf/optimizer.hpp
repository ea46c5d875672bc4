#pragma once

#include <string>
#include <vector>

#include "ppgf/tensor.hpp"

namespace ppgf {
namespace nn {

template <typename T>
struct Parameter {
  std::string name;
  TensorT<T> value;
  TensorT<T> grad;

  Parameter() = default;
  Parameter(std::string n, TensorT<T> v) : name(std::move(n)), value(std::move(v)), grad(TensorT<T>::zeros(value.shape)) {}

  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), T(0)); }
};

// Adam with bias correction; moment state persists across steps.
template <typename T>
class Adam {
 public:
  explicit Adam(T lr, T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8))
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<Parameter<T>>& params) {
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.push_back(TensorT<T>::zeros(p.value.shape));
        v_.push_back(TensorT<T>::zeros(p.value.shape));
      }
    }
    ++t_;
    const T bc1 = T(1) - std::pow(beta1_, static_cast<T>(t_));
    const T bc2 = T(1) - std::pow(beta2_, static_cast<T>(t_));
    for (size_t pi = 0; pi < params.size(); ++pi) {
      auto& p = params[pi];
      if (!p.grad.all_finite()) fail(Errc::NonFiniteGradient, "parameter " + p.name);
      auto& m = m_[pi];
      auto& v = v_[pi];
      for (int64_t i = 0; i < p.value.numel(); ++i) {
        const T g = p.grad.data[static_cast<size_t>(i)];
        m.data[static_cast<size_t>(i)] = beta1_ * m.data[static_cast<size_t>(i)] + (T(1) - beta1_) * g;
        v.data[static_cast<size_t>(i)] = beta2_ * v.data[static_cast<size_t>(i)] + (T(1) - beta2_) * g * g;
        const T mhat = m.data[static_cast<size_t>(i)] / bc1;
        const T vhat = v.data[static_cast<size_t>(i)] / bc2;
        p.value.data[static_cast<size_t>(i)] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

  void set_lr(T lr) { lr_ = lr; }
  int64_t steps() const { return t_; }

 private:
  T lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<TensorT<T>> m_, v_;
};

}  // namespace nn
}  // namespace ppgf
