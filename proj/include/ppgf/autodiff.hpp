#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ppgf/kernels.hpp"
#include "ppgf/tensor.hpp"

namespace ppgf {
namespace nn {

template <typename T>
class Tape;

template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  int id = -1;

  const TensorT<T>& value() const { return tape->val(id); }
  const TensorT<T>& grad() const { return tape->grad_of(id); }
  bool needs_grad() const { return tape->node(id).needs_grad; }
};

// Reverse-mode tape. Ops append nodes in topological order; backward walks
// the nodes in reverse, each closure accumulating into its parents' grads.
// A tape lives for one forward/backward pass.
template <typename T>
class Tape {
 public:
  struct Node {
    TensorT<T> value;
    TensorT<T> grad;
    bool needs_grad = false;
    std::function<void(Tape&)> back;
  };

  Var<T> leaf(TensorT<T> v, bool needs_grad) {
    Node n;
    n.value = std::move(v);
    n.needs_grad = needs_grad;
    if (needs_grad) n.grad = TensorT<T>::zeros(n.value.shape);
    nodes_.push_back(std::move(n));
    return Var<T>{this, static_cast<int>(nodes_.size()) - 1};
  }

  Var<T> constant(TensorT<T> v) { return leaf(std::move(v), false); }

  // Id the next pushed node will get; closures capture it before push.
  int next_id() const { return static_cast<int>(nodes_.size()); }

  Var<T> push(TensorT<T> value, bool needs_grad, std::function<void(Tape&)> back, const char* opname) {
    ensure_finite(value, opname);
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    if (needs_grad) {
      n.grad = TensorT<T>::zeros(n.value.shape);
      n.back = std::move(back);
    }
    nodes_.push_back(std::move(n));
    return Var<T>{this, static_cast<int>(nodes_.size()) - 1};
  }

  Node& node(int id) { return nodes_[static_cast<size_t>(id)]; }
  TensorT<T>& val(int id) { return nodes_[static_cast<size_t>(id)].value; }
  TensorT<T>& grad_of(int id) { return nodes_[static_cast<size_t>(id)].grad; }
  bool wants(int id) { return nodes_[static_cast<size_t>(id)].needs_grad; }

  void backward(Var<T> root) {
    if (nodes_.empty() || root.id < 0 || root.id >= static_cast<int>(nodes_.size()))
      fail(Errc::BackwardWithoutForward, "backward called with no recorded forward pass");
    Node& r = node(root.id);
    if (r.value.numel() != 1) fail(Errc::ShapeMismatch, "backward root must be scalar");
    if (!r.needs_grad)
      fail(Errc::BackwardWithoutForward, "backward root does not depend on any differentiable leaf");
    r.grad.data[0] = T(1);
    for (int i = root.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<size_t>(i)];
      if (n.needs_grad && n.back) n.back(*this);
    }
  }

  size_t size() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;
};

template <typename T>
inline void check_same_tape(Var<T> a, Var<T> b) {
  if (a.tape != b.tape) fail(Errc::ShapeMismatch, "vars belong to different tapes");
}

// ---- core ops --------------------------------------------------------------

// y = a(M,K) * b(K,N)
template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  check_same_tape(a, b);
  Tape<T>& tp = *a.tape;
  const auto& av = tp.val(a.id);
  const auto& bv = tp.val(b.id);
  if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0))
    fail(Errc::ShapeMismatch, "matmul " + shape_str(av) + " x " + shape_str(bv));
  const int M = av.dim(0), K = av.dim(1), N = bv.dim(1);
  TensorT<T> y({M, N});
  kern::matmul_nn(av.ptr(), bv.ptr(), y.ptr(), M, K, N);
  const int out = tp.next_id();
  return tp.push(std::move(y), a.needs_grad() || b.needs_grad(),
                 [=](Tape<T>& t) {
                   const TensorT<T>& dy = t.grad_of(out);
                   if (t.wants(a.id))  // dA(M,K) = dY(M,N) * B(K,N)^T
                     kern::matmul_nt(dy.ptr(), t.val(b.id).ptr(), t.grad_of(a.id).ptr(), M, N, K, true);
                   if (t.wants(b.id))  // dB(K,N) = A(M,K)^T * dY(M,N)
                     kern::matmul_tn(t.val(a.id).ptr(), dy.ptr(), t.grad_of(b.id).ptr(), K, M, N, true);
                 },
                 "matmul");
}

// elementwise sum, same shape
template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  check_same_tape(a, b);
  Tape<T>& tp = *a.tape;
  const auto& av = tp.val(a.id);
  const auto& bv = tp.val(b.id);
  if (!av.same_shape(bv)) fail(Errc::ShapeMismatch, "add " + shape_str(av) + " vs " + shape_str(bv));
  TensorT<T> y(av.shape);
  for (int64_t i = 0; i < y.numel(); ++i) y.data[i] = av.data[i] + bv.data[i];
  const int out = tp.next_id();
  return tp.push(std::move(y), a.needs_grad() || b.needs_grad(),
                 [=](Tape<T>& t) {
                   const auto& dy = t.grad_of(out);
                   if (t.wants(a.id))
                     for (int64_t i = 0; i < dy.numel(); ++i) t.grad_of(a.id).data[i] += dy.data[i];
                   if (t.wants(b.id))
                     for (int64_t i = 0; i < dy.numel(); ++i) t.grad_of(b.id).data[i] += dy.data[i];
                 },
                 "add");
}

// a(M,N) + bias(N) broadcast over rows
template <typename T>
Var<T> add_row(Var<T> a, Var<T> bias) {
  check_same_tape(a, bias);
  Tape<T>& tp = *a.tape;
  const auto& av = tp.val(a.id);
  const auto& bv = tp.val(bias.id);
  if (av.rank() != 2 || bv.numel() != av.dim(1))
    fail(Errc::ShapeMismatch, "add_row " + shape_str(av) + " vs " + shape_str(bv));
  const int M = av.dim(0), N = av.dim(1);
  TensorT<T> y({M, N});
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < N; ++j) y.data[static_cast<size_t>(i) * N + j] = av.data[static_cast<size_t>(i) * N + j] + bv.data[static_cast<size_t>(j)];
  const int out = tp.next_id();
  return tp.push(std::move(y), a.needs_grad() || bias.needs_grad(),
                 [=](Tape<T>& t) {
                   const auto& dy = t.grad_of(out);
                   if (t.wants(a.id))
                     for (int64_t i = 0; i < dy.numel(); ++i) t.grad_of(a.id).data[i] += dy.data[i];
                   if (t.wants(bias.id)) {
                     auto& db = t.grad_of(bias.id);
                     for (int i = 0; i < M; ++i)
                       for (int j = 0; j < N; ++j) db.data[static_cast<size_t>(j)] += dy.data[static_cast<size_t>(i) * N + j];
                   }
                 },
                 "add_row");
}

// elementwise product, same shape
template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  check_same_tape(a, b);
  Tape<T>& tp = *a.tape;
  const auto& av = tp.val(a.id);
  const auto& bv = tp.val(b.id);
  if (!av.same_shape(bv)) fail(Errc::ShapeMismatch, "mul " + shape_str(av) + " vs " + shape_str(bv));
  TensorT<T> y(av.shape);
  for (int64_t i = 0; i < y.numel(); ++i) y.data[i] = av.data[i] * bv.data[i];
  const int out = tp.next_id();
  return tp.push(std::move(y), a.needs_grad() || b.needs_grad(),
                 [=](Tape<T>& t) {
                   const auto& dy = t.grad_of(out);
                   if (t.wants(a.id)) {
                     const auto& bvv = t.val(b.id);
                     for (int64_t i = 0; i < dy.numel(); ++i) t.grad_of(a.id).data[i] += dy.data[i] * bvv.data[i];
                   }
                   if (t.wants(b.id)) {
                     const auto& avv = t.val(a.id);
                     for (int64_t i = 0; i < dy.numel(); ++i) t.grad_of(b.id).data[i] += dy.data[i] * avv.data[i];
                   }
                 },
                 "mul");
}

// a(M,N) * c(M,1) broadcast along columns (confidence gating)
template <typename T>
Var<T> mul_col(Var<T> a, Var<T> c) {
  check_same_tape(a, c);
  Tape<T>& tp = *a.tape;
  const auto& av = tp.val(a.id);
  const auto& cv = tp.val(c.id);
  if (av.rank() != 2 || cv.numel() != av.dim(0))
    fail(Errc::ShapeMismatch, "mul_col " + shape_str(av) + " vs " + shape_str(cv));
  const int M = av.dim(0), N = av.dim(1);
  TensorT<T> y({M, N});
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < N; ++j) y.data[static_cast<size_t>(i) * N + j] = av.data[static_cast<size_t>(i) * N + j] * cv.data[static_cast<size_t>(i)];
  const int out = tp.next_id();
  return tp.push(std::move(y), a.needs_grad() || c.needs_grad(),
                 [=](Tape<T>& t) {
                   const auto& dy = t.grad_of(out);
                   if (t.wants(a.id)) {
                     const auto& cvv = t.val(c.id);
                     auto& da = t.grad_of(a.id);
                     for (int i = 0; i < M; ++i)
                       for (int j = 0; j < N; ++j) da.data[static_cast<size_t>(i) * N + j] += dy.data[static_cast<size_t>(i) * N + j] * cvv.data[static_cast<size_t>(i)];
                   }
                   if (t.wants(c.id)) {
                     const auto& avv = t.val(a.id);
                     auto& dc = t.grad_of(c.id);
                     for (int i = 0; i < M; ++i) {
                       T s = T(0);
                       for (int j = 0; j < N; ++j) s += dy.data[static_cast<size_t>(i) * N + j] * avv.data[static_cast<size_t>(i) * N + j];
                       dc.data[static_cast<size_t>(i)] += s;
                     }
                   }
                 },
                 "mul_col");
}

template <typename T>
Var<T> relu(Var<T> a) {
  Tape<T>& tp = *a.tape;
  const auto& av = tp.val(a.id);
  TensorT<T> y(av.shape);
  for (int64_t i = 0; i < y.numel(); ++i) y.data[i] = av.data[i] > T(0) ? av.data[i] : T(0);
  const int out = tp.next_id();
  return tp.push(std::move(y), a.needs_grad(),
                 [=](Tape<T>& t) {
                   const auto& dy = t.grad_of(out);
                   const auto& x = t.val(a.id);
                   auto& dx = t.grad_of(a.id);
                   for (int64_t i = 0; i < dy.numel(); ++i)
                     if (x.data[i] > T(0)) dx.data[i] += dy.data[i];
                 },
                 "relu");
}

template <typename T>
Var<T> elu(Var<T> a) {
  Tape<T>& tp = *a.tape;
  const auto& av = tp.val(a.id);
  TensorT<T> y(av.shape);
  for (int64_t i = 0; i < y.numel(); ++i) y.data[i] = av.data[i] > T(0) ? av.data[i] : std::expm1(av.data[i]);
  const int out = tp.next_id();
  return tp.push(std::move(y), a.needs_grad(),
                 [=](Tape<T>& t) {
                   const auto& dy = t.grad_of(out);
                   const auto& x = t.val(a.id);
                   const auto& yv = t.val(out);
                   auto& dx = t.grad_of(a.id);
                   for (int64_t i = 0; i < dy.numel(); ++i)
                     dx.data[i] += dy.data[i] * (x.data[i] > T(0) ? T(1) : yv.data[i] + T(1));
                 },
                 "elu");
}

template <typename T>
Var<T> sigmoid(Var<T> a) {
  Tape<T>& tp = *a.tape;
  const auto& av = tp.val(a.id);
  TensorT<T> y(av.shape);
  for (int64_t i = 0; i < y.numel(); ++i) {
    const T x = av.data[i];
    y.data[i] = x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
  }
  const int out = tp.next_id();
  return tp.push(std::move(y), a.needs_grad(),
                 [=](Tape<T>& t) {
                   const auto& dy = t.grad_of(out);
                   const auto& s = t.val(out);
                   auto& dx = t.grad_of(a.id);
                   for (int64_t i = 0; i < dy.numel(); ++i) dx.data[i] += dy.data[i] * s.data[i] * (T(1) - s.data[i]);
                 },
                 "sigmoid");
}

template <typename T>
Var<T> reshape(Var<T> a, std::vector<int> shape) {
  Tape<T>& tp = *a.tape;
  const auto& av = tp.val(a.id);
  if (TensorT<T>::numel_of(shape) != av.numel())
    fail(Errc::ShapeMismatch, "reshape numel mismatch " + shape_str(av));
  TensorT<T> y(shape, av.data);
  const int out = tp.next_id();
  return tp.push(std::move(y), a.needs_grad(),
                 [=](Tape<T>& t) {
                   const auto& dy = t.grad_of(out);
                   auto& dx = t.grad_of(a.id);
                   for (int64_t i = 0; i < dy.numel(); ++i) dx.data[i] += dy.data[i];
                 },
                 "reshape");
}

// value copy that blocks gradient flow
template <typename T>
Var<T> detach(Var<T> a) {
  Tape<T>& tp = *a.tape;
  return tp.constant(tp.val(a.id));
}

template <typename T>
Var<T> softmax_rows(Var<T> a) {
  Tape<T>& tp = *a.tape;
  const auto& av = tp.val(a.id);
  if (av.rank() != 2) fail(Errc::ShapeMismatch, "softmax_rows wants rank-2, got " + shape_str(av));
  const int M = av.dim(0), N = av.dim(1);
  TensorT<T> y({M, N});
  kern::softmax_rows(av.ptr(), y.ptr(), M, N);
  const int out = tp.next_id();
  return tp.push(std::move(y), a.needs_grad(),
                 [=](Tape<T>& t) {
                   const auto& dy = t.grad_of(out);
                   const auto& p = t.val(out);
                   auto& dx = t.grad_of(a.id);
                   for (int i = 0; i < M; ++i) {
                     const T* pr = p.ptr() + static_cast<int64_t>(i) * N;
                     const T* dr = dy.ptr() + static_cast<int64_t>(i) * N;
                     T dot = T(0);
                     for (int j = 0; j < N; ++j) dot += dr[j] * pr[j];
                     T* dxr = dx.ptr() + static_cast<int64_t>(i) * N;
                     for (int j = 0; j < N; ++j) dxr[j] += pr[j] * (dr[j] - dot);
                   }
                 },
                 "softmax_rows");
}

// Row-wise layer normalization with learned gain/shift.
template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> shift, T eps = T(1e-5)) {
  check_same_tape(x, gain);
  check_same_tape(x, shift);
  Tape<T>& tp = *x.tape;
  const auto& xv = tp.val(x.id);
  const auto& gv = tp.val(gain.id);
  const auto& sv = tp.val(shift.id);
  if (xv.rank() != 2 || gv.numel() != xv.dim(1) || sv.numel() != xv.dim(1))
    fail(Errc::ShapeMismatch, "layer_norm " + shape_str(xv));
  const int M = xv.dim(0), N = xv.dim(1);
  auto xhat = std::make_shared<TensorT<T>>(std::vector<int>{M, N});
  auto rstd = std::make_shared<std::vector<T>>(static_cast<size_t>(M));
  TensorT<T> y({M, N});
  for (int i = 0; i < M; ++i) {
    const T* xr = xv.ptr() + static_cast<int64_t>(i) * N;
    T mu = T(0);
    for (int j = 0; j < N; ++j) mu += xr[j];
    mu /= static_cast<T>(N);
    T var = T(0);
    for (int j = 0; j < N; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<T>(N);
    const T rs = T(1) / std::sqrt(var + eps);
    (*rstd)[static_cast<size_t>(i)] = rs;
    for (int j = 0; j < N; ++j) {
      const T xh = (xr[j] - mu) * rs;
      xhat->data[static_cast<size_t>(i) * N + j] = xh;
      y.data[static_cast<size_t>(i) * N + j] = gv.data[static_cast<size_t>(j)] * xh + sv.data[static_cast<size_t>(j)];
    }
  }
  const int out = tp.next_id();
  return tp.push(std::move(y), x.needs_grad() || gain.needs_grad() || shift.needs_grad(),
                 [=](Tape<T>& t) {
                   const auto& dy = t.grad_of(out);
                   const auto& gvv = t.val(gain.id);
                   if (t.wants(gain.id)) {
                     auto& dg = t.grad_of(gain.id);
                     for (int i = 0; i < M; ++i)
                       for (int j = 0; j < N; ++j)
                         dg.data[static_cast<size_t>(j)] += dy.data[static_cast<size_t>(i) * N + j] * xhat->data[static_cast<size_t>(i) * N + j];
                   }
                   if (t.wants(shift.id)) {
                     auto& db = t.grad_of(shift.id);
                     for (int i = 0; i < M; ++i)
                       for (int j = 0; j < N; ++j) db.data[static_cast<size_t>(j)] += dy.data[static_cast<size_t>(i) * N + j];
                   }
                   if (t.wants(x.id)) {
                     auto& dx = t.grad_of(x.id);
                     std::vector<T> dxh(static_cast<size_t>(N));
                     for (int i = 0; i < M; ++i) {
                       const T* dr = dy.ptr() + static_cast<int64_t>(i) * N;
                       const T* xh = xhat->ptr() + static_cast<int64_t>(i) * N;
                       T m1 = T(0), m2 = T(0);
                       for (int j = 0; j < N; ++j) {
                         dxh[static_cast<size_t>(j)] = dr[j] * gvv.data[static_cast<size_t>(j)];
                         m1 += dxh[static_cast<size_t>(j)];
                         m2 += dxh[static_cast<size_t>(j)] * xh[j];
                       }
                       m1 /= static_cast<T>(N);
                       m2 /= static_cast<T>(N);
                       const T rs = (*rstd)[static_cast<size_t>(i)];
                       for (int j = 0; j < N; ++j)
                         dx.data[static_cast<size_t>(i) * N + j] += rs * (dxh[static_cast<size_t>(j)] - m1 - xh[j] * m2);
                     }
                   }
                 },
                 "layer_norm");
}

// x(B,L,D) cross-correlated with w(C,W,D), same zero padding, stride 1.
template <typename T>
Var<T> conv1d(Var<T> x, Var<T> w) {
  check_same_tape(x, w);
  Tape<T>& tp = *x.tape;
  const auto& xv = tp.val(x.id);
  const auto& wv = tp.val(w.id);
  if (xv.rank() != 3 || wv.rank() != 3 || xv.dim(2) != wv.dim(2))
    fail(Errc::ShapeMismatch, "conv1d " + shape_str(xv) + " with " + shape_str(wv));
  if (wv.dim(1) % 2 == 0) fail(Errc::EvenKernelWidth, "kernel width must be odd, got " + str(wv.dim(1)));
  const int B = xv.dim(0), L = xv.dim(1), D = xv.dim(2), C = wv.dim(0), W = wv.dim(1);
  TensorT<T> y({B, L, C});
  kern::conv1d_forward(xv.ptr(), wv.ptr(), y.ptr(), B, L, D, C, W);
  const int out = tp.next_id();
  return tp.push(std::move(y), x.needs_grad() || w.needs_grad(),
                 [=](Tape<T>& t) {
                   const auto& dy = t.grad_of(out);
                   if (t.wants(x.id))
                     kern::conv1d_backward_input(dy.ptr(), t.val(w.id).ptr(), t.grad_of(x.id).ptr(), B, L, D, C, W, true);
                   if (t.wants(w.id))
                     kern::conv1d_backward_kernels(t.val(x.id).ptr(), dy.ptr(), t.grad_of(w.id).ptr(), B, L, D, C, W, true);
                 },
                 "conv1d");
}

// Multi-head scaled dot-product attention; q,k,v are (B*L, d) position-major.
template <typename T>
Var<T> attention(Var<T> q, Var<T> k, Var<T> v, int B, int L, int heads) {
  check_same_tape(q, k);
  check_same_tape(q, v);
  Tape<T>& tp = *q.tape;
  const auto& qv = tp.val(q.id);
  const auto& kv = tp.val(k.id);
  const auto& vv = tp.val(v.id);
  if (qv.rank() != 2 || !qv.same_shape(kv) || !qv.same_shape(vv) || qv.dim(0) != B * L)
    fail(Errc::ShapeMismatch, "attention shapes " + shape_str(qv));
  const int d = qv.dim(1);
  if (heads < 1 || d % heads != 0) fail(Errc::BadHeads, "model dim " + str(d) + " not divisible by heads " + str(heads));
  auto probs = std::make_shared<TensorT<T>>(std::vector<int>{B, heads, L, L});
  TensorT<T> y({B * L, d});
  kern::mha_forward(qv.ptr(), kv.ptr(), vv.ptr(), y.ptr(), probs->ptr(), B, L, d, heads);
  ensure_finite(*probs, "attention probs");
  const int out = tp.next_id();
  return tp.push(std::move(y), q.needs_grad() || k.needs_grad() || v.needs_grad(),
                 [=](Tape<T>& t) {
                   const auto& dy = t.grad_of(out);
                   std::vector<T> scratch(static_cast<size_t>(kern::mha_scratch_size(L)));
                   kern::mha_backward(t.val(q.id).ptr(), t.val(k.id).ptr(), t.val(v.id).ptr(), probs->ptr(),
                                      dy.ptr(), t.grad_of(q.id).ptr(), t.grad_of(k.id).ptr(), t.grad_of(v.id).ptr(),
                                      scratch.data(), B, L, d, heads, true);
                 },
                 "attention");
}

// x(B,L,d) plus a constant (L,d) offset broadcast over the batch.
template <typename T>
Var<T> add_time_const(Var<T> x, const TensorT<T>& pe) {
  Tape<T>& tp = *x.tape;
  const auto& xv = tp.val(x.id);
  if (xv.rank() != 3 || pe.rank() != 2 || pe.dim(0) != xv.dim(1) || pe.dim(1) != xv.dim(2))
    fail(Errc::ShapeMismatch, "add_time_const " + shape_str(xv));
  const int B = xv.dim(0), L = xv.dim(1), d = xv.dim(2);
  TensorT<T> y({B, L, d});
  for (int b = 0; b < B; ++b)
    for (int64_t i = 0; i < static_cast<int64_t>(L) * d; ++i)
      y.data[static_cast<size_t>(b) * L * d + i] = xv.data[static_cast<size_t>(b) * L * d + i] + pe.data[static_cast<size_t>(i)];
  const int out = tp.next_id();
  return tp.push(std::move(y), x.needs_grad(),
                 [=](Tape<T>& t) {
                   const auto& dy = t.grad_of(out);
                   auto& dx = t.grad_of(x.id);
                   for (int64_t i = 0; i < dy.numel(); ++i) dx.data[i] += dy.data[i];
                 },
                 "add_time_const");
}

// (B,L,d) -> (B,d), mean over time
template <typename T>
Var<T> mean_pool_time(Var<T> x) {
  Tape<T>& tp = *x.tape;
  const auto& xv = tp.val(x.id);
  if (xv.rank() != 3) fail(Errc::ShapeMismatch, "mean_pool_time wants rank-3, got " + shape_str(xv));
  const int B = xv.dim(0), L = xv.dim(1), d = xv.dim(2);
  TensorT<T> y({B, d});
  for (int b = 0; b < B; ++b)
    for (int l = 0; l < L; ++l)
      for (int j = 0; j < d; ++j) y.data[static_cast<size_t>(b) * d + j] += xv.data[(static_cast<size_t>(b) * L + l) * d + j];
  for (int64_t i = 0; i < y.numel(); ++i) y.data[i] /= static_cast<T>(L);
  const int out = tp.next_id();
  return tp.push(std::move(y), x.needs_grad(),
                 [=](Tape<T>& t) {
                   const auto& dy = t.grad_of(out);
                   auto& dx = t.grad_of(x.id);
                   const T inv = T(1) / static_cast<T>(L);
                   for (int b = 0; b < B; ++b)
                     for (int l = 0; l < L; ++l)
                       for (int j = 0; j < d; ++j)
                         dx.data[(static_cast<size_t>(b) * L + l) * d + j] += dy.data[static_cast<size_t>(b) * d + j] * inv;
                 },
                 "mean_pool_time");
}

template <typename T>
Var<T> sum(Var<T> a) {
  Tape<T>& tp = *a.tape;
  const auto& av = tp.val(a.id);
  T s = T(0);
  for (int64_t i = 0; i < av.numel(); ++i) s += av.data[i];
  const int out = tp.next_id();
  return tp.push(TensorT<T>::scalar(s), a.needs_grad(),
                 [=](Tape<T>& t) {
                   const T g = t.grad_of(out).data[0];
                   auto& dx = t.grad_of(a.id);
                   for (int64_t i = 0; i < dx.numel(); ++i) dx.data[i] += g;
                 },
                 "sum");
}

// mean squared difference over all elements
template <typename T>
Var<T> mse(Var<T> a, Var<T> b) {
  check_same_tape(a, b);
  Tape<T>& tp = *a.tape;
  const auto& av = tp.val(a.id);
  const auto& bv = tp.val(b.id);
  if (!av.same_shape(bv)) fail(Errc::ShapeMismatch, "mse " + shape_str(av) + " vs " + shape_str(bv));
  const int64_t n = av.numel();
  T s = T(0);
  for (int64_t i = 0; i < n; ++i) {
    const T d = av.data[i] - bv.data[i];
    s += d * d;
  }
  s /= static_cast<T>(n);
  const int out = tp.next_id();
  return tp.push(TensorT<T>::scalar(s), a.needs_grad() || b.needs_grad(),
                 [=](Tape<T>& t) {
                   const T g = t.grad_of(out).data[0] * T(2) / static_cast<T>(n);
                   const auto& avv = t.val(a.id);
                   const auto& bvv = t.val(b.id);
                   if (t.wants(a.id)) {
                     auto& da = t.grad_of(a.id);
                     for (int64_t i = 0; i < n; ++i) da.data[i] += g * (avv.data[i] - bvv.data[i]);
                   }
                   if (t.wants(b.id)) {
                     auto& db = t.grad_of(b.id);
                     for (int64_t i = 0; i < n; ++i) db.data[i] -= g * (avv.data[i] - bvv.data[i]);
                   }
                 },
                 "mse");
}

// -mean_i log softmax(z_i)[label_i], log-sum-exp stabilized.
// labels are 0-based row targets.
template <typename T>
Var<T> cross_entropy_logits(Var<T> z, const std::vector<int>& labels) {
  Tape<T>& tp = *z.tape;
  const auto& zv = tp.val(z.id);
  if (zv.rank() != 2 || static_cast<int>(labels.size()) != zv.dim(0))
    fail(Errc::ShapeMismatch, "cross_entropy logits " + shape_str(zv) + " with " + str(labels.size()) + " labels");
  const int M = zv.dim(0), K = zv.dim(1);
  for (int i = 0; i < M; ++i)
    if (labels[static_cast<size_t>(i)] < 0 || labels[static_cast<size_t>(i)] >= K)
      fail(Errc::LabelOutOfRange, "label " + str(labels[static_cast<size_t>(i)] + 1) + " outside 1.." + str(K));
  auto probs = std::make_shared<TensorT<T>>(std::vector<int>{M, K});
  kern::softmax_rows(zv.ptr(), probs->ptr(), M, K);
  T loss = T(0);
  for (int i = 0; i < M; ++i) {
    const T* zr = zv.ptr() + static_cast<int64_t>(i) * K;
    T mx = zr[0];
    for (int j = 1; j < K; ++j) mx = zr[j] > mx ? zr[j] : mx;
    T den = T(0);
    for (int j = 0; j < K; ++j) den += std::exp(zr[j] - mx);
    loss += (mx + std::log(den)) - zr[labels[static_cast<size_t>(i)]];
  }
  loss /= static_cast<T>(M);
  auto lab = std::make_shared<std::vector<int>>(labels);
  const int out = tp.next_id();
  return tp.push(TensorT<T>::scalar(loss), z.needs_grad(),
                 [=](Tape<T>& t) {
                   const T g = t.grad_of(out).data[0] / static_cast<T>(M);
                   auto& dz = t.grad_of(z.id);
                   for (int i = 0; i < M; ++i) {
                     const T* pr = probs->ptr() + static_cast<int64_t>(i) * K;
                     T* dr = dz.ptr() + static_cast<int64_t>(i) * K;
                     for (int j = 0; j < K; ++j) dr[j] += g * (pr[j] - (j == (*lab)[static_cast<size_t>(i)] ? T(1) : T(0)));
                   }
                 },
                 "cross_entropy");
}

// per-row column pick: y[i] = z[i, idx[i]], shape (M,1)
template <typename T>
Var<T> take_index(Var<T> z, const std::vector<int>& idx) {
  Tape<T>& tp = *z.tape;
  const auto& zv = tp.val(z.id);
  if (zv.rank() != 2 || static_cast<int>(idx.size()) != zv.dim(0))
    fail(Errc::ShapeMismatch, "take_index " + shape_str(zv) + " with " + str(idx.size()) + " indices");
  const int M = zv.dim(0), N = zv.dim(1);
  for (int i = 0; i < M; ++i)
    if (idx[static_cast<size_t>(i)] < 0 || idx[static_cast<size_t>(i)] >= N)
      fail(Errc::LabelOutOfRange, "index " + str(idx[static_cast<size_t>(i)]) + " outside 0.." + str(N - 1));
  TensorT<T> y({M, 1});
  for (int i = 0; i < M; ++i) y.data[static_cast<size_t>(i)] = zv.data[static_cast<size_t>(i) * N + idx[static_cast<size_t>(i)]];
  auto keep = std::make_shared<std::vector<int>>(idx);
  const int out = tp.next_id();
  return tp.push(std::move(y), z.needs_grad(),
                 [=](Tape<T>& t) {
                   const auto& dy = t.grad_of(out);
                   auto& dz = t.grad_of(z.id);
                   for (int i = 0; i < M; ++i)
                     dz.data[static_cast<size_t>(i) * N + (*keep)[static_cast<size_t>(i)]] += dy.data[static_cast<size_t>(i)];
                 },
                 "take_index");
}

// weighted sum of scalar vars
template <typename T>
Var<T> wsum(const std::vector<Var<T>>& xs, const std::vector<T>& cs) {
  if (xs.empty() || xs.size() != cs.size()) fail(Errc::ShapeMismatch, "wsum arity");
  Tape<T>& tp = *xs[0].tape;
  T s = T(0);
  bool ng = false;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (tp.val(xs[i].id).numel() != 1) fail(Errc::ShapeMismatch, "wsum wants scalars");
    s += cs[i] * tp.val(xs[i].id).data[0];
    ng = ng || xs[i].needs_grad();
  }
  const int out = tp.next_id();
  auto xs2 = xs;
  auto cs2 = cs;
  return tp.push(TensorT<T>::scalar(s), ng,
                 [out, xs2, cs2](Tape<T>& t) {
                   const T g = t.grad_of(out).data[0];
                   for (size_t i = 0; i < xs2.size(); ++i)
                     if (t.wants(xs2[i].id)) t.grad_of(xs2[i].id).data[0] += g * cs2[i];
                 },
                 "wsum");
}

}  // namespace nn
}  // namespace ppgf
