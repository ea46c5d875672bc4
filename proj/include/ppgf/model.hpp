#pragma once

#include <set>
#include <string>
#include <vector>

#include "ppgf/autodiff.hpp"
#include "ppgf/data.hpp"
#include "ppgf/optimizer.hpp"
#include "ppgf/rng.hpp"

namespace ppgf {

enum class Ablation {
  NoClassifier,       // direct regression of raw targets, no pattern heads
  NoRelative,         // classification only
  NoConv,
  NoTransformer,
  NoGrn,
  EqualWidthGrouping, // data-side: equal-width bins instead of quantile bins
  NoConfidnet,        // ungated classifier, no confidence loss
};

const char* ablation_name(Ablation a);
Ablation ablation_from_name(const std::string& s);
std::vector<Ablation> all_ablations();

struct PPGFConfig {
  int L = 32, D = 1, T = 1, K = 2;
  int conv_channels = 8;
  int conv_width = 3;
  int model_dim = 16;   // extractor width d (also the g dimension)
  int hidden_dim = 32;  // classifier feature width
  int heads = 2;
  double lambda1 = 1.0, lambda2 = 1.0, lambda3 = 5.0;
  double aux_ce_weight = 1.0;  // weight of the auxiliary head inside L_cls
  bool detach_confidence_gate = true;
  double lr = 1e-3;
  uint64_t seed = 1;
  std::set<Ablation> ablation;

  bool has(Ablation a) const { return ablation.count(a) > 0; }
  bool classifier() const { return !has(Ablation::NoClassifier); }
  bool relative() const { return !has(Ablation::NoRelative); }
  bool confidnet() const { return classifier() && !has(Ablation::NoConfidnet); }
  void validate() const;
};

// Fixed sinusoidal positional encoding, (L, d).
template <typename T>
TensorT<T> sinusoidal_encoding(int L, int d) {
  TensorT<T> pe({L, d});
  for (int l = 0; l < L; ++l) {
    for (int i = 0; i < d; i += 2) {
      const double rate = std::pow(10000.0, static_cast<double>(i) / d);
      pe.data[static_cast<size_t>(l) * d + i] = static_cast<T>(std::sin(l / rate));
      if (i + 1 < d) pe.data[static_cast<size_t>(l) * d + i + 1] = static_cast<T>(std::cos(l / rate));
    }
  }
  return pe;
}

// Pre-norm encoder block on (B*L, d) rows: x + MHSA(LN(x)), then + FFN(LN(.)).
// Positional information is the caller's responsibility.
template <typename T>
struct EncoderParams {
  // no key bias: a shared offset on every key shifts each score row by a
  // constant and cancels inside the row softmax, so the parameter would be
  // structurally gradient-free
  nn::Var<T> ln1_g, ln1_b, wq, bq, wk, wv, bv, wo, bo, ln2_g, ln2_b, ffn1_w, ffn1_b, ffn2_w, ffn2_b;
};

template <typename T>
nn::Var<T> attention_encoder(nn::Var<T> x2, const EncoderParams<T>& p, int B, int L, int heads) {
  using namespace nn;
  Var<T> n1 = layer_norm(x2, p.ln1_g, p.ln1_b);
  Var<T> q = add_row(matmul(n1, p.wq), p.bq);
  Var<T> k = matmul(n1, p.wk);
  Var<T> v = add_row(matmul(n1, p.wv), p.bv);
  Var<T> att = attention(q, k, v, B, L, heads);
  Var<T> z = add(x2, add_row(matmul(att, p.wo), p.bo));
  Var<T> n2 = layer_norm(z, p.ln2_g, p.ln2_b);
  Var<T> f = relu(add_row(matmul(n2, p.ffn1_w), p.ffn1_b));
  f = add_row(matmul(f, p.ffn2_w), p.ffn2_b);
  return add(z, f);
}

// Gated residual unit on rows:
// LayerNorm(x + GLU(value, gate)) where value/gate project ELU(W1 x + b1).
template <typename T>
struct GrnParams {
  nn::Var<T> w1, b1, wv, bv, wg, bg, ln_g, ln_b;
};

template <typename T>
nn::Var<T> grn(nn::Var<T> x2, const GrnParams<T>& p) {
  using namespace nn;
  Var<T> u = elu(add_row(matmul(x2, p.w1), p.b1));
  Var<T> value = add_row(matmul(u, p.wv), p.bv);
  Var<T> gate = sigmoid(add_row(matmul(u, p.wg), p.bg));
  return layer_norm(add(x2, mul(value, gate)), p.ln_g, p.ln_b);
}

// Parameter handles; -1 for modules pruned by ablation.
struct ParamHandles {
  int conv_w = -1;
  int embed_w = -1, embed_b = -1;
  int ln1_g = -1, ln1_b = -1, wq = -1, bq = -1, wk = -1, wv = -1, bv = -1, wo = -1, bo = -1;
  int ln2_g = -1, ln2_b = -1, ffn1_w = -1, ffn1_b = -1, ffn2_w = -1, ffn2_b = -1;
  int grn_w1 = -1, grn_b1 = -1, grn_wv = -1, grn_bv = -1, grn_wg = -1, grn_bg = -1, grn_ln_g = -1, grn_ln_b = -1;
  int proj_w = -1, proj_b = -1;
  int fc1_w = -1, fc1_b = -1;
  int aux_w = -1, aux_b = -1;
  int conf1_w = -1, conf1_b = -1, conf2_w = -1, conf2_b = -1;
  int fc2_w = -1, fc2_b = -1;
  int fc3_w = -1, fc3_b = -1;
};

template <typename T>
class PPGFModel;

// Tape-bound view of a model: parameter leaves pushed onto one tape.
template <typename T>
struct Bound {
  const PPGFModel<T>* model = nullptr;
  nn::Tape<T>* tape = nullptr;
  std::vector<int> ids;

  nn::Var<T> at(int param_index) const { return nn::Var<T>{tape, ids[static_cast<size_t>(param_index)]}; }
};

template <typename T>
struct ForwardVars {
  int B = 0;
  nn::Var<T> g;             // B x d
  nn::Var<T> feat;          // h: B x dim
  nn::Var<T> aux_logits;    // B x K
  nn::Var<T> p_aux;         // B x K
  nn::Var<T> c_hat;         // B x 1
  nn::Var<T> feat_gated;    // h~: B x dim
  nn::Var<T> logits_final;  // B x (T*K)
  // relative grid, B x (T*K): position within each candidate pattern's
  // interval per horizon step; B x T direct raw head when no_classifier
  nn::Var<T> delta_hat;
  bool has_classifier = false, has_confidnet = false, has_relative = false;
};

// Overrides used by finite-difference checks: stop-gradient quantities are
// held at fixed values so the probed function matches the one the analytic
// gradients belong to.
template <typename T>
struct ForwardOverrides {
  const TensorT<T>* fixed_gate = nullptr;  // (B,1)
};

template <typename T>
struct LabelBatch {
  std::vector<int> k_flat;   // B*T, 0-based
  std::vector<int> k_first;  // B, 0-based first-horizon-step label (aux/TCP target)
  TensorT<T> dy;             // (B,T)
  TensorT<T> y_raw;          // (B,T)
};

template <typename T>
struct LossVars {
  nn::Var<T> conf, cls, reg, total;
};

struct LossBreakdown {
  double conf = 0, cls = 0, reg = 0, total = 0;
};

template <typename T>
struct InferResult {
  int B = 0, T_steps = 0;
  std::vector<int> k_hat;     // B*T, 1-based (empty without classifier)
  std::vector<double> y_hat;  // B*T (empty without a forecasting head)
  std::vector<double> delta;  // B*T raw relative outputs
  std::vector<double> c_hat;  // B (1.0 when gating is disabled)
  std::vector<int> k_aux;     // B, 1-based argmax of the pre-gate distribution
};

template <typename T>
class PPGFModel {
 public:
  PPGFConfig cfg;
  std::vector<nn::Parameter<T>> params;
  ParamHandles h;
  TensorT<T> pos_enc;  // (L, model_dim)

  static PPGFModel build(const PPGFConfig& cfg);

  int64_t param_count() const {
    int64_t n = 0;
    for (const auto& p : params) n += p.value.numel();
    return n;
  }

  const nn::Parameter<T>* find(const std::string& name) const {
    for (const auto& p : params)
      if (p.name == name) return &p;
    return nullptr;
  }

  void zero_grads() {
    for (auto& p : params) p.zero_grad();
  }

  Bound<T> bind(nn::Tape<T>& tape, bool with_grad) const {
    Bound<T> b;
    b.model = this;
    b.tape = &tape;
    b.ids.reserve(params.size());
    for (const auto& p : params) b.ids.push_back(tape.leaf(p.value, with_grad).id);
    return b;
  }

  void collect_grads(const Bound<T>& b) {
    for (size_t i = 0; i < params.size(); ++i) params[i].grad = b.tape->grad_of(b.ids[i]);
  }

  // x: (B, L, D) normalized inputs.
  ForwardVars<T> forward(const Bound<T>& b, const TensorT<T>& x, const ForwardOverrides<T>& ov = {}) const;

  // Losses for one labelled batch. fixed_c_star substitutes the TCP target
  // (finite-difference protocol); by default c* is read off the live aux
  // distribution and treated as a constant.
  LossVars<T> losses(const Bound<T>& b, const ForwardVars<T>& f, const LabelBatch<T>& lab,
                     const TensorT<T>* fixed_c_star = nullptr) const;

  InferResult<T> infer(const GroupingScheme& scheme, const TensorT<T>& x) const;

  LossBreakdown eval_losses(const TensorT<T>& x, const LabelBatch<T>& lab) const;
};

template <typename T>
LossBreakdown breakdown(const LossVars<T>& lv) {
  LossBreakdown out;
  out.conf = static_cast<double>(lv.conf.value().item());
  out.cls = static_cast<double>(lv.cls.value().item());
  out.reg = static_cast<double>(lv.reg.value().item());
  out.total = static_cast<double>(lv.total.value().item());
  return out;
}

// ---- implementation --------------------------------------------------------

inline const char* ablation_name(Ablation a) {
  switch (a) {
    case Ablation::NoClassifier: return "no_classifier";
    case Ablation::NoRelative: return "no_relative";
    case Ablation::NoConv: return "no_conv";
    case Ablation::NoTransformer: return "no_transformer";
    case Ablation::NoGrn: return "no_grn";
    case Ablation::EqualWidthGrouping: return "equal_width_grouping";
    case Ablation::NoConfidnet: return "no_confidnet";
  }
  return "?";
}

inline Ablation ablation_from_name(const std::string& s) {
  for (Ablation a : all_ablations())
    if (s == ablation_name(a)) return a;
  fail(Errc::UnknownVariant, "unknown ablation '" + s + "'");
}

inline std::vector<Ablation> all_ablations() {
  return {Ablation::NoClassifier, Ablation::NoRelative,  Ablation::NoConv,     Ablation::NoTransformer,
          Ablation::NoGrn,        Ablation::EqualWidthGrouping, Ablation::NoConfidnet};
}

inline void PPGFConfig::validate() const {
  auto positive = [](int v, const char* what) {
    if (v < 1) fail(Errc::ConfigError, std::string(what) + " must be positive, got " + str(v));
  };
  positive(L, "lookback");
  positive(D, "channels");
  positive(T, "horizon");
  positive(model_dim, "model_dim");
  positive(hidden_dim, "hidden_dim");
  positive(heads, "heads");
  if (classifier() && K < 2) fail(Errc::KTooSmall, "groups " + str(K) + " (need K >= 2)");
  if (!has(Ablation::NoConv)) {
    positive(conv_channels, "conv_channels");
    if (conv_width < 1 || conv_width % 2 == 0)
      fail(Errc::EvenKernelWidth, "conv_width must be odd and positive, got " + str(conv_width));
  }
  if (!has(Ablation::NoTransformer) && model_dim % heads != 0)
    fail(Errc::BadHeads, "model_dim " + str(model_dim) + " not divisible by heads " + str(heads));
  if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0) fail(Errc::ConfigError, "loss weights must be >= 0");
  if (aux_ce_weight < 0) fail(Errc::ConfigError, "aux_ce_weight must be >= 0");
  if (!classifier() && !relative())
    fail(Errc::ConfigError, "no_classifier and no_relative cannot be combined");
}

template <typename T>
PPGFModel<T> PPGFModel<T>::build(const PPGFConfig& cfg) {
  cfg.validate();
  PPGFModel<T> m;
  m.cfg = cfg;
  const int d = cfg.model_dim;
  const int dim = cfg.hidden_dim;
  const int confid_hidden = std::max(1, dim / 2);

  // Every parameter draws from its own named stream, so shared modules get
  // identical values across ablation variants of the same seed.
  auto glorot = [&](const std::string& name, std::vector<int> shape, int fan_in, int fan_out) {
    TensorT<T> t(shape);
    Rng rng(derive_seed(cfg.seed, "init/" + name));
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : t.data) v = static_cast<T>(rng.uniform(-bound, bound));
    m.params.emplace_back(name, std::move(t));
    return static_cast<int>(m.params.size()) - 1;
  };
  auto fill = [&](const std::string& name, std::vector<int> shape, T value) {
    m.params.emplace_back(name, TensorT<T>::full(shape, value));
    return static_cast<int>(m.params.size()) - 1;
  };
  auto dense = [&](const std::string& name, int in, int out, int* w, int* b) {
    *w = glorot(name + ".w", {in, out}, in, out);
    *b = fill(name + ".b", {out}, T(0));
  };

  int chan = cfg.D;
  if (!cfg.has(Ablation::NoConv)) {
    m.h.conv_w = glorot("extractor.conv.w", {cfg.conv_channels, cfg.conv_width, cfg.D}, cfg.conv_width * cfg.D,
                        cfg.conv_width * cfg.conv_channels);
    chan = cfg.conv_channels;
  }
  dense("extractor.embed", chan, d, &m.h.embed_w, &m.h.embed_b);
  if (!cfg.has(Ablation::NoTransformer)) {
    m.h.ln1_g = fill("extractor.enc.ln1.gain", {d}, T(1));
    m.h.ln1_b = fill("extractor.enc.ln1.shift", {d}, T(0));
    dense("extractor.enc.attn.q", d, d, &m.h.wq, &m.h.bq);
    m.h.wk = glorot("extractor.enc.attn.k.w", {d, d}, d, d);
    dense("extractor.enc.attn.v", d, d, &m.h.wv, &m.h.bv);
    dense("extractor.enc.attn.out", d, d, &m.h.wo, &m.h.bo);
    m.h.ln2_g = fill("extractor.enc.ln2.gain", {d}, T(1));
    m.h.ln2_b = fill("extractor.enc.ln2.shift", {d}, T(0));
    dense("extractor.enc.ffn.1", d, 2 * d, &m.h.ffn1_w, &m.h.ffn1_b);
    dense("extractor.enc.ffn.2", 2 * d, d, &m.h.ffn2_w, &m.h.ffn2_b);
    m.pos_enc = sinusoidal_encoding<T>(cfg.L, d);
  }
  if (!cfg.has(Ablation::NoGrn)) {
    dense("extractor.grn.in", d, d, &m.h.grn_w1, &m.h.grn_b1);
    dense("extractor.grn.value", d, d, &m.h.grn_wv, &m.h.grn_bv);
    dense("extractor.grn.gate", d, d, &m.h.grn_wg, &m.h.grn_bg);
    m.h.grn_ln_g = fill("extractor.grn.ln.gain", {d}, T(1));
    m.h.grn_ln_b = fill("extractor.grn.ln.shift", {d}, T(0));
  }
  dense("extractor.proj", d, d, &m.h.proj_w, &m.h.proj_b);

  if (cfg.classifier()) {
    dense("fc1", d, dim, &m.h.fc1_w, &m.h.fc1_b);
    dense("aux", dim, cfg.K, &m.h.aux_w, &m.h.aux_b);
    if (cfg.confidnet()) {
      dense("confidnet.fc1", dim, confid_hidden, &m.h.conf1_w, &m.h.conf1_b);
      dense("confidnet.fc2", confid_hidden, 1, &m.h.conf2_w, &m.h.conf2_b);
    }
    dense("fc2", dim, cfg.T * cfg.K, &m.h.fc2_w, &m.h.fc2_b);
  }
  if (cfg.relative()) {
    // One relative output per (horizon step, candidate pattern); the loss
    // supervises the true pattern's component and inference reads the
    // predicted pattern's component. Without the classifier the head
    // regresses raw targets directly (one output per step, linear).
    dense("fc3", d, cfg.classifier() ? cfg.T * cfg.K : cfg.T, &m.h.fc3_w, &m.h.fc3_b);
    // With the classifier present each head unit passes a ReLU whose target
    // lives in [0,1]. A random direction can start a unit dead for every
    // sample (g carries a large sample-independent component), so the head
    // starts at the exact codomain midpoint instead: W=0, b=0.5.
    if (cfg.classifier()) {
      std::fill(m.params[static_cast<size_t>(m.h.fc3_w)].value.data.begin(),
                m.params[static_cast<size_t>(m.h.fc3_w)].value.data.end(), T(0));
      std::fill(m.params[static_cast<size_t>(m.h.fc3_b)].value.data.begin(),
                m.params[static_cast<size_t>(m.h.fc3_b)].value.data.end(), T(0.5));
    }
  }
  return m;
}

template <typename T>
ForwardVars<T> PPGFModel<T>::forward(const Bound<T>& b, const TensorT<T>& x, const ForwardOverrides<T>& ov) const {
  using namespace nn;
  if (x.rank() != 3 || x.dim(1) != cfg.L || x.dim(2) != cfg.D)
    fail(Errc::ShapeMismatch, "input " + shape_str(x) + ", expected (B," + str(cfg.L) + "," + str(cfg.D) + ")");
  Tape<T>& tape = *b.tape;
  const int B = x.dim(0);
  const int d = cfg.model_dim;

  ForwardVars<T> f;
  f.B = B;
  f.has_classifier = cfg.classifier();
  f.has_confidnet = cfg.confidnet();
  f.has_relative = cfg.relative();

  Var<T> x3 = tape.constant(x);
  int chan = cfg.D;
  if (!cfg.has(Ablation::NoConv)) {
    x3 = conv1d(x3, b.at(h.conv_w));
    chan = cfg.conv_channels;
  }
  Var<T> cur = reshape(x3, {B * cfg.L, chan});
  cur = add_row(matmul(cur, b.at(h.embed_w)), b.at(h.embed_b));
  if (!cfg.has(Ablation::NoTransformer)) {
    cur = reshape(add_time_const(reshape(cur, {B, cfg.L, d}), pos_enc), {B * cfg.L, d});
    EncoderParams<T> ep{b.at(h.ln1_g), b.at(h.ln1_b), b.at(h.wq),     b.at(h.bq),     b.at(h.wk),
                        b.at(h.wv),    b.at(h.bv),    b.at(h.wo),     b.at(h.bo),     b.at(h.ln2_g),  b.at(h.ln2_b),
                        b.at(h.ffn1_w), b.at(h.ffn1_b), b.at(h.ffn2_w), b.at(h.ffn2_b)};
    cur = attention_encoder(cur, ep, B, cfg.L, cfg.heads);
  }
  if (!cfg.has(Ablation::NoGrn)) {
    GrnParams<T> gp{b.at(h.grn_w1), b.at(h.grn_b1), b.at(h.grn_wv), b.at(h.grn_bv),
                    b.at(h.grn_wg), b.at(h.grn_bg), b.at(h.grn_ln_g), b.at(h.grn_ln_b)};
    cur = grn(cur, gp);
  }
  Var<T> pooled = mean_pool_time(reshape(cur, {B, cfg.L, d}));
  f.g = add_row(matmul(pooled, b.at(h.proj_w)), b.at(h.proj_b));

  if (cfg.classifier()) {
    f.feat = add_row(matmul(f.g, b.at(h.fc1_w)), b.at(h.fc1_b));
    f.aux_logits = add_row(matmul(f.feat, b.at(h.aux_w)), b.at(h.aux_b));
    f.p_aux = softmax_rows(f.aux_logits);
    if (cfg.confidnet()) {
      Var<T> c1 = elu(add_row(matmul(f.feat, b.at(h.conf1_w)), b.at(h.conf1_b)));
      f.c_hat = sigmoid(add_row(matmul(c1, b.at(h.conf2_w)), b.at(h.conf2_b)));
      Var<T> gate;
      if (ov.fixed_gate)
        gate = tape.constant(*ov.fixed_gate);
      else
        gate = cfg.detach_confidence_gate ? detach(f.c_hat) : f.c_hat;
      f.feat_gated = mul_col(f.feat, gate);
    } else {
      f.c_hat = tape.constant(TensorT<T>::full({B, 1}, T(1)));
      f.feat_gated = f.feat;  // gating disabled: identical feature, bit-exact
    }
    f.logits_final = add_row(matmul(f.feat_gated, b.at(h.fc2_w)), b.at(h.fc2_b));
  }
  if (cfg.relative()) {
    Var<T> head = add_row(matmul(f.g, b.at(h.fc3_w)), b.at(h.fc3_b));
    // With the classifier present the head is a ReLU-floored relative grid;
    // without it the head regresses the raw target directly and stays linear.
    f.delta_hat = cfg.classifier() ? relu(head) : head;
  }
  return f;
}

template <typename T>
LossVars<T> PPGFModel<T>::losses(const Bound<T>& b, const ForwardVars<T>& f, const LabelBatch<T>& lab,
                                 const TensorT<T>* fixed_c_star) const {
  using namespace nn;
  Tape<T>& tape = *b.tape;
  const int B = f.B;
  LossVars<T> out;
  Var<T> zero = tape.constant(TensorT<T>::scalar(T(0)));
  out.conf = zero;
  out.cls = zero;
  out.reg = zero;

  if (f.has_classifier) {
    if (static_cast<int>(lab.k_flat.size()) != B * cfg.T || static_cast<int>(lab.k_first.size()) != B)
      fail(Errc::ShapeMismatch, "label batch size");
    Var<T> ce_final = cross_entropy_logits(reshape(f.logits_final, {B * cfg.T, cfg.K}), lab.k_flat);
    Var<T> ce_aux = cross_entropy_logits(f.aux_logits, lab.k_first);
    const T w = static_cast<T>(cfg.aux_ce_weight);
    out.cls = wsum<T>({ce_final, ce_aux}, {T(1) / (T(1) + w), w / (T(1) + w)});
    if (f.has_confidnet) {
      TensorT<T> cstar({B, 1});
      if (fixed_c_star) {
        cstar = *fixed_c_star;
      } else {
        const auto& paux = f.p_aux.value();
        for (int i = 0; i < B; ++i)
          cstar.data[static_cast<size_t>(i)] = paux.data[static_cast<size_t>(i) * cfg.K + lab.k_first[static_cast<size_t>(i)]];
      }
      out.conf = mse(f.c_hat, tape.constant(std::move(cstar)));
    }
  }
  if (f.has_relative) {
    if (f.has_classifier) {
      // supervise the true pattern's component of the relative grid
      Var<T> grid = reshape(f.delta_hat, {B * cfg.T, cfg.K});
      Var<T> picked = take_index(grid, lab.k_flat);
      TensorT<T> dy_col({B * cfg.T, 1}, lab.dy.data);
      out.reg = mse(picked, tape.constant(std::move(dy_col)));
    } else {
      out.reg = mse(f.delta_hat, tape.constant(lab.y_raw));
    }
  }
  out.total = wsum<T>({out.conf, out.cls, out.reg},
                      {static_cast<T>(cfg.lambda1), static_cast<T>(cfg.lambda2), static_cast<T>(cfg.lambda3)});
  return out;
}

template <typename T>
InferResult<T> PPGFModel<T>::infer(const GroupingScheme& scheme, const TensorT<T>& x) const {
  nn::Tape<T> tape;
  Bound<T> b = bind(tape, false);
  ForwardVars<T> f = forward(b, x);
  InferResult<T> out;
  out.B = f.B;
  out.T_steps = cfg.T;
  if (f.has_classifier) {
    if (scheme.K != cfg.K) fail(Errc::SchemeMismatch, "scheme K=" + str(scheme.K) + " vs model K=" + str(cfg.K));
    const auto& logits = f.logits_final.value();
    out.k_hat.resize(static_cast<size_t>(f.B) * cfg.T);
    for (int i = 0; i < f.B; ++i) {
      for (int t = 0; t < cfg.T; ++t) {
        const T* row = logits.ptr() + (static_cast<int64_t>(i) * cfg.T + t) * cfg.K;
        int best = 0;  // ties break toward the lower class index
        for (int j = 1; j < cfg.K; ++j)
          if (row[j] > row[best]) best = j;
        out.k_hat[static_cast<size_t>(i) * cfg.T + t] = best + 1;
      }
    }
    const auto& paux = f.p_aux.value();
    out.k_aux.resize(static_cast<size_t>(f.B));
    for (int i = 0; i < f.B; ++i) {
      const T* row = paux.ptr() + static_cast<int64_t>(i) * cfg.K;
      int best = 0;
      for (int j = 1; j < cfg.K; ++j)
        if (row[j] > row[best]) best = j;
      out.k_aux[static_cast<size_t>(i)] = best + 1;
    }
    const auto& ch = f.c_hat.value();
    out.c_hat.assign(ch.data.begin(), ch.data.end());
  }
  if (f.has_relative) {
    const auto& dh = f.delta_hat.value();
    if (f.has_classifier) {
      // read the predicted pattern's relative component, then reconstruct
      out.delta.resize(static_cast<size_t>(f.B) * cfg.T);
      out.y_hat.resize(out.delta.size());
      for (int i = 0; i < f.B; ++i) {
        for (int t = 0; t < cfg.T; ++t) {
          const size_t flat = static_cast<size_t>(i) * cfg.T + t;
          const int khat = out.k_hat[flat];
          const double dsel = static_cast<double>(dh.data[(static_cast<size_t>(i) * cfg.T + t) * cfg.K + (khat - 1)]);
          out.delta[flat] = dsel;
          out.y_hat[flat] = decode_absolute(scheme, khat, dsel);
        }
      }
    } else {
      out.delta.assign(dh.data.begin(), dh.data.end());
      out.y_hat.assign(dh.data.begin(), dh.data.end());
    }
  }
  return out;
}

template <typename T>
LossBreakdown PPGFModel<T>::eval_losses(const TensorT<T>& x, const LabelBatch<T>& lab) const {
  nn::Tape<T> tape;
  Bound<T> b = bind(tape, false);
  ForwardVars<T> f = forward(b, x);
  LossVars<T> lv = losses(b, f, lab);
  return breakdown(lv);
}

}  // namespace ppgf
