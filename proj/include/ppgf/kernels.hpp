#pragma once

#include <cmath>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ppgf {
namespace kern {

// Compute-heavy inner loops. Every kernel exists twice: a plain serial
// reference under kern::serial and an OpenMP-parallel default at kern::.
// The parallel versions split work by *output element* (or output block),
// and each element is accumulated in the same order as the serial code, so
// results are bit-identical to the reference at any thread count. The
// parity tests and the bench tool rely on that layout.

// Work thresholds below which the OpenMP versions stay serial.
constexpr int64_t kParGrain = 1 << 15;

namespace serial {

// y(M,N) = a(M,K) * b(K,N), += when acc
template <typename T>
void matmul_nn(const T* a, const T* b, T* y, int M, int K, int N, bool acc = false) {
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < N; ++j) {
      T s = acc ? y[static_cast<int64_t>(i) * N + j] : T(0);
      for (int k = 0; k < K; ++k) s += a[static_cast<int64_t>(i) * K + k] * b[static_cast<int64_t>(k) * N + j];
      y[static_cast<int64_t>(i) * N + j] = s;
    }
  }
}

// y(M,N) = a(M,K) * b(N,K)^T
template <typename T>
void matmul_nt(const T* a, const T* b, T* y, int M, int K, int N, bool acc = false) {
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < N; ++j) {
      T s = acc ? y[static_cast<int64_t>(i) * N + j] : T(0);
      for (int k = 0; k < K; ++k) s += a[static_cast<int64_t>(i) * K + k] * b[static_cast<int64_t>(j) * K + k];
      y[static_cast<int64_t>(i) * N + j] = s;
    }
  }
}

// y(M,N) = a(K,M)^T * b(K,N)
template <typename T>
void matmul_tn(const T* a, const T* b, T* y, int M, int K, int N, bool acc = false) {
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < N; ++j) {
      T s = acc ? y[static_cast<int64_t>(i) * N + j] : T(0);
      for (int k = 0; k < K; ++k) s += a[static_cast<int64_t>(k) * M + i] * b[static_cast<int64_t>(k) * N + j];
      y[static_cast<int64_t>(i) * N + j] = s;
    }
  }
}

// Same-padding cross-correlation along time, stride 1, odd width.
// x: B*L*D, w: C*W*D, y: B*L*C
template <typename T>
void conv1d_forward(const T* x, const T* w, T* y, int B, int L, int D, int C, int W) {
  const int P = W / 2;
  for (int b = 0; b < B; ++b) {
    for (int l = 0; l < L; ++l) {
      for (int c = 0; c < C; ++c) {
        T s = T(0);
        for (int t = 0; t < W; ++t) {
          const int m = l + t - P;
          if (m < 0 || m >= L) continue;
          const T* xr = x + (static_cast<int64_t>(b) * L + m) * D;
          const T* wr = w + (static_cast<int64_t>(c) * W + t) * D;
          for (int d = 0; d < D; ++d) s += xr[d] * wr[d];
        }
        y[(static_cast<int64_t>(b) * L + l) * C + c] = s;
      }
    }
  }
}

template <typename T>
void conv1d_backward_input(const T* dy, const T* w, T* dx, int B, int L, int D, int C, int W, bool acc) {
  const int P = W / 2;
  for (int b = 0; b < B; ++b) {
    for (int m = 0; m < L; ++m) {
      for (int d = 0; d < D; ++d) {
        T s = acc ? dx[(static_cast<int64_t>(b) * L + m) * D + d] : T(0);
        for (int t = 0; t < W; ++t) {
          const int l = m + P - t;
          if (l < 0 || l >= L) continue;
          const T* dyr = dy + (static_cast<int64_t>(b) * L + l) * C;
          for (int c = 0; c < C; ++c) s += dyr[c] * w[(static_cast<int64_t>(c) * W + t) * D + d];
        }
        dx[(static_cast<int64_t>(b) * L + m) * D + d] = s;
      }
    }
  }
}

template <typename T>
void conv1d_backward_kernels(const T* x, const T* dy, T* dw, int B, int L, int D, int C, int W, bool acc) {
  const int P = W / 2;
  for (int c = 0; c < C; ++c) {
    for (int t = 0; t < W; ++t) {
      for (int d = 0; d < D; ++d) {
        T s = acc ? dw[(static_cast<int64_t>(c) * W + t) * D + d] : T(0);
        for (int b = 0; b < B; ++b) {
          for (int l = 0; l < L; ++l) {
            const int m = l + t - P;
            if (m < 0 || m >= L) continue;
            s += dy[(static_cast<int64_t>(b) * L + l) * C + c] * x[(static_cast<int64_t>(b) * L + m) * D + d];
          }
        }
        dw[(static_cast<int64_t>(c) * W + t) * D + d] = s;
      }
    }
  }
}

// Row-wise softmax with max subtraction. x, y: M*N.
template <typename T>
void softmax_rows(const T* x, T* y, int M, int N) {
  for (int i = 0; i < M; ++i) {
    const T* xr = x + static_cast<int64_t>(i) * N;
    T* yr = y + static_cast<int64_t>(i) * N;
    T mx = xr[0];
    for (int j = 1; j < N; ++j) mx = xr[j] > mx ? xr[j] : mx;
    T den = T(0);
    for (int j = 0; j < N; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      den += yr[j];
    }
    for (int j = 0; j < N; ++j) yr[j] /= den;
  }
}

// Scaled dot-product attention over H heads of width d/H.
// q,k,v,out: (B*L) x d row-major; probs: B*H*L*L (written).
template <typename T>
void mha_block_forward(const T* q, const T* k, const T* v, T* out, T* probs, int b, int h, int B, int L, int d,
                       int H) {
  (void)B;
  const int dh = d / H;
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(dh));
  const int64_t base = static_cast<int64_t>(b) * L;
  T* pr = probs + ((static_cast<int64_t>(b) * H + h) * L) * L;
  // scores then softmax, row by row
  for (int i = 0; i < L; ++i) {
    const T* qi = q + (base + i) * d + h * dh;
    T* pri = pr + static_cast<int64_t>(i) * L;
    for (int j = 0; j < L; ++j) {
      const T* kj = k + (base + j) * d + h * dh;
      T s = T(0);
      for (int t = 0; t < dh; ++t) s += qi[t] * kj[t];
      pri[j] = s * inv_sqrt;
    }
  }
  softmax_rows(pr, pr, L, L);
  for (int i = 0; i < L; ++i) {
    const T* pri = pr + static_cast<int64_t>(i) * L;
    T* oi = out + (base + i) * d + h * dh;
    for (int t = 0; t < dh; ++t) {
      T s = T(0);
      for (int j = 0; j < L; ++j) s += pri[j] * v[(base + j) * d + h * dh + t];
      oi[t] = s;
    }
  }
}

template <typename T>
void mha_forward(const T* q, const T* k, const T* v, T* out, T* probs, int B, int L, int d, int H) {
  for (int b = 0; b < B; ++b)
    for (int h = 0; h < H; ++h) mha_block_forward(q, k, v, out, probs, b, h, B, L, d, H);
}

// Backward for one (b,h) block; dq/dk/dv slices owned by this block.
template <typename T>
void mha_block_backward(const T* q, const T* k, const T* v, const T* probs, const T* dout, T* dq, T* dk, T* dv,
                        T* scratch, int b, int h, int B, int L, int d, int H, bool acc) {
  (void)B;
  const int dh = d / H;
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(dh));
  const int64_t base = static_cast<int64_t>(b) * L;
  const T* pr = probs + ((static_cast<int64_t>(b) * H + h) * L) * L;
  T* ds = scratch;  // L*L workspace

  // dV[j] = sum_i P[i,j] * dO[i]
  for (int j = 0; j < L; ++j) {
    T* dvj = dv + (base + j) * d + h * dh;
    for (int t = 0; t < dh; ++t) {
      T s = acc ? dvj[t] : T(0);
      for (int i = 0; i < L; ++i) s += pr[static_cast<int64_t>(i) * L + j] * dout[(base + i) * d + h * dh + t];
      dvj[t] = s;
    }
  }
  // dP[i,j] = dO[i] . V[j]; then softmax backward rows -> dS
  for (int i = 0; i < L; ++i) {
    const T* doi = dout + (base + i) * d + h * dh;
    T* dsi = ds + static_cast<int64_t>(i) * L;
    for (int j = 0; j < L; ++j) {
      const T* vj = v + (base + j) * d + h * dh;
      T s = T(0);
      for (int t = 0; t < dh; ++t) s += doi[t] * vj[t];
      dsi[j] = s;
    }
    const T* pri = pr + static_cast<int64_t>(i) * L;
    T dot = T(0);
    for (int j = 0; j < L; ++j) dot += dsi[j] * pri[j];
    for (int j = 0; j < L; ++j) dsi[j] = pri[j] * (dsi[j] - dot) * inv_sqrt;
  }
  // dQ[i] = sum_j dS[i,j] K[j]; dK[j] = sum_i dS[i,j] Q[i]
  for (int i = 0; i < L; ++i) {
    T* dqi = dq + (base + i) * d + h * dh;
    const T* dsi = ds + static_cast<int64_t>(i) * L;
    for (int t = 0; t < dh; ++t) {
      T s = acc ? dqi[t] : T(0);
      for (int j = 0; j < L; ++j) s += dsi[j] * k[(base + j) * d + h * dh + t];
      dqi[t] = s;
    }
  }
  for (int j = 0; j < L; ++j) {
    T* dkj = dk + (base + j) * d + h * dh;
    for (int t = 0; t < dh; ++t) {
      T s = acc ? dkj[t] : T(0);
      for (int i = 0; i < L; ++i) s += ds[static_cast<int64_t>(i) * L + j] * q[(base + i) * d + h * dh + t];
      dkj[t] = s;
    }
  }
}

template <typename T>
void mha_backward(const T* q, const T* k, const T* v, const T* probs, const T* dout, T* dq, T* dk, T* dv,
                  T* scratch, int B, int L, int d, int H, bool acc) {
  for (int b = 0; b < B; ++b)
    for (int h = 0; h < H; ++h)
      mha_block_backward(q, k, v, probs, dout, dq, dk, dv, scratch, b, h, B, L, d, H, acc);
}

}  // namespace serial

// ---- OpenMP-parallel defaults -------------------------------------------

template <typename T>
void matmul_nn(const T* a, const T* b, T* y, int M, int K, int N, bool acc = false) {
  const int64_t work = static_cast<int64_t>(M) * K * N;
#pragma omp parallel for schedule(static) if (work >= kParGrain)
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < N; ++j) {
      T s = acc ? y[static_cast<int64_t>(i) * N + j] : T(0);
      for (int k = 0; k < K; ++k) s += a[static_cast<int64_t>(i) * K + k] * b[static_cast<int64_t>(k) * N + j];
      y[static_cast<int64_t>(i) * N + j] = s;
    }
  }
}

template <typename T>
void matmul_nt(const T* a, const T* b, T* y, int M, int K, int N, bool acc = false) {
  const int64_t work = static_cast<int64_t>(M) * K * N;
#pragma omp parallel for schedule(static) if (work >= kParGrain)
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < N; ++j) {
      T s = acc ? y[static_cast<int64_t>(i) * N + j] : T(0);
      for (int k = 0; k < K; ++k) s += a[static_cast<int64_t>(i) * K + k] * b[static_cast<int64_t>(j) * K + k];
      y[static_cast<int64_t>(i) * N + j] = s;
    }
  }
}

template <typename T>
void matmul_tn(const T* a, const T* b, T* y, int M, int K, int N, bool acc = false) {
  const int64_t work = static_cast<int64_t>(M) * K * N;
#pragma omp parallel for schedule(static) if (work >= kParGrain)
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < N; ++j) {
      T s = acc ? y[static_cast<int64_t>(i) * N + j] : T(0);
      for (int k = 0; k < K; ++k) s += a[static_cast<int64_t>(k) * M + i] * b[static_cast<int64_t>(k) * N + j];
      y[static_cast<int64_t>(i) * N + j] = s;
    }
  }
}

template <typename T>
void conv1d_forward(const T* x, const T* w, T* y, int B, int L, int D, int C, int W) {
  const int P = W / 2;
  const int64_t work = static_cast<int64_t>(B) * L * C * W * D;
#pragma omp parallel for schedule(static) collapse(2) if (work >= kParGrain)
  for (int b = 0; b < B; ++b) {
    for (int l = 0; l < L; ++l) {
      for (int c = 0; c < C; ++c) {
        T s = T(0);
        for (int t = 0; t < W; ++t) {
          const int m = l + t - P;
          if (m < 0 || m >= L) continue;
          const T* xr = x + (static_cast<int64_t>(b) * L + m) * D;
          const T* wr = w + (static_cast<int64_t>(c) * W + t) * D;
          for (int d = 0; d < D; ++d) s += xr[d] * wr[d];
        }
        y[(static_cast<int64_t>(b) * L + l) * C + c] = s;
      }
    }
  }
}

template <typename T>
void conv1d_backward_input(const T* dy, const T* w, T* dx, int B, int L, int D, int C, int W, bool acc) {
  const int P = W / 2;
  const int64_t work = static_cast<int64_t>(B) * L * D * C * W;
#pragma omp parallel for schedule(static) collapse(2) if (work >= kParGrain)
  for (int b = 0; b < B; ++b) {
    for (int m = 0; m < L; ++m) {
      for (int d = 0; d < D; ++d) {
        T s = acc ? dx[(static_cast<int64_t>(b) * L + m) * D + d] : T(0);
        for (int t = 0; t < W; ++t) {
          const int l = m + P - t;
          if (l < 0 || l >= L) continue;
          const T* dyr = dy + (static_cast<int64_t>(b) * L + l) * C;
          for (int c = 0; c < C; ++c) s += dyr[c] * w[(static_cast<int64_t>(c) * W + t) * D + d];
        }
        dx[(static_cast<int64_t>(b) * L + m) * D + d] = s;
      }
    }
  }
}

template <typename T>
void conv1d_backward_kernels(const T* x, const T* dy, T* dw, int B, int L, int D, int C, int W, bool acc) {
  const int P = W / 2;
  const int64_t work = static_cast<int64_t>(B) * L * C * W * D;
#pragma omp parallel for schedule(static) collapse(2) if (work >= kParGrain)
  for (int c = 0; c < C; ++c) {
    for (int t = 0; t < W; ++t) {
      for (int d = 0; d < D; ++d) {
        T s = acc ? dw[(static_cast<int64_t>(c) * W + t) * D + d] : T(0);
        for (int b = 0; b < B; ++b) {
          for (int l = 0; l < L; ++l) {
            const int m = l + t - P;
            if (m < 0 || m >= L) continue;
            s += dy[(static_cast<int64_t>(b) * L + l) * C + c] * x[(static_cast<int64_t>(b) * L + m) * D + d];
          }
        }
        dw[(static_cast<int64_t>(c) * W + t) * D + d] = s;
      }
    }
  }
}

template <typename T>
void softmax_rows(const T* x, T* y, int M, int N) {
  const int64_t work = static_cast<int64_t>(M) * N;
#pragma omp parallel for schedule(static) if (work >= kParGrain)
  for (int i = 0; i < M; ++i) serial::softmax_rows(x + static_cast<int64_t>(i) * N, y + static_cast<int64_t>(i) * N, 1, N);
}

template <typename T>
void mha_forward(const T* q, const T* k, const T* v, T* out, T* probs, int B, int L, int d, int H) {
  const int blocks = B * H;
  const int64_t work = static_cast<int64_t>(blocks) * L * L * (d / H);
#pragma omp parallel for schedule(static) if (work >= kParGrain)
  for (int bh = 0; bh < blocks; ++bh) serial::mha_block_forward(q, k, v, out, probs, bh / H, bh % H, B, L, d, H);
}

// scratch must hold nthreads * L * L elements; size it via mha_scratch_size().
inline int64_t mha_scratch_size(int L) {
  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  return static_cast<int64_t>(threads) * L * L;
}

template <typename T>
void mha_backward(const T* q, const T* k, const T* v, const T* probs, const T* dout, T* dq, T* dk, T* dv,
                  T* scratch, int B, int L, int d, int H, bool acc) {
  const int blocks = B * H;
  const int64_t work = static_cast<int64_t>(blocks) * L * L * (d / H);
#pragma omp parallel for schedule(static) if (work >= kParGrain)
  for (int bh = 0; bh < blocks; ++bh) {
    int tid = 0;
#ifdef _OPENMP
    tid = omp_get_thread_num();
#endif
    serial::mha_block_backward(q, k, v, probs, dout, dq, dk, dv, scratch + static_cast<int64_t>(tid) * L * L,
                               bh / H, bh % H, B, L, d, H, acc);
  }
}

}  // namespace kern
}  // namespace ppgf
