// Compares the serial reference kernels against the OpenMP defaults on
// training-sized shapes and verifies bit-identical outputs while timing.

#include <chrono>
#include <cstring>
#include <iostream>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ppgf/kernels.hpp"
#include "ppgf/rng.hpp"

using namespace ppgf;

namespace {

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::vector<float> random_vec(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return v;
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e30;
  for (int i = 0; i < reps; ++i) {
    const double t0 = now_s();
    f();
    best = std::min(best, now_s() - t0);
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
  std::printf("%-28s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx   %s\n", name, serial_s * 1e3,
              parallel_s * 1e3, serial_s / parallel_s, identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; parallel kernels run serially\n");
#endif
  const int reps = 5;

  {  // dense layers at training batch size
    const int M = 1024, K = 256, N = 256;
    auto a = random_vec(static_cast<size_t>(M) * K, 1);
    auto b = random_vec(static_cast<size_t>(K) * N, 2);
    std::vector<float> y1(static_cast<size_t>(M) * N), y2(y1.size());
    const double ts = time_best_of(reps, [&] { kern::serial::matmul_nn(a.data(), b.data(), y1.data(), M, K, N); });
    const double tp = time_best_of(reps, [&] { kern::matmul_nn(a.data(), b.data(), y2.data(), M, K, N); });
    report("matmul 1024x256x256", ts, tp, std::memcmp(y1.data(), y2.data(), y1.size() * 4) == 0);
  }
  {  // convolution front end
    const int B = 64, L = 128, D = 8, C = 32, W = 5;
    auto x = random_vec(static_cast<size_t>(B) * L * D, 3);
    auto w = random_vec(static_cast<size_t>(C) * W * D, 4);
    std::vector<float> y1(static_cast<size_t>(B) * L * C), y2(y1.size());
    const double ts = time_best_of(reps, [&] { kern::serial::conv1d_forward(x.data(), w.data(), y1.data(), B, L, D, C, W); });
    const double tp = time_best_of(reps, [&] { kern::conv1d_forward(x.data(), w.data(), y2.data(), B, L, D, C, W); });
    report("conv1d 64x128x8 -> 32ch w5", ts, tp, std::memcmp(y1.data(), y2.data(), y1.size() * 4) == 0);
  }
  {  // attention core
    const int B = 32, L = 64, d = 64, H = 4;
    auto q = random_vec(static_cast<size_t>(B) * L * d, 5);
    auto k = random_vec(static_cast<size_t>(B) * L * d, 6);
    auto v = random_vec(static_cast<size_t>(B) * L * d, 7);
    std::vector<float> y1(static_cast<size_t>(B) * L * d), y2(y1.size());
    std::vector<float> p1(static_cast<size_t>(B) * H * L * L), p2(p1.size());
    const double ts = time_best_of(reps, [&] { kern::serial::mha_forward(q.data(), k.data(), v.data(), y1.data(), p1.data(), B, L, d, H); });
    const double tp = time_best_of(reps, [&] { kern::mha_forward(q.data(), k.data(), v.data(), y2.data(), p2.data(), B, L, d, H); });
    report("attention 32x64 d64 h4", ts, tp, std::memcmp(y1.data(), y2.data(), y1.size() * 4) == 0);
  }
  {  // softmax rows
    const int M = 8192, N = 64;
    auto x = random_vec(static_cast<size_t>(M) * N, 8);
    std::vector<float> y1(x.size()), y2(x.size());
    const double ts = time_best_of(reps, [&] { kern::serial::softmax_rows(x.data(), y1.data(), M, N); });
    const double tp = time_best_of(reps, [&] { kern::softmax_rows(x.data(), y2.data(), M, N); });
    report("softmax 8192x64", ts, tp, std::memcmp(y1.data(), y2.data(), y1.size() * 4) == 0);
  }
  {  // attention backward
    const int B = 32, L = 64, d = 64, H = 4;
    auto q = random_vec(static_cast<size_t>(B) * L * d, 9);
    auto k = random_vec(static_cast<size_t>(B) * L * d, 10);
    auto v = random_vec(static_cast<size_t>(B) * L * d, 11);
    auto dout = random_vec(static_cast<size_t>(B) * L * d, 12);
    std::vector<float> probs(static_cast<size_t>(B) * H * L * L);
    std::vector<float> out(static_cast<size_t>(B) * L * d);
    kern::serial::mha_forward(q.data(), k.data(), v.data(), out.data(), probs.data(), B, L, d, H);
    std::vector<float> dq1(q.size()), dk1(q.size()), dv1(q.size()), dq2(q.size()), dk2(q.size()), dv2(q.size());
    std::vector<float> scratch(static_cast<size_t>(kern::mha_scratch_size(L)));
    const double ts = time_best_of(reps, [&] {
      kern::serial::mha_backward(q.data(), k.data(), v.data(), probs.data(), dout.data(), dq1.data(), dk1.data(),
                                 dv1.data(), scratch.data(), B, L, d, H, false);
    });
    const double tp = time_best_of(reps, [&] {
      kern::mha_backward(q.data(), k.data(), v.data(), probs.data(), dout.data(), dq2.data(), dk2.data(), dv2.data(),
                         scratch.data(), B, L, d, H, false);
    });
    const bool same = std::memcmp(dq1.data(), dq2.data(), dq1.size() * 4) == 0 &&
                      std::memcmp(dk1.data(), dk2.data(), dk1.size() * 4) == 0 &&
                      std::memcmp(dv1.data(), dv2.data(), dv1.size() * 4) == 0;
    report("attention backward", ts, tp, same);
  }
  return 0;
}
