// Serial reference vs OpenMP kernels.
// Usage: bench [pairs] [dim] [samples] [attributes] [threads]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "attrbias/kernels.hpp"

using namespace attrbias;
using namespace attrbias::kernels;

namespace {

template <typename F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

std::size_t arg(int argc, char** argv, int i, std::size_t fallback) {
  return argc > i ? std::stoull(argv[i]) : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n_pairs = arg(argc, argv, 1, 2'000'000);
  const std::size_t dim = arg(argc, argv, 2, 512);
  const std::size_t n_samples = arg(argc, argv, 3, 100'000);
  const std::size_t n_attr = arg(argc, argv, 4, 47);
#ifdef _OPENMP
  if (argc > 5) omp_set_num_threads(static_cast<int>(arg(argc, argv, 5, 1)));
  const int threads = omp_get_max_threads();
#else
  const int threads = 1;
#endif

  std::mt19937_64 rng(1);
  std::normal_distribution<float> nd;
  const std::size_t n_emb = 20'000;
  std::vector<float> emb(n_emb * dim);
  for (auto& v : emb) v = nd(rng);
  std::vector<Pair> pairs(n_pairs);
  std::uniform_int_distribution<std::uint32_t> pick(0, n_emb - 1);
  for (auto& p : pairs) p = {pick(rng), pick(rng)};
  std::vector<double> ser(n_pairs), par(n_pairs);

  const double t_ser = best_of(3, [&] { score_pairs_serial(emb, dim, pairs, ser); });
  const double t_par = best_of(3, [&] { score_pairs(emb, dim, pairs, par); });
  std::printf("score_pairs        pairs=%zu dim=%zu threads=%d serial=%.4fs omp=%.4fs speedup=%.2fx equal=%s\n",
              n_pairs, dim, threads, t_ser, t_par, t_ser / t_par, ser == par ? "yes" : "no");

  std::vector<std::vector<Label>> cols(n_attr, std::vector<Label>(n_samples));
  PackedLabels packed(n_attr, n_samples);
  for (std::size_t a = 0; a < n_attr; ++a) {
    for (std::size_t s = 0; s < n_samples; ++s) {
      cols[a][s] = static_cast<Label>(static_cast<int>(rng() % 3) - 1);
      packed.set(a, s, cols[a][s]);
    }
  }
  std::vector<Contingency> c_ser, c_par;
  const double u_ser = best_of(3, [&] { c_ser = contingency_tables_serial(cols); });
  const double u_par = best_of(3, [&] { c_par = contingency_tables(packed); });
  std::printf("contingency_tables samples=%zu attributes=%zu threads=%d serial=%.4fs omp=%.4fs speedup=%.2fx equal=%s\n",
              n_samples, n_attr, threads, u_ser, u_par, u_ser / u_par, c_ser == c_par ? "yes" : "no");
  return ser == par && c_ser == c_par ? 0 : 1;
}
