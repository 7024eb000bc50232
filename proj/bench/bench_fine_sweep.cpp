// Times one fine sweep with the serial loop and with the OpenMP loop.
//
//   bench_fine_sweep [scheme=la|lb|nl] [h_den] [N] [J] [workers]

#include "chpar/parareal.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>

using namespace chpar;

int main(int argc, char **argv) {
  const std::string scheme = argc > 1 ? argv[1] : "la";
  const int h_den = argc > 2 ? std::atoi(argv[2]) : 64;
  const int N = argc > 3 ? std::atoi(argv[3]) : 20;
  const int J = argc > 4 ? std::atoi(argv[4]) : 200;
  const int workers = argc > 5 ? std::atoi(argv[5]) : omp_get_max_threads();

  Variant v = Variant::PA1;
  if (scheme == "lb")
    v = Variant::PA2;
  else if (scheme == "nl")
    v = Variant::NPA2;
  else if (scheme != "la") {
    std::fprintf(stderr, "unknown scheme %s\n", scheme.c_str());
    return 1;
  }

  const SpatialGrid grid = SpatialGrid::from_denominator(1, h_den);
  const TimePartition part{1.0, N, J};
  PararealEngine engine(make_propagators(v, part, 0.0725, make_operator(grid)), part, workers);

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  Field u0(grid);
  for (auto &x : u0.values())
    x = dist(gen);
  const auto U = engine.coarse_init(u0);

  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  const auto serial = engine.fine_sweep_serial(U);
  const double ts = std::chrono::duration<double>(clock::now() - t0).count();
  t0 = clock::now();
  const auto parallel = engine.fine_sweep(U);
  const double tp = std::chrono::duration<double>(clock::now() - t0).count();

  bool same = true;
  for (std::size_t n = 0; n < serial.size(); ++n)
    same = same && identical(serial[n], parallel[n]);

  std::printf("scheme=%s h=1/%d N=%d J=%d workers=%d\n", scheme.c_str(), h_den, N, J, workers);
  std::printf("serial   %.4f s\n", ts);
  std::printf("parallel %.4f s  speedup %.2fx\n", tp, ts / tp);
  std::printf("results %s\n", same ? "identical" : "DIFFER");
  return same ? 0 : 1;
}
