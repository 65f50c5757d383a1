#include "lnoise/dynamics.hpp"
#include "lnoise/replicas.hpp"

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <iostream>

using namespace lnoise;

int main(int argc, char** argv) {
  const std::size_t replicas = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 16;
  const long steps = argc > 2 ? std::strtol(argv[2], nullptr, 10) : 20000;
  GeneratedInstance gi = generate_gaussian(40, 100, 4, 3);
  const Vec theta0 = draw_theta0(100, 3);
  SimulateOptions opt;
  opt.num_steps = steps;
  opt.record_every = 0;
  opt.record_noise = false;
  auto run = [&](std::size_t r) {
    NoiseConfig cfg = NoiseConfig::make(0.1, 1e-3, 40, stream_seed(3, r));
    return simulate(theta0, gi.problem, cfg, Algorithm::LNGD, opt).theta_final;
  };
  auto time = [&](bool parallel) {
    const auto t0 = std::chrono::steady_clock::now();
    auto res = map_replicas(replicas, parallel, run);
    return std::make_pair(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), res);
  };
  auto [ts, serial] = time(false);
  auto [tp, par] = time(true);
  bool same = true;
  for (std::size_t r = 0; r < replicas; ++r) same = same && serial[r] == par[r];
  std::cout << "threads=" << omp_get_max_threads() << " replicas=" << replicas << " steps=" << steps << '\n'
            << "serial_seconds=" << ts << "\nparallel_seconds=" << tp << "\nspeedup=" << ts / tp
            << "\nidentical=" << (same ? "yes" : "no") << '\n';
  return same ? 0 : 1;
}
