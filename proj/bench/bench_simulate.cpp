// Serial reference vs OpenMP kernel for simulate_columns.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "mrelay/sim.hpp"

int main(int argc, char** argv) {
  namespace chrono = std::chrono;
  using namespace mrelay;
  const std::uint64_t rounds = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1000000;
  const ScenarioParams params{1.0, 1.0, 0.05, 0.0, 0.0};

  for (Strategy strategy : {Strategy::SmServeAll, Strategy::ScLatestAtExpiry}) {
    SimConfig cfg;
    cfg.rounds = rounds;
    cfg.seed = 42;

    auto t0 = chrono::steady_clock::now();
    const auto serial = sim::simulate_columns_serial(params, strategy, cfg);
    auto t1 = chrono::steady_clock::now();
    const auto parallel = sim::simulate_columns(params, strategy, cfg);
    auto t2 = chrono::steady_clock::now();

    const bool same = serial.m == parallel.m && serial.t2 == parallel.t2;
    const auto ms = [](auto d) { return chrono::duration_cast<chrono::milliseconds>(d).count(); };
    std::printf("%s rounds=%llu serial=%lldms openmp(%d threads)=%lldms identical=%s\n",
                std::string(to_string(strategy)).c_str(),
                static_cast<unsigned long long>(rounds), static_cast<long long>(ms(t1 - t0)),
                omp_get_max_threads(), static_cast<long long>(ms(t2 - t1)),
                same ? "yes" : "NO");
  }
  return 0;
}
