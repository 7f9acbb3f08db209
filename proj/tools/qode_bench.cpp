// Benchmark of the batch kernels: serial reference vs the OpenMP versions.
#include <chrono>
#include <cstdio>

#include "qode/batch_ops.hpp"
#include "qode/scenario.hpp"

using Clock = std::chrono::steady_clock;

namespace {

template <class F>
double time_ms(F&& fn, int reps) {
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  int runs = 16;
  int reps = 3;
  if (argc > 1) runs = std::atoi(argv[1]);
  if (argc > 2) reps = std::atoi(argv[2]);

  qode::DispatchScenario sc = qode::default_dispatch_scenario();
  sc.runs = runs;
  sc.grid = qode::TimeGrid::make(sc.model.horizon, 288);
  const qode::GeneratedBatch gen = qode::gen_training_batch(
      sc.model, sc.basis, qode::TrainingMode::Nominal, sc.runs,
      sc.exploration, sc.grid, sc.sigma, 7);

  std::printf("workers: %d, runs: %d, basis dim: %d\n", qode::worker_count(),
              runs, gen.batch.basis.dim);

  const auto& trajs = gen.batch.trajectories;
  const double filt_serial = time_ms(
      [&] { qode::build_filtered_batch_serial(trajs, gen.batch.basis,
                                              sc.sigma); },
      reps);
  const double filt_par = time_ms(
      [&] { qode::build_filtered_batch(trajs, gen.batch.basis, sc.sigma); },
      reps);
  std::printf("filtered-signal build: serial %.1f ms, parallel %.1f ms "
              "(speedup %.2fx)\n",
              filt_serial, filt_par, filt_serial / filt_par);

  const qode::Vec theta = qode::Vec::Zero(gen.batch.basis.dim);
  const double con_serial = time_ms(
      [&] { qode::constraint_values_serial(theta, gen.batch); }, reps);
  const double con_par =
      time_ms([&] { qode::constraint_values(theta, gen.batch); }, reps);
  std::printf("constraint evaluation: serial %.1f ms, parallel %.1f ms "
              "(speedup %.2fx)\n",
              con_serial, con_par, con_serial / con_par);
  return 0;
}
