#include "qode/batch_ops.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace qode {

int worker_count() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<FilteredSignals> build_filtered_batch_serial(
    const std::vector<Trajectory>& trajs, const BasisSet& basis, double sigma) {
  std::vector<FilteredSignals> out(trajs.size());
  for (std::size_t j = 0; j < trajs.size(); ++j)
    out[j] = build_filtered(trajs[j], basis, sigma);
  return out;
}

std::vector<FilteredSignals> build_filtered_batch(
    const std::vector<Trajectory>& trajs, const BasisSet& basis, double sigma) {
  std::vector<FilteredSignals> out(trajs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t j = 0; j < trajs.size(); ++j)
    out[j] = build_filtered(trajs[j], basis, sigma);
  return out;
}

Vec constraint_values_serial(const Vec& theta, const TrainingBatch& batch) {
  Vec out(batch.size());
  for (int j = 0; j < batch.size(); ++j)
    out[j] = constraint_value_single(theta, batch.trajectories[j],
                                     batch.signals[j], batch.basis,
                                     batch.strategy);
  return out;
}

Vec constraint_values(const Vec& theta, const TrainingBatch& batch) {
  Vec out(batch.size());
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < batch.size(); ++j)
    out[j] = constraint_value_single(theta, batch.trajectories[j],
                                     batch.signals[j], batch.basis,
                                     batch.strategy);
  return out;
}

}  // namespace qode
