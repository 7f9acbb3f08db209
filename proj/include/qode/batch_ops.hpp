#pragma once

#include "qode/bellman.hpp"

namespace qode {

/// Data-parallel batch kernels. Each has a serial reference used by the test
/// suite and a parallel version (OpenMP when available); outputs are
/// bit-identical because the per-trajectory work is independent.

std::vector<FilteredSignals> build_filtered_batch_serial(
    const std::vector<Trajectory>& trajs, const BasisSet& basis, double sigma);

std::vector<FilteredSignals> build_filtered_batch(
    const std::vector<Trajectory>& trajs, const BasisSet& basis, double sigma);

Vec constraint_values_serial(const Vec& theta, const TrainingBatch& batch);
Vec constraint_values(const Vec& theta, const TrainingBatch& batch);

/// Number of threads the parallel kernels will use.
int worker_count();

}  // namespace qode
