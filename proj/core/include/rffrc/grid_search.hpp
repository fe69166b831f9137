#pragma once

#include <cstdint>
#include <vector>

#include "rffrc/forecaster.hpp"
#include "rffrc/metrics.hpp"
#include "rffrc/time_series.hpp"

namespace rffrc {

struct GridCandidate {
  int k = 0;
  int m = 0;
  double lambda = 0.0;
  double sigma = 0.0;
};

struct GridRow {
  GridCandidate candidate;
  std::uint64_t seed = 0;
  double train_nrmse = 0.0;
  double validation_nrmse = 0.0;
  double test_nrmse = 0.0;
  double wall_ms = 0.0;
};

struct GridSearchResult {
  GridCandidate best;
  double best_validation_nrmse = 0.0;
  std::vector<GridRow> rows;  ///< one row per candidate (and seed)
};

enum class GridSeedMode {
  shared,         ///< every candidate uses the same base seed
  per_candidate,  ///< candidate index is mixed into the seed
};

/// Options shared by all candidates: split fractions, channel lists,
/// scaling, the base seed, and the metric normalization.
struct GridSearchOptions {
  double train_frac = 0.6;
  double val_frac = 0.2;
  bool swap_validation_test = false;
  std::vector<int> observed;
  std::vector<int> target;
  ScalingMode scaling = ScalingMode::minmax01;
  std::uint64_t seed = 1;
  GridSeedMode seed_mode = GridSeedMode::shared;
  NrmseNormalization norm = NrmseNormalization::population_std;
};

/// Exhaustive search over the cross product of the four hyperparameter
/// lists, scored by mean-channel one-step NRMSE on the validation
/// segment.  Ties are broken toward the smaller m, then the smaller k,
/// then the larger lambda, then the sigma that appears earlier in
/// `sigmas`; the winner is therefore independent of the enumeration
/// order of the k/m/lambda lists.
GridSearchResult grid_search(const TimeSeries& series,
                             const std::vector<int>& ks,
                             const std::vector<int>& ms,
                             const std::vector<double>& lambdas,
                             const std::vector<double>& sigmas,
                             const GridSearchOptions& options = {});

}  // namespace rffrc
