#include "rffrc/grid_search.hpp"

#include <algorithm>
#include <chrono>

#include "rffrc/errors.hpp"

namespace rffrc {

namespace {

struct Enumerated {
  GridCandidate candidate;
  std::size_t sigma_rank = 0;  // position in the user's sigma list
};

/// Canonical candidate order implementing the tie-break policy:
/// smaller m, then smaller k, then larger lambda, then the sigma
/// listed earlier.  Scanning candidates in this order and keeping the
/// first strict improvement makes the winner independent of how the
/// k/m/lambda lists were permuted.
bool canonical_before(const Enumerated& a, const Enumerated& b) {
  if (a.candidate.m != b.candidate.m) return a.candidate.m < b.candidate.m;
  if (a.candidate.k != b.candidate.k) return a.candidate.k < b.candidate.k;
  if (a.candidate.lambda != b.candidate.lambda) {
    return a.candidate.lambda > b.candidate.lambda;
  }
  return a.sigma_rank < b.sigma_rank;
}

}  // namespace

GridSearchResult grid_search(const TimeSeries& series,
                             const std::vector<int>& ks,
                             const std::vector<int>& ms,
                             const std::vector<double>& lambdas,
                             const std::vector<double>& sigmas,
                             const GridSearchOptions& options) {
  if (ks.empty() || ms.empty() || lambdas.empty() || sigmas.empty()) {
    throw config_error("grid_search: every hyperparameter list needs at "
                       "least one entry");
  }

  std::vector<Enumerated> candidates;
  candidates.reserve(ks.size() * ms.size() * lambdas.size() * sigmas.size());
  for (int k : ks) {
    for (int m : ms) {
      for (double lambda : lambdas) {
        for (std::size_t s = 0; s < sigmas.size(); ++s) {
          candidates.push_back(
              Enumerated{GridCandidate{k, m, lambda, sigmas[s]}, s});
        }
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), canonical_before);

  const ChronologicalSplit split =
      chronological_split(series.values, options.train_frac, options.val_frac,
                          options.swap_validation_test);
  TimeSeries train_series;
  train_series.dt = series.dt;
  train_series.channel_names = series.channel_names;
  train_series.values = split.train;

  GridSearchResult result;
  bool have_best = false;
  std::size_t candidate_index = 0;
  for (const Enumerated& entry : candidates) {
    ForecasterConfig config;
    config.k = entry.candidate.k;
    config.n_features = entry.candidate.m;
    config.lambda = entry.candidate.lambda;
    config.sigma = entry.candidate.sigma;
    config.observed = options.observed;
    config.target = options.target;
    config.scaling = options.scaling;
    config.seed = options.seed_mode == GridSeedMode::shared
                      ? options.seed
                      : options.seed + 0x9E3779B97F4A7C15ull *
                                           (candidate_index + 1);
    ++candidate_index;

    const auto start = std::chrono::steady_clock::now();
    const Forecaster model = Forecaster::train(train_series, config);

    const auto score_segment = [&](const Eigen::MatrixXd& segment) {
      const Eigen::MatrixXd pred = model.predict_one_step(segment);
      const TrainingPairs pairs = make_training_pairs(
          segment, config.k, model.config().observed, model.config().target);
      return mean_nrmse(pred, pairs.targets, options.norm);
    };

    GridRow row;
    row.candidate = entry.candidate;
    row.seed = config.seed;
    row.train_nrmse = model.training_nrmse();
    row.validation_nrmse = score_segment(split.validation);
    row.test_nrmse = score_segment(split.test);
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    result.rows.push_back(row);

    if (!have_best || row.validation_nrmse < result.best_validation_nrmse) {
      have_best = true;
      result.best = entry.candidate;
      result.best_validation_nrmse = row.validation_nrmse;
    }
  }
  return result;
}

}  // namespace rffrc
