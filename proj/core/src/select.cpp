#include "persona/select.hpp"

#include <algorithm>
#include <limits>

#include "persona/error.hpp"
#include "persona/eval.hpp"

namespace persona {

SelectionResult sfs(const TrainingSet& train, const TrainingSet& holdout, Kind kind, const SfsOptions& opts) {
  train.validate();
  holdout.validate();
  if (train.dims() == 0) throw Error(ErrorCode::EmptyFeatureSet, "no candidate features");
  if (train.dims() != holdout.dims()) {
    throw Error(ErrorCode::DimensionMismatch, "train and holdout feature counts differ");
  }
  if (opts.cap < 1) throw Error(ErrorCode::InvalidSpec, "cap must be at least 1");
  if (holdout.size() == 0) throw Error(ErrorCode::Empty, "empty holdout set");

  // Holdout truth as indices into the training alphabet; labels the model
  // cannot produce still count as classes of their own.
  const auto alphabet = train.alphabet();
  std::vector<Label> extended = alphabet;
  std::vector<std::size_t> truth;
  truth.reserve(holdout.size());
  for (const auto& y : holdout.y) {
    auto it = std::find(extended.begin(), extended.end(), y);
    if (it == extended.end()) it = extended.insert(extended.end(), y);
    truth.push_back(static_cast<std::size_t>(it - extended.begin()));
  }

  SelectionResult result;
  std::vector<bool> taken(train.dims(), false);
  const std::size_t limit = std::min(opts.cap, train.dims());
  double current = 0.0;

  while (result.chosen.size() < limit && current < 1.0) {
    double best_score = -std::numeric_limits<double>::infinity();
    std::size_t best_feature = 0;
    for (std::size_t f = 0; f < train.dims(); ++f) {
      if (taken[f]) continue;
      FitOptions fo = opts.fit;
      fo.feature_indices = result.chosen;
      fo.feature_indices.push_back(f);
      const auto model = fit(kind, train, fo);
      const std::vector<Eigen::Index> cols(fo.feature_indices.begin(), fo.feature_indices.end());
      // Model labels equal the training alphabet, so argmax indices line up
      // with `extended`.
      const auto pred = argmax_rows(model.scores_rows(holdout.x(Eigen::all, cols)));
      const double score = class_wise_accuracy(pred, truth);
      if (score > best_score) {
        best_score = score;
        best_feature = f;
      }
    }
    if (!(best_score - current > opts.min_gain)) break;
    taken[best_feature] = true;
    result.chosen.push_back(best_feature);
    result.score_trace.push_back(best_score);
    current = best_score;
  }
  result.final_score = current;
  return result;
}

}  // namespace persona
