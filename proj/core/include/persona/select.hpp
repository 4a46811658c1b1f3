#pragma once

#include <cstddef>
#include <vector>

#include "persona/classify.hpp"

namespace persona {

struct SelectionResult {
  std::vector<std::size_t> chosen;
  /// Holdout score after each accepted feature; strictly increasing.
  std::vector<double> score_trace;
  double final_score = 0.0;
};

struct SfsOptions {
  std::size_t cap = 15;
  double min_gain = 1e-4;
  FitOptions fit;  // feature_indices is ignored
};

/// Sequential forward selection. Each round fits `kind` on `train` with
/// every unchosen feature added in turn, scores it by class-wise accuracy on
/// `holdout`, and keeps the best candidate if it beats the current score by
/// more than min_gain (ties go to the lowest feature index).
SelectionResult sfs(const TrainingSet& train, const TrainingSet& holdout, Kind kind,
                    const SfsOptions& opts = {});

}  // namespace persona
