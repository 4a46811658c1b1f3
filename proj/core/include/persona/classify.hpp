#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "persona/types.hpp"

namespace persona {

enum class Kind { Lda, Qda };
enum class PriorMode { Uniform, Empirical };

std::string_view to_string(Kind kind) noexcept;
Kind parse_kind(std::string_view text);

/// n x d feature matrix with one activity label per row.
struct TrainingSet {
  Eigen::MatrixXd x;
  std::vector<Label> y;
  /// Optional per-row provenance (subject id). Either empty or one entry
  /// per row; used to audit which subjects fed a model.
  std::vector<std::string> origin;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t dims() const noexcept { return static_cast<std::size_t>(x.cols()); }

  /// Sorted distinct labels.
  std::vector<Label> alphabet() const;

  TrainingSet rows_where(const std::vector<bool>& keep) const;

  /// Throws on shape mismatch or non-finite entries.
  void validate() const;
};

/// Row-wise concatenation; all parts must share the column count.
TrainingSet concat(std::span<const TrainingSet> parts);

struct FitOptions {
  /// Covariance shrinkage toward (tr(S)/d) I, in [0, 1].
  double shrinkage = 1e-3;
  PriorMode priors = PriorMode::Uniform;
  /// Columns of the training matrix the model uses; empty means all.
  std::vector<std::size_t> feature_indices;
};

/// Trained Gaussian discriminant classifier (LDA: one pooled covariance,
/// QDA: one covariance per label). Immutable; the Cholesky factors needed for
/// scoring are built on construction.
class DiscriminantModel {
 public:
  DiscriminantModel(Kind kind, std::vector<Label> labels, std::vector<Eigen::VectorXd> means,
                    std::vector<Eigen::MatrixXd> covariances, std::vector<double> priors,
                    double shrinkage, std::vector<std::size_t> feature_indices,
                    std::size_t source_dim);

  Kind kind() const noexcept { return kind_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }
  const std::vector<Eigen::VectorXd>& means() const noexcept { return means_; }
  /// Regularized covariances: one (pooled) for LDA, one per label for QDA.
  const std::vector<Eigen::MatrixXd>& covariances() const noexcept { return covariances_; }
  const std::vector<double>& priors() const noexcept { return priors_; }
  double shrinkage() const noexcept { return shrinkage_; }
  const std::vector<std::size_t>& feature_indices() const noexcept { return feature_indices_; }
  /// Width of the feature layout `feature_indices` point into.
  std::size_t source_dim() const noexcept { return source_dim_; }
  std::size_t dims() const noexcept { return feature_indices_.size(); }

  const Eigen::MatrixXd& covariance_for(std::size_t label_index) const;

  /// Picks the model's features out of a full source-layout vector.
  Eigen::VectorXd project(std::span<const double> full) const;

  /// Per-label discriminant scores for a projected (d-dim) vector.
  Eigen::VectorXd scores(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Scores for every row of a projected n x d matrix (n x labels).
  Eigen::MatrixXd scores_rows(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

  bool operator==(const DiscriminantModel& other) const;

 private:
  Kind kind_;
  std::vector<Label> labels_;
  std::vector<Eigen::VectorXd> means_;
  std::vector<Eigen::MatrixXd> covariances_;
  std::vector<double> priors_;
  double shrinkage_;
  std::vector<std::size_t> feature_indices_;
  std::size_t source_dim_;

  std::vector<Eigen::MatrixXd> chol_lower_;
  std::vector<double> log_dets_;
};

DiscriminantModel fit(Kind kind, const TrainingSet& ts, const FitOptions& opts = {});

/// score_c = -1/2 (x - mu_c)' S_c^-1 (x - mu_c) - 1/2 log det S_c + log prior_c
Eigen::VectorXd discriminant_scores(const DiscriminantModel& model, std::span<const double> x);

/// Argmax score; ties go to the label that comes first in model.labels().
const Label& predict(const DiscriminantModel& model, std::span<const double> x);

/// Softmax of the discriminant scores.
Eigen::VectorXd posterior(const DiscriminantModel& model, std::span<const double> x);

/// Argmax index per row of a score matrix, same tie rule as predict().
std::vector<std::size_t> argmax_rows(const Eigen::MatrixXd& scores);

/// Predictions for every row of a full-width matrix (columns are projected
/// through the model's feature_indices).
std::vector<Label> predict_rows(const DiscriminantModel& model, const Eigen::MatrixXd& full);

}  // namespace persona
