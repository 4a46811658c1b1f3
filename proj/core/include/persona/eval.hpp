#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "persona/dataio.hpp"
#include "persona/pipeline.hpp"

namespace persona {

/// Mean over the activities present in `truth` of the per-activity
/// detection rate.
double class_wise_accuracy(std::span<const Label> pred, std::span<const Label> truth);

/// Same metric on integer class ids.
double class_wise_accuracy(std::span<const std::size_t> pred, std::span<const std::size_t> truth);

/// Relative improvement in percent: 100 * (proposed - traditional) / traditional.
double improvement(double proposed, double traditional);

/// Rounds half away from zero to one decimal, as reported in tables.
double round1(double value);

struct ConfusionMatrix {
  std::vector<Label> alphabet;
  /// counts[truth][pred], indices into alphabet.
  std::vector<std::vector<std::size_t>> counts;
};

/// `alphabet` fixes row/column order; labels outside it are rejected.
ConfusionMatrix confusion_matrix(std::span<const Label> pred, std::span<const Label> truth,
                                 std::vector<Label> alphabet);

/// Fused56 rows of every window of `rec`, labeled by center-sample ground
/// truth and tagged with the recording's subject id.
TrainingSet fused_training_set(const Recording& rec, const ExtractionOptions& opts = {});

/// SFS on (train, holdout) followed by a fit on `train` restricted to the
/// selected features. Throws EmptyFeatureSet if nothing was selected.
DiscriminantModel train_independent_model(const TrainingSet& train, const TrainingSet& holdout, Kind kind,
                                          const SfsOptions& sfs_opts);

struct EvalConfig {
  std::vector<Kind> kinds = {Kind::Lda, Kind::Qda};
  SfsOptions sfs;
  bool smoothing = true;
  PersonalizerConfig personal;
  ExtractionOptions extraction;
  /// Recorded in the report; only synthetic data generation consumes it.
  std::uint64_t seed = 1;

  void validate() const;
};

struct MethodResult {
  double accuracy = 0.0;  // class-wise, in [0, 1]
  ConfusionMatrix confusion;
  std::vector<std::size_t> features;  // selected source-layout indices
};

struct SubjectResult {
  std::string subject;
  MethodResult proposed;     // user-dependent accel19 model on pseudo-labels
  MethodResult traditional;  // user-independent accel19 model
  MethodResult fusion;       // user-independent fused56 model
  double improvement_pct = 0.0;
};

struct ClassifierReport {
  Kind kind = Kind::Lda;
  std::vector<SubjectResult> subjects;
  double avg_proposed = 0.0;
  double avg_traditional = 0.0;
  double avg_fusion = 0.0;
  /// improvement(avg_proposed, avg_traditional), in percent.
  double avg_improvement_pct = 0.0;
};

/// Provenance counters for one (validation subject, classifier) fold.
struct FoldAudit {
  std::string validation_subject;
  Kind kind = Kind::Lda;
  /// Rows from the validation subject in any user-independent training or
  /// SFS scoring set. Must be zero.
  std::size_t validation_rows_in_independent_models = 0;
  /// Rows of other subjects that entered the personal model. Must be zero.
  std::size_t foreign_rows_in_personal_model = 0;
  /// Rows that entered through pseudo-labeling (validation subject's A half).
  std::size_t pseudo_labeled_rows = 0;
  std::size_t independent_training_rows = 0;
};

struct EvalReport {
  std::vector<std::string> subjects;
  std::vector<ClassifierReport> classifiers;
  std::vector<FoldAudit> audit;
  std::uint64_t seed = 1;
};

/// Leave-one-subject-out comparison of the personalized model against the
/// user-independent single-sensor baseline. Per validation subject v and
/// classifier kind:
///   1. fused56 model: SFS + fit on the other subjects' A halves, SFS scored
///      on their B halves;
///   2. traditional accel19 model trained the same way;
///   3. proposed: v's A half pseudo-labeled by (1), accel19 model fitted on
///      those labels;
///   4. all three evaluated on v's B half by class-wise accuracy.
EvalReport run_loso(const std::vector<SubjectData>& subjects, const EvalConfig& cfg);
EvalReport run_loso(const DatasetManifest& manifest, const EvalConfig& cfg);

/// Aligned table: one block per classifier with proposed / traditional /
/// improvement rows, followed by the fusion-model detection rates.
void write_report_table(std::ostream& out, const EvalReport& report);

/// `subject,classifier,method,accuracy` (accuracy as a fraction, 6 decimals).
void write_report_csv(std::ostream& out, const EvalReport& report);

/// `truth,<pred labels...>` rows of counts.
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm);

}  // namespace persona
