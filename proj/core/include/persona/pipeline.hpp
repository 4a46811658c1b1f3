#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "persona/classify.hpp"
#include "persona/features.hpp"
#include "persona/select.hpp"

namespace persona {

/// Two-of-three majority vote over the last three raw window labels.
///
/// A label seen at least twice among the last min(3, pushed) labels wins.
/// Three distinct labels hold the previous output; before three labels have
/// been pushed and without a majority the newest label is returned.
class MajoritySmoother {
 public:
  const Label& push(const Label& label);

  const std::optional<Label>& last_output() const noexcept { return last_output_; }
  std::size_t pushed() const noexcept { return pushed_; }

 private:
  std::array<Label, 3> ring_;
  std::size_t pushed_ = 0;
  std::optional<Label> last_output_;
};

enum class Phase { Labeling = 0, Ready = 1, Personal = 2 };

std::string_view to_string(Phase phase) noexcept;

struct PersonalizerConfig {
  /// Buffered windows each fusion-model label needs before the personal
  /// model is trained.
  std::size_t min_per_label = 50;
  /// Keep a window for training only if the fusion posterior of its
  /// smoothed label reaches this value.
  std::optional<double> confidence_gate;
  /// Majority-vote the fusion model's raw labels.
  bool smooth_labels = true;
  /// Majority-vote the personal model's raw labels.
  bool smooth_personal = true;
  /// Run SFS over the 19 accelerometer features when training the personal
  /// model; otherwise all 19 are used.
  bool use_sfs = false;
  SfsOptions sfs;
  FitOptions fit;
};

/// Output of one fusion-model labeling step.
struct LabeledWindow {
  Label raw;
  Label smoothed;
  std::vector<double> accel_features;  // accel19
  bool kept = false;                   // passed the confidence gate
};

/// Classifies aligned accel/magnet windows with the sensor-fusion model and
/// smooths the result. Shared by the streaming and batch labeling paths.
class FusionLabeler {
 public:
  FusionLabeler(std::shared_ptr<const DiscriminantModel> fusion_model,
                std::optional<double> confidence_gate, bool smooth = true);

  LabeledWindow label(const Window& accel_w, const Window& magnet_w);

  const DiscriminantModel& model() const noexcept { return *model_; }

 private:
  std::shared_ptr<const DiscriminantModel> model_;
  std::optional<double> gate_;
  bool smooth_;
  MajoritySmoother smoother_;
};

struct StreamStep {
  std::size_t start_index = 0;
  Label raw;
  Label smoothed;
  /// Phase after this window was processed.
  Phase phase = Phase::Labeling;
};

/// Trains the accel19 user-dependent model from pseudo-labeled data.
DiscriminantModel fit_personal_model(const TrainingSet& pseudo, Kind kind,
                                     const PersonalizerConfig& cfg);

/// Streaming personalization state machine.
///
///   Labeling  fusion model labels each window; (accel19, smoothed label)
///             pairs are buffered. Once every label of the fusion alphabet has
///             min_per_label buffered windows the personal model is fitted;
///             on success the phase becomes Ready, on fit failure collection
///             continues.
///   Ready     the next window switches recognition to the personal model.
///   Personal  accel19 features only; magnetometer input is ignored.
class Personalizer {
 public:
  Personalizer(std::shared_ptr<const DiscriminantModel> fusion_model, PersonalizerConfig cfg = {});

  StreamStep push(const Window& accel_w, const Window& magnet_w);

  Phase phase() const noexcept { return phase_; }
  const std::map<Label, std::size_t>& counts() const noexcept { return counts_; }
  /// Present exactly when phase() is Personal.
  const std::optional<DiscriminantModel>& personal_model() const noexcept { return personal_; }
  /// Buffered pseudo-labeled accel19 windows.
  TrainingSet buffer() const;

 private:
  bool thresholds_met() const;

  std::shared_ptr<const DiscriminantModel> fusion_;
  PersonalizerConfig cfg_;
  FusionLabeler labeler_;
  Phase phase_ = Phase::Labeling;
  std::vector<std::vector<double>> buffer_x_;
  std::vector<Label> buffer_y_;
  std::map<Label, std::size_t> counts_;
  std::optional<DiscriminantModel> pending_;  // fitted, not yet in use
  std::optional<DiscriminantModel> personal_;
  MajoritySmoother personal_smoother_;
};

/// Batch form of the Labeling phase over a whole recording: the returned
/// set equals the buffer a Personalizer would collect from the same windows.
TrainingSet pseudo_label_recording(const DiscriminantModel& fusion_model, const Recording& rec,
                                   const PersonalizerConfig& cfg = {},
                                   const ExtractionOptions& opts = {});

/// `start_index,raw_label,smoothed_label,phase`
void write_event_log(std::ostream& out, std::span<const StreamStep> steps);

}  // namespace persona
