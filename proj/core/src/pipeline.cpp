#include "persona/pipeline.hpp"

#include <algorithm>
#include <ostream>

#include "persona/error.hpp"

namespace persona {

const Label& MajoritySmoother::push(const Label& label) {
  ring_[pushed_ % 3] = label;
  ++pushed_;
  const std::size_t held = std::min<std::size_t>(pushed_, 3);

  const Label* winner = nullptr;
  for (std::size_t i = 0; i < held && winner == nullptr; ++i) {
    std::size_t votes = 0;
    for (std::size_t j = 0; j < held; ++j) votes += ring_[j] == ring_[i] ? 1 : 0;
    if (votes >= 2) winner = &ring_[i];
  }
  if (winner != nullptr) {
    last_output_ = *winner;
  } else if (held < 3 || !last_output_) {
    last_output_ = label;
  }
  // Three distinct labels: hold.
  return *last_output_;
}

std::string_view to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::Labeling: return "Labeling";
    case Phase::Ready: return "Ready";
    case Phase::Personal: return "Personal";
  }
  return "Unknown";
}

FusionLabeler::FusionLabeler(std::shared_ptr<const DiscriminantModel> fusion_model,
                             std::optional<double> confidence_gate, bool smooth)
    : model_(std::move(fusion_model)), gate_(confidence_gate), smooth_(smooth) {
  if (!model_) throw Error(ErrorCode::InvalidSpec, "fusion model missing");
  if (model_->source_dim() != kFusedFeatureCount) {
    throw Error(ErrorCode::DimensionMismatch, "fusion model must be trained on the fused56 layout");
  }
}

LabeledWindow FusionLabeler::label(const Window& accel_w, const Window& magnet_w) {
  const auto fused = fused_features(accel_w, magnet_w);
  const Eigen::VectorXd x = model_->project(fused.values);
  const Eigen::VectorXd s = model_->scores(x);
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < s.size(); ++c) {
    if (s[c] > s[best]) best = c;
  }

  LabeledWindow out;
  out.raw = model_->labels()[static_cast<std::size_t>(best)];
  out.smoothed = smooth_ ? smoother_.push(out.raw) : out.raw;
  out.accel_features.assign(fused.values.begin(), fused.values.begin() + kTimeFeatureCount);
  out.kept = true;
  if (gate_) {
    const auto& labels = model_->labels();
    const auto c = static_cast<Eigen::Index>(std::find(labels.begin(), labels.end(), out.smoothed) - labels.begin());
    const Eigen::ArrayXd e = (s.array() - s.maxCoeff()).exp();
    out.kept = e[c] / e.sum() >= *gate_;
  }
  return out;
}

DiscriminantModel fit_personal_model(const TrainingSet& pseudo, Kind kind, const PersonalizerConfig& cfg) {
  if (pseudo.dims() != kTimeFeatureCount) {
    throw Error(ErrorCode::DimensionMismatch, "personal model expects accel19 features");
  }
  FitOptions fo = cfg.fit;
  fo.feature_indices.clear();
  if (cfg.use_sfs) {
    // Alternate blocks of 8 windows between fitting and scoring so both see
    // every activity segment.
    std::vector<bool> fit_rows(pseudo.size());
    for (std::size_t i = 0; i < pseudo.size(); ++i) fit_rows[i] = (i / 8) % 2 == 0;
    std::vector<bool> score_rows(pseudo.size());
    for (std::size_t i = 0; i < pseudo.size(); ++i) score_rows[i] = !fit_rows[i];
    SfsOptions so = cfg.sfs;
    so.fit = cfg.fit;
    const auto sel = sfs(pseudo.rows_where(fit_rows), pseudo.rows_where(score_rows), kind, so);
    if (sel.chosen.empty()) throw Error(ErrorCode::EmptyFeatureSet, "SFS selected no personal features");
    fo.feature_indices = sel.chosen;
  }
  return fit(kind, pseudo, fo);
}

Personalizer::Personalizer(std::shared_ptr<const DiscriminantModel> fusion_model, PersonalizerConfig cfg)
    : fusion_(fusion_model),
      cfg_(std::move(cfg)),
      labeler_(std::move(fusion_model), cfg_.confidence_gate, cfg_.smooth_labels) {
  for (const auto& l : fusion_->labels()) counts_[l] = 0;
}

bool Personalizer::thresholds_met() const {
  return std::all_of(counts_.begin(), counts_.end(),
                     [&](const auto& kv) { return kv.second >= cfg_.min_per_label; });
}

TrainingSet Personalizer::buffer() const {
  TrainingSet ts;
  ts.x.resize(static_cast<Eigen::Index>(buffer_x_.size()), static_cast<Eigen::Index>(kTimeFeatureCount));
  for (std::size_t r = 0; r < buffer_x_.size(); ++r) {
    for (std::size_t c = 0; c < kTimeFeatureCount; ++c) {
      ts.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = buffer_x_[r][c];
    }
  }
  ts.y = buffer_y_;
  return ts;
}

StreamStep Personalizer::push(const Window& accel_w, const Window& magnet_w) {
  StreamStep step;
  step.start_index = accel_w.start_index;

  if (phase_ == Phase::Labeling) {
    auto lw = labeler_.label(accel_w, magnet_w);
    if (lw.kept) {
      buffer_x_.push_back(std::move(lw.accel_features));
      buffer_y_.push_back(lw.smoothed);
      ++counts_[lw.smoothed];
    }
    step.raw = std::move(lw.raw);
    step.smoothed = std::move(lw.smoothed);
    if (thresholds_met()) {
      try {
        pending_ = fit_personal_model(buffer(), fusion_->kind(), cfg_);
        phase_ = Phase::Ready;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientSamples && e.code() != ErrorCode::SingularCovariance &&
            e.code() != ErrorCode::EmptyFeatureSet) {
          throw;
        }
        // Keep collecting; the next window retries.
      }
    }
    step.phase = phase_;
    return step;
  }

  // Ready switches over on this window; Personal stays.
  if (phase_ == Phase::Ready) {
    personal_ = std::move(pending_);
    pending_.reset();
    phase_ = Phase::Personal;
  }
  const auto features = time_features(accel_w);
  const Eigen::VectorXd x = personal_->project(features.values);
  step.raw = predict(*personal_, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  step.smoothed = cfg_.smooth_personal ? personal_smoother_.push(step.raw) : step.raw;
  step.phase = phase_;
  return step;
}

TrainingSet pseudo_label_recording(const DiscriminantModel& fusion_model, const Recording& rec,
                                   const PersonalizerConfig& cfg, const ExtractionOptions& opts) {
  const auto wr = window_recording(rec, opts);
  // Non-owning alias; the labeler does not outlive this call.
  FusionLabeler labeler(std::shared_ptr<const DiscriminantModel>(&fusion_model, [](const DiscriminantModel*) {}),
                        cfg.confidence_gate, cfg.smooth_labels);
  std::vector<std::vector<double>> rows;
  TrainingSet ts;
  for (std::size_t i = 0; i < wr.accel.size(); ++i) {
    auto lw = labeler.label(wr.accel[i], wr.magnet[i]);
    if (!lw.kept) continue;
    rows.push_back(std::move(lw.accel_features));
    ts.y.push_back(std::move(lw.smoothed));
  }
  ts.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kTimeFeatureCount));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < kTimeFeatureCount; ++c) {
      ts.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  ts.origin.assign(ts.y.size(), rec.subject_id);
  return ts;
}

void write_event_log(std::ostream& out, std::span<const StreamStep> steps) {
  out << "start_index,raw_label,smoothed_label,phase\n";
  for (const auto& s : steps) {
    out << s.start_index << ',' << s.raw << ',' << s.smoothed << ',' << to_string(s.phase) << '\n';
  }
}

}  // namespace persona
