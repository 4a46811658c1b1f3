#include "persona/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "persona/error.hpp"

namespace persona {

namespace {

template <typename T>
double class_wise_accuracy_impl(std::span<const T> pred, std::span<const T> truth) {
  if (pred.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(pred.size()) + " predictions for " +
                                               std::to_string(truth.size()) + " labels");
  }
  if (truth.empty()) throw Error(ErrorCode::Empty, "no labels to score");
  std::map<T, std::pair<std::size_t, std::size_t>> per_class;  // correct, total
  for (std::size_t i = 0; i < truth.size(); ++i) {
    auto& [correct, total] = per_class[truth[i]];
    ++total;
    if (pred[i] == truth[i]) ++correct;
  }
  double sum = 0.0;
  for (const auto& [label, ct] : per_class) {
    sum += static_cast<double>(ct.first) / static_cast<double>(ct.second);
  }
  return sum / static_cast<double>(per_class.size());
}

}  // namespace

TrainingSet fused_training_set(const Recording& rec, const ExtractionOptions& opts) {
  const auto m = extract_features(rec, Layout::Fused56, opts);
  TrainingSet ts;
  ts.x.resize(static_cast<Eigen::Index>(m.rows.size()), static_cast<Eigen::Index>(kFusedFeatureCount));
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    for (std::size_t c = 0; c < kFusedFeatureCount; ++c) {
      ts.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m.rows[r][c];
    }
  }
  ts.y = m.labels;
  ts.origin.assign(ts.y.size(), rec.subject_id);
  return ts;
}

DiscriminantModel train_independent_model(const TrainingSet& train, const TrainingSet& holdout, Kind kind,
                                          const SfsOptions& sfs_opts) {
  const auto sel = sfs(train, holdout, kind, sfs_opts);
  if (sel.chosen.empty()) throw Error(ErrorCode::EmptyFeatureSet, "SFS selected no features");
  FitOptions fo = sfs_opts.fit;
  fo.feature_indices = sel.chosen;
  return fit(kind, train, fo);
}

namespace {

TrainingSet accel_columns(const TrainingSet& fused) {
  TrainingSet ts;
  ts.x = fused.x.leftCols(static_cast<Eigen::Index>(kTimeFeatureCount));
  ts.y = fused.y;
  ts.origin = fused.origin;
  return ts;
}

std::vector<Label> smooth_sequence(const std::vector<Label>& raw) {
  MajoritySmoother s;
  std::vector<Label> out;
  out.reserve(raw.size());
  for (const auto& l : raw) out.push_back(s.push(l));
  return out;
}

std::size_t count_origin(const TrainingSet& ts, const std::string& subject, bool equal) {
  return static_cast<std::size_t>(std::count_if(ts.origin.begin(), ts.origin.end(), [&](const std::string& o) {
    return (o == subject) == equal;
  }));
}

/// Drops labels with fewer rows than a classifier of `kind` needs.
TrainingSet drop_sparse_labels(const TrainingSet& ts, Kind kind, std::size_t dims) {
  const std::size_t need = kind == Kind::Qda ? dims + 1 : 2;
  std::map<Label, std::size_t> counts;
  for (const auto& y : ts.y) ++counts[y];
  std::vector<bool> keep(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) keep[i] = counts[ts.y[i]] >= need;
  return ts.rows_where(keep);
}

MethodResult score_method(const DiscriminantModel& model, const Eigen::MatrixXd& x,
                          const std::vector<Label>& truth, const std::vector<Label>& alphabet,
                          bool smoothing) {
  auto pred = predict_rows(model, x);
  if (smoothing) pred = smooth_sequence(pred);
  MethodResult r;
  r.accuracy = class_wise_accuracy(pred, truth);
  r.confusion = confusion_matrix(pred, truth, alphabet);
  r.features = model.feature_indices();
  return r;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", round1(100.0 * fraction));
  return buf;
}

std::string percent_value(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", round1(pct));
  return buf;
}

}  // namespace

double class_wise_accuracy(std::span<const Label> pred, std::span<const Label> truth) {
  return class_wise_accuracy_impl(pred, truth);
}

double class_wise_accuracy(std::span<const std::size_t> pred, std::span<const std::size_t> truth) {
  return class_wise_accuracy_impl(pred, truth);
}

double improvement(double proposed, double traditional) {
  if (traditional == 0.0) throw Error(ErrorCode::DivisionByZero, "traditional accuracy is zero");
  return 100.0 * (proposed - traditional) / traditional;
}

double round1(double value) { return std::round(value * 10.0) / 10.0; }

ConfusionMatrix confusion_matrix(std::span<const Label> pred, std::span<const Label> truth,
                                 std::vector<Label> alphabet) {
  if (pred.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "confusion inputs");
  ConfusionMatrix cm;
  cm.alphabet = std::move(alphabet);
  cm.counts.assign(cm.alphabet.size(), std::vector<std::size_t>(cm.alphabet.size(), 0));
  const auto index = [&](const Label& l) {
    const auto it = std::find(cm.alphabet.begin(), cm.alphabet.end(), l);
    if (it == cm.alphabet.end()) throw Error(ErrorCode::InvalidSpec, "label '" + l + "' outside alphabet");
    return static_cast<std::size_t>(it - cm.alphabet.begin());
  };
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[index(truth[i])][index(pred[i])];
  return cm;
}

void EvalConfig::validate() const {
  if (kinds.empty()) throw Error(ErrorCode::InvalidSpec, "at least one classifier kind is required");
  if (personal.confidence_gate && !(*personal.confidence_gate >= 0.0 && *personal.confidence_gate <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "confidence gate must be in [0, 1]");
  }
}

EvalReport run_loso(const std::vector<SubjectData>& subjects, const EvalConfig& cfg) {
  cfg.validate();
  if (subjects.size() < 3) {
    throw Error(ErrorCode::InsufficientSubjects, std::to_string(subjects.size()) + " subjects, need 3");
  }
  for (const auto& s : subjects) {
    if (!s.a) throw Error(ErrorCode::MissingSplit, "subject " + s.id + " has no split A");
    if (!s.b) throw Error(ErrorCode::MissingSplit, "subject " + s.id + " has no split B");
    if (!s.a->labels || !s.b->labels) throw Error(ErrorCode::MissingLabels, "subject " + s.id);
  }

  std::vector<TrainingSet> half_a, half_b;
  std::vector<Label> alphabet;
  for (const auto& s : subjects) {
    Recording a = *s.a, b = *s.b;
    a.subject_id = b.subject_id = s.id;
    half_a.push_back(fused_training_set(a, cfg.extraction));
    half_b.push_back(fused_training_set(b, cfg.extraction));
    for (const auto* ts : {&half_a.back(), &half_b.back()}) {
      for (const auto& l : ts->alphabet()) {
        if (std::find(alphabet.begin(), alphabet.end(), l) == alphabet.end()) alphabet.push_back(l);
      }
    }
  }
  std::sort(alphabet.begin(), alphabet.end());

  EvalReport report;
  report.seed = cfg.seed;
  for (const auto& s : subjects) report.subjects.push_back(s.id);

  for (Kind kind : cfg.kinds) {
    ClassifierReport cr;
    cr.kind = kind;
    for (std::size_t v = 0; v < subjects.size(); ++v) {
      const auto& vid = subjects[v].id;
      std::vector<TrainingSet> train_parts, holdout_parts;
      for (std::size_t s = 0; s < subjects.size(); ++s) {
        if (s == v) continue;
        train_parts.push_back(half_a[s]);
        holdout_parts.push_back(half_b[s]);
      }
      const auto train56 = concat(train_parts);
      const auto holdout56 = concat(holdout_parts);
      const auto train19 = accel_columns(train56);
      const auto holdout19 = accel_columns(holdout56);

      FoldAudit audit;
      audit.validation_subject = vid;
      audit.kind = kind;
      audit.independent_training_rows = train56.size() + holdout56.size();
      for (const auto* ts : {&train56, &holdout56, &train19, &holdout19}) {
        audit.validation_rows_in_independent_models += count_origin(*ts, vid, true);
      }

      const auto fusion = train_independent_model(train56, holdout56, kind, cfg.sfs);
      const auto traditional = train_independent_model(train19, holdout19, kind, cfg.sfs);

      auto pseudo = pseudo_label_recording(fusion, *subjects[v].a, cfg.personal, cfg.extraction);
      pseudo.origin.assign(pseudo.size(), vid);
      pseudo = drop_sparse_labels(pseudo, kind, kTimeFeatureCount);
      audit.pseudo_labeled_rows = pseudo.size();
      audit.foreign_rows_in_personal_model = count_origin(pseudo, vid, false);
      const auto personal = fit_personal_model(pseudo, kind, cfg.personal);

      const auto& test = half_b[v];
      const Eigen::MatrixXd test19 = test.x.leftCols(static_cast<Eigen::Index>(kTimeFeatureCount));
      SubjectResult sr;
      sr.subject = vid;
      sr.fusion = score_method(fusion, test.x, test.y, alphabet, cfg.smoothing);
      sr.traditional = score_method(traditional, test19, test.y, alphabet, cfg.smoothing);
      sr.proposed = score_method(personal, test19, test.y, alphabet, cfg.smoothing);
      sr.improvement_pct = improvement(100.0 * sr.proposed.accuracy, 100.0 * sr.traditional.accuracy);
      cr.subjects.push_back(std::move(sr));
      report.audit.push_back(std::move(audit));
    }

    const auto n = static_cast<double>(cr.subjects.size());
    for (const auto& sr : cr.subjects) {
      cr.avg_proposed += sr.proposed.accuracy;
      cr.avg_traditional += sr.traditional.accuracy;
      cr.avg_fusion += sr.fusion.accuracy;
    }
    cr.avg_proposed /= n;
    cr.avg_traditional /= n;
    cr.avg_fusion /= n;
    cr.avg_improvement_pct = improvement(100.0 * cr.avg_proposed, 100.0 * cr.avg_traditional);
    report.classifiers.push_back(std::move(cr));
  }
  return report;
}

EvalReport run_loso(const DatasetManifest& manifest, const EvalConfig& cfg) {
  return run_loso(load_dataset(manifest), cfg);
}

void write_report_table(std::ostream& out, const EvalReport& report) {
  const auto row = [&](const std::string& head, const std::vector<std::string>& cells) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-14s", head.c_str());
    out << buf;
    for (const auto& c : cells) {
      std::snprintf(buf, sizeof buf, "%9s", c.c_str());
      out << buf;
    }
    out << '\n';
  };
  std::vector<std::string> header = report.subjects;
  header.push_back("Avg");

  out << "Activity recognition rates of user-dependent models (class-wise accuracy)\n";
  row("Accuracy", header);
  for (const auto& cr : report.classifiers) {
    std::string name(to_string(cr.kind));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    out << name << '\n';
    std::vector<std::string> proposed, traditional, gain;
    for (const auto& sr : cr.subjects) {
      proposed.push_back(percent(sr.proposed.accuracy));
      traditional.push_back(percent(sr.traditional.accuracy));
      gain.push_back(percent_value(sr.improvement_pct));
    }
    proposed.push_back(percent(cr.avg_proposed));
    traditional.push_back(percent(cr.avg_traditional));
    gain.push_back(percent_value(cr.avg_improvement_pct));
    row("proposed", proposed);
    row("traditional", traditional);
    row("improvement", gain);
  }

  out << "\nDetection rates of the sensor fusion-based user-independent classifier\n";
  row("Accuracy", header);
  for (const auto& cr : report.classifiers) {
    std::string name(to_string(cr.kind));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    std::vector<std::string> cells;
    for (const auto& sr : cr.subjects) cells.push_back(percent(sr.fusion.accuracy));
    cells.push_back(percent(cr.avg_fusion));
    row(name, cells);
  }
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "subject,classifier,method,accuracy\n";
  char buf[32];
  const auto line = [&](const std::string& subject, Kind kind, std::string_view method, double acc) {
    std::snprintf(buf, sizeof buf, "%.6f", acc);
    out << subject << ',' << to_string(kind) << ',' << method << ',' << buf << '\n';
  };
  for (const auto& cr : report.classifiers) {
    for (const auto& sr : cr.subjects) {
      line(sr.subject, cr.kind, "proposed", sr.proposed.accuracy);
      line(sr.subject, cr.kind, "traditional", sr.traditional.accuracy);
      line(sr.subject, cr.kind, "fusion", sr.fusion.accuracy);
    }
    line("Avg", cr.kind, "proposed", cr.avg_proposed);
    line("Avg", cr.kind, "traditional", cr.avg_traditional);
    line("Avg", cr.kind, "fusion", cr.avg_fusion);
  }
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm) {
  out << "truth";
  for (const auto& l : cm.alphabet) out << ',' << l;
  out << '\n';
  for (std::size_t r = 0; r < cm.alphabet.size(); ++r) {
    out << cm.alphabet[r];
    for (auto c : cm.counts[r]) out << ',' << c;
    out << '\n';
  }
}

}  // namespace persona
