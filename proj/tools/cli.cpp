#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "persona/dataio.hpp"
#include "persona/error.hpp"
#include "persona/eval.hpp"
#include "persona/features.hpp"
#include "persona/pipeline.hpp"

namespace persona::cli {

namespace {

namespace fs = std::filesystem;

/// Options shared by the commands that extract features.
struct ExtractionFlags {
  std::string magnitude = "sum-of-squares";

  void add(CLI::App* app) {
    app->add_option("--magnitude", magnitude, "Magnitude signal: literal sum of squares or its square root")
        ->check(CLI::IsMember({"sum-of-squares", "norm"}))
        ->capture_default_str();
  }

  ExtractionOptions options() const {
    ExtractionOptions o;
    o.magnitude_mode = magnitude == "norm" ? MagnitudeMode::Norm : MagnitudeMode::SumOfSquares;
    return o;
  }
};

struct ModelFlags {
  std::size_t sfs_cap = 15;
  double min_gain = 1e-4;
  double shrinkage = 1e-3;
  bool empirical_priors = false;

  void add(CLI::App* app) {
    app->add_option("--sfs-cap", sfs_cap, "Maximum number of features SFS may select")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--min-gain", min_gain, "Minimum holdout gain for SFS to accept a feature")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--shrinkage", shrinkage, "Covariance shrinkage toward a scaled identity")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app->add_flag("--empirical-priors", empirical_priors, "Use label frequencies as class priors");
  }

  SfsOptions sfs() const {
    SfsOptions o;
    o.cap = sfs_cap;
    o.min_gain = min_gain;
    o.fit = fit();
    return o;
  }

  FitOptions fit() const {
    FitOptions f;
    f.shrinkage = shrinkage;
    f.priors = empirical_priors ? PriorMode::Empirical : PriorMode::Uniform;
    return f;
  }
};

/// key=value lines; '#' starts a comment; [section] headers are ignored.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ConversionError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    out.emplace_back(trim(line.substr(0, eq)), std::move(value));
  }
  return out;
}

/// Config values fill options the command line left unset (flags win).
void apply_config(CLI::App* app, const std::string& path) {
  for (const auto& [key, value] : read_config_file(path)) {
    CLI::Option* opt = app->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw CLI::ExtrasError("unknown config key '" + key + "'", CLI::ExitCodes::ExtrasError);
    }
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

void echo_config(const CLI::App* app, std::ostream& err) {
  err << "# persona " << app->get_name() << " effective config\n";
  std::istringstream lines(app->config_to_str(true, false));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("config=", 0) == 0) continue;
    err << "#   " << line << '\n';
  }
}

std::vector<Kind> kinds_from(const std::string& classifier) {
  if (classifier == "both") return {Kind::Lda, Kind::Qda};
  return {parse_kind(classifier)};
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  return out;
}

// --- generate ------------------------------------------------------------

struct GenerateCmd {
  std::string out_dir;
  int subjects = 5;
  std::uint64_t seed = 1;
  double duration = 60.0;
  double amplitude_spread = SyntheticSpec{}.amplitude_spread;
  double frequency_jitter = SyntheticSpec{}.frequency_jitter;

  void add(CLI::App* app) {
    app->add_option("--out", out_dir, "Output directory")->required();
    app->add_option("--subjects", subjects, "Number of subjects")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_option("--duration", duration, "Seconds per activity per subject")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--amplitude-spread", amplitude_spread, "Per-subject amplitude multiplier spread")
        ->check(CLI::Range(0.0, 0.99))
        ->capture_default_str();
    app->add_option("--frequency-jitter", frequency_jitter, "Per-subject relative frequency jitter")
        ->check(CLI::Range(0.0, 0.99))
        ->capture_default_str();
  }

  int run(std::ostream& out) const {
    SyntheticSpec spec;
    spec.subjects = subjects;
    spec.seed = seed;
    spec.duration_s = duration;
    spec.amplitude_spread = amplitude_spread;
    spec.frequency_jitter = frequency_jitter;
    spec.split = true;
    const auto recs = generate_synthetic(spec);

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    DatasetManifest manifest;
    for (const auto& r : recs) {
      const auto name = r.recording.subject_id + "_" + std::string(to_string(*r.split)) + ".csv";
      save_recording(r.recording, dir / name);
      manifest.entries.push_back({r.recording.subject_id, name, r.split});
    }
    save_manifest(manifest, dir / "manifest.json");
    out << "wrote " << recs.size() << " recordings and " << (dir / "manifest.json").string() << '\n';
    return kExitOk;
  }
};

// --- features ------------------------------------------------------------

struct FeaturesCmd {
  std::string in_path;
  std::string layout = "accel19";
  std::string out_path;
  double rate = 40.0;
  ExtractionFlags extraction;

  void add(CLI::App* app) {
    app->add_option("--in", in_path, "Recording CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--layout", layout, "Feature layout")
        ->check(CLI::IsMember({"accel19", "fused56"}))
        ->capture_default_str();
    app->add_option("--out", out_path, "Feature matrix CSV")->required();
    app->add_option("--rate", rate, "Sample rate in Hz")->check(CLI::PositiveNumber)->capture_default_str();
    extraction.add(app);
  }

  int run(std::ostream& out) const {
    const auto rec = load_recording(in_path, rate);
    const auto m = extract_features(rec, layout == "fused56" ? Layout::Fused56 : Layout::Accel19,
                                    extraction.options());
    auto file = open_output(out_path);
    write_feature_csv(file, m);
    out << "wrote " << m.rows.size() << " windows x " << m.names.size() << " features to " << out_path << '\n';
    return kExitOk;
  }
};

// --- evaluate ------------------------------------------------------------

struct EvaluateCmd {
  std::string manifest;
  std::string classifier = "both";
  std::uint64_t seed = 1;
  int subjects = 5;
  double duration = 60.0;
  bool no_smoothing = false;
  double confidence_gate = -1.0;
  bool personal_sfs = false;
  std::string csv_path;
  std::string confusion_dir;
  bool audit = false;
  ModelFlags model;
  ExtractionFlags extraction;

  void add(CLI::App* app) {
    app->add_option("--manifest", manifest, "Dataset manifest (JSON); synthetic data when omitted");
    app->add_option("--classifier", classifier, "Classifier")
        ->check(CLI::IsMember({"lda", "qda", "both"}))
        ->capture_default_str();
    app->add_option("--seed", seed, "Seed for the synthetic dataset")->capture_default_str();
    app->add_option("--subjects", subjects, "Synthetic subjects (without --manifest)")
        ->check(CLI::Range(3, 1000))
        ->capture_default_str();
    app->add_option("--duration", duration, "Synthetic seconds per activity (without --manifest)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_flag("--no-smoothing", no_smoothing, "Disable three-window majority voting");
    app->add_option("--confidence-gate", confidence_gate, "Minimum fusion posterior for pseudo-labels")
        ->check(CLI::Range(0.0, 1.0));
    app->add_flag("--personal-sfs", personal_sfs, "Run SFS when training the personal model");
    app->add_option("--csv", csv_path, "Write subject,classifier,method,accuracy CSV here");
    app->add_option("--confusion-dir", confusion_dir, "Write per-fold confusion matrices here");
    app->add_flag("--audit", audit, "Print leakage audit counters to stderr");
    model.add(app);
    extraction.add(app);
  }

  int run(std::ostream& out, std::ostream& err) const {
    EvalConfig cfg;
    cfg.kinds = kinds_from(classifier);
    cfg.sfs = model.sfs();
    cfg.smoothing = !no_smoothing;
    cfg.personal.fit = model.fit();
    cfg.personal.sfs = model.sfs();
    cfg.personal.use_sfs = personal_sfs;
    cfg.personal.smooth_labels = !no_smoothing;
    if (confidence_gate >= 0.0) cfg.personal.confidence_gate = confidence_gate;
    cfg.extraction = extraction.options();
    cfg.seed = seed;

    EvalReport report;
    if (!manifest.empty()) {
      report = run_loso(load_manifest(manifest), cfg);
    } else {
      SyntheticSpec spec;
      spec.subjects = subjects;
      spec.duration_s = duration;
      spec.seed = seed;
      report = run_loso(to_subjects(generate_synthetic(spec)), cfg);
    }

    write_report_table(out, report);
    if (!csv_path.empty()) {
      auto file = open_output(csv_path);
      write_report_csv(file, report);
    }
    if (!confusion_dir.empty()) {
      for (const auto& cr : report.classifiers) {
        for (const auto& sr : cr.subjects) {
          for (const auto& [method, result] : {std::pair<std::string_view, const MethodResult*>{"proposed", &sr.proposed},
                                               {"traditional", &sr.traditional},
                                               {"fusion", &sr.fusion}}) {
            auto file = open_output(fs::path(confusion_dir) / ("confusion_" + sr.subject + "_" +
                                                               std::string(to_string(cr.kind)) + "_" +
                                                               std::string(method) + ".csv"));
            write_confusion_csv(file, result->confusion);
          }
        }
      }
    }
    if (audit) {
      for (const auto& a : report.audit) {
        err << "# audit " << a.validation_subject << ' ' << to_string(a.kind)
            << " validation_rows_in_independent_models=" << a.validation_rows_in_independent_models
            << " foreign_rows_in_personal_model=" << a.foreign_rows_in_personal_model
            << " pseudo_labeled_rows=" << a.pseudo_labeled_rows << '\n';
      }
    }
    return kExitOk;
  }
};

// --- stream --------------------------------------------------------------

struct StreamCmd {
  std::string manifest;
  std::string subject;
  std::string classifier = "lda";
  std::string split = "both";
  std::size_t min_per_label = 50;
  double confidence_gate = -1.0;
  bool no_personal_smoothing = false;
  bool personal_sfs = false;
  std::string out_path;
  ModelFlags model;
  ExtractionFlags extraction;

  void add(CLI::App* app) {
    app->add_option("--manifest", manifest, "Dataset manifest (JSON)")->required();
    app->add_option("--subject", subject, "Subject whose recording is replayed")->required();
    app->add_option("--classifier", classifier, "Classifier")
        ->check(CLI::IsMember({"lda", "qda"}))
        ->capture_default_str();
    app->add_option("--split", split, "Which half of the subject to replay")
        ->check(CLI::IsMember({"A", "B", "both"}))
        ->capture_default_str();
    app->add_option("--min-per-label", min_per_label, "Buffered windows per label before personalization")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--confidence-gate", confidence_gate, "Minimum fusion posterior for pseudo-labels")
        ->check(CLI::Range(0.0, 1.0));
    app->add_flag("--no-personal-smoothing", no_personal_smoothing, "Do not smooth personal-model output");
    app->add_flag("--personal-sfs", personal_sfs, "Run SFS when training the personal model");
    app->add_option("--out", out_path, "Event log path (stdout when omitted)");
    model.add(app);
    extraction.add(app);
  }

  int run(std::ostream& out) const {
    const auto subjects = load_dataset(load_manifest(manifest));
    const auto target = std::find_if(subjects.begin(), subjects.end(),
                                     [&](const SubjectData& s) { return s.id == subject; });
    if (target == subjects.end()) throw Error(ErrorCode::MissingSplit, "subject " + subject + " not in manifest");

    const auto opts = extraction.options();
    std::vector<TrainingSet> train_parts, holdout_parts;
    for (const auto& s : subjects) {
      if (s.id == subject) continue;
      if (!s.a || !s.b) throw Error(ErrorCode::MissingSplit, "subject " + s.id);
      if (!s.a->labels || !s.b->labels) throw Error(ErrorCode::MissingLabels, "subject " + s.id);
      train_parts.push_back(fused_training_set(*s.a, opts));
      holdout_parts.push_back(fused_training_set(*s.b, opts));
    }
    if (train_parts.empty()) throw Error(ErrorCode::InsufficientSubjects, "no other subjects to train on");
    const auto fusion = std::make_shared<const DiscriminantModel>(
        train_independent_model(concat(train_parts), concat(holdout_parts), parse_kind(classifier), model.sfs()));

    PersonalizerConfig pc;
    pc.min_per_label = min_per_label;
    if (confidence_gate >= 0.0) pc.confidence_gate = confidence_gate;
    pc.smooth_personal = !no_personal_smoothing;
    pc.use_sfs = personal_sfs;
    pc.fit = model.fit();
    pc.sfs = model.sfs();
    Personalizer personalizer(fusion, pc);

    std::vector<const Recording*> replay;
    if (split != "B") {
      if (!target->a) throw Error(ErrorCode::MissingSplit, "subject " + subject + " has no split A");
      replay.push_back(&*target->a);
    }
    if (split != "A") {
      if (!target->b) throw Error(ErrorCode::MissingSplit, "subject " + subject + " has no split B");
      replay.push_back(&*target->b);
    }

    std::vector<StreamStep> steps;
    std::size_t offset = 0;
    for (const auto* rec : replay) {
      const auto wr = window_recording(*rec, opts);
      for (std::size_t i = 0; i < wr.accel.size(); ++i) {
        auto step = personalizer.push(wr.accel[i], wr.magnet[i]);
        step.start_index += offset;
        steps.push_back(std::move(step));
      }
      offset += rec->frames.size();
    }

    if (out_path.empty()) {
      write_event_log(out, steps);
    } else {
      auto file = open_output(out_path);
      write_event_log(file, steps);
    }
    return kExitOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Personal activity recognition from sensor-fusion pseudo-labels", "persona"};
  app.require_subcommand(1);

  GenerateCmd generate;
  FeaturesCmd features;
  EvaluateCmd evaluate;
  StreamCmd stream;
  std::string config_path;

  auto* gen_app = app.add_subcommand("generate", "Write a synthetic multi-subject dataset and manifest");
  auto* feat_app = app.add_subcommand("features", "Extract per-window features from a recording");
  auto* eval_app = app.add_subcommand("evaluate", "Leave-one-subject-out comparison of proposed vs traditional");
  auto* stream_app = app.add_subcommand("stream", "Replay a subject through the personalization state machine");
  generate.add(gen_app);
  features.add(feat_app);
  evaluate.add(eval_app);
  stream.add(stream_app);
  for (auto* sub : {gen_app, feat_app, eval_app, stream_app}) {
    sub->add_option("--config", config_path, "key=value file; flags take precedence");
  }

  CLI::App* selected = nullptr;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    selected = app.get_subcommands().front();
    if (!config_path.empty()) apply_config(selected, config_path);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  echo_config(selected, err);
  try {
    if (selected == gen_app) return generate.run(out);
    if (selected == feat_app) return features.run(out);
    if (selected == eval_app) return evaluate.run(out, err);
    return stream.run(out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace persona::cli
