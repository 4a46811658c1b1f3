#include "persona/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "persona/error.hpp"
#include "text_util.hpp"

namespace persona {

namespace {

constexpr std::array<std::string_view, 7> kRequiredColumns = {"timestamp_ms", "ax", "ay", "az",
                                                              "mx", "my", "mz"};

std::string row_tag(std::size_t row) { return "row " + std::to_string(row); }

double parse_channel(std::string_view field, std::size_t row) {
  double value = 0.0;
  if (!detail::parse_double(field, value)) {
    throw Error(ErrorCode::NonFiniteValue, row_tag(row) + ": cannot parse '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::NonFiniteValue, row_tag(row) + ": '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

void check_label(std::string_view label) {
  if (label.empty()) throw Error(ErrorCode::InvalidSpec, "empty label");
  for (char c : label) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '"') {
      throw Error(ErrorCode::InvalidSpec, "label '" + std::string(label) + "' is not writable verbatim");
    }
  }
}

std::string_view to_string(Split split) noexcept { return split == Split::A ? "A" : "B"; }

void Recording::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw Error(ErrorCode::InvalidSpec, "sample rate must be positive");
  }
  if (labels && labels->size() != frames.size()) {
    throw Error(ErrorCode::LengthMismatch, "label count differs from frame count");
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    for (double v : {f.ax, f.ay, f.az, f.mx, f.my, f.mz}) {
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, row_tag(i + 1));
    }
    if (i > 0 && f.timestamp_ms < frames[i - 1].timestamp_ms) {
      throw Error(ErrorCode::TimestampRegression, row_tag(i + 1));
    }
  }
}

Recording read_recording(std::istream& in, std::string subject_id, double sample_rate_hz) {
  Recording rec;
  rec.subject_id = std::move(subject_id);
  rec.sample_rate_hz = sample_rate_hz;

  std::string line;
  if (!std::getline(in, line) || detail::trim(line).empty()) {
    throw Error(ErrorCode::EmptyFile, "no header");
  }
  const auto header = detail::split_csv(detail::trim(line));
  std::array<std::size_t, 7> col{};
  for (std::size_t c = 0; c < kRequiredColumns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), kRequiredColumns[c]);
    if (it == header.end()) throw Error(ErrorCode::MissingColumn, std::string(kRequiredColumns[c]));
    col[c] = static_cast<std::size_t>(it - header.begin());
  }
  const auto label_it = std::find(header.begin(), header.end(), "label");
  const bool has_labels = label_it != header.end();
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());
  std::vector<Label> labels;

  std::size_t row = 0;
  while (std::getline(in, line)) {
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    ++row;
    const auto fields = detail::split_csv(trimmed);
    if (fields.size() < header.size()) {
      throw Error(ErrorCode::MissingColumn, row_tag(row) + ": expected " +
                                                std::to_string(header.size()) + " fields");
    }
    SensorFrame f;
    if (!detail::parse_int64(fields[col[0]], f.timestamp_ms)) {
      throw Error(ErrorCode::NonFiniteValue, row_tag(row) + ": bad timestamp");
    }
    f.ax = parse_channel(fields[col[1]], row);
    f.ay = parse_channel(fields[col[2]], row);
    f.az = parse_channel(fields[col[3]], row);
    f.mx = parse_channel(fields[col[4]], row);
    f.my = parse_channel(fields[col[5]], row);
    f.mz = parse_channel(fields[col[6]], row);
    if (!rec.frames.empty() && f.timestamp_ms < rec.frames.back().timestamp_ms) {
      throw Error(ErrorCode::TimestampRegression, row_tag(row));
    }
    rec.frames.push_back(f);
    if (has_labels) {
      const auto label = fields[label_col];
      if (label.empty()) throw Error(ErrorCode::MissingLabels, row_tag(row));
      labels.emplace_back(label);
    }
  }
  if (rec.frames.empty()) throw Error(ErrorCode::EmptyFile, "no data rows");
  if (has_labels) rec.labels = std::move(labels);
  return rec;
}

Recording load_recording(const std::filesystem::path& path, double sample_rate_hz) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return read_recording(in, path.stem().string(), sample_rate_hz);
}

void write_recording(std::ostream& out, const Recording& rec) {
  out << "timestamp_ms,ax,ay,az,mx,my,mz";
  if (rec.labels) out << ",label";
  out << '\n';
  for (std::size_t i = 0; i < rec.frames.size(); ++i) {
    const auto& f = rec.frames[i];
    out << f.timestamp_ms;
    for (double v : {f.ax, f.ay, f.az, f.mx, f.my, f.mz}) out << ',' << detail::format_double(v);
    if (rec.labels) out << ',' << (*rec.labels)[i];
    out << '\n';
  }
}

void save_recording(const Recording& rec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  write_recording(out, rec);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::pair<Recording, Recording> split_half(const Recording& rec) {
  const std::size_t n = rec.frames.size();
  if (n < 2) throw Error(ErrorCode::TooShort, "split_half needs at least 2 frames");
  const std::size_t first = (n + 1) / 2;
  Recording a{rec.subject_id, rec.sample_rate_hz, {}, std::nullopt};
  Recording b{rec.subject_id, rec.sample_rate_hz, {}, std::nullopt};
  a.frames.assign(rec.frames.begin(), rec.frames.begin() + static_cast<std::ptrdiff_t>(first));
  b.frames.assign(rec.frames.begin() + static_cast<std::ptrdiff_t>(first), rec.frames.end());
  if (rec.labels) {
    const auto& l = *rec.labels;
    a.labels = std::vector<Label>(l.begin(), l.begin() + static_cast<std::ptrdiff_t>(first));
    b.labels = std::vector<Label>(l.begin() + static_cast<std::ptrdiff_t>(first), l.end());
  }
  return {std::move(a), std::move(b)};
}

// --- Manifest ------------------------------------------------------------

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadManifest, e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::BadManifest, "expected a JSON array");

  DatasetManifest manifest;
  std::set<std::pair<std::string, std::string>> seen;
  const auto base = path.parent_path();
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("subject") || !item.contains("path")) {
      throw Error(ErrorCode::BadManifest, "entry needs 'subject' and 'path'");
    }
    ManifestEntry entry;
    try {
      entry.subject = item.at("subject").get<std::string>();
      entry.path = item.at("path").get<std::string>();
      std::string split_tag;
      if (item.contains("split") && !item.at("split").is_null()) {
        split_tag = item.at("split").get<std::string>();
        if (split_tag == "A") entry.split = Split::A;
        else if (split_tag == "B") entry.split = Split::B;
        else throw Error(ErrorCode::BadManifest, "split must be \"A\" or \"B\", got '" + split_tag + "'");
      }
      if (!seen.insert({entry.subject, split_tag}).second) {
        throw Error(ErrorCode::BadManifest, "duplicate entry for subject " + entry.subject);
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BadManifest, e.what());
    }
    if (entry.path.is_relative()) entry.path = base / entry.path;
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  nlohmann::json doc = nlohmann::json::array();
  const auto base = path.parent_path();
  for (const auto& e : manifest.entries) {
    nlohmann::json item;
    item["subject"] = e.subject;
    auto p = e.path;
    if (!base.empty() && p.is_absolute()) p = std::filesystem::relative(p, base);
    item["path"] = p.generic_string();
    if (e.split) item["split"] = std::string(to_string(*e.split));
    doc.push_back(std::move(item));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::vector<SubjectData> load_dataset(const DatasetManifest& manifest) {
  std::vector<SubjectData> subjects;
  for (const auto& e : manifest.entries) {
    auto it = std::find_if(subjects.begin(), subjects.end(),
                           [&](const SubjectData& s) { return s.id == e.subject; });
    if (it == subjects.end()) {
      subjects.push_back(SubjectData{e.subject, std::nullopt, std::nullopt});
      it = std::prev(subjects.end());
    }
    auto rec = load_recording(e.path);
    rec.subject_id = e.subject;
    if (!e.split) {
      // Unsplit recording: derive both halves.
      auto [a, b] = split_half(rec);
      it->a = std::move(a);
      it->b = std::move(b);
    } else if (*e.split == Split::A) {
      it->a = std::move(rec);
    } else {
      it->b = std::move(rec);
    }
  }
  return subjects;
}

// --- Synthetic data ------------------------------------------------------

std::vector<ActivityProfile> default_activity_profiles() {
  // name, accel f, accel amp, accel noise, magnet f, magnet amp, magnet noise
  return {
      {"walking", 1.9, 3.0, 0.6, 0.9, 9.0, 1.0},
      {"running", 2.6, 5.0, 0.9, 1.3, 16.0, 1.5},
      {"cycling", 1.4, 2.0, 0.5, 0.35, 4.0, 0.8},
      {"driving", 0.8, 0.9, 0.35, 0.15, 14.0, 2.5},
      {"idling", 0.3, 0.4, 0.2, 0.05, 1.0, 0.4},
  };
}

void SyntheticSpec::validate() const {
  if (subjects < 1) throw Error(ErrorCode::InvalidSpec, "subjects must be >= 1");
  if (activities.size() < 2) throw Error(ErrorCode::InvalidSpec, "need at least two activities");
  if (!(duration_s > 0.0)) throw Error(ErrorCode::InvalidSpec, "duration must be positive");
  if (!(sample_rate_hz > 0.0) || std::lround(sample_rate_hz) < 8) {
    throw Error(ErrorCode::InvalidSpec, "sample rate must give at least 8 samples per second");
  }
  if (!(amplitude_spread >= 0.0 && amplitude_spread < 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "amplitude_spread must be in [0, 1)");
  }
  if (!(frequency_jitter >= 0.0 && frequency_jitter < 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "frequency_jitter must be in [0, 1)");
  }
  if (!subject_multipliers.empty() &&
      subject_multipliers.size() != static_cast<std::size_t>(subjects)) {
    throw Error(ErrorCode::InvalidSpec, "subject_multipliers needs one entry per subject");
  }
  if (!subject_freq_jitters.empty() &&
      subject_freq_jitters.size() != static_cast<std::size_t>(subjects)) {
    throw Error(ErrorCode::InvalidSpec, "subject_freq_jitters needs one entry per subject");
  }
  for (double m : subject_multipliers) {
    if (!(m > 0.0)) throw Error(ErrorCode::InvalidSpec, "subject multipliers must be positive");
  }
  std::set<std::pair<double, double>> signatures;
  std::set<Label> names;
  for (const auto& a : activities) {
    check_label(a.name);
    if (!names.insert(a.name).second) throw Error(ErrorCode::InvalidSpec, "duplicate activity " + a.name);
    if (!signatures.insert({a.accel_freq_hz, a.accel_amplitude}).second) {
      throw Error(ErrorCode::InvalidSpec, "activities need distinct (frequency, amplitude) pairs");
    }
    if (!(a.accel_freq_hz > 0.0) || !(a.magnet_freq_hz > 0.0) || a.accel_amplitude < 0.0 ||
        a.magnet_amplitude < 0.0 || a.accel_noise < 0.0 || a.magnet_noise < 0.0) {
      throw Error(ErrorCode::InvalidSpec, "invalid profile for " + a.name);
    }
  }
}

namespace {

/// Platform-independent draws on top of mt19937_64 (the std distributions
/// are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  /// Random direction scaled to `length`.
  std::array<double, 3> direction(double length) {
    std::array<double, 3> v{};
    double norm = 0.0;
    do {
      v = {normal(), normal(), normal()};
      norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    } while (norm < 1e-6);
    for (double& c : v) c *= length / norm;
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

constexpr double kGravity = 9.81;
constexpr double kEarthField = 45.0;
constexpr std::array<double, 3> kAccelAxisWeights = {0.8, 0.5, 0.33};
constexpr std::array<double, 3> kMagnetAxisWeights = {0.6, 0.7, 0.4};

}  // namespace

std::vector<TaggedRecording> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const double rate = spec.sample_rate_hz;
  const auto per_pass = static_cast<std::size_t>(std::llround(spec.duration_s / 2.0 * rate));
  if (per_pass == 0) throw Error(ErrorCode::InvalidSpec, "duration too short for the sample rate");
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<TaggedRecording> out;
  for (int s = 0; s < spec.subjects; ++s) {
    double multiplier = rng.uniform(1.0 - spec.amplitude_spread, 1.0 + spec.amplitude_spread);
    double jitter = rng.uniform(-spec.frequency_jitter, spec.frequency_jitter);
    if (!spec.subject_multipliers.empty()) multiplier = spec.subject_multipliers[static_cast<std::size_t>(s)];
    if (!spec.subject_freq_jitters.empty()) jitter = spec.subject_freq_jitters[static_cast<std::size_t>(s)];
    const auto gravity = rng.direction(kGravity);
    const auto earth = rng.direction(kEarthField);

    char id[32];
    std::snprintf(id, sizeof id, "s%02d", s + 1);
    Recording rec;
    rec.subject_id = id;
    rec.sample_rate_hz = rate;
    rec.labels.emplace();
    const std::size_t total = per_pass * spec.activities.size() * 2;
    rec.frames.reserve(total);
    rec.labels->reserve(total);

    // A subject moves the same way every time it does an activity, so the
    // accelerometer phases are fixed per (subject, activity).
    std::vector<std::array<double, 3>> phase(spec.activities.size()), harmonic_phase(spec.activities.size());
    for (std::size_t a = 0; a < spec.activities.size(); ++a) {
      for (int c = 0; c < 3; ++c) {
        phase[a][c] = rng.uniform(0.0, two_pi);
        harmonic_phase[a][c] = rng.uniform(0.0, two_pi);
      }
    }

    std::size_t sample = 0;
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<std::size_t> order(spec.activities.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

      for (std::size_t a : order) {
        const auto& act = spec.activities[a];
        const double f = act.accel_freq_hz * (1.0 + jitter);
        const double amp = act.accel_amplitude * multiplier;
        std::array<double, 3> magnet_phase{};
        for (int c = 0; c < 3; ++c) magnet_phase[c] = rng.uniform(0.0, two_pi);
        for (std::size_t i = 0; i < per_pass; ++i, ++sample) {
          const double t = static_cast<double>(i) / rate;
          std::array<double, 3> acc{}, mag{};
          for (int c = 0; c < 3; ++c) {
            acc[c] = gravity[c] +
                     amp * kAccelAxisWeights[c] *
                         (std::sin(two_pi * f * t + phase[a][c]) +
                          0.3 * std::sin(two_pi * 2.0 * f * t + harmonic_phase[a][c])) +
                     act.accel_noise * multiplier * rng.normal();
            mag[c] = earth[c] +
                     act.magnet_amplitude * kMagnetAxisWeights[c] *
                         std::sin(two_pi * act.magnet_freq_hz * t + magnet_phase[c]) +
                     act.magnet_noise * rng.normal();
          }
          SensorFrame frame;
          frame.timestamp_ms = static_cast<std::int64_t>(
              std::llround(static_cast<double>(sample) * 1000.0 / rate));
          frame.ax = acc[0], frame.ay = acc[1], frame.az = acc[2];
          frame.mx = mag[0], frame.my = mag[1], frame.mz = mag[2];
          rec.frames.push_back(frame);
          rec.labels->push_back(act.name);
        }
      }
    }

    if (spec.split) {
      auto [a, b] = split_half(rec);
      out.push_back({std::move(a), Split::A});
      out.push_back({std::move(b), Split::B});
    } else {
      out.push_back({std::move(rec), std::nullopt});
    }
  }
  return out;
}

std::vector<SubjectData> to_subjects(const std::vector<TaggedRecording>& recordings) {
  std::vector<SubjectData> subjects;
  for (const auto& r : recordings) {
    if (!r.split) throw Error(ErrorCode::MissingSplit, r.recording.subject_id);
    if (subjects.empty() || subjects.back().id != r.recording.subject_id) {
      subjects.push_back(SubjectData{r.recording.subject_id, std::nullopt, std::nullopt});
    }
    (*r.split == Split::A ? subjects.back().a : subjects.back().b) = r.recording;
  }
  return subjects;
}

}  // namespace persona
