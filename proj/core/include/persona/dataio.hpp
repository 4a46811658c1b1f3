#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "persona/classify.hpp"
#include "persona/types.hpp"

namespace persona {

struct SensorFrame {
  std::int64_t timestamp_ms = 0;
  double ax = 0.0, ay = 0.0, az = 0.0;
  double mx = 0.0, my = 0.0, mz = 0.0;

  bool operator==(const SensorFrame&) const = default;
};

/// One subject's raw tri-axial accelerometer + magnetometer stream.
///
/// Frames are kept in nondecreasing timestamp order. When `labels` is
/// present it holds exactly one activity label per frame.
struct Recording {
  std::string subject_id;
  double sample_rate_hz = 40.0;
  std::vector<SensorFrame> frames;
  std::optional<std::vector<Label>> labels;

  bool operator==(const Recording&) const = default;

  /// Throws Error if any invariant is broken.
  void validate() const;
};

enum class Split { A, B };

std::string_view to_string(Split split) noexcept;

struct ManifestEntry {
  std::string subject;
  std::filesystem::path path;
  std::optional<Split> split;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
};

/// A subject's two halves as used by the leave-one-subject-out protocol.
struct SubjectData {
  std::string id;
  std::optional<Recording> a;
  std::optional<Recording> b;
};

// --- Recording CSV -------------------------------------------------------
// Header: timestamp_ms,ax,ay,az,mx,my,mz[,label]

Recording read_recording(std::istream& in, std::string subject_id, double sample_rate_hz = 40.0);
Recording load_recording(const std::filesystem::path& path, double sample_rate_hz = 40.0);
void write_recording(std::ostream& out, const Recording& rec);
void save_recording(const Recording& rec, const std::filesystem::path& path);

/// First half gets frames [0, ceil(n/2)), second half the remainder.
std::pair<Recording, Recording> split_half(const Recording& rec);

// --- Manifest JSON -------------------------------------------------------
// [{"subject": "s1", "path": "s1_A.csv", "split": "A"}, ...]
// Relative paths are resolved against the manifest's directory on load.

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Loads every manifest entry and groups the A/B halves by subject, in the
/// order subjects first appear in the manifest.
std::vector<SubjectData> load_dataset(const DatasetManifest& manifest);

// --- Synthetic data ------------------------------------------------------

/// Per-activity generator parameters. Accelerometer channels oscillate at
/// `accel_freq_hz` with amplitude `accel_amplitude` (scaled per subject);
/// magnetometer channels carry a subject-independent disturbance.
struct ActivityProfile {
  Label name;
  double accel_freq_hz = 1.0;
  double accel_amplitude = 1.0;
  double accel_noise = 0.1;
  double magnet_freq_hz = 0.5;
  double magnet_amplitude = 1.0;
  double magnet_noise = 0.5;
};

std::vector<ActivityProfile> default_activity_profiles();

struct SyntheticSpec {
  int subjects = 5;
  std::vector<ActivityProfile> activities = default_activity_profiles();
  /// Seconds of data per activity per subject, split evenly over two passes.
  double duration_s = 60.0;
  double sample_rate_hz = 40.0;
  /// Per-subject amplitude multipliers drawn from [1 - spread, 1 + spread]
  /// unless given explicitly.
  double amplitude_spread = 0.45;
  /// Per-subject relative frequency jitter drawn from [-jitter, +jitter]
  /// unless given explicitly.
  double frequency_jitter = 0.15;
  std::vector<double> subject_multipliers;
  std::vector<double> subject_freq_jitters;
  bool split = true;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TaggedRecording {
  Recording recording;
  std::optional<Split> split;
};

/// Deterministic in `spec` (seed included): same spec, bit-identical output.
/// With `spec.split` each subject yields an A and a B recording obtained by
/// split_half; each half contains every activity once.
std::vector<TaggedRecording> generate_synthetic(const SyntheticSpec& spec);

/// Groups generated recordings into SubjectData (requires spec.split).
std::vector<SubjectData> to_subjects(const std::vector<TaggedRecording>& recordings);

// --- Model persistence ---------------------------------------------------

inline constexpr int kModelSchemaVersion = 1;

void write_model(std::ostream& out, const DiscriminantModel& model);
DiscriminantModel read_model(std::istream& in);
void save_model(const DiscriminantModel& model, const std::filesystem::path& path);
DiscriminantModel load_model(const std::filesystem::path& path);

}  // namespace persona
