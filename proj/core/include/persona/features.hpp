#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "persona/signal.hpp"

namespace persona {

enum class Layout { Accel19, Freq9, Fused56 };

std::string_view to_string(Layout layout) noexcept;

struct FeatureVector {
  std::vector<double> values;
  std::vector<std::string> names;
  Layout layout = Layout::Accel19;
};

inline constexpr std::array<double, 4> kPercentileLevels = {10.0, 25.0, 75.0, 90.0};

inline constexpr std::size_t kTimeFeatureCount = 19;
inline constexpr std::size_t kFreqFeatureCount = 9;
inline constexpr std::size_t kFusedFeatureCount = 2 * kTimeFeatureCount + 2 * kFreqFeatureCount;

/// Spectral window length the band layout is defined for.
inline constexpr std::size_t kSpectralWindowLength = 40;
/// Number of DFT bins (1..20) in each of the nine bands.
inline constexpr std::array<std::size_t, kFreqFeatureCount> kBandSizes = {3, 3, 2, 2, 2, 2, 2, 2, 2};

std::size_t feature_count(Layout layout) noexcept;

/// Feature names for `layout`, in value order. Fused56 prefixes the
/// per-signal names with "acc_" / "mag_".
std::vector<std::string> feature_names(Layout layout);

/// Linear-interpolation quantile on rank (n - 1) * p / 100. `values` need
/// not be sorted.
double percentile(std::span<const double> values, double p);

/// Same, on already sorted input (no copy).
double percentile_sorted(std::span<const double> sorted, double p);

/// The 19 time-domain features:
///   std (population), min, max,
///   P(p) - median            for p in 10, 25, 75, 90,
///   tail sums                 sum{x < P(10)}, sum{x < P(25)}, sum{x > P(75)}, sum{x > P(90)},
///   tail square sums          same tails over x^2,
///   level crossings of P(p)   #i with (x_i <= P) != (x_{i+1} <= P).
FeatureVector time_features(const Window& w);

/// Nine band sums of DFT magnitudes |X_k|, k = 1..20, over a 40-sample
/// window (DC dropped, Nyquist kept, rectangular window).
FeatureVector freq_features(const Window& w);

/// [accel time 19, magnet time 19, accel freq 9, magnet freq 9].
FeatureVector fused_features(const Window& accel_w, const Window& magnet_w);

/// |X_k| for k = 0..n/2 of a real sequence.
std::vector<double> dft_magnitudes(std::span<const double> x);

/// Per-window features for a whole recording. `labels` holds the
/// ground-truth label at each window's center sample when the recording is
/// labeled, otherwise empty.
struct FeatureMatrix {
  Layout layout = Layout::Fused56;
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> start_indices;
  std::vector<Label> labels;
};

struct ExtractionOptions {
  MagnitudeMode magnitude_mode = MagnitudeMode::SumOfSquares;
  double window_s = 1.0;
  double slide_s = 0.25;
};

/// Windows aligned between the two magnitude signals of a recording.
struct WindowedRecording {
  std::vector<Window> accel;
  std::vector<Window> magnet;
  /// Center-sample ground truth per window (empty if unlabeled).
  std::vector<Label> truth;
};

WindowedRecording window_recording(const Recording& rec, const ExtractionOptions& opts = {});

/// Accel19 or Fused56 rows for every window of `rec`.
FeatureMatrix extract_features(const Recording& rec, Layout layout,
                               const ExtractionOptions& opts = {});

/// CSV with header = feature names + "label"; label left empty when unknown.
void write_feature_csv(std::ostream& out, const FeatureMatrix& matrix);

}  // namespace persona
