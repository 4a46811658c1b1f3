#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "persona/dataio.hpp"

namespace persona {

enum class Source { Accel, Magnet };

/// Literal sum of squares, or its square root (Euclidean norm).
enum class MagnitudeMode { SumOfSquares, Norm };

struct MagnitudeSeries {
  std::vector<double> values;
  double sample_rate_hz = 40.0;
  Source source = Source::Accel;
};

/// Affine map v -> scale * v + offset applied to a magnitude series.
struct CalibrationParams {
  double scale = 1.0;
  double offset = 0.0;

  CalibrationParams inverse() const { return {1.0 / scale, -offset / scale}; }
};

struct Window {
  std::vector<double> values;
  std::size_t start_index = 0;
  Source source = Source::Accel;
};

/// Smallest window length accepted anywhere in the pipeline.
inline constexpr std::size_t kMinWindowLength = 8;

/// x^2 + y^2 + z^2 per frame for the chosen sensor (sqrt applied in Norm mode).
/// Removes the dependence on device orientation, and with it gravity's
/// direction.
MagnitudeSeries magnitude(std::span<const SensorFrame> frames, Source source,
                          MagnitudeMode mode = MagnitudeMode::SumOfSquares,
                          double sample_rate_hz = 40.0);

/// Robust device normalization: chooses scale/offset so the series' median
/// lands on `ref_median` and its interquartile range on `ref_iqr`.
CalibrationParams estimate_calibration(const MagnitudeSeries& series, double ref_median,
                                       double ref_iqr);

MagnitudeSeries apply_calibration(const MagnitudeSeries& series, const CalibrationParams& params);

/// Samples per window / per slide step for a given rate, rounded to nearest.
std::size_t window_length(double sample_rate_hz, double window_s = 1.0);
std::size_t slide_step(double sample_rate_hz, double slide_s = 0.25);

/// Full windows starting at 0, S, 2S, ... (defaults at 40 Hz: L = 40, S = 10).
std::vector<Window> windows(const MagnitudeSeries& series, double window_s = 1.0,
                            double slide_s = 0.25);

}  // namespace persona
