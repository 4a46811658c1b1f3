#include "persona/signal.hpp"

#include <algorithm>
#include <cmath>

#include "persona/error.hpp"
#include "persona/features.hpp"

namespace persona {

MagnitudeSeries magnitude(std::span<const SensorFrame> frames, Source source, MagnitudeMode mode,
                          double sample_rate_hz) {
  if (frames.empty()) throw Error(ErrorCode::EmptyInput, "magnitude of an empty frame sequence");
  MagnitudeSeries out;
  out.sample_rate_hz = sample_rate_hz;
  out.source = source;
  out.values.reserve(frames.size());
  for (const auto& f : frames) {
    const double sq = source == Source::Accel ? f.ax * f.ax + f.ay * f.ay + f.az * f.az
                                              : f.mx * f.mx + f.my * f.my + f.mz * f.mz;
    out.values.push_back(mode == MagnitudeMode::Norm ? std::sqrt(sq) : sq);
  }
  return out;
}

CalibrationParams estimate_calibration(const MagnitudeSeries& series, double ref_median, double ref_iqr) {
  if (series.values.size() < kMinWindowLength) {
    throw Error(ErrorCode::TooShort, "calibration needs at least 8 samples");
  }
  if (!(ref_iqr > 0.0)) throw Error(ErrorCode::InvalidSpec, "reference IQR must be positive");
  std::vector<double> sorted = series.values;
  std::sort(sorted.begin(), sorted.end());
  const double iqr = percentile_sorted(sorted, 75.0) - percentile_sorted(sorted, 25.0);
  if (!(iqr > 0.0)) throw Error(ErrorCode::DegenerateSeries, "interquartile range is zero");
  const double scale = ref_iqr / iqr;
  return {scale, ref_median - scale * percentile_sorted(sorted, 50.0)};
}

MagnitudeSeries apply_calibration(const MagnitudeSeries& series, const CalibrationParams& params) {
  MagnitudeSeries out = series;
  for (double& v : out.values) v = params.scale * v + params.offset;
  return out;
}

std::size_t window_length(double sample_rate_hz, double window_s) {
  const auto len = std::llround(window_s * sample_rate_hz);
  if (len < static_cast<long long>(kMinWindowLength)) {
    throw Error(ErrorCode::InvalidSpec, "window shorter than 8 samples at this rate");
  }
  return static_cast<std::size_t>(len);
}

std::size_t slide_step(double sample_rate_hz, double slide_s) {
  const auto step = std::llround(slide_s * sample_rate_hz);
  if (step < 1) throw Error(ErrorCode::InvalidSpec, "slide step rounds to zero samples");
  return static_cast<std::size_t>(step);
}

std::vector<Window> windows(const MagnitudeSeries& series, double window_s, double slide_s) {
  const std::size_t len = window_length(series.sample_rate_hz, window_s);
  const std::size_t step = slide_step(series.sample_rate_hz, slide_s);
  const std::size_t n = series.values.size();
  if (n < len) {
    throw Error(ErrorCode::TooShort, std::to_string(n) + " samples, window needs " + std::to_string(len));
  }
  std::vector<Window> out;
  out.reserve((n - len) / step + 1);
  for (std::size_t start = 0; start + len <= n; start += step) {
    Window w;
    w.start_index = start;
    w.source = series.source;
    w.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(start),
                    series.values.begin() + static_cast<std::ptrdiff_t>(start + len));
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace persona
