#include "persona/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "persona/error.hpp"
#include "text_util.hpp"

namespace persona {

namespace {

/// Real-input DFT of a fixed length through a precomputed twiddle table.
class RealDft {
 public:
  explicit RealDft(std::size_t n) : n_(n), cos_(n), sin_(n) {
    for (std::size_t i = 0; i < n; ++i) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
      cos_[i] = std::cos(angle);
      sin_[i] = std::sin(angle);
    }
  }

  /// |X_k| for k = 0..n/2.
  std::vector<double> magnitudes(std::span<const double> x) const {
    std::vector<double> out(n_ / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
      double re = 0.0, im = 0.0;
      std::size_t idx = 0;
      for (std::size_t t = 0; t < n_; ++t) {
        re += x[t] * cos_[idx];
        im -= x[t] * sin_[idx];
        idx += k;
        if (idx >= n_) idx -= n_;
      }
      out[k] = std::hypot(re, im);
    }
    return out;
  }

 private:
  std::size_t n_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

const RealDft& spectral_dft() {
  static const RealDft dft(kSpectralWindowLength);
  return dft;
}

std::vector<std::string> time_feature_names() {
  std::vector<std::string> names = {"std", "min", "max"};
  for (int p : {10, 25, 75, 90}) names.push_back("p" + std::to_string(p) + "_minus_median");
  const auto tail = [](int p) { return p < 50 ? "below_p" + std::to_string(p) : "above_p" + std::to_string(p); };
  for (int p : {10, 25, 75, 90}) names.push_back("sum_" + tail(p));
  for (int p : {10, 25, 75, 90}) names.push_back("sqsum_" + tail(p));
  for (int p : {10, 25, 75, 90}) names.push_back("crossings_p" + std::to_string(p));
  return names;
}

std::vector<std::string> freq_feature_names() {
  std::vector<std::string> names;
  std::size_t bin = 1;
  for (auto size : kBandSizes) {
    names.push_back("band_" + std::to_string(bin) + "_" + std::to_string(bin + size - 1));
    bin += size;
  }
  return names;
}

std::vector<std::string> prefixed(const std::vector<std::string>& names, std::string_view prefix) {
  std::vector<std::string> out;
  for (const auto& n : names) out.push_back(std::string(prefix) + n);
  return out;
}

void require_finite(const Window& w) {
  for (double v : w.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "window values");
  }
}

}  // namespace

std::string_view to_string(Layout layout) noexcept {
  switch (layout) {
    case Layout::Accel19: return "accel19";
    case Layout::Freq9: return "freq9";
    case Layout::Fused56: return "fused56";
  }
  return "unknown";
}

std::size_t feature_count(Layout layout) noexcept {
  switch (layout) {
    case Layout::Accel19: return kTimeFeatureCount;
    case Layout::Freq9: return kFreqFeatureCount;
    case Layout::Fused56: return kFusedFeatureCount;
  }
  return 0;
}

std::vector<std::string> feature_names(Layout layout) {
  switch (layout) {
    case Layout::Accel19: return time_feature_names();
    case Layout::Freq9: return freq_feature_names();
    case Layout::Fused56: {
      auto names = prefixed(time_feature_names(), "acc_");
      for (auto& n : prefixed(time_feature_names(), "mag_")) names.push_back(std::move(n));
      for (auto& n : prefixed(freq_feature_names(), "acc_")) names.push_back(std::move(n));
      for (auto& n : prefixed(freq_feature_names(), "mag_")) names.push_back(std::move(n));
      return names;
    }
  }
  return {};
}

double percentile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "percentile of an empty sequence");
  if (!(p >= 0.0 && p <= 100.0)) throw Error(ErrorCode::InvalidSpec, "percentile level outside [0, 100]");
  const double rank = static_cast<double>(sorted.size() - 1) * p / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const double frac = rank - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted[lo];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double percentile(std::span<const double> values, double p) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return percentile_sorted(sorted, p);
}

FeatureVector time_features(const Window& w) {
  const auto& x = w.values;
  const std::size_t n = x.size();
  if (n < kMinWindowLength) throw Error(ErrorCode::TooShort, "time features need at least 8 samples");
  require_finite(w);

  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  const double median = percentile_sorted(sorted, 50.0);
  std::array<double, 4> level{};
  for (std::size_t i = 0; i < 4; ++i) level[i] = percentile_sorted(sorted, kPercentileLevels[i]);

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);

  std::array<double, 4> tail_sum{}, tail_sq{};
  std::array<double, 4> crossings{};
  for (std::size_t i = 0; i < 4; ++i) {
    const bool below = kPercentileLevels[i] < 50.0;
    for (double v : x) {
      if (below ? v < level[i] : v > level[i]) {
        tail_sum[i] += v;
        tail_sq[i] += v * v;
      }
    }
    for (std::size_t t = 0; t + 1 < n; ++t) {
      if ((x[t] <= level[i]) != (x[t + 1] <= level[i])) crossings[i] += 1.0;
    }
  }

  FeatureVector out;
  out.layout = Layout::Accel19;
  out.names = time_feature_names();
  out.values = {std::sqrt(ss / static_cast<double>(n)), sorted.front(), sorted.back()};
  for (double l : level) out.values.push_back(l - median);
  out.values.insert(out.values.end(), tail_sum.begin(), tail_sum.end());
  out.values.insert(out.values.end(), tail_sq.begin(), tail_sq.end());
  out.values.insert(out.values.end(), crossings.begin(), crossings.end());
  return out;
}

std::vector<double> dft_magnitudes(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::EmptyInput, "DFT of an empty sequence");
  if (x.size() == kSpectralWindowLength) return spectral_dft().magnitudes(x);
  return RealDft(x.size()).magnitudes(x);
}

FeatureVector freq_features(const Window& w) {
  if (w.values.size() != kSpectralWindowLength) {
    throw Error(ErrorCode::BadLength, "spectral features need " + std::to_string(kSpectralWindowLength) +
                                          " samples, got " + std::to_string(w.values.size()));
  }
  require_finite(w);
  const auto mag = spectral_dft().magnitudes(w.values);
  FeatureVector out;
  out.layout = Layout::Freq9;
  out.names = freq_feature_names();
  std::size_t bin = 1;
  for (auto size : kBandSizes) {
    double sum = 0.0;
    for (std::size_t k = bin; k < bin + size; ++k) sum += mag[k];
    out.values.push_back(sum);
    bin += size;
  }
  return out;
}

FeatureVector fused_features(const Window& accel_w, const Window& magnet_w) {
  if (accel_w.start_index != magnet_w.start_index || accel_w.values.size() != magnet_w.values.size()) {
    throw Error(ErrorCode::WindowMismatch, "accel window at " + std::to_string(accel_w.start_index) +
                                               ", magnet window at " + std::to_string(magnet_w.start_index));
  }
  FeatureVector out;
  out.layout = Layout::Fused56;
  out.names = feature_names(Layout::Fused56);
  out.values.reserve(kFusedFeatureCount);
  for (const auto& part : {time_features(accel_w), time_features(magnet_w), freq_features(accel_w),
                           freq_features(magnet_w)}) {
    out.values.insert(out.values.end(), part.values.begin(), part.values.end());
  }
  return out;
}

WindowedRecording window_recording(const Recording& rec, const ExtractionOptions& opts) {
  WindowedRecording out;
  const auto accel = magnitude(rec.frames, Source::Accel, opts.magnitude_mode, rec.sample_rate_hz);
  const auto magnet = magnitude(rec.frames, Source::Magnet, opts.magnitude_mode, rec.sample_rate_hz);
  out.accel = windows(accel, opts.window_s, opts.slide_s);
  out.magnet = windows(magnet, opts.window_s, opts.slide_s);
  if (rec.labels) {
    for (const auto& w : out.accel) out.truth.push_back((*rec.labels)[w.start_index + w.values.size() / 2]);
  }
  return out;
}

FeatureMatrix extract_features(const Recording& rec, Layout layout, const ExtractionOptions& opts) {
  const auto wr = window_recording(rec, opts);
  FeatureMatrix m;
  m.layout = layout;
  m.names = feature_names(layout);
  m.labels = wr.truth;
  for (std::size_t i = 0; i < wr.accel.size(); ++i) {
    m.start_indices.push_back(wr.accel[i].start_index);
    switch (layout) {
      case Layout::Accel19: m.rows.push_back(time_features(wr.accel[i]).values); break;
      case Layout::Freq9: m.rows.push_back(freq_features(wr.accel[i]).values); break;
      case Layout::Fused56: m.rows.push_back(fused_features(wr.accel[i], wr.magnet[i]).values); break;
    }
  }
  return m;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& matrix) {
  for (const auto& n : matrix.names) out << n << ',';
  out << "label\n";
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    for (double v : matrix.rows[r]) out << detail::format_double(v) << ',';
    if (r < matrix.labels.size()) out << matrix.labels[r];
    out << '\n';
  }
}

}  // namespace persona
