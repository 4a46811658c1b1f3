#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "persona/classify.hpp"
#include "persona/dataio.hpp"
#include "persona/signal.hpp"

namespace fixture {

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::path(PERSONA_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// n frames at 40 Hz with smooth nonconstant channels, optionally labeled.
inline persona::Recording recording(std::size_t n, const std::string& label = "", std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  persona::Recording rec;
  rec.subject_id = "s1";
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / 40.0;
    persona::SensorFrame f;
    f.timestamp_ms = static_cast<std::int64_t>(i) * 25;
    f.ax = std::sin(6.0 * t) + noise(rng);
    f.ay = 9.8 + noise(rng);
    f.az = std::cos(3.0 * t) + noise(rng);
    f.mx = 20.0 + noise(rng);
    f.my = -10.0 + 2.0 * std::sin(t) + noise(rng);
    f.mz = 35.0 + noise(rng);
    rec.frames.push_back(f);
  }
  if (!label.empty()) rec.labels.emplace(n, label);
  return rec;
}

// Independent Gaussian blobs, one per label, `per` rows each.
inline persona::TrainingSet gaussian_blobs(const std::vector<std::vector<double>>& means, std::size_t per,
                                           double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, sd);
  const auto d = static_cast<Eigen::Index>(means[0].size());
  persona::TrainingSet ts;
  ts.x.resize(static_cast<Eigen::Index>(means.size() * per), d);
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < means.size(); ++c) {
    for (std::size_t i = 0; i < per; ++i, ++row) {
      for (Eigen::Index j = 0; j < d; ++j) ts.x(row, j) = means[c][static_cast<std::size_t>(j)] + z(rng);
      ts.y.push_back("c" + std::to_string(c));
    }
  }
  return ts;
}

inline persona::Window window(std::vector<double> values, std::size_t start = 0,
                              persona::Source source = persona::Source::Accel) {
  persona::Window w;
  w.values = std::move(values);
  w.start_index = start;
  w.source = source;
  return w;
}

inline std::vector<double> random_values(std::size_t n, std::mt19937_64& rng, double lo = -50.0,
                                         double hi = 50.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace fixture
