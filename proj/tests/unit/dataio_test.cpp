#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "error_helpers.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "persona/dataio.hpp"
#include "persona/error.hpp"
#include "persona/features.hpp"
#include "persona/signal.hpp"

using namespace persona;

namespace {

Recording parse(const std::string& csv) {
  std::istringstream in(csv);
  return read_recording(in, "s1");
}

}  // namespace

TEST(LoadRecording, TwoRowsNoLabels) {
  const auto rec = parse("timestamp_ms,ax,ay,az,mx,my,mz\n0,1,2,3,4,5,6\n25,1.5,2,3,4,5,6.5\n");
  ASSERT_EQ(rec.frames.size(), 2u);
  EXPECT_FALSE(rec.labels.has_value());
  EXPECT_EQ(rec.frames[1].timestamp_ms, 25);
  EXPECT_DOUBLE_EQ(rec.frames[1].ax, 1.5);
  EXPECT_DOUBLE_EQ(rec.frames[1].mz, 6.5);
}

TEST(LoadRecording, LabelColumn) {
  const auto rec =
      parse("timestamp_ms,ax,ay,az,mx,my,mz,label\n0,1,2,3,4,5,6,walking\n25,1,2,3,4,5,6,walking\n");
  ASSERT_TRUE(rec.labels.has_value());
  EXPECT_EQ(*rec.labels, (std::vector<Label>{"walking", "walking"}));
}

TEST(LoadRecording, NanNamesTheRow) {
  try {
    parse("timestamp_ms,ax,ay,az,mx,my,mz\n0,1,2,3,4,5,6\n25,NaN,2,3,4,5,6\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteValue);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
}

TEST(LoadRecording, Errors) {
  EXPECT_EQ(code_of([] { parse(""); }), ErrorCode::EmptyFile);
  EXPECT_EQ(code_of([] { parse("timestamp_ms,ax,ay,az,mx,my,mz\n"); }), ErrorCode::EmptyFile);
  EXPECT_EQ(code_of([] { parse("timestamp_ms,ax,ay,az,mx,my\n0,1,2,3,4,5\n"); }), ErrorCode::MissingColumn);
  EXPECT_EQ(code_of([] { parse("timestamp_ms,ax,ay,az,mx,my,mz\n25,1,2,3,4,5,6\n0,1,2,3,4,5,6\n"); }),
            ErrorCode::TimestampRegression);
  EXPECT_EQ(code_of([] { parse("timestamp_ms,ax,ay,az,mx,my,mz\n0,1,2,3,4,5,inf\n"); }),
            ErrorCode::NonFiniteValue);
  EXPECT_EQ(code_of([] { load_recording("/nonexistent/persona.csv"); }), ErrorCode::IoFailure);
}

TEST(LoadRecording, EqualTimestampsAllowed) {
  const auto rec = parse("timestamp_ms,ax,ay,az,mx,my,mz\n0,1,2,3,4,5,6\n0,1,2,3,4,5,6\n");
  EXPECT_EQ(rec.frames.size(), 2u);
}

TEST(Recording, SaveLoadRoundTripIsIdentity) {
  const auto dir = fixture::temp_dir("dataio_roundtrip");
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto rec = fixture::recording(57, seed % 2 ? "cycling" : "", seed);
    rec.frames[3].ax = 1e-300;
    rec.frames[4].ay = -0.1;
    rec.frames[5].az = 123456789.123456789;
    save_recording(rec, dir / "r.csv");
    const auto back = load_recording(dir / "r.csv");
    EXPECT_EQ(back.frames, rec.frames);
    EXPECT_EQ(back.labels, rec.labels);
  }
}

TEST(SplitHalf, EvenAndOdd) {
  auto [a, b] = split_half(fixture::recording(100));
  EXPECT_EQ(a.frames.size(), 50u);
  EXPECT_EQ(b.frames.size(), 50u);
  auto [c, d] = split_half(fixture::recording(101));
  EXPECT_EQ(c.frames.size(), 51u);
  EXPECT_EQ(d.frames.size(), 50u);
}

TEST(SplitHalf, LabelsFollowFrames) {
  auto rec = fixture::recording(4);
  rec.labels = std::vector<Label>{"w", "w", "r", "r"};
  auto [a, b] = split_half(rec);
  EXPECT_EQ(*a.labels, (std::vector<Label>{"w", "w"}));
  EXPECT_EQ(*b.labels, (std::vector<Label>{"r", "r"}));
  EXPECT_EQ(a.subject_id, rec.subject_id);
  EXPECT_EQ(b.sample_rate_hz, rec.sample_rate_hz);
}

TEST(SplitHalf, ConcatenationRestoresOriginal) {
  for (std::size_t n : {2u, 3u, 17u, 64u}) {
    const auto rec = fixture::recording(n, "idling");
    auto [a, b] = split_half(rec);
    auto frames = a.frames;
    frames.insert(frames.end(), b.frames.begin(), b.frames.end());
    EXPECT_EQ(frames, rec.frames);
  }
  EXPECT_EQ(code_of([] { split_half(fixture::recording(1)); }), ErrorCode::TooShort);
}

TEST(Synthetic, FrameCount) {
  SyntheticSpec spec;
  spec.split = false;
  spec.subjects = 2;
  const auto recs = generate_synthetic(spec);
  ASSERT_EQ(recs.size(), 2u);
  for (const auto& r : recs) {
    EXPECT_EQ(r.recording.frames.size(), 12000u);
    ASSERT_TRUE(r.recording.labels);
    EXPECT_EQ(r.recording.labels->size(), 12000u);
  }
}

TEST(Synthetic, SameSeedSameBytes) {
  SyntheticSpec spec;
  spec.seed = 7;
  spec.subjects = 2;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::ostringstream x, y;
    write_recording(x, a[i].recording);
    write_recording(y, b[i].recording);
    EXPECT_EQ(x.str(), y.str());
  }
  spec.seed = 8;
  const auto c = generate_synthetic(spec);
  EXPECT_NE(a[0].recording.frames, c[0].recording.frames);
}

TEST(Synthetic, SplitHalvesCoverEveryActivity) {
  SyntheticSpec spec;
  spec.subjects = 3;
  const auto subjects = to_subjects(generate_synthetic(spec));
  ASSERT_EQ(subjects.size(), 3u);
  EXPECT_EQ(subjects[0].id, "s01");
  for (const auto& s : subjects) {
    for (const auto* half : {&*s.a, &*s.b}) {
      std::set<Label> seen(half->labels->begin(), half->labels->end());
      EXPECT_EQ(seen.size(), 5u);
    }
  }
}

TEST(Synthetic, MultiplierShowsInWindowStd) {
  // Same seed and subject, only the multiplier differs, so gravity direction
  // and phases are shared and the spread difference comes from the multiplier.
  std::vector<Recording> recs;
  for (double m : {1.0, 1.5}) {
    SyntheticSpec spec;
    spec.subjects = 1;
    spec.split = false;
    spec.subject_multipliers = {m};
    spec.subject_freq_jitters = {0.0};
    recs.push_back(generate_synthetic(spec).front().recording);
  }
  for (const auto& activity : kDefaultActivities) {
    double mean_std[2] = {0, 0};
    for (int s = 0; s < 2; ++s) {
      const auto& rec = recs[static_cast<std::size_t>(s)];
      const auto mag = magnitude(rec.frames, Source::Accel);
      int count = 0;
      for (std::size_t start = 0; start + 40 <= mag.values.size(); start += 40) {
        if ((*rec.labels)[start] != activity || (*rec.labels)[start + 39] != activity) continue;
        std::vector<double> w(mag.values.begin() + static_cast<std::ptrdiff_t>(start),
                              mag.values.begin() + static_cast<std::ptrdiff_t>(start + 40));
        mean_std[s] += oracle::time_features(w)[0];
        ++count;
      }
      mean_std[s] /= count;
    }
    EXPECT_GT(mean_std[1], 1.3 * mean_std[0]) << activity;
  }
}

TEST(Synthetic, InvalidSpecs) {
  SyntheticSpec spec;
  spec.duration_s = 0;
  EXPECT_EQ(code_of([&] { generate_synthetic(spec); }), ErrorCode::InvalidSpec);
  spec = {};
  spec.subjects = 0;
  EXPECT_EQ(code_of([&] { generate_synthetic(spec); }), ErrorCode::InvalidSpec);
  spec = {};
  spec.activities[1].accel_freq_hz = spec.activities[0].accel_freq_hz;
  spec.activities[1].accel_amplitude = spec.activities[0].accel_amplitude;
  EXPECT_EQ(code_of([&] { generate_synthetic(spec); }), ErrorCode::InvalidSpec);
  spec = {};
  spec.subject_multipliers = {1.0};
  EXPECT_EQ(code_of([&] { generate_synthetic(spec); }), ErrorCode::InvalidSpec);
}

TEST(Manifest, RoundTripAndRelativePaths) {
  const auto dir = fixture::temp_dir("dataio_manifest");
  const auto rec = fixture::recording(80, "walking");
  save_recording(rec, dir / "x.csv");
  DatasetManifest m;
  m.entries.push_back({"s1", "x.csv", Split::A});
  m.entries.push_back({"s1", "x.csv", Split::B});
  m.entries.push_back({"s2", "x.csv", std::nullopt});
  save_manifest(m, dir / "manifest.json");
  const auto back = load_manifest(dir / "manifest.json");
  ASSERT_EQ(back.entries.size(), 3u);
  EXPECT_EQ(back.entries[0].path, dir / "x.csv");
  EXPECT_EQ(back.entries[1].split, Split::B);
  EXPECT_FALSE(back.entries[2].split.has_value());

  const auto data = load_dataset(back);
  ASSERT_EQ(data.size(), 2u);
  EXPECT_EQ(data[0].a->frames.size(), 80u);
  EXPECT_EQ(data[1].a->frames.size(), 40u);
  EXPECT_EQ(data[1].b->frames.size(), 40u);
  EXPECT_EQ(data[1].a->subject_id, "s2");
}

TEST(Manifest, Malformed) {
  const auto dir = fixture::temp_dir("dataio_bad_manifest");
  fixture::write_text(dir / "a.json", "{\"subject\": \"s1\"}");
  EXPECT_EQ(code_of([&] { load_manifest(dir / "a.json"); }), ErrorCode::BadManifest);
  fixture::write_text(dir / "b.json", "[{\"subject\": \"s1\", \"path\": \"x\", \"split\": \"C\"}]");
  EXPECT_EQ(code_of([&] { load_manifest(dir / "b.json"); }), ErrorCode::BadManifest);
  fixture::write_text(dir / "c.json",
                      "[{\"subject\": \"s1\", \"path\": \"x\", \"split\": \"A\"},"
                      " {\"subject\": \"s1\", \"path\": \"y\", \"split\": \"A\"}]");
  EXPECT_EQ(code_of([&] { load_manifest(dir / "c.json"); }), ErrorCode::BadManifest);
  fixture::write_text(dir / "d.json", "not json");
  EXPECT_EQ(code_of([&] { load_manifest(dir / "d.json"); }), ErrorCode::BadManifest);
}

namespace {

DiscriminantModel small_model(Kind kind) {
  const auto ts = fixture::gaussian_blobs({{0, 0, 0}, {2, 1, 0}, {0, 3, 1}}, 40, 1.0, 11);
  FitOptions fo;
  fo.feature_indices = {0, 2, 1};
  return fit(kind, ts, fo);
}

}  // namespace

TEST(ModelFile, RoundTripIsExact) {
  const auto dir = fixture::temp_dir("dataio_model");
  std::mt19937_64 rng(5);
  for (Kind kind : {Kind::Lda, Kind::Qda}) {
    const auto m = small_model(kind);
    save_model(m, dir / "m.txt");
    const auto back = load_model(dir / "m.txt");
    EXPECT_TRUE(back == m);
    for (int i = 0; i < 100; ++i) {
      const auto x = fixture::random_values(3, rng, -4, 4);
      EXPECT_EQ(predict(back, x), predict(m, x));
      EXPECT_EQ(discriminant_scores(back, x), discriminant_scores(m, x));
    }
  }
}

TEST(ModelFile, TruncatedIsCorrupt) {
  std::ostringstream out;
  write_model(out, small_model(Kind::Qda));
  const auto text = out.str();
  for (std::size_t cut : {std::size_t{5}, text.size() / 3, text.size() / 2, text.size() - 6}) {
    std::istringstream in(text.substr(0, cut));
    EXPECT_EQ(code_of([&] { read_model(in); }), ErrorCode::CorruptModel) << cut;
  }
}

TEST(ModelFile, FutureVersion) {
  std::ostringstream out;
  write_model(out, small_model(Kind::Lda));
  auto text = out.str();
  const auto pos = text.find("version 1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 9, "version 2");
  std::istringstream in(text);
  EXPECT_EQ(code_of([&] { read_model(in); }), ErrorCode::VersionMismatch);
  EXPECT_EQ(code_of([] { load_model("/nonexistent/model.txt"); }), ErrorCode::IoFailure);
}
