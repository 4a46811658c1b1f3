#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "error_helpers.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "persona/eval.hpp"

using namespace persona;

namespace {

std::vector<SubjectData> synthetic(std::uint64_t seed, int subjects = 5) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.subjects = subjects;
  return to_subjects(generate_synthetic(spec));
}

std::string csv_of(const EvalReport& r) {
  std::ostringstream out;
  write_report_csv(out, r);
  return out.str();
}

const ClassifierReport& block(const EvalReport& r, Kind kind) {
  return *std::find_if(r.classifiers.begin(), r.classifiers.end(),
                       [&](const ClassifierReport& c) { return c.kind == kind; });
}

}  // namespace

TEST(ClassWiseAccuracy, Examples) {
  const std::vector<Label> t1 = {"A", "A", "B", "B"}, p1 = {"A", "B", "B", "B"};
  EXPECT_DOUBLE_EQ(class_wise_accuracy(p1, t1), 0.75);
  EXPECT_DOUBLE_EQ(class_wise_accuracy(t1, t1), 1.0);
  const std::vector<Label> t2 = {"A", "A", "A", "B"}, p2 = {"A", "A", "A", "A"};
  EXPECT_DOUBLE_EQ(class_wise_accuracy(p2, t2), 0.5);
  // predictions outside the truth alphabet are just misses
  const std::vector<Label> p3 = {"Z", "A", "B", "Z"};
  EXPECT_DOUBLE_EQ(class_wise_accuracy(p3, t1), 0.5);
}

TEST(ClassWiseAccuracy, Errors) {
  const std::vector<Label> a = {"A"}, b = {"A", "B"}, none;
  EXPECT_EQ(code_of([&] { class_wise_accuracy(a, b); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([&] { class_wise_accuracy(none, none); }), ErrorCode::Empty);
}

TEST(ClassWiseAccuracy, MatchesOracleAndIgnoresJointPermutation) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> pick(0, 4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Label> pred, truth;
    for (int i = 0; i < 50; ++i) {
      truth.push_back(std::string(1, static_cast<char>('a' + pick(rng))));
      pred.push_back(std::string(1, static_cast<char>('a' + pick(rng))));
    }
    const double base = class_wise_accuracy(pred, truth);
    EXPECT_NEAR(base, oracle::class_wise_accuracy(pred, truth), 1e-15);
    std::vector<std::size_t> perm(pred.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Label> pp, tp;
    for (auto i : perm) pp.push_back(pred[i]), tp.push_back(truth[i]);
    EXPECT_NEAR(class_wise_accuracy(pp, tp), base, 1e-15);

    std::vector<std::size_t> pi, ti;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      pi.push_back(static_cast<std::size_t>(pred[i][0] - 'a'));
      ti.push_back(static_cast<std::size_t>(truth[i][0] - 'a'));
    }
    EXPECT_EQ(class_wise_accuracy(pi, ti), base);
  }
}

TEST(Improvement, TableValues) {
  EXPECT_EQ(round1(improvement(77.7, 76.5)), 1.6);
  EXPECT_EQ(round1(improvement(83.0, 73.6)), 12.8);
  EXPECT_EQ(round1(improvement(79.6, 79.8)), -0.3);
  EXPECT_EQ(code_of([] { improvement(50.0, 0.0); }), ErrorCode::DivisionByZero);
}

TEST(Round1, HalfAwayFromZero) {
  EXPECT_EQ(round1(0.25), 0.3);
  EXPECT_EQ(round1(-0.25), -0.3);
  EXPECT_EQ(round1(82.18), 82.2);
  EXPECT_EQ(round1(410.9 / 5.0), 82.2);
}

TEST(Confusion, RowSumsAreTruthCounts) {
  const std::vector<Label> truth = {"a", "a", "b", "c", "c", "c"};
  const std::vector<Label> pred = {"a", "b", "b", "a", "c", "c"};
  const auto cm = confusion_matrix(pred, truth, {"a", "b", "c"});
  EXPECT_EQ(cm.counts[0], (std::vector<std::size_t>{1, 1, 0}));
  EXPECT_EQ(cm.counts[2], (std::vector<std::size_t>{1, 0, 2}));
  for (std::size_t r = 0; r < 3; ++r) {
    std::size_t sum = 0;
    for (auto v : cm.counts[r]) sum += v;
    EXPECT_EQ(sum, static_cast<std::size_t>(std::count(truth.begin(), truth.end(), cm.alphabet[r])));
  }
  std::ostringstream out;
  write_confusion_csv(out, cm);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "truth,a,b,c");
  EXPECT_EQ(code_of([&] { confusion_matrix(pred, truth, {"a", "b"}); }), ErrorCode::InvalidSpec);
}

class LosoTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new std::vector<SubjectData>(synthetic(1));
    report_ = new EvalReport(run_loso(*data_, EvalConfig{}));
  }
  static void TearDownTestSuite() {
    delete report_;
    delete data_;
  }
  static std::vector<SubjectData>* data_;
  static EvalReport* report_;
};

std::vector<SubjectData>* LosoTest::data_ = nullptr;
EvalReport* LosoTest::report_ = nullptr;

TEST_F(LosoTest, ReportShape) {
  const auto& r = *report_;
  EXPECT_EQ(r.subjects, (std::vector<std::string>{"s01", "s02", "s03", "s04", "s05"}));
  ASSERT_EQ(r.classifiers.size(), 2u);
  EXPECT_EQ(r.classifiers[0].kind, Kind::Lda);
  EXPECT_EQ(r.classifiers[1].kind, Kind::Qda);
  for (const auto& cr : r.classifiers) {
    ASSERT_EQ(cr.subjects.size(), 5u);
    double p = 0, t = 0, f = 0;
    for (const auto& sr : cr.subjects) {
      p += sr.proposed.accuracy, t += sr.traditional.accuracy, f += sr.fusion.accuracy;
      EXPECT_EQ(sr.improvement_pct, improvement(100 * sr.proposed.accuracy, 100 * sr.traditional.accuracy));
      for (const auto* m : {&sr.proposed, &sr.traditional, &sr.fusion}) {
        EXPECT_GE(m->accuracy, 0.0);
        EXPECT_LE(m->accuracy, 1.0);
        EXPECT_FALSE(m->features.empty());
        EXPECT_EQ(m->confusion.alphabet.size(), 5u);
      }
      EXPECT_EQ(sr.proposed.features.size(), kTimeFeatureCount);
      for (auto i : sr.traditional.features) EXPECT_LT(i, kTimeFeatureCount);
    }
    EXPECT_NEAR(cr.avg_proposed, p / 5, 1e-12);
    EXPECT_NEAR(cr.avg_traditional, t / 5, 1e-12);
    EXPECT_NEAR(cr.avg_fusion, f / 5, 1e-12);
  }

  std::ostringstream table;
  write_report_table(table, r);
  const auto text = table.str();
  for (const char* needle : {"proposed", "traditional", "improvement", "LDA", "QDA", "Avg",
                             "Detection rates of the sensor fusion-based user-independent classifier"}) {
    EXPECT_NE(text.find(needle), std::string::npos) << needle;
  }
}

TEST_F(LosoTest, CsvRowsAndAverages) {
  std::istringstream in(csv_of(*report_));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "subject,classifier,method,accuracy");
  std::map<std::string, std::vector<double>> by_method;
  std::map<std::string, double> avg;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string subject, classifier, method, acc;
    std::getline(ss, subject, ',');
    std::getline(ss, classifier, ',');
    std::getline(ss, method, ',');
    std::getline(ss, acc, ',');
    EXPECT_EQ(acc.size() - acc.find('.') - 1, 6u) << line;
    (subject == "Avg" ? avg[classifier + method] : by_method[classifier + method].emplace_back()) = std::stod(acc);
  }
  EXPECT_EQ(rows, 2 * 3 * 6);  // classifiers x methods x (5 subjects + Avg)
  for (const auto& [key, values] : by_method) {
    double mean = 0;
    for (double v : values) mean += v;
    EXPECT_NEAR(mean / static_cast<double>(values.size()), avg[key], 1e-6) << key;
  }
}

TEST_F(LosoTest, AuditShowsNoLeakage) {
  ASSERT_EQ(report_->audit.size(), 10u);
  for (const auto& a : report_->audit) {
    EXPECT_EQ(a.validation_rows_in_independent_models, 0u) << a.validation_subject;
    EXPECT_EQ(a.foreign_rows_in_personal_model, 0u) << a.validation_subject;
    EXPECT_GT(a.pseudo_labeled_rows, 0u);
    EXPECT_GT(a.independent_training_rows, 0u);
  }
}

TEST_F(LosoTest, Deterministic) { EXPECT_EQ(csv_of(run_loso(*data_, EvalConfig{})), csv_of(*report_)); }

TEST_F(LosoTest, PerturbingValidationAHalfLeavesBaselinesAlone) {
  auto data = *data_;
  auto& rec = *data[2].a;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, 2.0);
  for (auto& f : rec.frames) f.ax += z(rng), f.mx += z(rng);
  EvalConfig cfg;
  cfg.kinds = {Kind::Lda};
  const auto r = run_loso(data, cfg);
  const auto& before = block(*report_, Kind::Lda).subjects[2];
  const auto& after = r.classifiers[0].subjects[2];
  EXPECT_EQ(after.traditional.accuracy, before.traditional.accuracy);
  EXPECT_EQ(after.traditional.features, before.traditional.features);
  EXPECT_EQ(after.fusion.accuracy, before.fusion.accuracy);
  EXPECT_EQ(after.fusion.features, before.fusion.features);
}

TEST(Loso, InputErrors) {
  auto data = synthetic(2, 3);
  EvalConfig cfg;
  cfg.kinds = {Kind::Lda};
  auto two = data;
  two.pop_back();
  EXPECT_EQ(code_of([&] { run_loso(two, cfg); }), ErrorCode::InsufficientSubjects);
  auto missing = data;
  missing[1].b.reset();
  try {
    run_loso(missing, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingSplit);
    EXPECT_NE(std::string(e.what()).find("s02"), std::string::npos);
  }
  auto unlabeled = data;
  unlabeled[0].a->labels.reset();
  EXPECT_EQ(code_of([&] { run_loso(unlabeled, cfg); }), ErrorCode::MissingLabels);
  cfg.kinds.clear();
  EXPECT_EQ(code_of([&] { run_loso(data, cfg); }), ErrorCode::InvalidSpec);
}

// A fusion model that never says "cycling" hands its confusion to the
// personal model trained on its output.
TEST(Loso, PersonalModelInheritsLabelErrors) {
  const auto data = synthetic(4);
  std::vector<TrainingSet> parts;
  for (std::size_t s = 1; s < data.size(); ++s) parts.push_back(fused_training_set(*data[s].a));
  const auto fusion = fit(Kind::Lda, concat(parts));
  auto pseudo = pseudo_label_recording(fusion, *data[0].a);
  for (auto& y : pseudo.y) {
    if (y == "cycling") y = "walking";
  }
  const auto personal = fit_personal_model(pseudo, Kind::Lda, {});
  const auto test = fused_training_set(*data[0].b);
  const auto pred = predict_rows(personal, test.x.leftCols(19));
  const auto cm = confusion_matrix(pred, test.y, {"cycling", "driving", "idling", "running", "walking"});
  std::size_t cycling_total = 0;
  for (auto v : cm.counts[0]) cycling_total += v;
  EXPECT_EQ(cm.counts[0][0], 0u);  // the label no longer exists
  RecordProperty("cycling_as_walking", std::to_string(cm.counts[0][4]) + "/" + std::to_string(cycling_total));
}

TEST(Loso, ProposedAverageBeatsBaselineAcrossSeeds) {
  int lda_wins = 0, qda_wins = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    EvalConfig cfg;
    cfg.seed = seed;
    const auto r = run_loso(synthetic(seed), cfg);
    lda_wins += block(r, Kind::Lda).avg_proposed >= block(r, Kind::Lda).avg_traditional;
    qda_wins += block(r, Kind::Qda).avg_proposed >= block(r, Kind::Qda).avg_traditional;
  }
  EXPECT_GE(lda_wins, 8);
  EXPECT_GE(qda_wins, 8);
}
