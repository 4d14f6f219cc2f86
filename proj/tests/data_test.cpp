// Copyright 2026 The fairpriv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace fairpriv {
namespace {

namespace fs = std::filesystem;

std::size_t count_cell(const LabeledDataset& ds, std::size_t y, std::size_t a) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) c += ds.y[i] == y && ds.y_a[i] == a;
  return c;
}

/// Fits the linear attacker on the first half of `ds` and scores it on the
/// second half, predicting `target` from raw features.
double raw_attack(const LabeledDataset& ds, const std::vector<std::size_t>& target, std::size_t k,
                  bool condition_on_y) {
  const std::size_t half = ds.size() / 2;
  std::vector<std::size_t> first(half), second(ds.size() - half);
  for (std::size_t i = 0; i < half; ++i) first[i] = i;
  for (std::size_t i = half; i < ds.size(); ++i) second[i - half] = i;
  auto pick = [](const std::vector<std::size_t>& v, const std::vector<std::size_t>& rows) {
    std::vector<std::size_t> out;
    for (std::size_t r : rows) out.push_back(v[r]);
    return out;
  };
  const std::vector<std::size_t> zeros(ds.size(), 0);
  const auto& cond = condition_on_y ? ds.y : zeros;
  const LinearAttacker att = fit_attacker(gather_rows(ds.x, first), pick(cond, first), pick(target, first),
                                          ds.num_y, k);
  return attack_accuracy(att, gather_rows(ds.x, second), pick(cond, second), pick(target, second));
}

TEST(SampleLabels, PointMassJoint) {
  JointTable j = JointTable::uniform(2, 2, 2);
  std::fill(j.probs.begin(), j.probs.end(), 0.0);
  j.at(0, 1, 0) = 1.0;
  const LabelDraws d = sample_labels(j, 200, 3);
  for (std::size_t i = 0; i < 200; ++i) {
    EXPECT_EQ(d.y[i], 0u);
    EXPECT_EQ(d.y_a[i], 1u);
    EXPECT_EQ(d.y_p[i], 0u);
  }
}

TEST(SampleLabels, UniformMarginalsConcentrate) {
  // Binomial sd at n = 10000 is 0.005, so 0.02 is four standard deviations.
  const LabelDraws d = sample_labels(JointTable::uniform(2, 2, 2), 10000, 17);
  for (const auto* v : {&d.y, &d.y_a, &d.y_p}) {
    double ones = 0;
    for (std::size_t l : *v) ones += static_cast<double>(l);
    EXPECT_NEAR(ones / 10000.0, 0.5, 0.02);
  }
}

TEST(SampleLabels, Deterministic) {
  const JointTable j = testing::reference_spec().joint;
  const LabelDraws a = sample_labels(j, 500, 9);
  const LabelDraws b = sample_labels(j, 500, 9);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.y_a, b.y_a);
  EXPECT_EQ(a.y_p, b.y_p);
  EXPECT_NE(a.y, sample_labels(j, 500, 10).y);
}

TEST(SampleLabels, InvalidJointThrows) {
  JointTable j = JointTable::uniform(2, 2, 2);
  j.probs[0] += 0.1;
  EXPECT_THROW(sample_labels(j, 10, 0), ValueError);
  j = JointTable::uniform(2, 2, 2);
  j.probs[0] = -0.125;
  j.probs[1] = 0.375;
  EXPECT_THROW(sample_labels(j, 10, 0), ValueError);
  j = JointTable::uniform(2, 2, 2);
  j.probs.pop_back();
  EXPECT_THROW(sample_labels(j, 10, 0), ValueError);
}

TEST(Generate, ShapeAndBlockMeans) {
  SyntheticSpec s = testing::reference_spec();
  s.n = 6000;
  const LabeledDataset ds = generate(s);
  ASSERT_EQ(ds.size(), 6000u);
  ASSERT_EQ(ds.dim(), 20u);
  // Column 1 of the y block has mean sep_y when y = 1 and 0 otherwise; column
  // 4 + 0 of the y_a block has mean sep_a when y_a = 0.
  double m1 = 0, n1 = 0, m0 = 0, n0 = 0, ma = 0, na = 0, noise = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (ds.y[i] == 1 ? m1 : m0) += ds.x(i, 1);
    (ds.y[i] == 1 ? n1 : n0) += 1;
    if (ds.y_a[i] == 0) {
      ma += ds.x(i, 4);
      na += 1;
    }
    noise += ds.x(i, 19);
  }
  EXPECT_NEAR(m1 / n1, 3.0, 0.1);
  EXPECT_NEAR(m0 / n0, 0.0, 0.1);
  EXPECT_NEAR(ma / na, 2.0, 0.1);
  EXPECT_NEAR(noise / 6000.0, 0.0, 0.1);
}

TEST(Generate, Deterministic) {
  SyntheticSpec s = testing::reference_spec();
  s.n = 300;
  EXPECT_EQ(generate(s), generate(s));
  SyntheticSpec t = s;
  t.seed = 8;
  EXPECT_NE(generate(s).x, generate(t).x);
}

TEST(Generate, NoPrivateSignalMeansChanceAttack) {
  SyntheticSpec s = testing::reference_spec();
  s.n = 5000;
  s.sep_p = 0.0;
  s.joint = JointTable::uniform(2, 2, 2);
  const LabeledDataset ds = generate(s);
  EXPECT_NEAR(raw_attack(ds, ds.y_p, 2, true), 0.5, 0.03);
}

TEST(Generate, SeparableTaskIsLearnedLinearly) {
  SyntheticSpec s = testing::reference_spec();
  s.n = 5000;
  s.sep_y = 4.0;
  const LabeledDataset ds = generate(s);
  EXPECT_GT(raw_attack(ds, ds.y, 2, false), 0.95);
}

TEST(Generate, PureNoiseIsAtChance) {
  SyntheticSpec s;
  s.n = 4000;
  s.dim_y = s.dim_a = s.dim_p = 0;
  s.dim_noise = 6;
  s.seed = 2;
  const LabeledDataset ds = generate(s);
  EXPECT_NEAR(raw_attack(ds, ds.y, 2, false), 0.5, 0.05);
  EXPECT_NEAR(raw_attack(ds, ds.y_a, 2, true), 0.5, 0.05);
  EXPECT_NEAR(raw_attack(ds, ds.y_p, 2, true), 0.5, 0.05);
}

TEST(Generate, InvalidSpecThrows) {
  SyntheticSpec s;
  s.n = 0;
  EXPECT_THROW(generate(s), ValueError);
  s = SyntheticSpec{};
  s.dim_y = s.dim_a = s.dim_p = s.dim_noise = 0;
  EXPECT_THROW(generate(s), ValueError);
  s = SyntheticSpec{};
  s.sep_a = -1.0;
  EXPECT_THROW(generate(s), ValueError);
  s = SyntheticSpec{};
  s.dim_p = 1;  // a one-hot mean needs one column per class
  EXPECT_THROW(generate(s), ValueError);
}

TEST(GenerateProperty, LeakageIsMonotoneInSeparation) {
  double prev = 0.0;
  for (double sep : {0.0, 1.0, 2.0, 3.0, 4.0}) {
    SyntheticSpec s = testing::reference_spec();
    s.n = 5000;
    s.sep_p = sep;
    const LabeledDataset ds = generate(s);
    const double acc = raw_attack(ds, ds.y_p, 2, true);
    EXPECT_GE(acc, prev - 0.02) << "sep_p = " << sep;
    prev = acc;
  }
}

TEST(Splits, TrioBalancedTestHasEqualCells) {
  SyntheticSpec s;
  s.n = 3200;
  s.seed = 4;
  const LabeledDataset ds = generate(s);
  SplitSpec sp = testing::reference_split();
  ASSERT_EQ(std::llround(sp.test_fraction * 3200), 640);
  const Splits out = make_splits(ds, sp, 1);
  ASSERT_EQ(out.test.size(), 640u);
  std::vector<std::size_t> cells(8, 0);
  for (std::size_t i = 0; i < out.test.size(); ++i) ++cells[out.test.cell_of(i)];
  for (std::size_t c : cells) EXPECT_EQ(c, 80u);
}

TEST(Splits, TrioBalancedConstantPredictorIsChance) {
  const LabeledDataset ds = generate(testing::reference_spec());
  const Splits out = make_splits(ds, testing::reference_split(), 3);
  for (std::size_t k = 0; k < 2; ++k) {
    const std::vector<std::size_t> constant(out.test.size(), k);
    EXPECT_EQ(balanced_accuracy(constant, out.test.y_p, 2), 0.5);
    EXPECT_EQ(accuracy(constant, out.test.y_p), 0.5);
  }
}

TEST(Splits, FactorOneIsYBalancedOnly) {
  const LabeledDataset ds = generate(testing::reference_spec());
  SplitSpec sp = testing::reference_split();
  sp.undersample_factor = 1.0;
  const Splits out = make_splits(ds, sp, 5);
  std::size_t ones = 0;
  for (std::size_t y : out.train.y) ones += y;
  EXPECT_EQ(2 * ones, out.train.size());

  // Y-balancing only drops rows, never whole (y, y_a) cells.
  SplitSpec as_is = sp;
  as_is.train_mode = TrainMode::kAsIs;
  const Splits raw = make_splits(ds, as_is, 5);
  EXPECT_EQ(raw.val_rows, out.val_rows);
  EXPECT_EQ(raw.test_rows, out.test_rows);
  EXPECT_TRUE(std::includes(raw.train_rows.begin(), raw.train_rows.end(), out.train_rows.begin(),
                            out.train_rows.end()));
}

TEST(Splits, UndersampleAuditAgainstFactorOne) {
  const LabeledDataset ds = generate(testing::reference_spec());
  SplitSpec full = testing::reference_split();
  full.undersample_factor = 1.0;
  const Splits balanced = make_splits(ds, full, 5);
  const Splits under = make_splits(ds, testing::reference_split(), 5);
  const std::size_t before = count_cell(balanced.train, 1, 1);
  const std::size_t after = count_cell(under.train, 1, 1);
  EXPECT_EQ(static_cast<long long>(after), std::llround(0.25 * static_cast<double>(before)));
  for (std::size_t y = 0; y < 2; ++y)
    for (std::size_t a = 0; a < 2; ++a)
      if (y != 1 || a != 1) EXPECT_EQ(count_cell(under.train, y, a), count_cell(balanced.train, y, a));
}

TEST(SplitsProperty, DisjointSortedAndExhaustive) {
  const LabeledDataset ds = generate(testing::reference_spec());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (bool as_is : {false, true}) {
      SplitSpec sp = testing::reference_split();
      if (as_is) {
        sp.train_mode = TrainMode::kAsIs;
        sp.test_mode = TestMode::kAsIs;
      }
      const Splits out = make_splits(ds, sp, seed);
      std::set<std::size_t> all;
      for (const auto* rows : {&out.train_rows, &out.val_rows, &out.test_rows}) {
        EXPECT_TRUE(std::is_sorted(rows->begin(), rows->end()));
        all.insert(rows->begin(), rows->end());
      }
      const std::size_t total = out.train_rows.size() + out.val_rows.size() + out.test_rows.size();
      EXPECT_EQ(all.size(), total);
      if (as_is) EXPECT_EQ(total, ds.size());
      EXPECT_EQ(out.val_rows.size(), 1600u);
      EXPECT_EQ(out.train, ds.subset(out.train_rows));
      EXPECT_EQ(out.val, ds.subset(out.val_rows));
      EXPECT_EQ(out.test, ds.subset(out.test_rows));
    }
  }
}

TEST(Splits, Deterministic) {
  const LabeledDataset ds = generate(testing::reference_spec());
  const Splits a = make_splits(ds, testing::reference_split(), 2);
  const Splits b = make_splits(ds, testing::reference_split(), 2);
  EXPECT_EQ(a.train_rows, b.train_rows);
  EXPECT_EQ(a.val_rows, b.val_rows);
  EXPECT_EQ(a.test_rows, b.test_rows);
}

TEST(Splits, EmptyCellNamesTheCell) {
  SyntheticSpec s;
  s.n = 2000;
  std::fill(s.joint.probs.begin(), s.joint.probs.end(), 1.0 / 7.0);
  s.joint.at(1, 1, 0) = 0.0;
  const LabeledDataset ds = generate(s);
  try {
    make_splits(ds, testing::reference_split(), 0);
    FAIL() << "expected an error";
  } catch (const ValueError& e) {
    EXPECT_NE(std::string(e.what()).find("(y=1, y_a=1, y_p=0)"), std::string::npos) << e.what();
  }
}

TEST(Splits, InvalidSpecThrows) {
  const LabeledDataset ds = generate(SyntheticSpec{});
  SplitSpec sp;
  sp.val_fraction = 0.6;
  sp.test_fraction = 0.5;
  EXPECT_THROW(make_splits(ds, sp, 0), ValueError);
  sp = SplitSpec{};
  sp.undersample_factor = 0.0;
  EXPECT_THROW(make_splits(ds, sp, 0), ValueError);
}

TEST(Splits, ThreeClassLabels) {
  SyntheticSpec s;
  s.n = 6000;
  s.joint = JointTable::uniform(3, 2, 3);
  s.dim_y = 3;
  s.dim_p = 3;
  const LabeledDataset ds = generate(s);
  ASSERT_EQ(ds.num_y, 3u);
  const Splits out = make_splits(ds, testing::reference_split(), 0);
  std::vector<std::size_t> cells(18, 0);
  for (std::size_t i = 0; i < out.test.size(); ++i) ++cells[out.test.cell_of(i)];
  for (std::size_t c : cells) EXPECT_EQ(c, 1200u / 18u);
  EXPECT_EQ(count_cell(out.train, 0, 0) + count_cell(out.train, 0, 1),
            count_cell(out.train, 1, 0) + count_cell(out.train, 1, 1));
}

TEST(Csv, RoundTripIsExact) {
  SyntheticSpec s = testing::reference_spec();
  s.n = 50;
  const LabeledDataset ds = generate(s);
  std::stringstream buf;
  write_csv(ds, buf);
  const LabeledDataset back = read_csv(buf);
  EXPECT_EQ(back, ds);
}

TEST(Csv, FileRoundTrip) {
  SyntheticSpec s = testing::reference_spec();
  s.n = 20;
  const LabeledDataset ds = generate(s);
  const fs::path path = fs::temp_directory_path() / "fairpriv_data_test.csv";
  save_csv(ds, path);
  EXPECT_EQ(load_csv(path), ds);
  fs::remove(path);
}

TEST(Csv, MissingPrivateColumnIsParseError) {
  std::istringstream in("x0,x1,y,y_a\n1,2,0,1\n");
  EXPECT_THROW(read_csv(in), ParseError);
}

TEST(Csv, NonNumericCellReportsLine) {
  std::istringstream in("x0,x1,y,y_a,y_p\n1,2,0,1,0\n1,abc,1,0,1\n");
  try {
    read_csv(in);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Csv, LoadErrorKeepsPathAndLine) {
  const fs::path path = fs::temp_directory_path() / "fairpriv_bad.csv";
  {
    std::ofstream os(path);
    os << "x0,y,y_a,y_p\n0.5,0,1,1\n0.5,0,1\n";
  }
  try {
    load_csv(path);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find(path.string()), std::string::npos) << e.what();
  }
  fs::remove(path);
}

TEST(Csv, RejectsNegativeLabel) {
  std::istringstream in("x0,y,y_a,y_p\n0.5,-1,0,1\n");
  EXPECT_THROW(read_csv(in), ParseError);
}

TEST(Csv, InfersClassCounts) {
  std::istringstream in("x0,y,y_a,y_p\n0.5,2,0,1\n0.1,0,1,0\n");
  const LabeledDataset ds = read_csv(in);
  EXPECT_EQ(ds.num_y, 3u);
  EXPECT_EQ(ds.num_a, 2u);
  EXPECT_EQ(ds.num_p, 2u);
}

}  // namespace
}  // namespace fairpriv
