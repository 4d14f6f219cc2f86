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

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace fairpriv {
namespace {

using testing::finite_difference;
using testing::max_rel_error;

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.data()) v = d(rng);
  return m;
}

TEST(Matrix, RejectsMismatchedData) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
  EXPECT_THROW((Matrix{{1, 2}, {3}}), ShapeError);
}

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  const Matrix m{{1, 2}, {3, 4}};
  EXPECT_EQ(matmul(Matrix::identity(2), m), m);
}

TEST(Matmul, RowTimesColumn) {
  const Matrix out = matmul(Matrix{{1, 2}}, Matrix{{3}, {4}});
  ASSERT_EQ(out.rows(), 1u);
  ASSERT_EQ(out.cols(), 1u);
  EXPECT_EQ(out(0, 0), 11.0);
}

TEST(Matmul, MatchesTripleLoop) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(5, 7, rng);
    const Matrix b = random_matrix(7, 3, rng);
    const Matrix got = matmul(a, b);
    const Matrix want = testing::naive_matmul(a, b);
    for (std::size_t k = 0; k < got.size(); ++k) EXPECT_NEAR(got.data()[k], want.data()[k], 1e-12);
  }
}

TEST(Matmul, DimensionMismatchThrows) {
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
}

TEST(Matmul, RecordedOnTape) {
  Tape tape;
  const NodeId a = tape.constant(Matrix{{1, 2}});
  const NodeId b = tape.constant(Matrix{{3}, {4}});
  const NodeId c = tape.matmul(a, b);
  EXPECT_EQ(tape.scalar(c), 11.0);
  EXPECT_EQ(tape.size(), 3u);
}

TEST(Relu, ClampsNegatives) {
  EXPECT_EQ(relu(Matrix{{-1, 0, 2}}), (Matrix{{0, 0, 2}}));
  const Matrix pos{{0.5, 1, 7}};
  EXPECT_EQ(relu(pos), pos);
}

TEST(Relu, GradientIsIndicatorOfPositiveInput) {
  Tape tape;
  const NodeId x = tape.parameter(Matrix{{-0.5, 0.5}});
  const Gradients g = tape.backward(tape.sum(tape.relu(x)));
  EXPECT_EQ(g[x](0, 0), 0.0);
  EXPECT_EQ(g[x](0, 1), 1.0);
}

TEST(CrossEntropy, UniformBinaryIsLn2) {
  const std::vector<std::size_t> t{0, 1, 1};
  EXPECT_NEAR(softmax_cross_entropy(Matrix(3, 2), t), std::log(2.0), 1e-12);
}

TEST(CrossEntropy, UniformTernaryIsLn3) {
  const std::vector<std::size_t> t{2, 0};
  EXPECT_NEAR(softmax_cross_entropy(Matrix(2, 3), t), std::log(3.0), 1e-12);
}

TEST(CrossEntropy, ZeroTotalWeightThrows) {
  const std::vector<std::size_t> t{1, 1};
  const std::vector<double> w{1.0, 0.0};
  EXPECT_THROW(weighted_softmax_cross_entropy(Matrix(2, 2), t, w), ValueError);
}

TEST(CrossEntropy, RejectsBadInputs) {
  const std::vector<double> w{1.0, 1.0};
  const std::vector<std::size_t> none;
  EXPECT_THROW(weighted_softmax_cross_entropy(Matrix(0, 2), none, w), ValueError);
  const std::vector<std::size_t> out_of_range{2};
  EXPECT_THROW(weighted_softmax_cross_entropy(Matrix(1, 2), out_of_range, w), ValueError);
  const std::vector<std::size_t> one{0};
  const std::vector<double> negative{1.0, -1.0};
  EXPECT_THROW(weighted_softmax_cross_entropy(Matrix(1, 2), one, negative), ValueError);
  const std::vector<double> short_w{1.0};
  EXPECT_THROW(weighted_softmax_cross_entropy(Matrix(1, 2), one, short_w), Error);
}

TEST(CrossEntropy, NormalizesByTotalWeight) {
  const Matrix logits{{2.0, 0.0}, {0.0, 1.0}};
  const std::vector<std::size_t> t{0, 1};
  const std::vector<double> w{3.0, 1.0};
  const double l0 = std::log(1.0 + std::exp(-2.0));
  const double l1 = std::log(1.0 + std::exp(-1.0));
  EXPECT_NEAR(weighted_softmax_cross_entropy(logits, t, w), (3.0 * l0 + l1) / 4.0, 1e-14);
}

TEST(CrossEntropy, StableOnConfidentLogits) {
  const std::vector<std::size_t> t{0};
  EXPECT_NEAR(softmax_cross_entropy(Matrix{{1000.0, 0.0}}, t), 0.0, 1e-12);
  EXPECT_NEAR(softmax_cross_entropy(Matrix{{0.0, 1000.0}}, t), 1000.0, 1e-9);
}

TEST(CrossEntropyProperty, UnitWeightsEqualUnweighted) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix logits = random_matrix(6, 4, rng);
    std::vector<std::size_t> t(6);
    for (auto& v : t) v = rng() % 4;
    const std::vector<double> ones(4, 1.0);
    EXPECT_EQ(weighted_softmax_cross_entropy(logits, t, ones), softmax_cross_entropy(logits, t));
  }
}

TEST(CrossEntropyProperty, ShiftInvariantPerRow) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> shift(-50.0, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix logits = random_matrix(5, 3, rng);
    std::vector<std::size_t> t(5);
    for (auto& v : t) v = rng() % 3;
    const std::vector<double> w{0.5, 1.0, 2.0};
    const double base = weighted_softmax_cross_entropy(logits, t, w);
    for (std::size_t i = 0; i < logits.rows(); ++i) {
      const double c = shift(rng);
      for (double& v : logits.row(i)) v += c;
    }
    EXPECT_NEAR(weighted_softmax_cross_entropy(logits, t, w), base, 1e-9);
  }
}

TEST(InverseFrequencyWeights, BalancesClassMass) {
  const std::vector<std::size_t> labels{0, 0, 0, 1};
  const auto w = inverse_frequency_weights(labels, 2);
  EXPECT_DOUBLE_EQ(w[0], 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(w[1], 2.0);
  const std::vector<std::size_t> missing{0, 0};
  EXPECT_THROW(inverse_frequency_weights(missing, 2), ValueError);
}

TEST(Backward, SumOfProductMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  Matrix w = random_matrix(3, 4, rng);
  const Matrix x = random_matrix(4, 2, rng);
  Tape tape;
  const NodeId wid = tape.parameter(w);
  const Gradients g = tape.backward(tape.sum(tape.matmul(wid, tape.constant(x))));
  const Matrix fd = finite_difference(w, [&] {
    const Matrix prod = testing::naive_matmul(w, x);
    double s = 0.0;
    for (double v : prod.data()) s += v;
    return s;
  });
  EXPECT_LT(max_rel_error(g[wid], fd), 1e-6);
  // dL/dW[i][k] is the k-th row sum of x, the same for every i.
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(g[wid](i, k), x(k, 0) + x(k, 1), 1e-14);
}

TEST(Backward, ConstantLossGivesZeroGradients) {
  Tape tape;
  const NodeId p = tape.parameter(Matrix{{1.0, 2.0}});
  const NodeId loss = tape.sum(tape.constant(Matrix{{3.0, 4.0}}));
  const Gradients g = tape.backward(loss);
  EXPECT_EQ(g[p], Matrix(1, 2));
}

TEST(Backward, NonScalarLossThrows) {
  Tape tape;
  const NodeId p = tape.parameter(Matrix{{1.0, 2.0}});
  EXPECT_THROW(tape.backward(p), ShapeError);
}

TEST(Backward, TwoLayerMlpWeightedCeMatchesFiniteDifferences) {
  std::mt19937_64 rng(13);
  Mlp net = mlp_init({5, 8, 3}, 21);
  const Matrix x = random_matrix(6, 5, rng);
  const std::vector<std::size_t> t{0, 1, 2, 2, 1, 0};
  const std::vector<double> w{0.7, 1.3, 2.0};
  Tape tape;
  std::vector<NodeId> ids;
  const NodeId loss = tape.weighted_cross_entropy(net.forward(tape, tape.constant(x), &ids), t, w);
  EXPECT_NEAR(tape.scalar(loss), testing::naive_mlp_ce(net, x, t, w), 1e-12);
  const Gradients g = tape.backward(loss);
  ASSERT_EQ(ids.size(), 4u);
  for (std::size_t p = 0; p < ids.size(); ++p) {
    const Matrix fd =
        finite_difference(net.parameters()[p], [&] { return testing::naive_mlp_ce(net, x, t, w); });
    EXPECT_LT(max_rel_error(g[ids[p]], fd), 1e-5) << "parameter " << p;
  }
}

TEST(Backward, ConcatAndLinearCombinationMatchFiniteDifferences) {
  std::mt19937_64 rng(17);
  Matrix a = random_matrix(3, 2, rng);
  Matrix b = random_matrix(3, 3, rng);
  const Matrix w = random_matrix(5, 2, rng);
  const std::vector<std::size_t> t{0, 1, 1};
  auto forward = [&](Tape& tape, NodeId* ia, NodeId* ib) {
    *ia = tape.parameter(a);
    *ib = tape.parameter(b);
    const NodeId cat = tape.concat_cols(*ia, *ib);
    const NodeId ce = tape.cross_entropy(tape.matmul(cat, tape.constant(w)), t);
    const NodeId s = tape.sum(tape.relu(*ib));
    const std::vector<double> coeffs{1.0, -0.7};
    const std::vector<NodeId> terms{ce, s};
    return tape.linear_combination(coeffs, terms);
  };
  Tape tape;
  NodeId ia, ib;
  const Gradients g = tape.backward(forward(tape, &ia, &ib));
  auto value = [&] {
    Tape t2;
    NodeId x, y;
    return t2.scalar(forward(t2, &x, &y));
  };
  EXPECT_LT(max_rel_error(g[ia], finite_difference(a, value)), 1e-5);
  EXPECT_LT(max_rel_error(g[ib], finite_difference(b, value)), 1e-5);
}

TEST(BackwardProperty, RandomMlpsMatchFiniteDifferences) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) EXPECT_LT(testing::mlp_gradient_check(rng), 1e-5) << "trial " << trial;
}

TEST(Tape, NonFiniteValueThrows) {
  Tape tape;
  const NodeId a = tape.constant(Matrix{{std::numeric_limits<double>::max()}});
  const NodeId b = tape.constant(Matrix{{10.0}});
  EXPECT_THROW(tape.matmul(a, b), NumericError);
}

TEST(Adam, ZeroGradientLeavesParametersAndAdvancesStep) {
  std::vector<Matrix> params{Matrix{{1.0, -2.0}}, Matrix{{3.0}}};
  const std::vector<Matrix> before = params;
  AdamState state(params, 0.01);
  const std::vector<Matrix> grads{Matrix(1, 2), Matrix(1, 1)};
  adam_step(params, grads, state);
  EXPECT_EQ(params, before);
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // m_hat = g and v_hat = g^2 after one step, so the update is lr * g / (|g| + eps).
  for (double g : {0.3, -5.0, 1e-2}) {
    std::vector<Matrix> params{Matrix{{1.0}}};
    AdamState state(params, 0.05);
    const std::vector<Matrix> grads{Matrix{{g}}};
    adam_step(params, grads, state);
    const double expected = 1.0 - 0.05 * g / (std::abs(g) + state.eps);
    EXPECT_NEAR(params[0](0, 0), expected, 1e-15);
    EXPECT_NEAR(std::abs(params[0](0, 0) - 1.0), 0.05, 1e-6);
  }
}

TEST(Adam, Deterministic) {
  std::mt19937_64 rng(9);
  std::vector<Matrix> p1{random_matrix(3, 3, rng)};
  std::vector<Matrix> p2 = p1;
  AdamState s1(p1, 0.01), s2(p2, 0.01);
  for (int step = 0; step < 5; ++step) {
    const std::vector<Matrix> g{random_matrix(3, 3, rng)};
    adam_step(p1, g, s1);
    adam_step(p2, g, s2);
  }
  EXPECT_EQ(p1, p2);
  EXPECT_EQ(s1, s2);
}

TEST(Adam, ShapeMismatchThrows) {
  std::vector<Matrix> params{Matrix(2, 2)};
  AdamState state(params, 0.01);
  const std::vector<Matrix> grads{Matrix(2, 3)};
  EXPECT_THROW(adam_step(params, grads, state), ShapeError);
}

TEST(MlpInit, SameSeedSameWeights) {
  EXPECT_EQ(mlp_init({4, 8, 2}, 5), mlp_init({4, 8, 2}, 5));
  EXPECT_NE(mlp_init({4, 8, 2}, 5), mlp_init({4, 8, 2}, 6));
}

TEST(MlpInit, ShapesAndZeroBiases) {
  const Mlp net = mlp_init({4, 8, 2}, 1);
  ASSERT_EQ(net.num_layers(), 2u);
  EXPECT_EQ(net.weight(0).rows(), 4u);
  EXPECT_EQ(net.weight(0).cols(), 8u);
  EXPECT_EQ(net.weight(1).rows(), 8u);
  EXPECT_EQ(net.weight(1).cols(), 2u);
  EXPECT_EQ(net.bias(0), Matrix(1, 8));
  EXPECT_EQ(net.bias(1), Matrix(1, 2));
}

TEST(MlpInit, FanInScaledVariance) {
  const Mlp net = mlp_init({200, 300}, 3);
  double ss = 0.0;
  for (double v : net.weight(0).data()) ss += v * v;
  const double var = ss / static_cast<double>(net.weight(0).size());
  EXPECT_NEAR(var, 2.0 / 200.0, 0.1 * 2.0 / 200.0);
}

TEST(MlpInit, OutputScaleShrinksOnlyTheLastLayer) {
  const Mlp plain = mlp_init({4, 8, 2}, 5);
  const Mlp scaled = mlp_init({4, 8, 2}, 5, 0.1);
  EXPECT_EQ(scaled.weight(0), plain.weight(0));
  for (std::size_t k = 0; k < plain.weight(1).size(); ++k)
    EXPECT_NEAR(scaled.weight(1).data()[k], 0.1 * plain.weight(1).data()[k], 1e-15);
  EXPECT_THROW(mlp_init({4, 2}, 0, 0.0), ValueError);
}

TEST(MlpInit, InvalidSizesThrow) {
  EXPECT_THROW(mlp_init({4}, 0), ValueError);
  EXPECT_THROW(mlp_init({4, 0, 2}, 0), ValueError);
}

TEST(Mlp, ForwardIsDeterministicAndMatchesTape) {
  std::mt19937_64 rng(4);
  const Mlp net = mlp_init({3, 5, 5, 2}, 8);
  const Matrix x = random_matrix(4, 3, rng);
  const Matrix y1 = net.forward(x);
  EXPECT_EQ(y1, net.forward(x));
  Tape tape;
  EXPECT_EQ(tape.value(net.forward(tape, tape.constant(x), nullptr)), y1);
}

TEST(Mlp, WrongInputWidthThrows) {
  const Mlp net = mlp_init({3, 2}, 0);
  EXPECT_THROW(net.forward(Matrix(1, 4)), ShapeError);
}

}  // namespace
}  // namespace fairpriv
