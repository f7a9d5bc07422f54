#include "anselect/trainer.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

using namespace anselect;
using testutil::make_separable_set;
using testutil::make_table;

namespace {

bool theta_bitwise_equal(const ModelTheta& a, const ModelTheta& b) {
  if (a.is_bigram() != b.is_bigram() || a.dim() != b.dim()) return false;
  auto eq = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() &&
           std::memcmp(x.data(), y.data(),
                       sizeof(double) * static_cast<std::size_t>(x.size())) ==
               0;
  };
  if (!eq(a.matcher.m, b.matcher.m) || a.matcher.bias != b.matcher.bias) {
    return false;
  }
  if (a.bigram) {
    if (!eq(a.bigram->t_left, b.bigram->t_left) ||
        !eq(a.bigram->t_right, b.bigram->t_right)) {
      return false;
    }
    if (std::memcmp(a.bigram->bias.data(), b.bigram->bias.data(),
                    sizeof(double) *
                        static_cast<std::size_t>(a.bigram->bias.size())) != 0) {
      return false;
    }
  }
  return true;
}

TrainConfig overfit_config() {
  TrainConfig config;
  config.model_kind = ModelKind::unigram;
  config.learning_rate = 0.2;
  config.lambda = 0.0;
  config.epochs = 200;
  config.batch_size = 10;
  config.seed = 7;
  return config;
}

}  // namespace

TEST(InitParams, SameSeedGivesBitwiseIdenticalTheta) {
  ModelTheta a = init_params(10, ModelKind::bigram, 42);
  ModelTheta b = init_params(10, ModelKind::bigram, 42);
  EXPECT_TRUE(theta_bitwise_equal(a, b));
  ModelTheta c = init_params(10, ModelKind::bigram, 43);
  EXPECT_FALSE(theta_bitwise_equal(a, c));
}

TEST(InitParams, BigramParameterCountAtDimFifty) {
  ModelTheta theta = init_params(50, ModelKind::bigram, 1);
  EXPECT_EQ(parameter_count(theta), 7551u);
  ModelTheta unigram = init_params(50, ModelKind::unigram, 1);
  EXPECT_EQ(parameter_count(unigram), 2501u);
}

TEST(InitParams, GaussianMomentsOverAMillionEntries) {
  // 3 * 577^2 + 577 + 1 = 999365 parameter entries.
  ModelTheta theta = init_params(577, ModelKind::bigram, 31);
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
  auto absorb = [&](const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      sum += m.data()[i];
      sum_sq += m.data()[i] * m.data()[i];
      count += 1;
    }
  };
  absorb(theta.matcher.m);
  absorb(theta.bigram->t_left);
  absorb(theta.bigram->t_right);
  absorb(theta.bigram->bias);
  sum += theta.matcher.bias;
  sum_sq += theta.matcher.bias * theta.matcher.bias;
  count += 1;

  const double mean = sum / static_cast<double>(count);
  const double stddev =
      std::sqrt(sum_sq / static_cast<double>(count) - mean * mean);
  EXPECT_LT(std::abs(mean), 1e-3);
  EXPECT_NEAR(stddev, 0.01, 0.01 * 0.05);
}

TEST(InitParams, NonPositiveDimThrows) {
  EXPECT_THROW(init_params(0, ModelKind::unigram, 1), std::invalid_argument);
}

TEST(AdaGrad, FirstStepMagnitudeIsExactlyEta) {
  ModelTheta theta;
  theta.matcher.m = Eigen::MatrixXd::Zero(1, 1);
  theta.matcher.bias = 0.0;
  ThetaGradients grads = zero_gradients(theta);
  grads.matcher.m(0, 0) = 3.0;
  grads.matcher.bias = -3.0;
  AdaGradState state = make_adagrad_state(theta);

  adagrad_step(theta, grads, state, 0.1, 0.0);
  EXPECT_DOUBLE_EQ(theta.matcher.m(0, 0), -0.1);
  EXPECT_DOUBLE_EQ(theta.matcher.bias, 0.1);
  EXPECT_DOUBLE_EQ(state.accumulators.matcher.m(0, 0), 9.0);
}

TEST(AdaGrad, SecondStepUsesAccumulatedSquares) {
  ModelTheta theta;
  theta.matcher.m = Eigen::MatrixXd::Zero(1, 1);
  theta.matcher.bias = 0.0;
  ThetaGradients grads = zero_gradients(theta);
  grads.matcher.m(0, 0) = 3.0;
  AdaGradState state = make_adagrad_state(theta);

  adagrad_step(theta, grads, state, 0.1, 0.0);
  const double after_first = theta.matcher.m(0, 0);
  adagrad_step(theta, grads, state, 0.1, 0.0);
  const double second_update = theta.matcher.m(0, 0) - after_first;
  EXPECT_NEAR(std::abs(second_update), 0.07071, 1e-5);
  EXPECT_DOUBLE_EQ(second_update, -0.1 * (3.0 / std::sqrt(18.0)));
}

TEST(AdaGrad, ZeroGradientLeavesEverythingUnchanged) {
  ModelTheta theta = init_params(3, ModelKind::unigram, 5);
  ModelTheta before = theta;
  ThetaGradients grads = zero_gradients(theta);
  AdaGradState state = make_adagrad_state(theta);
  adagrad_step(theta, grads, state, 0.5, 0.0);
  EXPECT_TRUE(theta_bitwise_equal(theta, before));
  EXPECT_EQ(state.accumulators.matcher.m.norm(), 0.0);
}

TEST(AdaGrad, AccumulatorsAreNondecreasing) {
  ModelTheta theta = init_params(2, ModelKind::bigram, 9);
  AdaGradState state = make_adagrad_state(theta);
  Rng rng(88);
  double previous = 0.0;
  for (int step = 0; step < 50; ++step) {
    ThetaGradients grads = zero_gradients(theta);
    for (Eigen::Index i = 0; i < grads.matcher.m.size(); ++i) {
      grads.matcher.m.data()[i] = rng.gaussian();
    }
    grads.matcher.bias = rng.gaussian();
    adagrad_step(theta, grads, state, 0.01, 1e-8);
    double total = state.accumulators.matcher.m.sum() +
                   state.accumulators.matcher.bias;
    EXPECT_GE(total, previous);
    previous = total;
  }
}

TEST(AdaGrad, ShapeMismatchThrows) {
  ModelTheta theta = init_params(3, ModelKind::unigram, 5);
  AdaGradState state = make_adagrad_state(theta);
  ModelTheta wrong = init_params(4, ModelKind::unigram, 5);
  ThetaGradients grads = zero_gradients(wrong);
  EXPECT_THROW(adagrad_step(theta, grads, state, 0.1, 0.0),
               std::invalid_argument);

  ThetaGradients bigram_grads = zero_gradients(init_params(3, ModelKind::bigram, 5));
  EXPECT_THROW(adagrad_step(theta, bigram_grads, state, 0.1, 0.0),
               std::invalid_argument);
}

TEST(Train, ZeroLearningRateIsAFixedPoint) {
  auto set = make_separable_set();
  TrainConfig config = overfit_config();
  config.learning_rate = 0.0;
  config.epochs = 3;
  TrainResult result = train(set.groups, set.groups, set.table, config);
  ModelTheta init = init_params(set.table.dim, config.model_kind, config.seed);
  EXPECT_TRUE(theta_bitwise_equal(result.final_theta, init));
}

TEST(Train, OverfitsTheSeparableSet) {
  auto set = make_separable_set();
  TrainConfig config = overfit_config();
  TrainResult result = train(set.groups, set.groups, set.table, config);
  ASSERT_EQ(result.trace.size(), 200u);
  EXPECT_LT(result.trace.back().train_loss, 0.05);
  EXPECT_EQ(testutil::classification_accuracy(set.groups, result.final_theta,
                                              set.table, builtin_stopwords()),
            1.0);
  EXPECT_EQ(result.best_dev_map, 1.0);
}

TEST(Train, DeterministicGivenSeed) {
  auto set = make_separable_set();
  TrainConfig config = overfit_config();
  config.epochs = 12;
  TrainResult a = train(set.groups, set.groups, set.table, config);
  TrainResult b = train(set.groups, set.groups, set.table, config);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].train_loss, b.trace[i].train_loss);
    EXPECT_EQ(a.trace[i].dev_map, b.trace[i].dev_map);
    EXPECT_EQ(a.trace[i].dev_mrr, b.trace[i].dev_mrr);
  }
  EXPECT_TRUE(theta_bitwise_equal(a.theta, b.theta));
  EXPECT_TRUE(theta_bitwise_equal(a.final_theta, b.final_theta));
}

TEST(Train, BigramModelAlsoLearnsTheSeparableSet) {
  auto set = make_separable_set();
  TrainConfig config = overfit_config();
  config.model_kind = ModelKind::bigram;
  config.learning_rate = 0.1;
  config.epochs = 60;
  TrainResult result = train(set.groups, set.groups, set.table, config);
  EXPECT_EQ(result.best_dev_map, 1.0);
}

TEST(Train, EmptyTrainingSetThrows) {
  auto set = make_separable_set();
  EXPECT_THROW(train({}, set.groups, set.table, overfit_config()),
               std::invalid_argument);
  EXPECT_THROW(train(set.groups, {}, set.table, overfit_config()),
               std::invalid_argument);
}

TEST(Train, NonFiniteLossAbortsWithDiagnostic) {
  auto set = make_separable_set();
  TrainConfig config = overfit_config();
  config.lambda = 1.0;
  config.learning_rate = 1e160;
  config.epochs = 3;
  try {
    train(set.groups, set.groups, set.table, config);
    FAIL() << "expected divergence";
  } catch (const std::runtime_error& err) {
    EXPECT_NE(std::string(err.what()).find("learning rate"),
              std::string::npos)
        << err.what();
  }
}

TEST(GridSearch, SingletonGridReturnsThatConfig) {
  auto set = make_separable_set();
  TrainConfig config = overfit_config();
  config.epochs = 5;
  GridResult result = grid_search({config}, set.groups, set.groups, set.table);
  EXPECT_EQ(result.table.size(), 1u);
  EXPECT_EQ(result.best_config.learning_rate, config.learning_rate);
  EXPECT_TRUE(result.table[0].ok());
}

TEST(GridSearch, NonNullLearningRateWinsOnSeparableData) {
  auto set = make_separable_set();
  TrainConfig null_config = overfit_config();
  null_config.learning_rate = 0.0;
  null_config.epochs = 20;
  TrainConfig live_config = overfit_config();
  live_config.epochs = 20;
  GridResult result = grid_search({null_config, live_config}, set.groups,
                                  set.groups, set.table);
  EXPECT_EQ(result.table.size(), 2u);
  EXPECT_EQ(result.best_config.learning_rate, live_config.learning_rate);
  EXPECT_GT(result.table[1].dev_map, result.table[0].dev_map);
}

TEST(GridSearch, RecordsFailedCellsAndContinues) {
  auto set = make_separable_set();
  TrainConfig bad = overfit_config();
  bad.lambda = -1.0;  // rejected by validation inside train()
  TrainConfig good = overfit_config();
  good.epochs = 5;
  GridResult result =
      grid_search({bad, good}, set.groups, set.groups, set.table);
  ASSERT_EQ(result.table.size(), 2u);
  EXPECT_FALSE(result.table[0].ok());
  EXPECT_FALSE(result.table[0].error.empty());
  EXPECT_TRUE(result.table[1].ok());
  EXPECT_EQ(result.best_config.epochs, 5);
}

TEST(GridSearch, EmptyGridThrows) {
  auto set = make_separable_set();
  EXPECT_THROW(grid_search({}, set.groups, set.groups, set.table),
               std::invalid_argument);
}

TEST(GridSearch, AllCellsFailingThrows) {
  auto set = make_separable_set();
  TrainConfig bad = overfit_config();
  bad.lambda = -1.0;
  EXPECT_THROW(grid_search({bad}, set.groups, set.groups, set.table),
               std::runtime_error);
}

TEST(TrainConfig, ValidatesPositivityConstraints) {
  TrainConfig config;
  config.learning_rate = -0.1;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config = TrainConfig{};
  config.epochs = 0;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config = TrainConfig{};
  config.batch_size = 0;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config = TrainConfig{};
  config.adagrad_epsilon = 0.0;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config = TrainConfig{};
  EXPECT_NO_THROW(config.validate());
}
