#include "anselect/encoders.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstring>

using namespace anselect;
using testutil::make_table;
using testutil::relative_error;

namespace {

BigramParams random_bigram(int dim, std::uint64_t seed, double scale = 0.3) {
  Rng rng(seed);
  BigramParams params;
  params.t_left.resize(dim, dim);
  params.t_right.resize(dim, dim);
  params.bias.resize(dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      params.t_left(r, c) = scale * rng.gaussian();
      params.t_right(r, c) = scale * rng.gaussian();
    }
  }
  for (int d = 0; d < dim; ++d) params.bias(d) = scale * rng.gaussian();
  return params;
}

bool bitwise_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(),
                     sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST(EncodeUnigram, SingleTokenIsItsVector) {
  EmbeddingTable table = make_table({"apple"}, 6, 11);
  Eigen::VectorXd encoded = encode_unigram({"apple"}, table, {});
  EXPECT_TRUE(bitwise_equal(encoded, lookup(table, "apple")));
}

TEST(EncodeUnigram, TwoTokensAverage) {
  EmbeddingTable table = make_table({"u", "v"}, 4, 3);
  Eigen::VectorXd expected =
      (lookup(table, "u") + lookup(table, "v")) / 2.0;
  Eigen::VectorXd encoded = encode_unigram({"u", "v"}, table, {});
  for (int d = 0; d < 4; ++d) EXPECT_DOUBLE_EQ(encoded(d), expected(d));
}

TEST(EncodeUnigram, AmtrakQuestionMatchesHandSum) {
  EmbeddingTable table =
      make_table({"when", "did", "amtrak", "begin", "operations"}, 5, 21);
  auto tokens = tokenize("When did Amtrak begin operations?");
  Eigen::VectorXd encoded =
      encode_unigram(tokens, table, builtin_stopwords());

  // Hand-summed oracle: "when" and "did" are stopwords, three tokens remain.
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(5);
  for (const char* word : {"amtrak", "begin", "operations"}) {
    sum += lookup(table, word);
  }
  Eigen::VectorXd expected = sum / 3.0;
  for (int d = 0; d < 5; ++d) EXPECT_NEAR(encoded(d), expected(d), 1e-12);
}

TEST(EncodeUnigram, PermutationInvariantBitwise) {
  EmbeddingTable table = make_table({"a0", "a1", "a2", "a3"}, 7, 5);
  std::vector<std::string> tokens = {"a2", "oov1", "a0", "a2",
                                     "a3", "oov2", "a1"};
  Eigen::VectorXd reference = encode_unigram(tokens, table, {});
  Rng rng(17);
  for (int round = 0; round < 30; ++round) {
    rng.shuffle(tokens);
    EXPECT_TRUE(bitwise_equal(encode_unigram(tokens, table, {}), reference));
  }
}

TEST(EncodeUnigram, DuplicatingEveryTokenIsANoOp) {
  EmbeddingTable table = make_table({"a0", "a1", "a2"}, 5, 9);
  std::vector<std::string> tokens = {"a0", "a1", "a2", "a1", "oov"};
  std::vector<std::string> doubled = tokens;
  doubled.insert(doubled.end(), tokens.begin(), tokens.end());
  EXPECT_TRUE(bitwise_equal(encode_unigram(doubled, table, {}),
                            encode_unigram(tokens, table, {})));
}

TEST(EncodeUnigram, AllStopwordsFallsBackToUnfilteredAverage) {
  EmbeddingTable table = make_table({"the", "of"}, 3, 2);
  StopwordSet stoplist = {"the", "of"};
  Eigen::VectorXd encoded = encode_unigram({"the", "of"}, table, stoplist);
  Eigen::VectorXd expected =
      (lookup(table, "the") + lookup(table, "of")) / 2.0;
  for (int d = 0; d < 3; ++d) EXPECT_DOUBLE_EQ(encoded(d), expected(d));
}

TEST(EncodeUnigram, EmptyTokenListThrows) {
  EmbeddingTable table = make_table({"x"}, 3, 2);
  EXPECT_THROW(encode_unigram({}, table, {}), std::invalid_argument);
}

TEST(EncodeBigram, ZeroParametersGiveZeroVector) {
  EmbeddingTable table = make_table({"w1", "w2", "w3"}, 4, 8);
  BigramParams params{Eigen::MatrixXd::Zero(4, 4), Eigen::MatrixXd::Zero(4, 4),
                      Eigen::VectorXd::Zero(4)};
  Eigen::VectorXd encoded = encode_bigram({"w1", "w2", "w3"}, params, table);
  for (int d = 0; d < 4; ++d) EXPECT_EQ(encoded(d), 0.0);
}

TEST(EncodeBigram, HandEvaluatedScalarCase) {
  EmbeddingTable table;
  table.dim = 1;
  table.vocab = {{"first", 0}, {"second", 1}};
  table.vectors.resize(2, 1);
  table.vectors << 0.3, 0.2;
  table.unknown_vector = Eigen::VectorXd::Zero(1);

  BigramParams params{Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1),
                      Eigen::VectorXd::Zero(1)};
  Eigen::VectorXd encoded = encode_bigram({"first", "second"}, params, table);
  EXPECT_NEAR(encoded(0), 0.46212, 1e-5);
  EXPECT_DOUBLE_EQ(encoded(0), std::tanh(0.5));
}

TEST(EncodeBigram, SensitiveToWordOrder) {
  EmbeddingTable table = make_table({"w1", "w2", "w3", "w4"}, 4, 14);
  BigramParams params = random_bigram(4, 31);
  Eigen::VectorXd forward =
      encode_bigram({"w1", "w2", "w3", "w4"}, params, table);
  Eigen::VectorXd reversed =
      encode_bigram({"w4", "w3", "w2", "w1"}, params, table);
  EXPECT_GT((forward - reversed).norm(), 1e-8);
}

TEST(EncodeBigram, SingleTokenIsPaddedWithUnknown) {
  EmbeddingTable table = make_table({"solo"}, 3, 6);
  BigramParams params = random_bigram(3, 7);
  Eigen::VectorXd encoded = encode_bigram({"solo"}, params, table);

  Eigen::MatrixXd padded(3, 2);
  padded.col(0) = lookup(table, "solo");
  padded.col(1) = table.unknown_vector;
  Eigen::VectorXd expected = encode_bigram_embedded(padded, params);
  EXPECT_TRUE(bitwise_equal(encoded, expected));
}

TEST(EncodeBigram, PooledOutputWithinUnitInterval) {
  EmbeddingTable table = make_table({"w1", "w2", "w3", "w4", "w5"}, 6, 77);
  Rng rng(123);
  for (int round = 0; round < 20; ++round) {
    BigramParams params = random_bigram(6, 1000 + round, 3.0);
    std::vector<std::string> tokens;
    const int n = 1 + static_cast<int>(rng.bounded(5));
    for (int i = 0; i < n; ++i) {
      tokens.push_back("w" + std::to_string(1 + rng.bounded(5)));
    }
    Eigen::VectorXd encoded = encode_bigram(tokens, params, table);
    for (int d = 0; d < 6; ++d) {
      EXPECT_GE(encoded(d), -1.0);
      EXPECT_LE(encoded(d), 1.0);
    }
  }
}

TEST(EncodeBigram, PrePoolingCoordinatesStrictlyInsideUnitInterval) {
  // One bigram, so the pooled output equals one tanh column. Strict
  // containment holds away from the regime where tanh saturates to +-1 in
  // double precision (|z| >= ~19).
  EmbeddingTable table = make_table({"w1", "w2"}, 2, 4);
  for (int round = 0; round < 10; ++round) {
    BigramParams params = random_bigram(2, 100 + round, 2.0);
    Eigen::VectorXd encoded = encode_bigram({"w1", "w2"}, params, table);
    for (int d = 0; d < 2; ++d) {
      EXPECT_GT(encoded(d), -1.0);
      EXPECT_LT(encoded(d), 1.0);
    }
  }
}

TEST(EncodeBigram, EmptyTokenListThrows) {
  EmbeddingTable table = make_table({"x"}, 2, 2);
  BigramParams params = random_bigram(2, 3);
  EXPECT_THROW(encode_bigram({}, params, table), std::invalid_argument);
  EXPECT_THROW(encode_bigram_backward({}, params, table,
                                      Eigen::VectorXd::Zero(2)),
               std::invalid_argument);
}

TEST(BigramBackward, ZeroUpstreamGivesZeroGradients) {
  EmbeddingTable table = make_table({"w1", "w2", "w3"}, 4, 19);
  BigramParams params = random_bigram(4, 23);
  BigramParams grads = encode_bigram_backward(
      {"w1", "w2", "w3"}, params, table, Eigen::VectorXd::Zero(4));
  EXPECT_EQ(grads.t_left.norm(), 0.0);
  EXPECT_EQ(grads.t_right.norm(), 0.0);
  EXPECT_EQ(grads.bias.norm(), 0.0);
}

TEST(BigramBackward, HandEvaluatedScalarCase) {
  EmbeddingTable table;
  table.dim = 1;
  table.vocab = {{"first", 0}, {"second", 1}};
  table.vectors.resize(2, 1);
  table.vectors << 0.3, 0.2;
  table.unknown_vector = Eigen::VectorXd::Zero(1);

  BigramParams params{Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1),
                      Eigen::VectorXd::Zero(1)};
  Eigen::VectorXd upstream = Eigen::VectorXd::Ones(1);
  BigramParams grads =
      encode_bigram_backward({"first", "second"}, params, table, upstream);

  const double gate = 1.0 - std::tanh(0.5) * std::tanh(0.5);
  EXPECT_NEAR(grads.bias(0), 0.78645, 1e-5);
  EXPECT_DOUBLE_EQ(grads.bias(0), gate);
  EXPECT_DOUBLE_EQ(grads.t_left(0, 0), gate * 0.3);
  EXPECT_DOUBLE_EQ(grads.t_right(0, 0), gate * 0.2);
}

TEST(BigramBackward, MatchesCentralFiniteDifferences) {
  Rng rng(404);
  const double step = 1e-5;
  for (int round = 0; round < 20; ++round) {
    const int dim = 1 + static_cast<int>(rng.bounded(10));
    const int n_tokens = 1 + static_cast<int>(rng.bounded(8));
    std::vector<std::string> vocab;
    for (int i = 0; i < 6; ++i) vocab.push_back("w" + std::to_string(i));
    EmbeddingTable table = make_table(vocab, dim, 600 + round);
    std::vector<std::string> tokens;
    for (int i = 0; i < n_tokens; ++i) {
      tokens.push_back("w" + std::to_string(rng.bounded(6)));
    }
    BigramParams params = random_bigram(dim, 700 + round);
    Eigen::VectorXd upstream(dim);
    for (int d = 0; d < dim; ++d) upstream(d) = rng.gaussian();

    BigramParams analytic =
        encode_bigram_backward(tokens, params, table, upstream);

    auto objective = [&](const BigramParams& p) {
      return upstream.dot(encode_bigram(tokens, p, table));
    };
    auto check_matrix = [&](Eigen::MatrixXd BigramParams::*field) {
      for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
          BigramParams perturbed = params;
          (perturbed.*field)(r, c) += step;
          const double plus = objective(perturbed);
          (perturbed.*field)(r, c) -= 2.0 * step;
          const double minus = objective(perturbed);
          const double fd = (plus - minus) / (2.0 * step);
          EXPECT_LT(relative_error((analytic.*field)(r, c), fd), 1e-4);
        }
      }
    };
    check_matrix(&BigramParams::t_left);
    check_matrix(&BigramParams::t_right);
    for (int d = 0; d < dim; ++d) {
      BigramParams perturbed = params;
      perturbed.bias(d) += step;
      const double plus = objective(perturbed);
      perturbed.bias(d) -= 2.0 * step;
      const double minus = objective(perturbed);
      const double fd = (plus - minus) / (2.0 * step);
      EXPECT_LT(relative_error(analytic.bias(d), fd), 1e-4);
    }
  }
}
