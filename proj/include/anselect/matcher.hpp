#pragma once

#include "anselect/encoders.hpp"

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace anselect {

// Bilinear question-answer scorer: p(y=1 | q, a) = sigmoid(q' M a + b).
struct MatcherParams {
  Eigen::MatrixXd m;  // d x d, not necessarily symmetric
  double bias = 0.0;
};

// Full parameter vector theta: the matcher plus, for the bigram model, the
// composition parameters. bigram empty means the unigram model.
struct ModelTheta {
  MatcherParams matcher;
  std::optional<BigramParams> bigram;

  int dim() const { return static_cast<int>(matcher.m.rows()); }
  bool is_bigram() const { return bigram.has_value(); }
};

// Gradients carry the exact same shapes as the parameters.
using ThetaGradients = ModelTheta;

// Probabilities are clamped to [kProbFloor, 1 - kProbFloor] inside the loss
// logs so the objective stays finite at saturation.
inline constexpr double kProbFloor = 1e-12;

inline double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double score(const Eigen::VectorXd& q, const Eigen::VectorXd& a,
                    const MatcherParams& params) {
  if (q.size() != params.m.rows() || a.size() != params.m.cols()) {
    throw std::invalid_argument(
        "score: dimension mismatch (q " + std::to_string(q.size()) + ", a " +
        std::to_string(a.size()) + ", M " + std::to_string(params.m.rows()) +
        "x" + std::to_string(params.m.cols()) + ")");
  }
  return stable_sigmoid(q.dot(params.m * a) + params.bias);
}

// Sum of squared entries over every field of theta, biases included:
// M, b, and, if present, T_L, T_R, b_c.
inline double frobenius_squared(const ModelTheta& theta) {
  double total = theta.matcher.m.squaredNorm() +
                 theta.matcher.bias * theta.matcher.bias;
  if (theta.bigram) {
    total += theta.bigram->t_left.squaredNorm() +
             theta.bigram->t_right.squaredNorm() +
             theta.bigram->bias.squaredNorm();
  }
  return total;
}

// One already-encoded (question, answer, label) triple.
struct EncodedPair {
  Eigen::VectorXd q;
  Eigen::VectorXd a;
  int label = 0;
};

// One raw triple; encoding depends on the model kind carried by theta.
struct TrainingPair {
  std::vector<std::string> question_tokens;
  std::vector<std::string> answer_tokens;
  int label = 0;
};

// Unigram: stopword-filtered mean of word vectors. Bigram: convolution over
// the unfiltered token sequence.
inline EncodedPair encode_pair(const TrainingPair& pair,
                               const ModelTheta& theta,
                               const EmbeddingTable& table,
                               const StopwordSet& stoplist) {
  EncodedPair encoded;
  if (theta.bigram) {
    encoded.q = encode_bigram(pair.question_tokens, *theta.bigram, table);
    encoded.a = encode_bigram(pair.answer_tokens, *theta.bigram, table);
  } else {
    encoded.q = encode_unigram(pair.question_tokens, table, stoplist);
    encoded.a = encode_unigram(pair.answer_tokens, table, stoplist);
  }
  encoded.label = pair.label;
  return encoded;
}

namespace detail {

inline double clamped_log(double p) {
  return std::log(p < kProbFloor ? kProbFloor : p);
}

}  // namespace detail

// Cross entropy over the batch plus (lambda/2) * ||theta||_F^2.
inline double batch_loss(std::span<const EncodedPair> batch,
                         const ModelTheta& theta, double lambda) {
  if (batch.empty()) {
    throw std::invalid_argument("batch_loss: empty batch");
  }
  double data = 0.0;
  for (const auto& pair : batch) {
    const double p = score(pair.q, pair.a, theta.matcher);
    data -= pair.label == 1 ? detail::clamped_log(p)
                            : detail::clamped_log(1.0 - p);
  }
  return data + 0.5 * lambda * frobenius_squared(theta);
}

inline double batch_loss(std::span<const TrainingPair> batch,
                         const ModelTheta& theta, double lambda,
                         const EmbeddingTable& table,
                         const StopwordSet& stoplist) {
  if (batch.empty()) {
    throw std::invalid_argument("batch_loss: empty batch");
  }
  std::vector<EncodedPair> encoded;
  encoded.reserve(batch.size());
  for (const auto& pair : batch) {
    encoded.push_back(encode_pair(pair, theta, table, stoplist));
  }
  return batch_loss(std::span<const EncodedPair>(encoded), theta, lambda);
}

inline ThetaGradients zero_gradients(const ModelTheta& theta) {
  ThetaGradients grads;
  grads.matcher.m = Eigen::MatrixXd::Zero(theta.matcher.m.rows(),
                                          theta.matcher.m.cols());
  grads.matcher.bias = 0.0;
  if (theta.bigram) {
    const int d = theta.bigram->dim();
    grads.bigram = BigramParams{Eigen::MatrixXd::Zero(d, d),
                                Eigen::MatrixXd::Zero(d, d),
                                Eigen::VectorXd::Zero(d)};
  }
  return grads;
}

namespace detail {

// Pair pre-resolved against the embedding table so the training loop never
// touches the token hash map. Row index -1 means the UNKNOWN vector;
// single-token sentences are already padded for the bigram path.
struct PreparedPair {
  std::vector<int> q_rows;
  std::vector<int> a_rows;
  Eigen::VectorXd q_unigram;  // only filled for the unigram model
  Eigen::VectorXd a_unigram;
  int label = 0;
};

inline PreparedPair prepare_pair(const TrainingPair& pair, bool bigram,
                                 const EmbeddingTable& table,
                                 const StopwordSet& stoplist) {
  if (pair.question_tokens.empty() || pair.answer_tokens.empty()) {
    throw std::invalid_argument("prepare_pair: empty token list");
  }
  PreparedPair prepared;
  prepared.label = pair.label;
  prepared.q_rows = row_indices(pair.question_tokens, table);
  prepared.a_rows = row_indices(pair.answer_tokens, table);
  if (prepared.q_rows.size() == 1) prepared.q_rows.push_back(-1);
  if (prepared.a_rows.size() == 1) prepared.a_rows.push_back(-1);
  if (!bigram) {
    auto filtered_rows = [&](const std::vector<std::string>& tokens) {
      std::vector<std::string> kept = remove_stopwords(tokens, stoplist);
      return row_indices(kept.empty() ? tokens : kept, table);
    };
    prepared.q_unigram =
        unigram_average(filtered_rows(pair.question_tokens), table);
    prepared.a_unigram =
        unigram_average(filtered_rows(pair.answer_tokens), table);
  }
  return prepared;
}

inline std::vector<PreparedPair> prepare_pairs(
    std::span<const TrainingPair> pairs, bool bigram,
    const EmbeddingTable& table, const StopwordSet& stoplist) {
  std::vector<PreparedPair> prepared;
  prepared.reserve(pairs.size());
  for (const auto& pair : pairs) {
    prepared.push_back(prepare_pair(pair, bigram, table, stoplist));
  }
  return prepared;
}

inline EncodedPair encode_prepared(const PreparedPair& pair,
                                   const ModelTheta& theta,
                                   const EmbeddingTable& table) {
  if (!theta.bigram) {
    return EncodedPair{pair.q_unigram, pair.a_unigram, pair.label};
  }
  return EncodedPair{
      encode_bigram_embedded(gather_columns(table, pair.q_rows),
                             *theta.bigram),
      encode_bigram_embedded(gather_columns(table, pair.a_rows),
                             *theta.bigram),
      pair.label};
}

inline double prepared_batch_loss(std::span<const PreparedPair> batch,
                                  const ModelTheta& theta, double lambda,
                                  const EmbeddingTable& table) {
  if (batch.empty()) {
    throw std::invalid_argument("batch_loss: empty batch");
  }
  double data = 0.0;
  for (const auto& pair : batch) {
    EncodedPair encoded = encode_prepared(pair, theta, table);
    const double p = score(encoded.q, encoded.a, theta.matcher);
    data -= pair.label == 1 ? clamped_log(p) : clamped_log(1.0 - p);
  }
  return data + 0.5 * lambda * frobenius_squared(theta);
}

// Analytic gradients of prepared_batch_loss. Per pair, with z = q'Ma + b and
// delta = sigmoid(z) - y:
//   dM += delta * q a',  db += delta,
// and for the bigram model the encoder gradients of delta*Ma (question side)
// and delta*M'q (answer side). The regularizer gradient lambda*theta is
// added once per batch.
inline ThetaGradients prepared_loss_gradients(
    std::span<const PreparedPair> batch, const ModelTheta& theta,
    double lambda, const EmbeddingTable& table) {
  if (batch.empty()) {
    throw std::invalid_argument("loss_gradients: empty batch");
  }
  ThetaGradients grads = zero_gradients(theta);
  const Eigen::MatrixXd& m = theta.matcher.m;
  for (const auto& pair : batch) {
    if (!theta.bigram) {
      const Eigen::VectorXd& q = pair.q_unigram;
      const Eigen::VectorXd& a = pair.a_unigram;
      const double p = score(q, a, theta.matcher);
      const double delta = p - static_cast<double>(pair.label);
      grads.matcher.m.noalias() += delta * q * a.transpose();
      grads.matcher.bias += delta;
      continue;
    }
    const Eigen::MatrixXd q_vectors = gather_columns(table, pair.q_rows);
    const Eigen::MatrixXd a_vectors = gather_columns(table, pair.a_rows);
    const Eigen::VectorXd q = encode_bigram_embedded(q_vectors, *theta.bigram);
    const Eigen::VectorXd a = encode_bigram_embedded(a_vectors, *theta.bigram);
    const double p = score(q, a, theta.matcher);
    const double delta = p - static_cast<double>(pair.label);
    grads.matcher.m.noalias() += delta * q * a.transpose();
    grads.matcher.bias += delta;

    const Eigen::VectorXd dq = delta * (m * a);
    const Eigen::VectorXd da = delta * (m.transpose() * q);
    BigramParams q_grads =
        encode_bigram_backward_embedded(q_vectors, *theta.bigram, dq);
    BigramParams a_grads =
        encode_bigram_backward_embedded(a_vectors, *theta.bigram, da);
    grads.bigram->t_left += q_grads.t_left + a_grads.t_left;
    grads.bigram->t_right += q_grads.t_right + a_grads.t_right;
    grads.bigram->bias += q_grads.bias + a_grads.bias;
  }

  if (lambda != 0.0) {
    grads.matcher.m += lambda * theta.matcher.m;
    grads.matcher.bias += lambda * theta.matcher.bias;
    if (theta.bigram) {
      grads.bigram->t_left += lambda * theta.bigram->t_left;
      grads.bigram->t_right += lambda * theta.bigram->t_right;
      grads.bigram->bias += lambda * theta.bigram->bias;
    }
  }
  return grads;
}

}  // namespace detail

// Gradients of batch_loss with respect to every field of theta.
inline ThetaGradients loss_gradients(std::span<const TrainingPair> batch,
                                     const ModelTheta& theta, double lambda,
                                     const EmbeddingTable& table,
                                     const StopwordSet& stoplist) {
  auto prepared =
      detail::prepare_pairs(batch, theta.is_bigram(), table, stoplist);
  return detail::prepared_loss_gradients(
      std::span<const detail::PreparedPair>(prepared), theta, lambda, table);
}

}  // namespace anselect
