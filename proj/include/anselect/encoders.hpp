#pragma once

#include "anselect/corpus.hpp"
#include "anselect/embeddings.hpp"
#include "anselect/stopwords.hpp"

#include <Eigen/Core>

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace anselect {

// Composition parameters of the bigram convolution: c_i = tanh(T_L s_i +
// T_R s_{i+1} + bias), pooled by coordinatewise mean over the n-1 bigrams.
struct BigramParams {
  Eigen::MatrixXd t_left;   // d x d
  Eigen::MatrixXd t_right;  // d x d
  Eigen::VectorXd bias;     // d

  int dim() const { return static_cast<int>(bias.size()); }
};

namespace detail {

// Token -> embedding row indices, -1 for out-of-vocabulary tokens.
inline std::vector<int> row_indices(const std::vector<std::string>& tokens,
                                    const EmbeddingTable& table) {
  std::vector<int> rows;
  rows.reserve(tokens.size());
  for (const auto& token : tokens) rows.push_back(table.index_of(token));
  return rows;
}

// d x n matrix whose columns are the token vectors.
inline Eigen::MatrixXd gather_columns(const EmbeddingTable& table,
                                      const std::vector<int>& rows) {
  Eigen::MatrixXd s(table.dim, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0) {
      s.col(static_cast<Eigen::Index>(i)) = table.unknown_vector;
    } else {
      s.col(static_cast<Eigen::Index>(i)) =
          table.vectors.row(rows[i]).transpose();
    }
  }
  return s;
}

// Canonical unigram average over precomputed row indices. Terms are grouped
// by row and summed in ascending row order, so any permutation of the tokens
// produces a bitwise-identical vector and duplicating every token is a no-op
// (every term and the length scale by the same power of two).
inline Eigen::VectorXd unigram_average(const std::vector<int>& rows,
                                       const EmbeddingTable& table) {
  const int unknown_key = static_cast<int>(table.size());
  std::map<int, int> counts;  // ordered by row index, OOV last
  for (int row : rows) ++counts[row < 0 ? unknown_key : row];

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dim);
  for (const auto& [row, count] : counts) {
    const Eigen::VectorXd vec = row == unknown_key
                                    ? table.unknown_vector
                                    : Eigen::VectorXd(
                                          table.vectors.row(row).transpose());
    sum += static_cast<double>(count) * vec;
  }
  return sum / static_cast<double>(rows.size());
}

}  // namespace detail

// Bag-of-words sentence vector: stopwords removed, then the mean of the
// surviving token vectors. If every token is a stopword the unfiltered
// tokens are averaged instead, so the result is always defined.
inline Eigen::VectorXd encode_unigram(const std::vector<std::string>& tokens,
                                      const EmbeddingTable& table,
                                      const StopwordSet& stoplist) {
  if (tokens.empty()) {
    throw std::invalid_argument("encode_unigram: empty token list");
  }
  std::vector<std::string> kept = remove_stopwords(tokens, stoplist);
  const std::vector<std::string>& used = kept.empty() ? tokens : kept;
  return detail::unigram_average(detail::row_indices(used, table), table);
}

// Core of the bigram model over a d x n matrix of token vectors, n >= 2.
inline Eigen::VectorXd encode_bigram_embedded(
    const Eigen::MatrixXd& token_vectors, const BigramParams& params) {
  const Eigen::Index n = token_vectors.cols();
  Eigen::MatrixXd pre = params.t_left * token_vectors.leftCols(n - 1) +
                        params.t_right * token_vectors.rightCols(n - 1);
  pre.colwise() += params.bias;
  Eigen::MatrixXd activated = pre.array().tanh().matrix();
  return activated.rowwise().sum() / static_cast<double>(n - 1);
}

namespace detail {

inline Eigen::MatrixXd bigram_input(const std::vector<std::string>& tokens,
                                    const EmbeddingTable& table) {
  if (tokens.empty()) {
    throw std::invalid_argument("encode_bigram: empty token list");
  }
  std::vector<int> rows = row_indices(tokens, table);
  // A single-token sentence is right-padded with the UNKNOWN vector so that
  // one bigram exists.
  if (rows.size() == 1) rows.push_back(-1);
  return gather_columns(table, rows);
}

}  // namespace detail

// Convolutional bigram sentence vector; each coordinate of the pooled output
// lies in [-1, 1].
inline Eigen::VectorXd encode_bigram(const std::vector<std::string>& tokens,
                                     const BigramParams& params,
                                     const EmbeddingTable& table) {
  return encode_bigram_embedded(detail::bigram_input(tokens, table), params);
}

// Gradients of (upstream . s) with respect to the composition parameters,
// where s = encode_bigram_embedded(token_vectors, params).
inline BigramParams encode_bigram_backward_embedded(
    const Eigen::MatrixXd& token_vectors, const BigramParams& params,
    const Eigen::VectorXd& upstream) {
  const Eigen::Index n = token_vectors.cols();
  const auto left = token_vectors.leftCols(n - 1);
  const auto right = token_vectors.rightCols(n - 1);
  Eigen::MatrixXd pre = params.t_left * left + params.t_right * right;
  pre.colwise() += params.bias;
  const Eigen::ArrayXXd activated = pre.array().tanh();

  // d(upstream . s)/dz_i = upstream ⊙ (1 - tanh^2(z_i)) / (n - 1)
  Eigen::MatrixXd delta =
      ((1.0 - activated.square()).colwise() * upstream.array()).matrix() /
      static_cast<double>(n - 1);

  BigramParams grads;
  grads.t_left = delta * left.transpose();
  grads.t_right = delta * right.transpose();
  grads.bias = delta.rowwise().sum();
  return grads;
}

inline BigramParams encode_bigram_backward(
    const std::vector<std::string>& tokens, const BigramParams& params,
    const EmbeddingTable& table, const Eigen::VectorXd& upstream) {
  return encode_bigram_backward_embedded(detail::bigram_input(tokens, table),
                                         params, upstream);
}

}  // namespace anselect
