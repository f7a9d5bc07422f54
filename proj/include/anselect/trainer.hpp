#pragma once

#include "anselect/corpus.hpp"
#include "anselect/matcher.hpp"
#include "anselect/metrics.hpp"
#include "anselect/rng.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace anselect {

enum class ModelKind { unigram, bigram };

inline std::string to_string(ModelKind kind) {
  return kind == ModelKind::unigram ? "unigram" : "bigram";
}

inline ModelKind model_kind_from_string(const std::string& name) {
  if (name == "unigram") return ModelKind::unigram;
  if (name == "bigram") return ModelKind::bigram;
  throw std::invalid_argument("unknown model kind '" + name + "'");
}

struct TrainConfig {
  ModelKind model_kind = ModelKind::unigram;
  double learning_rate = 0.05;
  double lambda = 0.0;
  int epochs = 15;
  int batch_size = 10;
  std::uint64_t seed = 1;
  double adagrad_epsilon = 1e-8;

  void validate() const {
    // 0 is allowed: a null step is a legitimate degenerate configuration
    // (theta stays at its initialization).
    if (learning_rate < 0.0) {
      throw std::invalid_argument("learning_rate must be nonnegative");
    }
    if (lambda < 0.0) {
      throw std::invalid_argument("lambda must be nonnegative");
    }
    if (epochs <= 0) throw std::invalid_argument("epochs must be positive");
    if (batch_size <= 0) {
      throw std::invalid_argument("batch_size must be positive");
    }
    if (adagrad_epsilon <= 0.0) {
      throw std::invalid_argument("adagrad_epsilon must be positive");
    }
  }
};

// Per-entry sums of squared gradients, same shapes as the parameters.
struct AdaGradState {
  ModelTheta accumulators;
};

namespace detail {

// Applies fn(parameter_entry, gradient_entry, state_entry) across every
// entry of theta, in a fixed order.
template <typename Fn>
inline void for_each_entry(ModelTheta& theta, const ThetaGradients& grads,
                           ModelTheta& state, Fn&& fn) {
  auto same_shape = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
  };
  bool ok = same_shape(grads.matcher.m, theta.matcher.m) &&
            same_shape(state.matcher.m, theta.matcher.m) &&
            grads.is_bigram() == theta.is_bigram() &&
            state.is_bigram() == theta.is_bigram();
  if (ok && theta.bigram) {
    ok = same_shape(grads.bigram->t_left, theta.bigram->t_left) &&
         same_shape(grads.bigram->t_right, theta.bigram->t_right) &&
         grads.bigram->bias.size() == theta.bigram->bias.size() &&
         same_shape(state.bigram->t_left, theta.bigram->t_left) &&
         same_shape(state.bigram->t_right, theta.bigram->t_right) &&
         state.bigram->bias.size() == theta.bigram->bias.size();
  }
  if (!ok) {
    throw std::invalid_argument("adagrad_step: shape mismatch");
  }
  auto walk_matrix = [&](Eigen::MatrixXd& p, const Eigen::MatrixXd& g,
                         Eigen::MatrixXd& s) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      for (Eigen::Index r = 0; r < p.rows(); ++r) {
        fn(p(r, c), g(r, c), s(r, c));
      }
    }
  };
  walk_matrix(theta.matcher.m, grads.matcher.m, state.matcher.m);
  fn(theta.matcher.bias, grads.matcher.bias, state.matcher.bias);
  if (theta.bigram) {
    walk_matrix(theta.bigram->t_left, grads.bigram->t_left,
                state.bigram->t_left);
    walk_matrix(theta.bigram->t_right, grads.bigram->t_right,
                state.bigram->t_right);
    for (Eigen::Index i = 0; i < theta.bigram->bias.size(); ++i) {
      fn(theta.bigram->bias(i), grads.bigram->bias(i), state.bigram->bias(i));
    }
  }
}

}  // namespace detail

// Every weight drawn i.i.d. Normal(0, 0.01^2) from the seeded generator, in
// a fixed order (M row-major, then T_L, T_R, b_c, then b), so the same seed
// always yields bitwise-identical parameters.
inline ModelTheta init_params(int dim, ModelKind kind, std::uint64_t seed) {
  if (dim <= 0) throw std::invalid_argument("init_params: dim must be > 0");
  const double sigma = 0.01;
  Rng rng(seed);
  auto fill = [&](Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        m(r, c) = rng.gaussian(0.0, sigma);
      }
    }
  };
  ModelTheta theta;
  theta.matcher.m.resize(dim, dim);
  fill(theta.matcher.m);
  if (kind == ModelKind::bigram) {
    BigramParams bigram;
    bigram.t_left.resize(dim, dim);
    bigram.t_right.resize(dim, dim);
    fill(bigram.t_left);
    fill(bigram.t_right);
    bigram.bias.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      bigram.bias(i) = rng.gaussian(0.0, sigma);
    }
    theta.bigram = std::move(bigram);
  }
  theta.matcher.bias = rng.gaussian(0.0, sigma);
  return theta;
}

inline std::size_t parameter_count(const ModelTheta& theta) {
  std::size_t count = static_cast<std::size_t>(theta.matcher.m.size()) + 1;
  if (theta.bigram) {
    count += static_cast<std::size_t>(theta.bigram->t_left.size()) +
             static_cast<std::size_t>(theta.bigram->t_right.size()) +
             static_cast<std::size_t>(theta.bigram->bias.size());
  }
  return count;
}

inline AdaGradState make_adagrad_state(const ModelTheta& theta) {
  return AdaGradState{zero_gradients(theta)};
}

// Per entry: G += g^2, then theta -= eta * (g / (sqrt(G) + eps)). The ratio
// is computed before scaling by eta so the very first step has magnitude
// exactly eta whenever g^2 and its square root are exact. A zero gradient
// leaves both the entry and its accumulator unchanged.
inline void adagrad_step(ModelTheta& theta, const ThetaGradients& grads,
                         AdaGradState& state, double eta, double eps) {
  detail::for_each_entry(theta, grads, state.accumulators,
                         [eta, eps](double& p, double g, double& acc) {
                           if (g == 0.0) return;
                           acc += g * g;
                           p -= eta * (g / (std::sqrt(acc) + eps));
                         });
}

struct EpochTrace {
  int epoch = 0;          // 1-based
  double train_loss = 0.0;  // full-dataset objective after the epoch
  double dev_map = 0.0;
  double dev_mrr = 0.0;
};

struct TrainResult {
  ModelTheta theta;        // snapshot with the best dev MAP
  ModelTheta final_theta;  // parameters after the last epoch
  std::vector<EpochTrace> trace;
  int best_epoch = 0;
  double best_dev_map = 0.0;
  double best_dev_mrr = 0.0;
};

inline std::vector<TrainingPair> flatten_groups(
    const std::vector<QuestionGroup>& groups) {
  std::vector<TrainingPair> pairs;
  for (const auto& group : groups) {
    for (const auto& instance : group.instances) {
      pairs.push_back(TrainingPair{instance.question_tokens,
                                   instance.answer_tokens, instance.label});
    }
  }
  return pairs;
}

// Scores every instance with the model probability and builds per-question
// rankings (descending score, ties by ascending answer_id).
inline std::vector<RankedList> score_groups(
    const std::vector<QuestionGroup>& groups, const ModelTheta& theta,
    const EmbeddingTable& table, const StopwordSet& stoplist) {
  std::vector<RankedList> rankings;
  rankings.reserve(groups.size());
  for (const auto& group : groups) {
    std::vector<RankedEntry> entries;
    entries.reserve(group.instances.size());
    for (const auto& instance : group.instances) {
      TrainingPair pair{instance.question_tokens, instance.answer_tokens,
                        instance.label};
      EncodedPair encoded = encode_pair(pair, theta, table, stoplist);
      entries.push_back(RankedEntry{instance.answer_id,
                                    score(encoded.q, encoded.a, theta.matcher),
                                    instance.label});
    }
    rankings.push_back(make_ranked(group.question_id, std::move(entries)));
  }
  return rankings;
}

namespace detail {

inline std::vector<RankedList> score_prepared_groups(
    const std::vector<QuestionGroup>& groups,
    const std::vector<std::vector<PreparedPair>>& prepared,
    const ModelTheta& theta, const EmbeddingTable& table) {
  std::vector<RankedList> rankings;
  rankings.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<RankedEntry> entries;
    entries.reserve(prepared[g].size());
    for (std::size_t i = 0; i < prepared[g].size(); ++i) {
      EncodedPair encoded = encode_prepared(prepared[g][i], theta, table);
      entries.push_back(
          RankedEntry{groups[g].instances[i].answer_id,
                      score(encoded.q, encoded.a, theta.matcher),
                      prepared[g][i].label});
    }
    rankings.push_back(make_ranked(groups[g].question_id, std::move(entries)));
  }
  return rankings;
}

}  // namespace detail

// AdaGrad over shuffled mini-batches of QA triples. Per optimization step
// the regularizer weight is scaled by (batch size / dataset size), so the
// summed stochastic objective matches the whole-dataset objective. The trace
// records the full-dataset objective (unscaled lambda) after each epoch plus
// the dev MAP/MRR; the returned theta is the snapshot with the best dev MAP
// (earliest epoch on ties). Fully deterministic given the seed.
inline TrainResult train(const std::vector<QuestionGroup>& train_groups,
                         const std::vector<QuestionGroup>& dev_groups,
                         const EmbeddingTable& table,
                         const TrainConfig& config,
                         const StopwordSet& stoplist = builtin_stopwords()) {
  config.validate();
  if (train_groups.empty()) {
    throw std::invalid_argument("train: empty training set");
  }
  if (dev_groups.empty()) {
    throw std::invalid_argument("train: dev set required for model selection");
  }
  const bool bigram = config.model_kind == ModelKind::bigram;

  auto train_pairs = flatten_groups(train_groups);
  auto prepared = detail::prepare_pairs(
      std::span<const TrainingPair>(train_pairs), bigram, table, stoplist);

  std::vector<std::vector<detail::PreparedPair>> dev_prepared;
  dev_prepared.reserve(dev_groups.size());
  for (const auto& group : dev_groups) {
    auto pairs = flatten_groups({group});
    dev_prepared.push_back(detail::prepare_pairs(
        std::span<const TrainingPair>(pairs), bigram, table, stoplist));
  }

  ModelTheta theta = init_params(table.dim, config.model_kind, config.seed);
  AdaGradState state = make_adagrad_state(theta);
  // Distinct stream from init_params so the two draws cannot interleave.
  Rng shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  const std::size_t n = prepared.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<detail::PreparedPair> batch;

  TrainResult result;
  result.best_dev_map = -1.0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t begin = 0; begin < n;
         begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(n, begin + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) {
        batch.push_back(prepared[order[i]]);
      }
      const double step_lambda =
          config.lambda * static_cast<double>(batch.size()) /
          static_cast<double>(n);
      ThetaGradients grads = detail::prepared_loss_gradients(
          std::span<const detail::PreparedPair>(batch), theta, step_lambda,
          table);
      adagrad_step(theta, grads, state, config.learning_rate,
                   config.adagrad_epsilon);
    }

    EpochTrace entry;
    entry.epoch = epoch;
    entry.train_loss = detail::prepared_batch_loss(
        std::span<const detail::PreparedPair>(prepared), theta, config.lambda,
        table);
    if (!std::isfinite(entry.train_loss)) {
      throw std::runtime_error(
          "train: non-finite loss at epoch " + std::to_string(epoch) +
          "; the learning rate is likely too high");
    }
    EvalResult dev = evaluate(
        detail::score_prepared_groups(dev_groups, dev_prepared, theta, table));
    entry.dev_map = dev.map;
    entry.dev_mrr = dev.mrr;
    result.trace.push_back(entry);

    if (dev.map > result.best_dev_map) {
      result.best_dev_map = dev.map;
      result.best_dev_mrr = dev.mrr;
      result.best_epoch = epoch;
      result.theta = theta;
    }
  }
  result.final_theta = std::move(theta);
  return result;
}

struct GridCell {
  TrainConfig config;
  double dev_map = 0.0;
  double dev_mrr = 0.0;
  int best_epoch = 0;
  std::string error;  // empty when the cell trained successfully

  bool ok() const { return error.empty(); }
};

struct GridResult {
  TrainConfig best_config;
  TrainResult best;
  std::vector<GridCell> table;  // one row per grid cell, in grid order
};

// Trains every configuration and selects the best dev MAP; ties go to the
// earliest grid cell. Failures are recorded in the table and do not stop the
// remaining cells.
inline GridResult grid_search(const std::vector<TrainConfig>& grid,
                              const std::vector<QuestionGroup>& train_groups,
                              const std::vector<QuestionGroup>& dev_groups,
                              const EmbeddingTable& table,
                              const StopwordSet& stoplist =
                                  builtin_stopwords()) {
  if (grid.empty()) {
    throw std::invalid_argument("grid_search: empty grid");
  }
  GridResult result;
  bool have_best = false;
  for (const auto& config : grid) {
    GridCell cell;
    cell.config = config;
    try {
      TrainResult trained =
          train(train_groups, dev_groups, table, config, stoplist);
      cell.dev_map = trained.best_dev_map;
      cell.dev_mrr = trained.best_dev_mrr;
      cell.best_epoch = trained.best_epoch;
      if (!have_best || trained.best_dev_map > result.best.best_dev_map) {
        have_best = true;
        result.best_config = config;
        result.best = std::move(trained);
      }
    } catch (const std::exception& err) {
      cell.error = err.what();
    }
    result.table.push_back(std::move(cell));
  }
  if (!have_best) {
    throw std::runtime_error("grid_search: every grid cell failed");
  }
  return result;
}

// The default grid: learning_rate x lambda, 15 epochs, batch 10.
inline std::vector<TrainConfig> default_grid(ModelKind kind,
                                             std::uint64_t seed) {
  std::vector<TrainConfig> grid;
  for (double lr : {0.01, 0.05, 0.1}) {
    for (double lambda : {0.0, 1e-4, 1e-3, 1e-2}) {
      TrainConfig config;
      config.model_kind = kind;
      config.learning_rate = lr;
      config.lambda = lambda;
      config.epochs = 15;
      config.batch_size = 10;
      config.seed = seed;
      grid.push_back(config);
    }
  }
  return grid;
}

}  // namespace anselect
