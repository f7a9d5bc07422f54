#pragma once

#include "anselect/corpus.hpp"
#include "anselect/lbfgs.hpp"
#include "anselect/matcher.hpp"
#include "anselect/metrics.hpp"
#include "anselect/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace anselect {

// Inverse document frequency over a collection of answer sentences:
// value(w) = ln(n_docs / doc_freq(w)), unseen words fall back to ln(n_docs).
struct IdfTable {
  std::size_t n_docs = 0;
  std::unordered_map<std::string, std::size_t> doc_freq;
  std::unordered_map<std::string, double> values;

  double value(const std::string& token) const {
    auto it = values.find(token);
    return it == values.end() ? std::log(static_cast<double>(n_docs))
                              : it->second;
  }
};

// Documents are the answer sentences of the given groups; document frequency
// counts presence, not occurrences.
inline IdfTable build_idf(const std::vector<QuestionGroup>& groups) {
  IdfTable idf;
  for (const auto& group : groups) {
    for (const auto& instance : group.instances) {
      ++idf.n_docs;
      std::unordered_set<std::string> seen(instance.answer_tokens.begin(),
                                           instance.answer_tokens.end());
      for (const auto& token : seen) ++idf.doc_freq[token];
    }
  }
  if (idf.n_docs == 0) {
    throw std::invalid_argument("build_idf: no answer sentences");
  }
  for (const auto& [token, df] : idf.doc_freq) {
    idf.values[token] = std::log(static_cast<double>(idf.n_docs) /
                                 static_cast<double>(df));
  }
  return idf;
}

namespace detail {

// Distinct non-stopword question token types that also occur in the answer,
// in sorted order so downstream sums are deterministic.
inline std::vector<std::string> matched_types(
    const std::vector<std::string>& q_tokens,
    const std::vector<std::string>& a_tokens, const StopwordSet& stoplist) {
  std::unordered_set<std::string> answer_set(a_tokens.begin(), a_tokens.end());
  std::unordered_set<std::string> seen;
  std::vector<std::string> matched;
  for (const auto& token : q_tokens) {
    if (stoplist.count(token) || !answer_set.count(token)) continue;
    if (seen.insert(token).second) matched.push_back(token);
  }
  std::sort(matched.begin(), matched.end());
  return matched;
}

}  // namespace detail

inline std::size_t cooccurrence_count(const std::vector<std::string>& q_tokens,
                                      const std::vector<std::string>& a_tokens,
                                      const StopwordSet& stoplist) {
  return detail::matched_types(q_tokens, a_tokens, stoplist).size();
}

inline double idf_weighted_count(const std::vector<std::string>& q_tokens,
                                 const std::vector<std::string>& a_tokens,
                                 const StopwordSet& stoplist,
                                 const IdfTable& idf) {
  double sum = 0.0;
  for (const auto& token :
       detail::matched_types(q_tokens, a_tokens, stoplist)) {
    sum += idf.value(token);
  }
  return sum;
}

// The three-feature logistic regression that fuses the count features with
// the matcher probability.
struct CombinerModel {
  Eigen::Vector3d weights = Eigen::Vector3d::Zero();
  double bias = 0.0;
  double l2 = 0.01;
};

// Fixed feature order: [count, idf-weighted count, matcher probability].
inline Eigen::Vector3d extract_features(const QAInstance& instance,
                                        const ModelTheta& theta,
                                        const EmbeddingTable& table,
                                        const IdfTable& idf,
                                        const StopwordSet& stoplist) {
  TrainingPair pair{instance.question_tokens, instance.answer_tokens,
                    instance.label};
  EncodedPair encoded = encode_pair(pair, theta, table, stoplist);
  Eigen::Vector3d features;
  features(0) = static_cast<double>(cooccurrence_count(
      instance.question_tokens, instance.answer_tokens, stoplist));
  features(1) = idf_weighted_count(instance.question_tokens,
                                   instance.answer_tokens, stoplist, idf);
  features(2) = score(encoded.q, encoded.a, theta.matcher);
  return features;
}

namespace detail {

inline double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace detail

// Minimizes mean cross entropy + (l2/2)||weights||^2 (bias unregularized)
// to a gradient norm below 1e-8. The objective is strictly convex, so the
// optimum is unique; `initial` only matters for convergence diagnostics.
inline CombinerModel train_combiner(
    const std::vector<Eigen::Vector3d>& features, const std::vector<int>& labels,
    double l2 = 0.01, const Eigen::Vector4d& initial = Eigen::Vector4d::Zero()) {
  if (features.size() != labels.size() || features.empty()) {
    throw std::invalid_argument(
        "train_combiner: features and labels must be non-empty and aligned");
  }
  const bool has_positive =
      std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_negative =
      std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (!has_positive || !has_negative) {
    throw std::invalid_argument(
        "train_combiner: need at least one example of each class");
  }

  const double n = static_cast<double>(features.size());
  ObjectiveFn objective = [&](const Eigen::VectorXd& x,
                              Eigen::VectorXd& grad) {
    const Eigen::Vector3d w = x.head<3>();
    const double b = x(3);
    double loss = 0.0;
    grad.setZero();
    for (std::size_t i = 0; i < features.size(); ++i) {
      const double z = w.dot(features[i]) + b;
      const double y = static_cast<double>(labels[i]);
      loss += detail::softplus(z) - y * z;
      const double delta = stable_sigmoid(z) - y;
      grad.head<3>() += delta * features[i];
      grad(3) += delta;
    }
    loss /= n;
    grad /= n;
    loss += 0.5 * l2 * w.squaredNorm();
    grad.head<3>() += l2 * w;
    return loss;
  };

  LbfgsOptions options;
  options.gradient_tolerance = 1e-8;
  options.max_iterations = 1000;
  LbfgsResult solution = lbfgs_minimize(objective, initial, options);

  CombinerModel model;
  model.weights = solution.x.head<3>();
  model.bias = solution.x(3);
  model.l2 = l2;
  return model;
}

inline double predict_combined(const QAInstance& instance,
                               const ModelTheta& theta,
                               const CombinerModel& combiner,
                               const EmbeddingTable& table,
                               const IdfTable& idf,
                               const StopwordSet& stoplist) {
  const Eigen::Vector3d features =
      extract_features(instance, theta, table, idf, stoplist);
  return stable_sigmoid(combiner.weights.dot(features) + combiner.bias);
}

// ---------------------------------------------------------------------------
// Reference count baselines.

enum class BaselineKind { random, count, wgt_count };

inline BaselineKind baseline_kind_from_string(const std::string& name) {
  if (name == "random") return BaselineKind::random;
  if (name == "count") return BaselineKind::count;
  if (name == "wgt-count") return BaselineKind::wgt_count;
  throw std::invalid_argument("unknown baseline kind '" + name + "'");
}

// Ranking by cooccurrence_count alone is the Word Count baseline; by
// idf_weighted_count alone, the Wgt Word Count baseline. The random baseline
// assigns seeded uniform scores.
inline std::vector<RankedList> baseline_rankings(
    const std::vector<QuestionGroup>& groups, BaselineKind kind,
    const StopwordSet& stoplist, const IdfTable* idf = nullptr,
    std::uint64_t seed = 1) {
  if (kind == BaselineKind::wgt_count && idf == nullptr) {
    throw std::invalid_argument(
        "baseline_rankings: wgt-count requires an IDF table");
  }
  Rng rng(seed);
  std::vector<RankedList> rankings;
  rankings.reserve(groups.size());
  for (const auto& group : groups) {
    std::vector<RankedEntry> entries;
    entries.reserve(group.instances.size());
    for (const auto& instance : group.instances) {
      double value = 0.0;
      switch (kind) {
        case BaselineKind::random:
          value = rng.uniform();
          break;
        case BaselineKind::count:
          value = static_cast<double>(cooccurrence_count(
              instance.question_tokens, instance.answer_tokens, stoplist));
          break;
        case BaselineKind::wgt_count:
          value = idf_weighted_count(instance.question_tokens,
                                     instance.answer_tokens, stoplist, *idf);
          break;
      }
      entries.push_back(RankedEntry{instance.answer_id, value, instance.label});
    }
    rankings.push_back(make_ranked(group.question_id, std::move(entries)));
  }
  return rankings;
}

// ---------------------------------------------------------------------------
// Combiner persistence. The IDF table travels with the weights because
// prediction needs the exact table the features were extracted with.
//
//   anselect-combiner-v1 l2=<l2> n_docs=<N> n_types=<T>
//   <w_count> <w_idf> <w_prob> <bias>
//   <token> <doc_freq>     (T lines)

inline void save_combiner(const std::string& path, const CombinerModel& model,
                          const IdfTable& idf) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write combiner file: " + path);
  out << std::setprecision(17);
  std::vector<std::string> tokens;
  tokens.reserve(idf.doc_freq.size());
  for (const auto& [token, df] : idf.doc_freq) tokens.push_back(token);
  std::sort(tokens.begin(), tokens.end());
  out << "anselect-combiner-v1 l2=" << model.l2 << " n_docs=" << idf.n_docs
      << " n_types=" << tokens.size() << '\n';
  out << model.weights(0) << ' ' << model.weights(1) << ' '
      << model.weights(2) << ' ' << model.bias << '\n';
  for (const auto& token : tokens) {
    out << token << ' ' << idf.doc_freq.at(token) << '\n';
  }
}

inline std::pair<CombinerModel, IdfTable> load_combiner(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open combiner file: " + path);
  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error("combiner file: missing header in " + path);
  }
  std::istringstream fields(header);
  std::string magic, l2_field, docs_field, types_field;
  fields >> magic >> l2_field >> docs_field >> types_field;
  if (magic != "anselect-combiner-v1" || l2_field.rfind("l2=", 0) != 0 ||
      docs_field.rfind("n_docs=", 0) != 0 ||
      types_field.rfind("n_types=", 0) != 0) {
    throw std::runtime_error("combiner file: unrecognized header '" + header +
                             "'");
  }
  CombinerModel model;
  model.l2 = std::stod(l2_field.substr(3));
  IdfTable idf;
  idf.n_docs = std::stoull(docs_field.substr(7));
  const std::size_t n_types = std::stoull(types_field.substr(8));

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("combiner file truncated: " + path);
  }
  std::istringstream weights(line);
  if (!(weights >> model.weights(0) >> model.weights(1) >> model.weights(2) >>
        model.bias)) {
    throw std::runtime_error("combiner file: bad weights line in " + path);
  }
  for (std::size_t i = 0; i < n_types; ++i) {
    if (!std::getline(in, line)) {
      throw std::runtime_error("combiner file truncated: " + path);
    }
    std::istringstream entry(line);
    std::string token;
    std::size_t df = 0;
    if (!(entry >> token >> df)) {
      throw std::runtime_error("combiner file: bad idf line in " + path);
    }
    idf.doc_freq[token] = df;
    idf.values[token] = std::log(static_cast<double>(idf.n_docs) /
                                 static_cast<double>(df));
  }
  return {model, idf};
}

}  // namespace anselect
