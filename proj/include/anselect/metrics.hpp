#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace anselect {

struct RankedEntry {
  std::string answer_id;
  double score = 0.0;
  int label = 0;
};

// Per-question candidate ordering: entries sorted by score descending, ties
// broken by ascending answer_id so repeated runs produce identical metrics.
struct RankedList {
  std::string question_id;
  std::vector<RankedEntry> entries;
};

inline RankedList make_ranked(std::string question_id,
                              std::vector<RankedEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const RankedEntry& a, const RankedEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.answer_id < b.answer_id;
            });
  return RankedList{std::move(question_id), std::move(entries)};
}

// Mean over the positives at ranks r_1 < ... < r_k of (j / r_j).
inline double average_precision(const std::vector<int>& ranked_labels) {
  double sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t rank = 1; rank <= ranked_labels.size(); ++rank) {
    if (ranked_labels[rank - 1] == 1) {
      ++positives;
      sum += static_cast<double>(positives) / static_cast<double>(rank);
    }
  }
  if (positives == 0) {
    throw std::invalid_argument("average_precision: no positive label");
  }
  return sum / static_cast<double>(positives);
}

// 1 / rank of the first positive.
inline double reciprocal_rank(const std::vector<int>& ranked_labels) {
  for (std::size_t rank = 1; rank <= ranked_labels.size(); ++rank) {
    if (ranked_labels[rank - 1] == 1) {
      return 1.0 / static_cast<double>(rank);
    }
  }
  throw std::invalid_argument("reciprocal_rank: no positive label");
}

struct EvalResult {
  double map = 0.0;
  double mrr = 0.0;
  std::size_t n_scored = 0;  // questions that contributed to the means
};

namespace detail {

inline std::vector<int> labels_of(const RankedList& ranking) {
  std::vector<int> labels;
  labels.reserve(ranking.entries.size());
  for (const auto& entry : ranking.entries) labels.push_back(entry.label);
  return labels;
}

}  // namespace detail

// Questions with zero positive labels are excluded from both means, matching
// how trec_eval averages over queries with relevant documents. The reduction
// runs in sorted question_id order, so the result is invariant under any
// permutation of the input list.
inline EvalResult evaluate(const std::vector<RankedList>& rankings) {
  if (rankings.empty()) {
    throw std::invalid_argument("evaluate: no rankings");
  }
  std::vector<const RankedList*> ordered;
  ordered.reserve(rankings.size());
  for (const auto& ranking : rankings) ordered.push_back(&ranking);
  std::sort(ordered.begin(), ordered.end(),
            [](const RankedList* a, const RankedList* b) {
              return a->question_id < b->question_id;
            });

  EvalResult result;
  double ap_sum = 0.0;
  double rr_sum = 0.0;
  for (const RankedList* ranking : ordered) {
    auto labels = detail::labels_of(*ranking);
    bool has_positive =
        std::find(labels.begin(), labels.end(), 1) != labels.end();
    if (!has_positive) continue;
    ap_sum += average_precision(labels);
    rr_sum += reciprocal_rank(labels);
    ++result.n_scored;
  }
  if (result.n_scored == 0) {
    throw std::invalid_argument("evaluate: no question has a positive label");
  }
  result.map = ap_sum / static_cast<double>(result.n_scored);
  result.mrr = rr_sum / static_cast<double>(result.n_scored);
  return result;
}

namespace detail {

inline std::string format_score(double score) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", score);
  return buffer;
}

}  // namespace detail

// trec_eval text formats, space separated, sorted by qid then rank:
//   run file:   qid Q0 answer_id rank score run_id
//   qrels file: qid 0 answer_id label
inline void export_trec(const std::vector<RankedList>& rankings,
                        std::ostream& run_out, std::ostream& qrels_out,
                        const std::string& run_id = "anselect") {
  std::vector<const RankedList*> ordered;
  ordered.reserve(rankings.size());
  for (const auto& ranking : rankings) ordered.push_back(&ranking);
  std::sort(ordered.begin(), ordered.end(),
            [](const RankedList* a, const RankedList* b) {
              return a->question_id < b->question_id;
            });
  for (const RankedList* ranking : ordered) {
    std::size_t rank = 0;
    for (const auto& entry : ranking->entries) {
      ++rank;
      run_out << ranking->question_id << " Q0 " << entry.answer_id << ' '
              << rank << ' ' << detail::format_score(entry.score) << ' '
              << run_id << '\n';
      qrels_out << ranking->question_id << " 0 " << entry.answer_id << ' '
                << entry.label << '\n';
    }
  }
}

inline void export_trec(const std::vector<RankedList>& rankings,
                        const std::string& run_path,
                        const std::string& qrels_path,
                        const std::string& run_id = "anselect") {
  std::ofstream run_out(run_path);
  if (!run_out) throw std::runtime_error("cannot write run file: " + run_path);
  std::ofstream qrels_out(qrels_path);
  if (!qrels_out) {
    throw std::runtime_error("cannot write qrels file: " + qrels_path);
  }
  export_trec(rankings, run_out, qrels_out, run_id);
}

}  // namespace anselect
