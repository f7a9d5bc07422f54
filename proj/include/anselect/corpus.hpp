#pragma once

#include "anselect/stopwords.hpp"

#include <cctype>
#include <cstddef>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace anselect {

// Placeholder emitted for standalone number tokens.
inline constexpr const char* kNumberToken = "<num>";

// One labeled (question, answer) pair. Token lists are the tokenizer output;
// stopword removal happens downstream, where each consumer requires it.
struct QAInstance {
  std::string question_id;
  std::string answer_id;  // unique within the question
  std::vector<std::string> question_tokens;
  std::vector<std::string> answer_tokens;
  int label = 0;  // 1 = correct answer, 0 = incorrect
};

// All instances sharing one question id, in file order.
struct QuestionGroup {
  std::string question_id;
  std::vector<QAInstance> instances;
};

struct SplitStats {
  std::size_t n_questions = 0;
  std::size_t n_pairs = 0;
  double pct_correct = 0.0;  // 100 * positive pairs / n_pairs
};

namespace detail {

inline bool is_word_char(unsigned char c) {
  // Bytes >= 0x80 are kept so multi-byte UTF-8 words survive intact.
  return std::isalnum(c) != 0 || c >= 0x80;
}

inline bool is_all_digits(const std::string& token) {
  for (unsigned char c : token) {
    if (!std::isdigit(c)) return false;
  }
  return !token.empty();
}

}  // namespace detail

// Lowercases, splits on whitespace and punctuation boundaries, drops
// punctuation-only runs, and replaces standalone numbers with <num>. The
// literal placeholder <num> is recognized and kept, which makes tokenize
// idempotent on its own output.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::string lower(text);
  for (auto& c : lower) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }

  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < lower.size()) {
    if (lower.compare(i, 5, kNumberToken) == 0) {
      tokens.emplace_back(kNumberToken);
      i += 5;
      continue;
    }
    if (!detail::is_word_char(static_cast<unsigned char>(lower[i]))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < lower.size() &&
           detail::is_word_char(static_cast<unsigned char>(lower[i]))) {
      ++i;
    }
    std::string run = lower.substr(start, i - start);
    tokens.push_back(detail::is_all_digits(run) ? std::string(kNumberToken)
                                                : std::move(run));
  }
  return tokens;
}

// Order-preserving filter; may return an empty list.
inline std::vector<std::string> remove_stopwords(
    const std::vector<std::string>& tokens, const StopwordSet& stoplist) {
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (const auto& token : tokens) {
    if (!stoplist.count(token)) kept.push_back(token);
  }
  return kept;
}

// Dataset TSV: one pair per line, 4 tab-separated columns
//   question_id <TAB> label <TAB> question_text <TAB> answer_text
// label in {0,1}, no header, lines grouped by question_id.
inline std::vector<QuestionGroup> parse_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open dataset file: " + path);
  }

  std::vector<QuestionGroup> groups;
  // Raw question text per open group, used to reject mixed text under one id.
  std::vector<std::string> group_texts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        cols.push_back(line.substr(start));
        break;
      }
      cols.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (cols.size() != 4) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 4 tab-separated columns, got " +
                               std::to_string(cols.size()));
    }
    const std::string& qid = cols[0];
    if (cols[1] != "0" && cols[1] != "1") {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": bad label '" + cols[1] + "'");
    }

    QAInstance instance;
    instance.question_id = qid;
    instance.label = cols[1] == "1" ? 1 : 0;
    instance.question_tokens = tokenize(cols[2]);
    instance.answer_tokens = tokenize(cols[3]);
    if (instance.question_tokens.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": question tokenizes to nothing");
    }
    if (instance.answer_tokens.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": answer tokenizes to nothing");
    }

    if (groups.empty() || groups.back().question_id != qid) {
      for (const auto& group : groups) {
        if (group.question_id == qid) {
          throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                   ": question id '" + qid +
                                   "' appears in non-contiguous lines");
        }
      }
      groups.push_back(QuestionGroup{qid, {}});
      group_texts.push_back(cols[2]);
    } else if (group_texts.back() != cols[2]) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": question text differs from earlier lines "
                               "with id '" +
                               qid + "'");
    }
    instance.answer_id = std::to_string(groups.back().instances.size());
    groups.back().instances.push_back(std::move(instance));
  }
  return groups;
}

// Inverse of parse_dataset on well-formed groups: tokens are joined with
// single spaces and re-tokenize to themselves.
inline void serialize_dataset(const std::vector<QuestionGroup>& groups,
                              std::ostream& out) {
  auto join = [](const std::vector<std::string>& tokens) {
    std::string text;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) text += ' ';
      text += tokens[i];
    }
    return text;
  };
  for (const auto& group : groups) {
    for (const auto& instance : group.instances) {
      out << group.question_id << '\t' << instance.label << '\t'
          << join(instance.question_tokens) << '\t'
          << join(instance.answer_tokens) << '\n';
    }
  }
}

inline void serialize_dataset(const std::vector<QuestionGroup>& groups,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write dataset file: " + path);
  }
  serialize_dataset(groups, out);
}

inline SplitStats split_stats(const std::vector<QuestionGroup>& groups) {
  if (groups.empty()) {
    throw std::invalid_argument("split_stats: empty group list");
  }
  SplitStats stats;
  stats.n_questions = groups.size();
  std::size_t positives = 0;
  for (const auto& group : groups) {
    stats.n_pairs += group.instances.size();
    for (const auto& instance : group.instances) {
      positives += static_cast<std::size_t>(instance.label);
    }
  }
  stats.pct_correct =
      100.0 * static_cast<double>(positives) / static_cast<double>(stats.n_pairs);
  return stats;
}

}  // namespace anselect
