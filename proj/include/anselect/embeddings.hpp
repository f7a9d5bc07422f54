#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace anselect {

// Reserved token: when present in the embeddings file its vector becomes the
// out-of-vocabulary fallback, otherwise the fallback is the mean of all rows.
inline constexpr const char* kUnknownToken = "*UNKNOWN*";

// Fixed pre-trained word embeddings. Immutable after load; lookups are total:
// any token resolves to a stored row or to unknown_vector.
struct EmbeddingTable {
  int dim = 0;
  std::unordered_map<std::string, int> vocab;  // token -> row index
  Eigen::MatrixXd vectors;                     // |V| x dim
  Eigen::VectorXd unknown_vector;              // dim

  std::size_t size() const { return vocab.size(); }

  // Row index of a token, -1 if out of vocabulary.
  int index_of(const std::string& token) const {
    auto it = vocab.find(token);
    return it == vocab.end() ? -1 : it->second;
  }

  Eigen::VectorXd vector_at(int index) const {
    return index < 0 ? unknown_vector
                     : Eigen::VectorXd(vectors.row(index).transpose());
  }
};

inline Eigen::VectorXd lookup(const EmbeddingTable& table,
                              const std::string& token) {
  return table.vector_at(table.index_of(token));
}

namespace detail {

inline std::vector<std::string> split_on_spaces(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

inline double parse_double_field(const std::string& field, std::size_t line_no,
                                 const std::string& path) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != field.size()) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) +
                             ": invalid number '" + field + "'");
  }
  return value;
}

}  // namespace detail

// File format: UTF-8 text, one entry per line, single-space separated, token
// first then exactly `dim` decimal floats; no header. The dimension is
// inferred from the first line.
inline EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open embeddings file: " + path);
  }

  EmbeddingTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = detail::split_on_spaces(line);
    if (fields.size() < 2) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected a token and at least one value");
    }
    const std::string& token = fields.front();
    if (table.dim == 0) {
      table.dim = static_cast<int>(fields.size()) - 1;
    } else if (static_cast<int>(fields.size()) - 1 != table.dim) {
      throw std::runtime_error(
          path + ":" + std::to_string(line_no) + ": expected " +
          std::to_string(table.dim) + " values, got " +
          std::to_string(fields.size() - 1));
    }
    if (!table.vocab.emplace(token, static_cast<int>(rows.size())).second) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": duplicate token '" + token + "'");
    }
    std::vector<double> values(table.dim);
    for (int d = 0; d < table.dim; ++d) {
      values[d] = detail::parse_double_field(fields[d + 1], line_no, path);
      if (!std::isfinite(values[d])) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": non-finite value '" + fields[d + 1] + "'");
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) {
    throw std::runtime_error("empty embeddings file: " + path);
  }

  table.vectors.resize(static_cast<Eigen::Index>(rows.size()), table.dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int d = 0; d < table.dim; ++d) {
      table.vectors(static_cast<Eigen::Index>(r), d) = rows[r][d];
    }
  }

  int unknown_row = table.index_of(kUnknownToken);
  if (unknown_row >= 0) {
    table.unknown_vector = table.vectors.row(unknown_row).transpose();
  } else {
    table.unknown_vector = table.vectors.colwise().mean().transpose();
  }
  return table;
}

struct CoverageReport {
  double oov_fraction = 0.0;              // distinct OOV types / distinct types
  std::vector<std::string> oov_types;     // sorted lexicographically
};

inline CoverageReport coverage_report(const EmbeddingTable& table,
                                      const std::vector<std::string>& corpus) {
  if (corpus.empty()) {
    throw std::invalid_argument("coverage_report: empty corpus");
  }
  std::set<std::string> types(corpus.begin(), corpus.end());
  CoverageReport report;
  for (const auto& token : types) {
    if (table.index_of(token) < 0) report.oov_types.push_back(token);
  }
  report.oov_fraction =
      static_cast<double>(report.oov_types.size()) / types.size();
  return report;
}

}  // namespace anselect
