#pragma once

#include "anselect/matcher.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace anselect {

// Checkpoint text format:
//   anselect-v1 dim=<d> model=<unigram|bigram>
// then row-major matrices, one row per line, full double precision:
//   M (d rows), then for the bigram model T_L, T_R (d rows each) and
//   b_c (one row), then the scalar b on its own line.
inline constexpr const char* kCheckpointMagic = "anselect-v1";

namespace detail {

inline void write_matrix_rows(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << m(r, c);
    }
    out << '\n';
  }
}

inline Eigen::MatrixXd read_matrix_rows(std::istream& in, Eigen::Index rows,
                                        Eigen::Index cols,
                                        const std::string& what) {
  Eigen::MatrixXd m(rows, cols);
  std::string line;
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) {
      throw std::runtime_error("checkpoint truncated while reading " + what);
    }
    std::istringstream row(line);
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!(row >> m(r, c))) {
        throw std::runtime_error("checkpoint: bad value in " + what +
                                 " row " + std::to_string(r));
      }
    }
  }
  return m;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const ModelTheta& theta) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write checkpoint: " + path);
  }
  out << std::setprecision(17);
  out << kCheckpointMagic << " dim=" << theta.dim() << " model="
      << (theta.is_bigram() ? "bigram" : "unigram") << '\n';
  detail::write_matrix_rows(out, theta.matcher.m);
  if (theta.bigram) {
    detail::write_matrix_rows(out, theta.bigram->t_left);
    detail::write_matrix_rows(out, theta.bigram->t_right);
    detail::write_matrix_rows(out, theta.bigram->bias.transpose());
  }
  out << theta.matcher.bias << '\n';
}

inline ModelTheta load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open checkpoint: " + path);
  }
  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error("checkpoint: missing header in " + path);
  }
  std::istringstream fields(header);
  std::string magic, dim_field, model_field;
  fields >> magic >> dim_field >> model_field;
  if (magic != kCheckpointMagic || dim_field.rfind("dim=", 0) != 0 ||
      model_field.rfind("model=", 0) != 0) {
    throw std::runtime_error("checkpoint: unrecognized header '" + header +
                             "' in " + path);
  }
  const int dim = std::stoi(dim_field.substr(4));
  const std::string model = model_field.substr(6);
  if (dim <= 0 || (model != "unigram" && model != "bigram")) {
    throw std::runtime_error("checkpoint: unrecognized header '" + header +
                             "' in " + path);
  }

  ModelTheta theta;
  theta.matcher.m = detail::read_matrix_rows(in, dim, dim, "M");
  if (model == "bigram") {
    BigramParams bigram;
    bigram.t_left = detail::read_matrix_rows(in, dim, dim, "T_L");
    bigram.t_right = detail::read_matrix_rows(in, dim, dim, "T_R");
    bigram.bias = detail::read_matrix_rows(in, 1, dim, "b_c").row(0).transpose();
    theta.bigram = std::move(bigram);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("checkpoint truncated while reading bias");
  }
  std::istringstream bias_line(line);
  if (!(bias_line >> theta.matcher.bias)) {
    throw std::runtime_error("checkpoint: bad bias value in " + path);
  }
  return theta;
}

}  // namespace anselect
