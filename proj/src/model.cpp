#include "optdes/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace optdes {

FactorSpace FactorSpace::coded_cube(int factors) {
  if (factors < 1) {
    throw std::invalid_argument("FactorSpace: factors must be >= 1");
  }
  FactorSpace space;
  space.factors = factors;
  space.lower = Eigen::VectorXd::Constant(factors, -1.0);
  space.upper = Eigen::VectorXd::Constant(factors, 1.0);
  return space;
}

int num_params(int factors) {
  if (factors < 1) {
    throw std::invalid_argument("num_params: factors must be >= 1");
  }
  return (factors + 1) * (factors + 2) / 2;
}

std::string ModelTerm::label() const {
  if (first < 0) return "1";
  if (second < 0) return "x" + std::to_string(first + 1);
  if (first == second) return "x" + std::to_string(first + 1) + "^2";
  return "x" + std::to_string(first + 1) + "*x" + std::to_string(second + 1);
}

SecondOrderModel::SecondOrderModel(int factors) : factors_(factors) {
  if (factors < 1) {
    throw std::invalid_argument("SecondOrderModel: factors must be >= 1");
  }
  terms_.reserve(static_cast<std::size_t>(num_params(factors)));
  terms_.push_back({-1, -1});
  for (int k = 0; k < factors; ++k) terms_.push_back({k, -1});
  for (int i = 0; i < factors; ++i) {
    for (int j = i + 1; j < factors; ++j) terms_.push_back({i, j});
  }
  for (int k = 0; k < factors; ++k) terms_.push_back({k, k});
}

Eigen::VectorXd SecondOrderModel::expand(
    const Eigen::Ref<const Eigen::VectorXd>& point) const {
  if (point.size() != factors_) {
    throw std::invalid_argument("expand: point has " +
                                std::to_string(point.size()) +
                                " coordinates, model expects " +
                                std::to_string(factors_));
  }
  Eigen::VectorXd row(params());
  for (int t = 0; t < params(); ++t) {
    const ModelTerm& term = terms_[static_cast<std::size_t>(t)];
    if (term.first < 0) {
      row[t] = 1.0;
    } else if (term.second < 0) {
      row[t] = point[term.first];
    } else {
      row[t] = point[term.first] * point[term.second];
    }
  }
  return row;
}

ModelMatrix model_matrix(const Eigen::Ref<const DesignMatrix>& design,
                         const SecondOrderModel& model) {
  if (design.cols() != model.factors()) {
    throw std::invalid_argument("model_matrix: design has " +
                                std::to_string(design.cols()) +
                                " factors, model expects " +
                                std::to_string(model.factors()));
  }
  const Eigen::Index n = design.rows();
  const int p = model.params();
  ModelMatrix f(n, p);
  for (int t = 0; t < p; ++t) {
    const ModelTerm& term = model.terms()[static_cast<std::size_t>(t)];
    if (term.first < 0) {
      f.col(t).setOnes();
    } else if (term.second < 0) {
      f.col(t) = design.col(term.first);
    } else {
      f.col(t) = design.col(term.first).cwiseProduct(design.col(term.second));
    }
  }
  return f;
}

namespace {

// Sum of elementwise products in ascending order. The sorted order depends
// only on the multiset of products, which makes the sum invariant under row
// permutation of F down to the last bit.
double stable_dot(const double* a, const double* b, Eigen::Index n,
                  std::vector<double>& scratch) {
  scratch.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    scratch[static_cast<std::size_t>(i)] = a[i] * b[i];
  }
  std::sort(scratch.begin(), scratch.end());
  double sum = 0.0;
  for (double v : scratch) sum += v;
  return sum;
}

}  // namespace

void information_matrix_into(const Eigen::Ref<const ModelMatrix>& model_mat,
                             Eigen::MatrixXd& out,
                             std::vector<double>& scratch) {
  const Eigen::Index p = model_mat.cols();
  const Eigen::Index n = model_mat.rows();
  out.resize(p, p);
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = a; b < p; ++b) {
      const double value =
          stable_dot(model_mat.col(a).data(), model_mat.col(b).data(), n, scratch);
      out(a, b) = value;
      out(b, a) = value;
    }
  }
}

Eigen::MatrixXd information_matrix(
    const Eigen::Ref<const ModelMatrix>& model_mat) {
  Eigen::MatrixXd out;
  std::vector<double> scratch;
  information_matrix_into(model_mat, out, scratch);
  return out;
}

}  // namespace optdes
