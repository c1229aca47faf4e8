#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace optdes {

/// N x K matrix of coded factor settings; each row is one design point.
using DesignMatrix = Eigen::MatrixXd;

/// N x p matrix of expanded model terms (first column all ones).
using ModelMatrix = Eigen::MatrixXd;

/// Hyperrectangular factor region. Everything in this library operates on the
/// coded cube [-1, 1]^K; the bounds are carried so other regions stay possible.
struct FactorSpace {
  int factors = 0;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static FactorSpace coded_cube(int factors);
};

/// Coefficient count of the full second-order model on `factors` factors:
/// 1 intercept + K linear + K(K-1)/2 interactions + K quadratics = (K+1)(K+2)/2.
int num_params(int factors);

/// One monomial of the second-order model, identified by the factor indices it
/// involves: (-1,-1) intercept, (k,-1) linear, (i,j) i<j interaction,
/// (k,k) pure quadratic.
struct ModelTerm {
  int first = -1;
  int second = -1;

  int exponent_of(int factor) const {
    int e = 0;
    if (first == factor) ++e;
    if (second == factor) ++e;
    return e;
  }
  std::string label() const;
};

/// Term layout of the full second-order response-surface model. The column
/// order is fixed: intercept, x1..xK, interactions (1,2),(1,3),...,(K-1,K),
/// then x1^2..xK^2. File formats and matrix comparisons rely on this order.
class SecondOrderModel {
 public:
  explicit SecondOrderModel(int factors);

  int factors() const { return factors_; }
  int params() const { return static_cast<int>(terms_.size()); }
  const std::vector<ModelTerm>& terms() const { return terms_; }

  /// Expands one design point into its model row (1, x, cross products, x^2).
  Eigen::VectorXd expand(const Eigen::Ref<const Eigen::VectorXd>& point) const;

 private:
  int factors_;
  std::vector<ModelTerm> terms_;
};

/// Row i of the result is the expansion of row i of `design`.
ModelMatrix model_matrix(const Eigen::Ref<const DesignMatrix>& design,
                         const SecondOrderModel& model);

/// F'F. Each entry accumulates its N products in sorted order, so the result
/// is bit-identical under any permutation of the rows of F, and the matrix is
/// exactly symmetric by construction.
Eigen::MatrixXd information_matrix(const Eigen::Ref<const ModelMatrix>& model_mat);

/// Allocation-free variant for hot loops; `scratch` is resized as needed.
void information_matrix_into(const Eigen::Ref<const ModelMatrix>& model_mat,
                             Eigen::MatrixXd& out, std::vector<double>& scratch);

}  // namespace optdes
