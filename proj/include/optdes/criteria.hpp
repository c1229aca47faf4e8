#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

#include "optdes/model.hpp"

namespace optdes {

enum class CriterionKind { D, I };

const char* to_string(CriterionKind kind);
CriterionKind criterion_from_string(const std::string& text);

/// Score of a design under one criterion. Both criteria are minimized. A
/// singular information matrix yields the +infinity sentinel instead of an
/// error so that a stochastic search can keep evaluating candidates.
struct CriterionValue {
  CriterionKind kind = CriterionKind::D;
  double value = std::numeric_limits<double>::infinity();
  bool singular = true;
};

inline CriterionValue singular_value(CriterionKind kind) {
  return CriterionValue{kind, std::numeric_limits<double>::infinity(), true};
}

/// Integrals of model-term products over the coded cube, plus its volume.
/// w(a,b) = integral of f_a(x) f_b(x) dx over [-1,1]^K; volume = 2^K.
struct MomentMatrix {
  int factors = 0;
  Eigen::MatrixXd w;
  double volume = 0.0;
};

/// Closed-form moment matrix: per coordinate, the one-dimensional moment of
/// t^d over [-1,1] is 0 for odd d and 2/(d+1) for even d.
MomentMatrix moment_matrix(const SecondOrderModel& model);

/// det(F'F) <= kSingularDetScale * N^p (or a failed factorization) marks a
/// design singular.
inline constexpr double kSingularDetScale = 1e-12;

/// N^p / det(F'F), minimized. Computed from a factorization of F'F; the
/// inverse is never formed.
CriterionValue d_score(const Eigen::Ref<const DesignMatrix>& design,
                       const SecondOrderModel& model);

/// (N/V) tr{(F'F)^-1 W}, minimized. The trace is obtained by solving against
/// the columns of W; the inverse is never formed.
CriterionValue iv_score(const Eigen::Ref<const DesignMatrix>& design,
                        const SecondOrderModel& model, const MomentMatrix& moment);

/// Scaled prediction variance N f'(x) (F'F)^-1 f(x) at a single point.
/// Unlike the scores, this diagnostic throws on a singular design.
double spv(const Eigen::Ref<const Eigen::VectorXd>& point,
           const Eigen::Ref<const DesignMatrix>& design,
           const SecondOrderModel& model);

/// 100 * (second/first)^(1/p) for D, 100 * (second/first) for I. Values above
/// 100 mean the first design is better (both criteria are minimized).
double relative_efficiency(CriterionKind kind, const CriterionValue& first,
                           const CriterionValue& second, int params);

/// Reusable criterion evaluator for search inner loops. Owns its scratch
/// buffers so repeated evaluation does not allocate.
class CriterionEvaluator {
 public:
  CriterionEvaluator(CriterionKind kind, SecondOrderModel model);

  CriterionKind kind() const { return kind_; }
  const SecondOrderModel& model() const { return model_; }

  CriterionValue operator()(const Eigen::Ref<const DesignMatrix>& design);

 private:
  CriterionKind kind_;
  SecondOrderModel model_;
  MomentMatrix moment_;  // only populated for the I criterion
  ModelMatrix f_;
  Eigen::MatrixXd info_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  std::vector<double> scratch_;
};

}  // namespace optdes
