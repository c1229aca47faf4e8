#include "optdes/criteria.hpp"

#include <cmath>
#include <stdexcept>

namespace optdes {

const char* to_string(CriterionKind kind) {
  return kind == CriterionKind::D ? "D" : "I";
}

CriterionKind criterion_from_string(const std::string& text) {
  if (text == "D" || text == "d") return CriterionKind::D;
  if (text == "I" || text == "i") return CriterionKind::I;
  throw std::invalid_argument("unknown criterion '" + text + "' (expected D or I)");
}

MomentMatrix moment_matrix(const SecondOrderModel& model) {
  const int k = model.factors();
  const int p = model.params();
  MomentMatrix moment;
  moment.factors = k;
  moment.volume = std::ldexp(1.0, k);  // 2^K
  moment.w.resize(p, p);
  for (int a = 0; a < p; ++a) {
    const ModelTerm& ta = model.terms()[static_cast<std::size_t>(a)];
    for (int b = a; b < p; ++b) {
      const ModelTerm& tb = model.terms()[static_cast<std::size_t>(b)];
      double value = 1.0;
      for (int c = 0; c < k; ++c) {
        const int degree = ta.exponent_of(c) + tb.exponent_of(c);
        if (degree % 2 == 1) {
          value = 0.0;
          break;
        }
        value *= 2.0 / (degree + 1);
      }
      moment.w(a, b) = value;
      moment.w(b, a) = value;
    }
  }
  return moment;
}

namespace {

// Factors F'F and returns its determinant, or a negative/zero value when the
// matrix is numerically rank-deficient. `npow` = N^p.
bool factor_information(const Eigen::MatrixXd& info, double npow,
                        Eigen::LDLT<Eigen::MatrixXd>& ldlt, double& det) {
  ldlt.compute(info);
  det = ldlt.vectorD().prod();
  if (ldlt.info() != Eigen::Success) return false;
  if (!std::isfinite(det)) return false;
  return det > kSingularDetScale * npow;
}

}  // namespace

CriterionValue d_score(const Eigen::Ref<const DesignMatrix>& design,
                       const SecondOrderModel& model) {
  CriterionEvaluator eval(CriterionKind::D, model);
  return eval(design);
}

CriterionValue iv_score(const Eigen::Ref<const DesignMatrix>& design,
                        const SecondOrderModel& model,
                        const MomentMatrix& moment) {
  if (moment.factors != model.factors()) {
    throw std::invalid_argument("iv_score: moment matrix factor count mismatch");
  }
  CriterionEvaluator eval(CriterionKind::I, model);
  return eval(design);
}

double spv(const Eigen::Ref<const Eigen::VectorXd>& point,
           const Eigen::Ref<const DesignMatrix>& design,
           const SecondOrderModel& model) {
  const ModelMatrix f = model_matrix(design, model);
  const Eigen::MatrixXd info = information_matrix(f);
  const double n = static_cast<double>(design.rows());
  const double npow = std::pow(n, model.params());
  Eigen::LDLT<Eigen::MatrixXd> ldlt;
  double det = 0.0;
  if (!factor_information(info, npow, ldlt, det)) {
    throw std::domain_error("spv: design has a singular information matrix");
  }
  const Eigen::VectorXd fx = model.expand(point);
  return n * fx.dot(ldlt.solve(fx));
}

double relative_efficiency(CriterionKind kind, const CriterionValue& first,
                           const CriterionValue& second, int params) {
  if (first.singular || second.singular) {
    throw std::invalid_argument("relative_efficiency: singular criterion value");
  }
  if (!(first.value > 0.0) || !(second.value > 0.0)) {
    throw std::invalid_argument("relative_efficiency: values must be positive");
  }
  if (params < 1) {
    throw std::invalid_argument("relative_efficiency: params must be >= 1");
  }
  const double ratio = second.value / first.value;
  if (kind == CriterionKind::D) {
    return 100.0 * std::pow(ratio, 1.0 / params);
  }
  return 100.0 * ratio;
}

CriterionEvaluator::CriterionEvaluator(CriterionKind kind, SecondOrderModel model)
    : kind_(kind), model_(std::move(model)) {
  if (kind_ == CriterionKind::I) {
    moment_ = moment_matrix(model_);
  }
  // Prime the factorization: a default-constructed LDLT carries an
  // uninitialized info flag, which copies of this evaluator would read.
  ldlt_.compute(Eigen::MatrixXd::Identity(model_.params(), model_.params()));
}

CriterionValue CriterionEvaluator::operator()(
    const Eigen::Ref<const DesignMatrix>& design) {
  const Eigen::Index n_points = design.rows();
  if (design.cols() != model_.factors() || n_points < 1) {
    throw std::invalid_argument("criterion evaluation: design shape mismatch");
  }
  const int p = model_.params();
  f_.resize(n_points, p);
  for (int t = 0; t < p; ++t) {
    const ModelTerm& term = model_.terms()[static_cast<std::size_t>(t)];
    if (term.first < 0) {
      f_.col(t).setOnes();
    } else if (term.second < 0) {
      f_.col(t) = design.col(term.first);
    } else {
      f_.col(t) = design.col(term.first).cwiseProduct(design.col(term.second));
    }
  }
  information_matrix_into(f_, info_, scratch_);

  const double n = static_cast<double>(n_points);
  const double npow = std::pow(n, p);
  double det = 0.0;
  if (!factor_information(info_, npow, ldlt_, det)) {
    return singular_value(kind_);
  }
  if (kind_ == CriterionKind::D) {
    return CriterionValue{kind_, npow / det, false};
  }
  const double trace = ldlt_.solve(moment_.w).trace();
  return CriterionValue{kind_, n / moment_.volume * trace, false};
}

}  // namespace optdes
