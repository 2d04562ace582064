#include "safecbf/qp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "safecbf/geometry.hpp"

namespace safecbf {

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "Optimal";
    case QpStatus::Infeasible: return "Infeasible";
    case QpStatus::MaxIterations: return "MaxIterations";
  }
  return "?";
}

void QpProblem::validate() const {
  const int n = static_cast<int>(H.rows());
  if (H.cols() != n) throw std::invalid_argument("QpProblem: H not square");
  if (q.size() != n) throw std::invalid_argument("QpProblem: q size mismatch");
  if (A.rows() != b.size()) throw std::invalid_argument("QpProblem: A rows != b size");
  if (A.rows() > 0 && A.cols() != n) throw std::invalid_argument("QpProblem: A cols mismatch");
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + H.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("QpProblem: H not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  if (es.eigenvalues().minCoeff() <= 1e-12)
    throw std::invalid_argument("QpProblem: H not positive definite");
}

namespace {

double kkt_residual_of(const QpProblem& p, const Vec& z, const Vec& duals) {
  double r = (p.H * z + p.q + p.A.transpose() * duals).cwiseAbs().maxCoeff();
  if (p.A.rows() > 0) {
    const Vec viol = p.A * z - p.b;
    r = std::max(r, viol.maxCoeff());
    r = std::max(r, -duals.minCoeff());
    r = std::max(r, (duals.array() * viol.array()).abs().maxCoeff());
  }
  return r;
}

}  // namespace

QpSolution solve_qp(const QpProblem& p, double tol) {
  p.validate();
  const int n = static_cast<int>(p.H.rows());
  const int k = static_cast<int>(p.A.rows());

  Eigen::LLT<Mat> hchol(p.H);
  if (hchol.info() != Eigen::Success)
    throw std::invalid_argument("solve_qp: Cholesky of H failed");

  QpSolution sol;
  sol.duals = Vec::Zero(k);

  if (k == 0) {
    sol.z = -hchol.solve(p.q);
    sol.status = QpStatus::Optimal;
    sol.kkt_residual = kkt_residual_of(p, sol.z, sol.duals);
    return sol;
  }

  // normalize rows so mixed constraint scales do not wreck the ratio tests
  Mat An(k, n);
  Vec bn(k), row_scale(k);
  for (int i = 0; i < k; ++i) {
    const double s = std::max(p.A.row(i).norm(), 1e-12);
    row_scale[i] = s;
    An.row(i) = p.A.row(i) / s;
    bn[i] = p.b[i] / s;
  }

  // feasibility certificate + strictly interior starting point
  const double scale = 1.0 + bn.cwiseAbs().maxCoeff();
  Polytope poly{An, bn};
  const ChebyshevBall ball = chebyshev_center_capped(poly, scale);
  if (ball.empty) {
    sol.status = QpStatus::Infeasible;
    sol.z = Vec::Zero(n);
    return sol;
  }

  Vec z = ball.center;
  std::vector<int> work;
  const int max_iter = 200 * (k + 2);
  const int bland_after = 20 * (k + 2);

  auto eqp_step = [&](const Vec& grad, Vec& step, Vec& nu) -> bool {
    if (work.empty()) {
      step = -hchol.solve(grad);
      nu.resize(0);
      return true;
    }
    const int nw = static_cast<int>(work.size());
    Mat Aw(nw, n);
    for (int i = 0; i < nw; ++i) Aw.row(i) = An.row(work[i]);
    const Mat Y = hchol.solve(Aw.transpose());
    Mat S = Aw * Y;
    S.diagonal().array() += 1e-13 * (1.0 + S.diagonal().cwiseAbs().maxCoeff());
    Eigen::LDLT<Mat> ldlt(S);
    if (ldlt.info() != Eigen::Success) return false;
    nu = ldlt.solve(-Aw * hchol.solve(grad));
    if (!nu.allFinite()) return false;
    step = -hchol.solve(grad + Aw.transpose() * nu);
    return true;
  };

  // Examines the multipliers at an EQP optimum: returns true when the outer
  // loop should finish (sol filled in), otherwise drops one working row.
  auto multiplier_check = [&](const Vec& nu, int iter) -> bool {
    int drop = -1;
    if (iter >= bland_after) {
      for (size_t i = 0; i < work.size(); ++i) {
        if (nu[static_cast<int>(i)] < -tol &&
            (drop < 0 || work[i] < work[static_cast<size_t>(drop)]))
          drop = static_cast<int>(i);
      }
    } else {
      double worst = -tol;
      for (size_t i = 0; i < work.size(); ++i) {
        if (nu[static_cast<int>(i)] < worst) {
          worst = nu[static_cast<int>(i)];
          drop = static_cast<int>(i);
        }
      }
    }
    if (drop < 0) {
      sol.z = z;
      sol.duals.setZero();
      for (size_t i = 0; i < work.size(); ++i)
        sol.duals[work[i]] = std::max(0.0, nu[static_cast<int>(i)]) / row_scale[work[i]];
      sol.status = QpStatus::Optimal;
      sol.kkt_residual = kkt_residual_of(p, sol.z, sol.duals);
      return true;
    }
    work.erase(work.begin() + drop);
    return false;
  };

  for (int iter = 0; iter < max_iter; ++iter) {
    const Vec grad = p.H * z + p.q;
    Vec step, nu;
    if (!eqp_step(grad, step, nu)) {
      work.pop_back();
      continue;
    }

    const double step_norm = step.size() ? step.cwiseAbs().maxCoeff() : 0.0;
    if (step_norm <= 1e-10 * (1.0 + z.cwiseAbs().maxCoeff())) {
      if (multiplier_check(nu, iter)) return sol;
      continue;
    }

    // ratio test against rows outside the working set
    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < k; ++i) {
      if (std::find(work.begin(), work.end(), i) != work.end()) continue;
      const double ai_step = An.row(i).dot(step);
      if (ai_step > 1e-13) {
        const double gap = std::max(0.0, bn[i] - An.row(i).dot(z));
        const double a = gap / ai_step;
        if (a < alpha) {
          alpha = a;
          blocking = i;
        }
      }
    }
    z += alpha * step;
    if (blocking >= 0) {
      work.push_back(blocking);
    } else {
      // full step lands on the EQP optimum for this working set
      if (multiplier_check(nu, iter)) return sol;
    }
  }

  sol.z = z;
  sol.status = QpStatus::MaxIterations;
  sol.kkt_residual = kkt_residual_of(p, z, sol.duals);
  return sol;
}

}  // namespace safecbf
