#include "safecbf/geometry.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "safecbf/errors.hpp"
#include "safecbf/linprog.hpp"

namespace safecbf {

void Polytope::validate() const {
  if (A.rows() != b.size()) throw std::invalid_argument("Polytope: A rows != b size");
  if (A.cols() < 1) throw std::invalid_argument("Polytope: need at least one dimension");
}

namespace {

// Scans for rows with zero normal: negative offset means trivial emptiness,
// otherwise the row carries no constraint and is dropped.
struct CleanRows {
  Mat A;
  Vec b;
  bool trivially_empty = false;
};

CleanRows drop_zero_rows(const Polytope& p) {
  CleanRows out;
  std::vector<int> keep;
  for (int i = 0; i < p.rows(); ++i) {
    const double nrm = p.A.row(i).norm();
    if (nrm <= 1e-14) {
      if (p.b[i] < -kFeasibilityTol) out.trivially_empty = true;
      continue;
    }
    keep.push_back(i);
  }
  out.A.resize(static_cast<int>(keep.size()), p.dim());
  out.b.resize(static_cast<int>(keep.size()));
  for (size_t r = 0; r < keep.size(); ++r) {
    out.A.row(static_cast<int>(r)) = p.A.row(keep[r]);
    out.b[static_cast<int>(r)] = p.b[keep[r]];
  }
  return out;
}

ChebyshevBall chebyshev_lp(const Mat& A, const Vec& b, int m, std::optional<double> cap) {
  const int k = static_cast<int>(A.rows());
  const int extra = cap ? 1 : 0;
  Mat G(k + extra, m + 1);
  Vec h(k + extra);
  for (int i = 0; i < k; ++i) {
    G.row(i).head(m) = A.row(i);
    G(i, m) = A.row(i).norm();
    h[i] = b[i];
  }
  if (cap) {
    G.row(k).setZero();
    G(k, m) = 1.0;
    h[k] = *cap;
  }
  Vec c = Vec::Zero(m + 1);
  c[m] = -1.0;  // maximize r
  const LpResult lp = solve_lp(G, h, c);
  if (lp.status == LpStatus::Unbounded)
    throw UnboundedFeasibleSpace("chebyshev_center: inscribed-ball radius unbounded");
  if (lp.status == LpStatus::Infeasible) {
    // cannot happen for k >= 1 (radius may go to -inf), defensive
    ChebyshevBall ball;
    ball.center = Vec::Zero(m);
    ball.radius = -std::numeric_limits<double>::infinity();
    ball.empty = true;
    return ball;
  }
  ChebyshevBall ball;
  ball.center = lp.x.head(m);
  ball.radius = lp.x[m];
  ball.empty = ball.radius < kFeasibilityTol;
  return ball;
}

}  // namespace

ChebyshevBall chebyshev_center(const Polytope& p) {
  p.validate();
  const CleanRows cr = drop_zero_rows(p);
  if (cr.trivially_empty) {
    ChebyshevBall ball;
    ball.center = Vec::Zero(p.dim());
    ball.radius = 0.0;
    ball.empty = true;
    return ball;
  }
  if (cr.A.rows() == 0)
    throw UnboundedFeasibleSpace("chebyshev_center: no bounding rows");
  return chebyshev_lp(cr.A, cr.b, p.dim(), std::nullopt);
}

ChebyshevBall chebyshev_center_capped(const Polytope& p, double cap) {
  p.validate();
  const CleanRows cr = drop_zero_rows(p);
  if (cr.trivially_empty) {
    ChebyshevBall ball;
    ball.center = Vec::Zero(p.dim());
    ball.radius = 0.0;
    ball.empty = true;
    return ball;
  }
  if (cr.A.rows() == 0) {
    ChebyshevBall ball;
    ball.center = Vec::Zero(p.dim());
    ball.radius = cap;
    return ball;
  }
  return chebyshev_lp(cr.A, cr.b, p.dim(), cap);
}

namespace {

// Interior-point state for the MVIE program, parameterized by the
// lower-triangular factor L (B = L L^T, diagonal kept positive by the
// log-det barrier) and the center c.
struct MvieWork {
  Mat A;       // cleaned rows
  Vec b;
  int m = 0;
  int nl = 0;  // lower-triangular entry count
  int p = 0;   // total parameters nl + m

  std::vector<std::pair<int, int>> lidx;  // (row, col) per L parameter

  Mat L;
  Vec c;

  Mat B() const { return L * L.transpose(); }

  bool slacks(Vec& s) const {
    const Mat Bm = B();
    for (int i = 0; i < A.rows(); ++i) {
      const Vec w = Bm * A.row(i).transpose();
      s[i] = b[i] - A.row(i).dot(c) - w.norm();
      if (!(s[i] > 0.0)) return false;
    }
    return true;
  }

  // f_t = -2 sum log L_jj - (1/t) sum log s_i ; +inf off the domain
  double objective(double inv_t) const {
    for (int j = 0; j < m; ++j)
      if (!(L(j, j) > 0.0)) return std::numeric_limits<double>::infinity();
    Vec s(A.rows());
    if (!slacks(s)) return std::numeric_limits<double>::infinity();
    double f = 0.0;
    for (int j = 0; j < m; ++j) f -= 2.0 * std::log(L(j, j));
    for (int i = 0; i < A.rows(); ++i) f -= inv_t * std::log(s[i]);
    return f;
  }

  void gradient_hessian(double inv_t, Vec& g, Mat& H) const {
    g.setZero(p);
    H.setZero(p, p);
    // log-det part
    for (int kparam = 0; kparam < nl; ++kparam) {
      const auto [r, cidx] = lidx[kparam];
      if (r == cidx) {
        g[kparam] += -2.0 / L(r, r);
        H(kparam, kparam) += 2.0 / (L(r, r) * L(r, r));
      }
    }
    const Mat Bm = B();
    const int k = static_cast<int>(A.rows());
    Mat V(m, p);      // dB_k a  per parameter (columns)
    Vec ds(p), a(m);
    for (int i = 0; i < k; ++i) {
      a = A.row(i).transpose();
      const Vec w = Bm * a;
      const double n = w.norm();
      const double s = b[i] - a.dot(c) - n;
      const Vec lta = L.transpose() * a;
      // first derivatives
      for (int kparam = 0; kparam < nl; ++kparam) {
        const auto [r, cidx] = lidx[kparam];
        // dB = E L^T + L E^T with E = e_r e_cidx^T
        Vec v = Vec::Zero(m);
        v[r] += lta[cidx];
        v += a[r] * L.col(cidx);
        V.col(kparam) = v;
        const double dn = w.dot(v) / n;
        ds[kparam] = -dn;
      }
      for (int j = 0; j < m; ++j) {
        V.col(nl + j).setZero();
        ds[nl + j] = -a[j];
      }
      // gradient of -(1/t) log s
      g += (-inv_t / s) * ds;
      // Hessian
      for (int kp = 0; kp < p; ++kp) {
        for (int lp = kp; lp < p; ++lp) {
          double d2n = 0.0;
          if (kp < nl && lp < nl) {
            const auto [r1, c1] = lidx[kp];
            const auto [r2, c2] = lidx[lp];
            // d2B a = delta_{c1 c2} (a_{r2} e_{r1} + a_{r1} e_{r2})
            double wd2 = 0.0;
            if (c1 == c2) wd2 = a[r2] * w[r1] + a[r1] * w[r2];
            const double dn_k = -ds[kp];
            const double dn_l = -ds[lp];
            d2n = (V.col(kp).dot(V.col(lp)) + wd2 - dn_k * dn_l) / n;
          }
          const double d2s = -d2n;
          const double hv = inv_t * (ds[kp] * ds[lp] / (s * s) - d2s / s);
          H(kp, lp) += hv;
          if (lp != kp) H(lp, kp) += hv;
        }
      }
    }
  }
};

}  // namespace

Ellipsoid max_inscribed_ellipsoid(const Polytope& p, double tol, const Ellipsoid* warm) {
  p.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("max_inscribed_ellipsoid: tol must be positive");
  const CleanRows cr = drop_zero_rows(p);
  if (cr.trivially_empty)
    throw InfeasibleSpace("max_inscribed_ellipsoid: trivially empty polytope");
  if (cr.A.rows() == 0)
    throw UnboundedFeasibleSpace("max_inscribed_ellipsoid: no bounding rows");

  const int m = p.dim();
  ChebyshevBall ball = chebyshev_lp(cr.A, cr.b, m, std::nullopt);
  if (ball.empty || !(ball.radius > kFeasibilityTol))
    throw InfeasibleSpace("max_inscribed_ellipsoid: degenerate polytope (Chebyshev radius <= 1e-9)");

  MvieWork w;
  w.A = cr.A;
  w.b = cr.b;
  w.m = m;
  for (int r = 0; r < m; ++r)
    for (int c = 0; c <= r; ++c) w.lidx.emplace_back(r, c);
  w.nl = static_cast<int>(w.lidx.size());
  w.p = w.nl + m;

  auto cold_start = [&]() {
    w.L = std::sqrt(0.9 * ball.radius) * Mat::Identity(m, m);
    w.c = ball.center;
  };

  bool warm_started = false;
  if (warm && warm->B.rows() == m) {
    Eigen::LLT<Mat> llt(warm->B);
    if (llt.info() == Eigen::Success) {
      w.L = llt.matrixL();
      w.c = warm->c;
      Vec s(w.A.rows());
      for (double shrink : {1.0, 0.999, 0.99, 0.9, 0.5}) {
        w.L = llt.matrixL();
        w.L *= std::sqrt(shrink);
        if (w.slacks(s) && s.minCoeff() > 1e-12 * (1.0 + w.b.cwiseAbs().maxCoeff())) {
          warm_started = true;
          break;
        }
      }
    }
  }
  if (!warm_started) cold_start();

  const int k = static_cast<int>(w.A.rows());
  const double t_final = 10.0 * k / tol;
  const int max_total_iter = 200;
  int total_iter = 0;

  Vec g(w.p);
  Mat H(w.p, w.p);
  double last_decrement = std::numeric_limits<double>::infinity();

  auto newton_at = [&](double t_barrier, int iter_budget) -> bool {
    const double inv_t = 1.0 / t_barrier;
    for (int it = 0; it < iter_budget; ++it) {
      if (total_iter >= max_total_iter) return false;
      ++total_iter;
      w.gradient_hessian(inv_t, g, H);
      Vec step;
      double ridge = 0.0;
      for (int attempt = 0; attempt < 8; ++attempt) {
        Mat Hr = H;
        if (ridge > 0.0) Hr.diagonal().array() += ridge;
        Eigen::LDLT<Mat> ldlt(Hr);
        if (ldlt.info() == Eigen::Success) {
          step = -ldlt.solve(g);
          if (step.allFinite() && g.dot(step) < 0.0) break;
        }
        ridge = (ridge == 0.0) ? 1e-10 * (1.0 + H.diagonal().cwiseAbs().maxCoeff())
                               : ridge * 100.0;
        step.resize(0);
      }
      if (step.size() == 0) return false;
      const double decrement = -g.dot(step);
      last_decrement = decrement;
      if (decrement * 0.5 < 1e-14 * (1.0 + std::abs(w.objective(inv_t)))) return true;

      const double f0 = w.objective(inv_t);
      const Mat L0 = w.L;
      const Vec c0 = w.c;
      double alpha = 1.0;
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        for (int kparam = 0; kparam < w.nl; ++kparam) {
          const auto [r, cidx] = w.lidx[kparam];
          w.L(r, cidx) = L0(r, cidx) + alpha * step[kparam];
        }
        w.c = c0 + alpha * step.tail(m);
        const double f1 = w.objective(inv_t);
        if (f1 <= f0 + 1e-4 * alpha * g.dot(step)) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        w.L = L0;
        w.c = c0;
        return true;  // stalled at numerical floor; current point is feasible
      }
    }
    return true;
  };

  if (warm_started) {
    // polish directly at the final barrier weight; fall back to the full path
    const Mat Lsave = w.L;
    const Vec csave = w.c;
    if (!newton_at(t_final, 40)) {
      w.L = Lsave;
      w.c = csave;
      warm_started = false;
      cold_start();
      total_iter = 0;
    }
  }
  if (!warm_started) {
    for (double t_barrier = 1.0; t_barrier < t_final * 19.9; t_barrier *= 20.0) {
      const double tb = std::min(t_barrier, t_final);
      if (!newton_at(tb, 50)) {
        std::ostringstream os;
        os << "max_inscribed_ellipsoid: iteration limit (" << max_total_iter
           << ") exceeded, newton decrement " << last_decrement;
        throw ConvergenceFailure(os.str(), last_decrement);
      }
      if (tb >= t_final) break;
    }
  }

  Ellipsoid e;
  e.B = w.B();
  e.B = 0.5 * (e.B + e.B.transpose());  // enforce exact symmetry
  e.c = w.c;
  return e;
}

double vcbf_value(const Ellipsoid& e, double xi) {
  const int m = e.dim();
  const double unit_ball = std::pow(M_PI, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
  return unit_ball * e.det_b() - xi;
}

bool contains(const Polytope& p, const Vec& u, double slack_tol) {
  p.validate();
  if (u.size() != p.dim()) throw std::invalid_argument("contains: dimension mismatch");
  for (int i = 0; i < p.rows(); ++i) {
    if (p.A.row(i).dot(u) > p.b[i] + slack_tol) return false;
  }
  return true;
}

}  // namespace safecbf
