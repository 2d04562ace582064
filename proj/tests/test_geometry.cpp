#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "safecbf/errors.hpp"
#include "safecbf/geometry.hpp"
#include "safecbf/linprog.hpp"

using namespace safecbf;

namespace {

Polytope box2(double ax, double bx, double ay, double by) {
  Polytope p;
  p.A.resize(4, 2);
  p.b.resize(4);
  p.A << 1, 0, -1, 0, 0, 1, 0, -1;
  p.b << bx, -ax, by, -ay;
  return p;
}

Polytope unit_box(int m) {
  Polytope p;
  p.A.resize(2 * m, m);
  p.A.setZero();
  p.b.resize(2 * m);
  for (int j = 0; j < m; ++j) {
    p.A(j, j) = 1.0;
    p.b[j] = 1.0;
    p.A(m + j, j) = -1.0;
    p.b[m + j] = 1.0;
  }
  return p;
}

double max_row_violation(const Polytope& p, const Ellipsoid& e) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.rows(); ++i) {
    const Vec a = p.A.row(i).transpose();
    worst = std::max(worst, (e.B * a).norm() + a.dot(e.c) - p.b[i]);
  }
  return worst;
}

}  // namespace

TEST_CASE("simplex solves a textbook LP") {
  // min -x - y  s.t.  x + y <= 4, x <= 3, y <= 2, -x <= 0, -y <= 0
  Mat A(5, 2);
  A << 1, 1, 1, 0, 0, 1, -1, 0, 0, -1;
  Vec b(5);
  b << 4, 3, 2, 0, 0;
  Vec c(2);
  c << -1, -1;
  const LpResult r = solve_lp(A, b, c);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-4.0));
}

TEST_CASE("simplex detects infeasibility and unboundedness") {
  Mat A(2, 1);
  A << 1, -1;
  Vec b(2);
  b << -2, 1;  // x <= -2 and x >= -1
  Vec c(1);
  c << 1;
  CHECK(solve_lp(A, b, c).status == LpStatus::Infeasible);

  Mat A2(1, 1);
  A2 << 1;  // x <= 1, minimize x
  Vec b2(1);
  b2 << 1;
  CHECK(solve_lp(A2, b2, c).status == LpStatus::Unbounded);
}

TEST_CASE("simplex matches vertex enumeration on random 2-D LPs") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss(0.0, 1.0);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Polytope p = box2(-2, 2, -2, 2);
    Mat A(6, 2);
    Vec b(6);
    A.topRows(4) = p.A;
    b.head(4) = p.b;
    for (int i = 4; i < 6; ++i) {
      A(i, 0) = gauss(rng);
      A(i, 1) = gauss(rng);
      b[i] = gauss(rng);
    }
    Vec c(2);
    c << gauss(rng), gauss(rng);

    // brute force: all pairwise row intersections + feasibility filter
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 6; ++i) {
      for (int j = i + 1; j < 6; ++j) {
        Mat M(2, 2);
        M.row(0) = A.row(i);
        M.row(1) = A.row(j);
        if (std::abs(M.determinant()) < 1e-9) continue;
        Vec rhs(2);
        rhs << b[i], b[j];
        const Vec v = M.colPivHouseholderQr().solve(rhs);
        if (((A * v - b).array() <= 1e-9).all()) best = std::min(best, c.dot(v));
      }
    }
    if (!std::isfinite(best)) continue;  // empty feasible set
    const LpResult r = solve_lp(A, b, c);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(best).epsilon(1e-7));
    ++solved;
  }
  CHECK(solved > 100);
}

TEST_CASE("chebyshev center of the symmetric box") {
  const ChebyshevBall ball = chebyshev_center(box2(-1, 1, -1, 1));
  CHECK_FALSE(ball.empty);
  CHECK(ball.radius == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ball.center.cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("chebyshev center flags contradictory bounds as empty") {
  Polytope p = box2(-1, 1, -1, 1);
  Mat A(5, 2);
  Vec b(5);
  A.topRows(4) = p.A;
  b.head(4) = p.b;
  A.row(4) << 1, 0;
  b[4] = -2;  // u_1 <= -2
  p.A = A;
  p.b = b;
  CHECK(chebyshev_center(p).empty);
}

TEST_CASE("chebyshev center of the unit right triangle matches the incircle") {
  Polytope p;
  p.A.resize(3, 2);
  p.b.resize(3);
  p.A << -1, 0, 0, -1, 1, 1;
  p.b << 0, 0, 1;
  const ChebyshevBall ball = chebyshev_center(p);
  CHECK_FALSE(ball.empty);
  const double expected = 1.0 / (2.0 + std::sqrt(2.0));
  CHECK(ball.radius == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("chebyshev center throws on unbounded radius") {
  Polytope p;
  p.A = Mat::Zero(2, 2);
  p.b = Vec::Ones(2);
  CHECK_THROWS_AS(chebyshev_center(p), UnboundedFeasibleSpace);
}

TEST_CASE("zero rows with negative offset mark trivial infeasibility") {
  Polytope p = box2(-1, 1, -1, 1);
  Mat A(5, 2);
  Vec b(5);
  A.topRows(4) = p.A;
  b.head(4) = p.b;
  A.row(4).setZero();
  b[4] = -0.5;
  p.A = A;
  p.b = b;
  CHECK(chebyshev_center(p).empty);
  CHECK_THROWS_AS(max_inscribed_ellipsoid(p), InfeasibleSpace);
}

TEST_CASE("MVIE of the unit box is the unit ball") {
  const Ellipsoid e = max_inscribed_ellipsoid(unit_box(2), 1e-8);
  CHECK((e.B - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(e.c.cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(e.det_b() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("MVIE of an axis-aligned box scales per axis") {
  const Ellipsoid e = max_inscribed_ellipsoid(box2(-2, 2, -1, 1), 1e-8);
  CHECK(e.B(0, 0) == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(e.B(1, 1) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(std::abs(e.B(0, 1)) <= 1e-7);
  CHECK(e.c.cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("MVIE of the right triangle matches the Steiner inellipse area") {
  Polytope p;
  p.A.resize(3, 2);
  p.b.resize(3);
  p.A << -1, 0, 0, -1, 1, 1;
  p.b << 0, 0, 1;
  const Ellipsoid e = max_inscribed_ellipsoid(p, 1e-8);
  const double area = M_PI * e.det_b();
  const double expected = M_PI / (6.0 * std::sqrt(3.0));
  CHECK(std::abs(area - expected) <= 1e-4);
  CHECK(max_row_violation(p, e) <= 1e-7);
}

TEST_CASE("MVIE feasibility, sampled optimality, and invariances on random polytopes") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.3, 2.0);
  const double tol = 1e-8;
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 2);
    const int extra = 2 + static_cast<int>(rng() % 4);
    Polytope p;
    p.A.resize(2 * m + extra, m);
    p.b.resize(2 * m + extra);
    p.A.setZero();
    for (int j = 0; j < m; ++j) {
      p.A(j, j) = 1.0;
      p.b[j] = unif(rng);
      p.A(m + j, j) = -1.0;
      p.b[m + j] = unif(rng);
    }
    for (int i = 0; i < extra; ++i) {
      Vec a(m);
      for (int j = 0; j < m; ++j) a[j] = gauss(rng);
      a.normalize();
      p.A.row(2 * m + i) = a.transpose();
      p.b[2 * m + i] = unif(rng);
    }

    const Ellipsoid e = max_inscribed_ellipsoid(p, tol);
    CHECK(max_row_violation(p, e) <= 10.0 * tol);

    // sampled optimality: PD shrinkages recentered inside never beat det B
    const ChebyshevBall ball = chebyshev_center(p);
    std::normal_distribution<double> jitter(0.0, 0.3 * ball.radius);
    for (int s = 0; s < 1000; ++s) {
      Mat S = Mat::Zero(m, m);
      for (int j = 0; j < m; ++j)
        S(j, j) = 0.5 + 0.5 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      Ellipsoid cand;
      cand.B = (e.B * S).eval();
      cand.B = (0.5 * (cand.B + cand.B.transpose())).eval();
      cand.c = ball.center;
      for (int j = 0; j < m; ++j) cand.c[j] += jitter(rng);
      if (max_row_violation(p, cand) <= 0.0)
        CHECK(cand.B.determinant() <= e.det_b() + 10.0 * tol);
    }

    // row-scaling invariance
    Polytope scaled = p;
    std::uniform_real_distribution<double> scale_dist(0.2, 5.0);
    for (int i = 0; i < p.rows(); ++i) {
      const double s = scale_dist(rng);
      scaled.A.row(i) *= s;
      scaled.b[i] *= s;
    }
    const Ellipsoid es = max_inscribed_ellipsoid(scaled, tol);
    CHECK((es.B - e.B).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((es.c - e.c).cwiseAbs().maxCoeff() <= 1e-6);

    // translation equivariance
    Vec t(m);
    for (int j = 0; j < m; ++j) t[j] = gauss(rng);
    Polytope shifted = p;
    shifted.b += p.A * t;
    const Ellipsoid et = max_inscribed_ellipsoid(shifted, tol);
    CHECK((et.B - e.B).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((et.c - (e.c + t)).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("MVIE warm start reproduces the cold solution") {
  Polytope p = box2(-1.5, 2.0, -0.5, 1.0);
  const Ellipsoid cold = max_inscribed_ellipsoid(p, 1e-8);
  // perturb the offsets slightly and warm start from the old solution
  Polytope p2 = p;
  p2.b.array() += 0.01;
  const Ellipsoid warm = max_inscribed_ellipsoid(p2, 1e-8, &cold);
  const Ellipsoid cold2 = max_inscribed_ellipsoid(p2, 1e-8);
  CHECK((warm.B - cold2.B).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((warm.c - cold2.c).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("MVIE rejects degenerate polytopes") {
  Polytope p;
  p.A.resize(2, 2);
  p.b.resize(2);
  p.A << 1, 0, -1, 0;
  p.b << 0.0, 0.0;  // slab of zero width
  CHECK_THROWS_AS(max_inscribed_ellipsoid(p), InfeasibleSpace);
}

TEST_CASE("vcbf_value applies the unit-ball volume scale") {
  Ellipsoid e;
  e.B = Mat::Identity(2, 2);
  e.c = Vec::Zero(2);
  CHECK(vcbf_value(e, 1e-6) == doctest::Approx(M_PI - 1e-6).epsilon(1e-12));

  Ellipsoid e3;
  e3.B = Mat::Identity(3, 3);
  e3.c = Vec::Zero(3);
  CHECK(vcbf_value(e3, 0.0) == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-12));

  Ellipsoid es;
  es.B = (Mat(2, 2) << 2, 0, 0, 1).finished();
  es.c = Vec::Zero(2);
  CHECK(vcbf_value(es, 0.0) == doctest::Approx(2.0 * M_PI).epsilon(1e-12));
}

TEST_CASE("vcbf_value is strictly monotone in det B") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.2, 3.0);
  double last_det = 0.0, last_v = -1.0;
  for (int i = 0; i < 20; ++i) {
    Ellipsoid e;
    const double d1 = unif(rng), d2 = unif(rng);
    e.B = (Mat(2, 2) << d1, 0, 0, d2).finished();
    e.c = Vec::Zero(2);
    const double det = e.det_b();
    const double v = vcbf_value(e, 1e-4);
    if (i > 0 && det > last_det) CHECK(v > last_v);
    if (i > 0 && det < last_det) CHECK(v < last_v);
    last_det = det;
    last_v = v;
  }
}

TEST_CASE("contains honors the slack band") {
  const Polytope p = box2(-1, 1, -1, 1);
  CHECK(contains(p, (Vec(2) << 0, 0).finished()));
  CHECK_FALSE(contains(p, (Vec(2) << 1.1, 0).finished()));
  CHECK(contains(p, (Vec(2) << 1.0 + 1e-12, 0).finished(), 1e-9));
}
