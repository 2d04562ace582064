#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "safecbf/errors.hpp"
#include "safecbf/filters.hpp"

using namespace safecbf;

namespace {

Plant blimp_plant() {
  Plant p;
  p.kind = PlantKind::Blimp;
  return p;
}

BarrierSpec sphere_barrier(double cx, double cy, double cz, double R) {
  BarrierSpec b;
  b.kind = BarrierKind::SphereSignedDistance;
  b.center = (Vec(3) << cx, cy, cz).finished();
  b.radius = R;
  b.poles = PoleSet((Vec(2) << 0.3686, 9.6314).finished());
  return b;
}

SafetyFilter make_filter(FilterMethod method, std::vector<BarrierSpec> barriers) {
  FilterConfig cfg;
  cfg.method = method;
  ObserverGains g;
  return SafetyFilter(cfg, blimp_plant(), std::move(barriers),
                      Vec::Constant(3, -2.0), Vec::Constant(3, 2.0), g);
}

}  // namespace

TEST_CASE("method names round-trip") {
  for (FilterMethod m : {FilterMethod::Nominal, FilterMethod::WorstCaseRobust,
                         FilterMethod::DobCbf, FilterMethod::VcbfNoDob,
                         FilterMethod::DobVcbf}) {
    const auto back = filter_method_from_string(to_string(m));
    REQUIRE(back.has_value());
    CHECK(*back == m);
  }
  CHECK_FALSE(filter_method_from_string("bogus").has_value());
}

TEST_CASE("feasible reference passes through every method") {
  std::vector<BarrierSpec> barriers{sphere_barrier(5.0, 5.0, 5.0, 0.3)};  // far away
  Vec x = Vec::Zero(8);
  Vec u_ref(3);
  u_ref << 0.4, -0.3, 0.1;
  for (FilterMethod m : {FilterMethod::Nominal, FilterMethod::WorstCaseRobust,
                         FilterMethod::DobCbf, FilterMethod::VcbfNoDob,
                         FilterMethod::DobVcbf}) {
    SafetyFilter f = make_filter(m, barriers);
    const FilterOutput out = f.step(x, u_ref, Vec::Zero(8), 0.0);
    REQUIRE(out.qp_status == QpStatus::Optimal);
    CHECK((out.u - u_ref).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK(std::abs(out.slack) <= 1e-7);
  }
}

TEST_CASE("DobCbf constraint rows equal the assembled DOB polytope bit for bit") {
  std::vector<BarrierSpec> barriers{sphere_barrier(1.0, 0.2, -0.3, 0.4),
                                    sphere_barrier(-0.8, 0.5, 0.6, 0.3)};
  const Plant plant = blimp_plant();
  ObserverGains g;
  Vec x = Vec::Zero(8);
  x.head(3) << 0.1, -0.2, 0.05;
  x.segment(4, 3) << 0.4, 0.0, -0.2;
  x[7] = 1.7;
  Vec d_hat = Vec::Zero(8);
  d_hat.segment(4, 3) << 0.05, -0.1, 0.2;

  const FeasibleSpace fs =
      assemble_feasible_space(barriers, plant, Vec::Constant(3, -2.0),
                              Vec::Constant(3, 2.0), x, d_hat, g, 1.7, MarginMode::Dob);
  SafetyFilter f = make_filter(FilterMethod::DobCbf, barriers);
  // identical state twice: the filter output must sit inside the same polytope
  Vec u_ref(3);
  u_ref << 2.5, 0.0, 0.0;
  const FilterOutput out = f.step(x, u_ref, d_hat, 1.7);
  REQUIRE(out.qp_status == QpStatus::Optimal);
  const Polytope eff = fs.effective();
  CHECK(contains(eff, out.u, 1e-7));
  // and the projection equals solving the QP over those rows directly
  QpProblem qp;
  qp.H = 2.0 * Mat::Identity(3, 3);
  qp.q = -2.0 * u_ref;
  qp.A = eff.A;
  qp.b = eff.b;
  const QpSolution sol = solve_qp(qp);
  CHECK((sol.z - out.u).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("fallback_input rejects nonempty spaces and minimizes violations") {
  const Plant plant = blimp_plant();
  std::vector<BarrierSpec> barriers{sphere_barrier(5.0, 5.0, 5.0, 0.3)};
  ObserverGains g;
  Vec x = Vec::Zero(8);
  FeasibleSpace fs =
      assemble_feasible_space(barriers, plant, Vec::Constant(3, -2.0),
                              Vec::Constant(3, 2.0), x, Vec::Zero(8), g, 0.0,
                              MarginMode::Nominal);
  Vec u_ref = Vec::Zero(3);
  CHECK_THROWS_AS(fallback_input(fs, u_ref, Vec::Constant(3, -2.0), Vec::Constant(3, 2.0)),
                  std::logic_error);

  // hand-built empty space: two contradictory rows inside the box
  FeasibleSpace empty;
  empty.box_rows = 4;
  empty.polytope.A = Mat::Zero(6, 2);
  empty.polytope.b = Vec::Zero(6);
  empty.polytope.A << 1, 0, 0, 1, -1, 0, 0, -1, -1, 0, 1, 0;
  empty.polytope.b << 5, 5, 5, 5, -2, 1;  // u1 >= 2 and u1 <= 1
  empty.margins = Vec::Zero(6);
  const Vec u_min = Vec::Constant(2, -5.0);
  const Vec u_max = Vec::Constant(2, 5.0);
  const Vec fb = fallback_input(empty, Vec::Zero(2), u_min, u_max);
  // least-squares split of the conflict: (2 - u)^2 + (u - 1)^2 minimized at 1.5
  CHECK(fb[0] == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(std::abs(fb[1]) <= 1e-5);

  // single violated row, minimizer interior: the halfspace projection point
  FeasibleSpace one;
  one.box_rows = 4;
  one.polytope.A = Mat::Zero(5, 2);
  one.polytope.b = Vec::Zero(5);
  one.polytope.A << 1, 0, 0, 1, -1, 0, 0, -1, -1, 0;
  one.polytope.b << 5, 5, 5, 5, -7;  // u1 >= 7, unreachable in the box
  one.margins = Vec::Zero(5);
  const Vec fb1 = fallback_input(one, Vec::Zero(2), u_min, u_max);
  CHECK(fb1[0] == doctest::Approx(5.0).epsilon(1e-6));  // clamps to the box face
  CHECK(std::abs(fb1[1]) <= 1e-5);
}

TEST_CASE("VCBF slack stays at zero when the volume row is easy") {
  std::vector<BarrierSpec> barriers{sphere_barrier(4.0, 0.0, 0.0, 0.5)};
  SafetyFilter f = make_filter(FilterMethod::DobVcbf, barriers);
  Vec x = Vec::Zero(8);
  Vec u_ref(3);
  u_ref << 1.0, 0.0, 0.0;
  const FilterOutput out = f.step(x, u_ref, Vec::Zero(8), 0.0);
  REQUIRE(out.qp_status == QpStatus::Optimal);
  CHECK(std::abs(out.slack) <= 1e-7);
  REQUIRE(out.vcbf_value.has_value());
  CHECK(*out.vcbf_value > 0.0);
}

TEST_CASE("vcbf gradient is flat when barriers are far away") {
  std::vector<BarrierSpec> barriers{sphere_barrier(50.0, 0.0, 0.0, 0.5)};
  SafetyFilter f = make_filter(FilterMethod::DobVcbf, barriers);
  Vec x = Vec::Zero(8);
  Ellipsoid base;
  const double vv = f.vcbf_at(x, Vec::Zero(8), 0.0, &base);
  CHECK(vv > 0.0);
  std::vector<int> flagged;
  const Vec grad = f.vcbf_gradient(x, Vec::Zero(8), 0.0, base, &flagged);
  CHECK(grad.cwiseAbs().maxCoeff() <= 1e-5);
  CHECK(flagged.empty());
}

TEST_CASE("vcbf gradient respects a symmetric two-obstacle configuration") {
  // obstacles mirrored across the x axis: the y derivative vanishes
  std::vector<BarrierSpec> barriers{sphere_barrier(1.2, 0.8, 0.0, 0.3),
                                    sphere_barrier(1.2, -0.8, 0.0, 0.3)};
  SafetyFilter f = make_filter(FilterMethod::DobVcbf, barriers);
  Vec x = Vec::Zero(8);
  x.segment(4, 3) << 0.5, 0.0, 0.0;  // moving along +x
  Ellipsoid base;
  const double vv = f.vcbf_at(x, Vec::Zero(8), 0.0, &base);
  CHECK(vv > 0.0);
  std::vector<int> flagged;
  const Vec grad = f.vcbf_gradient(x, Vec::Zero(8), 0.0, base, &flagged);
  CHECK(std::abs(grad[1]) <= 1e-4 * (1.0 + grad.cwiseAbs().maxCoeff()));
}

TEST_CASE("time derivative of V_v tracks the decaying envelope") {
  // margins relax as the envelope decays, so with d_hat = 0 the feasible
  // space grows in time: dVv/dt through the time slot must be positive
  std::vector<BarrierSpec> barriers{sphere_barrier(1.0, 0.0, 0.0, 0.4)};
  SafetyFilter f = make_filter(FilterMethod::DobVcbf, barriers);
  Vec x = Vec::Zero(8);
  x.segment(4, 3) << 0.5, 0.0, 0.0;  // closing in: barrier row active-ish
  x[7] = 0.5;
  Ellipsoid base;
  const double vv = f.vcbf_at(x, Vec::Zero(8), 0.5, &base);
  CHECK(vv > 0.0);
  std::vector<int> flagged;
  const Vec grad = f.vcbf_gradient(x, Vec::Zero(8), 0.5, base, &flagged);
  CHECK(grad[7] > 0.0);
}

TEST_CASE("slack magnitude never grows when M increases tenfold") {
  // squeeze the blimp between two close obstacles so the volume row bites
  std::vector<BarrierSpec> barriers{sphere_barrier(0.8, 0.45, 0.0, 0.3),
                                    sphere_barrier(0.8, -0.45, 0.0, 0.3)};
  Vec x = Vec::Zero(8);
  x.segment(4, 3) << 1.5, 0.0, 0.0;
  Vec u_ref(3);
  u_ref << 2.0, 0.0, 0.0;

  auto slack_with = [&](double M) {
    FilterConfig cfg;
    cfg.method = FilterMethod::DobVcbf;
    cfg.slack_penalty = M;
    ObserverGains g;
    SafetyFilter f(cfg, blimp_plant(), barriers, Vec::Constant(3, -2.0),
                   Vec::Constant(3, 2.0), g);
    const FilterOutput out = f.step(x, u_ref, Vec::Zero(8), 0.0);
    REQUIRE(out.qp_status == QpStatus::Optimal);
    return std::abs(out.slack);
  };
  const double s1 = slack_with(1e3);
  const double s2 = slack_with(1e4);
  const double s3 = slack_with(1e5);
  CHECK(s2 <= s1 + 1e-9);
  CHECK(s3 <= s2 + 1e-9);
}

TEST_CASE("infeasible hard rows surface as Infeasible with a fallback input") {
  // two obstacles pinching from +x and -x while flying fast at one of them
  std::vector<BarrierSpec> barriers{sphere_barrier(0.35, 0.0, 0.0, 0.3),
                                    sphere_barrier(-0.35, 0.0, 0.0, 0.3)};
  SafetyFilter f = make_filter(FilterMethod::DobCbf, barriers);
  Vec x = Vec::Zero(8);
  x.segment(4, 3) << 3.0, 0.0, 0.0;  // closing on the +x obstacle fast
  Vec u_ref(3);
  u_ref << 2.0, 0.0, 0.0;
  const FilterOutput out = f.step(x, u_ref, Vec::Zero(8), 0.0);
  CHECK(out.qp_status == QpStatus::Infeasible);
  // the fallback still lives in the box
  CHECK((out.u.array() <= 2.0 + 1e-9).all());
  CHECK((out.u.array() >= -2.0 - 1e-9).all());
}
