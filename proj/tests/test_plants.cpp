#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "safecbf/plants.hpp"

using namespace safecbf;

TEST_CASE("blimp equilibrium at rest") {
  BlimpParams pr;
  const Vec ds = blimp_rhs(pr, Vec::Zero(7), Vec::Zero(3), Vec::Zero(3));
  CHECK(ds.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("heading-aligned thrust accelerates along x only") {
  BlimpParams pr;
  pr.mass = 2.0;
  Vec u(3);
  u << 1.0, 0.0, 0.0;
  const Vec ds = blimp_rhs(pr, Vec::Zero(7), u, Vec::Zero(3));
  CHECK(ds[4] == doctest::Approx(0.5));
  CHECK(ds[5] == doctest::Approx(0.0));
  CHECK(ds[6] == doctest::Approx(0.0));
}

TEST_CASE("vertical force balance cancels a vertical disturbance") {
  BlimpParams pr;
  pr.drag = 0.0;
  pr.mass = 1.7;
  Vec u(3);
  u << 0.0, -0.2 * pr.mass, 0.0;
  Vec d(3);
  d << 0.0, 0.0, 0.2;
  const Vec ds = blimp_rhs(pr, Vec::Zero(7), u, d);
  CHECK(ds[6] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("blimp reference is quiet at the target") {
  BlimpParams pr;
  BlimpRefGains g;
  Vec s = Vec::Zero(7);
  s.head(3) << 1.0, 0.0, 1.0;
  Vec target(3);
  target << 1.0, 0.0, 1.0;
  const Vec u = blimp_reference(pr, g, s, target, Vec::Zero(3));
  CHECK(u.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("lateral target zeroes the speed setpoint through cos(e_psi)") {
  BlimpParams pr;
  BlimpRefGains g;
  Vec s = Vec::Zero(7);  // at origin, heading +x, at rest
  Vec target(3);
  target << 0.0, 2.0, 0.0;  // bearing pi/2, so e_psi = -pi/2
  const Vec u = blimp_reference(pr, g, s, target, Vec::Zero(3));
  CHECK(std::abs(u[0]) <= 1e-12);            // v = 0 and cos(e_psi) = 0
  CHECK(u[2] == doctest::Approx(g.k_psi * M_PI / 2.0));  // steers toward the bearing
}

TEST_CASE("vertical feedforward cancels the estimated disturbance") {
  BlimpParams pr;
  pr.mass = 1.3;
  BlimpRefGains g;
  Vec s = Vec::Zero(7);
  s.head(3) << 1.0, 0.0, 1.0;
  Vec target(3);
  target << 1.0, 0.0, 1.0;  // settled
  Vec d_hat(3);
  d_hat << 0.0, 0.0, 0.1;
  const Vec u = blimp_reference(pr, g, s, target, d_hat);
  CHECK(u[1] == doctest::Approx(-pr.mass * 0.1));
}

TEST_CASE("ackermann dynamics follow the printed model") {
  AckermannParams pr;
  pr.mass = 2.0;
  CHECK(ackermann_rhs(pr, Vec::Zero(4), Vec::Zero(2), 0.0).cwiseAbs().maxCoeff() == 0.0);
  Vec u(2);
  u << 2.0, 0.0;
  CHECK(ackermann_rhs(pr, Vec::Zero(4), u, 0.0)[2] == doctest::Approx(1.0));
  CHECK(ackermann_rhs(pr, Vec::Zero(4), u, -2.0)[2] == doctest::Approx(0.0));
  Vec s(4);
  s << 0.0, 0.0, 2.0, M_PI / 2.0;
  const Vec ds = ackermann_rhs(pr, s, Vec::Zero(2), 0.0);
  CHECK(ds[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ds[1] == doctest::Approx(2.0));
}

TEST_CASE("ackermann reference: settled and dead-ahead cases") {
  AckermannParams pr;
  AckermannRefGains g;
  Vec s = Vec::Zero(4);
  s.head(2) << 3.0, -1.0;
  Vec target(2);
  target << 3.0, -1.0;
  const Vec u_at_target = ackermann_reference(pr, g, s, target, 0.0);
  CHECK(u_at_target.cwiseAbs().maxCoeff() <= 1e-12);

  Vec s2 = Vec::Zero(4);  // heading +x, target dead ahead
  Vec t2(2);
  t2 << 5.0, 0.0;
  const Vec u2 = ackermann_reference(pr, g, s2, t2, 0.0);
  CHECK(u2[1] == doctest::Approx(0.0));
  CHECK(u2[0] == doctest::Approx(g.k_v * g.k_p * 5.0));  // v = 0, v_r = k_p e_d
}

TEST_CASE("ackermann feedforward subtracts the scaled estimate") {
  AckermannParams pr;
  pr.mass = 2.5;
  AckermannRefGains g;
  Vec s = Vec::Zero(4);
  s.head(2) << 1.0, 0.0;
  Vec target(2);
  target << 1.0, 0.0;
  const Vec u = ackermann_reference(pr, g, s, target, 0.3);
  CHECK(u[0] == doctest::Approx(-pr.mass * 0.3));
}

TEST_CASE("disturbance generators honor their declared bounds") {
  DisturbanceSpec c;
  c.kind = DisturbanceSpec::Kind::Constant;
  c.amplitude = (Vec(3) << 0.3, 0.0, 0.0).finished();
  c.delta1 = 0.3;
  CHECK(c.bounds_consistent());
  CHECK((c.eval(5.0) - c.amplitude).cwiseAbs().maxCoeff() == 0.0);
  CHECK(c.eval_derivative(5.0).cwiseAbs().maxCoeff() == 0.0);

  DisturbanceSpec s;
  s.kind = DisturbanceSpec::Kind::Sinusoid;
  s.amplitude = (Vec(1) << 0.3).finished();
  s.frequency = 1.0;
  s.phase = (Vec(1) << 0.0).finished();
  s.delta1 = s.delta2 = s.delta3 = 0.3;
  CHECK(s.bounds_consistent());
  s.delta2 = 0.2;  // amp * w = 0.3 > 0.2
  CHECK_FALSE(s.bounds_consistent());
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);

  DisturbanceSpec z;
  z.amplitude = Vec::Zero(2);
  CHECK(z.eval(1.0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(z.bounds_consistent());
}

TEST_CASE("plant facade is consistent with the raw dynamics") {
  Plant plant;
  plant.kind = PlantKind::Blimp;
  plant.blimp.mass = 1.4;
  plant.blimp.drag = 0.3;
  plant.blimp.inertia = 2.0;
  Vec s(7);
  s << 0.4, -0.2, 1.0, 0.3, 0.5, -0.1, 0.2;
  const Vec x_bar = plant.extend(s, 2.0);
  Vec u(3);
  u << 0.7, -0.4, 0.2;
  Vec d(3);
  d << 0.1, -0.05, 0.02;

  const Vec rhs_ext = plant.nominal_rate(x_bar, u) + plant.dist_to_extended(d);
  const Vec rhs_phys = blimp_rhs(plant.blimp, s, u, d);
  CHECK((rhs_ext.head(7) - rhs_phys).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(rhs_ext[7] == doctest::Approx(1.0));

  Vec buf(8);
  plant.rate_into(x_bar, u, buf);
  CHECK((buf - plant.nominal_rate(x_bar, u)).cwiseAbs().maxCoeff() <= 1e-14);

  Plant ack;
  ack.kind = PlantKind::Ackermann;
  ack.ackermann.mass = 2.0;
  Vec sa(4);
  sa << 1.0, 2.0, 0.5, 0.3;
  const Vec xa = ack.extend(sa, 1.0);
  Vec ua(2);
  ua << 0.5, -0.2;
  const Vec ra = ack.nominal_rate(xa, ua) + ack.dist_to_extended((Vec(1) << 0.4).finished());
  const Vec rp = ackermann_rhs(ack.ackermann, sa, ua, 0.4);
  CHECK((ra.head(4) - rp).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("angle wrapping lands in (-pi, pi]") {
  CHECK(wrap_angle(3.0 * M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(-3.0 * M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(0.1) == doctest::Approx(0.1));
  CHECK(wrap_angle(-0.1) == doctest::Approx(-0.1));
}
