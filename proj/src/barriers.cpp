#include "safecbf/barriers.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "safecbf/errors.hpp"

namespace safecbf {

void BarrierSpec::validate() const {
  poles.validate();
  const int r = rel_degree();
  if (r < 1 || r > 2)
    throw std::invalid_argument("BarrierSpec: relative degree must be 1 or 2");
  if (!(radius > 0.0))
    throw std::invalid_argument("BarrierSpec: radius / min distance must be positive");
  if (kind == BarrierKind::SphereSignedDistance && center.size() != 3)
    throw std::invalid_argument("BarrierSpec: sphere barrier needs a 3-D center");
  if (kind == BarrierKind::SquaredDistance2D && center.size() != 2)
    throw std::invalid_argument("BarrierSpec: planar barrier needs a 2-D center");
}

namespace {

// Raw barrier geometry: h, L_f h, and (for r = 2) the second-order pieces.
struct ChainPieces {
  double h = 0.0;
  double lf_h = 0.0;
  double lf2_h = 0.0;
  Vec lg_lf_row;   // L_g L_f h
  Vec li_lf_row;   // grad of L_f h over the extended state
  Vec lg_h_row;    // L_g h (r = 1 use)
  Vec li_h_row;    // grad of h over the extended state
};

ChainPieces sphere_on_blimp(const BarrierSpec& spec, const Vec& x_bar,
                            const Plant& plant) {
  const double mb = plant.blimp.mass;
  const double cd = plant.blimp.drag;
  const double psi = x_bar[3];
  const Eigen::Vector3d pos = x_bar.head(3);
  const Eigen::Vector3d vel = x_bar.segment(4, 3);
  const Eigen::Vector3d rel = pos - Eigen::Vector3d(spec.center);
  const double rho = rel.norm();
  if (rho < 1e-6) {
    std::ostringstream os;
    os << "sphere barrier singular: state within 1e-6 of the obstacle center";
    throw SingularBarrier(os.str());
  }
  const Eigen::Vector3d nhat = rel / rho;
  const double nv = nhat.dot(vel);

  ChainPieces cp;
  cp.h = rho - spec.radius;
  cp.lf_h = nv;
  cp.lf2_h = (vel.squaredNorm() - nv * nv) / rho - (cd / mb) * nv;

  cp.lg_lf_row = Vec::Zero(3);
  cp.lg_lf_row[0] = (nhat[0] * std::cos(psi) + nhat[1] * std::sin(psi)) / mb;
  cp.lg_lf_row[1] = nhat[2] / mb;
  cp.lg_lf_row[2] = 0.0;  // yaw only enters at third order

  cp.li_lf_row = Vec::Zero(8);
  const Eigen::Vector3d dpos = (vel - nv * nhat) / rho;
  cp.li_lf_row.head(3) = dpos;
  cp.li_lf_row.segment(4, 3) = nhat;

  cp.lg_h_row = Vec::Zero(3);
  cp.li_h_row = Vec::Zero(8);
  cp.li_h_row.head(3) = nhat;
  return cp;
}

ChainPieces squared_distance_on_ackermann(const BarrierSpec& spec, const Vec& x_bar,
                                          const Plant& plant) {
  const double mr = plant.ackermann.mass;
  const Eigen::Vector2d pos = x_bar.head(2);
  const double v = x_bar[2], psi = x_bar[3];
  const Eigen::Vector2d e = pos - Eigen::Vector2d(spec.center);
  const Eigen::Vector2d w(std::cos(psi), std::sin(psi));
  const Eigen::Vector2d wp(-std::sin(psi), std::cos(psi));
  const double ew = e.dot(w);
  const double ewp = e.dot(wp);

  ChainPieces cp;
  cp.h = e.squaredNorm() - spec.radius * spec.radius;
  cp.lf_h = 2.0 * v * ew;
  cp.lf2_h = 2.0 * v * v;

  cp.lg_lf_row = Vec::Zero(2);
  cp.lg_lf_row[0] = 2.0 * ew / mr;
  cp.lg_lf_row[1] = 2.0 * v * ewp;

  cp.li_lf_row = Vec::Zero(5);
  cp.li_lf_row[0] = 2.0 * v * w[0];
  cp.li_lf_row[1] = 2.0 * v * w[1];
  cp.li_lf_row[2] = 2.0 * ew;
  cp.li_lf_row[3] = 2.0 * v * ewp;

  cp.lg_h_row = Vec::Zero(2);
  cp.li_h_row = Vec::Zero(5);
  cp.li_h_row[0] = 2.0 * e[0];
  cp.li_h_row[1] = 2.0 * e[1];
  return cp;
}

}  // namespace

ChainEval eval_chain(const BarrierSpec& spec, const Vec& x_bar, const Plant& plant) {
  spec.validate();
  if (x_bar.size() != plant.ext_dim())
    throw std::invalid_argument("eval_chain: extended state size mismatch");

  ChainPieces cp;
  if (spec.kind == BarrierKind::SphereSignedDistance) {
    if (plant.kind != PlantKind::Blimp)
      throw std::invalid_argument("eval_chain: sphere barrier is defined on the blimp");
    cp = sphere_on_blimp(spec, x_bar, plant);
  } else {
    if (plant.kind != PlantKind::Ackermann)
      throw std::invalid_argument(
          "eval_chain: squared-distance barrier is defined on the Ackermann robot");
    cp = squared_distance_on_ackermann(spec, x_bar, plant);
  }

  const int r = spec.rel_degree();
  ChainEval ev;
  ev.h = cp.h;
  ev.phi.resize(r);
  ev.phi[0] = cp.h;
  if (r == 1) {
    ev.eta = Vec::Constant(1, cp.h);
    ev.lfr_h = cp.lf_h;
    ev.lg_row = cp.lg_h_row;
    ev.li_row = cp.li_h_row;
  } else {
    // descending pole order: the first stage consumes the largest pole, the
    // final (constraint) stage the smallest
    const double lam_first = spec.poles.poles[1];
    ev.phi[1] = cp.lf_h + lam_first * cp.h;
    ev.eta = Vec(2);
    ev.eta << cp.lf_h, cp.h;
    ev.lfr_h = cp.lf2_h;
    ev.lg_row = cp.lg_lf_row;
    ev.li_row = cp.li_lf_row;
  }
  return ev;
}

double dob_margin(const ChainEval& chain, const Vec& d_hat_ext,
                  const ObserverGains& g, double t) {
  if (chain.li_row.size() != d_hat_ext.size())
    throw std::invalid_argument("dob_margin: dimension mismatch");
  return chain.li_row.dot(d_hat_ext) - chain.li_row.norm() * error_bound(t, g);
}

FeasibleSpace assemble_feasible_space(const std::vector<BarrierSpec>& barriers,
                                      const Plant& plant, const Vec& u_min,
                                      const Vec& u_max, const Vec& x_bar,
                                      const Vec& d_hat_ext, const ObserverGains& g,
                                      double t, MarginMode mode) {
  if (barriers.empty())
    throw std::invalid_argument("assemble_feasible_space: need at least one barrier");
  const int m = static_cast<int>(u_min.size());
  if (m != plant.input_dim())
    throw std::invalid_argument("assemble_feasible_space: box does not match the plant");
  if (u_max.size() != m) throw std::invalid_argument("assemble_feasible_space: box mismatch");
  for (int j = 0; j < m; ++j)
    if (!(u_min[j] < u_max[j]))
      throw std::invalid_argument("assemble_feasible_space: u_min must be below u_max");

  const int nb = static_cast<int>(barriers.size());
  const int rows = 2 * m + nb;
  FeasibleSpace fs;
  fs.box_rows = 2 * m;
  fs.polytope.A = Mat::Zero(rows, m);
  fs.polytope.b = Vec::Zero(rows);
  fs.margins = Vec::Zero(rows);

  for (int j = 0; j < m; ++j) {
    fs.polytope.A(j, j) = 1.0;
    fs.polytope.b[j] = u_max[j];
    fs.polytope.A(m + j, j) = -1.0;
    fs.polytope.b[m + j] = -u_min[j];
  }

  for (int i = 0; i < nb; ++i) {
    const ChainEval ev = eval_chain(barriers[i], x_bar, plant);
    const Vec gains = poles_to_gains(barriers[i].poles);
    const int row = 2 * m + i;
    fs.polytope.A.row(row) = -ev.lg_row.transpose();
    fs.polytope.b[row] = gains.dot(ev.eta) + ev.lfr_h;
    switch (mode) {
      case MarginMode::Nominal:
        fs.margins[row] = 0.0;
        break;
      case MarginMode::WorstCaseRobust:
        fs.margins[row] = -ev.li_row.norm() * g.delta1;
        break;
      case MarginMode::Dob:
        fs.margins[row] = dob_margin(ev, d_hat_ext, g, t);
        break;
    }
  }
  return fs;
}

double certificate_hbar(const ChainEval& chain, const ObserverDiagnostics& diag,
                        double beta1) {
  return beta1 * chain.phi[chain.phi.size() - 1] - diag.V;
}

}  // namespace safecbf
