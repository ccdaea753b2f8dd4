#pragma once

#include <cmath>
#include <stdexcept>
#include <tuple>

#include "auvpilot/kinematics.hpp"
#include "auvpilot/types.hpp"

namespace auvpilot {

/// Thrown when the combined mass matrix is not invertible.
class SingularMassError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Physical description of a slender cylindrical vehicle plus the tunable
/// coefficient set the identification stages operate on.
///
/// Sign conventions follow the hydrodynamic-derivative standard: the linear
/// damping derivatives (X_u .. N_r) are non-positive for a dissipative hull,
/// and the dimensionless scale factors (C_*) are non-negative.
struct ModelParams {
  // Hull geometry and mass.
  double mass_kg = 135.0;
  double length_m = 2.50;
  double radius_m = 0.15;
  double fin_ref_length_m = 0.10;  ///< r_B, reference length for the fin/roll drag area

  // Environment.
  double fluid_density_kgm3 = 1025.0;
  double weight_N = 135.0 * 9.81;
  double buoyancy_N = 135.0 * 9.81;
  Vec3 cg_offset_m = Vec3::Zero();  ///< r_g, body-frame CG offset
  Vec3 cb_offset_m = Vec3::Zero();  ///< r_b, body-frame CB offset

  // Friction: C_f is normally derived from the Reynolds number at the
  // design speed (see friction_coefficient) and then held fixed.
  double C_f = 0.003;

  // Inertia scale factors (solid-cylinder approximation when 1).
  double C_Ix = 1.0;
  double C_Iy = 1.0;

  // Added-mass scale factors.
  double C_Xud = 0.05;
  double C_Yvd = 0.90;
  double C_Zwd = 0.90;
  double C_Kpd = 0.10;
  double C_Mqd = 0.80;
  double C_Nrd = 0.80;

  // Linear damping derivatives (start at 0, identified from trials).
  double X_u = 0.0;
  double Y_v = 0.0;
  double Z_w = 0.0;
  double K_p = 0.0;
  double M_q = 0.0;
  double N_r = 0.0;

  // Quadratic drag coefficients.
  double C_Dx = 0.157;
  double C_Dy = 1.10;
  double C_Dz = 1.10;
  double C_Dp = 1.00;
  double C_Dq = 1.00;
  double C_Dr = 1.00;
};

/// Moments of inertia of the cylinder approximation, scaled by C_Ix / C_Iy:
/// I_x = C_Ix * (1/2) m r^2, I_y = I_z = C_Iy * (1/12) m (l^2 + 3 r^2).
inline std::tuple<double, double, double> inertia_moments(const ModelParams& p) {
  const double ix = p.C_Ix * 0.5 * p.mass_kg * p.radius_m * p.radius_m;
  const double iy = p.C_Iy * (1.0 / 12.0) * p.mass_kg *
                    (p.length_m * p.length_m + 3.0 * p.radius_m * p.radius_m);
  return {ix, iy, iy};
}

/// Rigid-body mass matrix diag(m, m, m, I_x, I_y, I_z) for a CG-centred frame.
inline Mat6 rigid_body_mass(const ModelParams& p) {
  const auto [ix, iy, iz] = inertia_moments(p);
  Vec6 d;
  d << p.mass_kg, p.mass_kg, p.mass_kg, ix, iy, iz;
  return d.asDiagonal();
}

/// Added-mass derivatives (X_ud, Y_vd, Z_wd, K_pd, M_qd, N_rd). Translational
/// and roll terms scale with mass, pitch/yaw with the respective inertia.
/// All are non-positive for non-negative scale factors.
inline Vec6 added_mass_derivatives(const ModelParams& p) {
  const auto [ix, iy, iz] = inertia_moments(p);
  (void)ix;
  Vec6 d;
  d << -p.C_Xud * p.mass_kg, -p.C_Yvd * p.mass_kg, -p.C_Zwd * p.mass_kg,
       -p.C_Kpd * p.mass_kg, -p.C_Mqd * iy, -p.C_Nrd * iz;
  return d;
}

/// Added-mass matrix M_A = -diag(X_ud, Y_vd, Z_wd, K_pd, M_qd, N_rd).
inline Mat6 added_mass(const ModelParams& p) {
  return Mat6((-added_mass_derivatives(p)).asDiagonal());
}

/// Rigid-body Coriolis/centripetal matrix for a CG-centred frame:
///   C_RB = [ 0_3x3        -m S(nu1) ]
///          [ -m S(nu1)  -S(I_o nu2) ]
/// Skew-symmetric for every nu, so it does no work.
inline Mat6 coriolis_rigid(const ModelParams& p, const Vec6& nu) {
  const auto [ix, iy, iz] = inertia_moments(p);
  const Vec3 nu1 = nu.head<3>();
  const Vec3 nu2 = nu.tail<3>();
  const Vec3 io_nu2(ix * nu2.x(), iy * nu2.y(), iz * nu2.z());
  Mat6 c = Mat6::Zero();
  c.topRightCorner<3, 3>() = -p.mass_kg * skew(nu1);
  c.bottomLeftCorner<3, 3>() = -p.mass_kg * skew(nu1);
  c.bottomRightCorner<3, 3>() = -skew(io_nu2);
  return c;
}

/// Added-mass Coriolis matrix evaluated at the relative velocity.
/// Skew-symmetric for every nu_r.
inline Mat6 coriolis_added(const ModelParams& p, const Vec6& nu_r) {
  const Vec6 d = added_mass_derivatives(p);
  const double xud = d[0], yvd = d[1], zwd = d[2], kpd = d[3], mqd = d[4], nrd = d[5];
  const double ur = nu_r[0], vr = nu_r[1], wr = nu_r[2];
  const double pr = nu_r[3], qr = nu_r[4], rr = nu_r[5];
  Mat6 c = Mat6::Zero();
  // clang-format off
  c(0, 4) = -zwd * wr;  c(0, 5) =  yvd * vr;
  c(1, 3) =  zwd * wr;  c(1, 5) = -xud * ur;
  c(2, 3) = -yvd * vr;  c(2, 4) =  xud * ur;
  c(3, 1) = -zwd * wr;  c(3, 2) =  yvd * vr;  c(3, 4) = -nrd * rr;  c(3, 5) =  mqd * qr;
  c(4, 0) =  zwd * wr;  c(4, 2) = -xud * ur;  c(4, 3) =  nrd * rr;  c(4, 5) = -kpd * pr;
  c(5, 0) = -yvd * vr;  c(5, 1) =  xud * ur;  c(5, 3) = -mqd * qr;  c(5, 4) =  kpd * pr;
  // clang-format on
  return c;
}

/// Flat-plate friction line C_f = 0.075 / (log10(Re) - 2)^2.
/// Throws std::domain_error for Re <= 100 (the line has a pole at Re = 100).
inline double friction_coefficient(double reynolds) {
  if (reynolds <= 100.0) {
    throw std::domain_error("friction_coefficient: Reynolds number must exceed 100");
  }
  const double d = std::log10(reynolds) - 2.0;
  return 0.075 / (d * d);
}

/// Axial drag coefficient of a cylinder of radius r and length l:
/// C_Dx = 0.44 (2r/l) + 4 C_f (l/2r) + 4 C_f sqrt(2r/l).
inline double axial_drag_coefficient(double radius, double length, double c_f) {
  const double ratio = 2.0 * radius / length;
  return 0.44 * ratio + 4.0 * c_f / ratio + 4.0 * c_f * std::sqrt(ratio);
}

/// Quadratic damping derivatives (X_uu, Y_vv, Z_ww, K_pp, M_qq, N_rr), all
/// non-positive. Cross-flow terms use projected areas of the hull, roll uses
/// the fin reference area A_R = 10 r_B^2, and the rotational cross-flow
/// moments integrate the strip drag over the hull length.
inline Vec6 quadratic_damping_derivatives(const ModelParams& p) {
  const double rho = p.fluid_density_kgm3;
  const double r = p.radius_m, l = p.length_m;
  const double a_yz = kPi * r * r;
  const double a_xz = 2.0 * r * l;
  const double a_xy = 2.0 * r * l;
  const double a_fin = 10.0 * p.fin_ref_length_m * p.fin_ref_length_m;
  const double l4 = l * l * l * l;
  Vec6 d;
  d << -0.5 * rho * p.C_Dx * a_yz,
       -0.5 * rho * p.C_Dy * a_xz,
       -0.5 * rho * p.C_Dz * a_xy,
       -0.5 * rho * p.C_Dp * a_fin,
       -(1.0 / 32.0) * rho * p.C_Dz * p.C_Dq * r * l4,
       -(1.0 / 32.0) * rho * p.C_Dy * p.C_Dr * r * l4;
  return d;
}

/// Diagonal damping matrix D(nu_r) = -diag(lin) - diag(quad) * |nu_r|,
/// positive semi-definite for admissible coefficient signs.
inline Mat6 damping(const ModelParams& p, const Vec6& nu_r) {
  Vec6 lin;
  lin << p.X_u, p.Y_v, p.Z_w, p.K_p, p.M_q, p.N_r;
  const Vec6 quad = quadratic_damping_derivatives(p);
  Vec6 diag;
  for (int i = 0; i < 6; ++i) diag[i] = -lin[i] - quad[i] * std::abs(nu_r[i]);
  return diag.asDiagonal();
}

/// Hydrostatic force/moment vector as a closed form in phi, theta, the
/// weight/buoyancy magnitudes and the CG/CB offsets.
inline Vec6 restoring(const ModelParams& p, const Vec6& eta) {
  const double w = p.weight_N, b = p.buoyancy_N;
  const double cphi = std::cos(eta[3]), sphi = std::sin(eta[3]);
  const double cth = std::cos(eta[4]), sth = std::sin(eta[4]);
  const double xgw_xbb = p.cg_offset_m.x() * w - p.cb_offset_m.x() * b;
  const double ygw_ybb = p.cg_offset_m.y() * w - p.cb_offset_m.y() * b;
  const double zgw_zbb = p.cg_offset_m.z() * w - p.cb_offset_m.z() * b;
  Vec6 g;
  g << (w - b) * sth,
       -(w - b) * cth * sphi,
       -(w - b) * cth * cphi,
       -ygw_ybb * cth * cphi + zgw_zbb * cth * sphi,
       zgw_zbb * sth + xgw_xbb * cth * cphi,
       -xgw_xbb * cth * sphi + ygw_ybb * sth;
  return -g;
}

/// Dynamics with the combined mass matrix factored once per parameter set.
/// acceleration() is the hot path for simulation and identification.
class DynamicsModel {
 public:
  explicit DynamicsModel(const ModelParams& p) : params_(p) {
    const Mat6 m = rigid_body_mass(p) + added_mass(p);
    Eigen::FullPivLU<Mat6> lu(m);
    if (!lu.isInvertible()) {
      throw SingularMassError("DynamicsModel: combined mass matrix is singular");
    }
    mass_inverse_ = lu.inverse();
  }

  const ModelParams& params() const { return params_; }
  const Mat6& mass_inverse() const { return mass_inverse_; }

  /// nu_dot = M^-1 [tau - C_RB(nu) nu - C_A(nu_r) nu_r - D(nu_r) nu_r - g(eta)],
  /// each component multiplied by the corresponding v_const mask entry.
  Vec6 acceleration(const Vec6& eta, const Vec6& nu, const Vec3& current,
                    const Vec6& tau, const Vec6& v_const) const {
    const Vec6 nu_r = relative_velocity(nu, current);
    const Vec6 rhs = tau - coriolis_rigid(params_, nu) * nu -
                     coriolis_added(params_, nu_r) * nu_r -
                     damping(params_, nu_r) * nu_r - restoring(params_, eta);
    return (mass_inverse_ * rhs).cwiseProduct(v_const);
  }

 private:
  ModelParams params_;
  Mat6 mass_inverse_;
};

/// Convenience wrapper building the cached model once; prefer DynamicsModel
/// when calling repeatedly.
inline Vec6 acceleration(const ModelParams& p, const VehicleState& s, const Vec3& current,
                         const Vec6& tau, const Vec6& v_const) {
  return DynamicsModel(p).acceleration(s.eta, s.nu, current, tau, v_const);
}

}  // namespace auvpilot
