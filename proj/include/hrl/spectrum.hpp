#pragma once

// Linearized eigenvalue problem around U_mu, one spherical-harmonic sector at
// a time:
//
//   Q_k(phi, psi) = nu int U^{2**-2} phi psi r^{N-1} dr.
//
// Discretization: phi(r) = r^{-(N-4)/2} g(b ln r) with g a quintic spline in
// tau = b ln r on [-L, L]. The prefactor makes the stiffness density O(1) in
// tau, and the mass weight becomes b^4 Gamma_N (2 cosh tau)^{-4}, smooth and
// free of the r^{-4mu/(N-4)} singularity. Quintic splines are C^4, so the
// fourth-order form is conforming without an auxiliary unknown.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrl/bspline.hpp"
#include "hrl/extremals.hpp"
#include "hrl/params.hpp"
#include "hrl/profile.hpp"
#include "hrl/quadrature.hpp"

namespace hrl {

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  int elements = 800;
  int quad_points = 10;    // Gauss points per element
  double half_width = 0.0; // window half width in tau; 0 picks tau_half_width(p)
};

struct SectorOperator {
  int k = 0;
  ParameterSet params;
  double lambda_k = 0.0;
  SplineSpace space;
  Eigen::MatrixXd stiffness;
  Eigen::MatrixXd mass;

  int size() const { return space.size(); }
};

/// phi(r) = r^{-(N-4)/2} sum_j coef_j B_j(b ln r).
inline RadialProfile spline_profile(const SplineSpace& space, const ParameterSet& p,
                                    std::vector<double> coef) {
  if (static_cast<int>(coef.size()) != space.size())
    throw DomainError("spline_profile: coefficient count does not match the spline space");
  auto shared = std::make_shared<const std::vector<double>>(std::move(coef));
  return log_power_profile(-p.scaling_exponent(), p.b,
                           [space, shared](double tau) { return space.combine(*shared, tau); });
}

struct SpectrumResult {
  int sector_k = 0;
  ParameterSet params;
  SplineSpace space;
  std::vector<double> eigenvalues;          // ascending
  std::vector<Eigen::VectorXd> eigenvectors; // spline coefficients, mass-normalized
  std::vector<double> residuals;            // |K x - nu M x| / |M x|
  std::vector<double> rayleigh_errors;      // |x'Kx / x'Mx - nu| / nu

  int grid_size() const { return space.elements; }

  RadialProfile eigenfunction(std::size_t i) const {
    const Eigen::VectorXd& x = eigenvectors.at(i);
    return spline_profile(space, params, std::vector<double>(x.data(), x.data() + x.size()));
  }
};

// ---------------------------------------------------------------------------
// Continuous forms
// ---------------------------------------------------------------------------

/// U^{2**-2}(r) for the unit-scale extremal: b^4 Gamma_N r^{-4} (2 cosh(b ln r))^{-4}.
inline double mass_weight(const ParameterSet& p, double r) {
  const double tau = p.b * std::log(r);
  const double ch = 2.0 * std::cosh(tau);
  const double b2 = p.b * p.b;
  return b2 * b2 * static_cast<double>(gamma_product(p.N)) / (r * r * r * r * ch * ch * ch * ch);
}

/// int U^{2**-2} u v r^{N-1} dr.
inline double mass_form(const RadialProfile& u, const RadialProfile& v, const ParameterSet& p,
                        const QuadratureConfig& cfg) {
  return integrate_log(
             [&](double r) {
               const double uv = u.value(r) * v.value(r);
               return uv == 0.0 ? 0.0 : mass_weight(p, r) * uv * std::pow(r, p.N);
             },
             cfg)
      .value;
}

/// Q_k(phi, psi) as a bare radial integral.
inline double sector_form(int k, const RadialProfile& phi, const RadialProfile& psi, const ParameterSet& p,
                          const QuadratureConfig& cfg) {
  const double lam = sphere_eigen(k, p.N).lambda_k;
  const int N = p.N;
  return integrate_log(
             [&](double r) {
               const Jet u = phi(r);
               const Jet v = psi(r);
               const double r2 = r * r;
               const double lu = u[2] + (N - 1) * u[1] / r - lam * u[0] / r2;
               const double lv = v[2] + (N - 1) * v[1] / r - lam * v[0] / r2;
               const double bulk = lu * lv - p.c1 * (u[1] * v[1] + lam * u[0] * v[0] / r2) / r2 +
                                   p.c2 * u[0] * v[0] / (r2 * r2);
               return bulk == 0.0 ? 0.0 : bulk * std::pow(r, N);
             },
             cfg)
      .value;
}

/// Sector operator in strong form,
///   L_k^2 phi + C1 (L_k phi / r^2 - 2 phi' / r^3) + C2 phi / r^4,
/// with L_k = d^2/dr^2 + (N-1)/r d/dr - lambda_k/r^2, written out by derivative.
inline double sector_strong(int k, const RadialProfile& phi, const ParameterSet& p, double r) {
  if (!(r > 0.0)) throw DomainError("sector_strong: r must be > 0");
  const double lam = sphere_eigen(k, p.N).lambda_k;
  const double N = p.N;
  const Jet u = phi(r);
  const double r2 = r * r;
  return u[4] + 2.0 * (N - 1.0) * u[3] / r + ((N - 1.0) * (N - 3.0) + p.c1 - 2.0 * lam) * u[2] / r2 -
         (N - 3.0) * (N - 1.0 + 2.0 * lam - p.c1) * u[1] / (r2 * r) +
         (lam * lam + 2.0 * (N - 4.0) * lam - p.c1 * lam + p.c2) * u[0] / (r2 * r2);
}

/// int (strong operator phi) psi r^{N-1} dr; equals Q_k(phi, psi) for decaying profiles.
inline double sector_strong_pairing(int k, const RadialProfile& phi, const RadialProfile& psi,
                                    const ParameterSet& p, const QuadratureConfig& cfg) {
  return integrate_log(
             [&](double r) {
               const double v = psi.value(r);
               return v == 0.0 ? 0.0 : sector_strong(k, phi, p, r) * v * std::pow(r, p.N);
             },
             cfg)
      .value;
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

inline SplineSpace sector_space(const ParameterSet& p, const GridSpec& grid) {
  if (grid.elements < 12) throw DomainError("GridSpec: need at least 12 elements");
  if (grid.quad_points < 6) throw DomainError("GridSpec: need at least 6 quadrature points per element");
  const double L = grid.half_width > 0.0 ? grid.half_width : tau_half_width(p);
  return SplineSpace{-L, L, grid.elements};
}

inline SectorOperator assemble_sector(int k, const ParameterSet& p, const GridSpec& grid = {}) {
  SectorOperator op;
  op.k = k;
  op.params = p;
  op.lambda_k = sphere_eigen(k, p.N).lambda_k;
  op.space = sector_space(p, grid);
  const SplineSpace& sp = op.space;
  const int n = sp.size();
  op.stiffness = Eigen::MatrixXd::Zero(n, n);
  op.mass = Eigen::MatrixXd::Zero(n, n);

  const double b = p.b;
  const double c = -p.scaling_exponent();
  const double N = p.N;
  const double lam = op.lambda_k;
  const double mass_scale = b * b * b * static_cast<double>(gamma_product(p.N));  // b^4 Gamma_N / b
  const double inv_b = 1.0 / b;
  const double h = sp.h();
  const GaussRule gl = gauss_legendre(grid.quad_points);

  constexpr int kLocal = SplineSpace::kDegree + 1;
  std::array<double, kLocal> e0{}, e1{}, lap{};
  for (int e = 0; e < sp.elements; ++e) {
    const int j0 = SplineSpace::first_basis(e);
    const int j1 = sp.last_basis(e);
    if (j1 < j0) continue;
    for (int q = 0; q < grid.quad_points; ++q) {
      const double tau = sp.tau_min + (e + 0.5 + 0.5 * gl.x[q]) * h;
      const double w = 0.5 * h * gl.w[q];
      const double x = (tau - sp.tau_min) / h;
      for (int j = j0; j <= j1; ++j) {
        const double g0 = detail::cardinal_quintic(x - j, 0);
        const double g1 = detail::cardinal_quintic(x - j, 1) / h;
        const double g2 = detail::cardinal_quintic(x - j, 2) / (h * h);
        // r phi' / r^c and r^2 phi'' / r^c for phi = r^c g(b ln r)
        const double rd1 = c * g0 + b * g1;
        const double rd2 = c * (c - 1.0) * g0 + b * (2.0 * c - 1.0) * g1 + b * b * g2;
        e0[j - j0] = g0;
        e1[j - j0] = rd1;
        lap[j - j0] = rd2 + (N - 1.0) * rd1 - lam * g0;
      }
      const double ch = 2.0 * std::cosh(tau);
      const double mw = w * mass_scale / (ch * ch * ch * ch);
      const double sw = w * inv_b;
      for (int i = j0; i <= j1; ++i) {
        const int li = i - j0;
        for (int j = j0; j <= j1; ++j) {
          const int lj = j - j0;
          const double dens = lap[li] * lap[lj] - p.c1 * (e1[li] * e1[lj] + lam * e0[li] * e0[lj]) +
                              p.c2 * e0[li] * e0[lj];
          op.stiffness(i, j) += sw * dens;
          op.mass(i, j) += mw * e0[li] * e0[lj];
        }
      }
    }
  }
  // Symmetrize away rounding in the accumulation order.
  op.stiffness = 0.5 * (op.stiffness + op.stiffness.transpose()).eval();
  op.mass = 0.5 * (op.mass + op.mass.transpose()).eval();

  Eigen::LLT<Eigen::MatrixXd> llt(op.mass);
  if (llt.info() != Eigen::Success) {
    throw AssemblyError("mass matrix is not positive definite for sector k = " + std::to_string(k) +
                        " (" + std::to_string(grid.elements) + " elements); the window is too wide "
                        "for double precision");
  }
  return op;
}

/// Symmetry defect max|A - A'| / max|A|.
inline double symmetry_defect(const Eigen::MatrixXd& a) {
  const double scale = a.cwiseAbs().maxCoeff();
  return scale == 0.0 ? 0.0 : (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

// ---------------------------------------------------------------------------
// Solve
// ---------------------------------------------------------------------------

/// Lowest `count` eigenpairs of K x = nu M x.
///
/// K is positive definite on admissible sectors while M carries the rapidly
/// decaying weight, so the problem is solved as M x = sigma K x with the
/// Cholesky factor of K, and nu = 1/sigma. Eigenvectors come back with
/// x'Mx = 1 and their largest coefficient positive.
inline SpectrumResult solve_generalized(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M, int count,
                                        bool want_vectors = true) {
  const int n = static_cast<int>(K.rows());
  if (K.cols() != n || M.rows() != n || M.cols() != n) throw DomainError("solve_generalized: shape mismatch");
  if (count < 1 || count > n) throw DomainError("solve_generalized: count must lie in [1, grid size]");

  const int opts = (want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly) | Eigen::Ax_lBx;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(M, K, opts);
  if (es.info() != Eigen::Success) {
    throw ConvergenceError("generalized eigensolver failed (Eigen info code " + std::to_string(es.info()) +
                           ", n = " + std::to_string(n) + "); the stiffness matrix may be indefinite");
  }
  SpectrumResult out;
  const Eigen::VectorXd& sigma = es.eigenvalues();  // ascending, so nu descending
  for (int i = 0; i < count; ++i) {
    const int idx = n - 1 - i;
    const double s = sigma(idx);
    if (!(s > 0.0)) throw ConvergenceError("non-positive eigenvalue of M relative to K at index " + std::to_string(i));
    const double nu = 1.0 / s;
    out.eigenvalues.push_back(nu);
    if (!want_vectors) continue;
    Eigen::VectorXd x = es.eigenvectors().col(idx) / std::sqrt(s);
    Eigen::Index imax = 0;
    x.cwiseAbs().maxCoeff(&imax);
    if (x(imax) < 0.0) x = -x;
    const Eigen::VectorXd mx = M * x;
    out.residuals.push_back((K * x - nu * mx).norm() / mx.norm());
    const double rq = x.dot(K * x) / x.dot(mx);
    out.rayleigh_errors.push_back(std::abs(rq - nu) / nu);
    out.eigenvectors.push_back(std::move(x));
  }
  return out;
}

inline SpectrumResult solve_generalized(const SectorOperator& op, int count, bool want_vectors = true) {
  SpectrumResult out = solve_generalized(op.stiffness, op.mass, count, want_vectors);
  out.sector_k = op.k;
  out.params = op.params;
  out.space = op.space;
  return out;
}

inline SpectrumResult sector_spectrum(int k, const ParameterSet& p, int count, const GridSpec& grid = {}) {
  return solve_generalized(assemble_sector(k, p, grid), count);
}

struct RefinementShift {
  std::vector<double> coarse;
  std::vector<double> fine;
  std::vector<double> relative_shift;  // |fine - coarse| / fine
  double max_shift() const {
    return relative_shift.empty() ? 0.0 : *std::max_element(relative_shift.begin(), relative_shift.end());
  }
};

/// Eigenvalues at `grid` and at a refined grid with the same window.
inline RefinementShift refinement_shift(int k, const ParameterSet& p, int count, const GridSpec& grid,
                                        int fine_elements) {
  GridSpec fine = grid;
  fine.elements = fine_elements;
  RefinementShift out;
  out.coarse = solve_generalized(assemble_sector(k, p, grid), count, false).eigenvalues;
  out.fine = solve_generalized(assemble_sector(k, p, fine), count, false).eigenvalues;
  for (int i = 0; i < count; ++i) out.relative_shift.push_back(std::abs(out.fine[i] - out.coarse[i]) / out.fine[i]);
  return out;
}

/// Closed-form radial eigenvalues: the k = 0 sector is conjugate to the
/// unweighted problem, whose j-th eigenvalue is
/// (N+2j-6)(N+2j-4)(N+2j-2)(N+2j) / Gamma_N for j = 1, 2, ...
inline double radial_eigenvalue_closed_form(int N, int j) {
  if (j < 1) throw DomainError("radial_eigenvalue_closed_form: j must be >= 1");
  const double m = N + 2.0 * (j - 1);
  return (m - 4.0) * (m - 2.0) * m * (m + 2.0) / static_cast<double>(gamma_product(N));
}

// ---------------------------------------------------------------------------
// Eigenfunction diagnostics
// ---------------------------------------------------------------------------

/// |<u, v>_mu| / (|u|_mu |v|_mu).
inline double form_correlation(const RadialProfile& u, const RadialProfile& v, const ParameterSet& p,
                               const QuadratureConfig& cfg) {
  const double uv = inner_product_mu(u, v, p, cfg);
  const double uu = inner_product_mu(u, u, p, cfg);
  const double vv = inner_product_mu(v, v, p, cfg);
  return std::abs(uv) / std::sqrt(uu * vv);
}

struct EigenAlignment {
  double ground = 0.0;     // e1 against U_mu
  double scaling = 0.0;    // e2 against G = (N-4)/2 U + r U'
  double cross = 0.0;      // <e1, e2>_mu / (|e1| |e2|)
};

inline EigenAlignment eigenfunction_alignment(const SpectrumResult& res, const QuadratureConfig& cfg) {
  if (res.sector_k != 0 || res.eigenvectors.size() < 2)
    throw DomainError("eigenfunction_alignment: needs a k = 0 result with at least two eigenvectors");
  const ParameterSet& p = res.params;
  const ExtremalBubble bub = make_bubble(p);
  const RadialProfile e1 = res.eigenfunction(0);
  const RadialProfile e2 = res.eigenfunction(1);
  EigenAlignment out;
  out.ground = form_correlation(e1, bub.profile, p, cfg);
  out.scaling = form_correlation(e2, scaling_generator(bub), p, cfg);
  const double n1 = norm_mu(e1, p, cfg);
  const double n2 = norm_mu(e2, p, cfg);
  out.cross = inner_product_mu(e1, e2, p, cfg) / (n1 * n2);
  return out;
}

// ---------------------------------------------------------------------------
// Dimension-lift scalar conditions for k >= 1
// ---------------------------------------------------------------------------

struct LiftConditions {
  double lhs_gamma = 0.0;          // (2**-1) Gamma_N
  double rhs_gamma = 0.0;          // Gamma_{N+2k}
  double positivity_factor = 0.0;  // (b^-2 - 1) lam_k [N(N-4) + (2 lam_k - 8) b^-2 + 2 lam_k]
  bool holds() const { return lhs_gamma <= rhs_gamma && positivity_factor > 0.0; }
};

inline LiftConditions lift_conditions(int k, const ParameterSet& p) {
  if (k < 1) throw DomainError("lift_conditions: k must be >= 1");
  const double lam = sphere_eigen(k, p.N).lambda_k;
  const double ib2 = 1.0 / (p.b * p.b);
  LiftConditions out;
  // (2**-1) Gamma_N = (N+4) Gamma_N / (N-4), exact in integers; k = 1 is an equality for every N.
  out.lhs_gamma = static_cast<double>((p.N + 4) * gamma_product(p.N) / (p.N - 4));
  out.rhs_gamma = static_cast<double>(gamma_product(p.N + 2 * k));
  out.positivity_factor = (ib2 - 1.0) * lam * (p.N * (p.N - 4.0) + (2.0 * lam - 8.0) * ib2 + 2.0 * lam);
  return out;
}

}  // namespace hrl
