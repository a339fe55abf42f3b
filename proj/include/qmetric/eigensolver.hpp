#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qmetric/errors.hpp"
#include "qmetric/grid.hpp"

namespace qmetric {

/// Controls for the radial ground-state solver.
struct RadialEigenOptions {
  std::size_t mesh_n = 4000;  // base uniform mesh; refinement doubles it
  int max_refinements = 3;    // extra doublings allowed beyond the first three meshes
  double rel_tol = 1e-9;      // stop when successive extrapolants agree to this
};

struct RadialEigenResult {
  double epsilon0 = 0.0;           // extrapolated lowest eigenvalue
  SampledRadialFunction f;         // profile on the target grid, 2*pi*int f^2 r dr = 1
  std::function<double(double)> f_eval; // smooth evaluator behind the samples
  int refinements_used = 0;
  double finest_mesh_energy = 0.0; // raw eigenvalue on the finest mesh (diagnostic)
};

namespace detail {

// Discretization of the 2D radial operator
//   -(1/(2 mu)) (f'' + f'/r - m^2 f / r^2) + V(r) f = eps f
// in flux (finite-volume) form on cells [ih, (i+1)h] with centers r_i = (i+1/2)h.
// The r = 0 face carries zero flux automatically (factor r in r f'), which keeps
// the scheme second order for every m >= 0 including the delicate m = 0 case.
// Unknowns are u_i = sqrt(r_i) f(r_i); the matrix is symmetric tridiagonal.
template <class V>
void build_radial_fv_matrix(V&& potential, double m_abs, double mu, double r_max,
                            std::size_t n, std::vector<double>& diag,
                            std::vector<double>& off) {
  const double h = r_max / static_cast<double>(n);
  const double k = 1.0 / (2.0 * mu * h * h);
  diag.resize(n);
  off.resize(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double rc = (static_cast<double>(i) + 0.5) * h;
    const double face_l = static_cast<double>(i) * h;
    const double face_r = static_cast<double>(i + 1) * h;
    const double v = potential(rc);
    if (!std::isfinite(v))
      throw invalid_value("radial eigensolver: potential is not finite on (0, r_max]");
    diag[i] = k * (face_l + face_r) / rc + m_abs * m_abs / (2.0 * mu * rc * rc) + v;
    if (i + 1 < n) {
      const double rc_next = (static_cast<double>(i) + 1.5) * h;
      off[i] = -k * face_r / std::sqrt(rc * rc_next);
    }
  }
}

// Number of eigenvalues of the symmetric tridiagonal (diag, off) below x.
inline std::size_t sturm_count_below(const std::vector<double>& diag,
                                     const std::vector<double>& off, double x) {
  const double tiny = 1e-290;
  std::size_t count = 0;
  double q = diag[0] - x;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < diag.size(); ++i) {
    if (std::abs(q) < tiny) q = -tiny;
    q = diag[i] - x - off[i - 1] * off[i - 1] / q;
    if (q < 0.0) ++count;
  }
  return count;
}

// Smallest eigenvalue by bisection on the Sturm count.
inline double smallest_eigenvalue(const std::vector<double>& diag,
                                  const std::vector<double>& off) {
  double lo = diag[0];
  double hi = diag[0];
  for (std::size_t i = 0; i < diag.size(); ++i) {
    const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) +
                     (i + 1 < diag.size() ? std::abs(off[i]) : 0.0);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count_below(diag, off, mid) >= 1) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(hi)))
      break;
  }
  return 0.5 * (lo + hi);
}

// Solve (T - shift) x = rhs for symmetric tridiagonal T via Gaussian
// elimination with partial pivoting (dgtsv-style, with fill-in band).
inline bool tridiag_shift_solve(const std::vector<double>& diag, const std::vector<double>& off,
                                double shift, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  std::vector<double> dm(n), du(n > 1 ? n - 1 : 0), dl(n > 1 ? n - 1 : 0),
      du2(n > 2 ? n - 2 : 0, 0.0);
  for (std::size_t i = 0; i < n; ++i) dm[i] = diag[i] - shift;
  for (std::size_t i = 0; i + 1 < n; ++i) du[i] = dl[i] = off[i];

  const double tiny = 1e-290;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(dm[i]) >= std::abs(dl[i])) {
      if (std::abs(dm[i]) < tiny) dm[i] = (dm[i] < 0.0 ? -tiny : tiny);
      const double fact = dl[i] / dm[i];
      dm[i + 1] -= fact * du[i];
      rhs[i + 1] -= fact * rhs[i];
      if (i + 2 < n) du2[i] = 0.0;
    } else {
      const double fact = dm[i] / dl[i];
      const double old_main = dm[i + 1];
      const double old_du = (i + 2 < n) ? du[i + 1] : 0.0;
      dm[i] = dl[i];
      dm[i + 1] = du[i] - fact * old_main;
      du[i] = old_main;
      if (i + 2 < n) {
        du2[i] = old_du;
        du[i + 1] = -fact * old_du;
      }
      std::swap(rhs[i], rhs[i + 1]);
      rhs[i + 1] -= fact * rhs[i];
    }
  }
  if (std::abs(dm[n - 1]) < tiny) dm[n - 1] = (dm[n - 1] < 0.0 ? -tiny : tiny);
  rhs[n - 1] /= dm[n - 1];
  if (n >= 2) rhs[n - 2] = (rhs[n - 2] - du[n - 2] * rhs[n - 1]) / dm[n - 2];
  for (std::size_t ip = n; ip >= 3; --ip) {
    const std::size_t i = ip - 3;
    rhs[i] = (rhs[i] - du[i] * rhs[i + 1] - du2[i] * rhs[i + 2]) / dm[i];
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(rhs[i])) return false;
  return true;
}

// Ground-state eigenvector by inverse iteration at the converged eigenvalue.
inline std::vector<double> ground_eigenvector(const std::vector<double>& diag,
                                              const std::vector<double>& off, double lambda) {
  const std::size_t n = diag.size();
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double shift = lambda;
  for (int iter = 0; iter < 4; ++iter) {
    std::vector<double> y = x;
    if (!tridiag_shift_solve(diag, off, shift, y)) {
      shift = lambda * (1.0 + 1e-12) + 1e-14;
      continue;
    }
    double nrm = 0.0;
    for (double v : y) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) {
      shift = lambda * (1.0 + 1e-12) + 1e-14;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / nrm;
  }
  // fix global sign so the nodeless state is positive
  double s = 0.0;
  for (double v : x) s += v;
  if (s < 0.0)
    for (double& v : x) v = -v;
  return x;
}

// Cubic Lagrange interpolation of f given at uniform cell centers (i+1/2)h.
// Below the first center the profile is continued as f ~ r^{m_abs} (quadratic
// continuation when m_abs = 0); beyond the last center it is zero.
class UniformCellInterpolant {
public:
  UniformCellInterpolant(std::shared_ptr<const std::vector<double>> values, double h,
                         double m_abs)
      : values_(std::move(values)), h_(h), m_abs_(m_abs) {}

  double operator()(double r) const {
    const std::vector<double>& f = *values_;
    const std::size_t n = f.size();
    const double c0 = 0.5 * h_;
    const double c_last = (static_cast<double>(n) - 0.5) * h_;
    if (r >= c_last) return 0.0;
    if (r < c0) {
      if (m_abs_ > 0.0) return f[0] * std::pow(r / c0, m_abs_);
      const double x = (r - c0) / h_;
      return 0.5 * (x - 1.0) * (x - 2.0) * f[0] - x * (x - 2.0) * f[1] +
             0.5 * x * (x - 1.0) * f[2];
    }
    const double t = (r - c0) / h_;
    std::size_t i0 = static_cast<std::size_t>(t);
    std::size_t s = (i0 == 0) ? 0 : i0 - 1;
    s = std::min(s, n - 4);
    const double x = t - static_cast<double>(s); // in ~[1, 2] inside the stencil
    const double l0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
    const double l1 = x * (x - 2.0) * (x - 3.0) / 2.0;
    const double l2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
    const double l3 = x * (x - 1.0) * (x - 2.0) / 6.0;
    return l0 * f[s] + l1 * f[s + 1] + l2 * f[s + 2] + l3 * f[s + 3];
  }

private:
  std::shared_ptr<const std::vector<double>> values_;
  double h_;
  double m_abs_;
};

} // namespace detail

/// Raw lowest eigenvalue of the 2D radial problem on a fixed uniform mesh.
/// Second-order accurate in the mesh spacing; exposed so convergence-order
/// checks can probe the discretization directly.
template <class V>
double radial_ground_energy_on_mesh(V&& potential, double m_abs, double mu, double r_max,
                                    std::size_t mesh_n) {
  if (!(mu > 0.0)) throw std::invalid_argument("radial eigensolver: mu must be positive");
  if (!(m_abs >= 0.0)) throw std::invalid_argument("radial eigensolver: m_abs must be >= 0");
  if (!(r_max > 0.0)) throw std::invalid_argument("radial eigensolver: r_max must be positive");
  if (mesh_n < 64) throw std::invalid_argument("radial eigensolver: mesh too coarse");
  std::vector<double> diag, off;
  detail::build_radial_fv_matrix(potential, m_abs, mu, r_max, mesh_n, diag, off);
  return detail::smallest_eigenvalue(diag, off);
}

/// Lowest eigenpair of
///   -(1/(2 mu)) (f'' + f'/r - m^2 f / r^2) + V(r) f = eps f
/// on (0, r_max], r_max taken from the target grid. The eigenvalue is
/// Richardson-extrapolated over doubling meshes until two successive
/// extrapolants agree to rel_tol; the profile comes from the finest mesh and
/// is normalized so 2*pi*int f^2 r dr = 1 on the target grid.
template <class V>
RadialEigenResult solve_radial_ground(V&& potential, double m_abs, double mu,
                                      RadialGridPtr target_grid,
                                      RadialEigenOptions opt = {}) {
  if (!target_grid || target_grid->size() == 0)
    throw std::invalid_argument("solve_radial_ground: missing target grid");
  const double r_max = target_grid->r_max;

  std::vector<double> mesh_energies;
  std::size_t n = opt.mesh_n;
  mesh_energies.push_back(radial_ground_energy_on_mesh(potential, m_abs, mu, r_max, n));
  n *= 2;
  mesh_energies.push_back(radial_ground_energy_on_mesh(potential, m_abs, mu, r_max, n));

  double rich_prev = (4.0 * mesh_energies[1] - mesh_energies[0]) / 3.0;
  double eps = 0.0;
  bool converged = false;
  int refinements = 0;
  for (int level = 0; level <= opt.max_refinements; ++level) {
    n *= 2;
    mesh_energies.push_back(radial_ground_energy_on_mesh(potential, m_abs, mu, r_max, n));
    const std::size_t k = mesh_energies.size();
    const double rich_cur = (4.0 * mesh_energies[k - 1] - mesh_energies[k - 2]) / 3.0;
    if (std::abs(rich_cur - rich_prev) <=
        opt.rel_tol * std::max(std::abs(rich_cur), 1e-12)) {
      eps = (16.0 * rich_cur - rich_prev) / 15.0;
      converged = true;
      refinements = level;
      break;
    }
    rich_prev = rich_cur;
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "solve_radial_ground: eigenvalue not converged after " << mesh_energies.size()
        << " meshes (m_abs=" << m_abs << ", mu=" << mu << ", r_max=" << r_max << "); values:";
    for (double v : mesh_energies) msg << " " << v;
    throw convergence_failure(msg.str());
  }

  // Eigenvector on the finest mesh.
  std::vector<double> diag, off;
  detail::build_radial_fv_matrix(potential, m_abs, mu, r_max, n, diag, off);
  const double lam = mesh_energies.back();
  std::vector<double> u = detail::ground_eigenvector(diag, off, lam);

  double umax = 0.0;
  for (double v : u) umax = std::max(umax, std::abs(v));
  int sign_changes = 0;
  double prev = 0.0;
  for (double v : u) {
    if (std::abs(v) < 1e-10 * umax) continue;
    if (prev != 0.0 && v * prev < 0.0) ++sign_changes;
    prev = v;
  }
  if (sign_changes != 0)
    throw convergence_failure("solve_radial_ground: inverse iteration returned a state with nodes");

  const double h = r_max / static_cast<double>(n);
  auto f_mesh = std::make_shared<std::vector<double>>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rc = (static_cast<double>(i) + 0.5) * h;
    (*f_mesh)[i] = u[i] / std::sqrt(rc);
  }
  detail::UniformCellInterpolant raw(f_mesh, h, m_abs);

  RadialEigenResult out;
  out.epsilon0 = eps;
  out.refinements_used = refinements;
  out.finest_mesh_energy = lam;
  out.f.grid = target_grid;
  out.f.values.resize(target_grid->size());
  for (std::size_t k = 0; k < target_grid->size(); ++k)
    out.f.values[k] = raw(target_grid->nodes[k]);
  const double nrm2 = radial_norm_squared(out.f);
  if (!(nrm2 > 0.0) || !std::isfinite(nrm2))
    throw convergence_failure("solve_radial_ground: degenerate profile normalization");
  const double scale = 1.0 / std::sqrt(nrm2);
  for (double& v : out.f.values) v *= scale;
  out.f_eval = [raw, scale](double r) { return scale * raw(r); };
  return out;
}

} // namespace qmetric
