// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0
//
// Newton's method with an FGMRES(30) linear solver, preconditioned by one
// hp-multigrid V-cycle: polynomial coarsening p -> floor(p/2) -> ... -> 1,
// then uniform mesh coarsening, Chebyshev-accelerated Jacobi smoothing on
// every level, and a direct (or Jacobi-CG) coarse solve. Level work runs in
// the hierarchy's number type (single precision by default) while the outer
// Krylov iteration stays in double.

#ifndef ELASTMF_SOLVER_HPP
#define ELASTMF_SOLVER_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "elastmf/operator.hpp"

namespace emf {

struct NewtonConfig {
  double eps_abs = 1e-8;
  double eps_rel = 1e-3;
  int max_iter = 25;
};

struct FgmresConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-3;
  int restart = 30;
  int max_restarts = 40;
};

struct SmootherConfig {
  int degree = 6;            // operator applications per smoothing pass
  double range_factor = 15;  // lambda_min_s = lambda_max_s / range_factor
  double safety = 1.2;       // lambda_max_s = safety * lambda_max_est
  int eig_iterations = 20;
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
};

// --- small dense direct solver ---------------------------------------------

class DenseLU {
public:
  void factor(std::vector<double> a, int n) {
    a_ = std::move(a);
    n_ = n;
    piv_.resize(n);
    for (int c = 0; c < n; ++c) {
      int p = c;
      for (int r = c + 1; r < n; ++r)
        if (std::abs(a_[r * n + c]) > std::abs(a_[p * n + c])) p = r;
      if (std::abs(a_[p * n + c]) < 1e-250)
        throw SingularCoarseMatrix("DenseLU: zero pivot");
      piv_[c] = p;
      if (p != c)
        for (int k = 0; k < n; ++k) std::swap(a_[p * n + k], a_[c * n + k]);
      const double inv = 1.0 / a_[c * n + c];
      for (int r = c + 1; r < n; ++r) {
        const double f = a_[r * n + c] * inv;
        a_[r * n + c] = f;
        for (int k = c + 1; k < n; ++k) a_[r * n + k] -= f * a_[c * n + k];
      }
    }
  }

  void solve(std::vector<double>& x) const {
    const int n = n_;
    for (int c = 0; c < n; ++c) {
      if (piv_[c] != c) std::swap(x[piv_[c]], x[c]);
      for (int r = c + 1; r < n; ++r) x[r] -= a_[r * n + c] * x[c];
    }
    for (int c = n - 1; c >= 0; --c) {
      for (int k = c + 1; k < n; ++k) x[c] -= a_[c * n + k] * x[k];
      x[c] /= a_[c * n + c];
    }
  }

  int size() const { return n_; }

private:
  std::vector<double> a_;
  std::vector<int> piv_;
  int n_ = 0;
};

// --- vector helpers (double accumulation for reproducibility) --------------

template <typename N>
inline double dot_d(const std::vector<N>& a, const std::vector<N>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

template <typename N>
inline double norm_d(const std::vector<N>& a) {
  return std::sqrt(dot_d(a, a));
}

// --- FGMRES -----------------------------------------------------------------

struct FgmresStats {
  int iterations = 0;
  int restarts = 0;
  double final_residual = 0;
  bool converged = false;
};

/// Right-preconditioned flexible GMRES with restart. apply(x, y) computes
/// y = A x; precond(r, z) may change between iterations. Terminates when
/// ||b - A x|| <= max(abs_tol, rel_tol ||b||).
template <typename ApplyFn, typename PrecFn>
FgmresStats fgmres_solve(ApplyFn&& apply, PrecFn&& precond,
                         const std::vector<double>& b, std::vector<double>& x,
                         const FgmresConfig& cfg) {
  const std::size_t n = b.size();
  if (x.size() != n) x.assign(n, 0.0);
  FgmresStats stats;
  const double bnorm = norm_d(b);
  const double tol = std::max(cfg.abs_tol, cfg.rel_tol * bnorm);
  const int m = cfg.restart;

  std::vector<std::vector<double>> V(m + 1), Z(m);
  std::vector<double> H((m + 1) * m, 0.0);
  std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
  std::vector<double> w(n), r(n);

  for (int cycle = 0; cycle <= cfg.max_restarts; ++cycle) {
    apply(x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double beta = norm_d(r);
    stats.final_residual = beta;
    if (beta <= tol) {
      stats.converged = true;
      return stats;
    }
    if (cycle == cfg.max_restarts) break;
    stats.restarts = cycle;
    V[0] = r;
    for (std::size_t i = 0; i < n; ++i) V[0][i] /= beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int j = 0;
    for (; j < m; ++j) {
      Z[j].assign(n, 0.0);
      precond(V[j], Z[j]);
      apply(Z[j], w);
      // modified Gram-Schmidt
      for (int i = 0; i <= j; ++i) {
        const double h = dot_d(w, V[i]);
        H[i * m + j] = h;
        for (std::size_t k = 0; k < n; ++k) w[k] -= h * V[i][k];
      }
      const double h1 = norm_d(w);
      H[(j + 1) * m + j] = h1;
      ++stats.iterations;
      // apply accumulated Givens rotations to the new column
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H[i * m + j] + sn[i] * H[(i + 1) * m + j];
        H[(i + 1) * m + j] =
            -sn[i] * H[i * m + j] + cs[i] * H[(i + 1) * m + j];
        H[i * m + j] = t;
      }
      const double denom = std::hypot(H[j * m + j], h1);
      if (denom < 1e-300) {
        // exact breakdown: solution already lies in the Krylov space
        break;
      }
      cs[j] = H[j * m + j] / denom;
      sn[j] = h1 / denom;
      H[j * m + j] = denom;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      if (h1 > 1e-300) {
        V[j + 1] = w;
        for (std::size_t k = 0; k < n; ++k) V[j + 1][k] /= h1;
      }
      if (std::abs(g[j + 1]) <= tol || h1 <= 1e-300) {
        ++j;
        break;
      }
    }
    // solve the triangular system for the inner iterates used
    const int used = j;
    std::vector<double> y(used, 0.0);
    for (int i = used - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < used; ++k) s -= H[i * m + k] * y[k];
      y[i] = s / H[i * m + i];
    }
    for (int i = 0; i < used; ++i)
      for (std::size_t k = 0; k < n; ++k) x[k] += y[i] * Z[i][k];
  }
  throw LinearSolveFailure("fgmres: no convergence within restart budget");
}

// --- eigenvalue estimation --------------------------------------------------

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline double uniform01(std::uint64_t& state) {
  return (splitmix64(state) >> 11) * 0x1.0p-53;
}

/// Eigenvalue count below sigma via the Sturm sequence of T - sigma I.
inline int sturm_count(const std::vector<double>& alpha,
                       const std::vector<double>& beta, double sigma) {
  int count = 0;
  double d = alpha[0] - sigma;
  if (d < 0) ++count;
  for (std::size_t i = 1; i < alpha.size(); ++i) {
    const double b2 = beta[i - 1] * beta[i - 1];
    d = alpha[i] - sigma - b2 / (d == 0 ? 1e-300 : d);
    if (d < 0) ++count;
  }
  return count;
}

inline double tridiag_extreme(const std::vector<double>& alpha,
                              const std::vector<double>& beta, bool largest) {
  double lo = alpha[0], hi = alpha[0];
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double bl = i > 0 ? std::abs(beta[i - 1]) : 0.0;
    const double br = i < beta.size() ? std::abs(beta[i]) : 0.0;
    lo = std::min(lo, alpha[i] - bl - br);
    hi = std::max(hi, alpha[i] + bl + br);
  }
  const int nev = static_cast<int>(alpha.size());
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const int below = sturm_count(alpha, beta, mid);
    if (largest ? below < nev : below < 1)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-10 * std::max(1.0, std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Lanczos estimate of the extreme eigenvalues of D^-1 A (through the
/// similar symmetric operator D^-1/2 A D^-1/2), using a fixed-seed start
/// vector. Returns (lambda_min_est, lambda_max_est).
template <typename Number>
std::pair<double, double> estimate_eigenvalues(
    const ElasticOperator<Number>& op, const std::vector<Number>& diag,
    int iterations = 20, std::uint64_t seed = 0x9e3779b97f4a7c15ull) {
  const std::size_t n = diag.size();
  std::vector<double> dinv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i)
    dinv_sqrt[i] = 1.0 / std::sqrt(std::max(1e-300, double(diag[i])));

  std::vector<double> v(n), v_prev(n, 0.0), w(n);
  std::vector<Number> t(n), at(n);
  std::uint64_t state = seed;
  for (auto& x : v) x = detail::uniform01(state) - 0.5;
  const double nv = norm_d(v);
  for (auto& x : v) x /= nv;

  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;
  double beta_prev = 0.0;
  const int maxit = std::min<std::size_t>(iterations, n);
  for (int j = 0; j < maxit; ++j) {
    basis.push_back(v);
    for (std::size_t i = 0; i < n; ++i) t[i] = Number(dinv_sqrt[i] * v[i]);
    op.apply_tangent(t, at);
    for (std::size_t i = 0; i < n; ++i) w[i] = dinv_sqrt[i] * double(at[i]);
    if (j > 0)
      for (std::size_t i = 0; i < n; ++i) w[i] -= beta_prev * v_prev[i];
    const double a = dot_d(w, v);
    alpha.push_back(a);
    for (std::size_t i = 0; i < n; ++i) w[i] -= a * v[i];
    // full reorthogonalization, the basis is small
    for (const auto& q : basis) {
      const double h = dot_d(w, q);
      for (std::size_t i = 0; i < n; ++i) w[i] -= h * q[i];
    }
    const double b = norm_d(w);
    if (j + 1 < maxit) beta.push_back(b);
    if (b < 1e-12) break;
    v_prev = v;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / b;
    beta_prev = b;
  }
  beta.resize(alpha.size() > 0 ? alpha.size() - 1 : 0);
  const double lmax = detail::tridiag_extreme(alpha, beta, true);
  const double lmin = detail::tridiag_extreme(alpha, beta, false);
  return {lmin, lmax};
}

// --- Chebyshev-Jacobi smoother ----------------------------------------------

template <typename Number>
struct ChebyshevSmoother {
  int degree = 6;
  double lambda_min = 0.1, lambda_max = 1.5;
  std::vector<Number> inv_diag;

  void setup(const std::vector<Number>& diag, double lmax_est,
             const SmootherConfig& cfg) {
    degree = cfg.degree;
    lambda_max = cfg.safety * lmax_est;
    lambda_min = lambda_max / cfg.range_factor;
    inv_diag.resize(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i)
      inv_diag[i] = Number(1) / diag[i];
  }

  /// Chebyshev iteration on D^-1 A targeting [lambda_min, lambda_max];
  /// `degree` operator applications per call.
  void smooth(const ElasticOperator<Number>& op, std::vector<Number>& x,
              const std::vector<Number>& b, std::vector<Number>& r,
              std::vector<Number>& d, bool zero_start) const {
    const std::size_t n = b.size();
    const double theta = 0.5 * (lambda_max + lambda_min);
    const double delta = 0.5 * (lambda_max - lambda_min);
    const double sigma1 = theta / delta;
    double rho_old = 1.0 / sigma1;
    if (zero_start) {
      r = b;
      std::fill(x.begin(), x.end(), Number(0));
    } else {
      op.apply_tangent(x, r);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    }
    d.resize(n);
    const Number inv_theta(1.0 / theta);
    for (std::size_t i = 0; i < n; ++i) d[i] = inv_theta * inv_diag[i] * r[i];
    for (std::size_t i = 0; i < n; ++i) x[i] += d[i];
    std::vector<Number> ad(n);
    for (int k = 1; k < degree; ++k) {
      op.apply_tangent(d, ad);
      for (std::size_t i = 0; i < n; ++i) r[i] -= ad[i];
      const double rho_new = 1.0 / (2.0 * sigma1 - rho_old);
      const Number f1(rho_new * rho_old);
      const Number f2(2.0 * rho_new / delta);
      for (std::size_t i = 0; i < n; ++i)
        d[i] = f1 * d[i] + f2 * inv_diag[i] * r[i];
      for (std::size_t i = 0; i < n; ++i) x[i] += d[i];
      rho_old = rho_new;
    }
  }
};

// --- coarse solver -----------------------------------------------------------

template <typename Number>
class CoarseSolver {
public:
  void prepare(const ElasticOperator<Number>& op, std::int64_t direct_limit,
               const std::vector<Number>& diag) {
    op_ = &op;
    const std::int64_t n = op.n_dofs();
    dense_ = n < direct_limit;
    if (dense_) {
      std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
      std::vector<Number> e(n, Number(0)), col(n);
      for (std::int64_t j = 0; j < n; ++j) {
        e[j] = Number(1);
        op.apply_tangent(e, col);
        for (std::int64_t i = 0; i < n; ++i)
          a[i * n + j] = static_cast<double>(col[i]);
        e[j] = Number(0);
      }
      lu_.factor(std::move(a), static_cast<int>(n));
    } else {
      inv_diag_.resize(n);
      for (std::int64_t i = 0; i < n; ++i) inv_diag_[i] = Number(1) / diag[i];
    }
  }

  /// Direct double-precision solve below the DoF threshold, otherwise
  /// Jacobi-preconditioned CG to a 1e-4 relative tolerance.
  void solve(const std::vector<Number>& b, std::vector<Number>& x) const {
    const std::size_t n = b.size();
    x.assign(n, Number(0));
    if (dense_) {
      std::vector<double> rhs(n);
      for (std::size_t i = 0; i < n; ++i) rhs[i] = double(b[i]);
      lu_.solve(rhs);
      for (std::size_t i = 0; i < n; ++i) x[i] = Number(rhs[i]);
      return;
    }
    std::vector<Number> r = b, z(n), p(n), ap(n);
    const double bnorm = norm_d(b);
    if (bnorm == 0) return;
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag_[i] * r[i];
    p = z;
    double rz = dot_d(r, z);
    for (int it = 0; it < 500; ++it) {
      op_->apply_tangent(p, ap);
      const double alpha = rz / dot_d(p, ap);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += Number(alpha) * p[i];
        r[i] -= Number(alpha) * ap[i];
      }
      if (norm_d(r) <= 1e-4 * bnorm) return;
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag_[i] * r[i];
      const double rz_new = dot_d(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + Number(beta) * p[i];
    }
    throw CgNoConvergence("coarse CG: no convergence in 500 iterations");
  }

  bool dense() const { return dense_; }

private:
  const ElasticOperator<Number>* op_ = nullptr;
  bool dense_ = true;
  DenseLU lu_;
  std::vector<Number> inv_diag_;
};

// --- hp-multigrid hierarchy ---------------------------------------------------

template <typename Prec>
class MgHierarchy {
public:
  MgHierarchy(const FeLevel& fine, const std::array<bool, 6>& dirichlet_faces,
              ModelKind model, const MaterialParams& params, Formulation form,
              Strategy strategy, const KernelConfig& kcfg = {},
              const SmootherConfig& scfg = {}, const DeformMap& map = {},
              std::int64_t coarse_direct_limit = 2000)
    : fine_(&fine),
      scfg_(scfg),
      coarse_limit_(coarse_direct_limit),
      dirichlet_faces_(dirichlet_faces) {
    // degree ladder p -> floor(p/2) -> ... -> 1, then uniform h-coarsening
    std::vector<std::pair<int, int>> ladder;  // (mesh level, degree)
    int p = fine.degree();
    const int lmax = fine.mesh().level;
    ladder.push_back({lmax, p});
    while (p > 1) {
      p /= 2;
      ladder.push_back({lmax, p});
    }
    for (int l = lmax - 1; l >= 0; --l) ladder.push_back({l, 1});

    fes_.push_back(nullptr);  // level 0 aliases the fine FeLevel
    for (std::size_t i = 1; i < ladder.size(); ++i) {
      const HexMesh m = build_cube(fine.mesh().n0, ladder[i].first,
                                   fine.mesh().extent);
      fes_.push_back(std::make_unique<FeLevel>(m, ladder[i].second, map));
      FeLevel::DirichletSpec spec;
      spec.faces = dirichlet_faces_;
      fes_.back()->set_dirichlet(spec);
    }
    for (std::size_t i = 0; i < ladder.size(); ++i) {
      ops_.push_back(std::make_unique<ElasticOperator<Prec>>(
          level_fe(i), model, params, form, strategy, kcfg));
      if (i > 0)
        transfers_.push_back(
            std::make_unique<TransferOp>(level_fe(i - 1), level_fe(i)));
    }
    smoothers_.resize(ops_.size());
    scratch_.resize(ops_.size());
  }

  int n_levels() const { return static_cast<int>(ops_.size()); }
  const FeLevel& level_fe(std::size_t i) const {
    return i == 0 ? *fine_ : *fes_[i];
  }
  const ElasticOperator<Prec>& level_op(std::size_t i) const {
    return *ops_[i];
  }

  /// Interpolates the iterate down the ladder and relinearizes every level:
  /// caches, diagonal, smoothing range, coarse factorization.
  void update_linearization(const std::vector<double>& u_fine) {
    std::vector<double> u = u_fine;
    for (std::size_t l = 0; l < ops_.size(); ++l) {
      if (l > 0) {
        std::vector<double> uc;
        transfers_[l - 1]->interpolate_down(u, uc);
        level_fe(l).dirichlet_set_values(uc);
        u = std::move(uc);
      }
      ops_[l]->update_linearization(u);
      auto [diag, bad] = ops_[l]->compute_diagonal();
      (void)bad;  // nonpositive entries only arise past stability limits
      const auto [lmin, lmax] =
          estimate_eigenvalues(*ops_[l], diag, scfg_.eig_iterations,
                               scfg_.seed);
      (void)lmin;
      smoothers_[l].setup(diag, lmax, scfg_);
      if (l + 1 == ops_.size()) coarse_.prepare(*ops_[l], coarse_limit_, diag);
    }
  }

  /// One V-cycle as a preconditioner: z ~= K^-1 r, all level work in Prec.
  void precondition(const std::vector<double>& r, std::vector<double>& z) {
    auto& b0 = scratch_[0].b;
    b0.assign(r.begin(), r.end());
    level_fe(0).dirichlet_set_zero(b0);
    v_cycle(0, b0);
    z.resize(r.size());
    const auto& x0 = scratch_[0].x;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = double(x0[i]);
  }

  ChebyshevSmoother<Prec>& smoother(std::size_t l) { return smoothers_[l]; }
  const CoarseSolver<Prec>& coarse() const { return coarse_; }

  void set_threads(int t) {
    for (auto& op : ops_) op->set_threads(t);
  }

  void set_dirichlet_faces(const std::array<bool, 6>& faces) {
    dirichlet_faces_ = faces;
    for (auto& fe : fes_)
      if (fe) {
        FeLevel::DirichletSpec spec;
        spec.faces = faces;
        fe->set_dirichlet(spec);
      }
  }

private:
  struct LevelScratch {
    std::vector<Prec> x, b, r, d, t;
  };

  void v_cycle(std::size_t l, const std::vector<Prec>& b) {
    auto& s = scratch_[l];
    const std::size_t n = b.size();
    s.x.assign(n, Prec(0));
    if (l + 1 == ops_.size()) {
      coarse_.solve(b, s.x);
      return;
    }
    s.r.resize(n);
    s.d.resize(n);
    smoothers_[l].smooth(*ops_[l], s.x, b, s.r, s.d, /*zero_start=*/true);
    // residual and restriction
    s.t.resize(n);
    ops_[l]->apply_tangent(s.x, s.t);
    for (std::size_t i = 0; i < n; ++i) s.t[i] = b[i] - s.t[i];
    level_fe(l).dirichlet_set_zero(s.t);
    std::vector<Prec> bc;
    transfers_[l]->restrict_(s.t, bc);
    level_fe(l + 1).dirichlet_set_zero(bc);
    v_cycle(l + 1, bc);
    std::vector<Prec> corr;
    transfers_[l]->prolongate(scratch_[l + 1].x, corr);
    level_fe(l).dirichlet_set_zero(corr);
    for (std::size_t i = 0; i < n; ++i) s.x[i] += corr[i];
    smoothers_[l].smooth(*ops_[l], s.x, b, s.r, s.d, /*zero_start=*/false);
  }

  const FeLevel* fine_;
  SmootherConfig scfg_;
  std::int64_t coarse_limit_;
  std::array<bool, 6> dirichlet_faces_{};
  std::vector<std::unique_ptr<FeLevel>> fes_;
  std::vector<std::unique_ptr<ElasticOperator<Prec>>> ops_;
  std::vector<std::unique_ptr<TransferOp>> transfers_;
  std::vector<ChebyshevSmoother<Prec>> smoothers_;
  std::vector<LevelScratch> scratch_;
  CoarseSolver<Prec> coarse_;
};

// --- Newton ------------------------------------------------------------------

struct NewtonStepStats {
  int newton_iter = 0;
  int fgmres_iters = 0;
  double residual_before = 0;
  double residual_after = 0;
  double seconds = 0;
};

struct NewtonStats {
  std::vector<NewtonStepStats> steps;
  int iterations = 0;
  bool converged = false;
  double final_residual = 0;
};

/// Newton's method: while ||r|| exceeds both tolerances, relinearize all
/// levels at u_k, solve K du = -r with (preconditioned) FGMRES and update.
/// No line search or load stepping; drivers apply load increments.
template <typename Prec>
NewtonStats newton_solve(ElasticOperator<double>& op, MgHierarchy<Prec>* mg,
                         std::vector<double>& u, const NewtonConfig& ncfg,
                         const FgmresConfig& lcfg) {
  NewtonStats stats;
  std::vector<double> r;
  op.evaluate_residual(u, r);
  double rnorm = norm_d(r);
  const double r0 = rnorm;
  stats.final_residual = rnorm;
  int k = 0;
  while (rnorm > ncfg.eps_abs && rnorm > ncfg.eps_rel * r0) {
    if (k >= ncfg.max_iter)
      throw MaxIterationsExceeded("newton_solve: iteration budget exhausted");
    const auto t0 = std::chrono::steady_clock::now();
    op.update_linearization(u);
    if (mg) mg->update_linearization(u);
    std::vector<double> rhs(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) rhs[i] = -r[i];
    std::vector<double> du(r.size(), 0.0);
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
      op.apply_tangent(x, y);
    };
    FgmresStats ls;
    if (mg) {
      auto prec = [&](const std::vector<double>& rr, std::vector<double>& zz) {
        mg->precondition(rr, zz);
      };
      ls = fgmres_solve(apply, prec, rhs, du, lcfg);
    } else {
      auto prec = [&](const std::vector<double>& rr, std::vector<double>& zz) {
        zz = rr;
      };
      ls = fgmres_solve(apply, prec, rhs, du, lcfg);
    }
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += du[i];
    op.evaluate_residual(u, r);
    const double rnew = norm_d(r);
    const auto t1 = std::chrono::steady_clock::now();
    NewtonStepStats step;
    step.newton_iter = k;
    step.fgmres_iters = ls.iterations;
    step.residual_before = rnorm;
    step.residual_after = rnew;
    step.seconds = std::chrono::duration<double>(t1 - t0).count();
    stats.steps.push_back(step);
    rnorm = rnew;
    ++k;
  }
  stats.iterations = k;
  stats.converged = true;
  stats.final_residual = rnorm;
  return stats;
}

}  // namespace emf

#endif
