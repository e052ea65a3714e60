// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0

#include "elastmf/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace emf {

namespace {
constexpr double kPi = 3.14159265358979323846;

double legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return p0;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double legendre_derivative(int n, double x) {
  if (n == 0) return 0.0;
  const double pn = legendre(n, x);
  const double pn1 = legendre(n - 1, x);
  return n * (pn1 - x * pn) / (1.0 - x * x);
}
}  // namespace

void gauss_legendre(int n, std::vector<double>& pts, std::vector<double>& wts) {
  pts.assign(n, 0.0);
  wts.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, Newton refinement
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const double f = legendre(n, x);
      const double df = legendre_derivative(n, x);
      const double dx = f / df;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double df = legendre_derivative(n, x);
    pts[i] = x;
    wts[i] = 2.0 / ((1.0 - x * x) * df * df);
  }
  std::sort(pts.begin(), pts.end());
  // weights recomputed after sorting to keep the pairing
  for (int i = 0; i < n; ++i) {
    const double df = legendre_derivative(n, pts[i]);
    wts[i] = 2.0 / ((1.0 - pts[i] * pts[i]) * df * df);
  }
}

std::vector<double> gauss_lobatto(int n) {
  std::vector<double> pts(n);
  pts[0] = -1.0;
  pts[n - 1] = 1.0;
  // interior points are the roots of P'_{n-1}
  const int m = n - 1;
  for (int i = 1; i < m; ++i) {
    double x = std::cos(kPi * (m - i) / m);  // Chebyshev-Lobatto guess
    for (int it = 0; it < 100; ++it) {
      // Newton on g(x) = P'_m(x); g'(x) from the Legendre ODE:
      // (1-x^2) P''_m = 2x P'_m - m(m+1) P_m
      const double g = legendre_derivative(m, x);
      const double gp =
          (2.0 * x * g - m * (m + 1.0) * legendre(m, x)) / (1.0 - x * x);
      const double dx = g / gp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    pts[i] = x;
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

double lagrange_value(const std::vector<double>& nodes, int i, double x) {
  double v = 1.0;
  for (std::size_t k = 0; k < nodes.size(); ++k)
    if (static_cast<int>(k) != i) v *= (x - nodes[k]) / (nodes[i] - nodes[k]);
  return v;
}

double lagrange_derivative(const std::vector<double>& nodes, int i, double x) {
  double sum = 0.0;
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    if (static_cast<int>(m) == i) continue;
    double prod = 1.0 / (nodes[i] - nodes[m]);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (static_cast<int>(k) == i || k == m) continue;
      prod *= (x - nodes[k]) / (nodes[i] - nodes[k]);
    }
    sum += prod;
  }
  return sum;
}

Basis1D::Basis1D(int degree) : p(degree) {
  if (degree < 1) throw ConfigError("Basis1D: degree must be >= 1");
  nodes = gauss_lobatto(p + 1);
  gauss_legendre(p + 1, qpts, qwts);
  const int n = p + 1;
  B.assign(n * n, 0.0);
  D.assign(n * n, 0.0);
  Bt.assign(n * n, 0.0);
  Dt.assign(n * n, 0.0);
  for (int q = 0; q < n; ++q)
    for (int i = 0; i < n; ++i) {
      B[q * n + i] = lagrange_value(nodes, i, qpts[q]);
      D[q * n + i] = lagrange_derivative(nodes, i, qpts[q]);
      Bt[i * n + q] = B[q * n + i];
      Dt[i * n + q] = D[q * n + i];
    }
}

HexMesh build_cube(int n0, int level, double extent) {
  if (n0 < 1 || level < 0 || extent <= 0)
    throw ConfigError("build_cube: need n0 >= 1, level >= 0, extent > 0");
  return HexMesh{n0, level, extent};
}

Vec3d DeformMap::operator()(const Vec3d& x, double extent) const {
  const double s = kPi / extent;
  const double a = amplitude * extent;
  Vec3d r = x;
  r[0] += a * std::sin(s * x[1]) * std::sin(s * x[2]);
  r[1] += a * std::sin(s * x[0]) * std::sin(s * x[2]);
  r[2] += a * std::sin(s * x[0]) * std::sin(s * x[1]);
  return r;
}

FeLevel::FeLevel(const HexMesh& mesh, int degree, const DeformMap& map)
  : mesh_(mesh), basis_(degree), lattice_m_(mesh.n() * degree + 1) {
  const int n = mesh_.n();
  const int p = degree;
  const int m = lattice_m_;
  const double h = mesh_.extent / n;

  coords_.resize(3 * node_count());
  for (int c = 0; c < m; ++c)
    for (int b = 0; b < m; ++b)
      for (int a = 0; a < m; ++a) {
        auto axis_pos = [&](int idx) {
          const int e = std::min(idx / p, n - 1);
          const int l = idx - e * p;
          return (e + 0.5 * (basis_.nodes[l] + 1.0)) * h;
        };
        const Vec3d ref{{{axis_pos(a), axis_pos(b), axis_pos(c)}}};
        const Vec3d x = map(ref, mesh_.extent);
        const std::int64_t node = node_index(a, b, c);
        coords_[3 * node + 0] = x[0];
        coords_[3 * node + 1] = x[1];
        coords_[3 * node + 2] = x[2];
      }

  // Reference->material Jacobians at the quadrature points of each element.
  const int nn = basis_.nn(), nq = basis_.nq();
  const int nn3 = nn * nn * nn, nq3 = nq * nq * nq;
  jac0_.resize(static_cast<std::size_t>(mesh_.element_count()) * nq3 * 9);
  std::vector<double> local(nn3), work(2 * nq3 + 2 * nn3),
      g[3] = {std::vector<double>(nq3), std::vector<double>(nq3),
              std::vector<double>(nq3)};
  std::vector<std::int64_t> nodes(nn3);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::int64_t e = element_index(i, j, k);
        element_nodes(i, j, k, nodes.data());
        for (int comp = 0; comp < 3; ++comp) {
          for (int l = 0; l < nn3; ++l) local[l] = coords_[3 * nodes[l] + comp];
          gradient_at_qpoints(basis_.B.data(), basis_.D.data(), nn, nq,
                              local.data(), work.data(), g[0].data(),
                              g[1].data(), g[2].data());
          for (int q = 0; q < nq3; ++q) {
            double* J = &jac0_[(e * nq3 + q) * 9];
            J[comp * 3 + 0] = g[0][q];
            J[comp * 3 + 1] = g[1][q];
            J[comp * 3 + 2] = g[2][q];
          }
        }
        for (int q = 0; q < nq3; ++q) {
          const double* J = &jac0_[(e * nq3 + q) * 9];
          const double det =
              J[0] * (J[4] * J[8] - J[5] * J[7]) -
              J[1] * (J[3] * J[8] - J[5] * J[6]) +
              J[2] * (J[3] * J[7] - J[4] * J[6]);
          if (!(det > 0.0))
            throw DegenerateMapping(
                "FeLevel: mapping Jacobian not positive at a quadrature "
                "point");
        }
      }

  dmask_.assign(dof_count(), 0);
  dvals_.assign(dof_count(), 0.0);
}

void FeLevel::element_nodes(int i, int j, int k, std::int64_t* out) const {
  const int p = basis_.p;
  int idx = 0;
  for (int c = 0; c <= p; ++c)
    for (int b = 0; b <= p; ++b)
      for (int a = 0; a <= p; ++a)
        out[idx++] = node_index(i * p + a, j * p + b, k * p + c);
}

void FeLevel::set_dirichlet(const DirichletSpec& spec) {
  dmask_.assign(dof_count(), 0);
  dvals_.assign(dof_count(), 0.0);
  const int m = lattice_m_;
  auto on_face = [&](int a, int b, int c, int f) {
    switch (f) {
      case 0: return a == 0;
      case 1: return a == m - 1;
      case 2: return b == 0;
      case 3: return b == m - 1;
      case 4: return c == 0;
      default: return c == m - 1;
    }
  };
  for (int c = 0; c < m; ++c)
    for (int b = 0; b < m; ++b)
      for (int a = 0; a < m; ++a) {
        bool constrained = false;
        for (int f = 0; f < 6; ++f)
          if (spec.faces[f] && on_face(a, b, c, f)) constrained = true;
        if (!constrained) continue;
        const std::int64_t node = node_index(a, b, c);
        Vec3d g{{{0, 0, 0}}};
        if (spec.values) {
          const Vec3d x{{{coords_[3 * node], coords_[3 * node + 1],
                          coords_[3 * node + 2]}}};
          g = spec.values(x);
        }
        for (int comp = 0; comp < 3; ++comp) {
          dmask_[3 * node + comp] = 1;
          dvals_[3 * node + comp] = g[comp];
        }
      }
}

LatticeMap1D LatticeMap1D::build(int n_src, int p_src, int n_dst, int p_dst) {
  LatticeMap1D m;
  m.n_src = n_src;
  m.p_src = p_src;
  m.n_dst = n_dst;
  m.p_dst = p_dst;
  const std::vector<double> src_nodes = gauss_lobatto(p_src + 1);
  const std::vector<double> dst_nodes = gauss_lobatto(p_dst + 1);
  const int nd = m.dst_nodes();
  const int stencil = p_src + 1;
  m.src_elem.resize(nd);
  m.w.resize(static_cast<std::size_t>(nd) * stencil);
  for (int d = 0; d < nd; ++d) {
    const int e_dst = std::min(d / p_dst, n_dst - 1);
    const int l_dst = d - e_dst * p_dst;
    const double s = (e_dst + 0.5 * (dst_nodes[l_dst] + 1.0)) / n_dst;
    int e_src = std::min(static_cast<int>(s * n_src), n_src - 1);
    // snap to the element whose interior (or boundary) contains s
    if (e_src > 0 && s * n_src <= e_src) e_src = e_src - (s * n_src < e_src);
    const double xi = 2.0 * (s * n_src - e_src) - 1.0;
    m.src_elem[d] = e_src;
    for (int i = 0; i < stencil; ++i)
      m.w[static_cast<std::size_t>(d) * stencil + i] =
          lagrange_value(src_nodes, i, xi);
  }
  return m;
}

TransferOp::TransferOp(const FeLevel& fine, const FeLevel& coarse)
  : fine_(&fine), coarse_(&coarse) {
  const int nf = fine.mesh().n(), nc = coarse.mesh().n();
  const int pf = fine.degree(), pc = coarse.degree();
  const bool p_step = nf == nc && pf > pc;
  const bool h_step = pf == pc && nf == 2 * nc;
  if (!p_step && !h_step)
    throw ConfigError(
        "TransferOp: levels must differ by a p-coarsening or one uniform "
        "refinement");
  up_ = LatticeMap1D::build(nc, pc, nf, pf);
  down_ = LatticeMap1D::build(nf, pf, nc, pc);
}

}  // namespace emf
