// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "elastmf/operator.hpp"
#include "test_helpers.hpp"

using namespace emf;
using test::Rng;

namespace {

MaterialParams tissue() { return MaterialParams{}; }

const ModelKind kModels[3] = {ModelKind::cnh, ModelKind::inh,
                              ModelKind::fiber};

/// Smooth admissible displacement state on the level (zero on no face).
std::vector<double> smooth_state(const FeLevel& fe, double amp) {
  std::vector<double> u(fe.dof_count());
  const double pi = 3.14159265358979323846;
  const double L = fe.mesh().extent;
  for (std::int64_t n = 0; n < fe.node_count(); ++n) {
    const double x = fe.node_coords()[3 * n] / L;
    const double y = fe.node_coords()[3 * n + 1] / L;
    const double z = fe.node_coords()[3 * n + 2] / L;
    u[3 * n + 0] = amp * (0.9 * std::sin(pi * x) * std::cos(pi * y) + 0.4 * z);
    u[3 * n + 1] = amp * (0.7 * std::cos(pi * z) * std::sin(pi * y) - 0.3 * x);
    u[3 * n + 2] = amp * (0.5 * std::sin(pi * x) * std::sin(pi * z) + 0.2 * y);
  }
  return u;
}

std::vector<double> random_free_vector(const FeLevel& fe, unsigned seed) {
  Rng rng(seed);
  std::vector<double> v(fe.dof_count());
  for (auto& x : v) x = rng.uniform(-1, 1);
  std::vector<double> w = v;
  fe.dirichlet_set_zero(w);
  return w;
}

double rel2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

}  // namespace

TEST_CASE("residual vanishes at the stress-free reference") {
  const MaterialParams p = tissue();
  const DeformMap map{0.05};
  FeLevel fe(build_cube(1, 1), 2, map);
  for (const ModelKind m : kModels)
    for (const Domain d : {Domain::material, Domain::spatial}) {
      ElasticOperator<double> op(fe, m, p, {Stability::stable, d},
                                 Strategy::none);
      std::vector<double> u(fe.dof_count(), 0.0), r;
      op.evaluate_residual(u, r);
      for (const double v : r) CHECK(std::abs(v) <= 1e-14);
    }
}

TEST_CASE("material and spatial residuals agree to round-off") {
  const MaterialParams p = tissue();
  const DeformMap map{0.05};
  FeLevel fe(build_cube(1, 1), 2, map);
  FeLevel::DirichletSpec spec;
  spec.faces = {true, false, false, false, false, false};
  fe.set_dirichlet(spec);
  const std::vector<double> u = smooth_state(fe, 0.03);
  for (const ModelKind m : kModels) {
    ElasticOperator<double> mat(fe, m, p, {Stability::stable, Domain::material},
                                Strategy::none);
    ElasticOperator<double> spa(fe, m, p, {Stability::stable, Domain::spatial},
                                Strategy::none);
    std::vector<double> rm, rs;
    mat.evaluate_residual(u, rm);
    spa.evaluate_residual(u, rs);
    CHECK(rel2(rs, rm) <= 1e-11);
  }
}

TEST_CASE("apply_tangent matches the finite difference of the residual") {
  const MaterialParams p = tissue();
  const DeformMap map{0.05};
  FeLevel fe(build_cube(1, 1), 2, map);
  FeLevel::DirichletSpec spec;
  spec.faces = {true, false, false, false, false, false};
  fe.set_dirichlet(spec);
  std::vector<double> u = smooth_state(fe, 0.03);
  fe.dirichlet_set_values(u);
  const std::vector<double> du = random_free_vector(fe, 401);

  for (const ModelKind m : kModels)
    for (const Domain d : {Domain::material, Domain::spatial})
      for (const Strategy s :
           {Strategy::none, Strategy::scalar, Strategy::tensor}) {
        ElasticOperator<double> op(fe, m, p, {Stability::stable, d}, s);
        op.update_linearization(u);
        std::vector<double> ku;
        op.apply_tangent(du, ku);
        const double h = 1e-6;
        std::vector<double> up = u, um = u, rp, rm;
        for (std::size_t i = 0; i < u.size(); ++i) {
          up[i] += h * du[i];
          um[i] -= h * du[i];
        }
        op.evaluate_residual(up, rp);
        op.evaluate_residual(um, rm);
        std::vector<double> fd(u.size());
        for (std::size_t i = 0; i < u.size(); ++i)
          fd[i] = (rp[i] - rm[i]) / (2 * h);
        // constrained rows: K acts as identity, the FD of the zeroed
        // residual stays 0; compare free rows only
        const auto& mask = fe.dirichlet_mask();
        double num = 0, den = 0;
        for (std::size_t i = 0; i < u.size(); ++i) {
          if (mask[i]) continue;
          num += (ku[i] - fd[i]) * (ku[i] - fd[i]);
          den += fd[i] * fd[i];
        }
        CHECK(std::sqrt(num / den) <= 1e-5);
      }
}

TEST_CASE("tangent is linear and the bilinear form is symmetric") {
  const MaterialParams p = tissue();
  const DeformMap map{0.05};
  FeLevel fe(build_cube(1, 1), 2, map);
  FeLevel::DirichletSpec spec;
  spec.faces = {true, false, false, false, false, false};
  fe.set_dirichlet(spec);
  std::vector<double> u = smooth_state(fe, 0.03);
  fe.dirichlet_set_values(u);
  ElasticOperator<double> op(fe, ModelKind::fiber, p,
                             {Stability::stable, Domain::material},
                             Strategy::scalar);
  op.update_linearization(u);
  const std::vector<double> x = random_free_vector(fe, 402);
  const std::vector<double> y = random_free_vector(fe, 403);
  std::vector<double> kx, ky, kz;
  op.apply_tangent(x, kx);
  op.apply_tangent(y, ky);
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = 2.5 * x[i] - 0.75 * y[i];
  op.apply_tangent(z, kz);
  double worst = 0, scale = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    worst = std::max(worst, std::abs(kz[i] - (2.5 * kx[i] - 0.75 * ky[i])));
    scale = std::max(scale, std::abs(kz[i]));
  }
  CHECK(worst <= 1e-13 * std::max(1.0, scale));

  double xky = 0, ykx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xky += x[i] * ky[i];
    ykx += y[i] * kx[i];
  }
  CHECK(std::abs(xky - ykx) <= 1e-10 * std::max(std::abs(xky), 1.0));
}

TEST_CASE("assembled oracle: symmetry, matvec, strategy equality, p sweep") {
  const MaterialParams p = tissue();
  const DeformMap map{0.05};
  for (const int degree : {1, 2, 3}) {
    FeLevel fe(build_cube(1, 1), degree, map);
    FeLevel::DirichletSpec spec;
    spec.faces = {true, false, false, false, false, false};
    fe.set_dirichlet(spec);
    std::vector<double> u = smooth_state(fe, 0.02);
    fe.dirichlet_set_values(u);
    for (const ModelKind m : kModels)
      for (const Domain d : {Domain::material, Domain::spatial}) {
        ElasticOperator<double> op_none(fe, m, p, {Stability::stable, d},
                                        Strategy::none);
        op_none.update_linearization(u);
        const auto K = assemble_matrix_oracle(op_none);
        const std::int64_t n = fe.dof_count();
        // symmetry on the free block
        double scale = 0, asym = 0;
        const auto& mask = fe.dirichlet_mask();
        for (std::int64_t i = 0; i < n; ++i)
          for (std::int64_t j = 0; j < n; ++j) {
            if (mask[i] || mask[j]) continue;
            scale = std::max(scale, std::abs(K[i][j]));
            asym = std::max(asym, std::abs(K[i][j] - K[j][i]));
          }
        CHECK(asym <= 1e-10 * scale);
        // matrix-vector product equals the matrix-free application
        const std::vector<double> x = random_free_vector(fe, 404 + degree);
        std::vector<double> kx;
        op_none.apply_tangent(x, kx);
        double num = 0, den = 0;
        for (std::int64_t i = 0; i < n; ++i) {
          double row = 0;
          for (std::int64_t j = 0; j < n; ++j) row += K[i][j] * x[j];
          num += (row - kx[i]) * (row - kx[i]);
          den += row * row;
        }
        CHECK(std::sqrt(num / den) <= 1e-12);
        // identical matrices across storage strategies
        for (const Strategy s : {Strategy::scalar, Strategy::tensor}) {
          ElasticOperator<double> op_s(fe, m, p, {Stability::stable, d}, s);
          op_s.update_linearization(u);
          const auto Ks = assemble_matrix_oracle(op_s);
          double diff = 0;
          for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = 0; j < n; ++j)
              diff = std::max(diff, std::abs(Ks[i][j] - K[i][j]));
          CHECK(diff <= 1e-13 * std::max(1.0, scale));
        }
      }
  }
}

TEST_CASE("oracle cap rejects large problems") {
  const MaterialParams p = tissue();
  FeLevel fe(build_cube(2, 1), 2, DeformMap{0.0});
  ElasticOperator<double> op(fe, ModelKind::cnh, p,
                             {Stability::stable, Domain::material},
                             Strategy::none);
  std::vector<double> u(fe.dof_count(), 0.0);
  op.update_linearization(u);
  CHECK_THROWS_AS(assemble_matrix_oracle(op, 100), TooLarge);
}

TEST_CASE("material and spatial tangents agree to round-off") {
  const MaterialParams p = tissue();
  const DeformMap map{0.05};
  FeLevel fe(build_cube(1, 1), 2, map);
  FeLevel::DirichletSpec spec;
  spec.faces = {true, false, false, false, false, false};
  fe.set_dirichlet(spec);
  std::vector<double> u = smooth_state(fe, 0.03);
  fe.dirichlet_set_values(u);
  const std::vector<double> du = random_free_vector(fe, 405);
  for (const ModelKind m : kModels) {
    ElasticOperator<double> mat(fe, m, p, {Stability::stable, Domain::material},
                                Strategy::tensor);
    ElasticOperator<double> spa(fe, m, p, {Stability::stable, Domain::spatial},
                                Strategy::tensor);
    mat.update_linearization(u);
    spa.update_linearization(u);
    std::vector<double> km, ks;
    mat.apply_tangent(du, km);
    spa.apply_tangent(du, ks);
    CHECK(rel2(ks, km) <= 1e-10);
  }
}

TEST_CASE("exact diagonal matches the assembled matrix") {
  const MaterialParams p = tissue();
  const DeformMap map{0.05};
  FeLevel fe(build_cube(1, 0), 2, map);  // single element
  FeLevel::DirichletSpec spec;
  spec.faces = {true, false, false, false, false, false};
  fe.set_dirichlet(spec);
  std::vector<double> u = smooth_state(fe, 0.02);
  fe.dirichlet_set_values(u);
  for (const Domain d : {Domain::material, Domain::spatial}) {
    ElasticOperator<double> op(fe, ModelKind::fiber, p,
                               {Stability::stable, d}, Strategy::scalar);
    op.update_linearization(u);
    const auto [diag, bad] = op.compute_diagonal();
    CHECK(bad.empty());
    const auto K = assemble_matrix_oracle(op);
    const auto& mask = fe.dirichlet_mask();
    for (std::int64_t i = 0; i < fe.dof_count(); ++i) {
      if (mask[i])
        CHECK(diag[i] == 1.0);
      else
        CHECK(diag[i] ==
              doctest::Approx(K[i][i]).epsilon(1e-11).scale(
                  std::abs(K[i][i]) + 1));
    }
  }
}

TEST_CASE("single-precision apply tracks the double-precision apply") {
  const MaterialParams p = tissue();
  const DeformMap map{0.05};
  FeLevel fe(build_cube(1, 1), 2, map);
  FeLevel::DirichletSpec spec;
  spec.faces = {true, false, false, false, false, false};
  fe.set_dirichlet(spec);
  std::vector<double> u = smooth_state(fe, 0.03);
  fe.dirichlet_set_values(u);
  ElasticOperator<double> opd(fe, ModelKind::fiber, p,
                              {Stability::stable, Domain::material},
                              Strategy::scalar);
  ElasticOperator<float> opf(fe, ModelKind::fiber, p,
                             {Stability::stable, Domain::material},
                             Strategy::scalar);
  opd.update_linearization(u);
  opf.update_linearization(u);
  const std::vector<double> x = random_free_vector(fe, 406);
  std::vector<float> xf(x.begin(), x.end());
  std::vector<double> yd;
  std::vector<float> yf;
  opd.apply_tangent(x, yd);
  opf.apply_tangent(xf, yf);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < yd.size(); ++i) {
    const double d = yd[i] - static_cast<double>(yf[i]);
    num += d * d;
    den += yd[i] * yd[i];
  }
  CHECK(std::sqrt(num / den) <= 5e-6);
}

TEST_CASE("update_linearization is deterministic and guards staleness") {
  const MaterialParams p = tissue();
  FeLevel fe(build_cube(1, 1), 2, DeformMap{0.05});
  ElasticOperator<double> op(fe, ModelKind::inh, p,
                             {Stability::stable, Domain::material},
                             Strategy::tensor);
  const std::vector<double> du(fe.dof_count(), 0.01);
  CHECK_THROWS_AS(
      ([&] {
        std::vector<double> y;
        op.apply_tangent(du, y);
      })(),
      StaleCache);
  std::vector<double> u = smooth_state(fe, 0.02);
  op.update_linearization(u);
  std::vector<double> y1, y2;
  op.apply_tangent(du, y1);
  op.update_linearization(u);
  op.apply_tangent(du, y2);
  for (std::size_t i = 0; i < y1.size(); ++i) CHECK(y1[i] == y2[i]);
  const std::uint64_t cs = op.checksum();
  op.update_linearization(u);
  CHECK(op.checksum() == cs);
}

TEST_CASE("nonpositive Jacobian reports element and point") {
  const MaterialParams p = tissue();
  FeLevel fe(build_cube(1, 0), 1, DeformMap{0.0});
  ElasticOperator<double> op(fe, ModelKind::inh, p,
                             {Stability::stable, Domain::material},
                             Strategy::scalar);
  // collapse the element: u = -X pushes det(F) to zero and beyond
  std::vector<double> u(fe.dof_count());
  for (std::int64_t n = 0; n < fe.node_count(); ++n)
    for (int c = 0; c < 3; ++c)
      u[3 * n + c] = -1.5 * fe.node_coords()[3 * n + c];
  CHECK_THROWS_AS(op.update_linearization(u), NonPositiveJacobian);
}

TEST_CASE("threaded element loop reproduces the serial result bitwise") {
  const MaterialParams p = tissue();
  FeLevel fe(build_cube(2, 1), 2, DeformMap{0.05});
  std::vector<double> u = smooth_state(fe, 0.02);
  ElasticOperator<double> op(fe, ModelKind::fiber, p,
                             {Stability::stable, Domain::material},
                             Strategy::scalar);
  op.update_linearization(u);
  const std::vector<double> x = random_free_vector(fe, 407);
  std::vector<double> y1, y2;
  op.set_threads(1);
  op.apply_tangent(x, y1);
  op.set_threads(2);
  op.apply_tangent(x, y2);
  for (std::size_t i = 0; i < y1.size(); ++i) CHECK(y1[i] == y2[i]);
}

TEST_CASE("byte ledger scales the storage cell by quadrature point count") {
  const MaterialParams p = tissue();
  FeLevel fe(build_cube(1, 1), 2, DeformMap{0.0});
  ElasticOperator<double> op(fe, ModelKind::fiber, p,
                             {Stability::stable, Domain::material},
                             Strategy::scalar);
  const ByteLedger bl = op.byte_ledger();
  CHECK(bl.cell.storage_bytes() == 272);
  CHECK(bl.cell.traffic_bytes() == 248);
  CHECK(bl.n_qpoints == 8 * 27);
  CHECK(bl.storage_total() == 272 * 8 * 27);
  CHECK(bl.traffic_per_dof() ==
        doctest::Approx(248.0 * 8 * 27 / fe.dof_count() + 16.0));
}

TEST_CASE("manufactured solution: residual decays at the expected rate") {
  const MaterialParams p = tissue();
  const double pi = 3.14159265358979323846;
  const double amp = 0.02;
  auto ustar = [&](const Vec3d& x) {
    return Vec3d{{{amp * std::sin(pi * x[0]) * std::cos(pi * x[1]),
                   amp * std::cos(pi * x[2]) * std::sin(pi * x[1]),
                   amp * std::sin(pi * x[0]) * std::sin(pi * x[2])}}};
  };
  auto grad_ustar = [&](const Vec3d& x) {
    Tensor2<double> g;
    g(0, 0) = amp * pi * std::cos(pi * x[0]) * std::cos(pi * x[1]);
    g(0, 1) = -amp * pi * std::sin(pi * x[0]) * std::sin(pi * x[1]);
    g(0, 2) = 0;
    g(1, 0) = 0;
    g(1, 1) = amp * pi * std::cos(pi * x[2]) * std::cos(pi * x[1]);
    g(1, 2) = -amp * pi * std::sin(pi * x[2]) * std::sin(pi * x[1]);
    g(2, 0) = amp * pi * std::cos(pi * x[0]) * std::sin(pi * x[2]);
    g(2, 1) = 0;
    g(2, 2) = amp * pi * std::sin(pi * x[0]) * std::cos(pi * x[2]);
    return g;
  };
  const StructureTensors st = build_structure_tensors(p);
  const Formulation form{Stability::stable, Domain::material};
  auto first_pk = [&](const Vec3d& x) {
    const Tensor2<double> g = grad_ustar(x);
    Tensor2<double> f = g;
    f(0, 0) += 1;
    f(1, 1) += 1;
    f(2, 2) += 1;
    return matmul(f, second_pk(ModelKind::inh, p, st, g, form));
  };
  // FD-divergence oracle for the body force B = -Div P
  auto body = [&](const Vec3d& x) {
    const double h = 1e-5;
    Vec3d b{{{0, 0, 0}}};
    for (int j = 0; j < 3; ++j) {
      Vec3d xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const Tensor2<double> pp = first_pk(xp), pm = first_pk(xm);
      for (int i = 0; i < 3; ++i) b[i] -= (pp(i, j) - pm(i, j)) / (2 * h);
    }
    return b;
  };

  // smooth fixed test field vanishing on the whole boundary, so pairing
  // with the (constrained-row-zeroed) residual stays a proper duality
  auto vfield = [&](const Vec3d& x) {
    const double bub = 64.0 * x[0] * (1 - x[0]) * x[1] * (1 - x[1]) * x[2] *
                       (1 - x[2]);
    return Vec3d{{{bub * (1.0 + 0.5 * std::sin(pi * x[0])),
                   bub * (0.8 - 0.4 * x[1]), bub * (0.6 + 0.3 * x[2])}}};
  };

  double err_prev = 0;
  std::vector<double> errs;
  for (const int level : {0, 1, 2}) {
    FeLevel fe(build_cube(2, level), 1, DeformMap{0.0});
    FeLevel::DirichletSpec spec;
    spec.faces = {true, true, true, true, true, true};
    spec.values = ustar;
    fe.set_dirichlet(spec);
    Loads loads;
    loads.body_force = body;
    ElasticOperator<double> op(fe, ModelKind::inh, p, form, Strategy::none,
                               {}, loads);
    std::vector<double> u(fe.dof_count());
    for (std::int64_t n = 0; n < fe.node_count(); ++n) {
      const Vec3d x{{{fe.node_coords()[3 * n], fe.node_coords()[3 * n + 1],
                      fe.node_coords()[3 * n + 2]}}};
      const Vec3d val = ustar(x);
      for (int c = 0; c < 3; ++c) u[3 * n + c] = val[c];
    }
    std::vector<double> r;
    op.evaluate_residual(u, r);
    double functional = 0;
    for (std::int64_t n = 0; n < fe.node_count(); ++n) {
      const Vec3d x{{{fe.node_coords()[3 * n], fe.node_coords()[3 * n + 1],
                      fe.node_coords()[3 * n + 2]}}};
      const Vec3d v = vfield(x);
      for (int c = 0; c < 3; ++c) functional += v[c] * r[3 * n + c];
    }
    errs.push_back(std::abs(functional));
    err_prev = std::abs(functional);
  }
  (void)err_prev;
  // O(h^p) with p = 1: each refinement should cut the functional by ~2x;
  // require a 1.6x geometric-mean reduction to stay robust
  CHECK(errs[1] <= errs[0] / 1.6);
  CHECK(errs[2] <= errs[1] / 1.6);
}
