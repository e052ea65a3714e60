// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "elastmf/tensor.hpp"
#include "test_helpers.hpp"

using namespace emf;
using test::Rng;

namespace {

Tensor2<double> diag(double a, double b, double c) {
  Tensor2<double> t;
  t(0, 0) = a;
  t(1, 1) = b;
  t(2, 2) = c;
  return t;
}

template <int W>
Tensor2<Batch<double, W>> broadcast_tensor(const Tensor2<double> lanes[W]) {
  Tensor2<Batch<double, W>> t;
  for (int i = 0; i < 9; ++i)
    for (int l = 0; l < W; ++l) t.a[i].lane[l] = lanes[l].a[i];
  return t;
}

}  // namespace

TEST_CASE("determinant: identity and diagonal") {
  CHECK(determinant(Tensor2<double>::identity()) == 1.0);
  CHECK(determinant(diag(2, 3, 4)) == 24.0);
}

TEST_CASE("determinant matches permutation-sum oracle") {
  Rng rng(101);
  for (int it = 0; it < 200; ++it) {
    const Tensor2<double> a = test::random_tensor(rng);
    const double oracle = test::det_permutation_oracle(a);
    CHECK(std::abs(determinant(a) - oracle) <=
          1e-14 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("det_minus_one: exact special cases") {
  CHECK(det_minus_one(Tensor2<double>::zero()) == 0.0);
  for (const double g : {1e-12, -0.25, 0.5, 3.0})
    CHECK(det_minus_one(diag(g, 0, 0)) == g);
}

TEST_CASE("det_minus_one beats det-then-subtract in single precision") {
  Rng rng(102);
  double worst_stable = 0, best_naive = 1e30;
  for (int it = 0; it < 100; ++it) {
    Tensor2<double> g = test::random_tensor(rng, 1e-8);
    Tensor2<float> gf;
    for (int i = 0; i < 9; ++i) gf.a[i] = static_cast<float>(g.a[i]);
    // extended-precision oracle of det(I+G) - 1 from the float inputs
    long double oracle = 0;
    {
      Tensor2<double> gd;
      for (int i = 0; i < 9; ++i) gd.a[i] = gf.a[i];
      const long double t = gd(0, 0) + gd(1, 1) + gd(2, 2);
      const long double m =
          (static_cast<long double>(gd(0, 0)) * gd(1, 1) -
           static_cast<long double>(gd(0, 1)) * gd(1, 0)) +
          (static_cast<long double>(gd(0, 0)) * gd(2, 2) -
           static_cast<long double>(gd(0, 2)) * gd(2, 0)) +
          (static_cast<long double>(gd(1, 1)) * gd(2, 2) -
           static_cast<long double>(gd(1, 2)) * gd(2, 1));
      oracle = t + m + static_cast<long double>(test::det_permutation_oracle(gd));
    }
    const float stable = det_minus_one(gf);
    Tensor2<float> f = gf;
    f(0, 0) += 1.0f;
    f(1, 1) += 1.0f;
    f(2, 2) += 1.0f;
    const float naive = determinant(f) - 1.0f;
    const double es = std::abs(double(stable) - double(oracle)) /
                      std::abs(double(oracle));
    const double en = std::abs(double(naive) - double(oracle)) /
                      std::abs(double(oracle));
    worst_stable = std::max(worst_stable, es);
    best_naive = std::min(best_naive, en);
  }
  // The trace of G may itself cancel by a couple of orders of magnitude,
  // so the single-precision floor sits near 100 eps_f, not eps_f.
  CHECK(worst_stable <= 2e-5);
  CHECK(best_naive >= 1e-2);  // catastrophic cancellation
}

TEST_CASE("det_minus_one + 1 = determinant to 4 ulp") {
  Rng rng(103);
  for (int it = 0; it < 500; ++it) {
    const Tensor2<double> g = test::random_tensor(rng, 1.0);
    Tensor2<double> f = g;
    f(0, 0) += 1;
    f(1, 1) += 1;
    f(2, 2) += 1;
    const double a = det_minus_one(g) + 1.0;
    const double b = determinant(f);
    const double ulp = std::ldexp(1.0, std::ilogb(std::max(
                                            {std::abs(a), std::abs(b),
                                             1e-300})) - 52);
    CHECK(std::abs(a - b) <= 4 * ulp + 4e-16);
  }
}

TEST_CASE("inverse: exact diagonals and residual check") {
  const Tensor2<double> i3 = Tensor2<double>::identity();
  const Tensor2<double> inv_i = inverse(i3);
  for (int k = 0; k < 9; ++k) CHECK(inv_i.a[k] == i3.a[k]);
  const Tensor2<double> d = inverse(diag(2, 4, 5));
  CHECK(d(0, 0) == 0.5);
  CHECK(d(1, 1) == 0.25);
  CHECK(d(2, 2) == 0.2);

  Rng rng(104);
  for (int it = 0; it < 100; ++it) {
    Tensor2<double> a = test::random_tensor(rng);
    a(0, 0) += 3;
    a(1, 1) += 3;
    a(2, 2) += 3;  // keep it well conditioned
    const Tensor2<double> r = matmul(a, inverse(a)) - i3;
    CHECK(max_abs(r) <= 1e-13);
  }
}

TEST_CASE("inverse throws on singular input") {
  Tensor2<double> a;  // zero matrix
  CHECK_THROWS_AS(inverse(a), SingularTensor);
}

TEST_CASE("inverse_C_stable equals inverse of C") {
  CHECK(max_abs(inverse_C_stable(Tensor2<double>::identity()) -
                SymTensor2<double>::identity()) == 0.0);
  const SymTensor2<double> d = inverse_C_stable(diag(0.5, 1, 1));
  CHECK(d(0, 0) == 0.25);
  CHECK(d(1, 1) == 1.0);

  Rng rng(105);
  for (int it = 0; it < 100; ++it) {
    const Tensor2<double> g = test::random_admissible_gradient(rng, 0.3);
    Tensor2<double> f = g;
    f(0, 0) += 1;
    f(1, 1) += 1;
    f(2, 2) += 1;
    const SymTensor2<double> via_finv = inverse_C_stable(inverse(f));
    const SymTensor2<double> c = to_sym(matmul(transpose(f), f));
    const SymTensor2<double> direct = sym_part(inverse(to_tensor(c)));
    double scale = std::max(max_abs(direct), 1.0);
    CHECK(max_abs(via_finv - direct) / scale <= 1e-12);
    // inverse_C_stable(F^-1) * (F^T F) = I
    const Tensor2<double> prod = matmul(via_finv, to_tensor(c));
    CHECK(max_abs(prod - Tensor2<double>::identity()) <= 1e-10);
  }
}

TEST_CASE("green_lagrange_stable: closed forms and oracle") {
  CHECK(max_abs(green_lagrange_stable(Tensor2<double>::zero())) == 0.0);
  const double g = 0.37;
  const SymTensor2<double> e = green_lagrange_stable(diag(g, 0, 0));
  CHECK(e(0, 0) == doctest::Approx(g + 0.5 * g * g).epsilon(1e-15));
  CHECK(e(1, 1) == 0.0);

  Rng rng(106);
  for (int it = 0; it < 100; ++it) {
    const Tensor2<double> gg = test::random_tensor(rng, 0.8);
    Tensor2<double> f = gg;
    f(0, 0) += 1;
    f(1, 1) += 1;
    f(2, 2) += 1;
    SymTensor2<double> direct = to_sym(matmul(transpose(f), f));
    direct.s[0] -= 1;
    direct.s[1] -= 1;
    direct.s[2] -= 1;
    direct = 0.5 * direct;
    CHECK(max_abs(green_lagrange_stable(gg) - direct) /
              std::max(1.0, max_abs(direct)) <=
          1e-12);
  }
}

TEST_CASE("green_lagrange_stable keeps accuracy in single precision") {
  Rng rng(107);
  double worst_stable = 0, worst_naive = 0;
  for (int it = 0; it < 50; ++it) {
    const Tensor2<double> g64 = test::random_tensor(rng, 1e-7);
    Tensor2<float> g32;
    for (int i = 0; i < 9; ++i) g32.a[i] = static_cast<float>(g64.a[i]);
    Tensor2<double> gswap;  // double copy of the float inputs
    for (int i = 0; i < 9; ++i) gswap.a[i] = g32.a[i];
    const SymTensor2<double> ref = green_lagrange_stable(gswap);
    const SymTensor2<float> stable32 = green_lagrange_stable(g32);
    // naive: E = (F^T F - I)/2 in float, cancellation hits the diagonal
    Tensor2<float> f = g32;
    f(0, 0) += 1;
    f(1, 1) += 1;
    f(2, 2) += 1;
    SymTensor2<float> naive = to_sym(matmul(transpose(f), f));
    naive.s[0] -= 1;
    naive.s[1] -= 1;
    naive.s[2] -= 1;
    naive = 0.5f * naive;
    for (int i = 0; i < 6; ++i) {
      const double denom = std::max(std::abs(ref.s[i]), 1e-30);
      worst_stable =
          std::max(worst_stable, std::abs(ref.s[i] - stable32.s[i]) / denom);
    }
    for (int i = 0; i < 3; ++i) {  // diagonal entries only
      const double denom = std::max(std::abs(ref.s[i]), 1e-30);
      worst_naive =
          std::max(worst_naive, std::abs(ref.s[i] - naive.s[i]) / denom);
    }
  }
  CHECK(worst_stable <= 1e-5);
  CHECK(worst_naive >= 1e-1);  // O(1) relative error from cancellation
}

TEST_CASE("green_euler_stable equals (F F^T - I)/2") {
  CHECK(max_abs(green_euler_stable(Tensor2<double>::zero())) == 0.0);
  Rng rng(108);
  for (int it = 0; it < 100; ++it) {
    const Tensor2<double> g = test::random_tensor(rng, 0.8);
    Tensor2<double> f = g;
    f(0, 0) += 1;
    f(1, 1) += 1;
    f(2, 2) += 1;
    SymTensor2<double> direct = to_sym(matmul(f, transpose(f)));
    direct.s[0] -= 1;
    direct.s[1] -= 1;
    direct.s[2] -= 1;
    direct = 0.5 * direct;
    CHECK(max_abs(green_euler_stable(g) - direct) /
              std::max(1.0, max_abs(direct)) <=
          1e-12);
  }
  // symmetric G: same trace as the Lagrange tensor of G^T
  Rng rng2(109);
  Tensor2<double> gs = test::random_tensor(rng2, 0.5);
  gs = 0.5 * (gs + transpose(gs));
  CHECK(trace(green_euler_stable(gs)) ==
        doctest::Approx(trace(green_lagrange_stable(transpose(gs))))
            .epsilon(1e-14));
}

TEST_CASE("sym round trip is exact") {
  Rng rng(110);
  for (int it = 0; it < 50; ++it) {
    const SymTensor2<double> s = test::random_sym(rng);
    const SymTensor2<double> back = to_sym(to_tensor(s));
    for (int i = 0; i < 6; ++i) CHECK(back.s[i] == s.s[i]);
  }
}

TEST_CASE("double_contract and push_forward") {
  CHECK(double_contract(SymTensor2<double>::identity(),
                        SymTensor2<double>::identity()) == 3.0);
  Rng rng(111);
  const SymTensor2<double> h = test::random_sym(rng);
  CHECK(max_abs(push_forward(Tensor2<double>::identity(), h) - h) == 0.0);

  // push_forward(F, M ox M) = (F M) ox (F M)
  for (int it = 0; it < 50; ++it) {
    const Tensor2<double> f = test::random_tensor(rng);
    Vec3d m{{{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}}};
    const double n = std::sqrt(dot(m, m));
    for (int i = 0; i < 3; ++i) m[i] /= n;
    const SymTensor2<double> lhs = push_forward(f, outer_sym(m));
    const Vec3d fm = matvec(f, m);
    const SymTensor2<double> rhs = outer_sym(fm);
    CHECK(max_abs(lhs - rhs) <= 1e-13 * std::max(1.0, max_abs(rhs)));
  }
}

TEST_CASE("batched evaluation equals per-lane scalar evaluation bitwise") {
  constexpr int W = 4;
  using B = Batch<double, W>;
  Rng rng(112);
  Tensor2<double> lanes[W];
  for (auto& t : lanes) t = test::random_admissible_gradient(rng, 0.4);
  const Tensor2<B> gb = broadcast_tensor<W>(lanes);

  const B det_b = determinant(gb);
  const B dm1_b = det_minus_one(gb);
  const SymTensor2<B> e_b = green_lagrange_stable(gb);
  const SymTensor2<B> bt_b = green_euler_stable(gb);
  Tensor2<B> fb = gb;
  fb(0, 0) += B(1.0);
  fb(1, 1) += B(1.0);
  fb(2, 2) += B(1.0);
  const Tensor2<B> finv_b = inverse(fb);
  const SymTensor2<B> cinv_b = inverse_C_stable(finv_b);

  for (int l = 0; l < W; ++l) {
    const Tensor2<double>& g = lanes[l];
    CHECK(det_b.lane[l] == determinant(g));
    CHECK(dm1_b.lane[l] == det_minus_one(g));
    const SymTensor2<double> e = green_lagrange_stable(g);
    const SymTensor2<double> bt = green_euler_stable(g);
    Tensor2<double> f = g;
    f(0, 0) += 1;
    f(1, 1) += 1;
    f(2, 2) += 1;
    const Tensor2<double> finv = inverse(f);
    const SymTensor2<double> cinv = inverse_C_stable(finv);
    for (int i = 0; i < 6; ++i) {
      CHECK(e_b.s[i].lane[l] == e.s[i]);
      CHECK(bt_b.s[i].lane[l] == bt.s[i]);
      CHECK(cinv_b.s[i].lane[l] == cinv.s[i]);
    }
    for (int i = 0; i < 9; ++i) CHECK(finv_b.a[i].lane[l] == finv.a[i]);
  }
}
