// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0
//
// Small dense tensor algebra for d=3, generic over the scalar type (plain
// float/double or a lane batch). Contractions and determinants use a fixed,
// documented summation order so that results are reproducible across
// precisions and between batched and unbatched evaluation.

#ifndef ELASTMF_TENSOR_HPP
#define ELASTMF_TENSOR_HPP

#include <array>
#include <cmath>

#include "elastmf/errors.hpp"
#include "elastmf/numbers.hpp"

namespace emf {

template <typename N>
struct Vec3 {
  std::array<N, 3> v{};

  N& operator[](int i) { return v[i]; }
  const N& operator[](int i) const { return v[i]; }

  friend Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {{{a[0] + b[0], a[1] + b[1], a[2] + b[2]}}};
  }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {{{a[0] - b[0], a[1] - b[1], a[2] - b[2]}}};
  }
  friend Vec3 operator*(const N& s, const Vec3& a) {
    return {{{s * a[0], s * a[1], s * a[2]}}};
  }
};

template <typename N>
inline N dot(const Vec3<N>& a, const Vec3<N>& b) {
  return (a[0] * b[0] + a[1] * b[1]) + a[2] * b[2];
}

template <typename N>
inline Vec3<N> cross(const Vec3<N>& a, const Vec3<N>& b) {
  return {{{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0]}}};
}

using Vec3d = Vec3<double>;

/// General 3x3 second-order tensor, row-major.
template <typename N>
struct Tensor2 {
  std::array<N, 9> a{};

  N& operator()(int i, int j) { return a[3 * i + j]; }
  const N& operator()(int i, int j) const { return a[3 * i + j]; }

  static Tensor2 zero() { return Tensor2{}; }
  static Tensor2 identity() {
    Tensor2 t;
    t(0, 0) = N(1);
    t(1, 1) = N(1);
    t(2, 2) = N(1);
    return t;
  }

  friend Tensor2 operator+(const Tensor2& x, const Tensor2& y) {
    Tensor2 r;
    for (int i = 0; i < 9; ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
  }
  friend Tensor2 operator-(const Tensor2& x, const Tensor2& y) {
    Tensor2 r;
    for (int i = 0; i < 9; ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
  }
  friend Tensor2 operator*(const N& s, const Tensor2& x) {
    Tensor2 r;
    for (int i = 0; i < 9; ++i) r.a[i] = s * x.a[i];
    return r;
  }
  Tensor2& operator+=(const Tensor2& y) {
    for (int i = 0; i < 9; ++i) a[i] += y.a[i];
    return *this;
  }
};

/// Symmetric 3x3 tensor, unique entries stored as (11, 22, 33, 12, 13, 23).
/// Storage carries no weighting; the factor 2 on off-diagonal terms appears
/// only inside double_contract.
template <typename N>
struct SymTensor2 {
  std::array<N, 6> s{};

  static constexpr int index(int i, int j) {
    // (0,0)->0 (1,1)->1 (2,2)->2 (0,1)->3 (0,2)->4 (1,2)->5
    return (i == j) ? i : 2 + i + j;
  }
  N& operator()(int i, int j) { return s[index(i, j)]; }
  const N& operator()(int i, int j) const { return s[index(i, j)]; }

  static SymTensor2 zero() { return SymTensor2{}; }
  static SymTensor2 identity() {
    SymTensor2 t;
    t.s[0] = N(1);
    t.s[1] = N(1);
    t.s[2] = N(1);
    return t;
  }

  friend SymTensor2 operator+(const SymTensor2& x, const SymTensor2& y) {
    SymTensor2 r;
    for (int i = 0; i < 6; ++i) r.s[i] = x.s[i] + y.s[i];
    return r;
  }
  friend SymTensor2 operator-(const SymTensor2& x, const SymTensor2& y) {
    SymTensor2 r;
    for (int i = 0; i < 6; ++i) r.s[i] = x.s[i] - y.s[i];
    return r;
  }
  friend SymTensor2 operator*(const N& c, const SymTensor2& x) {
    SymTensor2 r;
    for (int i = 0; i < 6; ++i) r.s[i] = c * x.s[i];
    return r;
  }
  SymTensor2& operator+=(const SymTensor2& y) {
    for (int i = 0; i < 6; ++i) s[i] += y.s[i];
    return *this;
  }
};

template <typename N>
inline Tensor2<N> to_tensor(const SymTensor2<N>& x) {
  Tensor2<N> t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = x(i, j);
  return t;
}

/// Exact extraction for sources that are already symmetric (upper triangle).
template <typename N>
inline SymTensor2<N> to_sym(const Tensor2<N>& t) {
  SymTensor2<N> x;
  x.s[0] = t(0, 0);
  x.s[1] = t(1, 1);
  x.s[2] = t(2, 2);
  x.s[3] = t(0, 1);
  x.s[4] = t(0, 2);
  x.s[5] = t(1, 2);
  return x;
}

template <typename N>
inline SymTensor2<N> sym_part(const Tensor2<N>& t) {
  SymTensor2<N> x;
  const N half(0.5);
  x.s[0] = t(0, 0);
  x.s[1] = t(1, 1);
  x.s[2] = t(2, 2);
  x.s[3] = half * (t(0, 1) + t(1, 0));
  x.s[4] = half * (t(0, 2) + t(2, 0));
  x.s[5] = half * (t(1, 2) + t(2, 1));
  return x;
}

template <typename N>
inline Tensor2<N> transpose(const Tensor2<N>& t) {
  Tensor2<N> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = t(j, i);
  return r;
}

template <typename N>
inline N trace(const Tensor2<N>& t) {
  return (t(0, 0) + t(1, 1)) + t(2, 2);
}
template <typename N>
inline N trace(const SymTensor2<N>& x) {
  return (x.s[0] + x.s[1]) + x.s[2];
}

/// Determinant by cofactor expansion along the first row. The operation
/// order is fixed: cof0 - cof1 + cof2 with each cofactor evaluated as
/// a*b - c*d left to right.
template <typename N>
inline N determinant(const Tensor2<N>& t) {
  const N c0 = t(0, 0) * (t(1, 1) * t(2, 2) - t(1, 2) * t(2, 1));
  const N c1 = t(0, 1) * (t(1, 0) * t(2, 2) - t(1, 2) * t(2, 0));
  const N c2 = t(0, 2) * (t(1, 0) * t(2, 1) - t(1, 1) * t(2, 0));
  return (c0 - c1) + c2;
}

/// det(I + G) - 1 evaluated from the entries of G without forming det(I+G):
/// tr(G) + (sum of the three principal 2x2 minors of G) + det(G), summed
/// smallest order first (cubic + quadratic, then linear).
template <typename N>
inline N det_minus_one(const Tensor2<N>& g) {
  const N tr = (g(0, 0) + g(1, 1)) + g(2, 2);
  const N m01 = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
  const N m02 = g(0, 0) * g(2, 2) - g(0, 2) * g(2, 0);
  const N m12 = g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1);
  const N minors = (m01 + m02) + m12;
  const N det = determinant(g);
  return (det + minors) + tr;
}

/// Adjugate-over-determinant inverse. Throws SingularTensor when any lane's
/// determinant magnitude falls below the floor.
template <typename N>
inline Tensor2<N> inverse(const Tensor2<N>& t,
                          scalar_of<N> det_floor =
                              sizeof(scalar_of<N>) == 8 ? 1e-300 : 1e-30) {
  const N det = determinant(t);
  if (min_abs_lane(det) < det_floor)
    throw SingularTensor("inverse: determinant magnitude below floor");
  const N inv_det = N(1) / det;
  Tensor2<N> r;
  r(0, 0) = (t(1, 1) * t(2, 2) - t(1, 2) * t(2, 1)) * inv_det;
  r(0, 1) = (t(0, 2) * t(2, 1) - t(0, 1) * t(2, 2)) * inv_det;
  r(0, 2) = (t(0, 1) * t(1, 2) - t(0, 2) * t(1, 1)) * inv_det;
  r(1, 0) = (t(1, 2) * t(2, 0) - t(1, 0) * t(2, 2)) * inv_det;
  r(1, 1) = (t(0, 0) * t(2, 2) - t(0, 2) * t(2, 0)) * inv_det;
  r(1, 2) = (t(0, 2) * t(1, 0) - t(0, 0) * t(1, 2)) * inv_det;
  r(2, 0) = (t(1, 0) * t(2, 1) - t(1, 1) * t(2, 0)) * inv_det;
  r(2, 1) = (t(0, 1) * t(2, 0) - t(0, 0) * t(2, 1)) * inv_det;
  r(2, 2) = (t(0, 0) * t(1, 1) - t(0, 1) * t(1, 0)) * inv_det;
  return r;
}

/// C^-1 = F^-1 F^-T from the already-inverted deformation gradient; C itself
/// is never inverted (cond(F) = sqrt(cond(C))). Symmetric by construction.
template <typename N>
inline SymTensor2<N> inverse_C_stable(const Tensor2<N>& f_inv) {
  SymTensor2<N> r;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j)
      r(i, j) = (f_inv(i, 0) * f_inv(j, 0) + f_inv(i, 1) * f_inv(j, 1)) +
                f_inv(i, 2) * f_inv(j, 2);
  return r;
}

/// Green-Lagrange strain E = (G + G^T + G^T G)/2 from the displacement
/// gradient; C - I is never formed.
template <typename N>
inline SymTensor2<N> green_lagrange_stable(const Tensor2<N>& g) {
  SymTensor2<N> r;
  const N half(0.5);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const N q = (g(0, i) * g(0, j) + g(1, i) * g(1, j)) + g(2, i) * g(2, j);
      r(i, j) = half * ((g(i, j) + g(j, i)) + q);
    }
  return r;
}

/// Green-Euler strain bt = (G + G^T + G G^T)/2; b = F F^T is never formed.
template <typename N>
inline SymTensor2<N> green_euler_stable(const Tensor2<N>& g) {
  SymTensor2<N> r;
  const N half(0.5);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const N q = (g(i, 0) * g(j, 0) + g(i, 1) * g(j, 1)) + g(i, 2) * g(j, 2);
      r(i, j) = half * ((g(i, j) + g(j, i)) + q);
    }
  return r;
}

/// A : B for symmetric tensors; off-diagonal entries count twice.
/// Order: (diagonal terms) + 2 * (off-diagonal terms).
template <typename N>
inline N double_contract(const SymTensor2<N>& x, const SymTensor2<N>& y) {
  const N diag = (x.s[0] * y.s[0] + x.s[1] * y.s[1]) + x.s[2] * y.s[2];
  const N off = (x.s[3] * y.s[3] + x.s[4] * y.s[4]) + x.s[5] * y.s[5];
  return diag + N(2) * off;
}

template <typename N>
inline N double_contract(const Tensor2<N>& x, const Tensor2<N>& y) {
  N r = x.a[0] * y.a[0];
  for (int i = 1; i < 9; ++i) r += x.a[i] * y.a[i];
  return r;
}

template <typename N>
inline Tensor2<N> matmul(const Tensor2<N>& x, const Tensor2<N>& y) {
  Tensor2<N> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = (x(i, 0) * y(0, j) + x(i, 1) * y(1, j)) + x(i, 2) * y(2, j);
  return r;
}

template <typename N>
inline Tensor2<N> matmul(const Tensor2<N>& x, const SymTensor2<N>& y) {
  Tensor2<N> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = (x(i, 0) * y(0, j) + x(i, 1) * y(1, j)) + x(i, 2) * y(2, j);
  return r;
}

template <typename N>
inline Tensor2<N> matmul(const SymTensor2<N>& x, const Tensor2<N>& y) {
  Tensor2<N> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r(i, j) = (x(i, 0) * y(0, j) + x(i, 1) * y(1, j)) + x(i, 2) * y(2, j);
  return r;
}

template <typename N>
inline Vec3<N> matvec(const Tensor2<N>& x, const Vec3<N>& v) {
  Vec3<N> r;
  for (int i = 0; i < 3; ++i)
    r[i] = (x(i, 0) * v[0] + x(i, 1) * v[1]) + x(i, 2) * v[2];
  return r;
}

template <typename N>
inline SymTensor2<N> outer_sym(const Vec3<N>& v) {
  SymTensor2<N> r;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) r(i, j) = v[i] * v[j];
  return r;
}

/// Push-forward F H F^T of a symmetric tensor, symmetric by construction.
template <typename N>
inline SymTensor2<N> push_forward(const Tensor2<N>& f,
                                  const SymTensor2<N>& h) {
  const Tensor2<N> fh = matmul(f, h);
  SymTensor2<N> r;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j)
      r(i, j) = (fh(i, 0) * f(j, 0) + fh(i, 1) * f(j, 1)) + fh(i, 2) * f(j, 2);
  return r;
}

template <typename N>
inline scalar_of<N> max_abs(const Tensor2<N>& t) {
  scalar_of<N> m = 0;
  for (int i = 0; i < 9; ++i) m = std::max(m, max_abs_lane(t.a[i]));
  return m;
}
template <typename N>
inline scalar_of<N> max_abs(const SymTensor2<N>& t) {
  scalar_of<N> m = 0;
  for (int i = 0; i < 6; ++i) m = std::max(m, max_abs_lane(t.s[i]));
  return m;
}

}  // namespace emf

#endif
