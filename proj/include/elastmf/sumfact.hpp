// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0
//
// Dimension-by-dimension tensor contractions on lattice-shaped data. One
// sweep contracts a 1D matrix against one axis of a 3D array; values and
// gradients at quadrature points come out of chains of sweeps, which is
// what keeps the per-element cost at O(p^(d+1)).

#ifndef ELASTMF_SUMFACT_HPP
#define ELASTMF_SUMFACT_HPP

#include <cstddef>

namespace emf {

/// out[r, j, k] = sum_c M[r, c] in[c, j, k] along the chosen axis of an
/// (n0, n1, n2) array stored with axis 0 fastest. M is rows x cols,
/// row-major, in double regardless of the field type.
template <typename N>
inline void sweep_axis0(const double* M, int rows, int cols, const N* in,
                        int n1, int n2, N* out) {
  for (int k = 0; k < n2; ++k)
    for (int j = 0; j < n1; ++j) {
      const N* src = in + (static_cast<std::size_t>(k) * n1 + j) * cols;
      N* dst = out + (static_cast<std::size_t>(k) * n1 + j) * rows;
      for (int r = 0; r < rows; ++r) {
        N acc = N(M[r * cols]) * src[0];
        for (int c = 1; c < cols; ++c) acc += N(M[r * cols + c]) * src[c];
        dst[r] = acc;
      }
    }
}

template <typename N>
inline void sweep_axis1(const double* M, int rows, int cols, const N* in,
                        int n0, int n2, N* out) {
  for (int k = 0; k < n2; ++k) {
    const N* src = in + static_cast<std::size_t>(k) * n0 * cols;
    N* dst = out + static_cast<std::size_t>(k) * n0 * rows;
    for (int r = 0; r < rows; ++r)
      for (int i = 0; i < n0; ++i) {
        N acc = N(M[r * cols]) * src[i];
        for (int c = 1; c < cols; ++c)
          acc += N(M[r * cols + c]) * src[c * n0 + i];
        dst[r * n0 + i] = acc;
      }
  }
}

template <typename N>
inline void sweep_axis2(const double* M, int rows, int cols, const N* in,
                        int n0, int n1, N* out) {
  const std::size_t plane = static_cast<std::size_t>(n0) * n1;
  for (int r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < plane; ++i) {
      N acc = N(M[r * cols]) * in[i];
      for (int c = 1; c < cols; ++c) acc += N(M[r * cols + c]) * in[c * plane + i];
      out[r * plane + i] = acc;
    }
}

/// Evaluates the three reference-space gradient components of a scalar
/// lattice field at all quadrature points. B and D are (nq x nn) value and
/// derivative matrices of the 1D basis at the 1D quadrature points.
/// work must hold 2 * max(nn,nq)^3 entries; g0/g1/g2 hold nq^3 each.
template <typename N>
inline void gradient_at_qpoints(const double* B, const double* D, int nn,
                                int nq, const N* nodal, N* work, N* g0, N* g1,
                                N* g2) {
  N* t1 = work;
  N* t2 = work + static_cast<std::size_t>(nq > nn ? nq : nn) *
                     (nq > nn ? nq : nn) * (nq > nn ? nq : nn);
  // d/dxi0: D B B
  sweep_axis0(D, nq, nn, nodal, nn, nn, t1);
  sweep_axis1(B, nq, nn, t1, nq, nn, t2);
  sweep_axis2(B, nq, nn, t2, nq, nq, g0);
  // d/dxi1: B D B
  sweep_axis0(B, nq, nn, nodal, nn, nn, t1);
  sweep_axis1(D, nq, nn, t1, nq, nn, t2);
  sweep_axis2(B, nq, nn, t2, nq, nq, g1);
  // d/dxi2: B B D
  sweep_axis1(B, nq, nn, t1, nq, nn, t2);
  sweep_axis2(D, nq, nn, t2, nq, nq, g2);
}

/// Transpose counterpart: accumulates integrand components (already
/// weighted) against the gradients of the test functions, adding the
/// result onto the nodal array.
template <typename N>
inline void scatter_gradient_to_nodes(const double* Bt, const double* Dt,
                                      int nn, int nq, const N* g0, const N* g1,
                                      const N* g2, N* work, N* nodal) {
  N* t1 = work;
  N* t2 = work + static_cast<std::size_t>(nq > nn ? nq : nn) *
                     (nq > nn ? nq : nn) * (nq > nn ? nq : nn);
  // Bt/Dt are nn x nq (transposes of B/D).
  sweep_axis0(Dt, nn, nq, g0, nq, nq, t1);
  sweep_axis1(Bt, nn, nq, t1, nn, nq, t2);
  sweep_axis2(Bt, nn, nq, t2, nn, nn, t1);
  for (int i = 0; i < nn * nn * nn; ++i) nodal[i] += t1[i];
  sweep_axis0(Bt, nn, nq, g1, nq, nq, t1);
  sweep_axis1(Dt, nn, nq, t1, nn, nq, t2);
  sweep_axis2(Bt, nn, nq, t2, nn, nn, t1);
  for (int i = 0; i < nn * nn * nn; ++i) nodal[i] += t1[i];
  sweep_axis0(Bt, nn, nq, g2, nq, nq, t1);
  sweep_axis1(Bt, nn, nq, t1, nn, nq, t2);
  sweep_axis2(Dt, nn, nq, t2, nn, nn, t1);
  for (int i = 0; i < nn * nn * nn; ++i) nodal[i] += t1[i];
}

}  // namespace emf

#endif
