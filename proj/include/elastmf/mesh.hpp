// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0
//
// Structured hexahedral meshes on a (deformed) cube, tensor-product
// Lagrange spaces on Gauss-Lobatto nodes with Gauss quadrature, continuous
// vector-valued DoF numbering, Dirichlet masks, and lattice-to-lattice
// transfer operators for p- and h-coarsening.

#ifndef ELASTMF_MESH_HPP
#define ELASTMF_MESH_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "elastmf/errors.hpp"
#include "elastmf/sumfact.hpp"
#include "elastmf/tensor.hpp"

namespace emf {

/// Gauss-Legendre rule with n points on [-1, 1].
void gauss_legendre(int n, std::vector<double>& pts, std::vector<double>& wts);

/// Gauss-Lobatto points (n >= 2) on [-1, 1].
std::vector<double> gauss_lobatto(int n);

/// Lagrange basis value/derivative of node i of `nodes` at x.
double lagrange_value(const std::vector<double>& nodes, int i, double x);
double lagrange_derivative(const std::vector<double>& nodes, int i, double x);

/// 1D ingredients of the tensor-product space: Gauss-Lobatto nodal points,
/// (p+1)-point Gauss quadrature, and the basis value/derivative tables at
/// the quadrature points (plus transposes for the test-function sweeps).
struct Basis1D {
  int p = 1;
  std::vector<double> nodes;       // p+1 GLL points
  std::vector<double> qpts, qwts;  // p+1 Gauss points / weights
  std::vector<double> B, D;        // (p+1) x (p+1), row = quadrature point
  std::vector<double> Bt, Dt;      // transposes

  explicit Basis1D(int degree);
  int nn() const { return p + 1; }
  int nq() const { return p + 1; }
};

struct HexMesh {
  int n0 = 1;
  int level = 0;
  double extent = 1.0;

  int n() const { return n0 << level; }
  std::int64_t element_count() const {
    const std::int64_t m = n();
    return m * m * m;
  }
};

/// Uniform structured mesh of (n0 2^level)^3 hex elements.
HexMesh build_cube(int n0, int level, double extent = 1.0);

/// Smooth non-affine deformation applied to the generated cube; zero
/// amplitude keeps the axis-aligned grid. Positions are interpolated
/// through the degree-p nodal lattice, so the mapping is isoparametric.
struct DeformMap {
  double amplitude = 0.05;  // relative to the extent
  Vec3d operator()(const Vec3d& x, double extent) const;
};

class FeLevel {
public:
  FeLevel(const HexMesh& mesh, int degree, const DeformMap& map = {});

  const HexMesh& mesh() const { return mesh_; }
  int degree() const { return basis_.p; }
  const Basis1D& basis() const { return basis_; }

  int nodes_per_axis() const { return lattice_m_; }
  std::int64_t node_count() const {
    const std::int64_t m = lattice_m_;
    return m * m * m;
  }
  std::int64_t dof_count() const { return 3 * node_count(); }

  std::int64_t node_index(int a, int b, int c) const {
    return (static_cast<std::int64_t>(c) * lattice_m_ + b) * lattice_m_ + a;
  }
  std::int64_t element_index(int i, int j, int k) const {
    const std::int64_t n = mesh_.n();
    return (static_cast<std::int64_t>(k) * n + j) * n + i;
  }

  /// Deformed-cube material coordinates of the lattice nodes, 3 per node.
  const std::vector<double>& node_coords() const { return coords_; }

  /// Reference->material Jacobians at the (p+1)^3 Gauss points of every
  /// element, 9 doubles per point, element-major.
  const std::vector<double>& jacobians() const { return jac0_; }
  int n_qpoints_per_element() const {
    const int q = basis_.nq();
    return q * q * q;
  }

  // Dirichlet handling
  struct DirichletSpec {
    // faces: -x,+x,-y,+y,-z,+z
    std::array<bool, 6> faces{};
    std::function<Vec3d(const Vec3d&)> values;  // default zero
  };
  void set_dirichlet(const DirichletSpec& spec);
  const std::vector<std::uint8_t>& dirichlet_mask() const { return dmask_; }
  const std::vector<double>& dirichlet_values() const { return dvals_; }

  template <typename N>
  void dirichlet_set_zero(std::vector<N>& v) const {
    for (std::size_t i = 0; i < dmask_.size(); ++i)
      if (dmask_[i]) v[i] = N(0);
  }
  template <typename N>
  void dirichlet_set_values(std::vector<N>& v) const {
    for (std::size_t i = 0; i < dmask_.size(); ++i)
      if (dmask_[i]) v[i] = N(scalar_of<N>(dvals_[i]));
  }

  /// Gathers the (p+1)^3 lattice node indices of element (i,j,k) in
  /// lexicographic local order.
  void element_nodes(int i, int j, int k, std::int64_t* out) const;

private:
  HexMesh mesh_;
  Basis1D basis_;
  int lattice_m_;
  std::vector<double> coords_;
  std::vector<double> jac0_;
  std::vector<std::uint8_t> dmask_;
  std::vector<double> dvals_;
};

/// Interpolation from one 1D lattice (n_src elements of degree p_src) onto
/// the node set of another lattice over the same interval.
struct LatticeMap1D {
  int n_src = 1, p_src = 1, n_dst = 1, p_dst = 1;
  std::vector<int> src_elem;  // per destination node
  std::vector<double> w;      // (p_src+1) weights per destination node

  static LatticeMap1D build(int n_src, int p_src, int n_dst, int p_dst);
  int src_nodes() const { return n_src * p_src + 1; }
  int dst_nodes() const { return n_dst * p_dst + 1; }
};

/// Transfer between two nested levels that differ in degree (p-coarsening)
/// or by one uniform mesh refinement (h-coarsening). Prolongation is nodal
/// interpolation of the coarse function; restriction is its transpose with
/// the identical stencils; interpolate_down evaluates a fine function at
/// the coarse nodes (used to move linearization iterates down).
class TransferOp {
public:
  TransferOp(const FeLevel& fine, const FeLevel& coarse);

  template <typename N>
  void prolongate(const std::vector<N>& coarse, std::vector<N>& fine) const;
  template <typename N>
  void restrict_(const std::vector<N>& fine, std::vector<N>& coarse) const;
  template <typename N>
  void interpolate_down(const std::vector<N>& fine,
                        std::vector<N>& coarse) const;

  const FeLevel& fine() const { return *fine_; }
  const FeLevel& coarse() const { return *coarse_; }

private:
  const FeLevel* fine_;
  const FeLevel* coarse_;
  LatticeMap1D up_;    // coarse lattice -> fine lattice
  LatticeMap1D down_;  // fine lattice -> coarse lattice

  template <typename N>
  static void apply_axes(const LatticeMap1D& m, const FeLevel& src,
                         const FeLevel& dst, const std::vector<N>& in,
                         std::vector<N>& out, bool transpose);
};

// --- template implementations ---------------------------------------------

namespace detail {

/// Applies a LatticeMap1D along one axis of a 3D array (axis 0 fastest).
/// Forward: out[dst] = sum_w in[src]; transpose: out[src] += w in[dst].
template <typename N>
void lattice_sweep(const LatticeMap1D& m, bool transpose, int axis,
                   const N* in, int in_n0, int in_n1, int in_n2, N* out) {
  const int stencil = m.p_src + 1;
  const int nd = m.dst_nodes();
  auto src_base = [&](int d) { return m.src_elem[d] * m.p_src; };
  // sizes of the output array in the swept axis
  const int out_na = transpose ? m.src_nodes() : nd;
  const int n0 = axis == 0 ? out_na : in_n0;
  const int n1 = axis == 1 ? out_na : in_n1;
  const int n2 = axis == 2 ? out_na : in_n2;
  const std::size_t total = static_cast<std::size_t>(n0) * n1 * n2;
  for (std::size_t i = 0; i < total; ++i) out[i] = N(0);

  const int in_stride = axis == 0 ? 1 : (axis == 1 ? in_n0 : in_n0 * in_n1);
  const int out_stride = axis == 0 ? 1 : (axis == 1 ? n0 : n0 * n1);
  const int la = axis == 0 ? in_n1 : in_n0;  // loop extents over other axes
  const int lb = axis == 2 ? in_n1 : in_n2;
  auto lane_base_in = [&](int a, int b) -> std::size_t {
    if (axis == 0) return (static_cast<std::size_t>(b) * in_n1 + a) * in_n0;
    if (axis == 1) return static_cast<std::size_t>(b) * in_n0 * in_n1 + a;
    return static_cast<std::size_t>(b) * in_n0 + a;
  };
  auto lane_base_out = [&](int a, int b) -> std::size_t {
    if (axis == 0) return (static_cast<std::size_t>(b) * n1 + a) * n0;
    if (axis == 1) return static_cast<std::size_t>(b) * n0 * n1 + a;
    return static_cast<std::size_t>(b) * n0 + a;
  };
  for (int b = 0; b < lb; ++b)
    for (int a = 0; a < la; ++a) {
      const N* src = in + lane_base_in(a, b);
      N* dst = out + lane_base_out(a, b);
      if (!transpose) {
        for (int d = 0; d < nd; ++d) {
          N acc(0);
          const int base = src_base(d);
          for (int s = 0; s < stencil; ++s)
            acc += N(scalar_of<N>(m.w[d * stencil + s])) *
                   src[static_cast<std::size_t>(base + s) * in_stride];
          dst[static_cast<std::size_t>(d) * out_stride] = acc;
        }
      } else {
        for (int d = 0; d < nd; ++d) {
          const N v = src[static_cast<std::size_t>(d) * in_stride];
          const int base = src_base(d);
          for (int s = 0; s < stencil; ++s)
            dst[static_cast<std::size_t>(base + s) * out_stride] +=
                N(scalar_of<N>(m.w[d * stencil + s])) * v;
        }
      }
    }
}

}  // namespace detail

template <typename N>
void TransferOp::apply_axes(const LatticeMap1D& m, const FeLevel& src,
                            const FeLevel& dst, const std::vector<N>& in,
                            std::vector<N>& out, bool transpose) {
  const int ms = src.nodes_per_axis();
  const int md = dst.nodes_per_axis();
  if (in.size() != static_cast<std::size_t>(src.dof_count()))
    throw SizeMismatch("transfer: input size does not match level");
  out.assign(dst.dof_count(), N(0));
  std::vector<N> buf_in(static_cast<std::size_t>(ms) * ms * ms);
  const std::size_t mx = static_cast<std::size_t>(std::max(ms, md));
  std::vector<N> buf_a(mx * mx * mx), buf_b(mx * mx * mx);
  for (int comp = 0; comp < 3; ++comp) {
    for (std::size_t i = 0; i < buf_in.size(); ++i)
      buf_in[i] = in[3 * i + comp];
    // axis 0: (ms,ms,ms) -> (md,ms,ms); axis 1 -> (md,md,ms); axis 2 full
    detail::lattice_sweep(m, transpose, 0, buf_in.data(), ms, ms, ms,
                          buf_a.data());
    detail::lattice_sweep(m, transpose, 1, buf_a.data(), md, ms, ms,
                          buf_b.data());
    detail::lattice_sweep(m, transpose, 2, buf_b.data(), md, md, ms,
                          buf_a.data());
    for (std::size_t i = 0;
         i < static_cast<std::size_t>(dst.node_count()); ++i)
      out[3 * i + comp] = buf_a[i];
  }
}

template <typename N>
void TransferOp::prolongate(const std::vector<N>& coarse,
                            std::vector<N>& fine) const {
  apply_axes(up_, *coarse_, *fine_, coarse, fine, false);
}

template <typename N>
void TransferOp::restrict_(const std::vector<N>& fine,
                           std::vector<N>& coarse) const {
  apply_axes(up_, *fine_, *coarse_, fine, coarse, true);
}

template <typename N>
void TransferOp::interpolate_down(const std::vector<N>& fine,
                                  std::vector<N>& coarse) const {
  apply_axes(down_, *fine_, *coarse_, fine, coarse, false);
}

}  // namespace emf

#endif
