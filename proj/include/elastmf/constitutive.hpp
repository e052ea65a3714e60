// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0
//
// The three material models (compressible / nearly incompressible
// neo-Hookean and the dispersed two-family fiber model): strain energy,
// second Piola-Kirchhoff and Kirchhoff stresses, directional derivatives in
// material and spatial form, and the per-quadrature-point cache used by the
// storage strategies. Every routine exists in a standard and a stable
// variant; the stable one works from the displacement gradient directly
// (J-1, ln(1+x) series, strain tensors without C - I) to avoid cancellation
// in the small-strain regime.

#ifndef ELASTMF_CONSTITUTIVE_HPP
#define ELASTMF_CONSTITUTIVE_HPP

#include <vector>

#include "elastmf/fastscalar.hpp"
#include "elastmf/material.hpp"
#include "elastmf/tensor.hpp"

namespace emf {

// --- strain state -----------------------------------------------------

/// Kinematic quantities derived from one displacement gradient.
template <typename N>
struct StrainData {
  Stability stability = Stability::stable;
  Tensor2<N> G, F, Finv;
  SymTensor2<N> E, bt, Cinv;  // Green-Lagrange, Green-Euler, C^-1
  SymTensor2<N> C;            // standard path only (F^T F)
  N jm1{}, jac{}, i1{};       // J-1, J, tr(C)
};

template <typename N>
inline void check_positive_jacobian(const N& jm1) {
  if (!(min_lane(jm1) > scalar_of<N>(-1)))
    throw NonPositiveJacobian("det(F) <= 0");
}

template <typename N>
inline StrainData<N> make_strain(const Tensor2<N>& g, Stability stability) {
  StrainData<N> s;
  s.stability = stability;
  s.G = g;
  s.F = Tensor2<N>::identity() + g;
  if (stability == Stability::stable) {
    s.jm1 = det_minus_one(g);
    check_positive_jacobian(s.jm1);
    s.jac = N(1) + s.jm1;
    s.E = green_lagrange_stable(g);
    s.bt = green_euler_stable(g);
    s.Finv = inverse(s.F);
    s.Cinv = inverse_C_stable(s.Finv);
    s.i1 = N(3) + N(2) * trace(s.E);
  } else {
    s.jac = determinant(s.F);
    s.jm1 = s.jac - N(1);
    check_positive_jacobian(s.jm1);
    const Tensor2<N> ft = transpose(s.F);
    s.C = to_sym(matmul(ft, s.F));
    const N half(0.5);
    s.E = half * (s.C - SymTensor2<N>::identity());
    s.bt = half * (to_sym(matmul(s.F, ft)) - SymTensor2<N>::identity());
    s.Finv = inverse(s.F);
    s.Cinv = sym_part(inverse(to_tensor(s.C)));
    s.i1 = trace(s.C);
  }
  return s;
}

// --- per-point linearization data --------------------------------------

/// Everything a tangent application may pull from storage: the cached
/// scalars c1-c3 and invariants plus the second-order tensors of the
/// active (model, domain) cell.
template <typename N>
struct QpCache {
  ModelKind model = ModelKind::cnh;
  Domain domain = Domain::material;
  Strategy strategy = Strategy::none;
  Stability stability = Stability::stable;

  N jm1{}, jac{}, lnj{}, jp{}, c1{}, c2{};
  N c3[2] = {}, istar[2] = {}, efib[2] = {};

  Tensor2<N> F, Finv;          // material cell
  SymTensor2<N> S, Cinv;       // material cell
  SymTensor2<N> tau, b;        // spatial cell (b = F F^T)
  SymTensor2<N> fh[2];         // spatial fiber cell: F H_i F^T
};

namespace detail {

template <typename N>
inline N ln_of(const StrainData<N>& s, const KernelConfig& cfg) {
  return s.stability == Stability::stable ? ln_plus_one(s.jm1, cfg)
                                          : log_number(s.jac);
}

/// kappa_b/2 (J^2 - 1): the stable route uses J-1 (J-1 + 2).
template <typename N>
inline N half_kappa_j2m1(const StrainData<N>& s, double kappa_b) {
  const N half_k(scalar_of<N>(0.5 * kappa_b));
  if (s.stability == Stability::stable)
    return half_k * (s.jm1 * (s.jm1 + N(2)));
  return half_k * (s.jac * s.jac - N(1));
}

template <typename N>
struct FiberInvariants {
  N istar[2], efib[2], c3[2];
};

template <typename N>
inline FiberInvariants<N> fiber_invariants(const StrainData<N>& s,
                                           const MaterialParams& p,
                                           const StructureTensors& st,
                                           const KernelConfig& cfg) {
  FiberInvariants<N> f;
  const SymTensor2<double>* h[2] = {&st.h4, &st.h6};
  const Vec3d* m[2] = {&st.m1_4, &st.m1_6};
  for (int i = 0; i < 2; ++i) {
    SymTensor2<N> hn;
    for (int k = 0; k < 6; ++k) hn.s[k] = N(scalar_of<N>(h[i]->s[k]));
    SymTensor2<N> mm;
    {
      Vec3<N> mv;
      for (int k = 0; k < 3; ++k) mv[k] = N(scalar_of<N>((*m[i])[k]));
      mm = outer_sym(mv);
    }
    N gate;  // positive exactly when I* > 1, but cancellation-free
    if (s.stability == Stability::stable) {
      f.efib[i] = N(2) * double_contract(hn, s.E);
      gate = N(2) * double_contract(mm, s.E);  // I* - 1 directly
      f.istar[i] = N(1) + gate;
    } else {
      f.efib[i] = double_contract(hn, s.C) - trace(hn);
      f.istar[i] = double_contract(mm, s.C);
      gate = f.istar[i] - N(1);
    }
    const N z = N(scalar_of<N>(p.k2)) * f.efib[i] * f.efib[i];
    const N active = fast_exp(z, cfg) * N(scalar_of<N>(2.0 * p.k1));
    f.c3[i] = select(gate > N(0), active, N(0));
  }
  return f;
}

template <typename N>
inline SymTensor2<N> structure_tensor_as(const StructureTensors& st, int i) {
  const SymTensor2<double>& h = i == 0 ? st.h4 : st.h6;
  SymTensor2<N> r;
  for (int k = 0; k < 6; ++k) r.s[k] = N(scalar_of<N>(h.s[k]));
  return r;
}

}  // namespace detail

// --- energy -------------------------------------------------------------

template <typename N>
N energy(ModelKind model, const MaterialParams& p, const StructureTensors& st,
         const Tensor2<N>& g, Formulation form, const KernelConfig& cfg = {}) {
  const StrainData<N> s = make_strain(g, form.stability);
  const N lnj = detail::ln_of(s, cfg);
  const N mu(scalar_of<N>(p.mu));
  if (model == ModelKind::cnh) {
    const N lam(scalar_of<N>(p.lambda));
    return N(0.5) * mu * ((s.i1 - N(3)) - N(2) * lnj) + lam * lnj * lnj;
  }
  const N jp = jpow(s.jm1, cfg);
  const N quarter_k(scalar_of<N>(0.25 * p.kappa_b));
  N psi = N(0.5) * mu * (jp * s.i1 - N(3)) +
          quarter_k * ((s.stability == Stability::stable
                            ? s.jm1 * (s.jm1 + N(2))
                            : s.jac * s.jac - N(1)) -
                       N(2) * lnj);
  if (model == ModelKind::fiber) {
    const auto f = detail::fiber_invariants(s, p, st, cfg);
    const N c(scalar_of<N>(0.5 * p.k1 / p.k2));
    for (int i = 0; i < 2; ++i) {
      const N z = N(scalar_of<N>(p.k2)) * f.efib[i] * f.efib[i];
      const N em1 = cfg.exp_mode == ExpMode::exact ? expm1_number(z)
                                                   : fast_exp(z, cfg) - N(1);
      psi += select(f.istar[i] > N(1), c * em1, N(0));
    }
  }
  return psi;
}

// --- stresses -----------------------------------------------------------

namespace detail {

/// S for cNH/iNH from an assembled strain state (fiber term added on top).
template <typename N>
inline SymTensor2<N> second_pk_base(ModelKind model, const MaterialParams& p,
                                    const StrainData<N>& s, const N& lnj,
                                    const N& jp) {
  const N mu(scalar_of<N>(p.mu));
  if (model == ModelKind::cnh) {
    const N lam(scalar_of<N>(p.lambda));
    if (s.stability == Stability::stable) {
      // S = C^-1 (2 mu E + 2 lambda ln(J) I)
      SymTensor2<N> inner = (N(2) * mu) * s.E;
      const N v = N(2) * lam * lnj;
      inner.s[0] += v;
      inner.s[1] += v;
      inner.s[2] += v;
      return sym_part(matmul(s.Cinv, to_tensor(inner)));
    }
    SymTensor2<N> r = (-(mu - N(2) * lam * lnj)) * s.Cinv;
    r.s[0] += mu;
    r.s[1] += mu;
    r.s[2] += mu;
    return r;
  }
  if (s.stability == Stability::stable) {
    // S = C^-1 [ kappa/2 J-1 (J-1+2) I + 2 mu J^(-2/3) (E - tr(E)/3 I) ]
    const N vol = half_kappa_j2m1(s, p.kappa_b);
    const N tre3 = trace(s.E) * (N(1) / N(3));
    SymTensor2<N> inner = (N(2) * mu * jp) * s.E;
    const N dev = N(2) * mu * jp * tre3;
    inner.s[0] += vol - dev;
    inner.s[1] += vol - dev;
    inner.s[2] += vol - dev;
    return sym_part(matmul(s.Cinv, to_tensor(inner)));
  }
  const N c1 = half_kappa_j2m1(s, p.kappa_b) - (mu / N(3)) * jp * s.i1;
  SymTensor2<N> r = c1 * s.Cinv;
  const N v = mu * jp;
  r.s[0] += v;
  r.s[1] += v;
  r.s[2] += v;
  return r;
}

template <typename N>
inline SymTensor2<N> kirchhoff_base(ModelKind model, const MaterialParams& p,
                                    const StrainData<N>& s, const N& lnj,
                                    const N& jp) {
  const N mu(scalar_of<N>(p.mu));
  if (model == ModelKind::cnh) {
    const N lam(scalar_of<N>(p.lambda));
    if (s.stability == Stability::stable) {
      SymTensor2<N> r = (N(2) * mu) * s.bt;
      const N v = N(2) * lam * lnj;
      r.s[0] += v;
      r.s[1] += v;
      r.s[2] += v;
      return r;
    }
    // tau = mu b - (mu - 2 lambda ln J) I, b = I + 2 bt
    SymTensor2<N> b = N(2) * s.bt;
    b.s[0] += N(1);
    b.s[1] += N(1);
    b.s[2] += N(1);
    SymTensor2<N> r = mu * b;
    const N v = mu - N(2) * lam * lnj;
    r.s[0] -= v;
    r.s[1] -= v;
    r.s[2] -= v;
    return r;
  }
  if (s.stability == Stability::stable) {
    const N vol = half_kappa_j2m1(s, p.kappa_b);
    const N trb3 = trace(s.bt) * (N(1) / N(3));
    SymTensor2<N> r = (N(2) * mu * jp) * s.bt;
    const N v = vol - N(2) * mu * jp * trb3;
    r.s[0] += v;
    r.s[1] += v;
    r.s[2] += v;
    return r;
  }
  const N c1 = half_kappa_j2m1(s, p.kappa_b) - (mu / N(3)) * jp * s.i1;
  SymTensor2<N> b = N(2) * s.bt;
  b.s[0] += N(1);
  b.s[1] += N(1);
  b.s[2] += N(1);
  SymTensor2<N> r = (mu * jp) * b;
  r.s[0] += c1;
  r.s[1] += c1;
  r.s[2] += c1;
  return r;
}

}  // namespace detail

template <typename N>
SymTensor2<N> second_pk(ModelKind model, const MaterialParams& p,
                        const StructureTensors& st, const Tensor2<N>& g,
                        Formulation form, const KernelConfig& cfg = {}) {
  const StrainData<N> s = make_strain(g, form.stability);
  const N lnj = detail::ln_of(s, cfg);
  const N jp = model == ModelKind::cnh ? N(1) : jpow(s.jm1, cfg);
  SymTensor2<N> r = detail::second_pk_base(model, p, s, lnj, jp);
  if (model == ModelKind::fiber) {
    const auto f = detail::fiber_invariants(s, p, st, cfg);
    for (int i = 0; i < 2; ++i)
      r += (f.c3[i] * f.efib[i]) * detail::structure_tensor_as<N>(st, i);
  }
  return r;
}

template <typename N>
SymTensor2<N> kirchhoff(ModelKind model, const MaterialParams& p,
                        const StructureTensors& st, const Tensor2<N>& g,
                        Formulation form, const KernelConfig& cfg = {}) {
  const StrainData<N> s = make_strain(g, form.stability);
  const N lnj = detail::ln_of(s, cfg);
  const N jp = model == ModelKind::cnh ? N(1) : jpow(s.jm1, cfg);
  SymTensor2<N> r = detail::kirchhoff_base(model, p, s, lnj, jp);
  if (model == ModelKind::fiber) {
    const auto f = detail::fiber_invariants(s, p, st, cfg);
    for (int i = 0; i < 2; ++i)
      r += (f.c3[i] * f.efib[i]) *
           push_forward(s.F, detail::structure_tensor_as<N>(st, i));
  }
  return r;
}

// --- cache --------------------------------------------------------------

template <typename N>
QpCache<N> compute_cache(ModelKind model, const MaterialParams& p,
                         const StructureTensors& st, const Tensor2<N>& g,
                         Strategy strategy, Domain domain,
                         const KernelConfig& cfg = {},
                         Stability stability = Stability::stable) {
  const StrainData<N> s = make_strain(g, stability);
  QpCache<N> c;
  c.model = model;
  c.domain = domain;
  c.strategy = strategy;
  c.stability = stability;
  c.jm1 = s.jm1;
  c.jac = s.jac;
  c.lnj = detail::ln_of(s, cfg);
  c.jp = model == ModelKind::cnh ? N(1) : jpow(s.jm1, cfg);
  const N mu(scalar_of<N>(p.mu));
  if (model != ModelKind::cnh) {
    c.c1 = detail::half_kappa_j2m1(s, p.kappa_b) - (mu / N(3)) * c.jp * s.i1;
    c.c2 = (N(2) * mu / N(9)) * c.jp * s.i1 +
           N(scalar_of<N>(p.kappa_b)) * s.jac * s.jac;
  }
  if (model == ModelKind::fiber) {
    const auto f = detail::fiber_invariants(s, p, st, cfg);
    for (int i = 0; i < 2; ++i) {
      c.c3[i] = f.c3[i];
      c.istar[i] = f.istar[i];
      c.efib[i] = f.efib[i];
    }
  }
  c.F = s.F;
  c.Finv = s.Finv;
  c.Cinv = s.Cinv;
  if (domain == Domain::material) {
    c.S = detail::second_pk_base(model, p, s, c.lnj, c.jp);
    if (model == ModelKind::fiber)
      for (int i = 0; i < 2; ++i)
        c.S += (c.c3[i] * c.efib[i]) * detail::structure_tensor_as<N>(st, i);
  } else {
    c.b = N(2) * s.bt;
    c.b.s[0] += N(1);
    c.b.s[1] += N(1);
    c.b.s[2] += N(1);
    c.tau = detail::kirchhoff_base(model, p, s, c.lnj, c.jp);
    if (model == ModelKind::fiber)
      for (int i = 0; i < 2; ++i) {
        c.fh[i] = push_forward(s.F, detail::structure_tensor_as<N>(st, i));
        c.tau += (c.c3[i] * c.efib[i]) * c.fh[i];
      }
  }
  return c;
}

// --- directional derivatives ---------------------------------------------

/// D_u S in direction Grad(du) = dg, pulled from the cache.
template <typename N>
SymTensor2<N> tangent_material(const MaterialParams& p,
                               const StructureTensors& st,
                               const QpCache<N>& c, const Tensor2<N>& dg) {
  if (c.domain != Domain::material)
    throw CacheMismatch("tangent_material: cache built for spatial domain");
  const N mu(scalar_of<N>(p.mu));
  const Tensor2<N> a = matmul(c.Finv, dg);
  const N w = trace(a);  // (1/J) D_u J
  const SymTensor2<N> sym_acinv = sym_part(matmul(a, c.Cinv));
  SymTensor2<N> r;
  if (c.model == ModelKind::cnh) {
    const N lam(scalar_of<N>(p.lambda));
    r = (N(2) * (mu - N(2) * lam * c.lnj)) * sym_acinv;
    r += (N(2) * lam * w) * c.Cinv;
    return r;
  }
  const N q = double_contract(c.F, dg);  // tr(F^T Grad du)
  const N two_thirds_mu_jp = (N(2) * mu / N(3)) * c.jp;
  r = (N(-2) * c.c1) * sym_acinv;
  r += (c.c2 * w - two_thirds_mu_jp * q) * c.Cinv;
  const N diag = -two_thirds_mu_jp * w;
  r.s[0] += diag;
  r.s[1] += diag;
  r.s[2] += diag;
  if (c.model == ModelKind::fiber) {
    const N k2(scalar_of<N>(p.k2));
    const SymTensor2<N> dC_half = sym_part(matmul(transpose(c.F), dg));
    for (int i = 0; i < 2; ++i) {
      const SymTensor2<N> h = detail::structure_tensor_as<N>(st, i);
      const N hdc = N(2) * double_contract(h, dC_half);  // H : D_u C
      const N coef =
          c.c3[i] * (N(2) * k2 * c.efib[i] * c.efib[i] + N(1)) * hdc;
      r += coef * h;
    }
  }
  return r;
}

/// Full spatial tangent integrand J c : (grad du)^S + (grad du) tau,
/// evaluated without materializing the fourth-order tensor. The geometric
/// term makes the result nonsymmetric in general.
template <typename N>
Tensor2<N> tangent_spatial(const MaterialParams& p, const StructureTensors& st,
                           const QpCache<N>& c, const Tensor2<N>& dgrad) {
  if (c.domain != Domain::spatial)
    throw CacheMismatch("tangent_spatial: cache built for material domain");
  const N mu(scalar_of<N>(p.mu));
  const SymTensor2<N> xs = sym_part(dgrad);
  const N trx = trace(dgrad);
  SymTensor2<N> jc;
  if (c.model == ModelKind::cnh) {
    const N lam(scalar_of<N>(p.lambda));
    jc = (N(2) * (mu - N(2) * lam * c.lnj)) * xs;
    const N v = N(2) * lam * trx;
    jc.s[0] += v;
    jc.s[1] += v;
    jc.s[2] += v;
  } else {
    // -(2 mu/3) J^(-2/3) [tr(x) b + (b:x) I] + c2 tr(x) I - 2 c1 x^S
    const N bx = double_contract(c.b, xs);
    const N two_thirds_mu_jp = (N(2) * mu / N(3)) * c.jp;
    jc = (-two_thirds_mu_jp * trx) * c.b;
    jc += (N(-2) * c.c1) * xs;
    const N v = c.c2 * trx - two_thirds_mu_jp * bx;
    jc.s[0] += v;
    jc.s[1] += v;
    jc.s[2] += v;
    if (c.model == ModelKind::fiber) {
      const N k2(scalar_of<N>(p.k2));
      for (int i = 0; i < 2; ++i) {
        const N fhx = double_contract(c.fh[i], xs);
        const N coef = N(2) * c.c3[i] *
                       (N(2) * k2 * c.efib[i] * c.efib[i] + N(1)) * fhx;
        jc += coef * c.fh[i];
      }
    }
  }
  return to_tensor(jc) + matmul(dgrad, c.tau);
}

// Convenience wrappers that build the cache on the fly (strategy "none").

template <typename N>
SymTensor2<N> tangent_material(ModelKind model, const MaterialParams& p,
                               const StructureTensors& st, const Tensor2<N>& g,
                               const Tensor2<N>& dg, Formulation form,
                               const KernelConfig& cfg = {}) {
  const QpCache<N> c = compute_cache(model, p, st, g, Strategy::none,
                                     Domain::material, cfg, form.stability);
  return tangent_material(p, st, c, dg);
}

template <typename N>
Tensor2<N> tangent_spatial(ModelKind model, const MaterialParams& p,
                           const StructureTensors& st, const Tensor2<N>& g,
                           const Tensor2<N>& dgrad, Formulation form,
                           const KernelConfig& cfg = {}) {
  const QpCache<N> c = compute_cache(model, p, st, g, Strategy::none,
                                     Domain::spatial, cfg, form.stability);
  return tangent_spatial(p, st, c, dgrad);
}

// --- byte accounting ------------------------------------------------------

struct LedgerField {
  const char* name;
  int bytes;
  bool in_traffic;  // loaded during linearized operator application
};

/// Analytic per-quadrature-point accounting for one (model, domain,
/// strategy) cell: 8 B per double, 24 B per vector, 48 B per symmetric
/// tensor, 72 B per general tensor.
struct CellLedger {
  std::vector<LedgerField> fields;
  int storage_bytes() const {
    int s = 0;
    for (const auto& f : fields) s += f.bytes;
    return s;
  }
  int traffic_bytes() const {
    int s = 0;
    for (const auto& f : fields)
      if (f.in_traffic) s += f.bytes;
    return s;
  }
};

CellLedger cell_ledger(ModelKind model, Domain domain, Strategy strategy);

}  // namespace emf

#endif
