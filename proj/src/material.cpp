// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0

#include "elastmf/material.hpp"

#include <cmath>

#include "elastmf/fastscalar.hpp"

namespace emf {

const char* to_string(ModelKind m) {
  switch (m) {
    case ModelKind::cnh: return "cNH";
    case ModelKind::inh: return "iNH";
    case ModelKind::fiber: return "fiber";
  }
  return "?";
}
const char* to_string(Stability s) {
  return s == Stability::standard ? "standard" : "stable";
}
const char* to_string(Domain d) {
  return d == Domain::material ? "material" : "spatial";
}
const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::none: return "none";
    case Strategy::scalar: return "scalar";
    case Strategy::tensor: return "tensor";
  }
  return "?";
}

void MaterialParams::validate(ModelKind model) const {
  if (mu <= 0) throw DomainError("MaterialParams: mu must be positive");
  if (model != ModelKind::cnh && kappa_b <= 0)
    throw DomainError("MaterialParams: kappa_b must be positive");
  if (model == ModelKind::fiber) {
    if (k2 <= 0) throw DomainError("MaterialParams: k2 must be positive");
    const double tol = 1e-12;
    if (std::abs(dot(e1, e1) - 1) > tol || std::abs(dot(e2, e2) - 1) > tol ||
        std::abs(dot(e3, e3) - 1) > tol || std::abs(dot(e1, e2)) > tol ||
        std::abs(dot(e1, e3)) > tol || std::abs(dot(e2, e3)) > tol)
      throw DomainError("MaterialParams: frame {e1,e2,e3} not orthonormal");
  }
}

StructureTensors build_structure_tensors(const MaterialParams& p) {
  if (p.a <= 0 || p.b <= 0)
    throw DomainError("build_structure_tensors: a and b must be positive");

  StructureTensors st;
  st.h33 = 1.0 / (4.0 * p.b) -
           std::exp(-2.0 * p.b) /
               (std::sqrt(2.0 * 3.14159265358979323846 * p.b) *
                erf_approx(std::sqrt(2.0 * p.b)));
  const double ratio = bessel_ratio(p.a);
  st.h11 = 0.5 * (1.0 - st.h33) * (1.0 + ratio);
  st.h22 = 0.5 * (1.0 - st.h33) * (1.0 - ratio);

  const double c = std::cos(p.phi), s = std::sin(p.phi);
  // family 4: +phi in the (e1, e2) plane; family 6: -phi
  const Vec3d m1p = c * p.e1 + s * p.e2;
  const Vec3d m2p = Vec3d{{{-s * p.e1[0], -s * p.e1[1], -s * p.e1[2]}}} +
                    c * p.e2;
  const Vec3d m1m = c * p.e1 + (-s) * p.e2;
  const Vec3d m2m = s * p.e1 + c * p.e2;

  auto assemble = [&](const Vec3d& m1, const Vec3d& m2) {
    SymTensor2<double> h = st.h11 * outer_sym(m1);
    h += st.h22 * outer_sym(m2);
    h += st.h33 * outer_sym(p.e3);
    return h;
  };
  st.m1_4 = m1p;
  st.m1_6 = m1m;
  st.h4 = assemble(m1p, m2p);
  st.h6 = assemble(m1m, m2m);
  return st;
}

}  // namespace emf
