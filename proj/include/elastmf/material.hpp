// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0

#ifndef ELASTMF_MATERIAL_HPP
#define ELASTMF_MATERIAL_HPP

#include <string>

#include "elastmf/errors.hpp"
#include "elastmf/tensor.hpp"

namespace emf {

enum class ModelKind { cnh, inh, fiber };

enum class Stability { standard, stable };
enum class Domain { material, spatial };

struct Formulation {
  Stability stability = Stability::stable;
  Domain domain = Domain::material;
};

enum class Strategy { none, scalar, tensor };

const char* to_string(ModelKind m);
const char* to_string(Stability s);
const char* to_string(Domain d);
const char* to_string(Strategy s);

/// Constitutive constants. Stress-like quantities (mu, lambda, kappa_b, k1)
/// share one unit (kPa in the shipped defaults); a, b, k2 are dimensionless,
/// phi is in radians. e1/e2/e3 span the local material frame
/// (circumferential, longitudinal, radial).
struct MaterialParams {
  double mu = 62.1;
  double lambda = 3042.9;   // cNH only; default from nu = 0.49
  double kappa_b = 3084.3;  // iNH/fiber penalty bulk modulus
  double k1 = 1.4;
  double k2 = 22.1;
  double a = 3.62;
  double b = 34.3;
  double phi = 27.47 * 3.14159265358979323846 / 180.0;
  Vec3d e1{{{1, 0, 0}}};
  Vec3d e2{{{0, 1, 0}}};
  Vec3d e3{{{0, 0, 1}}};

  void validate(ModelKind model) const;  // throws DomainError
};

/// Second-order fiber-dispersion moments for the two helical families,
/// plus the mean directions and the three nonzero frame components.
struct StructureTensors {
  SymTensor2<double> h4, h6;
  Vec3d m1_4, m1_6;
  double h11 = 0, h22 = 0, h33 = 0;
};

/// Builds H_i from the dispersion parameters (a, b) and the in-plane angle:
///   H33 = 1/(4b) - exp(-2b) / (sqrt(2 pi b) erf(sqrt(2b)))
///   H11 = (1 - H33)/2 (1 + I1(a)/I0(a)),  H22 = (1 - H33)/2 (1 - I1(a)/I0(a))
/// Family 4 has mean direction cos(phi) e1 + sin(phi) e2, family 6 the
/// mirrored -phi counterpart; both share e3 as the out-of-plane axis.
StructureTensors build_structure_tensors(const MaterialParams& params);

}  // namespace emf

#endif
