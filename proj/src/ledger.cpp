// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0

#include "elastmf/constitutive.hpp"

namespace emf {

namespace {

constexpr int kScalar = 8;
constexpr int kVector = 24;
constexpr int kSym = 48;
constexpr int kGeneral = 72;

void add(CellLedger& l, const char* name, int bytes, bool traffic) {
  l.fields.push_back({name, bytes, traffic});
}

}  // namespace

CellLedger cell_ledger(ModelKind model, Domain domain, Strategy strategy) {
  CellLedger l;
  const bool material = domain == Domain::material;
  const bool tensors = strategy == Strategy::tensor;

  // Mapping Jacobians. J0 drops out of spatial tangent traffic once the
  // spatial tensors are stored; Jt exists only for spatial integration.
  add(l, "J0", kGeneral, material || !tensors);
  if (!material) add(l, "Jt", kGeneral, true);

  if (strategy == Strategy::none) {
    // Nothing precomputed beyond the mandatory mapping data and iterate.
    add(l, "u_k", kVector, true);
    return l;
  }

  if (!tensors) add(l, "u_k", kVector, true);
  if (!material) add(l, "1/J", kScalar, true);

  if (model == ModelKind::cnh) {
    add(l, "lnJ", kScalar, true);
  } else {
    add(l, "J-1", kScalar, material ? false : !tensors);
    add(l, "J^-2/3", kScalar, true);
    add(l, "c1", kScalar, true);
    add(l, "c2", kScalar, true);
  }
  if (model == ModelKind::fiber) {
    add(l, "c3_4", kScalar, true);
    add(l, "c3_6", kScalar, true);
    add(l, "I4*", kScalar, material ? false : !tensors);
    add(l, "I6*", kScalar, material ? false : !tensors);
    add(l, "E4", kScalar, true);
    add(l, "E6", kScalar, true);
    add(l, "H4", kSym, material ? true : !tensors);
    add(l, "H6", kSym, material ? true : !tensors);
  }

  if (tensors) {
    if (material) {
      add(l, "F", kGeneral, true);
      add(l, "S", kSym, true);
      add(l, "F^-1", kGeneral, true);
      add(l, "C^-1", kSym, true);
    } else {
      add(l, "tau", kSym, true);
      if (model != ModelKind::cnh) add(l, "b", kSym, true);
      if (model == ModelKind::fiber) {
        add(l, "FH4F^T", kSym, true);
        add(l, "FH6F^T", kSym, true);
      }
    }
  }
  return l;
}

}  // namespace emf
