// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0

#ifndef ELASTMF_ERRORS_HPP
#define ELASTMF_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emf {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DomainError : public Error {
public:
  using Error::Error;
};

class SingularTensor : public Error {
public:
  using Error::Error;
};

/// det(F) <= 0 (or a degenerate mapping Jacobian) at some quadrature point.
class NonPositiveJacobian : public Error {
public:
  NonPositiveJacobian(const std::string& what, std::ptrdiff_t element = -1,
                      int qpoint = -1)
    : Error(what), element(element), qpoint(qpoint) {}
  std::ptrdiff_t element;
  int qpoint;
};

class DegenerateMapping : public Error {
public:
  using Error::Error;
};

class CacheMismatch : public Error {
public:
  using Error::Error;
};

class StaleCache : public Error {
public:
  using Error::Error;
};

class SizeMismatch : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class TooLarge : public Error {
public:
  using Error::Error;
};

class LinearSolveFailure : public Error {
public:
  using Error::Error;
};

class MaxIterationsExceeded : public Error {
public:
  using Error::Error;
};

class SingularCoarseMatrix : public Error {
public:
  using Error::Error;
};

class CgNoConvergence : public Error {
public:
  using Error::Error;
};

}  // namespace emf

#endif
