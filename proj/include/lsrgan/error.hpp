// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace lsrgan {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not satisfy an operation's contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation (log of 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// NaN or infinity produced or supplied where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Input for which a geometric quantity is undefined (zero-norm direction, ...).
class DegenerateInputError : public Error {
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

}  // namespace lsrgan
