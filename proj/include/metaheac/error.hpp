// Copyright 2026 The metaheac Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace metaheac {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform to a primitive.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A loss, gradient or prediction produced NaN or Inf.
class NonFiniteError : public Error {
 public:
  NonFiniteError(std::string tensor_name, const std::string& what)
      : Error(what), tensor_name_(std::move(tensor_name)) {}
  const std::string& tensor_name() const noexcept { return tensor_name_; }

 private:
  std::string tensor_name_;
};

// Data does not match the feature schema or a file is malformed.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or argument.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace metaheac
