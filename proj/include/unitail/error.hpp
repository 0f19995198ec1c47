// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef UNITAIL_ERROR_HPP_
#define UNITAIL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace unitail {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Polygon or quad has too few vertices, zero area, or collinear corners.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

// A numeric argument is outside its documented domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A point expected strictly inside a quad lies on or outside its boundary.
class ExteriorPointError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents or buffers.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Inconsistent inputs (mixed image ids, dimension mismatches, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace unitail

#endif  // UNITAIL_ERROR_HPP_
