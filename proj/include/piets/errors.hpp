// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exception hierarchy shared by every module. Each error carries a short
// kind tag so the CLI can print a stable, greppable prefix.

#pragma once

#include <stdexcept>
#include <string>

namespace piets {

class Error : public std::runtime_error {
 public:
  Error(const char* kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  const char* kind() const noexcept { return kind_; }

 private:
  const char* kind_;
};

/// Incompatible tensor or matrix shapes.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error("dimension", what) {}
};

/// Input outside an operation's domain (empty, too short, zero variance...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

/// Caller violated an API contract (non-scalar loss, missing gradient...).
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error("contract", what) {}
};

/// Malformed input file (CSV, manifest, tensor container).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error("parse", what) {}
};

/// Interior gap in a source's timestamps.
class GapError : public Error {
 public:
  explicit GapError(const std::string& what) : Error("gap", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what) : Error("divergence", what) {}
};

}  // namespace piets
