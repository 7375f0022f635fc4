// Copyright 2026 The CDST Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace cdst {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or layer shapes do not compose.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value, unknown key or uncovered policy range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied data violates a precondition (label out of range, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// API misuse such as consuming a tape twice.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// An internal invariant was violated; the run must be aborted.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Malformed dataset file.
class IngestError : public Error {
 public:
  using Error::Error;
};

/// A metric was requested from an incomplete accuracy matrix.
class MetricError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cdst
