// Copyright 2026 The qnd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qnd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Operands have incompatible dimensions.
class DimensionError : public Error {
   public:
    using Error::Error;
};

/// An argument violates a documented precondition (non-Hermitian input,
/// unnormalized state, malformed partition, ...).
class PreconditionError : public Error {
   public:
    using Error::Error;
};

/// The requested closed form does not apply to the given model.
class RegimeError : public Error {
   public:
    using Error::Error;
};

/// Numerical failure: overflow, blow-up, vanishing norm.
class NumericalError : public Error {
   public:
    using Error::Error;
};

/// The observed outcome has (numerically) zero likelihood, so no posterior exists.
class ZeroLikelihoodError : public Error {
   public:
    using Error::Error;
};

/// Conditioning on a projector that does not commute with the event.
class NondemolitionError : public Error {
   public:
    using Error::Error;
};

/// An instrument's completeness defect exceeds its tolerance.
class CompletenessError : public Error {
   public:
    CompletenessError(const std::string &what, double defect) : Error(what), defect_(defect) {}
    double defect() const noexcept { return defect_; }

   private:
    double defect_;
};

/// Malformed input files or configuration.
class ParseError : public Error {
   public:
    using Error::Error;
};

}  // namespace qnd
