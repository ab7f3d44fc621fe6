// Copyright 2026-present the vwsearch project
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

namespace vws {

// Root of every error the library throws. Callers that only need to
// distinguish "bad input" from "bad environment" can catch this.
class Error : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
    using Error::Error;
};

// Wrong magic, unsupported version or otherwise unparseable bytes.
class FormatError : public Error {
 public:
    using Error::Error;
};

class TruncationError : public FormatError {
 public:
    using FormatError::FormatError;
};

// Argument or payload violates a documented precondition/invariant.
class ValidationError : public Error {
 public:
    using Error::Error;
};

// A model (PCA, codebook) cannot be fitted on the supplied sample.
class FitError : public Error {
 public:
    using Error::Error;
};

class ConflictError : public Error {
 public:
    using Error::Error;
};

// Referenced data (assignment map, localization) is missing.
class DataError : public Error {
 public:
    using Error::Error;
};

}  // namespace vws
