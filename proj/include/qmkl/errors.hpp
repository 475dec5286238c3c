// Copyright 2026 The QMKL Authors
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

namespace qmkl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand dimensions do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Result would exceed the configured qubit budget.
class CapacityError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

/// Argument outside its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// KernelSpec or experiment configuration is inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input file; the message names the offending row and column.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Training labels contain a single class.
class DegenerateLabelsError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace qmkl
