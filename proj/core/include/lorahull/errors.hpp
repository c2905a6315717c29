// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace lorahull {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid shapes, schemas, weights or arguments. CLI exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

// File, parse and serialization failures. CLI exit code 2.
class IoError : public Error {
public:
    using Error::Error;
};

// Iterative solvers exceeding their budget and similar. CLI exit code 3.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace lorahull
