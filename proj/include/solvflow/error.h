//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_ERROR_H_
#define SOLVFLOW_ERROR_H_

#include <stdexcept>
#include <string>

namespace solvflow {

// Root of every exception thrown by the library. Callers that only need to
// distinguish "our" failures from std failures catch this.
class Error: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ShapeMismatch: public Error {
public:
  using Error::Error;
};

class WidthMismatch: public Error {
public:
  using Error::Error;
};

class ConfigMismatch: public Error {
public:
  using Error::Error;
};

}  // namespace solvflow

#endif  // SOLVFLOW_ERROR_H_
