#pragma once

#include <stdexcept>
#include <string>

namespace svx {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// h(t) stays positive up to the bracket limit; the ray never meets the manifold.
class NoNehariRoot : public Error {
public:
  using Error::Error;
};

class CollapsedToZero : public Error {
public:
  using Error::Error;
};

class LinearSolveFailure : public Error {
public:
  using Error::Error;
};

class EmptyCore : public Error {
public:
  using Error::Error;
};

} // namespace svx
