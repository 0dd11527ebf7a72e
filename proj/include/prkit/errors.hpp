#pragma once

#include <stdexcept>
#include <string>

namespace prkit {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs that must share a resolution do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A mask or region that must select at least one pixel is empty.
class EmptySelectionError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A sprite placement does not overlap its background.
class PlacementError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Raised by diffusion filling when a hole has no known pixel on its rim.
class NoBoundaryError : public Error {
 public:
  using Error::Error;
};

class RestorerError : public Error {
 public:
  using Error::Error;
};

}  // namespace prkit
