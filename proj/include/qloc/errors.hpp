#pragma once

#include <stdexcept>
#include <string>

namespace qloc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error { using Error::Error; };
class ConfigMismatch : public Error { using Error::Error; };
class OverlapError : public Error { using Error::Error; };
class NotAState : public Error { using Error::Error; };
class UnsupportedAssembly : public Error { using Error::Error; };
class DegenerateModification : public Error { using Error::Error; };
class NotHermitian : public Error { using Error::Error; };
class NotRepresentable : public Error { using Error::Error; };
class NotPrimary : public Error { using Error::Error; };
class WeightError : public Error { using Error::Error; };
class NonIntegrable : public Error { using Error::Error; };

/// Malformed user input (region literals, JSON, Pauli strings, configs).
class InputError : public Error { using Error::Error; };

}  // namespace qloc
