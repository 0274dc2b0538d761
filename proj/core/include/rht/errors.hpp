#ifndef RHT_ERRORS_HPP
#define RHT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rht {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mismatched alphabets, shapes, or probability tables outside the
// construction tolerance.
struct StructuralError : Error {
  using Error::Error;
};

// Renyi order outside the domain of an operation or family.
struct OrderError : Error {
  using Error::Error;
};

// A support condition required for a finite value does not hold.
struct SupportError : Error {
  using Error::Error;
};

// Type enumeration (or another combinatorial object) exceeds its cap.
struct CapacityError : Error {
  using Error::Error;
};

// Degenerate input for a limit statement, e.g. zero likelihood-ratio
// variance in the second-order regime.
struct DegenerateError : Error {
  using Error::Error;
};

// Problem specification (CLI input document) failed validation.
struct SpecError : Error {
  using Error::Error;
};

}  // namespace rht

#endif
