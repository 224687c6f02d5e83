#pragma once

#include <stdexcept>
#include <string>

namespace asdsm {

// All library errors derive from Error so callers can catch broadly.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mesh construction: fine and coarse interior counts don't satisfy
// (N_fine + 1) = n * (N_coarse + 1) on some axis.
struct DivisibilityError : Error {
  using Error::Error;
};

// Mesh construction: a refinement factor of 1, i.e. fine == coarse on some
// axis, which leaves no holes and makes the splitting meaningless.
struct DegenerateError : Error {
  using Error::Error;
};

struct IndexOutOfRange : Error {
  using Error::Error;
};

// Projector request where the target is not a sub-mesh (or the holes set)
// of the source.
struct NotASubmesh : Error {
  using Error::Error;
};

// Operation applied to a mesh kind it is not defined for.
struct InvalidKind : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct SingularMatrix : Error {
  using Error::Error;
};

// fill_holes input has nonzero values on hole positions.
struct SkeletonNotHollow : Error {
  using Error::Error;
};

// Error-mode initial guess: an anisotropic solve returned (numerically) zero,
// nothing to normalize.
struct ZeroNormSolution : Error {
  using Error::Error;
};

struct UnknownExample : Error {
  using Error::Error;
};

struct NoExactSolution : Error {
  using Error::Error;
};

}  // namespace asdsm
