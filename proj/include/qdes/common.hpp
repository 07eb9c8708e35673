// Shared aliases, limits and error types for the qdes library.
//
// Conventions used throughout:
//   - qubit 0 is the least significant bit of the basis-state index
//   - kets are dense complex amplitude vectors of length 2^n
//   - non-unitary operators are applied as dense matrices; no implicit
//     renormalization ever happens behind the caller's back

#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdes {

using cdouble = std::complex<double>;

// Dense products in the multiplier pipeline act on up to 3N+4 qubits; the
// cap keeps every statevector under ~1 GB.
inline constexpr int kMaxQubits = 14;

inline constexpr double kUnitaryTol = 1e-12;

// Bad problem/configuration input (wrong qubit counts, invalid presets, ...).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// API misuse (mismatched registers, colliding indices, ...).
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure (zero-probability projection, diverged training, ...).
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::size_t pow2(int n) { return std::size_t{1} << n; }

}  // namespace qdes
