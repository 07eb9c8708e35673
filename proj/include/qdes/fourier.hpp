// Fourier (phase feature map) basis toolbox. Basis functions are
// tau_j(x) = exp(i 2 pi j x / 2^S) where S is the frequency scale in qubits.
// Base encodings have S = register width N; the product basis keeps S = N on
// N+1 qubits so that products of the base functions stay inside the span.

#pragma once

#include <cmath>

#include "qdes/circuit.hpp"
#include "qdes/linalg.hpp"

namespace qdes {

// Hadamard layer followed by per-qubit phase gates diag(1, exp(i pi x 2^{j-S}))
// with 1-based qubit index j (zero-based qubit q contributes 2 pi 2^q x / 2^S).
inline Circuit phase_feature_map(int num_qubits, int scale_qubits, double x) {
    Circuit c(num_qubits);
    for (int q = 0; q < num_qubits; ++q) c.add(Gate::h(q));
    for (int q = 0; q < num_qubits; ++q) {
        const double a = M_PI * x * std::pow(2.0, (q + 1) - scale_qubits);
        c.add(Gate::phase(q, a));
    }
    return c;
}

inline Statevector fourier_state_closed(int num_qubits, int scale_qubits, double x) {
    const std::size_t m = pow2(num_qubits);
    const double pref = std::pow(2.0, -num_qubits / 2.0);
    std::vector<cdouble> amps(m);
    for (std::size_t j = 0; j < m; ++j)
        amps[j] = pref * std::polar(1.0, 2.0 * M_PI * static_cast<double>(j) * x /
                                             static_cast<double>(pow2(scale_qubits)));
    Statevector s;
    s.num_qubits = num_qubits;
    s.amps = std::move(amps);
    s.is_normalized = true;
    return s;
}

// Built by replaying the feature-map circuit (the closed form above is the
// contract it is tested against).
inline Statevector fourier_state(int N, double x) {
    return replay(phase_feature_map(N, N, x), zero_state(N)).state;
}

// Diagonal derivative generator: entry j is i 2 pi j / 2^S, i.e. the
// logarithmic derivative of tau_j.
inline Matrix fourier_generator(int num_qubits, int scale_qubits) {
    const std::size_t m = pow2(num_qubits);
    Matrix g(m, m);
    for (std::size_t j = 0; j < m; ++j)
        g(j, j) = cdouble{0.0, 2.0 * M_PI * static_cast<double>(j) /
                                   static_cast<double>(pow2(scale_qubits))};
    return g;
}

inline Matrix fourier_generator(int N) { return fourier_generator(N, N); }

// DFT matrix; column k is the Fourier encoding state at the integer node k.
// Matches qft_circuit(N) as a unitary.
inline Matrix fourier_transform(int N) {
    const std::size_t m = pow2(N);
    const double pref = std::pow(2.0, -N / 2.0);
    Matrix u(m, m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k)
            u(j, k) = pref * std::polar(1.0, 2.0 * M_PI * static_cast<double>(j) *
                                                 static_cast<double>(k) / static_cast<double>(m));
    return u;
}

}  // namespace qdes
