// Chebyshev basis toolbox: polynomials, nodes, the x-dependent state
// normalization, encoding states, exact derivative expansion rules, the
// derivative generator and the node-state transform.
//
// Amplitude convention for an N-qubit register (c_0 = sqrt(2), c_k = 1 else):
//   amp_k( N(x)|x> ) = T_k(x) / (2^{(N-1)/2} c_k)
// so a latent coefficient vector f decodes to
//   f(x) = sum_k f_k T_k(x) / (2^{(N-1)/2} c_k).

#pragma once

#include <cmath>
#include <span>

#include "qdes/linalg.hpp"
#include "qdes/statevector.hpp"

namespace qdes {

// T_k(x) = cos(k arccos x) on [-1, 1]; continued hyperbolically outside,
// T_k(x) = sign(x)^k cosh(k arccosh |x|) for |x| > 1.
inline double chebyshev_T(int k, double x) {
    if (x >= -1.0 && x <= 1.0) return std::cos(k * std::acos(x));
    const double body = std::cosh(k * std::acosh(std::abs(x)));
    return (x < 0.0 && (k & 1)) ? -body : body;
}

inline double chebyshev_c(std::size_t k) { return k == 0 ? std::sqrt(2.0) : 1.0; }

// Roots of T_{2^N}: x_j = cos[(2j+1) pi / 2^{N+1}], strictly decreasing in j.
inline std::vector<double> chebyshev_nodes(int N) {
    if (N < 1) throw config_error("chebyshev_nodes: N must be >= 1");
    const std::size_t m = pow2(N);
    std::vector<double> xs(m);
    for (std::size_t j = 0; j < m; ++j)
        xs[j] = std::cos((2.0 * j + 1.0) * M_PI / (2.0 * m));
    return xs;
}

// N_N(x) = 2^{-(N-1)/2} (1/2 + sum_{k>=1} T_k(x)^2)^{1/2}; equals 1 on the
// node grid and is x-dependent everywhere else.
inline double chebyshev_norm(int N, double x) {
    const std::size_t m = pow2(N);
    double acc = 0.5;
    for (std::size_t k = 1; k < m; ++k) {
        const double t = chebyshev_T(static_cast<int>(k), x);
        acc += t * t;
    }
    return std::sqrt(acc) / std::pow(2.0, (N - 1) / 2.0);
}

// Normalized encoding state |x>; amplitudes are real for real x.
inline Statevector chebyshev_state(int N, double x) {
    const std::size_t m = pow2(N);
    const double nx = chebyshev_norm(N, x);
    const double pref = std::pow(2.0, (N - 1) / 2.0);
    std::vector<cdouble> amps(m);
    for (std::size_t k = 0; k < m; ++k)
        amps[k] = chebyshev_T(static_cast<int>(k), x) / (pref * chebyshev_c(k) * nx);
    Statevector s;
    s.num_qubits = N;
    s.amps = std::move(amps);
    s.is_normalized = true;
    return s;
}

// Expansion T_n'(x) = sum_j w_j^n T_j(x):
//   T_0'      = 0
//   T_{2n}'   = 4n (T_1 + T_3 + ... + T_{2n-1})
//   T_{2n+1}' = (4n+2)(T_2 + T_4 + ... + T_{2n}) + (2n+1) T_0
inline std::vector<double> chebyshev_derivative_coeffs(int n, std::size_t size) {
    if (n < 0 || static_cast<std::size_t>(n) >= size)
        throw usage_error("chebyshev_derivative_coeffs: degree outside basis");
    std::vector<double> w(size, 0.0);
    if (n == 0) return w;
    if (n % 2 == 0) {
        for (int j = 1; j < n; j += 2) w[j] = 2.0 * n;
    } else {
        w[0] = n;
        for (int j = 2; j < n; j += 2) w[j] = 2.0 * n;
    }
    return w;
}

// Derivative generator: d/dx [N(x)|x>] = G [N(x)|x>] as an amplitude-vector
// identity. With amp_i = T_i / (2^{(N-1)/2} c_i) this gives
// G[i][j] = w_j^i c_j / c_i (the c_i division only touches the zero row i=0).
inline Matrix chebyshev_generator(int N) {
    const std::size_t m = pow2(N);
    Matrix g(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto w = chebyshev_derivative_coeffs(static_cast<int>(i), m);
        for (std::size_t j = 0; j < m; ++j)
            g(i, j) = w[j] * chebyshev_c(j) / chebyshev_c(i);
    }
    return g;
}

// Column j is the amplitude vector of N(x_j)|x_j>; unitary by the discrete
// orthonormality of the node states.
inline Matrix chebyshev_transform(int N) {
    const std::size_t m = pow2(N);
    const auto xs = chebyshev_nodes(N);
    const double pref = std::pow(2.0, (N - 1) / 2.0);
    Matrix u(m, m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k)
            u(k, j) = chebyshev_T(static_cast<int>(k), xs[j]) / (pref * chebyshev_c(k));
    return u;
}

}  // namespace qdes
