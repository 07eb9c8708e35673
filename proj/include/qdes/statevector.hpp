// Dense statevector: the carrier for encodings, models and DE-term states.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <span>
#include <utility>

#include "qdes/common.hpp"

namespace qdes {

struct Statevector {
    int num_qubits = 0;
    std::vector<cdouble> amps;
    // May legitimately be false after a non-unitary (dense) application.
    bool is_normalized = true;

    std::size_t dim() const { return amps.size(); }
};

inline double norm_squared(const Statevector& s) {
    double n2 = 0.0;
    for (const auto& a : s.amps) n2 += std::norm(a);
    return n2;
}

inline double state_norm(const Statevector& s) { return std::sqrt(norm_squared(s)); }

inline Statevector zero_state(int n) {
    if (n < 1 || n > kMaxQubits)
        throw config_error("zero_state: qubit count " + std::to_string(n) +
                           " outside [1, " + std::to_string(kMaxQubits) + "]");
    Statevector s;
    s.num_qubits = n;
    s.amps.assign(pow2(n), cdouble{0.0, 0.0});
    s.amps[0] = 1.0;
    s.is_normalized = true;
    return s;
}

inline Statevector basis_state(int n, std::uint64_t k) {
    Statevector s = zero_state(n);
    s.amps[0] = 0.0;
    s.amps.at(k) = 1.0;
    return s;
}

// Builds a state from raw amplitudes; the normalization flag is set from the
// actual 2-norm, nothing is rescaled.
inline Statevector from_amplitudes(int n, std::vector<cdouble> a) {
    if (a.size() != pow2(n)) throw usage_error("from_amplitudes: length != 2^n");
    Statevector s;
    s.num_qubits = n;
    s.amps = std::move(a);
    s.is_normalized = std::abs(norm_squared(s) - 1.0) <= 1e-12;
    return s;
}

inline Statevector normalized(Statevector s) {
    const double n = state_norm(s);
    if (n == 0.0) throw numerical_error("normalized: zero vector");
    for (auto& a : s.amps) a /= n;
    s.is_normalized = true;
    return s;
}

inline cdouble inner_product(const Statevector& bra, const Statevector& ket) {
    if (bra.num_qubits != ket.num_qubits)
        throw usage_error("inner_product: qubit counts differ");
    cdouble acc{0.0, 0.0};
    for (std::size_t k = 0; k < bra.amps.size(); ++k)
        acc += std::conj(bra.amps[k]) * ket.amps[k];
    return acc;
}

// Kronecker product; `a` occupies the more significant register, so
// tensor(|0>, |1>) is |01> = index 1.
inline Statevector tensor(const Statevector& a, const Statevector& b) {
    if (a.num_qubits + b.num_qubits > kMaxQubits)
        throw config_error("tensor: combined register exceeds qubit cap");
    Statevector out;
    out.num_qubits = a.num_qubits + b.num_qubits;
    out.amps.resize(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < b.dim(); ++j)
            out.amps[i * b.dim() + j] = a.amps[i] * b.amps[j];
    out.is_normalized = a.is_normalized && b.is_normalized;
    return out;
}

// Collapses `qubits` onto the bit pattern `outcome` (bit q of `outcome`
// corresponds to qubits[q]). Returns the renormalized post-measurement state
// together with the outcome probability, computed relative to the input norm
// so unnormalized inputs are handled consistently.
inline std::pair<Statevector, double> project(const Statevector& s,
                                              std::span<const int> qubits,
                                              std::uint64_t outcome) {
    std::uint64_t mask = 0, want = 0;
    for (std::size_t q = 0; q < qubits.size(); ++q) {
        const int qb = qubits[q];
        if (qb < 0 || qb >= s.num_qubits) throw usage_error("project: qubit out of range");
        mask |= std::uint64_t{1} << qb;
        if ((outcome >> q) & 1u) want |= std::uint64_t{1} << qb;
    }
    double kept = 0.0;
    const double total = norm_squared(s);
    Statevector out;
    out.num_qubits = s.num_qubits;
    out.amps.assign(s.dim(), cdouble{0.0, 0.0});
    for (std::size_t k = 0; k < s.dim(); ++k) {
        if ((k & mask) == want) {
            out.amps[k] = s.amps[k];
            kept += std::norm(s.amps[k]);
        }
    }
    if (total == 0.0 || kept == 0.0)
        throw numerical_error("project: zero-probability outcome");
    const double p = kept / total;
    const double inv = 1.0 / std::sqrt(kept);
    for (auto& a : out.amps) a *= inv;
    out.is_normalized = true;
    return {std::move(out), p};
}

// Multinomial sampling of basis-state outcomes. Inverse-CDF with a fixed
// generator keeps counts reproducible for a given seed across platforms.
inline std::map<std::uint64_t, std::uint64_t> sample(const Statevector& s,
                                                     std::uint64_t shots,
                                                     std::uint64_t seed) {
    if (!s.is_normalized) throw usage_error("sample: state is not normalized");
    std::vector<double> cdf(s.dim());
    double acc = 0.0;
    for (std::size_t k = 0; k < s.dim(); ++k) {
        acc += std::norm(s.amps[k]);
        cdf[k] = acc;
    }
    cdf.back() = 1.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::map<std::uint64_t, std::uint64_t> counts;
    for (std::uint64_t t = 0; t < shots; ++t) {
        const double u = uni(rng);
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        counts[static_cast<std::uint64_t>(it - cdf.begin())]++;
    }
    return counts;
}

}  // namespace qdes
