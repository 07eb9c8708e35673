// Weighted sums of labelled statevectors (the double-ket objects). States in
// a mixture are kept normalized; all magnitudes live in the coefficients, so
// no scale information is ever lost to renormalization.

#pragma once

#include "qdes/circuit.hpp"
#include "qdes/linalg.hpp"

namespace qdes {

struct MixtureState {
    int num_qubits = 0;
    std::vector<std::pair<cdouble, Statevector>> terms;

    static MixtureState single(cdouble c, Statevector s) {
        MixtureState m;
        m.num_qubits = s.num_qubits;
        m.add_term(c, std::move(s));
        return m;
    }

    // Normalizes the state, folding its norm into the coefficient; terms with
    // vanishing weight are dropped (the zero function is an empty mixture).
    void add_term(cdouble c, Statevector s) {
        if (terms.empty() && num_qubits == 0) num_qubits = s.num_qubits;
        if (s.num_qubits != num_qubits) throw usage_error("MixtureState: register mismatch");
        const double n = state_norm(s);
        if (std::abs(c) * n < 1e-300) return;
        if (std::abs(n - 1.0) > 1e-12) {
            for (auto& a : s.amps) a /= n;
            c *= n;
        }
        s.is_normalized = true;
        terms.emplace_back(c, std::move(s));
    }

    MixtureState scaled(cdouble a) const {
        MixtureState out;
        out.num_qubits = num_qubits;
        for (const auto& [c, s] : terms)
            if (std::abs(c * a) >= 1e-300) out.terms.emplace_back(c * a, s);
        return out;
    }

    // The effective latent vector sum_i c_i |s_i>.
    std::vector<cdouble> collapse() const {
        std::vector<cdouble> v(pow2(num_qubits), cdouble{0.0, 0.0});
        for (const auto& [c, s] : terms)
            for (std::size_t k = 0; k < s.amps.size(); ++k) v[k] += c * s.amps[k];
        return v;
    }

    // <this|other> = sum over term pairs of conj(c_a) c_b <a|b>.
    cdouble overlap(const MixtureState& other) const {
        if (num_qubits != other.num_qubits) throw usage_error("overlap: register mismatch");
        cdouble acc{0.0, 0.0};
        for (const auto& [ca, sa] : terms)
            for (const auto& [cb, sb] : other.terms)
                acc += std::conj(ca) * cb * inner_product(sa, sb);
        return acc;
    }
};

inline MixtureState mix_sum(const MixtureState& a, const MixtureState& b) {
    MixtureState out = a;
    for (const auto& [c, s] : b.terms) out.add_term(c, s);
    return out;
}

// Applies a dense operator on a contiguous sub-register to every term.
inline MixtureState apply_operator(const MixtureState& ms, const Matrix& op, int start_qubit) {
    const int span = static_cast<int>(std::round(std::log2(static_cast<double>(op.rows))));
    MixtureState out;
    out.num_qubits = ms.num_qubits;
    DenseOperator d;
    d.span_qubits = span;
    d.start_qubit = start_qubit;
    d.mat = op.a;
    for (const auto& [c, s] : ms.terms) out.add_term(c, apply_dense(s, d));
    return out;
}

}  // namespace qdes
