// Latent-space multiplication. Two routes are provided and tested against
// each other:
//   - multiply_oracle: the closed-form coefficient-space map (a convolution;
//     for Chebyshev a sum + absolute-difference convolution with c-factor
//     corrections), realized as a dense 2^{m+1} x 2^{2m} matrix;
//   - apply_multiplier: the gate-level pipeline (QFT adder/subtractor, MOD
//     block, coefficient-correction rotations, Hadamard disentanglers and
//     projective measurements) with exact renormalization bookkeeping.
//
// Register layout of the gate pipeline, most significant to least:
//   [C ancillas (3, Chebyshev only)] [g (n)] [h (n)] [result (n+1)]
// The result register sits at qubit 0 so QFT subcircuits embed unchanged.

#pragma once

#include <functional>

#include "qdes/encoding.hpp"

namespace qdes {

inline Matrix multiplier_matrix(const Encoding& e) {
    const std::size_t m = e.dim();
    Matrix mat(2 * m, m * m);
    if (e.family == BasisFamily::Fourier) {
        const double pref = std::pow(2.0, -(e.num_qubits - 1) / 2.0);
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < m; ++k) mat(j + k, j * m + k) += pref;
    } else {
        const double pref = std::pow(2.0, -e.num_qubits / 2.0);
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < m; ++k) {
                const double cc = chebyshev_c(j) * chebyshev_c(k);
                const std::size_t lp = j + k;
                const std::size_t lm = j >= k ? j - k : k - j;
                mat(lp, j * m + k) += pref * chebyshev_c(lp) / cc;
                mat(lm, j * m + k) += pref * chebyshev_c(lm) / cc;
            }
    }
    return mat;
}

namespace detail {

inline const Matrix& cached_multiplier_matrix(const Encoding& e) {
    struct Key {
        int fam, n;
        bool operator<(const Key& o) const { return std::tie(fam, n) < std::tie(o.fam, o.n); }
    };
    static std::map<Key, Matrix> cache;
    static std::mutex mu;
    const Key key{static_cast<int>(e.family), e.num_qubits};
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, multiplier_matrix(e)).first;
    return it->second;
}

}  // namespace detail

// Coefficient-space product: latent vectors in, latent vector on the product
// basis out. Bilinear and symmetric in (g, h). Computed as a direct
// convolution; multiplier_matrix is the same map in dense form.
inline std::vector<cdouble> multiply_oracle(const Encoding& e, std::span<const cdouble> g,
                                            std::span<const cdouble> h) {
    const std::size_t m = e.dim();
    if (g.size() != m || h.size() != m)
        throw usage_error("multiply_oracle: coefficient length != 2^N");
    std::vector<cdouble> out(2 * m, cdouble{0.0, 0.0});
    if (e.family == BasisFamily::Fourier) {
        const double pref = std::pow(2.0, -(e.num_qubits - 1) / 2.0);
        for (std::size_t j = 0; j < m; ++j) {
            if (g[j] == cdouble{0.0, 0.0}) continue;
            for (std::size_t k = 0; k < m; ++k) out[j + k] += pref * g[j] * h[k];
        }
    } else {
        const double pref = std::pow(2.0, -e.num_qubits / 2.0);
        for (std::size_t j = 0; j < m; ++j) {
            if (g[j] == cdouble{0.0, 0.0}) continue;
            const cdouble gj = pref * g[j] / chebyshev_c(j);
            for (std::size_t k = 0; k < m; ++k) {
                const cdouble v = gj * h[k] / chebyshev_c(k);
                const std::size_t lp = j + k;
                const std::size_t lm = j >= k ? j - k : k - j;
                out[lp] += v * chebyshev_c(lp);
                out[lm] += v * chebyshev_c(lm);
            }
        }
    }
    return out;
}

namespace detail {

// Draper-style phase block: adds sign * (value of the src register) into the
// result register living on qubits [0, res_qubits), assuming the result
// register is already in Fourier space.
inline void add_register_phases(Circuit& c, int src_start, int src_qubits, int res_qubits,
                                double sign) {
    for (int i = 0; i < src_qubits; ++i)
        for (int q = 0; q < res_qubits; ++q) {
            if (i + q >= res_qubits) continue;  // phase is a multiple of 2 pi
            const double angle =
                sign * 2.0 * M_PI * static_cast<double>(pow2(i + q)) /
                static_cast<double>(pow2(res_qubits));
            c.add(Gate::cphase(src_start + i, q, angle));
        }
}

inline Circuit adder_like(int n, double sign_h) {
    Circuit c(3 * n + 1);
    c.append(qft_circuit(n + 1));
    add_register_phases(c, 2 * n + 1, n, n + 1, +1.0);     // += j (g register)
    add_register_phases(c, n + 1, n, n + 1, sign_h);       // +-= k (h register)
    c.append(inverse_circuit(qft_circuit(n + 1)));
    return c;
}

}  // namespace detail

// |j>|k>|0> -> |j>|k>|j+k>, exact for all j, k < 2^n.
inline Circuit build_adder(int n) { return detail::adder_like(n, +1.0); }

// |j>|k>|0> -> |j>|k>|(j-k) mod 2^{n+1}>.
inline Circuit build_subtractor(int n) { return detail::adder_like(n, -1.0); }

// Maps the result register from (j-k) mod 2^{n+1} to |j-k| in the low n bits;
// the MSB is left as the j<k flag for the extended disentangler.
inline Circuit build_mod(int n) {
    Circuit c(3 * n + 1);
    const int msb = n;
    for (int q = 0; q < n; ++q) c.add(Gate::cnot(msb, q));
    // MSB-controlled +1 on the low bits: QFT, controlled phases, inverse QFT
    c.append(qft_circuit(n));
    for (int q = 0; q < n; ++q) {
        const double angle = 2.0 * M_PI * static_cast<double>(pow2(q)) /
                             static_cast<double>(pow2(n));
        c.add(Gate::cphase(msb, q, angle));
    }
    c.append(inverse_circuit(qft_circuit(n)));
    return c;
}

// Coefficient-correction block C on three ancillas (prepared uniform by the
// caller): relative amplitude factors 1/sqrt(2) for j = 0, 1/sqrt(2) for
// k = 0 and sqrt(2) for result = 0, realized with controlled RZ(-pi/2)
// rotations (plus one uncontrolled RZ(pi/2)), Hadamards and a projective
// measurement onto |000>.
inline Circuit build_coeff_correction(int n) {
    Circuit c(3 * n + 4);
    const int a_g = 3 * n + 1, a_h = 3 * n + 2, a_r = 3 * n + 3;
    std::vector<int> g_reg(n), h_reg(n), r_reg(n + 1);
    for (int i = 0; i < n; ++i) g_reg[i] = 2 * n + 1 + i;
    for (int i = 0; i < n; ++i) h_reg[i] = n + 1 + i;
    for (int i = 0; i <= n; ++i) r_reg[i] = i;

    c.add(Gate::rz(a_g, -M_PI / 2).controlled_on(g_reg, std::vector<int>(n, 0)));
    c.add(Gate::rz(a_h, -M_PI / 2).controlled_on(h_reg, std::vector<int>(n, 0)));
    c.add(Gate::rz(a_r, -M_PI / 2).controlled_on(r_reg, std::vector<int>(n + 1, 0)));
    c.add(Gate::rz(a_r, M_PI / 2));
    c.add(Gate::h(a_g));
    c.add(Gate::h(a_h));
    c.add(Gate::h(a_r));
    c.add(Projection{{a_g, a_h, a_r}, 0});
    return c;
}

struct MultiplierResult {
    Statevector product_state;  // on N+1 qubits, normalized
    double scale = 0.0;         // scale * product_state == multiply_oracle(g, h)
};

namespace detail {

// Hadamard disentangler: spread-and-project the listed qubits onto |0>.
inline void add_disentangler(Circuit& c, const std::vector<int>& qubits) {
    for (int q : qubits) c.add(Gate::h(q));
    c.add(Projection{qubits, 0});
}

inline Statevector slice_result(const Statevector& full, int res_qubits) {
    Statevector out;
    out.num_qubits = res_qubits;
    out.amps.assign(full.amps.begin(), full.amps.begin() + pow2(res_qubits));
    out.is_normalized = true;
    return out;
}

}  // namespace detail

// Gate-level multiplier. The recorded scale folds in the projection success
// probabilities exactly (sqrt of each), the Hadamard fan-out constants and
// the 2^{-N/2}-type closed-form prefactors, so that
//   scale * product_state == multiply_oracle(g.amps, h.amps).
inline MultiplierResult apply_multiplier(const Encoding& e, const Statevector& g,
                                         const Statevector& h) {
    const int n = e.num_qubits;
    if (g.num_qubits != n || h.num_qubits != n)
        throw usage_error("apply_multiplier: input registers must match the encoding");

    std::vector<int> g_reg(n), h_reg(n);
    for (int i = 0; i < n; ++i) g_reg[i] = 2 * n + 1 + i;
    for (int i = 0; i < n; ++i) h_reg[i] = n + 1 + i;
    std::vector<int> gh_reg = h_reg;
    gh_reg.insert(gh_reg.end(), g_reg.begin(), g_reg.end());

    const auto run = [&](const Circuit& c, const Statevector& input) {
        ReplayResult r = replay(c, input);
        for (double p : r.projection_probs)
            if (p < 1e-14)
                throw numerical_error("apply_multiplier: degenerate input "
                                      "(projection probability below 1e-14)");
        return r;
    };

    if (e.family == BasisFamily::Fourier) {
        Circuit c(3 * n + 1);
        c.append(build_adder(n));
        detail::add_disentangler(c, gh_reg);
        auto r = run(c, tensor(tensor(g, h), zero_state(n + 1)));
        // raw linear result = sqrt(p) * state; Hadamard fan-out contributes
        // 2^{-n}; closed form carries 2^{-(n-1)/2}
        const double scale = std::pow(2.0, (n + 1) / 2.0) * std::sqrt(r.success_probability);
        return {detail::slice_result(r.state, n + 1), scale};
    }

    Statevector anc = zero_state(3);
    Statevector input = tensor(anc, tensor(tensor(g, h), zero_state(n + 1)));

    Circuit plus(3 * n + 4);
    for (int q = 3 * n + 1; q < 3 * n + 4; ++q) plus.add(Gate::h(q));  // uniform ancillas
    plus.append(build_adder(n));
    plus.append(build_coeff_correction(n));
    detail::add_disentangler(plus, gh_reg);
    auto rp = run(plus, input);
    // M_+ = 2^n sqrt(2) * raw  (2^{-n} from the g/h fan-out, 1/sqrt(2) from C)
    const double sp = std::pow(2.0, n) * std::sqrt(2.0) * std::sqrt(rp.success_probability);

    Circuit minus(3 * n + 4);
    for (int q = 3 * n + 1; q < 3 * n + 4; ++q) minus.add(Gate::h(q));
    minus.append(build_subtractor(n));
    minus.append(build_mod(n));
    minus.append(build_coeff_correction(n));
    std::vector<int> gh_msb = gh_reg;
    gh_msb.push_back(n);  // the |j-k| sign flag is disentangled too
    detail::add_disentangler(minus, gh_msb);
    auto rm = run(minus, input);
    // M_- = 2^{n+1} * raw (extra 1/sqrt(2) from the flag qubit fan-out)
    const double sm = std::pow(2.0, n + 1) * std::sqrt(rm.success_probability);

    // M = 2^{-N/2} (M_+ + M_-), combined classically as a weighted sum of the
    // post-projection states
    auto vp = detail::slice_result(rp.state, n + 1);
    auto vm = detail::slice_result(rm.state, n + 1);
    std::vector<cdouble> v(pow2(n + 1));
    const double pref = std::pow(2.0, -n / 2.0);
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = pref * (sp * vp.amps[i] + sm * vm.amps[i]);
    const double nv = vec_norm(v);
    if (nv < 1e-14) throw numerical_error("apply_multiplier: product state vanished");
    Statevector prod;
    prod.num_qubits = n + 1;
    prod.amps = std::move(v);
    for (auto& a : prod.amps) a /= nv;
    prod.is_normalized = true;
    return {std::move(prod), nv};
}

struct LoadedFunction {
    Statevector state;  // normalized latent state
    double scale = 0.0; // norm of the node-value vector
    Encoding encoding;
};

// Loads g by sampling it on the encoding's node grid and rotating the value
// vector into the latent basis. The decoded function interpolates g exactly
// at the nodes; between nodes it is the basis interpolant of g, not g itself.
inline LoadedFunction load_function(const Encoding& e,
                                    const std::function<cdouble(double)>& g) {
    const auto xs = e.nodes();
    std::vector<cdouble> vals(xs.size());
    double norm2 = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        vals[j] = g(xs[j]);
        if (!std::isfinite(vals[j].real()) || !std::isfinite(vals[j].imag()))
            throw numerical_error("load_function: non-finite node value");
        norm2 += std::norm(vals[j]);
    }
    if (norm2 == 0.0)
        throw usage_error("load_function: zero function (use a zero mixture weight instead)");
    const double scale = std::sqrt(norm2);
    for (auto& v : vals) v /= scale;
    Statevector st;
    st.num_qubits = e.num_qubits;
    st.amps = matvec(e.transform(), vals);
    st.is_normalized = true;
    return {std::move(st), scale, e};
}

}  // namespace qdes
