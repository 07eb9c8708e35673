// Gates, dense operator insertions, projective-measurement markers and
// replayable circuits, plus the QFT construction.

#pragma once

#include <array>
#include <variant>

#include "qdes/statevector.hpp"

namespace qdes {

enum class GateKind { H, X, Z, S, RY, RZ, Phase, Unitary2 };

// Every gate is a single-qubit 2x2 core plus an optional list of control
// qubits with expected control values (0-controls are needed for the
// coefficient-correction block of the multiplier). CNOT is X with one
// control, CZ is Z with one control.
struct Gate {
    GateKind kind = GateKind::H;
    int target = 0;
    double angle = 0.0;                 // RY / RZ
    std::array<cdouble, 4> mat{};       // Phase / Unitary2, row-major
    std::vector<int> controls;
    std::vector<int> control_values;    // parallel to controls; empty = all 1

    static Gate h(int q) { return Gate{GateKind::H, q}; }
    static Gate x(int q) { return Gate{GateKind::X, q}; }
    static Gate z(int q) { return Gate{GateKind::Z, q}; }
    static Gate s(int q) { return Gate{GateKind::S, q}; }
    static Gate ry(int q, double a) { return Gate{GateKind::RY, q, a}; }
    static Gate rz(int q, double a) { return Gate{GateKind::RZ, q, a}; }

    static Gate phase(int q, cdouble d0, cdouble d1) {
        if (std::abs(std::abs(d0) - 1.0) > kUnitaryTol ||
            std::abs(std::abs(d1) - 1.0) > kUnitaryTol)
            throw usage_error("Gate::phase: diagonal entries must have unit modulus");
        Gate g{GateKind::Phase, q};
        g.mat = {d0, 0.0, 0.0, d1};
        return g;
    }
    // diag(1, e^{i a})
    static Gate phase(int q, double a) {
        return phase(q, cdouble{1.0, 0.0}, std::polar(1.0, a));
    }

    static Gate unitary2(int q, const std::array<cdouble, 4>& m) {
        // U U^dag = I to 1e-12
        const cdouble r00 = m[0] * std::conj(m[0]) + m[1] * std::conj(m[1]);
        const cdouble r01 = m[0] * std::conj(m[2]) + m[1] * std::conj(m[3]);
        const cdouble r11 = m[2] * std::conj(m[2]) + m[3] * std::conj(m[3]);
        if (std::abs(r00 - 1.0) > kUnitaryTol || std::abs(r11 - 1.0) > kUnitaryTol ||
            std::abs(r01) > kUnitaryTol)
            throw usage_error("Gate::unitary2: matrix is not unitary");
        Gate g{GateKind::Unitary2, q};
        g.mat = m;
        return g;
    }

    static Gate cnot(int control, int target) {
        Gate g = x(target);
        g.controls = {control};
        return g;
    }
    static Gate cz(int control, int target) {
        Gate g = z(target);
        g.controls = {control};
        return g;
    }
    static Gate cphase(int control, int target, double a) {
        Gate g = phase(target, a);
        g.controls = {control};
        return g;
    }

    Gate& controlled_on(const std::vector<int>& qs, std::vector<int> values = {}) {
        if (values.empty()) values.assign(qs.size(), 1);
        if (values.size() != qs.size())
            throw usage_error("Gate::controlled_on: value list length mismatch");
        if (control_values.size() < controls.size())
            control_values.resize(controls.size(), 1);
        controls.insert(controls.end(), qs.begin(), qs.end());
        control_values.insert(control_values.end(), values.begin(), values.end());
        return *this;
    }

    std::array<cdouble, 4> matrix2() const {
        constexpr double inv_sqrt2 = 0.70710678118654752440;
        switch (kind) {
            case GateKind::H: return {inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2};
            case GateKind::X: return {0.0, 1.0, 1.0, 0.0};
            case GateKind::Z: return {1.0, 0.0, 0.0, -1.0};
            case GateKind::S: return {1.0, 0.0, 0.0, cdouble{0.0, 1.0}};
            case GateKind::RY: {
                const double c = std::cos(angle / 2), s = std::sin(angle / 2);
                return {c, -s, s, c};
            }
            case GateKind::RZ: {
                return {std::polar(1.0, -angle / 2), 0.0, 0.0, std::polar(1.0, angle / 2)};
            }
            case GateKind::Phase:
            case GateKind::Unitary2: return mat;
        }
        throw usage_error("Gate::matrix2: unknown kind");
    }

    Gate dagger() const {
        Gate g = *this;
        switch (kind) {
            case GateKind::H:
            case GateKind::X:
            case GateKind::Z: break;
            case GateKind::S:
                g = Gate::phase(target, cdouble{1.0, 0.0}, cdouble{0.0, -1.0});
                g.controls = controls;
                g.control_values = control_values;
                break;
            case GateKind::RY:
            case GateKind::RZ: g.angle = -angle; break;
            case GateKind::Phase:
            case GateKind::Unitary2: {
                const auto m = matrix2();
                g.mat = {std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])};
                break;
            }
        }
        return g;
    }
};

namespace detail {

inline void check_gate_indices(const Statevector& s, const Gate& g) {
    if (g.target < 0 || g.target >= s.num_qubits)
        throw usage_error("apply_gate: target out of range");
    for (std::size_t i = 0; i < g.controls.size(); ++i) {
        const int c = g.controls[i];
        if (c < 0 || c >= s.num_qubits) throw usage_error("apply_gate: control out of range");
        if (c == g.target) throw usage_error("apply_gate: control collides with target");
        for (std::size_t j = i + 1; j < g.controls.size(); ++j)
            if (g.controls[j] == c) throw usage_error("apply_gate: duplicate control");
    }
}

}  // namespace detail

inline void apply_gate_inplace(Statevector& s, const Gate& g) {
    detail::check_gate_indices(s, g);
    const auto m = g.matrix2();
    const std::uint64_t tbit = std::uint64_t{1} << g.target;
    std::uint64_t cmask = 0, cwant = 0;
    for (std::size_t i = 0; i < g.controls.size(); ++i) {
        cmask |= std::uint64_t{1} << g.controls[i];
        const int v = g.control_values.empty() ? 1 : g.control_values[i];
        if (v) cwant |= std::uint64_t{1} << g.controls[i];
    }
    const std::size_t dim = s.dim();
    // k and k|tbit agree on every control bit, so one pattern check suffices
    for (std::uint64_t k = 0; k < dim; ++k) {
        if (k & tbit) continue;
        if ((k & cmask) != cwant) continue;
        const cdouble a0 = s.amps[k];
        const cdouble a1 = s.amps[k | tbit];
        s.amps[k] = m[0] * a0 + m[1] * a1;
        s.amps[k | tbit] = m[2] * a0 + m[3] * a1;
    }
}

inline Statevector apply_gate(Statevector s, const Gate& g) {
    apply_gate_inplace(s, g);
    return s;
}

// Dense (possibly non-unitary) operator on a contiguous qubit span
// [start_qubit, start_qubit + span_qubits). Houses the derivative generators
// and the multiplier as matrices.
struct DenseOperator {
    int span_qubits = 0;
    int start_qubit = 0;
    std::vector<cdouble> mat;  // 2^span x 2^span, row-major

    std::size_t dim() const { return pow2(span_qubits); }
};

inline void apply_dense_inplace(Statevector& s, const DenseOperator& op) {
    if (op.start_qubit < 0 || op.start_qubit + op.span_qubits > s.num_qubits)
        throw usage_error("apply_dense: span outside register");
    const std::size_t d = op.dim();
    if (op.mat.size() != d * d) throw usage_error("apply_dense: matrix dimension mismatch");
    const std::size_t low = pow2(op.start_qubit);
    const std::size_t outer = s.dim() / (d * low);
    std::vector<cdouble> in(d), out(d);
    for (std::size_t hi = 0; hi < outer; ++hi) {
        for (std::size_t lo = 0; lo < low; ++lo) {
            const std::size_t base = hi * d * low + lo;
            for (std::size_t b = 0; b < d; ++b) in[b] = s.amps[base + b * low];
            for (std::size_t r = 0; r < d; ++r) {
                cdouble acc{0.0, 0.0};
                const cdouble* row = op.mat.data() + r * d;
                for (std::size_t b = 0; b < d; ++b) acc += row[b] * in[b];
                out[r] = acc;
            }
            for (std::size_t r = 0; r < d; ++r) s.amps[base + r * low] = out[r];
        }
    }
    s.is_normalized = false;
}

inline Statevector apply_dense(Statevector s, const DenseOperator& op) {
    apply_dense_inplace(s, op);
    return s;
}

struct Projection {
    std::vector<int> qubits;
    std::uint64_t outcome = 0;
};

using CircuitElement = std::variant<Gate, DenseOperator, Projection>;

struct Circuit {
    int num_qubits = 0;
    std::vector<CircuitElement> elements;

    Circuit() = default;
    explicit Circuit(int n) : num_qubits(n) {}

    Circuit& add(Gate g) { elements.emplace_back(std::move(g)); return *this; }
    Circuit& add(DenseOperator op) { elements.emplace_back(std::move(op)); return *this; }
    Circuit& add(Projection p) { elements.emplace_back(std::move(p)); return *this; }
    Circuit& append(const Circuit& other) {
        if (other.num_qubits > num_qubits) throw usage_error("Circuit::append: register too small");
        for (const auto& e : other.elements) elements.push_back(e);
        return *this;
    }
};

struct ReplayResult {
    Statevector state;
    std::vector<double> projection_probs;
    double success_probability = 1.0;  // product of projection probabilities
};

inline ReplayResult replay(const Circuit& c, Statevector input) {
    if (input.num_qubits != c.num_qubits) throw usage_error("replay: register size mismatch");
    ReplayResult r;
    r.state = std::move(input);
    for (const auto& e : c.elements) {
        if (std::holds_alternative<Gate>(e)) {
            apply_gate_inplace(r.state, std::get<Gate>(e));
        } else if (std::holds_alternative<DenseOperator>(e)) {
            apply_dense_inplace(r.state, std::get<DenseOperator>(e));
        } else {
            const auto& p = std::get<Projection>(e);
            auto [st, prob] = project(r.state, p.qubits, p.outcome);
            r.state = std::move(st);
            r.projection_probs.push_back(prob);
            r.success_probability *= prob;
        }
    }
    return r;
}

// Quantum Fourier transform on n qubits:
//   |k>  ->  2^{-n/2} sum_j exp(+2 pi i j k / 2^n) |j>
// in the standard little-endian integer ordering (qubit 0 = LSB). The final
// swap layer performs the bit reversal so no reinterpretation is needed.
inline Circuit qft_circuit(int n) {
    if (n < 1) throw config_error("qft_circuit: n must be >= 1");
    Circuit c(n);
    for (int q = n - 1; q >= 0; --q) {
        c.add(Gate::h(q));
        for (int p = q - 1; p >= 0; --p) {
            const double a = 2.0 * M_PI / static_cast<double>(pow2(q - p + 1));
            c.add(Gate::cphase(p, q, a));
        }
    }
    for (int q = 0; q < n / 2; ++q) {
        const int r = n - 1 - q;
        c.add(Gate::cnot(q, r));
        c.add(Gate::cnot(r, q));
        c.add(Gate::cnot(q, r));
    }
    return c;
}

inline Circuit inverse_circuit(const Circuit& c) {
    Circuit inv(c.num_qubits);
    for (auto it = c.elements.rbegin(); it != c.elements.rend(); ++it) {
        if (!std::holds_alternative<Gate>(*it))
            throw usage_error("inverse_circuit: only gate circuits can be inverted");
        inv.add(std::get<Gate>(*it).dagger());
    }
    return inv;
}

}  // namespace qdes
