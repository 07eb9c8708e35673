// Quantum model and DE-term construction. A model is an ansatz state with a
// classical scale (and optionally a shift through the unity state), carried
// as a MixtureState; DE terms compose derivatives, loaded functions and
// latent multiplications on a common register.
//
// Multidimensional registers: dimension 0 occupies the most significant
// qubits, so the joint bra is kron(bra_x, bra_y, ...).

#pragma once

#include <optional>

#include "qdes/ansatz.hpp"
#include "qdes/mixture.hpp"
#include "qdes/multiplier.hpp"

namespace qdes {

namespace detail {

inline std::vector<cdouble> kron_vec(std::span<const cdouble> a, std::span<const cdouble> b) {
    std::vector<cdouble> out(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
    return out;
}

}  // namespace detail

struct Model {
    std::vector<Encoding> encodings;  // per dimension
    Ansatz ansatz;
    std::vector<double> theta;
    double theta_scale = 1.0;
    double theta_shift = 0.0;
    bool use_shift = false;

    static Model make(std::vector<Encoding> encs, int rotation_layers,
                      std::vector<double> theta_init = {}) {
        Model m;
        m.encodings = std::move(encs);
        int total = 0;
        for (const auto& e : m.encodings) total += e.num_qubits;
        if (total < 1 || total > kMaxQubits)
            throw config_error("Model: total register size outside [1, 14]");
        m.ansatz = Ansatz{total, rotation_layers};
        m.theta = std::move(theta_init);
        if (m.theta.empty()) m.theta.assign(m.ansatz.parameter_count(), 0.0);
        if (static_cast<int>(m.theta.size()) != m.ansatz.parameter_count())
            throw config_error("Model: theta length != parameter count");
        return m;
    }

    int dims() const { return static_cast<int>(encodings.size()); }

    int total_qubits() const {
        int n = 0;
        for (const auto& e : encodings) n += e.num_qubits;
        return n;
    }

    // Start qubit of a dimension's register (dimension 0 is most significant).
    int register_start(int dim) const {
        int start = 0;
        for (int d = dims() - 1; d > dim; --d) start += encodings[d].num_qubits;
        return start;
    }

    Statevector ansatz_state() const { return ansatz.prepare(theta); }

    // Latent representation of the unity function on the full register:
    // analytic index-0 state for Chebyshev, loaded g = 1 for Fourier.
    MixtureState unity_mixture() const {
        cdouble coeff{1.0, 0.0};
        Statevector st;
        bool first = true;
        for (const auto& e : encodings) {
            Statevector part;
            if (e.family == BasisFamily::Chebyshev) {
                part = basis_state(e.num_qubits, 0);
                coeff *= std::pow(2.0, e.num_qubits / 2.0);
            } else {
                auto lf = load_function(e, [](double) { return 1.0; });
                part = std::move(lf.state);
                coeff *= lf.scale;
            }
            st = first ? std::move(part) : tensor(st, part);
            first = false;
        }
        return MixtureState::single(coeff, std::move(st));
    }

    // theta_s |psi_theta> (+ theta_sh |psi_1> when shifted).
    MixtureState mixture() const { return mixture_with(ansatz_state()); }

    MixtureState mixture_with(Statevector psi) const {
        MixtureState m = MixtureState::single(theta_scale, std::move(psi));
        if (use_shift) {
            MixtureState u = unity_mixture();
            for (auto& [c, s] : u.terms) m.add_term(theta_shift * c, std::move(s));
        }
        return m;
    }

    // kron of the per-dimension prefactor-included bra rows at x.
    std::vector<cdouble> bra_row(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != dims())
            throw usage_error("Model: point dimension mismatch");
        std::vector<cdouble> row = encodings[0].bra_vector(x[0]);
        for (int d = 1; d < dims(); ++d)
            row = detail::kron_vec(row, encodings[d].bra_vector(x[d]));
        return row;
    }

    cdouble eval_mixture(const MixtureState& ms, std::span<const double> x) const {
        if (ms.num_qubits != total_qubits())
            throw usage_error("Model: mixture register mismatch");
        const auto row = bra_row(x);
        const auto v = ms.collapse();
        cdouble acc{0.0, 0.0};
        for (std::size_t k = 0; k < row.size(); ++k) acc += row[k] * v[k];
        return acc;
    }

    // f_theta(x) = N(x) <x| f_theta>> per dimension prefactors included.
    cdouble eval(std::span<const double> x) const { return eval_mixture(mixture(), x); }
};

// Applies (G_d^dag)^order on the register of dimension `dim` of every term;
// the decoded mixture differentiates along that variable.
inline MixtureState derivative_state(const MixtureState& ms, const Model& m, int order,
                                     int dim = 0) {
    if (order < 1) throw usage_error("derivative_state: order must be >= 1");
    if (dim < 0 || dim >= m.dims()) throw usage_error("derivative_state: bad dimension");
    const auto gdag = adjoint(m.encodings[dim].generator());
    MixtureState out = ms;
    for (int i = 0; i < order; ++i) out = apply_operator(out, gdag, m.register_start(dim));
    return out;
}

// One product term of a DE: weight * g(x) * f^{(orders)} * f^{p-1}. The
// derivative orders apply to a single model factor; additional powers are
// undifferentiated.
struct DETermSpec {
    double weight = 1.0;
    std::vector<int> deriv_orders;  // per dimension; empty means none
    int model_power = 1;
    std::function<cdouble(std::span<const double>)> factor;  // independent function, optional
};

inline int required_folds(const DETermSpec& spec) {
    const int factors = (spec.factor ? 1 : 0) + spec.model_power;
    return std::max(0, factors - 1);
}

enum class MultiplierBackend { Oracle, Circuits };

// Samples g on the tensor node grid and rotates into the latent basis with
// the per-dimension transforms.
inline std::pair<Statevector, double> load_function_nd(
    const std::vector<Encoding>& encs, const std::function<cdouble(std::span<const double>)>& g) {
    std::vector<std::vector<double>> grids;
    std::size_t total = 1;
    for (const auto& e : encs) {
        grids.push_back(e.nodes());
        total *= e.dim();
    }
    std::vector<cdouble> vals(total);
    std::vector<double> pt(encs.size());
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        for (int d = static_cast<int>(encs.size()) - 1; d >= 0; --d) {
            pt[d] = grids[d][rem % encs[d].dim()];
            rem /= encs[d].dim();
        }
        vals[idx] = g(pt);
        if (!std::isfinite(vals[idx].real()) || !std::isfinite(vals[idx].imag()))
            throw numerical_error("load_function_nd: non-finite node value");
    }
    const double scale = vec_norm(vals);
    if (scale == 0.0)
        throw usage_error("load_function_nd: zero function (use a zero mixture weight instead)");
    for (auto& v : vals) v /= scale;
    int total_qubits = 0;
    for (const auto& e : encs) total_qubits += e.num_qubits;
    Statevector st;
    st.num_qubits = total_qubits;
    st.amps = std::move(vals);
    st.is_normalized = true;
    // apply U_T per dimension; dimension 0 sits at the top of the register
    int start = total_qubits;
    for (const auto& e : encs) {
        start -= e.num_qubits;
        apply_dense_inplace(st, DenseOperator{e.num_qubits, start, e.transform().a});
        st.is_normalized = true;  // transforms are unitary
    }
    return {std::move(st), scale};
}

namespace detail {

inline MixtureState fold_multiply(const Encoding& enc_w, const MixtureState& a,
                                  const MixtureState& b, MultiplierBackend backend) {
    MixtureState out;
    out.num_qubits = enc_w.num_qubits + 1;
    for (const auto& [ca, sa] : a.terms)
        for (const auto& [cb, sb] : b.terms) {
            if (backend == MultiplierBackend::Oracle) {
                auto vec = multiply_oracle(enc_w, sa.amps, sb.amps);
                Statevector s;
                s.num_qubits = enc_w.num_qubits + 1;
                s.amps = std::move(vec);
                out.add_term(ca * cb, std::move(s));
            } else {
                auto res = apply_multiplier(enc_w, sa, sb);
                out.add_term(ca * cb * res.scale, std::move(res.product_state));
            }
        }
    return out;
}

}  // namespace detail

inline Encoding lifted_encoding(Encoding base, int folds) {
    for (int i = 0; i < folds; ++i) base = base.product_basis();
    return base;
}

// Embeds a latent mixture into the next wider basis without changing the
// decoded function: zero-pad and rescale by sqrt(2) (exactly what multiplying
// with the unity function produces, in both families).
inline MixtureState lift_mixture(const MixtureState& ms) {
    MixtureState out;
    out.num_qubits = ms.num_qubits + 1;
    for (const auto& [c, s] : ms.terms) {
        Statevector w;
        w.num_qubits = s.num_qubits + 1;
        w.amps = s.amps;
        w.amps.resize(pow2(w.num_qubits), cdouble{0.0, 0.0});
        w.is_normalized = s.is_normalized;
        out.add_term(c * std::sqrt(2.0), std::move(w));
    }
    return out;
}

// Builds the latent mixture of one DE term on the problem's common register
// (base register widened by `common_folds` qubits). `occurrence_states`
// optionally replaces the p model occurrences (used by gradient code); the
// derivative orders act on occurrence 0.
inline MixtureState build_de_term(
    const Model& m, const DETermSpec& spec, int common_folds,
    const std::vector<MixtureState>* occurrence_states = nullptr,
    MultiplierBackend backend = MultiplierBackend::Oracle) {
    const int p = spec.model_power;
    if (p < 0) throw config_error("build_de_term: negative model power");
    if (occurrence_states && static_cast<int>(occurrence_states->size()) != p)
        throw usage_error("build_de_term: occurrence list length != model power");

    std::vector<int> orders = spec.deriv_orders;
    orders.resize(m.dims(), 0);
    bool any_deriv = false;
    for (int o : orders) any_deriv |= o > 0;
    if (any_deriv && p < 1)
        throw config_error("build_de_term: derivative requires a model factor");

    // gather the product factors on the base register
    std::vector<MixtureState> factors;
    if (spec.factor) {
        auto [st, sc] = load_function_nd(m.encodings, spec.factor);
        factors.push_back(MixtureState::single(sc, std::move(st)));
    }
    for (int occ = 0; occ < p; ++occ) {
        MixtureState base = occurrence_states ? (*occurrence_states)[occ] : m.mixture();
        if (occ == 0 && any_deriv) {
            for (int d = 0; d < m.dims(); ++d)
                if (orders[d] > 0) base = derivative_state(base, m, orders[d], d);
        }
        factors.push_back(std::move(base));
    }
    if (factors.empty()) factors.push_back(m.unity_mixture());  // pure constant term

    if (m.dims() > 1 && (static_cast<int>(factors.size()) > 1 || common_folds > 0))
        throw config_error(
            "build_de_term: latent products are supported for one-dimensional problems only");
    if (m.total_qubits() + common_folds > kMaxQubits)
        throw config_error("build_de_term: folds exceed the register cap");
    if (required_folds(spec) > common_folds)
        throw usage_error("build_de_term: common register too small for this term");

    MixtureState acc = std::move(factors[0]);
    Encoding enc = m.encodings[0];
    for (std::size_t i = 1; i < factors.size(); ++i) {
        MixtureState rhs = std::move(factors[i]);
        while (rhs.num_qubits < enc.num_qubits) rhs = lift_mixture(rhs);
        acc = detail::fold_multiply(enc, acc, rhs, backend);
        enc = enc.product_basis();
    }
    // lift single-factor terms into the common product basis with unity
    while (enc.num_qubits < m.encodings[0].num_qubits + common_folds) {
        auto u = enc.unity_coeffs();
        Statevector us;
        us.num_qubits = enc.num_qubits;
        us.amps = std::move(u);
        acc = detail::fold_multiply(enc, MixtureState::single(1.0, std::move(us)), acc, backend);
        enc = enc.product_basis();
    }
    return acc.scaled(spec.weight);
}

}  // namespace qdes
