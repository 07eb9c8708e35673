// Encoding descriptor: one basis family on one register, with evaluation,
// decoding, derivative generator and node transform behind a shared cache.
//
// Latent coefficient vectors are always in the prefactor-included amplitude
// convention of the family, so decode(a, x) = sum_j a_j tau_j^*(x) / pref_j:
//   Chebyshev width m:            pref_j = 2^{(m-1)/2} c_j, tau_j real
//   Fourier  width m, scale S:    pref_j = 2^{m/2}, tau_j = exp(i 2 pi j x / 2^S)

#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <tuple>

#include "qdes/chebyshev.hpp"
#include "qdes/fourier.hpp"

namespace qdes {

enum class BasisFamily { Chebyshev, Fourier };

inline const char* family_name(BasisFamily f) {
    return f == BasisFamily::Chebyshev ? "chebyshev" : "fourier";
}

struct Encoding {
    BasisFamily family = BasisFamily::Chebyshev;
    int num_qubits = 0;
    int scale_qubits = 0;  // Fourier frequency scale; == num_qubits for base encodings

    static Encoding chebyshev(int N) { return {BasisFamily::Chebyshev, N, N}; }
    static Encoding fourier(int N) { return {BasisFamily::Fourier, N, N}; }

    std::size_t dim() const { return pow2(num_qubits); }

    bool operator==(const Encoding& o) const {
        return family == o.family && num_qubits == o.num_qubits &&
               (family == BasisFamily::Chebyshev || scale_qubits == o.scale_qubits);
    }

    // tau_j(x)
    cdouble basis_fn(std::size_t j, double x) const {
        if (family == BasisFamily::Chebyshev) return chebyshev_T(static_cast<int>(j), x);
        return std::polar(1.0, 2.0 * M_PI * static_cast<double>(j) * x /
                                   static_cast<double>(pow2(scale_qubits)));
    }

    // The Chebyshev model carries the x-dependent N(x) factor; Fourier does not.
    double norm_prefactor(double x) const {
        return family == BasisFamily::Chebyshev ? chebyshev_norm(num_qubits, x) : 1.0;
    }

    // Points where the encoding states are orthonormal (and where functions
    // are sampled for loading). Fourier nodes are spaced 2^{S - m} so they
    // stay consistent with the width-m DFT when the scale differs from the
    // register width (product basis).
    std::vector<double> nodes() const {
        if (family == BasisFamily::Chebyshev) return chebyshev_nodes(num_qubits);
        const double step = std::pow(2.0, scale_qubits - num_qubits);
        std::vector<double> xs(dim());
        for (std::size_t j = 0; j < xs.size(); ++j) xs[j] = step * static_cast<double>(j);
        return xs;
    }

    // Natural variable domain for experiments.
    std::pair<double, double> domain() const {
        if (family == BasisFamily::Chebyshev) return {-1.0, 1.0};
        return {0.0, static_cast<double>(pow2(scale_qubits))};
    }

    Statevector encoding_state(double x) const {
        if (family == BasisFamily::Chebyshev) return chebyshev_state(num_qubits, x);
        return fourier_state_closed(num_qubits, scale_qubits, x);
    }

    // Row r with r . a = decode(a, x); equals norm_prefactor(x) * conj(|x>).
    std::vector<cdouble> bra_vector(double x) const {
        auto s = encoding_state(x);
        const double pref = norm_prefactor(x);
        std::vector<cdouble> r(s.amps.size());
        for (std::size_t j = 0; j < r.size(); ++j) r[j] = pref * std::conj(s.amps[j]);
        return r;
    }

    cdouble decode(std::span<const cdouble> coeffs, double x) const {
        const auto r = bra_vector(x);
        if (coeffs.size() != r.size()) throw usage_error("decode: coefficient length mismatch");
        cdouble acc{0.0, 0.0};
        for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * coeffs[j];
        return acc;
    }

    // Latent vector of the unity function g(x) = 1: 2^{m/2} e_0 in both families.
    std::vector<cdouble> unity_coeffs() const {
        std::vector<cdouble> u(dim(), cdouble{0.0, 0.0});
        u[0] = std::pow(2.0, num_qubits / 2.0);
        return u;
    }

    // Extended basis spanning all pairwise products of this basis: one more
    // qubit, same family (Fourier keeps the frequency scale).
    Encoding product_basis() const {
        Encoding e = *this;
        e.num_qubits += 1;
        return e;
    }

    const Matrix& generator() const;
    const Matrix& transform() const;
};

namespace detail {

inline const Matrix& cached_matrix(const Encoding& e, bool want_generator) {
    struct Key {
        int fam, n, scale, which;
        bool operator<(const Key& o) const {
            return std::tie(fam, n, scale, which) < std::tie(o.fam, o.n, o.scale, o.which);
        }
    };
    static std::map<Key, Matrix> cache;
    static std::mutex mu;
    const Key key{static_cast<int>(e.family), e.num_qubits,
                  e.family == BasisFamily::Fourier ? e.scale_qubits : e.num_qubits,
                  want_generator ? 0 : 1};
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end()) {
        Matrix m;
        if (want_generator)
            m = e.family == BasisFamily::Chebyshev
                    ? chebyshev_generator(e.num_qubits)
                    : fourier_generator(e.num_qubits, e.scale_qubits);
        else
            m = e.family == BasisFamily::Chebyshev ? chebyshev_transform(e.num_qubits)
                                                   : fourier_transform(e.num_qubits);
        it = cache.emplace(key, std::move(m)).first;
    }
    return it->second;
}

}  // namespace detail

inline const Matrix& Encoding::generator() const { return detail::cached_matrix(*this, true); }
inline const Matrix& Encoding::transform() const { return detail::cached_matrix(*this, false); }

}  // namespace qdes
