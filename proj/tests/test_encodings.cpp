#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qdes/encoding.hpp>

#include <Eigen/Dense>
#include <functional>
#include <random>

using namespace qdes;

namespace {

// Prefactor-included amplitude vector of the encoding state, v(x) = N(x)|x>.
std::vector<cdouble> amp_vector(const Encoding& e, double x) {
    auto s = e.encoding_state(x);
    const double pref = e.norm_prefactor(x);
    std::vector<cdouble> v(s.amps.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = pref * s.amps[k];
    return v;
}

// Central finite difference of a vector-valued function.
std::vector<cdouble> central_diff(const std::function<std::vector<cdouble>(double)>& f,
                                  double x, double h) {
    auto hi = f(x + h);
    auto lo = f(x - h);
    for (std::size_t k = 0; k < hi.size(); ++k) hi[k] = (hi[k] - lo[k]) / (2.0 * h);
    return hi;
}

double vec_err(std::span<const cdouble> a, std::span<const cdouble> b) {
    double e = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) e = std::max(e, std::abs(a[k] - b[k]));
    return e;
}

double random_in(std::pair<double, double> dom, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(dom.first, dom.second);
    return u(rng);
}

}  // namespace

TEST_CASE("chebyshev_T values and continuation") {
    CHECK(chebyshev_T(0, 0.7) == doctest::Approx(1.0));
    CHECK(chebyshev_T(1, 0.5) == doctest::Approx(0.5));
    CHECK(chebyshev_T(2, 0.5) == doctest::Approx(2.0 * 0.25 - 1.0));  // -0.5
    // outside [-1, 1] the hyperbolic continuation must agree with the
    // polynomial form T_3(x) = 4x^3 - 3x
    for (double x : {1.5, 2.0, -1.3}) {
        CHECK(chebyshev_T(3, x) == doctest::Approx(4 * x * x * x - 3 * x).epsilon(1e-12));
    }
}

TEST_CASE("chebyshev_nodes") {
    auto n1 = chebyshev_nodes(1);
    CHECK(n1[0] == doctest::Approx(std::sqrt(2.0) / 2.0));
    CHECK(n1[1] == doctest::Approx(-std::sqrt(2.0) / 2.0));

    auto n2 = chebyshev_nodes(2);
    CHECK(n2[0] == doctest::Approx(std::cos(M_PI / 8.0)));  // ~0.92388

    for (int N = 1; N <= 4; ++N) {
        auto xs = chebyshev_nodes(N);
        for (std::size_t j = 0; j < xs.size(); ++j) {
            CHECK(xs[j] > -1.0);
            CHECK(xs[j] < 1.0);
            if (j > 0) CHECK(xs[j] < xs[j - 1]);
            CHECK(std::abs(chebyshev_T(static_cast<int>(pow2(N)), xs[j])) <= 1e-12);
        }
    }
}

TEST_CASE("chebyshev_norm") {
    for (int N = 1; N <= 4; ++N)
        for (double xj : chebyshev_nodes(N))
            CHECK(std::abs(chebyshev_norm(N, xj) - 1.0) <= 1e-10);

    CHECK(chebyshev_norm(2, 0.0) == doctest::Approx(std::sqrt(3.0) / 2.0));

    std::mt19937_64 rng(5);
    for (int t = 0; t < 50; ++t) {
        const double x = random_in({-1.0, 1.0}, rng);
        for (int N = 1; N <= 3; ++N)
            CHECK(chebyshev_norm(N, x) >=
                  std::pow(2.0, -N / 2.0) * std::sqrt(0.5) - 1e-14);
    }
}

TEST_CASE("chebyshev_state amplitudes") {
    auto s = chebyshev_state(2, 0.0);
    CHECK(s.amps[0].real() == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(std::abs(s.amps[1]) <= 1e-15);
    CHECK(s.amps[2].real() == doctest::Approx(-std::sqrt(2.0 / 3.0)));
    CHECK(std::abs(s.amps[3]) <= 1e-15);

    std::mt19937_64 rng(6);
    for (int t = 0; t < 30; ++t) {
        const double x = random_in({-1.0, 1.0}, rng);
        auto st = chebyshev_state(3, x);
        CHECK(std::abs(norm_squared(st) - 1.0) <= 1e-12);
        for (const auto& a : st.amps) CHECK(std::abs(a.imag()) == 0.0);
    }

    // at x = 1 all T_k = 1
    auto s1 = chebyshev_state(2, 1.0);
    CHECK(s1.amps[0].real() * std::sqrt(2.0) == doctest::Approx(s1.amps[1].real()));
    CHECK(s1.amps[1].real() == doctest::Approx(s1.amps[2].real()));
    CHECK(std::abs(norm_squared(s1) - 1.0) <= 1e-12);
}

TEST_CASE("node-state Gram matrices are the identity") {
    for (int N = 1; N <= 3; ++N) {
        Encoding encs[] = {Encoding::chebyshev(N), Encoding::fourier(N)};
        for (const auto& e : encs) {
            auto xs = e.nodes();
            for (std::size_t i = 0; i < xs.size(); ++i) {
                auto si = e.encoding_state(xs[i]);
                for (std::size_t j = 0; j < xs.size(); ++j) {
                    auto sj = e.encoding_state(xs[j]);
                    const double want = i == j ? 1.0 : 0.0;
                    CHECK(std::abs(inner_product(si, sj) - want) <= 1e-10);
                }
            }
        }
    }
}

TEST_CASE("chebyshev_derivative_coeffs") {
    const std::size_t sz = 16;
    auto w0 = chebyshev_derivative_coeffs(0, sz);
    for (double w : w0) CHECK(w == 0.0);

    auto w2 = chebyshev_derivative_coeffs(2, sz);
    CHECK(w2[1] == 4.0);
    for (std::size_t j = 0; j < sz; ++j)
        if (j != 1) CHECK(w2[j] == 0.0);

    auto w3 = chebyshev_derivative_coeffs(3, sz);
    CHECK(w3[0] == 3.0);
    CHECK(w3[2] == 6.0);

    auto w4 = chebyshev_derivative_coeffs(4, sz);
    CHECK(w4[1] == 8.0);
    CHECK(w4[3] == 8.0);

    // T_n'(x) = sum_j w_j T_j(x), checked against finite differences of T_n
    std::mt19937_64 rng(9);
    for (int n = 0; n < 16; ++n) {
        auto w = chebyshev_derivative_coeffs(n, sz);
        for (int t = 0; t < 20; ++t) {
            const double x = random_in({-0.95, 0.95}, rng);
            double expanded = 0.0;
            for (std::size_t j = 0; j < sz; ++j)
                expanded += w[j] * chebyshev_T(static_cast<int>(j), x);
            const double h = 1e-6;
            const double fd = (chebyshev_T(n, x + h) - chebyshev_T(n, x - h)) / (2 * h);
            CHECK(std::abs(expanded - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("generator defining property (both families)") {
    std::mt19937_64 rng(12);
    for (int N = 1; N <= 3; ++N) {
        Encoding encs[] = {Encoding::chebyshev(N), Encoding::fourier(N)};
        for (const auto& e : encs) {
            const auto& g = e.generator();
            auto v = [&](double x) { return amp_vector(e, x); };
            for (int t = 0; t < 50; ++t) {
                auto dom = e.domain();
                // keep x + h inside the domain
                const double x = random_in({dom.first + 1e-3, dom.second - 1e-3}, rng);
                const double h = 1e-5;
                auto fd = central_diff(v, x, h);
                auto gv = matvec(g, v(x));
                CHECK(vec_err(gv, fd) <= 1e-5 * std::max(1.0, vec_norm(fd)));
            }
        }
    }
}

TEST_CASE("generator adjoint acts as d/dx on latent coefficients") {
    // latent vector of T_2 on 2 qubits -> adjoint generator gives 4 T_1
    const int N = 2;
    Encoding e = Encoding::chebyshev(N);
    std::vector<cdouble> t2(4, 0.0);
    t2[2] = std::pow(2.0, (N - 1) / 2.0);  // decode(t2) = T_2
    auto d1 = matvec(adjoint(e.generator()), t2);
    auto d2 = matvec(adjoint(e.generator()), d1);
    std::mt19937_64 rng(13);
    for (int t = 0; t < 20; ++t) {
        const double x = random_in({-1.0, 1.0}, rng);
        CHECK(e.decode(t2, x).real() == doctest::Approx(chebyshev_T(2, x)).epsilon(1e-12));
        CHECK(e.decode(d1, x).real() ==
              doctest::Approx(4.0 * chebyshev_T(1, x)).epsilon(1e-10));
        // T_2'' = 4 T_1' = 4 T_0 = const 4
        CHECK(e.decode(d2, x).real() == doctest::Approx(4.0).epsilon(1e-10));
    }
    // degree-0 row contributes nothing: column/row structure kills T_0'
    std::vector<cdouble> t0(4, 0.0);
    t0[0] = 1.0;
    auto d0 = matvec(adjoint(e.generator()), t0);
    for (const auto& a : d0) CHECK(std::abs(a) <= 1e-14);
}

TEST_CASE("chebyshev transform") {
    for (int N = 1; N <= 4; ++N) {
        auto u = chebyshev_transform(N);
        CHECK(unitarity_residual(u) <= 1e-12);

        auto udag = adjoint(u);
        Encoding e = Encoding::chebyshev(N);
        auto xs = e.nodes();
        for (std::size_t j = 0; j < xs.size(); ++j) {
            auto col = amp_vector(e, xs[j]);  // N(x_j)|x_j>, N = 1 at nodes
            auto back = matvec(udag, col);
            for (std::size_t k = 0; k < back.size(); ++k) {
                const double want = k == j ? 1.0 : 0.0;
                CHECK(std::abs(back[k] - want) <= 1e-10);
            }
        }
    }

    // N = 1 explicit: columns are the states at +-sqrt(2)/2
    auto u1 = chebyshev_transform(1);
    auto s_plus = chebyshev_state(1, std::sqrt(2.0) / 2.0);
    auto s_minus = chebyshev_state(1, -std::sqrt(2.0) / 2.0);
    CHECK(std::abs(u1(0, 0) - s_plus.amps[0]) <= 1e-12);
    CHECK(std::abs(u1(1, 0) - s_plus.amps[1]) <= 1e-12);
    CHECK(std::abs(u1(0, 1) - s_minus.amps[0]) <= 1e-12);
    CHECK(std::abs(u1(1, 1) - s_minus.amps[1]) <= 1e-12);
}

TEST_CASE("fourier state: circuit replay equals closed form") {
    auto f0 = fourier_state(1, 0.0);
    CHECK(f0.amps[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(f0.amps[1].real() == doctest::Approx(1.0 / std::sqrt(2.0)));

    auto f1 = fourier_state(1, 1.0);
    CHECK(f1.amps[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(f1.amps[1].real() == doctest::Approx(-1.0 / std::sqrt(2.0)));

    std::mt19937_64 rng(17);
    for (int N = 1; N <= 3; ++N) {
        std::uniform_real_distribution<double> u(0.0, static_cast<double>(pow2(N)));
        for (int t = 0; t < 20; ++t) {
            const double x = u(rng);
            auto a = fourier_state(N, x);
            auto b = fourier_state_closed(N, N, x);
            CHECK(vec_err(a.amps, b.amps) <= 1e-14);
        }
    }
}

TEST_CASE("fourier states at integers map to the computational basis") {
    for (int N = 1; N <= 3; ++N) {
        Encoding e = Encoding::fourier(N);
        auto udag = adjoint(e.transform());
        for (std::size_t j = 0; j < e.dim(); ++j) {
            auto st = fourier_state(N, static_cast<double>(j));
            auto back = matvec(udag, st.amps);
            for (std::size_t k = 0; k < back.size(); ++k) {
                const double want = k == j ? 1.0 : 0.0;
                CHECK(std::abs(back[k] - want) <= 1e-10);
            }
        }
    }
}

TEST_CASE("fourier generator entries") {
    auto g1 = fourier_generator(2);
    CHECK(std::abs(g1(0, 0)) == 0.0);
    CHECK(g1(1, 1).imag() == doctest::Approx(M_PI / 2.0));
    CHECK(std::abs(g1(1, 1).real()) == 0.0);
}

TEST_CASE("product basis state") {
    std::mt19937_64 rng(23);

    // Chebyshev: genuinely the (N+1)-qubit encoding
    Encoding c1 = Encoding::chebyshev(1);
    auto c1p = c1.product_basis();
    CHECK(c1p.num_qubits == 2);
    for (int t = 0; t < 10; ++t) {
        const double x = random_in({-1.0, 1.0}, rng);
        CHECK(vec_err(c1p.encoding_state(x).amps, chebyshev_state(2, x).amps) <= 1e-14);
    }

    // Fourier keeps the frequency scale: basis functions T_j^N on N+1 qubits
    Encoding f1 = Encoding::fourier(1);
    auto f1p = f1.product_basis();
    CHECK(f1p.num_qubits == 2);
    CHECK(f1p.scale_qubits == 1);
    for (int t = 0; t < 10; ++t) {
        const double x = random_in({0.0, 2.0}, rng);
        auto st = f1p.encoding_state(x);
        for (std::size_t j = 0; j < 4; ++j) {
            const cdouble want = 0.5 * std::polar(1.0, 2.0 * M_PI * j * x / 2.0);
            CHECK(std::abs(st.amps[j] - want) <= 1e-14);
        }
    }

    // every product tau_j tau_k decomposes exactly in the product basis:
    // load the product at the product-basis nodes and compare pointwise
    for (auto base : {Encoding::chebyshev(2), Encoding::fourier(2)}) {
        auto prod = base.product_basis();
        auto nodes = prod.nodes();
        const auto& ut = prod.transform();
        for (std::size_t j = 0; j < base.dim(); ++j)
            for (std::size_t k = 0; k < base.dim(); ++k) {
                std::vector<cdouble> vals(nodes.size());
                for (std::size_t i = 0; i < nodes.size(); ++i)
                    vals[i] = std::conj(base.basis_fn(j, nodes[i])) *
                              std::conj(base.basis_fn(k, nodes[i]));
                auto coeffs = matvec(ut, vals);  // latent vector interpolating the product
                for (int t = 0; t < 5; ++t) {
                    const double x = random_in(base.domain(), rng);
                    const cdouble want =
                        std::conj(base.basis_fn(j, x)) * std::conj(base.basis_fn(k, x));
                    CHECK(std::abs(prod.decode(coeffs, x) - want) <= 1e-10);
                }
            }
    }
}

TEST_CASE("basis functions are linearly independent at random samples") {
    std::mt19937_64 rng(31);
    for (auto e : {Encoding::chebyshev(3), Encoding::fourier(3)}) {
        const std::size_t m = e.dim();
        Eigen::MatrixXcd a(m, m);
        for (std::size_t i = 0; i < m; ++i) {
            const double x = random_in(e.domain(), rng);
            for (std::size_t j = 0; j < m; ++j) a(i, j) = e.basis_fn(j, x);
        }
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
        const auto& sv = svd.singularValues();
        CHECK(sv(sv.size() - 1) > 1e-8 * sv(0));  // condition-checked full rank
    }
}

TEST_CASE("family amplitude structure") {
    std::mt19937_64 rng(37);
    Encoding ch = Encoding::chebyshev(3);
    Encoding fo = Encoding::fourier(3);
    for (int t = 0; t < 20; ++t) {
        const double xc = random_in(ch.domain(), rng);
        for (const auto& a : ch.encoding_state(xc).amps) CHECK(std::abs(a.imag()) == 0.0);
        const double xf = random_in(fo.domain(), rng);
        for (const auto& a : fo.encoding_state(xf).amps)
            CHECK(std::abs(a) == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-12));
    }
}

TEST_CASE("unity latent vector decodes to 1") {
    std::mt19937_64 rng(41);
    for (auto e : {Encoding::chebyshev(2), Encoding::fourier(2),
                   Encoding::chebyshev(3).product_basis(),
                   Encoding::fourier(2).product_basis()}) {
        auto u = e.unity_coeffs();
        for (int t = 0; t < 10; ++t) {
            const double x = random_in(e.domain(), rng);
            CHECK(std::abs(e.decode(u, x) - 1.0) <= 1e-12);
        }
    }
}
