#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qdes/statevector.hpp>

#include <random>

using namespace qdes;

namespace {

Statevector random_state(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cdouble> amps(pow2(n));
    for (auto& a : amps) a = cdouble{g(rng), g(rng)};
    Statevector s;
    s.num_qubits = n;
    s.amps = std::move(amps);
    return normalized(std::move(s));
}

}  // namespace

TEST_CASE("zero_state prepares e_0") {
    auto s1 = zero_state(1);
    CHECK(s1.amps == std::vector<cdouble>{cdouble{1.0, 0.0}, cdouble{0.0, 0.0}});
    CHECK(s1.is_normalized);

    auto s2 = zero_state(2);
    CHECK(s2.dim() == 4);
    CHECK(s2.amps[0] == cdouble{1.0, 0.0});
    for (std::size_t k = 1; k < 4; ++k) CHECK(s2.amps[k] == cdouble{0.0, 0.0});

    auto s3 = zero_state(3);
    CHECK(s3.dim() == 8);
    CHECK(std::abs(s3.amps[0] - 1.0) == 0.0);

    CHECK_THROWS_AS(zero_state(0), config_error);
    CHECK_THROWS_AS(zero_state(kMaxQubits + 1), config_error);
}

TEST_CASE("tensor follows the a-is-more-significant convention") {
    auto z = zero_state(1);
    auto one = basis_state(1, 1);
    auto t = tensor(z, one);
    CHECK(t.num_qubits == 2);
    CHECK(t.amps[1] == cdouble{1.0, 0.0});  // |01> = index 1

    Statevector plus;
    plus.num_qubits = 1;
    plus.amps = {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    plus.is_normalized = true;
    auto t2 = tensor(plus, z);
    CHECK(t2.amps[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(std::abs(t2.amps[1]) == 0.0);
    CHECK(t2.amps[2].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(std::abs(t2.amps[3]) == 0.0);
}

TEST_CASE("tensor norm is multiplicative for random states") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 10; ++trial) {
        auto a = random_state(2, rng);
        auto b = random_state(3, rng);
        for (auto& x : a.amps) x *= 1.7;  // unnormalized on purpose
        a.is_normalized = false;
        auto t = tensor(a, b);
        CHECK(state_norm(t) == doctest::Approx(state_norm(a) * state_norm(b)).epsilon(1e-12));
    }
}

TEST_CASE("tensor rejects register overflow") {
    CHECK_THROWS_AS(tensor(zero_state(8), zero_state(8)), config_error);
}

TEST_CASE("inner products") {
    auto z = zero_state(1);
    auto one = basis_state(1, 1);
    CHECK(inner_product(z, z) == cdouble{1.0, 0.0});
    CHECK(inner_product(z, one) == cdouble{0.0, 0.0});

    Statevector plus;
    plus.num_qubits = 1;
    plus.amps = {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    CHECK(inner_product(plus, z).real() == doctest::Approx(1.0 / std::sqrt(2.0)));

    CHECK_THROWS_AS(inner_product(zero_state(1), zero_state(2)), usage_error);

    // bra side is conjugated
    Statevector i1;
    i1.num_qubits = 1;
    i1.amps = {cdouble{0.0, 1.0}, 0.0};
    CHECK(inner_product(i1, z) == cdouble{0.0, -1.0});
}

TEST_CASE("project collapses and reports probabilities") {
    auto s00 = zero_state(2);
    const int q0[] = {0};
    auto [p0, prob0] = project(s00, q0, 0);
    CHECK(prob0 == doctest::Approx(1.0));
    CHECK(p0.amps[0] == cdouble{1.0, 0.0});

    Statevector plus;
    plus.num_qubits = 1;
    plus.amps = {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    auto [pz, probz] = project(plus, q0, 0);
    CHECK(probz == doctest::Approx(0.5));
    CHECK(pz.amps[0].real() == doctest::Approx(1.0));

    // Bell state, first qubit (qubit 0) onto 1 -> |11>
    Statevector bell;
    bell.num_qubits = 2;
    bell.amps = {1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0)};
    auto [b1, pb] = project(bell, q0, 1);
    CHECK(pb == doctest::Approx(0.5));
    CHECK(b1.amps[3].real() == doctest::Approx(1.0));

    CHECK_THROWS_AS(project(zero_state(1), q0, 1), numerical_error);
}

TEST_CASE("projection probabilities over a complete outcome set sum to 1") {
    std::mt19937_64 rng(7);
    auto s = random_state(3, rng);
    const int reg[] = {0, 2};
    double total = 0.0;
    for (std::uint64_t out = 0; out < 4; ++out) {
        try {
            total += project(s, reg, out).second;
        } catch (const numerical_error&) {
            // zero-probability branch contributes 0
        }
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sample is deterministic and multinomial") {
    auto z = zero_state(2);
    auto counts = sample(z, 100, 1);
    CHECK(counts.size() == 1);
    CHECK(counts[0] == 100);

    Statevector plus;
    plus.num_qubits = 1;
    plus.amps = {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    plus.is_normalized = true;
    const std::uint64_t shots = 100000;
    auto c = sample(plus, shots, 99);
    const double freq = static_cast<double>(c[0]) / static_cast<double>(shots);
    const double sigma = std::sqrt(0.25 / static_cast<double>(shots));
    CHECK(std::abs(freq - 0.5) <= 5.0 * sigma);

    CHECK(sample(plus, 1000, 5) == sample(plus, 1000, 5));

    Statevector un = plus;
    un.amps[0] *= 2.0;
    un.is_normalized = false;
    CHECK_THROWS_AS(sample(un, 10, 0), usage_error);
}
