#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qdes/training.hpp>

#include <random>

using namespace qdes;

namespace {

Statevector random_state(int n, std::mt19937_64& rng, bool real_only = false) {
    std::normal_distribution<double> g(0.0, 1.0);
    Statevector s;
    s.num_qubits = n;
    s.amps.resize(pow2(n));
    for (auto& a : s.amps) a = real_only ? cdouble{g(rng), 0.0} : cdouble{g(rng), g(rng)};
    return normalized(std::move(s));
}

Circuit random_gate_circuit(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    Circuit c(n);
    for (int layer = 0; layer < 3; ++layer) {
        for (int q = 0; q < n; ++q) c.add(Gate::ry(q, u(rng)));
        for (int q = 0; q < n; ++q) c.add(Gate::rz(q, u(rng)));
        for (int q = 0; q + 1 < n; ++q) c.add(Gate::cnot(q, q + 1));
    }
    return c;
}

Model random_model(const ProblemEngine& eng, std::uint64_t seed) {
    return eng.initial_model(seed);
}

void check_gradient_against_fd(const ProblemSpec& spec, std::uint64_t seed) {
    ProblemEngine eng(spec);
    Model m = random_model(eng, seed);
    auto [bd, grad] = eng.evaluate(m);
    CHECK(std::isfinite(bd.total));
    const auto fd = finite_difference_gradient(eng, m);
    REQUIRE(fd.size() == grad.size());
    const double scale = std::max(1.0, std::abs(bd.total));
    for (std::size_t slot = 0; slot < grad.size(); ++slot)
        CHECK(std::abs(grad[slot] - fd[slot]) <= 1e-4 * std::max(scale, std::abs(fd[slot])));
}

}  // namespace

TEST_CASE("total_loss composition") {
    CHECK(total_loss(4.0, 0.0, 0.0, 0.0, 0.5, 10.0, 1.0) == doctest::Approx(2.0));
    CHECK(total_loss(0.0, 0.0, 0.0, 0.0, 0.5, 10.0, 1.0) == 0.0);
    CHECK(total_loss(3.0, 2.0, 1.0, 4.0, 1.0, 10.0, 1.0) ==
          doctest::Approx(3.0 + 10.0 * 3.0 + 4.0));
    // tiny negative l_de from roundoff is clamped
    CHECK(total_loss(-1e-15, 0.0, 0.0, 0.0, 0.5, 10.0, 1.0) == 0.0);
}

TEST_CASE("loss_init") {
    Model m = Model::make({Encoding::chebyshev(3)}, 2);
    m.use_shift = true;
    m.theta_scale = 0.0;
    m.theta_shift = 2.0;  // f == 2 everywhere
    const double x0[] = {0.0};
    CHECK(loss_init(m, x0, 2.0, 10.0) == doctest::Approx(0.0));
    CHECK(loss_init(m, x0, 1.0, 10.0) == doctest::Approx(10.0));
}

TEST_CASE("loss_data") {
    Model m = Model::make({Encoding::chebyshev(3)}, 2);
    m.use_shift = true;
    m.theta_scale = 0.0;
    m.theta_shift = 1.0;  // f == 1
    CHECK(loss_data(m, {}, 1.0) == 0.0);
    CHECK(loss_data(m, {{{0.3}, 1.0}}, 1.0) == doctest::Approx(0.0));
    CHECK(loss_data(m, {{{0.3}, 2.0}, {{-0.4}, 0.0}}, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("loss_boundary") {
    Model m = Model::make({Encoding::chebyshev(2), Encoding::chebyshev(2)}, 2);
    m.use_shift = true;
    m.theta_scale = 0.0;
    m.theta_shift = 1.0;  // f == 1
    BoundaryCondition bc{1, 0.0, 1.0, 21};
    CHECK(loss_boundary(m, bc) == doctest::Approx(0.0));

    m.theta_shift = 1.5;  // constant offset 0.5 at 21 points
    CHECK(loss_boundary(m, bc) == doctest::Approx(21 * 0.25));

    // definitional equivalence with loss_data on the boundary tuples
    std::vector<std::pair<std::vector<double>, double>> tuples;
    for (const auto& pt : boundary_points(m, bc)) tuples.emplace_back(pt, bc.value);
    CHECK(loss_boundary(m, bc) == doctest::Approx(loss_data(m, tuples, 1.0)).epsilon(1e-12));
}

TEST_CASE("loss_de basics and the direct-norm oracle") {
    std::mt19937_64 rng(3);
    auto v = random_state(3, rng);

    MixtureState plus = MixtureState::single(1.0, v);
    MixtureState minus = MixtureState::single(-1.0, v);
    CHECK(loss_de({plus, minus}) == doctest::Approx(0.0).epsilon(1e-12));

    MixtureState alpha = MixtureState::single(cdouble{0.0, 2.0}, v);
    CHECK(loss_de({alpha}) == doctest::Approx(4.0));

    for (int trial = 0; trial < 10; ++trial) {
        std::vector<MixtureState> terms;
        for (int t = 0; t < 3; ++t) {
            MixtureState ms;
            ms.num_qubits = 3;
            ms.add_term(cdouble{std::normal_distribution<double>()(rng),
                                std::normal_distribution<double>()(rng)},
                        random_state(3, rng));
            ms.add_term(cdouble{std::normal_distribution<double>()(rng), 0.0},
                        random_state(3, rng));
            terms.push_back(std::move(ms));
        }
        const double pairwise = loss_de(terms);
        const double direct = loss_de_direct(terms);
        CHECK(std::abs(pairwise - direct) <= 1e-10 * std::max(1.0, direct));
        CHECK(pairwise >= -1e-12);
    }
}

TEST_CASE("analytic solution loaded as the model nearly kills the DE loss") {
    ProblemSpec spec = preset("linear_damped");
    ProblemEngine eng(spec);
    auto lf = load_function(Encoding::chebyshev(4), [](double x) {
        return std::exp(-x) * std::cos(2.0 * M_PI * x);
    });
    // The 16-node interpolant of exp(-x)cos(2 pi x) leaves a basis-truncation
    // residual in the DE loss of 1.0475523578e-06 (frozen from an independent
    // Chebyshev-series computation of (interp f)' + interp g).
    auto bd = eng.losses_for_mixture(MixtureState::single(lf.scale, lf.state));
    CHECK(bd.l_de <= 1.1e-6);
    CHECK(bd.l_de == doctest::Approx(1.0475523578e-06).epsilon(1e-3));
    CHECK(bd.l_init <= 1e-10);
}

TEST_CASE("hadamard test equals inner_product in exact mode") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto cu = random_gate_circuit(3, rng);
        auto cv = random_gate_circuit(3, rng);
        auto su = replay(cu, zero_state(3)).state;
        auto sv = replay(cv, zero_state(3)).state;
        const cdouble z = inner_product(su, sv);
        CHECK(hadamard_test(cu, cv, OverlapPart::Real) == doctest::Approx(z.real()).epsilon(1e-12));
        CHECK(hadamard_test(cu, cv, OverlapPart::Imaginary) ==
              doctest::Approx(z.imag()).epsilon(1e-12));
    }

    auto c = random_gate_circuit(2, rng);
    CHECK(hadamard_test(c, c, OverlapPart::Real) == doctest::Approx(1.0).epsilon(1e-12));

    // orthogonal preparations
    Circuit id(1);
    Circuit flip(1);
    flip.add(Gate::ry(0, M_PI));
    CHECK(hadamard_test(id, flip, OverlapPart::Real) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("hadamard test shot noise stays within binomial bounds") {
    std::mt19937_64 rng(11);
    const long shots = 100000;
    for (int trial = 0; trial < 20; ++trial) {
        auto cu = random_gate_circuit(3, rng);
        auto cv = random_gate_circuit(3, rng);
        const double exact = hadamard_test(cu, cv, OverlapPart::Real);
        const double est = hadamard_test(cu, cv, OverlapPart::Real, shots, 1000 + trial);
        const double sigma = std::sqrt(std::max(1e-12, 1.0 - exact * exact) /
                                       static_cast<double>(shots));
        CHECK(std::abs(est - exact) <= 5.0 * sigma + 1.0 / static_cast<double>(shots));
    }
}

TEST_CASE("shot-mode loss converges to the exact loss like 1/sqrt(shots)") {
    ProblemSpec spec = preset("nonlinear_riccati");
    ProblemEngine eng(spec);
    Model m = eng.initial_model(5);
    const double exact = eng.losses(m).l_de;

    std::mt19937_64 rng(21);
    const auto mad = [&](long shots) {
        double acc = 0.0;
        for (int t = 0; t < 20; ++t) {
            OverlapMode mode{shots, &rng};
            acc += std::abs(eng.losses(m, mode).l_de - exact);
        }
        return acc / 20.0;
    };
    const double mad_small = mad(500);
    const double mad_big = mad(500 * 16);
    CHECK(mad_small > 0.0);
    // expected ratio 4, accepted within a factor of 3
    CHECK(mad_small / mad_big >= 4.0 / 3.0);
    CHECK(mad_small / mad_big <= 12.0);
}

TEST_CASE("adam_step algebra") {
    TrainConfig cfg;
    cfg.learning_rate = 0.005;

    AdamState st;
    std::vector<double> params = {1.0, -2.0};
    adam_step(st, params, std::vector<double>{0.0, 0.0}, cfg);
    CHECK(params[0] == 1.0);
    CHECK(params[1] == -2.0);

    AdamState st2;
    std::vector<double> p2 = {0.0};
    adam_step(st2, p2, std::vector<double>{1.0}, cfg);
    CHECK(p2[0] == doctest::Approx(-0.005).epsilon(1e-6));

    // two identical steps shrink the increment monotonically
    AdamState st3;
    std::vector<double> p3 = {0.0};
    adam_step(st3, p3, std::vector<double>{1.0}, cfg);
    const double d1 = std::abs(p3[0]);
    const double before = p3[0];
    adam_step(st3, p3, std::vector<double>{1.0}, cfg);
    const double d2 = std::abs(p3[0] - before);
    CHECK(d2 <= d1);

    AdamState st4;
    std::vector<double> p4 = {0.0, 0.0};
    CHECK_THROWS_AS(adam_step(st4, p4, std::vector<double>{1.0}, cfg), usage_error);
}

TEST_CASE("parameter-shift gradients match finite differences on the presets") {
    check_gradient_against_fd(preset("linear_damped"), 11);
    check_gradient_against_fd(preset("nonlinear_riccati"), 12);
    check_gradient_against_fd(preset("multidim_2d"), 13);
    ProblemSpec shifted = preset("shifted_linear");
    check_gradient_against_fd(shifted, 14);
    shifted.use_shift = false;  // regular scaled variant
    check_gradient_against_fd(shifted, 15);
}

TEST_CASE("gradient vanishes for parameters the loss ignores") {
    // a pure data-fit problem with zeta = 0 ignores everything
    ProblemSpec spec = preset("linear_damped");
    spec.train.zeta = 0.0;
    spec.terms = {TermConfig{1.0, {}, 1, "", {}}};  // L_DE = theta_s^2 only
    spec.initial.reset();
    ProblemEngine eng(spec);
    Model m = eng.initial_model(3);
    m.theta_scale = 0.7;
    auto [bd, grad] = eng.evaluate(m);
    CHECK(bd.l_de == doctest::Approx(0.49));
    // L depends only on theta_s; every angle gradient is ~0
    for (int i = 0; i < m.ansatz.parameter_count(); ++i)
        CHECK(std::abs(grad[i]) <= 1e-10);
    CHECK(std::abs(grad[m.ansatz.parameter_count()] -
                   0.5 * std::pow(0.49, -0.5) * 2.0 * 0.7) <= 1e-8);
}

TEST_CASE("train: zero epochs, determinism, loss decrease") {
    ProblemSpec spec = preset("linear_damped");

    TrainConfig cfg = spec.train;
    cfg.epochs = 0;
    cfg.seed = 42;
    auto rep0 = train(spec, cfg);
    CHECK(rep0.history.size() == 1);
    CHECK(rep0.epochs_run == 0);

    cfg.epochs = 40;
    auto rep1 = train(spec, cfg);
    auto rep2 = train(spec, cfg);
    CHECK(rep1.history.size() == rep2.history.size());
    for (std::size_t e = 0; e < rep1.history.size(); ++e) {
        CHECK(rep1.history[e].total == rep2.history[e].total);  // bitwise determinism
        CHECK(rep1.history[e].l_de == rep2.history[e].l_de);
    }
    CHECK(rep1.history.back().total < rep1.history.front().total);
    CHECK(rep1.best_total <= rep1.history.front().total);

    double minimum = std::numeric_limits<double>::infinity();
    for (const auto& bd : rep1.history) minimum = std::min(minimum, bd.total);
    CHECK(rep1.best_total == minimum);
}
