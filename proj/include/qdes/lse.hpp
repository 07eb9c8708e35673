// Variationless path for linear problems: assemble D f = g from the latent
// operators of the DE terms, append initial-value rows, and solve the dense
// least-squares system classically (rank-revealing complete orthogonal
// decomposition; minimum-norm solution when rank deficient).

#pragma once

#include <Eigen/Dense>

#include "qdes/training.hpp"

namespace qdes {

struct LinearSystem {
    Matrix d;                  // (rows) x 2^N coefficient operator
    std::vector<cdouble> rhs;
    std::vector<std::string> row_labels;  // one label per row block / row
    Encoding column_basis;     // basis of the unknown coefficient vector
    Encoding row_basis;        // basis the rows live on (lifted when products)
    bool lifted = false;
};

namespace detail {

inline void append_rows(LinearSystem& sys, const Matrix& block, const std::string& label) {
    if (sys.d.rows == 0) {
        sys.d = block;
    } else {
        if (sys.d.cols != block.cols) throw usage_error("append_rows: column mismatch");
        Matrix grown(sys.d.rows + block.rows, sys.d.cols);
        std::copy(sys.d.a.begin(), sys.d.a.end(), grown.a.begin());
        std::copy(block.a.begin(), block.a.end(), grown.a.begin() + sys.d.a.size());
        sys.d = std::move(grown);
    }
    for (std::size_t r = 0; r < block.rows; ++r) sys.row_labels.push_back(label);
    sys.rhs.resize(sys.d.rows, cdouble{0.0, 0.0});
}

}  // namespace detail

// Turns a linear 1-d problem into D f = g. f-dependent terms contribute
// operator blocks (derivatives via G^dag, function coefficients via the
// multiplier restricted to the loaded factor); f-independent terms move to
// the right-hand side with opposite sign. If any term involves a product,
// every block is lifted into the product basis through multiplication with
// unity.
inline LinearSystem assemble_lse(const ProblemSpec& spec) {
    spec.validate();
    if (spec.dims() != 1)
        throw config_error("assemble_lse: one-dimensional problems only");
    const Encoding base = spec.encodings()[0];
    const std::size_t m = base.dim();

    bool lifted = false;
    for (const auto& t : spec.terms) {
        if (t.model_power > 1)
            throw config_error("assemble_lse: nonlinear problem unsupported in lse mode");
        if (t.model_power == 1 && (!t.func_name.empty() || !t.func_coeffs.empty()))
            lifted = true;
    }

    const Encoding prod = base.product_basis();
    const auto unity = base.unity_coeffs();

    // lift a base-register latent vector via multiplication with unity
    const auto lift_vec = [&](std::span<const cdouble> v) {
        return multiply_oracle(base, unity, v);
    };
    // operator block: column c of the output is the lifted image of op e_c
    const auto lift_op = [&](const Matrix& op, std::span<const cdouble> factor) {
        Matrix out(2 * m, m);
        std::vector<cdouble> col(m);
        for (std::size_t c = 0; c < m; ++c) {
            for (std::size_t r = 0; r < m; ++r) col[r] = op(r, c);
            auto img = multiply_oracle(base, factor, col);
            for (std::size_t r = 0; r < 2 * m; ++r) out(r, c) = img[r];
        }
        return out;
    };

    LinearSystem sys;
    sys.column_basis = base;
    sys.row_basis = lifted ? prod : base;
    sys.lifted = lifted;

    const std::size_t rows = lifted ? 2 * m : m;
    Matrix dsum(rows, m);
    std::vector<cdouble> gsum(rows, cdouble{0.0, 0.0});

    for (std::size_t ti = 0; ti < spec.terms.size(); ++ti) {
        const auto& t = spec.terms[ti];
        const DETermSpec r = spec.resolve(t);
        const int order = r.deriv_orders.empty() ? 0 : r.deriv_orders[0];
        if (r.model_power == 1) {
            Matrix op = order > 0 ? matpow(adjoint(base.generator()), order)
                                  : Matrix::identity(m);
            Matrix block;
            if (r.factor) {
                auto lf = load_function(base, [&](double x) {
                    const double xs[] = {x};
                    return r.factor(std::span<const double>(xs, 1));
                });
                std::vector<cdouble> fvec(lf.state.amps);
                for (auto& a : fvec) a *= lf.scale;
                block = lift_op(op, fvec);
            } else if (lifted) {
                block = lift_op(op, unity);
            } else {
                block = op;
            }
            for (std::size_t i = 0; i < block.a.size(); ++i)
                dsum.a[i] += t.weight * block.a[i];
        } else {
            // f-independent: latent vector of weight * g(x) (or a constant)
            std::vector<cdouble> vec;
            if (r.factor) {
                auto lf = load_function(base, [&](double x) {
                    const double xs[] = {x};
                    return r.factor(std::span<const double>(xs, 1));
                });
                vec = lf.state.amps;
                for (auto& a : vec) a *= lf.scale;
            } else {
                vec = unity;
            }
            if (order > 0)
                throw config_error("assemble_lse: derivative of an f-independent term");
            if (lifted) vec = lift_vec(vec);
            for (std::size_t i = 0; i < rows; ++i) gsum[i] -= t.weight * vec[i];
        }
    }

    detail::append_rows(sys, dsum, "de-operator");
    sys.rhs = gsum;
    return sys;
}

// One extra row: the prefactor-included bra at x0 (restricted to the column
// basis when the system is lifted), so row . f = f(x0). rhs entry f0.
inline void append_initial_row(LinearSystem& sys, double x0, double f0, double weight = 1.0) {
    const auto bra = sys.column_basis.bra_vector(x0);
    Matrix row(1, sys.d.cols);
    for (std::size_t c = 0; c < bra.size(); ++c) row(0, c) = weight * bra[c];
    detail::append_rows(sys, row, "initial-value");
    sys.rhs.back() = weight * f0;
}

struct LseSolution {
    std::vector<cdouble> coeffs;  // latent coefficient vector of the solution
    double residual = 0.0;        // ||D v - g||_2
    int rank = 0;
    bool rank_deficient = false;  // minimum-norm solution returned
};

inline LseSolution solve_lse(const LinearSystem& sys) {
    if (sys.d.rows == 0) throw usage_error("solve_lse: empty system");
    Eigen::MatrixXcd a(sys.d.rows, sys.d.cols);
    for (std::size_t i = 0; i < sys.d.rows; ++i)
        for (std::size_t j = 0; j < sys.d.cols; ++j) a(i, j) = sys.d(i, j);
    Eigen::VectorXcd b(sys.rhs.size());
    for (std::size_t i = 0; i < sys.rhs.size(); ++i) b(i) = sys.rhs[i];

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(a);
    Eigen::VectorXcd x = cod.solve(b);

    LseSolution sol;
    sol.rank = static_cast<int>(cod.rank());
    sol.rank_deficient = sol.rank < static_cast<int>(sys.d.cols);
    sol.coeffs.resize(sys.d.cols);
    for (std::size_t j = 0; j < sys.d.cols; ++j) sol.coeffs[j] = x(j);
    sol.residual = (a * x - b).norm();
    return sol;
}

}  // namespace qdes
