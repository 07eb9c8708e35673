// Loss assembly from pairwise state overlaps, Hadamard-test overlap
// estimation, parameter-shift gradients, Adam and the training loop.
//
// Gradients: RY angles use the exact two-point shift (+-pi/2) applied per
// ansatz occurrence inside each DE term (the terms are linear in every
// occurrence, so the product rule reduces to occurrence-wise shifted builds);
// theta_scale / theta_shift are differentiated analytically by replacing one
// occurrence with the corresponding coefficient-derivative mixture.

#pragma once

#include <chrono>
#include <limits>

#include "qdes/problem.hpp"

namespace qdes {

struct LossBreakdown {
    double l_de = 0.0;    // raw ||sum of DE term states||^2
    double l_init = 0.0;  // raw squared residuals (weights applied in `total`)
    double l_bc = 0.0;
    double l_data = 0.0;
    double total = 0.0;
    int epoch = 0;
};

// (l_de)^p + eta (l_init + l_bc) + zeta l_data; tiny negative l_de from
// roundoff is clamped before the power.
inline double total_loss(double l_de, double l_init, double l_bc, double l_data, double p,
                         double eta, double zeta) {
    return std::pow(std::max(0.0, l_de), p) + eta * (l_init + l_bc) + zeta * l_data;
}

inline double loss_init(const Model& m, std::span<const double> x0, double f0, double eta) {
    return eta * std::norm(m.eval(x0) - f0);
}

inline double loss_data(const Model& m,
                        const std::vector<std::pair<std::vector<double>, double>>& points,
                        double zeta) {
    double acc = 0.0;
    for (const auto& [pt, v] : points) acc += std::norm(m.eval(pt) - v);
    return zeta * acc;
}

// Uniform samples of the free dimension with the constrained one pinned at
// bc.at (2-d problems).
inline std::vector<std::vector<double>> boundary_points(const Model& m,
                                                        const BoundaryCondition& bc) {
    if (m.dims() != 2) throw usage_error("boundary_points: 2-d problems only");
    const int free_dim = bc.dim == 0 ? 1 : 0;
    const auto dom = m.encodings[free_dim].domain();
    std::vector<std::vector<double>> pts;
    for (int j = 0; j < bc.num_points; ++j) {
        const double s = bc.num_points == 1
                             ? 0.5
                             : static_cast<double>(j) / static_cast<double>(bc.num_points - 1);
        std::vector<double> p(2);
        p[free_dim] = dom.first + s * (dom.second - dom.first);
        p[bc.dim] = bc.at;
        pts.push_back(std::move(p));
    }
    return pts;
}

inline double loss_boundary(const Model& m, const BoundaryCondition& bc) {
    double acc = 0.0;
    for (const auto& pt : boundary_points(m, bc)) acc += std::norm(m.eval(pt) - bc.value);
    return acc;
}

// ---------------------------------------------------------------------------
// overlap estimation

struct OverlapMode {
    long shots = 0;  // 0 = exact
    std::mt19937_64* rng = nullptr;
};

namespace detail {

inline double sample_expectation(double exact, long shots, std::mt19937_64& rng) {
    const double p0 = std::clamp((1.0 + exact) / 2.0, 0.0, 1.0);
    std::binomial_distribution<long> bin(shots, p0);
    return 2.0 * static_cast<double>(bin(rng)) / static_cast<double>(shots) - 1.0;
}

// Statistics of an ideal Hadamard test on the exact overlap of two prepared
// states (real part from <X>, imaginary from <Y>).
inline cdouble sampled_overlap(const Statevector& a, const Statevector& b, long shots,
                               std::mt19937_64& rng, bool need_imag) {
    const cdouble z = inner_product(a, b);
    const double re = sample_expectation(z.real(), shots, rng);
    const double im = need_imag ? sample_expectation(z.imag(), shots, rng) : 0.0;
    return {re, im};
}

inline bool mixture_is_real(const MixtureState& ms) {
    for (const auto& [c, s] : ms.terms) {
        if (std::abs(c.imag()) > 1e-15) return false;
        for (const auto& a : s.amps)
            if (std::abs(a.imag()) > 1e-15) return false;
    }
    return true;
}

}  // namespace detail

// Real part of the double sum over pairwise component overlaps with
// conjugated bra coefficients. Exact mode evaluates inner products; shot mode
// draws Hadamard-test statistics per overlap (diagonal overlaps are 1 by
// normalization and enter exactly).
inline double loss_de(const std::vector<MixtureState>& terms, const OverlapMode& mode = {}) {
    std::vector<std::pair<cdouble, const Statevector*>> comps;
    int nq = -1;
    for (const auto& t : terms) {
        if (nq < 0) nq = t.num_qubits;
        if (t.num_qubits != nq) throw usage_error("loss_de: term registers differ");
        for (const auto& [c, s] : t.terms) comps.emplace_back(c, &s);
    }
    if (mode.shots <= 0) {
        double acc = 0.0;
        for (const auto& [ca, sa] : comps)
            for (const auto& [cb, sb] : comps)
                acc += (std::conj(ca) * cb * inner_product(*sa, *sb)).real();
        return acc;
    }
    if (!mode.rng) throw usage_error("loss_de: shot mode needs an rng");
    bool need_imag = false;
    for (const auto& t : terms) need_imag = need_imag || !detail::mixture_is_real(t);
    double acc = 0.0;
    for (std::size_t a = 0; a < comps.size(); ++a) {
        acc += std::norm(comps[a].first);  // <s|s> = 1
        for (std::size_t b = a + 1; b < comps.size(); ++b) {
            const cdouble z = detail::sampled_overlap(*comps[a].second, *comps[b].second,
                                                      mode.shots, *mode.rng, need_imag);
            acc += 2.0 * (std::conj(comps[a].first) * comps[b].first * z).real();
        }
    }
    return acc;
}

// Norm-based route ||sum_l alpha_l |Delta_l>||^2 on the summed amplitude
// vector; consistency oracle for loss_de.
inline double loss_de_direct(const std::vector<MixtureState>& terms) {
    if (terms.empty()) return 0.0;
    std::vector<cdouble> v(pow2(terms[0].num_qubits), cdouble{0.0, 0.0});
    for (const auto& t : terms) {
        auto u = t.collapse();
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += u[k];
    }
    double acc = 0.0;
    for (const auto& a : v) acc += std::norm(a);
    return acc;
}

enum class OverlapPart { Real, Imaginary };

// Ancilla-based overlap circuit: H on the ancilla, prep_u anti-controlled,
// prep_v controlled, (S^dag for the imaginary part), H, <Z>. Exact mode
// (shots <= 0) returns the analytic expectation; shot mode draws the ancilla
// statistics. Matches Re/Im of <0|U^dag V|0>.
inline double hadamard_test(const Circuit& prep_u, const Circuit& prep_v, OverlapPart part,
                            long shots = 0, std::uint64_t seed = 0) {
    if (prep_u.num_qubits != prep_v.num_qubits)
        throw usage_error("hadamard_test: register sizes differ");
    const int n = prep_u.num_qubits;
    const int anc = n;
    Circuit c(n + 1);
    c.add(Gate::h(anc));
    const auto add_controlled = [&](const Circuit& prep, int value) {
        for (const auto& e : prep.elements) {
            if (!std::holds_alternative<Gate>(e))
                throw usage_error("hadamard_test: prep circuits must be unitary gate circuits");
            Gate g = std::get<Gate>(e);
            g.controlled_on({anc}, {value});
            c.add(std::move(g));
        }
    };
    add_controlled(prep_u, 0);
    add_controlled(prep_v, 1);
    if (part == OverlapPart::Imaginary)
        c.add(Gate::phase(anc, -M_PI / 2.0));  // S^dag
    c.add(Gate::h(anc));
    auto out = replay(c, zero_state(n + 1)).state;
    double p0 = 0.0;
    const std::uint64_t bit = std::uint64_t{1} << anc;
    for (std::size_t k = 0; k < out.dim(); ++k)
        if (!(k & bit)) p0 += std::norm(out.amps[k]);
    const double exact = 2.0 * p0 - 1.0;
    if (shots <= 0) return exact;
    std::mt19937_64 rng(seed);
    return detail::sample_expectation(exact, shots, rng);
}

// ---------------------------------------------------------------------------
// optimizer

struct AdamState {
    std::vector<double> m, v;
    long t = 0;
};

inline void adam_step(AdamState& st, std::vector<double>& params, std::span<const double> grads,
                      const TrainConfig& cfg) {
    if (st.m.empty()) {
        st.m.assign(params.size(), 0.0);
        st.v.assign(params.size(), 0.0);
    }
    if (st.m.size() != params.size() || grads.size() != params.size())
        throw usage_error("adam_step: dimension mismatch");
    st.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        st.m[i] = cfg.adam_beta1 * st.m[i] + (1.0 - cfg.adam_beta1) * grads[i];
        st.v[i] = cfg.adam_beta2 * st.v[i] + (1.0 - cfg.adam_beta2) * grads[i] * grads[i];
        const double mhat = st.m[i] / bc1;
        const double vhat = st.v[i] / bc2;
        params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
    }
}

// ---------------------------------------------------------------------------
// problem engine

class ProblemEngine {
  public:
    explicit ProblemEngine(ProblemSpec spec,
                           MultiplierBackend backend = MultiplierBackend::Oracle)
        : spec_(std::move(spec)), backend_(backend) {
        spec_.validate();
        encs_ = spec_.encodings();
        folds_ = spec_.common_folds();
        for (const auto& t : spec_.terms) resolved_.push_back(spec_.resolve(t));
        if (spec_.dims() == 1) term_enc_ = lifted_encoding(encs_[0], folds_);
    }

    const ProblemSpec& spec() const { return spec_; }
    const Encoding& term_encoding() const { return *term_enc_; }
    int folds() const { return folds_; }

    Model initial_model(std::uint64_t seed) const {
        Model m = Model::make(encs_, spec_.rotation_layers);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-M_PI, M_PI);
        for (auto& t : m.theta) t = u(rng);
        m.theta_scale = spec_.train.scale_init;
        m.theta_shift = spec_.train.shift_init;
        m.use_shift = spec_.use_shift;
        return m;
    }

    std::vector<MixtureState> term_states(const Model& m) const {
        std::vector<MixtureState> out;
        for (const auto& spec : resolved_) out.push_back(build_de_term(m, spec, folds_, nullptr, backend_));
        return out;
    }

    LossBreakdown losses(const Model& m, const OverlapMode& mode = {}) const {
        return assemble_losses(term_states(m), m.mixture(), mode);
    }

    // Losses with the model replaced by a fixed latent mixture (used for the
    // LSE cross-check).
    LossBreakdown losses_for_mixture(const MixtureState& fixed) const {
        std::vector<MixtureState> states;
        Model shell = Model::make(encs_, spec_.rotation_layers);
        for (const auto& spec : resolved_) {
            std::vector<MixtureState> occ(spec.model_power, fixed);
            states.push_back(build_de_term(shell, spec, folds_, &occ, backend_));
        }
        return assemble_losses(states, fixed, OverlapMode{});
    }

    // Model evaluation at a point; shot mode estimates each component
    // overlap with the encoding state via Hadamard-test statistics.
    cdouble eval_est(const MixtureState& ms, std::span<const double> x,
                     const OverlapMode& mode) const {
        if (mode.shots <= 0) return eval_fixed(ms, x);
        Statevector bra;
        double pref = 1.0;
        bool first = true;
        for (int d = 0; d < spec_.dims(); ++d) {
            auto part = encs_[d].encoding_state(x[d]);
            pref *= encs_[d].norm_prefactor(x[d]);
            bra = first ? std::move(part) : tensor(bra, part);
            first = false;
        }
        const bool need_imag = !detail::mixture_is_real(ms);
        cdouble acc{0.0, 0.0};
        for (const auto& [c, s] : ms.terms)
            acc += c * detail::sampled_overlap(bra, s, mode.shots, *mode.rng, need_imag);
        return pref * acc;
    }

    std::pair<LossBreakdown, std::vector<double>> evaluate(const Model& m,
                                                           const OverlapMode& mode = {}) const {
        auto states = term_states(m);
        const MixtureState model_mix = m.mixture();
        LossBreakdown bd = assemble_losses(states, model_mix, mode);

        const int num_angles = m.ansatz.parameter_count();
        const bool with_shift = m.use_shift;
        std::vector<double> grad(num_angles + 1 + (with_shift ? 1 : 0), 0.0);

        const TrainConfig& tc = spec_.train;
        const double lde = std::max(bd.l_de, 0.0);
        const double de_chain =
            lde > 1e-300 ? tc.loss_power * std::pow(lde, tc.loss_power - 1.0) : 0.0;

        // V = sum of all term states, both as a mixture (sampled route) and
        // as a collapsed vector (exact route)
        MixtureState vmix;
        vmix.num_qubits = states[0].num_qubits;
        for (const auto& t : states)
            for (const auto& [c, s] : t.terms) vmix.add_term(c, s);
        const std::vector<cdouble> vsum = vmix.collapse();

        // Re<V|dV>, exact or through sampled pairwise overlaps
        const auto de_cross = [&](const MixtureState& dv) {
            if (mode.shots <= 0) {
                return vec_dot(vsum, dv.collapse()).real();
            }
            const bool need_imag =
                !detail::mixture_is_real(vmix) || !detail::mixture_is_real(dv);
            double acc = 0.0;
            for (const auto& [ca, sa] : vmix.terms)
                for (const auto& [cb, sb] : dv.terms)
                    acc += (std::conj(ca) * cb *
                            detail::sampled_overlap(sa, sb, mode.shots, *mode.rng, need_imag))
                               .real();
            return acc;
        };

        // residuals of the pointwise losses
        struct PointResidual {
            std::vector<double> x;
            cdouble resid;  // f(x) - target
            double weight;  // eta or zeta
        };
        std::vector<PointResidual> residuals;
        if (spec_.initial)
            residuals.push_back({spec_.initial->point,
                                 eval_est(model_mix, spec_.initial->point, mode) -
                                     spec_.initial->value,
                                 tc.eta});
        if (spec_.boundary)
            for (const auto& pt : boundary_points(m, *spec_.boundary))
                residuals.push_back(
                    {pt, eval_est(model_mix, pt, mode) - spec_.boundary->value, tc.eta});
        for (const auto& [pt, v] : spec_.data)
            residuals.push_back({pt, eval_est(model_mix, pt, mode) - v, tc.zeta});

        // dV for one occurrence-replacement across every term
        const auto occurrence_dv = [&](const MixtureState& docc) {
            MixtureState dv;
            dv.num_qubits = vmix.num_qubits;
            for (std::size_t t = 0; t < resolved_.size(); ++t) {
                const int p = resolved_[t].model_power;
                if (p == 0) continue;
                std::vector<MixtureState> occ(p, model_mix);
                for (int o = 0; o < p; ++o) {
                    occ[o] = docc;
                    auto term = build_de_term(m, resolved_[t], folds_, &occ, backend_);
                    occ[o] = model_mix;
                    for (const auto& [c, s] : term.terms) dv.add_term(c, s);
                }
            }
            return dv;
        };

        // -- RY angles: exact two-point shift per ansatz occurrence. At the
        // state level the shift is +-pi with weight 1/4:
        //   d/dt RY(t)|.> = [RY(t + pi) - RY(t - pi)]|.> / 4,
        // which reduces to the usual +-pi/2 overlap rule when the parameter
        // appears once on each side of an overlap.
        std::vector<double> theta = m.theta;
        for (int i = 0; i < num_angles; ++i) {
            const double saved = theta[i];
            theta[i] = saved + M_PI;
            const MixtureState occ_p = m.mixture_with(m.ansatz.prepare(theta));
            theta[i] = saved - M_PI;
            const MixtureState occ_m = m.mixture_with(m.ansatz.prepare(theta));
            theta[i] = saved;

            MixtureState dv = mix_sum(occurrence_dv(occ_p).scaled(0.25),
                                      occurrence_dv(occ_m).scaled(-0.25));
            double g = 2.0 * de_cross(dv) * de_chain;
            for (const auto& r : residuals) {
                // f = theta_s N<x|psi> + theta_sh: the shift part drops out
                // of the +- difference
                const cdouble df =
                    0.25 * (eval_est(occ_p, r.x, mode) - eval_est(occ_m, r.x, mode));
                g += r.weight * 2.0 * (std::conj(r.resid) * df).real();
            }
            grad[i] = g;
        }

        // -- theta_scale / theta_shift: analytic coefficient derivatives
        const auto coeff_grad = [&](const MixtureState& docc, bool dshift) {
            MixtureState dv = occurrence_dv(docc);
            double g = 2.0 * de_cross(dv) * de_chain;
            for (const auto& r : residuals) {
                const cdouble df = dshift ? cdouble{1.0, 0.0} : eval_est(docc, r.x, mode);
                g += r.weight * 2.0 * (std::conj(r.resid) * df).real();
            }
            return g;
        };
        grad[num_angles] = coeff_grad(MixtureState::single(1.0, m.ansatz_state()), false);
        if (with_shift) grad[num_angles + 1] = coeff_grad(m.unity_mixture(), true);
        return {bd, grad};
    }

  private:
    LossBreakdown assemble_losses(const std::vector<MixtureState>& states,
                                  const MixtureState& model_mix, const OverlapMode& mode) const {
        LossBreakdown bd;
        bd.l_de = loss_de(states, mode);
        const TrainConfig& tc = spec_.train;
        if (spec_.initial)
            bd.l_init = std::norm(eval_est(model_mix, spec_.initial->point, mode) -
                                  spec_.initial->value);
        if (spec_.boundary) {
            Model shell = Model::make(encs_, spec_.rotation_layers);
            for (const auto& pt : boundary_points(shell, *spec_.boundary))
                bd.l_bc += std::norm(eval_est(model_mix, pt, mode) - spec_.boundary->value);
        }
        for (const auto& [pt, v] : spec_.data)
            bd.l_data += std::norm(eval_est(model_mix, pt, mode) - v);
        bd.total = total_loss(bd.l_de, bd.l_init, bd.l_bc, bd.l_data, tc.loss_power, tc.eta,
                              tc.zeta);
        return bd;
    }

    cdouble eval_fixed(const MixtureState& ms, std::span<const double> x) const {
        Model shell = Model::make(encs_, spec_.rotation_layers);
        return shell.eval_mixture(ms, x);
    }

    ProblemSpec spec_;
    MultiplierBackend backend_;
    std::vector<Encoding> encs_;
    int folds_ = 0;
    std::vector<DETermSpec> resolved_;
    std::optional<Encoding> term_enc_;
};

// Central finite-difference gradient of the total loss over the packed
// parameter vector [theta...; theta_scale; theta_shift (when shifted)].
// Independent checker for the parameter-shift route; exact overlaps only.
inline std::vector<double> finite_difference_gradient(const ProblemEngine& eng, const Model& m,
                                                      double h = 1e-6) {
    const int num_angles = m.ansatz.parameter_count();
    const int n = num_angles + 1 + (m.use_shift ? 1 : 0);
    std::vector<double> grad(n);
    for (int slot = 0; slot < n; ++slot) {
        Model hi = m, lo = m;
        if (slot < num_angles) {
            hi.theta[slot] += h;
            lo.theta[slot] -= h;
        } else if (slot == num_angles) {
            hi.theta_scale += h;
            lo.theta_scale -= h;
        } else {
            hi.theta_shift += h;
            lo.theta_shift -= h;
        }
        grad[slot] = (eng.losses(hi).total - eng.losses(lo).total) / (2.0 * h);
    }
    return grad;
}

// ---------------------------------------------------------------------------
// training loop

struct TrainingReport {
    std::vector<LossBreakdown> history;
    std::vector<double> best_theta;
    double best_scale = 1.0;
    double best_shift = 0.0;
    double best_total = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    Model model;  // at the best parameters
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    int epochs_run = 0;
    bool diverged = false;
    std::string diagnostic;
    // vs the analytic solution on a 101-per-dimension grid, when registered
    double rmse = std::numeric_limits<double>::quiet_NaN();
    double max_abs_error = std::numeric_limits<double>::quiet_NaN();
    double deriv_rmse = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline std::vector<std::vector<double>> evaluation_grid(const std::vector<Encoding>& encs,
                                                        int per_dim) {
    std::vector<std::vector<double>> axes;
    for (const auto& e : encs) {
        const auto dom = e.domain();
        std::vector<double> ax(per_dim);
        for (int i = 0; i < per_dim; ++i)
            ax[i] = dom.first + (dom.second - dom.first) * static_cast<double>(i) /
                                    static_cast<double>(per_dim - 1);
        axes.push_back(std::move(ax));
    }
    std::vector<std::vector<double>> pts;
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        std::vector<double> p(axes.size());
        for (std::size_t d = 0; d < axes.size(); ++d) p[d] = axes[d][idx[d]];
        pts.push_back(std::move(p));
        int d = static_cast<int>(axes.size()) - 1;
        while (d >= 0 && ++idx[d] == axes[d].size()) idx[d--] = 0;
        if (d < 0) break;
    }
    return pts;
}

}  // namespace detail

// Fills rmse / max_abs_error / deriv_rmse of a report against the problem's
// registered analytic solution.
inline void compute_error_metrics(TrainingReport& rep, const ProblemSpec& spec) {
    if (spec.analytic.empty()) return;
    const auto& ref = function_registry().at(spec.analytic);
    const Model& m = rep.model;
    const auto pts = detail::evaluation_grid(m.encodings, 101);
    const auto vmodel = m.mixture().collapse();
    double se = 0.0, maxe = 0.0;
    for (const auto& p : pts) {
        const auto row = m.bra_row(p);
        cdouble f{0.0, 0.0};
        for (std::size_t k = 0; k < row.size(); ++k) f += row[k] * vmodel[k];
        const double err = std::abs(f - ref.value(p));
        se += err * err;
        maxe = std::max(maxe, err);
    }
    rep.rmse = std::sqrt(se / static_cast<double>(pts.size()));
    rep.max_abs_error = maxe;

    // derivative along the first differentiated dimension, if a gradient is
    // registered for it
    int ddim = -1;
    for (const auto& t : spec.terms)
        for (std::size_t d = 0; d < t.deriv_orders.size(); ++d)
            if (t.deriv_orders[d] > 0 && ddim < 0) ddim = static_cast<int>(d);
    if (ddim >= 0 && static_cast<int>(ref.gradient.size()) > ddim && ref.gradient[ddim]) {
        auto dmix = derivative_state(m.mixture(), m, 1, ddim);
        const auto vd = dmix.collapse();
        double sed = 0.0;
        for (const auto& p : pts) {
            const auto row = m.bra_row(p);
            cdouble df{0.0, 0.0};
            for (std::size_t k = 0; k < row.size(); ++k) df += row[k] * vd[k];
            const double err = std::abs(df - ref.gradient[ddim](p));
            sed += err * err;
        }
        rep.deriv_rmse = std::sqrt(sed / static_cast<double>(pts.size()));
    }
}

inline TrainingReport train(const ProblemSpec& spec, const TrainConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    ProblemSpec sp = spec;
    sp.train = cfg;
    ProblemEngine engine(sp);

    TrainingReport rep;
    rep.seed = cfg.seed;
    Model m = engine.initial_model(cfg.seed);
    std::mt19937_64 shot_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    OverlapMode mode;
    mode.shots = cfg.shots;
    mode.rng = &shot_rng;

    AdamState adam;
    const int num_angles = m.ansatz.parameter_count();
    const int n_params = num_angles + 1 + (m.use_shift ? 1 : 0);

    const auto snapshot_best = [&](const LossBreakdown& bd) {
        if (bd.total < rep.best_total) {
            rep.best_total = bd.total;
            rep.best_epoch = bd.epoch;
            rep.best_theta = m.theta;
            rep.best_scale = m.theta_scale;
            rep.best_shift = m.theta_shift;
        }
    };

    for (int epoch = 0;; ++epoch) {
        auto [bd, grad] = engine.evaluate(m, mode);
        bd.epoch = epoch;
        rep.history.push_back(bd);
        if (!std::isfinite(bd.total)) {
            rep.diverged = true;
            rep.diagnostic = "non-finite loss at epoch " + std::to_string(epoch);
            break;
        }
        snapshot_best(bd);
        if (bd.total < cfg.early_stop || epoch == cfg.epochs) break;

        std::vector<double> params(n_params);
        std::copy(m.theta.begin(), m.theta.end(), params.begin());
        params[num_angles] = m.theta_scale;
        if (m.use_shift) params[num_angles + 1] = m.theta_shift;
        adam_step(adam, params, grad, cfg);
        std::copy(params.begin(), params.begin() + num_angles, m.theta.begin());
        m.theta_scale = params[num_angles];
        if (m.use_shift) m.theta_shift = params[num_angles + 1];
    }

    rep.epochs_run = static_cast<int>(rep.history.size()) - 1;
    if (rep.best_epoch >= 0) {
        m.theta = rep.best_theta;
        m.theta_scale = rep.best_scale;
        m.theta_shift = rep.best_shift;
    }
    rep.model = m;
    compute_error_metrics(rep, sp);
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rep;
}

}  // namespace qdes
