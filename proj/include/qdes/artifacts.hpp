// Run artifacts: loss-history / solution / summary CSVs, a minimal SVG plot,
// experiment orchestration for the CLI, and the console report.
//
// CSV conventions: UTF-8, comma separated, one header row, floats with 15
// significant digits. loss_history.csv and solution.csv are byte-identical
// across runs for identical config + seed in exact overlap mode; summary.csv
// additionally carries the wall clock.

#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>

#include "qdes/lse.hpp"

namespace qdes {

namespace detail {

inline std::string csv_num(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

}  // namespace detail

// A solved problem reduced to an evaluable latent mixture.
struct SolutionView {
    std::vector<Encoding> encodings;
    MixtureState mixture;

    cdouble eval(std::span<const double> x) const {
        Model shell = Model::make(encodings, 1);
        return shell.eval_mixture(mixture, x);
    }

    cdouble eval_derivative(std::span<const double> x, int dim) const {
        Model shell = Model::make(encodings, 1);
        return shell.eval_mixture(derivative_state(mixture, shell, 1, dim), x);
    }
};

inline void write_loss_history_csv(const std::filesystem::path& path,
                                   const std::vector<LossBreakdown>& history) {
    std::ofstream out(path);
    if (!out) throw usage_error("cannot open " + path.string());
    out << "epoch,l_de,l_init/l_bc,total\n";
    for (const auto& bd : history)
        out << bd.epoch << "," << detail::csv_num(bd.l_de) << ","
            << detail::csv_num(bd.l_init + bd.l_bc) << "," << detail::csv_num(bd.total) << "\n";
}

struct SolutionRow {
    std::vector<double> x;
    double f_model, f_truth, df_model, df_truth, abs_error;
};

// 101 uniform points per dimension over the encoding domain; derivatives
// along the problem's differentiated dimension.
inline std::vector<SolutionRow> solution_rows(const ProblemSpec& spec, const SolutionView& view,
                                              int points_per_dim = 101) {
    int ddim = -1;
    for (const auto& t : spec.terms)
        for (std::size_t d = 0; d < t.deriv_orders.size(); ++d)
            if (t.deriv_orders[d] > 0 && ddim < 0) ddim = static_cast<int>(d);
    if (ddim < 0) ddim = 0;
    const RegisteredFunction* ref =
        spec.analytic.empty() ? nullptr : &function_registry().at(spec.analytic);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<SolutionRow> rows;
    for (const auto& p : detail::evaluation_grid(view.encodings, points_per_dim)) {
        SolutionRow r;
        r.x = p;
        r.f_model = view.eval(p).real();
        r.df_model = view.eval_derivative(p, ddim).real();
        r.f_truth = ref ? ref->value(p).real() : nan;
        r.df_truth = ref && static_cast<int>(ref->gradient.size()) > ddim && ref->gradient[ddim]
                         ? ref->gradient[ddim](p)
                         : nan;
        r.abs_error = ref ? std::abs(r.f_model - r.f_truth) : nan;
        rows.push_back(std::move(r));
    }
    return rows;
}

inline void write_solution_csv(const std::filesystem::path& path, const ProblemSpec& spec,
                               const std::vector<SolutionRow>& rows) {
    std::ofstream out(path);
    if (!out) throw usage_error("cannot open " + path.string());
    out << (spec.dims() == 2 ? "x,y," : "x,") << "f_model,f_truth,df_model,df_truth,abs_error\n";
    for (const auto& r : rows) {
        for (double xv : r.x) out << detail::csv_num(xv) << ",";
        out << detail::csv_num(r.f_model) << "," << detail::csv_num(r.f_truth) << ","
            << detail::csv_num(r.df_model) << "," << detail::csv_num(r.df_truth) << ","
            << detail::csv_num(r.abs_error) << "\n";
    }
}

struct RunSummary {
    double rmse = std::numeric_limits<double>::quiet_NaN();
    double max_abs_error = std::numeric_limits<double>::quiet_NaN();
    double final_loss = std::numeric_limits<double>::quiet_NaN();
    int epochs_used = 0;
    std::uint64_t seed = 0;
    double wall_clock = 0.0;
};

inline void write_summary_csv(const std::filesystem::path& path, const RunSummary& s) {
    std::ofstream out(path);
    if (!out) throw usage_error("cannot open " + path.string());
    out << "rmse,max_abs_error,final_loss,epochs_used,seed,wall_clock\n";
    out << detail::csv_num(s.rmse) << "," << detail::csv_num(s.max_abs_error) << ","
        << detail::csv_num(s.final_loss) << "," << s.epochs_used << "," << s.seed << ","
        << detail::csv_num(s.wall_clock) << "\n";
}

// ---------------------------------------------------------------------------
// minimal SVG plotting (no chart dependencies)

namespace detail {

struct SvgPanel {
    double x0, y0, w, h;  // panel rectangle in canvas units
    double xmin, xmax, ymin, ymax;

    double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
    double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

inline void svg_polyline(std::ostream& out, const SvgPanel& p,
                         const std::vector<std::pair<double, double>>& pts, const char* color,
                         const char* dash = nullptr) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (dash) out << " stroke-dasharray=\"" << dash << "\"";
    out << " points=\"";
    for (const auto& [x, y] : pts)
        if (std::isfinite(y)) out << p.px(x) << "," << p.py(y) << " ";
    out << "\"/>\n";
}

inline void svg_frame(std::ostream& out, const SvgPanel& p, const std::string& title) {
    out << "<rect x=\"" << p.x0 << "\" y=\"" << p.y0 << "\" width=\"" << p.w << "\" height=\""
        << p.h << "\" fill=\"none\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << p.x0 + p.w / 2 << "\" y=\"" << p.y0 - 8
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << title
        << "</text>\n";
}

}  // namespace detail

// Two panels: solution vs truth (2-d problems: the slice along the free
// variable at the first dimension's midpoint) and the loss curve (log10).
inline void write_plot_svg(const std::filesystem::path& path, const ProblemSpec& spec,
                           const std::vector<SolutionRow>& rows,
                           const std::vector<LossBreakdown>& history) {
    std::ofstream out(path);
    if (!out) throw usage_error("cannot open " + path.string());

    std::vector<std::pair<double, double>> fm, ft;
    if (spec.dims() == 1) {
        for (const auto& r : rows) {
            fm.emplace_back(r.x[0], r.f_model);
            ft.emplace_back(r.x[0], r.f_truth);
        }
    } else {
        // slice at the midpoint of dimension 0
        double mid = 0.0;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& r : rows)
            if (std::abs(r.x[0]) < best) {
                best = std::abs(r.x[0]);
                mid = r.x[0];
            }
        for (const auto& r : rows)
            if (r.x[0] == mid) {
                fm.emplace_back(r.x[1], r.f_model);
                ft.emplace_back(r.x[1], r.f_truth);
            }
    }
    double ymin = 0.0, ymax = 1.0;
    bool first = true;
    for (const auto& [x, y] : fm)
        if (std::isfinite(y)) {
            ymin = first ? y : std::min(ymin, y);
            ymax = first ? y : std::max(ymax, y);
            first = false;
        }
    for (const auto& [x, y] : ft)
        if (std::isfinite(y)) {
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
    const double pad = 0.08 * (ymax - ymin);

    std::vector<std::pair<double, double>> loss;
    double lmin = 0.0, lmax = 1.0;
    bool lfirst = true;
    for (const auto& bd : history) {
        if (bd.total <= 0.0 || !std::isfinite(bd.total)) continue;
        const double v = std::log10(bd.total);
        loss.emplace_back(bd.epoch, v);
        lmin = lfirst ? v : std::min(lmin, v);
        lmax = lfirst ? v : std::max(lmax, v);
        lfirst = false;
    }
    if (lmax - lmin < 1e-12) lmax = lmin + 1.0;

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"760\" "
           "height=\"320\" viewBox=\"0 0 760 320\">\n";
    detail::SvgPanel left{50, 40, 300, 240, fm.empty() ? 0.0 : fm.front().first,
                          fm.empty() ? 1.0 : fm.back().first, ymin - pad, ymax + pad};
    detail::SvgPanel right{440, 40, 280, 240, 0.0,
                           history.empty() ? 1.0 : static_cast<double>(history.back().epoch),
                           lmin - 0.2, lmax + 0.2};
    detail::svg_frame(out, left, "solution vs truth");
    detail::svg_polyline(out, left, ft, "#1f77b4");
    detail::svg_polyline(out, left, fm, "#d62728", "5,4");
    detail::svg_frame(out, right, "log10 total loss");
    if (!loss.empty()) detail::svg_polyline(out, right, loss, "#2ca02c");
    out << "</svg>\n";
}

// ---------------------------------------------------------------------------
// experiment orchestration (the CLI `run` subcommand)

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs;
    std::optional<SolveMode> mode;
    std::optional<long> shots;  // <0 forces exact
    std::filesystem::path out_dir = ".";
    bool emit_plot = true;
};

// Exit codes: 0 success, 2 validation error, 3 numerical failure.
inline int run_experiment(ProblemSpec spec, const RunOptions& opts,
                          std::ostream& log = std::cout) {
    try {
        if (opts.seed) spec.train.seed = *opts.seed;
        if (opts.epochs) spec.train.epochs = *opts.epochs;
        if (opts.shots) spec.train.shots = std::max<long>(0, *opts.shots);
        if (opts.mode) spec.mode = *opts.mode;
        spec.validate();

        std::filesystem::create_directories(opts.out_dir);
        SolutionView view{spec.encodings(), {}};
        RunSummary summary;
        summary.seed = spec.train.seed;
        std::vector<LossBreakdown> history;

        if (spec.mode == SolveMode::Lse) {
            for (const auto& t : spec.terms)
                if (t.model_power > 1) {
                    log << "error: nonlinear problem unsupported in lse mode (term power "
                        << t.model_power << ")\n";
                    return 2;
                }
            const auto t0 = std::chrono::steady_clock::now();
            auto sys = assemble_lse(spec);
            if (spec.initial)
                append_initial_row(sys, spec.initial->point[0], spec.initial->value);
            auto sol = solve_lse(sys);
            if (sol.rank_deficient)
                log << "note: rank-deficient system, minimum-norm solution returned\n";
            Statevector st;
            st.num_qubits = spec.qubits[0];
            st.amps = sol.coeffs;
            view.mixture = MixtureState::single(1.0, std::move(st));

            ProblemEngine engine(spec);
            auto bd = engine.losses_for_mixture(view.mixture);
            history.push_back(bd);
            summary.final_loss = bd.total;
            summary.epochs_used = 0;
            summary.wall_clock =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } else {
            auto rep = train(spec, spec.train);
            if (rep.diverged) {
                log << "error: training aborted: " << rep.diagnostic << "\n";
                return 3;
            }
            view.mixture = rep.model.mixture();
            history = std::move(rep.history);
            summary.final_loss = rep.best_total;
            summary.epochs_used = rep.epochs_run;
            summary.wall_clock = rep.wall_seconds;
        }

        auto rows = solution_rows(spec, view);
        if (!spec.analytic.empty()) {
            double se = 0.0, mx = 0.0;
            for (const auto& r : rows) {
                se += r.abs_error * r.abs_error;
                mx = std::max(mx, r.abs_error);
            }
            summary.rmse = std::sqrt(se / static_cast<double>(rows.size()));
            summary.max_abs_error = mx;
        }

        write_loss_history_csv(opts.out_dir / "loss_history.csv", history);
        write_solution_csv(opts.out_dir / "solution.csv", spec, rows);
        write_summary_csv(opts.out_dir / "summary.csv", summary);
        if (opts.emit_plot) write_plot_svg(opts.out_dir / "plot.svg", spec, rows, history);

        log << "wrote " << (opts.out_dir / "summary.csv").string() << " (final loss "
            << detail::csv_num(summary.final_loss) << ", rmse " << detail::csv_num(summary.rmse)
            << ")\n";
        return 0;
    } catch (const config_error& e) {
        log << "error: " << e.what() << "\n";
        return 2;
    } catch (const usage_error& e) {
        log << "error: " << e.what() << "\n";
        return 2;
    } catch (const numerical_error& e) {
        log << "error: " << e.what() << "\n";
        return 3;
    }
}

// ---------------------------------------------------------------------------
// console report: reads the artifacts back and recomputes the error metrics

inline std::string report_summary(const std::filesystem::path& dir) {
    const auto read_csv = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        if (!in) throw usage_error("cannot open " + p.string());
        std::vector<std::vector<std::string>> rows;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            rows.push_back(detail::split(line, ','));
        }
        return rows;
    };

    auto summary = read_csv(dir / "summary.csv");
    if (summary.size() < 2) throw usage_error("summary.csv: missing data row");
    auto solution = read_csv(dir / "solution.csv");

    // recompute rmse / max abs error from solution.csv
    const auto& header = solution.front();
    int err_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == "abs_error") err_col = static_cast<int>(c);
    double se = 0.0, mx = 0.0;
    std::size_t n = 0;
    bool nonfinite = false;
    for (std::size_t r = 1; r < solution.size(); ++r) {
        const double v = std::strtod(solution[r][err_col].c_str(), nullptr);
        if (!std::isfinite(v)) {
            nonfinite = true;
            continue;
        }
        se += v * v;
        mx = std::max(mx, v);
        ++n;
    }
    const double rrmse = n ? std::sqrt(se / static_cast<double>(n))
                           : std::numeric_limits<double>::quiet_NaN();

    std::ostringstream out;
    out << "metric,value\n";
    const char* names[] = {"rmse", "max_abs_error", "final_loss", "epochs_used", "seed",
                           "wall_clock"};
    for (std::size_t c = 0; c < 6; ++c) {
        out << names[c] << "," << summary[1][c];
        const double v = std::strtod(summary[1][c].c_str(), nullptr);
        if (c < 3 && !std::isfinite(v)) out << " (non-finite)";
        out << "\n";
    }
    out << "recomputed_rmse," << detail::csv_num(rrmse) << "\n";
    out << "recomputed_max_abs_error," << detail::csv_num(mx) << "\n";
    if (nonfinite) out << "note,non-finite entries present in solution.csv\n";
    return out.str();
}

}  // namespace qdes
