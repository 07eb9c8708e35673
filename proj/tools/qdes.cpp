// Experiment runner for the latent-space physics-informed DE solver.
//
//   qdes run <config> [--seed N] [--epochs N] [--mode variational|lse]
//            [--overlap exact|shots:N] [--out DIR] [--no-plot]
//   qdes preset <name> [--emit]
//   qdes report <dir>
//
// <config> is a v1 config file path or the name of a built-in preset.
// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <CLI11.hpp>

#include <qdes/qdes.hpp>

#include <fstream>
#include <sstream>

namespace {

int do_run(const std::string& config, const qdes::RunOptions& opts) {
    qdes::ProblemSpec spec;
    try {
        if (std::filesystem::exists(config)) {
            std::ifstream in(config);
            std::stringstream buf;
            buf << in.rdbuf();
            spec = qdes::parse_config(buf.str());
        } else {
            spec = qdes::preset(config);
        }
    } catch (const qdes::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return qdes::run_experiment(std::move(spec), opts, std::cout);
}

int do_preset(const std::string& name, bool emit) {
    try {
        const auto spec = qdes::preset(name);
        if (emit) {
            std::cout << qdes::serialize(spec);
        } else {
            std::cout << spec.name << ": " << spec.dims() << "-d, qubits";
            for (int q : spec.qubits) std::cout << " " << q;
            std::cout << ", " << spec.terms.size() << " terms, default epochs "
                      << spec.train.epochs << (spec.use_shift ? ", shifted model" : "")
                      << "\n    (use --emit for the full config)\n";
        }
        return 0;
    } catch (const qdes::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int do_report(const std::string& dir) {
    try {
        std::cout << qdes::report_summary(dir);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"latent-space physics-informed quantum DE solver"};
    app.require_subcommand(1);

    std::string config;
    std::uint64_t seed = 0;
    int epochs = 0;
    std::string mode, overlap, out_dir = "qdes_out";
    bool no_plot = false;

    auto* run = app.add_subcommand("run", "solve a problem from a config file or preset");
    run->add_option("config", config, "config file path or preset name")->required();
    auto* seed_opt = run->add_option("--seed", seed, "random seed override");
    auto* epochs_opt = run->add_option("--epochs", epochs, "epoch count override");
    run->add_option("--mode", mode, "variational|lse")
        ->check(CLI::IsMember({"variational", "lse"}));
    run->add_option("--overlap", overlap, "exact or shots:N");
    run->add_option("--out", out_dir, "output directory (default qdes_out)");
    run->add_flag("--no-plot", no_plot, "skip plot.svg");

    std::string preset_name;
    bool emit = false;
    auto* pre = app.add_subcommand("preset", "show a built-in problem preset");
    pre->add_option("name", preset_name, "preset name")->required();
    pre->add_flag("--emit", emit, "print the full config text");

    std::string report_dir;
    auto* rep = app.add_subcommand("report", "summarize run artifacts in a directory");
    rep->add_option("dir", report_dir, "artifact directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (run->parsed()) {
        qdes::RunOptions opts;
        if (*seed_opt) opts.seed = seed;
        if (*epochs_opt) opts.epochs = epochs;
        if (!mode.empty())
            opts.mode = mode == "lse" ? qdes::SolveMode::Lse : qdes::SolveMode::Variational;
        if (!overlap.empty()) {
            if (overlap == "exact") {
                opts.shots = -1;
            } else if (overlap.rfind("shots:", 0) == 0) {
                try {
                    opts.shots = std::stol(overlap.substr(6));
                } catch (const std::exception&) {
                    std::cerr << "error: overlap: cannot parse '" << overlap << "'\n";
                    return 2;
                }
            } else {
                std::cerr << "error: overlap: expected exact|shots:N\n";
                return 2;
            }
        }
        opts.out_dir = out_dir;
        opts.emit_plot = !no_plot;
        return do_run(config, opts);
    }
    if (pre->parsed()) return do_preset(preset_name, emit);
    return do_report(report_dir);
}
