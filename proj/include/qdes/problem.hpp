// Problem descriptions: serializable DE specs, the named-function registry,
// the four experiment presets and the v1 config text format.
//
// Config format v1: line-oriented `key = value`, '#' comments, repeatable
// `term` / `data` keys whose values are space-separated subfield=value lists.
// Serialization uses %.17g so specs round-trip losslessly.

#pragma once

#include <charconv>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "qdes/model.hpp"

namespace qdes {

struct RegisteredFunction {
    std::function<cdouble(std::span<const double>)> value;
    // partial derivative per dimension; empty when not supplied
    std::vector<std::function<double(std::span<const double>)>> gradient;
};

// Named functions usable as DE term factors and analytic references.
inline const std::map<std::string, RegisteredFunction>& function_registry() {
    static const std::map<std::string, RegisteredFunction> reg = [] {
        std::map<std::string, RegisteredFunction> r;
        r["unity"] = {[](std::span<const double>) { return cdouble{1.0, 0.0}; }, {}};
        // kappa e^{-kappa x} cos(lambda x) + lambda e^{-kappa x} sin(lambda x),
        // kappa = 1, lambda = 2 pi
        r["damped_forcing"] = {[](std::span<const double> x) {
                                   const double l = 2.0 * M_PI;
                                   return cdouble{std::exp(-x[0]) * (std::cos(l * x[0]) +
                                                                     l * std::sin(l * x[0])),
                                                  0.0};
                               },
                               {}};
        r["two_y_plus_x"] = {
            [](std::span<const double> x) { return cdouble{2.0 * x[1] + x[0], 0.0}; }, {}};
        r["damped_oscillator"] = {
            [](std::span<const double> x) {
                return cdouble{std::exp(-x[0]) * std::cos(2.0 * M_PI * x[0]), 0.0};
            },
            {[](std::span<const double> x) {
                const double l = 2.0 * M_PI;
                return -std::exp(-x[0]) * (std::cos(l * x[0]) + l * std::sin(l * x[0]));
            }}};
        r["exp_plus_15"] = {
            [](std::span<const double> x) { return cdouble{std::exp(x[0]) + 15.0, 0.0}; },
            {[](std::span<const double> x) { return std::exp(x[0]); }}};
        r["reciprocal_2mx"] = {
            [](std::span<const double> x) { return cdouble{1.0 / (2.0 - x[0]), 0.0}; },
            {[](std::span<const double> x) {
                const double d = 2.0 - x[0];
                return 1.0 / (d * d);
            }}};
        r["quadratic_2d"] = {
            [](std::span<const double> x) {
                return cdouble{x[1] * x[1] + x[0] * x[1] + 1.0, 0.0};
            },
            {[](std::span<const double> x) { return x[1]; },
             [](std::span<const double> x) { return 2.0 * x[1] + x[0]; }}};
        return r;
    }();
    return reg;
}

struct TermConfig {
    double weight = 1.0;
    std::vector<int> deriv_orders;     // per dimension
    int model_power = 1;
    std::string func_name;             // registry name; empty = none
    std::vector<double> func_coeffs;   // alternative: latent coefficients, empty = none

    bool operator==(const TermConfig&) const = default;
};

struct InitialCondition {
    std::vector<double> point;
    double value = 0.0;
    bool operator==(const InitialCondition&) const = default;
};

struct BoundaryCondition {
    int dim = 1;          // dimension pinned at `at`
    double at = 0.0;
    double value = 0.0;
    int num_points = 21;  // uniform samples over the remaining dimension
    bool operator==(const BoundaryCondition&) const = default;
};

struct TrainConfig {
    double learning_rate = 0.005;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    int epochs = 5000;
    double loss_power = 0.5;  // p in (L_DE)^p
    double eta = 10.0;
    double zeta = 1.0;
    std::uint64_t seed = 0;
    long shots = 0;           // 0 = exact overlaps
    double early_stop = 1e-4;
    double scale_init = 1.0;
    double shift_init = 0.0;

    bool operator==(const TrainConfig&) const = default;
};

enum class SolveMode { Variational, Lse };

struct ProblemSpec {
    std::string name;
    std::vector<BasisFamily> families = {BasisFamily::Chebyshev};
    std::vector<int> qubits = {4};
    int rotation_layers = 7;
    bool use_shift = false;
    std::vector<TermConfig> terms;
    std::optional<InitialCondition> initial;
    std::optional<BoundaryCondition> boundary;
    std::vector<std::pair<std::vector<double>, double>> data;
    std::string analytic;  // registry name; empty = none
    SolveMode mode = SolveMode::Variational;
    TrainConfig train;

    bool operator==(const ProblemSpec&) const = default;

    int dims() const { return static_cast<int>(qubits.size()); }

    std::vector<Encoding> encodings() const {
        std::vector<Encoding> out;
        for (int d = 0; d < dims(); ++d)
            out.push_back(families[d] == BasisFamily::Chebyshev
                              ? Encoding::chebyshev(qubits[d])
                              : Encoding::fourier(qubits[d]));
        return out;
    }

    int common_folds() const {
        int folds = 0;
        for (const auto& t : terms) {
            const int factors = ((!t.func_name.empty() || !t.func_coeffs.empty()) ? 1 : 0) +
                                t.model_power;
            folds = std::max(folds, std::max(0, factors - 1));
        }
        return folds;
    }

    void validate() const {
        if (qubits.empty()) throw config_error("qubits: at least one dimension required");
        if (families.size() != qubits.size())
            throw config_error("family: one entry per dimension required");
        int total = 0;
        for (int q : qubits) {
            if (q < 1) throw config_error("qubits: qubit count must be >= 1");
            total += q;
        }
        if (total + common_folds() > kMaxQubits)
            throw config_error("qubits: register (with product folds) exceeds 14 qubits");
        if (rotation_layers < 1) throw config_error("rotation_layers: must be >= 1");
        if (terms.empty()) throw config_error("term: at least one DE term required");
        for (const auto& t : terms) {
            if (t.model_power < 0) throw config_error("term: power must be >= 0");
            if (!t.func_name.empty() && !function_registry().count(t.func_name))
                throw config_error("term: unknown function preset '" + t.func_name + "'");
            if (!t.func_name.empty() && !t.func_coeffs.empty())
                throw config_error("term: func and coeffs are mutually exclusive");
            if (!t.func_coeffs.empty() &&
                t.func_coeffs.size() != pow2(qubits[0]))
                throw config_error("term: coeffs length must be 2^qubits");
            if (static_cast<int>(t.deriv_orders.size()) > dims())
                throw config_error("term: more derivative orders than dimensions");
        }
        if (!analytic.empty() && !function_registry().count(analytic))
            throw config_error("analytic: unknown function preset '" + analytic + "'");
        if (initial && static_cast<int>(initial->point.size()) != dims())
            throw config_error("initial: point dimension mismatch");
        if (boundary) {
            if (dims() != 2) throw config_error("boundary: supported for 2-d problems only");
            if (boundary->dim < 0 || boundary->dim >= dims())
                throw config_error("boundary: bad dimension index");
            if (boundary->num_points < 1) throw config_error("boundary: points must be >= 1");
        }
        for (const auto& [pt, v] : data)
            if (static_cast<int>(pt.size()) != dims())
                throw config_error("data: point dimension mismatch");
        if (train.learning_rate <= 0) throw config_error("learning_rate: must be > 0");
        if (train.loss_power <= 0 || train.loss_power > 1)
            throw config_error("loss_power: must be in (0, 1]");
        if (train.epochs < 0) throw config_error("epochs: must be >= 0");
    }

    // Resolves a serializable term into an evaluable DETermSpec.
    DETermSpec resolve(const TermConfig& t) const {
        DETermSpec s;
        s.weight = t.weight;
        s.deriv_orders = t.deriv_orders;
        s.model_power = t.model_power;
        if (!t.func_name.empty()) {
            s.factor = function_registry().at(t.func_name).value;
        } else if (!t.func_coeffs.empty()) {
            Encoding e = encodings()[0];
            std::vector<cdouble> coeffs(t.func_coeffs.begin(), t.func_coeffs.end());
            s.factor = [e, coeffs](std::span<const double> x) { return e.decode(coeffs, x[0]); };
        }
        return s;
    }
};

// ---------------------------------------------------------------------------
// presets (the four experiments)

inline ProblemSpec preset(const std::string& name) {
    ProblemSpec s;
    s.name = name;
    if (name == "linear_damped") {
        // df/dx + e^{-x}(cos 2pi x + 2pi sin 2pi x) = 0, f(0) = 1
        s.families = {BasisFamily::Chebyshev};
        s.qubits = {4};
        s.rotation_layers = 7;
        s.terms = {TermConfig{1.0, {1}, 1, "", {}}, TermConfig{1.0, {}, 0, "damped_forcing", {}}};
        s.initial = InitialCondition{{0.0}, 1.0};
        s.analytic = "damped_oscillator";
        s.train.epochs = 5000;
    } else if (name == "shifted_linear") {
        // df/dx - f + 15 = 0, f(0) = 16; shifted model variant by default
        s.families = {BasisFamily::Chebyshev};
        s.qubits = {4};
        s.rotation_layers = 7;
        s.use_shift = true;
        s.terms = {TermConfig{1.0, {1}, 1, "", {}}, TermConfig{-1.0, {}, 1, "", {}},
                   TermConfig{15.0, {}, 0, "", {}}};
        s.initial = InitialCondition{{0.0}, 16.0};
        s.analytic = "exp_plus_15";
        s.train.epochs = 20000;
    } else if (name == "nonlinear_riccati") {
        // df/dx - f^2 = 0, f(0) = 1/2, solution 1/(2 - x)
        s.families = {BasisFamily::Chebyshev};
        s.qubits = {3};
        s.rotation_layers = 7;
        s.terms = {TermConfig{1.0, {1}, 1, "", {}}, TermConfig{-1.0, {}, 2, "", {}}};
        s.initial = InitialCondition{{0.0}, 0.5};
        s.analytic = "reciprocal_2mx";
        s.train.epochs = 10000;
    } else if (name == "multidim_2d") {
        // df/dy - 2y - x = 0, f(x, 0) = 1, solution y^2 + xy + 1
        s.families = {BasisFamily::Chebyshev, BasisFamily::Chebyshev};
        s.qubits = {2, 2};
        s.rotation_layers = 7;
        s.terms = {TermConfig{1.0, {0, 1}, 1, "", {}},
                   TermConfig{-1.0, {}, 0, "two_y_plus_x", {}}};
        s.boundary = BoundaryCondition{1, 0.0, 1.0, 21};
        s.analytic = "quadratic_2d";
        s.train.epochs = 10000;
    } else {
        throw config_error("preset: unknown name '" + name + "'");
    }
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// config text format v1

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += fmt_double(v[i]);
    }
    return out;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& s, const std::string& field) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw config_error(field + ": cannot parse number '" + s + "'");
    }
}

inline long parse_long(const std::string& s, const std::string& field) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw config_error(field + ": cannot parse integer '" + s + "'");
    }
}

inline std::vector<double> parse_double_list(const std::string& s, const std::string& field) {
    std::vector<double> out;
    for (const auto& p : split(s, ','))
        if (!trim(p).empty()) out.push_back(parse_double(trim(p), field));
    return out;
}

}  // namespace detail

inline std::string serialize(const ProblemSpec& s) {
    std::ostringstream o;
    o << "# qdes problem config\n";
    o << "version = 1\n";
    o << "name = " << s.name << "\n";
    o << "mode = " << (s.mode == SolveMode::Variational ? "variational" : "lse") << "\n";
    o << "family = ";
    for (std::size_t d = 0; d < s.families.size(); ++d)
        o << (d ? "," : "") << family_name(s.families[d]);
    o << "\n";
    o << "qubits = ";
    for (std::size_t d = 0; d < s.qubits.size(); ++d) o << (d ? "," : "") << s.qubits[d];
    o << "\n";
    o << "rotation_layers = " << s.rotation_layers << "\n";
    o << "shift = " << (s.use_shift ? "on" : "off") << "\n";
    for (const auto& t : s.terms) {
        o << "term = weight=" << detail::fmt_double(t.weight);
        if (!t.deriv_orders.empty()) {
            o << " deriv=";
            for (std::size_t d = 0; d < t.deriv_orders.size(); ++d)
                o << (d ? "," : "") << t.deriv_orders[d];
        }
        o << " power=" << t.model_power;
        if (!t.func_name.empty()) o << " func=" << t.func_name;
        if (!t.func_coeffs.empty()) o << " coeffs=" << detail::join_doubles(t.func_coeffs);
        o << "\n";
    }
    if (s.initial)
        o << "initial = x=" << detail::join_doubles(s.initial->point)
          << " value=" << detail::fmt_double(s.initial->value) << "\n";
    if (s.boundary)
        o << "boundary = dim=" << s.boundary->dim << " at=" << detail::fmt_double(s.boundary->at)
          << " value=" << detail::fmt_double(s.boundary->value)
          << " points=" << s.boundary->num_points << "\n";
    for (const auto& [pt, v] : s.data)
        o << "data = x=" << detail::join_doubles(pt) << " value=" << detail::fmt_double(v)
          << "\n";
    if (!s.analytic.empty()) o << "analytic = " << s.analytic << "\n";
    const TrainConfig& t = s.train;
    o << "epochs = " << t.epochs << "\n";
    o << "learning_rate = " << detail::fmt_double(t.learning_rate) << "\n";
    o << "loss_power = " << detail::fmt_double(t.loss_power) << "\n";
    o << "eta = " << detail::fmt_double(t.eta) << "\n";
    o << "zeta = " << detail::fmt_double(t.zeta) << "\n";
    o << "seed = " << t.seed << "\n";
    o << "overlap = " << (t.shots > 0 ? "shots:" + std::to_string(t.shots) : "exact") << "\n";
    o << "early_stop = " << detail::fmt_double(t.early_stop) << "\n";
    o << "scale_init = " << detail::fmt_double(t.scale_init) << "\n";
    o << "shift_init = " << detail::fmt_double(t.shift_init) << "\n";
    return o.str();
}

inline ProblemSpec parse_config(const std::string& text) {
    using detail::parse_double;
    using detail::parse_long;
    using detail::split;
    using detail::trim;

    ProblemSpec s;
    s.families.clear();
    s.qubits.clear();
    bool saw_version = false;

    const auto parse_subfields = [](const std::string& value, const std::string& field) {
        std::map<std::string, std::string> kv;
        for (const auto& part : split(value, ' ')) {
            const auto p = trim(part);
            if (p.empty()) continue;
            const auto eq = p.find('=');
            if (eq == std::string::npos)
                throw config_error(field + ": expected subfield=value, got '" + p + "'");
            kv[p.substr(0, eq)] = p.substr(eq + 1);
        }
        return kv;
    };

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw config_error("config: expected 'key = value': " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "version") {
            if (value != "1") throw config_error("version: unsupported config version " + value);
            saw_version = true;
        } else if (key == "name") {
            s.name = value;
        } else if (key == "mode") {
            if (value == "variational") s.mode = SolveMode::Variational;
            else if (value == "lse") s.mode = SolveMode::Lse;
            else throw config_error("mode: expected variational|lse, got '" + value + "'");
        } else if (key == "family") {
            for (const auto& f : split(value, ',')) {
                const auto fam = trim(f);
                if (fam == "chebyshev") s.families.push_back(BasisFamily::Chebyshev);
                else if (fam == "fourier") s.families.push_back(BasisFamily::Fourier);
                else throw config_error("family: expected chebyshev|fourier, got '" + fam + "'");
            }
        } else if (key == "qubits") {
            for (const auto& q : split(value, ','))
                s.qubits.push_back(static_cast<int>(parse_long(trim(q), "qubits")));
        } else if (key == "rotation_layers") {
            s.rotation_layers = static_cast<int>(parse_long(value, key));
        } else if (key == "shift") {
            if (value == "on") s.use_shift = true;
            else if (value == "off") s.use_shift = false;
            else throw config_error("shift: expected on|off");
        } else if (key == "term") {
            auto kv = parse_subfields(value, "term");
            TermConfig t;
            t.deriv_orders.clear();
            if (kv.count("weight")) t.weight = parse_double(kv["weight"], "term.weight");
            if (kv.count("deriv"))
                for (const auto& d : split(kv["deriv"], ','))
                    t.deriv_orders.push_back(static_cast<int>(parse_long(trim(d), "term.deriv")));
            if (kv.count("power")) t.model_power = static_cast<int>(parse_long(kv["power"], "term.power"));
            if (kv.count("func")) t.func_name = kv["func"];
            if (kv.count("coeffs")) t.func_coeffs = detail::parse_double_list(kv["coeffs"], "term.coeffs");
            s.terms.push_back(std::move(t));
        } else if (key == "initial") {
            auto kv = parse_subfields(value, "initial");
            if (!kv.count("x") || !kv.count("value"))
                throw config_error("initial: needs x= and value=");
            s.initial = InitialCondition{detail::parse_double_list(kv["x"], "initial.x"),
                                         parse_double(kv["value"], "initial.value")};
        } else if (key == "boundary") {
            auto kv = parse_subfields(value, "boundary");
            BoundaryCondition b;
            if (kv.count("dim")) b.dim = static_cast<int>(parse_long(kv["dim"], "boundary.dim"));
            if (kv.count("at")) b.at = parse_double(kv["at"], "boundary.at");
            if (kv.count("value")) b.value = parse_double(kv["value"], "boundary.value");
            if (kv.count("points"))
                b.num_points = static_cast<int>(parse_long(kv["points"], "boundary.points"));
            s.boundary = b;
        } else if (key == "data") {
            auto kv = parse_subfields(value, "data");
            if (!kv.count("x") || !kv.count("value")) throw config_error("data: needs x= and value=");
            s.data.emplace_back(detail::parse_double_list(kv["x"], "data.x"),
                                parse_double(kv["value"], "data.value"));
        } else if (key == "analytic") {
            s.analytic = value;
        } else if (key == "epochs") {
            s.train.epochs = static_cast<int>(parse_long(value, key));
        } else if (key == "learning_rate") {
            s.train.learning_rate = parse_double(value, key);
        } else if (key == "loss_power") {
            s.train.loss_power = parse_double(value, key);
        } else if (key == "eta") {
            s.train.eta = parse_double(value, key);
        } else if (key == "zeta") {
            s.train.zeta = parse_double(value, key);
        } else if (key == "seed") {
            s.train.seed = static_cast<std::uint64_t>(parse_long(value, key));
        } else if (key == "overlap") {
            if (value == "exact") s.train.shots = 0;
            else if (value.rfind("shots:", 0) == 0)
                s.train.shots = parse_long(value.substr(6), key);
            else throw config_error("overlap: expected exact|shots:N");
        } else if (key == "early_stop") {
            s.train.early_stop = parse_double(value, key);
        } else if (key == "scale_init") {
            s.train.scale_init = parse_double(value, key);
        } else if (key == "shift_init") {
            s.train.shift_init = parse_double(value, key);
        } else {
            throw config_error("config: unknown key '" + key + "'");
        }
    }
    if (!saw_version) throw config_error("version: missing (config format v1 requires it)");
    if (s.families.empty()) s.families.assign(s.qubits.size(), BasisFamily::Chebyshev);
    s.validate();
    return s;
}

}  // namespace qdes
