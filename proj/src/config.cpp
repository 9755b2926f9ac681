#include "weakval/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace weakval {

namespace {

struct ValueError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string unquote(const std::string& s)
{
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

double parse_real(const std::string& text)
{
    const std::string s = trim(text);
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty()) {
        throw ValueError("expected a real number, got '" + s + "'");
    }
    return v;
}

std::int64_t parse_int(const std::string& text)
{
    const std::string s = trim(text);
    std::int64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty()) {
        throw ValueError("expected an integer, got '" + s + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) {
        parts.push_back(trim(item));
    }
    return parts;
}

std::vector<double> parse_list(const std::string& text)
{
    std::string s = trim(text);
    if (!s.empty() && s.front() == '[' && s.back() == ']') {
        s = s.substr(1, s.size() - 2);
    }
    std::vector<double> out;
    for (const auto& part : split(s, ',')) {
        out.push_back(parse_real(part));
    }
    if (out.empty()) {
        throw ValueError("expected a comma-separated list of numbers");
    }
    return out;
}

/// "re" or "re, im".
Complex parse_complex(const std::string& text)
{
    const auto parts = split(trim(text), ',');
    if (parts.size() == 1) {
        return {parse_real(parts[0]), 0.0};
    }
    if (parts.size() == 2) {
        return {parse_real(parts[0]), parse_real(parts[1])};
    }
    throw ValueError("expected 're' or 're, im', got '" + text + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        t["experiment"] = [](ExperimentConfig& c, const std::string& v) { c.experiment = v; };
        t["seed"] = [](ExperimentConfig& c, const std::string& v) {
            const auto s = parse_int(v);
            if (s < 0) {
                throw ValueError("seed must be a non-negative integer");
            }
            c.seed = static_cast<std::uint64_t>(s);
        };
        t["n_traj"] = [](ExperimentConfig& c, const std::string& v) { c.n_traj = parse_int(v); };
        t["output"] = [](ExperimentConfig& c, const std::string& v) { c.output = v; };
        t["stepper"] = [](ExperimentConfig& c, const std::string& v) {
            try {
                c.stepper = parse_stepper(v);
            } catch (const InvalidArgument& e) {
                throw ValueError(e.what());
            }
        };

        t["measurement.gamma"] = [](ExperimentConfig& c, const std::string& v) { c.measurement.gamma = parse_real(v); };
        t["measurement.dt"] = [](ExperimentConfig& c, const std::string& v) { c.measurement.dt_step = parse_real(v); };
        t["measurement.t_total"] = [](ExperimentConfig& c, const std::string& v) { c.measurement.t_total = parse_real(v); };

        t["selection.theta"] = [](ExperimentConfig& c, const std::string& v) { c.theta = parse_real(v); };
        t["selection.psi_i.c1"] = [](ExperimentConfig& c, const std::string& v) { c.psi_i.c1 = parse_complex(v); };
        t["selection.psi_i.c2"] = [](ExperimentConfig& c, const std::string& v) { c.psi_i.c2 = parse_complex(v); };
        t["selection.psi_f.c1"] = [](ExperimentConfig& c, const std::string& v) { c.psi_f.c1 = parse_complex(v); };
        t["selection.psi_f.c2"] = [](ExperimentConfig& c, const std::string& v) { c.psi_f.c2 = parse_complex(v); };

        t["fig1.theta_min"] = [](ExperimentConfig& c, const std::string& v) { c.fig1.theta_min = parse_real(v); };
        t["fig1.theta_max"] = [](ExperimentConfig& c, const std::string& v) { c.fig1.theta_max = parse_real(v); };
        t["fig1.points"] = [](ExperimentConfig& c, const std::string& v) { c.fig1.points = static_cast<int>(parse_int(v)); };

        t["sweep.g"] = [](ExperimentConfig& c, const std::string& v) { c.sweep.g = parse_list(v); };

        t["convergence.dt"] = [](ExperimentConfig& c, const std::string& v) { c.convergence.dt = parse_list(v); };
        t["convergence.horizon"] = [](ExperimentConfig& c, const std::string& v) { c.convergence.horizon = parse_real(v); };
        t["convergence.refine"] = [](ExperimentConfig& c, const std::string& v) { c.convergence.refine = static_cast<int>(parse_int(v)); };

        t["amplifier.R"] = [](ExperimentConfig& c, const std::string& v) { c.amplifier.model.R = parse_real(v); };
        t["amplifier.v0"] = [](ExperimentConfig& c, const std::string& v) { c.amplifier.model.v0 = parse_real(v); };
        t["amplifier.sigma_over_eps"] = [](ExperimentConfig& c, const std::string& v) { c.amplifier.sigma_over_eps = parse_list(v); };
        t["amplifier.random_points"] = [](ExperimentConfig& c, const std::string& v) { c.amplifier.random_points = static_cast<int>(parse_int(v)); };

        t["cqed.chi"] = [](ExperimentConfig& c, const std::string& v) { c.cqed.params.chi = parse_real(v); };
        t["cqed.kappa"] = [](ExperimentConfig& c, const std::string& v) { c.cqed.params.kappa = parse_real(v); };
        t["cqed.eps_m"] = [](ExperimentConfig& c, const std::string& v) { c.cqed.params.eps_m = parse_real(v); };
        t["cqed.delta_r"] = [](ExperimentConfig& c, const std::string& v) { c.cqed.params.delta_r = parse_real(v); };
        t["cqed.phi_lo"] = [](ExperimentConfig& c, const std::string& v) { c.cqed.params.phi_lo = parse_real(v); };
        t["cqed.omega_q"] = [](ExperimentConfig& c, const std::string& v) { c.cqed.params.omega_q = parse_real(v); };
        t["cqed.purity_factor"] = [](ExperimentConfig& c, const std::string& v) { c.cqed.params.purity_factor = parse_real(v); };
        t["cqed.omega_convention"] = [](ExperimentConfig& c, const std::string& v) {
            if (v == "bare") {
                c.cqed.params.omega = OmegaConvention::BarePlusStark;
            } else if (v == "dressed") {
                c.cqed.params.omega = OmegaConvention::DressedPlusStark;
            } else {
                throw ValueError("expected 'bare' or 'dressed', got '" + v + "'");
            }
        };
        t["cqed.record_phase"] = [](ExperimentConfig& c, const std::string& v) {
            if (v == "back-action") {
                c.cqed.params.record_phase = RecordPhase::BackAction;
            } else if (v == "info-gain") {
                c.cqed.params.record_phase = RecordPhase::InfoGain;
            } else {
                throw ValueError("expected 'back-action' or 'info-gain', got '" + v + "'");
            }
        };
        t["cqed.t_m"] = [](ExperimentConfig& c, const std::string& v) { c.cqed.t_m = parse_real(v); };
        t["cqed.n_steps"] = [](ExperimentConfig& c, const std::string& v) {
            const auto n = parse_int(v);
            if (n < 1) {
                throw ValueError("n_steps must be >= 1");
            }
            c.cqed.n_steps = static_cast<std::size_t>(n);
        };
        t["cqed.stepper"] = [](ExperimentConfig& c, const std::string& v) {
            if (v == "bayes") {
                c.cqed.stepper = CqedStepper::Bayes;
            } else if (v == "qte") {
                c.cqed.stepper = CqedStepper::Qte;
            } else {
                throw ValueError("expected 'bayes' or 'qte', got '" + v + "'");
            }
        };
        t["cqed.phi_points"] = [](ExperimentConfig& c, const std::string& v) { c.cqed.phi_points = static_cast<int>(parse_int(v)); };
        return t;
    }();
    return table;
}

struct Assignment {
    std::string key;
    std::string value;
    int line;
};

void flatten_json(const nlohmann::json& j, const std::string& prefix, std::vector<Assignment>& out)
{
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            flatten_json(v, prefix.empty() ? k : prefix + "." + k, out);
        }
        return;
    }
    std::string value;
    if (j.is_string()) {
        value = j.get<std::string>();
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            value += (i ? ", " : "") + (j[i].is_string() ? j[i].get<std::string>() : j[i].dump());
        }
    } else {
        value = j.dump();
    }
    out.push_back({prefix, value, 0});
}

void apply_assignments(ParsedConfig& parsed, const std::vector<Assignment>& assignments)
{
    bool explicit_state = false;
    bool explicit_theta = false;
    for (const auto& a : assignments) {
        const auto it = setters().find(a.key);
        if (it == setters().end()) {
            parsed.diagnostics.push_back({Severity::Error, a.key, a.line, "unknown key"});
            continue;
        }
        if (parsed.lines.count(a.key)) {
            parsed.diagnostics.push_back({Severity::Error, a.key, a.line, "duplicate key"});
            continue;
        }
        parsed.lines[a.key] = a.line;
        try {
            it->second(parsed.config, a.value);
        } catch (const ValueError& e) {
            parsed.diagnostics.push_back({Severity::Error, a.key, a.line, e.what()});
        }
        explicit_state = explicit_state || a.key.rfind("selection.psi_", 0) == 0;
        explicit_theta = explicit_theta || a.key == "selection.theta";
    }
    if (explicit_state) {
        if (explicit_theta) {
            parsed.diagnostics.push_back({Severity::Error, "selection.theta", parsed.lines["selection.theta"],
                                          "give either selection.theta or explicit psi_i/psi_f amplitudes"});
        }
        parsed.config.theta.reset();
    }
}

}  // namespace

PrePostSelection ExperimentConfig::selection() const
{
    if (theta) {
        return theta_selection(*theta * std::numbers::pi);
    }
    return {PureState(psi_i.c1, psi_i.c2), PureState(psi_f.c1, psi_f.c2)};
}

std::string Diagnostic::format() const
{
    std::ostringstream out;
    out << (severity == Severity::Error ? "error" : "warning") << ": ";
    if (line > 0) {
        out << "line " << line << ": ";
    }
    if (!field.empty()) {
        out << field << ": ";
    }
    out << message;
    return out.str();
}

bool has_errors(const std::vector<Diagnostic>& diagnostics)
{
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

ParsedConfig parse_config(std::string_view text)
{
    ParsedConfig parsed;
    std::vector<Assignment> assignments;

    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        try {
            const auto j = nlohmann::json::parse(text);
            flatten_json(j, "", assignments);
        } catch (const nlohmann::json::exception& e) {
            parsed.diagnostics.push_back({Severity::Error, "", 0, std::string("invalid JSON: ") + e.what()});
            return parsed;
        }
        apply_assignments(parsed, assignments);
        return parsed;
    }

    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find_first_of("#;");
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                parsed.diagnostics.push_back({Severity::Error, "", line_no, "malformed section header"});
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            parsed.diagnostics.push_back({Severity::Error, "", line_no, "expected 'key = value'"});
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));
        if (key.empty()) {
            parsed.diagnostics.push_back({Severity::Error, "", line_no, "empty key"});
            continue;
        }
        assignments.push_back({section.empty() ? key : section + "." + key, value, line_no});
    }
    apply_assignments(parsed, assignments);
    return parsed;
}

ParsedConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ParsedConfig parsed;
        parsed.diagnostics.push_back({Severity::Error, "", 0, "cannot read config file '" + path.string() + "'"});
        return parsed;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names{
        "fig1", "wv-sweep", "convergence", "amplifier-invariance",
        "cqed-quadratures", "cqed-tomography", "bayes-qte-equivalence",
    };
    return names;
}

std::string_view experiment_description(std::string_view name)
{
    if (name == "fig1") return "weak value vs selection angle: linear and non-perturbative curves with Monte Carlo";
    if (name == "wv-sweep") return "post-selected mean vs measurement strength g: closed forms, quadrature, Monte Carlo";
    if (name == "convergence") return "strong error of every stepper against a fine Bayesian reference";
    if (name == "amplifier-invariance") return "weak value through a noisy linear amplifier: closed form and sampled chain";
    if (name == "cqed-quadratures") return "cQED post-selected mean vs local-oscillator phase";
    if (name == "cqed-tomography") return "state reconstruction from the two cQED quadratures";
    if (name == "bayes-qte-equivalence") return "Bayes rule vs Ito steppers: local and strong discrepancies with fitted orders";
    return "";
}

std::vector<Diagnostic> validate(const ExperimentConfig& c, const std::map<std::string, int>& lines)
{
    std::vector<Diagnostic> out;
    auto line_of = [&](const std::string& key) {
        const auto it = lines.find(key);
        return it == lines.end() ? 0 : it->second;
    };
    auto error = [&](const std::string& key, const std::string& msg) {
        out.push_back({Severity::Error, key, line_of(key), msg});
    };
    auto warning = [&](const std::string& key, const std::string& msg) {
        out.push_back({Severity::Warning, key, line_of(key), msg});
    };
    auto num = [](double v) {
        std::ostringstream s;
        s << v;
        return s.str();
    };

    const auto& names = experiment_names();
    if (c.experiment.empty()) {
        error("experiment", "experiment is required");
    } else if (std::find(names.begin(), names.end(), c.experiment) == names.end()) {
        error("experiment", "unknown experiment '" + c.experiment + "'");
    }
    if (!c.seed) {
        error("seed", "seed is required");
    }
    if (c.n_traj < 1) {
        error("n_traj", "n_traj must be >= 1 (got " + std::to_string(c.n_traj) + ")");
    }
    if (c.output.empty()) {
        error("output", "output directory must not be empty");
    }

    const auto& m = c.measurement;
    bool measurement_ok = true;
    if (!(m.gamma > 0.0) || !std::isfinite(m.gamma)) {
        error("measurement.gamma", "gamma must be > 0 (got " + num(m.gamma) + ")");
        measurement_ok = false;
    }
    if (!(m.dt_step > 0.0) || !std::isfinite(m.dt_step)) {
        error("measurement.dt", "dt must be > 0 (got " + num(m.dt_step) + ")");
        measurement_ok = false;
    }
    if (!(m.t_total >= m.dt_step) || !std::isfinite(m.t_total)) {
        error("measurement.t_total", "t_total must be >= dt (got " + num(m.t_total) + ")");
        measurement_ok = false;
    }
    if (measurement_ok && c.stepper != Stepper::BayesExact && !m.step_guard_ok()) {
        warning("measurement.dt", "4 sqrt(gamma dt) = " + num(4.0 * std::sqrt(m.gamma * m.dt_step)) +
                                      " exceeds 0.2; SDE steps may leave the physical region");
    }

    if (c.theta) {
        if (!(*c.theta > 0.0 && *c.theta < 1.0)) {
            error("selection.theta", "theta must lie in (0, 1) in units of pi (got " + num(*c.theta) + ")");
        }
    } else {
        for (const auto& [name, spec] : {std::pair{"selection.psi_i", c.psi_i}, std::pair{"selection.psi_f", c.psi_f}}) {
            if (std::abs(spec.norm2() - 1.0) > kNormTolerance) {
                const std::string key = std::string(name) + ".c1";
                out.push_back({Severity::Error, name, line_of(key),
                               "state not normalized: |c1|^2 + |c2|^2 = " + num(spec.norm2())});
            }
        }
    }

    if (!(c.fig1.theta_min > 0.0 && c.fig1.theta_min < c.fig1.theta_max && c.fig1.theta_max < 1.0)) {
        error("fig1.theta_max", "need 0 < theta_min < theta_max < 1 (units of pi)");
    }
    if (c.fig1.points < 3) {
        error("fig1.points", "fig1.points must be >= 3");
    }
    if (std::any_of(c.sweep.g.begin(), c.sweep.g.end(), [](double g) { return !(g > 0.0); })) {
        error("sweep.g", "every g must be > 0");
    }

    const auto& cv = c.convergence;
    if (cv.dt.size() < 2 || std::any_of(cv.dt.begin(), cv.dt.end(), [](double d) { return !(d > 0.0); })) {
        error("convergence.dt", "need at least two positive step sizes");
    } else if (cv.refine >= 1 && cv.horizon > 0.0 &&
               (c.experiment == "convergence" || c.experiment == "bayes-qte-equivalence")) {
        const double fine = *std::min_element(cv.dt.begin(), cv.dt.end()) / cv.refine;
        for (double d : cv.dt) {
            const double ratio = d / fine;
            if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio) {
                error("convergence.dt", "every dt must be an integer multiple of min(dt)/refine");
                break;
            }
            const double steps = cv.horizon / d;
            if (steps < 1.0 - 1e-9 || std::abs(steps - std::round(steps)) > 1e-6 * steps) {
                error("convergence.horizon", "horizon must be an integer multiple of every dt");
                break;
            }
        }
        const double coarse = *std::max_element(cv.dt.begin(), cv.dt.end());
        if (measurement_ok && 4.0 * std::sqrt(m.gamma * coarse) > 0.2 + 1e-15) {
            warning("convergence.dt", "largest dt violates the step guard 4 sqrt(gamma dt) <= 0.2");
        }
    }
    if (cv.refine < 1) {
        error("convergence.refine", "refine must be >= 1");
    }
    if (!(cv.horizon > 0.0)) {
        error("convergence.horizon", "horizon must be > 0");
    }

    const auto& amp = c.amplifier;
    if (!(amp.model.R > 0.0)) {
        error("amplifier.R", "gain R must be > 0 (got " + num(amp.model.R) + ")");
    }
    if (std::any_of(amp.sigma_over_eps.begin(), amp.sigma_over_eps.end(), [](double s) { return !(s >= 0.0); })) {
        error("amplifier.sigma_over_eps", "noise levels must be >= 0");
    }
    if (amp.random_points < 1) {
        error("amplifier.random_points", "random_points must be >= 1");
    }

    const auto& q = c.cqed;
    if (!(q.params.kappa > 0.0)) {
        error("cqed.kappa", "kappa must be > 0 (got " + num(q.params.kappa) + ")");
    } else if (!q.params.bad_cavity_ok()) {
        warning("cqed.chi", "chi/kappa = " + num(std::abs(q.params.chi) / q.params.kappa) +
                                " >= 0.1: outside the bad-cavity limit assumed by the steady-state rates");
    }
    if (!(q.params.purity_factor > 0.0 && q.params.purity_factor <= 1.0)) {
        error("cqed.purity_factor", "purity_factor must lie in (0, 1]");
    }
    if (!(q.t_m > 0.0)) {
        error("cqed.t_m", "t_m must be > 0 (got " + num(q.t_m) + ")");
    }
    if (q.phi_points < 1) {
        error("cqed.phi_points", "phi_points must be >= 1");
    }
    return out;
}

}  // namespace weakval
