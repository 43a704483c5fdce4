#include "spincat/benchmarks.hpp"
#include "spincat/cat_code.hpp"
#include "spincat/cycle.hpp"
#include "spincat/io.hpp"
#include "spincat/protocols.hpp"
#include "spincat/pulse.hpp"
#include "spincat/wigner.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <omp.h>

#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <regex>

using namespace spincat;
using io::json;
using io::Table;
using io::ValidationError;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 2;
constexpr int exit_numerical = 3;

// Subcommand parameters: defaults, overridden by the config file's "params", overridden by flags
// given on the command line. The merged set is what lands in the resolved config.
class ParamSet {
public:
    template <class T>
    void add(CLI::App* app, const std::string& flag, const std::string& key, T def, const std::string& help) {
        auto holder = std::make_shared<T>(def);
        CLI::Option* opt = app->add_option(flag, *holder, help)->capture_default_str();
        entries_.push_back({key, json(def), opt, [holder] { return json(*holder); }});
    }
    void add_flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        auto holder = std::make_shared<bool>(false);
        CLI::Option* opt = app->add_flag(flag, *holder, help);
        entries_.push_back({key, json(false), opt, [holder] { return json(*holder); }});
    }

    json resolve(const json& from_config) const {
        json out = json::object();
        for (const auto& e : entries_) out[e.key] = e.def;
        for (const auto& [key, value] : from_config.items()) {
            if (!out.contains(key)) throw ValidationError(fmt::format("unknown key '{}' in params", key));
            if (value.type() != out[key].type() && !(value.is_number() && out[key].is_number()))
                throw ValidationError(fmt::format("params.{} has the wrong type", key));
            out[key] = value;
        }
        for (const auto& e : entries_)
            if (e.opt->count() > 0) out[e.key] = e.get();
        return out;
    }

private:
    struct Entry {
        std::string key;
        json def;
        CLI::Option* opt;
        std::function<json()> get;
    };
    std::vector<Entry> entries_;
};

// Flags shared by every experiment; they map onto RunConfig fields.
struct Common {
    std::string config_path;
    std::string out;
    std::string code;  // "N=6,I=30"
    int n = 6;
    std::string i_spec;
    double eta = 10.0;
    std::string k = "auto";
    std::string l = "auto";
    int threads = 0;
    std::uint64_t seed = 0;
    std::map<std::string, CLI::Option*> opts;

    void attach(CLI::App* app) {
        opts["config"] = app->add_option("--config", config_path, "JSON run config (e.g. a resolved config)");
        opts["out"] = app->add_option("--out", out, "output directory (default $SPINCAT_OUT or ./out)");
        opts["code"] = app->add_option("--code", code, "code parameters as N=..,I=..");
        opts["N"] = app->add_option("--N", n, "number of cat components");
        opts["I"] = app->add_option("--I", i_spec, "spin length: value, list a,b,c or range lo:hi:step");
        opts["eta"] = app->add_option("--eta", eta, "noise bias gamma_z / (gamma_+ + gamma_-)");
        opts["k"] = app->add_option("--k", k, "ladder correction order or auto");
        opts["l"] = app->add_option("--l", l, "dephasing correction order or auto");
        opts["threads"] = app->add_option("--threads", threads, "OpenMP threads (0: default)");
        opts["seed"] = app->add_option("--seed", seed, "seed for randomized searches");
    }
    bool given(const std::string& name) const { return opts.at(name)->count() > 0; }
};

std::vector<int> parse_spin_list(const std::string& spec) {
    std::vector<int> out;
    static const std::regex range(R"(^\s*(\d+)\s*:\s*(\d+)\s*(?::\s*(\d+))?\s*$)");
    std::smatch m;
    if (std::regex_match(spec, m, range)) {
        const int lo = std::stoi(m[1]), hi = std::stoi(m[2]);
        const int step = m[3].matched ? std::stoi(m[3]) : 1;
        if (step <= 0 || hi < lo) throw ValidationError(fmt::format("bad range '{}'", spec));
        for (int i = lo; i <= hi; i += step) out.push_back(i);
        return out;
    }
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const std::size_t next = spec.find(',', pos);
        const std::string tok = spec.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        try {
            std::size_t used = 0;
            const int v = std::stoi(tok, &used);
            if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ValidationError(fmt::format("bad spin length '{}'", tok));
        }
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

int parse_auto(const std::string& s, const char* what) {
    if (s == "auto") return -1;
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used == s.size() && v >= 0) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError(fmt::format("--{} must be a non-negative integer or auto", what));
}

struct Run {
    io::RunConfig cfg;
    json params;
    std::vector<int> spins;
    std::filesystem::path out;

    std::filesystem::path file(const std::string& name) const { return out / name; }
};

// Builds the resolved configuration for one experiment and writes it next to the results.
Run resolve(const std::string& experiment, io::UnitSystem units, double default_eta, const Common& c,
            const ParamSet& ps) {
    Run r;
    r.cfg.eta = default_eta;
    if (c.given("config")) {
        const json j = json::parse(io::read_text(c.config_path), nullptr, true, true);
        r.cfg = io::parse_run_config(j);
        if (!j.contains("noise")) r.cfg.eta = default_eta;
        if (r.cfg.experiment != experiment)
            throw ValidationError(
                fmt::format("config is for '{}', not '{}'", r.cfg.experiment, experiment));
    } else {
        r.cfg.output_dir = io::default_output_root();
    }
    if (c.given("config") && r.cfg.units != units)
        throw ValidationError(fmt::format("'{}' runs in {} units", experiment, units == io::UnitSystem::a ? "a" : "gamma_tot"));
    r.cfg.experiment = experiment;
    r.cfg.units = units;

    std::string spin_spec = r.cfg.params.value("I_values", std::string());
    if (c.given("code")) {
        static const std::regex kv(R"(^\s*N\s*=\s*(\d+)\s*,\s*I\s*=\s*([0-9:,]+)\s*$)");
        std::smatch m;
        if (!std::regex_match(c.code, m, kv)) throw ValidationError("--code expects N=<int>,I=<spec>");
        r.cfg.n_components = std::stoi(m[1]);
        spin_spec = m[2];
    }
    if (c.given("N")) r.cfg.n_components = c.n;
    if (c.given("I")) spin_spec = c.i_spec;
    if (c.given("eta")) {
        r.cfg.eta = c.eta;
        r.cfg.explicit_rates = false;
    }
    if (c.given("k")) r.cfg.k = parse_auto(c.k, "k");
    if (c.given("l")) r.cfg.l = parse_auto(c.l, "l");
    if (c.given("threads")) r.cfg.threads = c.threads;
    if (c.given("seed")) r.cfg.seed = c.seed;
    if (c.given("out")) r.cfg.output_dir = c.out;

    json from_config = r.cfg.params;
    from_config.erase("I_values");
    r.params = ps.resolve(from_config);
    r.spins = spin_spec.empty() ? std::vector<int>{r.cfg.spin} : parse_spin_list(spin_spec);
    if (r.spins.empty()) throw ValidationError("no spin lengths given");
    r.cfg.spin = r.spins.front();
    r.params["I_values"] = spin_spec.empty() ? std::to_string(r.cfg.spin) : spin_spec;
    r.cfg.params = r.params;

    // Round-trip through the validator so CLI-built configs obey the same rules as files.
    const json resolved = io::resolved_config(r.cfg);
    r.cfg = io::parse_run_config(resolved);
    r.out = r.cfg.output_dir;
    if (r.cfg.threads > 0) omp_set_num_threads(r.cfg.threads);
    io::write_json(r.file("resolved_config.json"), resolved);
    return r;
}

int auto_l(const CatCode& code, int l) { return l >= 0 ? l : std::max(1, max_dephasing_order(code, 1e-6)); }
int auto_k(const CatCode& code, int k) { return k >= 0 ? k : code.ladder_order(); }

double eta_of(const io::RunConfig& c) {
    if (!c.explicit_rates) return c.eta;
    if (c.rates.gamma_plus != c.rates.gamma_minus)
        throw ValidationError("this experiment assumes gamma_+ = gamma_-; give noise.eta instead");
    return c.rates.eta();
}

// Runs f over the points in parallel; results are stored by index and written afterwards.
template <class R, class F>
std::vector<R> parallel_points(std::size_t n, F&& f) {
    std::vector<R> out(n);
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < n; ++i) {
        try {
            out[i] = f(i);
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return out;
}

LogicalGate parse_gate(const std::string& s) {
    for (auto g : {LogicalGate::cnot_ensemble, LogicalGate::cnot_electron, LogicalGate::hadamard, LogicalGate::phase})
        if (gate_label(g) == s) return g;
    throw ValidationError(fmt::format("unknown gate '{}' (CNOT_ens, CNOT_el, H, P, all)", s));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find(',', pos);
        out.push_back(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    if (s.empty()) return out;
    for (const auto& tok : split_list(s)) out.push_back(io::as_double(io::Cell(tok)));
    return out;
}

ErrorWord parse_word(const std::string& w) {
    try {
        return parse_error_word(w);
    } catch (const std::exception& e) {
        throw ValidationError(fmt::format("bad error word '{}': {}", w, e.what()));
    }
}

using Handler = std::function<void()>;

struct Experiment {
    CLI::App* app;
    Common common;
    ParamSet params;
    Handler run;
};

// ---- experiments ----

void kl_scan(const Run& r) {
    const double tol = r.params["tol"];
    const int brute_max = r.params["brute_force_max_I"];
    struct Row {
        int l_cheb = 0, l_power = -1;
    };
    const auto rows = parallel_points<Row>(r.spins.size(), [&](std::size_t i) {
        const CatCode code(r.cfg.n_components, SpinLength::from_value(r.spins[i]));
        Row row;
        row.l_cheb = max_dephasing_order(code, tol);
        if (r.spins[i] <= brute_max) row.l_power = max_dephasing_order_power(code, tol);
        return row;
    });
    Table t({"N", "I", "l_max", "l_max_power", "agree"});
    std::vector<std::pair<int, int>> samples;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const bool checked = rows[i].l_power >= 0;
        t.add({(long long)r.cfg.n_components, (long long)r.spins[i], (long long)rows[i].l_cheb,
               checked ? io::Cell((long long)rows[i].l_power) : io::Cell(std::string()),
               checked ? io::Cell(std::string(rows[i].l_power == rows[i].l_cheb ? "yes" : "no")) : io::Cell(std::string())});
        samples.emplace_back(r.spins[i], rows[i].l_cheb);
    }
    io::write_table(r.file("kl_scan"), t);
    if (samples.size() >= 2) {
        const auto fit = fit_line(samples);
        Table f({"N", "alpha", "beta", "residual", "alpha_ref_2_over_N", "degenerate"});
        f.add({(long long)r.cfg.n_components, fit.alpha, fit.beta, fit.residual, 2.0 / r.cfg.n_components,
               std::string(fit.degenerate ? "yes" : "no")});
        io::write_table(r.file("kl_fit"), f);
        fmt::print("alpha = {:.4f} (2/N = {:.4f}), beta = {:.3f}\n", fit.alpha, 2.0 / r.cfg.n_components, fit.beta);
    }
    fmt::print("{} spin lengths scanned\n", r.spins.size());
}

void encode(const Run& r) {
    Table t({"N", "I", "which", "fidelity", "roundtrip_error"});
    for (int spin : r.spins) {
        const CatCode code(r.cfg.n_components, SpinLength::from_value(spin));
        const ProtocolParams p(code);
        const Circuit enc = encode_circuit(p);
        const Circuit dec = decode_circuit(p);
        const Mat u = circuit_unitary(dec, code.spin()) * circuit_unitary(enc, code.spin());
        const double roundtrip = (u - Mat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
        for (int b = 0; b < 2; ++b) {
            const JointState in =
                product_state(b == 0 ? 1.0 : 0.0, b == 1 ? 1.0 : 0.0, dicke_state(code.spin(), code.spin().value()));
            const JointState out = apply_circuit(enc, in);
            const double f = std::norm(code.codeword(b).amp.dot(out.block(0)));
            t.add({(long long)r.cfg.n_components, (long long)spin, (long long)b, f, roundtrip});
        }
        io::write_json(r.file(fmt::format("encode_circuit_I{}.json", spin)), io::circuit_to_json(enc));
    }
    io::write_table(r.file("encode"), t);
    fmt::print("{}", io::to_csv(t));
}

void gates_test(const Run& r) {
    std::vector<LogicalGate> gates;
    const std::string which = r.params["gate"];
    if (which == "all")
        gates = {LogicalGate::cnot_ensemble, LogicalGate::cnot_electron, LogicalGate::hadamard, LogicalGate::phase};
    else
        for (const auto& g : split_list(which)) gates.push_back(parse_gate(g));
    std::vector<ErrorWord> words;
    for (const auto& w : split_list(r.params["words"])) words.push_back(parse_word(w));

    Table t({"N", "I", "k", "l", "gate", "word", "F_0", "F_1", "F_plus", "F_minus", "worst", "annihilated"});
    for (int spin : r.spins) {
        CatCode code(r.cfg.n_components, SpinLength::from_value(spin));
        const int l = auto_l(code, r.cfg.l), k = auto_k(code, r.cfg.k);
        code.set_dephasing_order(l);
        const ProtocolParams p(code);
        struct Job {
            LogicalGate g;
            const ErrorWord* w;
        };
        std::vector<Job> jobs;
        for (auto g : gates)
            for (const auto& w : words) jobs.push_back({g, &w});
        const auto reports = parallel_points<FTGateReport>(
            jobs.size(), [&](std::size_t i) { return ft_gate_test(jobs[i].g, *jobs[i].w, p, k, l); });
        for (const auto& rep : reports)
            t.add({(long long)r.cfg.n_components, (long long)spin, (long long)k, (long long)l, gate_label(rep.gate),
                   rep.word, rep.fidelity[0], rep.fidelity[1], rep.fidelity[2], rep.fidelity[3], rep.worst(),
                   std::string(rep.annihilated ? "yes" : "no")});
    }
    io::write_table(r.file("gates_test"), t);
    fmt::print("{}", io::to_csv(t));
}

void correct(const Run& r) {
    const std::string stage = r.params["stage"];
    if (stage != "pm" && stage != "z" && stage != "both") throw ValidationError("--stage must be pm, z or both");
    Table t({"N", "I", "stage", "word", "fidelity", "trace_error"});
    for (int spin : r.spins) {
        CatCode code(r.cfg.n_components, SpinLength::from_value(spin));
        const int l = auto_l(code, r.cfg.l), k = auto_k(code, r.cfg.k);
        code.set_dephasing_order(l);
        const ProtocolParams p(code);
        Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
        v(0) = v(2) = 1.0 / std::sqrt(2.0);
        const JointState ref = encode_logical(code, v);
        std::vector<std::pair<std::string, Circuit>> circuits;
        if (stage != "z") circuits.emplace_back("pm", correct_pm(p, k));
        if (stage != "pm") circuits.emplace_back("z", correct_dephasing_single(p, l));
        for (const auto& [name, c] : circuits) {
            io::write_json(r.file(fmt::format("correct_{}_I{}.json", name, spin)), io::circuit_to_json(c));
            for (const auto& w : split_list(r.params[name == "pm" ? "pm_words" : "z_words"])) {
                const JointState st = encode_logical(code, v, parse_word(w));
                const Mat rho = st.amp * st.amp.adjoint();
                const Mat out = apply_circuit(c, rho, code.spin());
                const double f = (ref.amp.adjoint() * out * ref.amp)(0, 0).real();
                t.add({(long long)r.cfg.n_components, (long long)spin, name, w, f, std::abs(out.trace() - 1.0)});
            }
        }
    }
    io::write_table(r.file("correct"), t);
    fmt::print("{}", io::to_csv(t));
}

void taumax(const Run& r) {
    const bool large = r.params["large"];
    for (int spin : r.spins)
        if (spin > 60 && !large) throw ValidationError(fmt::format("I = {} needs --large (hours of runtime)", spin));
    const double eta = eta_of(r.cfg);
    const auto res = parallel_points<ImprovementResult>(r.spins.size(), [&](std::size_t i) {
        BenchmarkConfig bc;
        bc.n_components = r.cfg.n_components;
        bc.spin = r.spins[i];
        bc.eta = eta;
        bc.f_target = r.params["ftarget"];
        bc.k = r.cfg.k;
        if (r.cfg.l >= 0) bc.l_min = bc.l_max = r.cfg.l;
        bc.solver = r.cfg.solver;
        return improvement_ratio(bc);
    });
    Table t({"N", "I", "eta", "f_target", "tau_max[1/gamma_tot]", "l_used", "fidelity", "unbounded",
             "t_dicke[1/gamma_tot]", "R", "R_published"});
    for (std::size_t i = 0; i < res.size(); ++i) {
        const auto ref = r.spins[i] == 210 ? table_one_reference(r.cfg.n_components, eta) : std::nullopt;
        t.add({(long long)r.cfg.n_components, (long long)r.spins[i], eta, r.params["ftarget"].get<double>(),
               res[i].tau.tau_max, (long long)res[i].tau.l_used, res[i].tau.fidelity,
               std::string(res[i].tau.unbounded ? "yes" : "no"), res[i].t_dicke, res[i].ratio,
               ref ? io::Cell(*ref) : io::Cell(std::string())});
    }
    io::write_table(r.file("taumax"), t);
    fmt::print("{}", io::to_csv(t));
}

void dicke(const Run& r) {
    const double eta = eta_of(r.cfg);
    const double eps = r.params["eps"];
    const bool lindblad = r.params["lindblad"];
    const auto times = parse_doubles(r.params["t"]);
    Table t({"I", "eta", "t[1/gamma_tot]", "infidelity_closed_form", "infidelity_lindblad"});
    Table td({"I", "eta", "eps", "t_dicke[1/gamma_tot]"});
    for (int spin : r.spins) {
        td.add({(long long)spin, eta, eps, dicke_time(eta, spin, eps)});
        for (double time : times) {
            if (!(time >= 0.0)) throw ValidationError("times must be non-negative");
            t.add({(long long)spin, eta, time, dicke_infidelity(time, eta, spin),
                   lindblad ? io::Cell(dicke_lindblad_infidelity(time, eta, spin, JumpAccounting::first_jump))
                            : io::Cell(std::string())});
        }
    }
    io::write_table(r.file("dicke_time"), td);
    if (!t.rows.empty()) io::write_table(r.file("dicke"), t);
    fmt::print("{}{}", io::to_csv(td), t.rows.empty() ? "" : io::to_csv(t));
}

PulseSequence sequence_from(const json& p) {
    PulseSequence s;
    s.tau = p["tau"];
    s.switches = parse_doubles(p["switches"]);
    s.initial_sign = p["initial_sign"];
    try {
        s.validate();
    } catch (const std::exception& e) {
        throw ValidationError(e.what());
    }
    return s;
}

void pulses_coeffs(const Run& r) {
    const PulseSequence s = sequence_from(r.params);
    const int l_max = r.params["l_max"];
    if (l_max < 0) throw ValidationError("--lmax must be >= 0");
    const auto fc = fourier_coeffs(s, l_max);
    Table t({"l", "omega_l[a]", "P_l", "Q_l"});
    for (int l = 0; l <= l_max; ++l) t.add({(long long)l, fc.omega(l), fc.p[l], fc.q[l]});
    io::write_table(r.file("pulse_coeffs"), t);
    fmt::print("{}", io::to_csv(t));
}

json sequence_json(const PulseSequence& s) {
    return json{{"tau", s.tau}, {"switches", s.switches}, {"initial_sign", s.initial_sign}};
}

void pulses_optimize(const Run& r) {
    const int l = r.params["harmonic"];
    const auto res = optimize_sequence(l, r.params["tau"], r.params["max_switches"], r.params["p_tol"],
                                       r.params["q_floor"]);
    const auto shifted = quarter_shifted(res.sequence, l);
    const auto fc = fourier_coeffs(shifted, l);
    io::write_json(r.file("pulse_opt.json"), json{{"harmonic", l},
                                                   {"sin_type", sequence_json(res.sequence)},
                                                   {"Q_l", res.q},
                                                   {"P_l", res.p},
                                                   {"cos_type", sequence_json(shifted)},
                                                   {"cos_type_P_l", fc.p[l]},
                                                   {"cos_type_Q_l", fc.q[l]},
                                                   {"budget_limited", res.budget_limited}});
    Table t({"sequence", "index", "switch_time[1/a]"});
    for (std::size_t i = 0; i < res.sequence.switches.size(); ++i)
        t.add({std::string("sin_type"), (long long)i, res.sequence.switches[i]});
    for (std::size_t i = 0; i < shifted.switches.size(); ++i)
        t.add({std::string("cos_type"), (long long)i, shifted.switches[i]});
    io::write_table(r.file("pulse_opt_switches"), t);
    fmt::print("|Q_{}| = {:.6f}, |P_{}| = {:.2e}{}\n", l, std::abs(res.q), l, std::abs(res.p),
               res.budget_limited ? " (budget limited)" : "");
}

void pulses_simulate(const Run& r) {
    const int l = r.params["harmonic"];
    const auto opt = optimize_sequence(l, 1.0);
    const auto seq = quarter_shifted(opt.sequence, l);
    DriveParams dp;
    dp.omega_n = r.params["omega_n"];
    dp.a_nc = r.params["a_nc"];
    const double theta = r.params["theta"];
    if (!(dp.omega_n > 0.0)) throw ValidationError("--omega-n must be positive");
    Table t({"I", "theta[rad]", "omega_n[a]", "a_nc[a]", "fidelity", "fitted_fidelity", "strength[a]",
             "predicted_strength[a]", "axis[rad]", "duration[1/a]", "periods"});
    const auto res = parallel_points<EngineeredRotation>(r.spins.size(), [&](std::size_t i) {
        return engineered_rotation_sim(seq, l, SpinLength::from_value(r.spins[i]), dp, theta);
    });
    for (std::size_t i = 0; i < res.size(); ++i)
        t.add({(long long)r.spins[i], theta, dp.omega_n, dp.a_nc, res[i].fidelity, res[i].fitted_fidelity,
               res[i].effective_strength, res[i].predicted_strength, res[i].axis_angle, res[i].duration,
               (long long)res[i].periods});
    io::write_table(r.file("pulse_sim"), t);
    fmt::print("{}", io::to_csv(t));
}

void cycle_time(const Run& r) {
    CycleConfig base;
    base.n_components = r.cfg.n_components;
    base.f_target = r.params["ftarget"];
    base.gamma_tot = r.params["gamma_tot"];
    base.eta = eta_of(r.cfg);
    base.omega_n = r.params["omega_n"];
    base.a_nc = r.params["a_nc"];
    base.kappa_sideband = r.params["kappa"];
    const std::string model = r.params["model"];
    if (model == "effective")
        base.engineered = EngineeredModel::effective;
    else if (model == "exact")
        base.engineered = EngineeredModel::exact;
    else
        throw ValidationError("--model must be effective or exact");
    const auto res = parallel_points<CycleResult>(r.spins.size(), [&](std::size_t i) {
        CycleConfig c = base;
        c.spin = r.spins[i];
        return realistic_cycle_time(c);
    });
    Table t({"I", "model", "feasible", "tau_exec[1/a]", "pm_duration[1/a]", "pm_error", "z_duration[1/a]", "z_error",
             "idle_error", "fidelity", "omega_cond[a]", "omega_sideband[a]", "l", "bottleneck"});
    for (std::size_t i = 0; i < res.size(); ++i) {
        const auto& x = res[i];
        t.add({(long long)r.spins[i], model, std::string(x.feasible ? "yes" : "no"), x.timing.tau_exec,
               x.timing.pm.duration, x.timing.pm.error, x.timing.z.duration, x.timing.z.error, x.timing.idle_error,
               x.timing.fidelity, x.allocation.omega_cond, x.allocation.omega_sideband, (long long)x.allocation.l,
               x.bottleneck});
    }
    io::write_table(r.file("cycle_time"), t);
    fmt::print("{}", io::to_csv(t));
}

void wigner(const Run& r) {
    static const std::regex grid_re(R"(^\s*(\d+)\s*x\s*(\d+)\s*$)");
    std::smatch m;
    const std::string grid_spec = r.params["grid"];
    if (!std::regex_match(grid_spec, m, grid_re)) throw ValidationError("--grid expects <n_theta>x<n_phi>");
    const int nt = std::stoi(m[1]), np = std::stoi(m[2]);
    if (nt < 2 || np < 1) throw ValidationError("grid too small");
    const int which = r.params["which"];
    if (which != 0 && which != 1) throw ValidationError("--which must be 0 or 1");
    const CatCode code(r.cfg.n_components, SpinLength::from_value(r.cfg.spin));
    const auto field = wigner_sphere(code.codeword(which), make_grid(nt, np));
    Table t({"theta[rad]", "phi[rad]", "W"});
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < np; ++j) t.add({field.grid.theta[i], field.grid.phi[j], field.values(i, j)});
    io::write_table(r.file("wigner"), t);
    io::write_json(r.file("wigner_summary.json"), json{{"N", r.cfg.n_components},
                                                         {"I", r.cfg.spin},
                                                         {"which", which},
                                                         {"integral", integrate_sphere(field)},
                                                         {"max", field.values.maxCoeff()},
                                                         {"min", field.values.minCoeff()},
                                                         {"max_imag", field.max_imag}});
    fmt::print("wrote {} samples, integral {:.6f}\n", t.rows.size(), integrate_sphere(field));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spin-cat code simulations: encoding, gates, correction, noise benchmarks and pulse design."};
    app.require_subcommand(1);
    app.fallthrough(false);

    std::vector<std::unique_ptr<Experiment>> experiments;
    auto make = [&](CLI::App* parent, const std::string& name, const std::string& help, const std::string& id,
                    io::UnitSystem units, auto&& body, double default_eta = 10.0) -> Experiment& {
        auto e = std::make_unique<Experiment>();
        e->app = parent->add_subcommand(name, help);
        e->common.attach(e->app);
        Experiment* ep = e.get();
        e->run = [ep, id, units, body, default_eta]() {
            body(resolve(id, units, default_eta, ep->common, ep->params));
        };
        e->app->callback([ep]() { ep->run(); });
        experiments.push_back(std::move(e));
        return *experiments.back();
    };
    using io::UnitSystem;

    {
        auto& e = make(&app, "kl-scan", "Largest correctable dephasing order per I and the fitted line",
                       "kl-scan", UnitSystem::a, kl_scan);
        e.params.add(e.app, "--tol", "tol", 1e-6, "KL tolerance");
        e.params.add(e.app, "--brute-force-max-I", "brute_force_max_I", 20, "cross-check with powers of Iz up to this I");
    }
    make(&app, "encode", "Encoding circuit fidelity and decode round trip", "encode", UnitSystem::a, encode);
    {
        auto* gates = app.add_subcommand("gates", "Logical gate experiments");
        gates->require_subcommand(1);
        auto& e = make(gates, "test", "Fault-tolerance test of the logical gates under injected errors", "gates test",
                       UnitSystem::a, gates_test);
        e.params.add(e.app, "--gate", "gate", std::string("all"), "CNOT_ens, CNOT_el, H, P, a list, or all");
        e.params.add(e.app, "--words", "words", std::string("1,Iz,Iz^2,Iz^3,I+,I-"), "injected error words");
    }
    {
        auto& e = make(&app, "correct", "Correction circuits with ideal gates", "correct", UnitSystem::a, correct);
        e.params.add(e.app, "--stage", "stage", std::string("both"), "pm, z or both");
        e.params.add(e.app, "--pm-words", "pm_words", std::string("1,I+,I-"), "errors injected before the I+- stage");
        e.params.add(e.app, "--z-words", "z_words", std::string("1,Iz,Iz^2,Iz^3"), "errors injected before the Iz stage");
    }
    {
        auto& e = make(&app, "taumax", "Longest idle time above the target fidelity and the gain over a Dicke qubit",
                       "taumax", UnitSystem::gamma_tot, taumax);
        e.params.add(e.app, "--ftarget", "ftarget", 0.999, "target average fidelity");
        e.params.add_flag(e.app, "--large", "large", "allow I > 60");
    }
    {
        auto& e = make(&app, "dicke", "Unprotected two-level Dicke encoding baseline", "dicke", UnitSystem::gamma_tot,
                       dicke);
        e.params.add(e.app, "--t", "t", std::string("1e-4,1e-3"), "idle times, comma separated");
        e.params.add(e.app, "--eps", "eps", 1e-3, "infidelity budget for t_Dicke");
        e.params.add_flag(e.app, "--lindblad", "lindblad", "also integrate the master equation");
    }
    {
        auto* pulses = app.add_subcommand("pulses", "Modulation sequences for engineered couplings");
        pulses->require_subcommand(1);
        auto& c = make(pulses, "coeffs", "Fourier coefficients of a square modulation", "pulses coeffs",
                       UnitSystem::a, pulses_coeffs);
        c.params.add(c.app, "--tau", "tau", 1.0, "half period");
        c.params.add(c.app, "--switches", "switches", std::string("0.5,1.5"), "switch times in [0, 2 tau)");
        c.params.add(c.app, "--initial-sign", "initial_sign", 1, "+1 or -1");
        c.params.add(c.app, "--lmax", "l_max", 4, "largest harmonic");
        auto& o = make(pulses, "optimize", "Maximize |Q_l| with P_l held at zero", "pulses optimize", UnitSystem::a,
                       pulses_optimize);
        o.params.add(o.app, "--harmonic", "harmonic", 2, "target harmonic l");
        o.params.add(o.app, "--tau", "tau", 1.0, "half period");
        o.params.add(o.app, "--max-switches", "max_switches", 8, "switch budget per period");
        o.params.add(o.app, "--p-tol", "p_tol", 1e-3, "allowed |P_l|");
        o.params.add(o.app, "--q-floor", "q_floor", 0.6, "smallest acceptable |Q_l|");
        auto& s = make(pulses, "simulate", "Exact propagation of the engineered conditional rotation",
                       "pulses simulate", UnitSystem::a, pulses_simulate);
        s.params.add(s.app, "--harmonic", "harmonic", 2, "modulation harmonic");
        s.params.add(s.app, "--theta", "theta", pi / 2.0, "target rotation angle");
        s.params.add(s.app, "--omega-n", "omega_n", 5.0, "nuclear Larmor frequency");
        s.params.add(s.app, "--a-nc", "a_nc", 0.1, "non-collinear hyperfine coupling");
    }
    {
        auto& e = make(&app, "cycle-time", "Fastest single-ensemble correction cycle above the target fidelity",
                       "cycle-time", UnitSystem::a, cycle_time, 100.0);
        e.params.add(e.app, "--ftarget", "ftarget", 0.998, "end-to-end fidelity target");
        e.params.add(e.app, "--gamma-tot", "gamma_tot", 1e-7, "idle collective noise rate in units of a");
        e.params.add(e.app, "--omega-n", "omega_n", 10.0, "nuclear Larmor frequency");
        e.params.add(e.app, "--a-nc", "a_nc", 0.1, "non-collinear hyperfine coupling");
        e.params.add(e.app, "--kappa", "kappa", 0.1, "sideband drive cap as a fraction of omega_n");
        e.params.add(e.app, "--model", "model", std::string("effective"), "engineered gate errors: effective or exact");
    }
    {
        auto& e = make(&app, "wigner", "Spherical Wigner function of a codeword", "wigner", UnitSystem::a, wigner);
        e.params.add(e.app, "--which", "which", 0, "codeword 0 or 1");
        e.params.add(e.app, "--grid", "grid", std::string("91x181"), "<n_theta>x<n_phi>");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return exit_validation;
    } catch (const ValidationError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return exit_validation;
    } catch (const json::exception& e) {
        fmt::print(stderr, "error: config: {}\n", e.what());
        return exit_validation;
    } catch (const std::invalid_argument& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return exit_validation;
    } catch (const std::exception& e) {
        fmt::print(stderr, "numerical failure: {}\n", e.what());
        return exit_numerical;
    }
    return exit_ok;
}
