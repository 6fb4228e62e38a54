#include "emq/cli.hpp"

#include "emq/error.hpp"
#include "emq/kernels.hpp"
#include "emq/protocols.hpp"
#include "emq/verify.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace emq::cli {

namespace {

constexpr double kTwoPi = 2.0 * constants::pi;

struct OptionSpec {
    std::string name;
    std::optional<std::string> fallback;  // nullopt means required
};

struct ScenarioSpec {
    Scenario scenario;
    std::string name;
    std::vector<OptionSpec> options;
    std::map<std::string, Index> truncations;  // label -> default dimension
};

const std::vector<ScenarioSpec>& specs()
{
    static const std::vector<ScenarioSpec> all{
        {Scenario::cool,
         "cool",
         {{"duration", std::nullopt}, {"samples", "101"}, {"n_init", "-1"}, {"model", "full"}},
         {{"a", 4}, {"m", 12}}},
        {Scenario::superpose, "superpose", {{"initial_phonons", "0"}}, {{"m", 3}}},
        {Scenario::teleport_motional,
         "teleport-motional",
         {{"in0_re", "1"}, {"in0_im", "0"}, {"in1_re", "0"}, {"in1_im", "0"}, {"level", "qubit"},
          {"noise_kappa", "0"}, {"noise_gamma", "0"}, {"noise_n_bar", "0"}},
         {{"m", 3}}},
        {Scenario::esr_scan,
         "esr-scan",
         {{"sweep", "Delta_e"}, {"from", std::nullopt}, {"to", std::nullopt}, {"points", "241"},
          {"spin_decay", "0"}, {"spin_dephasing", "0"}, {"prominence", "0.1"}},
         {{"m", 8}}},
        {Scenario::teleport_spin,
         "teleport-spin",
         {{"in0_re", "1"}, {"in0_im", "0"}, {"in1_re", "0"}, {"in1_im", "0"}, {"level", "qubit"},
          {"spin_decay", "1e3"}, {"spin_dephasing", "1e3"}, {"noise_kappa", "0"},
          {"noise_gamma", "0"}, {"noise_n_bar", "0"}},
         {{"m", 3}}},
        {Scenario::verify_all, "verify-all", {{"instances", "20"}}, {}},
        {Scenario::params, "params", {}, {}},
    };
    return all;
}

const ScenarioSpec& spec_of(Scenario s)
{
    for (const auto& sp : specs()) {
        if (sp.scenario == s) return sp;
    }
    throw InvalidArgument("unknown scenario");
}

ConfigError config_error(const KeyValue& kv, const std::string& what)
{
    return ConfigError("line " + std::to_string(kv.line) + ": " + what, kv.line, kv.key);
}

Index parse_dim(const KeyValue& kv)
{
    Index v = 0;
    const auto* first = kv.value.data();
    const auto* last = first + kv.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || v < 2 || v > 400) {
        throw config_error(kv, "truncation for '" + kv.key + "' must be an integer in [2, 400]");
    }
    return v;
}

class Options {
public:
    Options(const ScenarioConfig& config, const ScenarioSpec& spec) : config_(config), spec_(spec) {}

    const KeyValue& entry(const std::string& name) const
    {
        if (const auto it = config_.options.find(name); it != config_.options.end()) return it->second;
        for (const auto& o : spec_.options) {
            if (o.name == name && o.fallback) {
                defaults_.emplace(name, KeyValue{name, *o.fallback, 0});
                return defaults_.at(name);
            }
        }
        throw ConfigError("missing required key '" + name + "' for scenario " + spec_.name, 0, name);
    }

    double real(const std::string& name) const { return parse_real(entry(name).value, entry(name)); }

    double nonnegative(const std::string& name) const
    {
        const double v = real(name);
        if (v < 0.0) throw config_error(entry(name), "'" + name + "' must be nonnegative");
        return v;
    }

    int integer(const std::string& name, int lo) const
    {
        const auto& kv = entry(name);
        int v = 0;
        const auto [ptr, ec] = std::from_chars(kv.value.data(), kv.value.data() + kv.value.size(), v);
        if (ec != std::errc() || ptr != kv.value.data() + kv.value.size() || v < lo) {
            throw config_error(kv, "'" + name + "' must be an integer >= " + std::to_string(lo));
        }
        return v;
    }

    std::string choice(const std::string& name, std::initializer_list<std::string_view> allowed) const
    {
        const auto& kv = entry(name);
        for (auto a : allowed) {
            if (kv.value == a) return kv.value;
        }
        throw config_error(kv, "invalid value '" + kv.value + "' for '" + name + "'");
    }

    Index dim(const std::string& label) const
    {
        if (const auto it = config_.truncations.find(label); it != config_.truncations.end()) return it->second;
        return spec_.truncations.at(label);
    }

private:
    const ScenarioConfig& config_;
    const ScenarioSpec& spec_;
    mutable std::map<std::string, KeyValue> defaults_;
};

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string full(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

Eigen::Vector2cd qubit_input(const Options& o)
{
    Eigen::Vector2cd v(Complex(o.real("in0_re"), o.real("in0_im")), Complex(o.real("in1_re"), o.real("in1_im")));
    if (std::abs(v.squaredNorm() - 1.0) > 1e-9) {
        throw PreconditionError("input amplitudes must satisfy |a|^2 + |b|^2 = 1 (got " + fmt(v.squaredNorm()) + ")");
    }
    return v / v.norm();
}

std::optional<TeleportNoise> teleport_noise(const Options& o)
{
    TeleportNoise n{o.nonnegative("noise_kappa"), o.nonnegative("noise_gamma"), o.nonnegative("noise_n_bar")};
    if (n.kappa == 0.0 && n.gamma_m == 0.0 && n.n_bar == 0.0) return std::nullopt;
    return n;
}

TeleportOptions teleport_options(const ScenarioConfig& c, const Options& o, const RunOptions& run)
{
    TeleportOptions t;
    t.level = o.choice("level", {"qubit", "physical"}) == "qubit" ? SimulationLevel::qubit : SimulationLevel::physical;
    t.dim = o.dim("m");
    t.seed = run.seed.value_or(c.seed);
    t.noise = teleport_noise(o);
    if (t.level == SimulationLevel::physical) {
        t.g = require(c.physical.system.g, "g");
        t.delta_disp = require(c.physical.system.delta_disp, "delta_disp");
    }
    return t;
}

std::string branches_csv(const ProtocolReport& r)
{
    std::ostringstream os;
    os << "branch,b0,b1,fidelity\n";
    for (std::size_t k = 0; k < r.branch_fidelities.size(); ++k) {
        os << k << ',' << k / 2 << ',' << k % 2 << ',' << full(r.branch_fidelities[k]) << '\n';
    }
    return os.str();
}

std::string values_csv(const nlohmann::json& values)
{
    std::ostringstream os;
    os << "key,value\n";
    for (const auto& [k, v] : values.items()) os << k << ',' << v.dump() << '\n';
    return os.str();
}

void add(Outcome& out, const RunOptions& run, const std::string& json_name, const std::string& json,
         const std::string& csv_name, const std::string& csv)
{
    if (run.format != Format::csv) out.artifacts.push_back({json_name, json});
    if (run.format != Format::json) out.artifacts.push_back({csv_name, csv});
}

std::string report_summary(const ProtocolReport& r)
{
    std::ostringstream os;
    os << "scenario " << r.scenario << '\n';
    if (r.final_fidelity) os << "final fidelity " << full(*r.final_fidelity) << '\n';
    if (!r.measurement_record.empty()) {
        os << "measurement " << r.measurement_record[0] << r.measurement_record[1] << ", correction "
           << r.correction_applied << '\n';
    }
    if (!r.phonons.empty()) os << "final <n_m> " << full(r.phonons.back()) << '\n';
    for (const auto& c : r.checks) os << "check " << c.name << ": " << (c.holds ? "holds" : "fails") << '\n';
    for (const auto& w : r.warnings) os << "warning: " << w << '\n';
    return os.str();
}

}  // namespace

std::optional<Scenario> scenario_from_name(std::string_view name)
{
    for (const auto& s : specs()) {
        if (s.name == name) return s.scenario;
    }
    return std::nullopt;
}

std::string_view scenario_name(Scenario scenario) { return spec_of(scenario).name; }

ScenarioConfig parse_config(std::string_view text, std::optional<std::string> scenario_override)
{
    const auto entries = parse_key_values(text);
    ScenarioConfig c;
    std::optional<KeyValue> scenario_entry;
    for (const auto& kv : entries) {
        if (kv.key == "scenario") scenario_entry = kv;
    }
    if (scenario_override) {
        const auto s = scenario_from_name(*scenario_override);
        if (!s) throw ConfigError("unknown scenario '" + *scenario_override + "'", 0, "scenario");
        c.scenario = *s;
    } else if (scenario_entry) {
        const auto s = scenario_from_name(scenario_entry->value);
        if (!s) throw config_error(*scenario_entry, "unknown scenario '" + scenario_entry->value + "'");
        c.scenario = *s;
    } else {
        throw ConfigError("missing required key 'scenario'", 0, "scenario");
    }
    const auto& spec = spec_of(c.scenario);

    for (const auto& kv : entries) {
        if (kv.key == "scenario") continue;
        if (kv.key == "seed") {
            std::uint64_t v = 0;
            const auto [ptr, ec] = std::from_chars(kv.value.data(), kv.value.data() + kv.value.size(), v);
            if (ec != std::errc() || ptr != kv.value.data() + kv.value.size()) {
                throw config_error(kv, "seed must be a nonnegative integer");
            }
            c.seed = v;
            continue;
        }
        if (kv.key.starts_with("truncation.")) {
            const std::string label = kv.key.substr(11);
            if (!spec.truncations.contains(label)) {
                throw config_error(kv, "scenario " + spec.name + " has no mode '" + label + "'");
            }
            c.truncations[label] = parse_dim(kv);
            continue;
        }
        const bool is_option = std::any_of(spec.options.begin(), spec.options.end(),
                                           [&](const OptionSpec& o) { return o.name == kv.key; });
        if (is_option) {
            c.options[kv.key] = kv;
            continue;
        }
        if (!apply_parameter(c.physical, kv)) {
            throw config_error(kv, "unknown key '" + kv.key + "' for scenario " + spec.name);
        }
    }
    for (const auto& o : spec.options) {
        if (!o.fallback && !c.options.contains(o.name)) {
            throw ConfigError("missing required key '" + o.name + "' for scenario " + spec.name, 0, o.name);
        }
    }
    // Validate every option eagerly so errors surface before any computation.
    Options probe(c, spec);
    for (const auto& o : spec.options) {
        const auto& kv = probe.entry(o.name);
        const bool textual = o.name == "model" || o.name == "sweep" || o.name == "level";
        if (textual) continue;
        parse_real(kv.value, kv);
    }
    if (c.scenario == Scenario::cool) probe.choice("model", {"full", "eliminated"});
    if (c.scenario == Scenario::esr_scan) probe.choice("sweep", {"Delta_e", "Omega_d_prime"});
    if (c.scenario == Scenario::teleport_motional || c.scenario == Scenario::teleport_spin) {
        probe.choice("level", {"qubit", "physical"});
    }
    return c;
}

std::vector<TableRow> parameter_table(const PhysicalParams& physical)
{
    const SystemParams p = derive_parameters(physical.system);
    SpinParams s = physical.spin;
    std::string x0p_note = "given";
    if (!s.x0_prime && p.x0) {
        s.x0_prime = 2.0 * *p.x0;
        x0p_note = "2 x0 (organism at the membrane centre)";
    }
    if (!s.g_s) s.g_s = 2.0;
    s = derive_spin_parameters(s);

    std::vector<TableRow> rows;
    auto put = [&](const char* sym, const std::optional<double>& v, const char* unit, std::string note = {}) {
        if (v) rows.push_back({sym, *v, unit, std::move(note)});
    };
    put("x0", p.x0, "m", "sqrt(hbar / (2 M_mem omega_m))");
    put("x0_prime", s.x0_prime, "m", x0p_note);
    put("g0", p.g0, "rad/s");
    if (p.alpha) {
        rows.push_back({"|alpha|", std::abs(*p.alpha), "", "Omega_d / (2 Delta + i kappa)"});
        rows.push_back({"arg alpha", std::arg(*p.alpha), "rad", ""});
    }
    put("g", p.g, "rad/s");
    put("kappa_prime", p.kappa_prime, "rad/s", "g^2 / kappa");
    put("gamma_prime", p.gamma_prime, "rad/s", "gamma_m + kappa_prime");
    put("n_bar", p.n_bar, "", "Bose-Einstein at (omega_m, T)");
    put("n_bar_prime", p.n_bar_prime, "", "n_bar gamma_m / gamma_prime");
    if (p.n_bar && p.gamma_m) rows.push_back({"n_bar*gamma_m", *p.n_bar * *p.gamma_m, "1/s", "thermal decoherence rate"});
    put("lambda", s.lambda, "rad/s", "g_s mu_B |G_m| x0_prime / hbar");
    if (s.lambda) rows.push_back({"lambda/2pi", *s.lambda / kTwoPi, "Hz", ""});
    put("omega_1", s.omega_1, "rad/s");
    put("omega_eff", s.omega_eff, "rad/s", "sqrt(Delta_e^2 + Omega_d_prime^2)");
    if (p.Omega_m_intrinsic && p.m_bio && p.M_mem) {
        rows.push_back({"frequency_shift", frequency_shift(*p.Omega_m_intrinsic, *p.m_bio, *p.M_mem), "rad/s",
                        "-Omega_m m_bio / (2 M_mem)"});
    }
    if (s.lambda && p.n_bar && p.gamma_m) {
        const auto c = spin_strong_coupling(*s.lambda, *p.n_bar * *p.gamma_m);
        rows.push_back({"lambda > n_bar*gamma_m", c.holds ? 1.0 : 0.0, "bool", c.detail});
    }
    return rows;
}

Outcome execute(const ScenarioConfig& c, const RunOptions& run)
{
    ScenarioConfig config = c;
    for (const auto& [label, dim] : run.truncations) {
        if (!spec_of(config.scenario).truncations.contains(label)) {
            throw ConfigError("--truncation: scenario " + spec_of(config.scenario).name + " has no mode '" + label + "'",
                              0, "truncation." + label);
        }
        if (dim < 2) throw ConfigError("--truncation: dimension below 2", 0, "truncation." + label);
        config.truncations[label] = dim;
    }
    if (run.seed) config.seed = *run.seed;
    const auto& spec = spec_of(config.scenario);
    const Options o(config, spec);
    const auto& sys = config.physical.system;
    Outcome out;

    switch (config.scenario) {
    case Scenario::params: {
        const auto rows = parameter_table(config.physical);
        std::ostringstream table, csv;
        nlohmann::json j = {{"schema", "emq.params/1"}, {"rows", nlohmann::json::array()}};
        csv << "symbol,value,unit,note\n";
        char buf[256];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof buf, "%-24s %14.6g  %-6s %s", r.symbol.c_str(), r.value, r.unit.c_str(),
                          r.note.c_str());
            std::string line = buf;
            line.erase(line.find_last_not_of(' ') + 1);
            table << line << '\n';
            csv << r.symbol << ',' << full(r.value) << ',' << r.unit << ",\"" << r.note << "\"\n";
            j["rows"].push_back({{"symbol", r.symbol}, {"value", r.value}, {"unit", r.unit}, {"note", r.note}});
        }
        out.summary = table.str();
        add(out, run, "params.json", dump(j), "params.csv", csv.str());
        break;
    }
    case Scenario::cool: {
        const SystemParams p = derive_parameters(sys);
        CoolingOptions co;
        co.eliminated = o.choice("model", {"full", "eliminated"}) == "eliminated";
        co.lc_dim = o.dim("a");
        co.mech_dim = o.dim("m");
        co.samples = o.integer("samples", 2);
        double n_init = o.real("n_init");
        if (n_init < 0.0) n_init = require(p.n_bar, "n_bar");
        auto r = sideband_cool(p, n_init, o.nonnegative("duration"), co);
        r.seed = config.seed;
        out.summary = report_summary(r);
        add(out, run, "report.json", dump(to_json(r)), "phonons.csv", phonon_csv(r));
        break;
    }
    case Scenario::superpose: {
        SuperposeOptions so;
        so.dim = o.dim("m");
        so.initial_phonons = o.nonnegative("initial_phonons");
        auto r = prepare_motional_superposition(derive_parameters(sys), so);
        r.seed = config.seed;
        out.summary = report_summary(r);
        add(out, run, "report.json", dump(to_json(r)), "summary.csv", values_csv(r.values));
        break;
    }
    case Scenario::teleport_motional: {
        const auto in = qubit_input(o);
        auto r = teleport_motional(in, teleport_options(config, o, run));
        out.summary = report_summary(r);
        add(out, run, "report.json", dump(to_json(r)), "branches.csv", branches_csv(r));
        break;
    }
    case Scenario::teleport_spin: {
        const auto in = qubit_input(o);
        SpinTeleportOptions so;
        so.teleport = teleport_options(config, o, run);
        so.swap.mech_dim = o.dim("m");
        so.swap.spin_decay = o.nonnegative("spin_decay");
        so.swap.spin_dephasing = o.nonnegative("spin_dephasing");
        const SystemParams p = derive_parameters(sys);
        so.swap.gamma_prime = p.gamma_prime.value_or(0.0);
        so.swap.n_bar_prime = p.n_bar_prime.value_or(0.0);
        SpinParams sp = config.physical.spin;
        if (!sp.lambda) {
            SpinParams probe = sp;
            if (!probe.x0_prime && p.x0) probe.x0_prime = 2.0 * *p.x0;
            if (!probe.g_s) probe.g_s = 2.0;
            sp.lambda = derive_spin_parameters(probe).lambda;
        }
        auto r = teleport_spin(in, p, sp, so);
        out.summary = report_summary(r);
        add(out, run, "report.json", dump(to_json(r)), "branches.csv", branches_csv(r));
        break;
    }
    case Scenario::esr_scan: {
        EsrSweep sweep;
        sweep.variable = o.choice("sweep", {"Delta_e", "Omega_d_prime"}) == "Delta_e" ? EsrVariable::Delta_e
                                                                                     : EsrVariable::Omega_d_prime;
        sweep.from = o.real("from");
        sweep.to = o.real("to");
        sweep.points = o.integer("points", 3);
        EsrOptions eo;
        eo.mech_dim = o.dim("m");
        eo.spin_decay = o.nonnegative("spin_decay");
        eo.spin_dephasing = o.nonnegative("spin_dephasing");
        eo.prominence = o.nonnegative("prominence");
        const auto spectrum = esr_scan(config.physical.spin, sys, sweep, eo);
        nlohmann::json j = {{"schema", "emq.spectrum/1"},
                            {"sweep", sweep.variable == EsrVariable::Delta_e ? "Delta_e" : "Omega_d_prime"},
                            {"abscissa_rad_s", spectrum.abscissa},
                            {"emission_rate_per_s", spectrum.ordinate},
                            {"peaks_rad_s", spectrum.peaks},
                            {"resolution_rad_s", spectrum.resolution},
                            {"warnings", spectrum.warnings}};
        if (sys.omega_m) {
            j["expected_peaks_rad_s"] = sweep.variable == EsrVariable::Delta_e
                                            ? resonance_detunings(*sys.omega_m, require(config.physical.spin.Omega_d_prime, "Omega_d_prime"))
                                            : std::vector<double>{*sys.omega_m};
        }
        std::ostringstream os;
        os << "scenario esr-scan\npeaks (rad/s):";
        for (double x : spectrum.peaks) os << ' ' << fmt(x);
        os << "\nresolution " << fmt(spectrum.resolution) << " rad/s\n";
        for (const auto& w : spectrum.warnings) os << "warning: " << w << '\n';
        out.summary = os.str();
        add(out, run, "spectrum.json", dump(j), "spectrum.csv", spectrum_csv(spectrum));
        break;
    }
    case Scenario::verify_all: {
        VerifyOptions vo;
        vo.instances = o.integer("instances", 20);
        vo.seed = config.seed == 0 ? 1 : config.seed;
        const auto summary = verify_all(vo);
        std::ostringstream csv;
        csv << "quantity,metric,distance,tolerance,pass\n";
        for (const auto& r : summary.reports) {
            csv << '"' << r.quantity << "\",\"" << r.distance_name << "\"," << full(r.distance) << ','
                << full(r.tolerance) << ',' << (r.pass ? 1 : 0) << '\n';
        }
        std::ostringstream os;
        os << "verify-all: " << summary.reports.size() - static_cast<std::size_t>(summary.failures()) << "/"
           << summary.reports.size() << " checks pass\n";
        for (const auto& r : summary.reports) {
            if (!r.pass) os << "FAIL " << r.quantity << ": " << r.distance_name << " " << full(r.distance) << '\n';
        }
        out.summary = os.str();
        out.exit_code = summary.pass() ? kSuccess : kVerificationFailure;
        add(out, run, "verify.json", dump(to_json(summary)), "verify.csv", csv.str());
        break;
    }
    }
    return out;
}

int run(std::string_view config_text, const RunOptions& options, std::ostream& out, std::ostream& err)
{
    Outcome outcome;
    try {
        const auto config = parse_config(config_text, options.scenario);
        kernels::set_threads(std::max(1, options.jobs));
        outcome = execute(config, options);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InvalidArgument& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const PreconditionError& e) {
        err << "precondition violated: " << e.what() << '\n';
        return kPreconditionError;
    } catch (const VerificationError& e) {
        err << "verification failed: " << e.what() << '\n';
        return kVerificationFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }

    try {
        std::filesystem::create_directories(options.out);
        for (const auto& a : outcome.artifacts) {
            std::ofstream f(options.out / a.file_name, std::ios::binary);
            f << a.content;
            if (!f) throw std::runtime_error("cannot write " + (options.out / a.file_name).string());
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    out << outcome.summary;
    return outcome.exit_code;
}

}  // namespace emq::cli
