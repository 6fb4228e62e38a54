#include "emq/protocols.hpp"

#include "emq/error.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <sstream>

namespace emq {

using constants::pi;

// ------------------------------------------------------------------ reports

nlohmann::json to_json(const ProtocolReport& r)
{
    nlohmann::json j;
    j["schema"] = kReportSchema;
    j["scenario"] = r.scenario;
    j["seed"] = r.seed;
    auto segments = nlohmann::json::array();
    for (const auto& s : r.segments) {
        segments.push_back({{"label", s.label}, {"duration_s", s.duration}, {"model", s.model}});
    }
    j["segments"] = segments;
    j["final_fidelity"] = r.final_fidelity ? nlohmann::json(*r.final_fidelity) : nlohmann::json();
    j["phonon_trajectory"] = {{"time_s", r.times}, {"n_m", r.phonons}};
    j["measurement_record"] = r.measurement_record;
    j["correction_applied"] = r.correction_applied;
    j["branch_fidelities"] = r.branch_fidelities;
    j["checkpoint_fidelity"] = r.checkpoint_fidelity ? nlohmann::json(*r.checkpoint_fidelity) : nlohmann::json();
    auto checks = nlohmann::json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"holds", c.holds}, {"detail", c.detail}});
    j["checks"] = checks;
    j["warnings"] = r.warnings;
    j["values"] = r.values;
    return j;
}

std::string phonon_csv(const ProtocolReport& r)
{
    std::ostringstream os;
    os << "time,n_m\n";
    char buf[96];
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", r.times[i], r.phonons[i]);
        os << buf;
    }
    return os.str();
}

// ------------------------------------------------------------ randomness

OutcomeSource OutcomeSource::sampled(std::uint64_t seed)
{
    OutcomeSource s;
    s.seed_ = seed;
    s.rng_.seed(seed);
    return s;
}

OutcomeSource OutcomeSource::replay(std::vector<int> outcomes)
{
    OutcomeSource s;
    s.replay_ = true;
    s.forced_ = std::move(outcomes);
    return s;
}

int OutcomeSource::draw(std::span<const double> probabilities)
{
    const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) throw NumericalError("OutcomeSource: probabilities do not sum to one");
    if (replay_) {
        if (next_ >= forced_.size()) throw InvalidArgument("OutcomeSource: replay sequence exhausted");
        const int k = forced_[next_++];
        if (k < 0 || static_cast<std::size_t>(k) >= probabilities.size()) {
            throw InvalidArgument("OutcomeSource: forced outcome out of range");
        }
        if (probabilities[static_cast<std::size_t>(k)] < 1e-12) {
            throw PreconditionError("OutcomeSource: forced outcome has zero probability");
        }
        return k;
    }
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    double acc = 0.0;
    for (std::size_t k = 0; k < probabilities.size(); ++k) {
        acc += probabilities[k];
        if (u < acc) return static_cast<int>(k);
    }
    return static_cast<int>(probabilities.size()) - 1;
}

// ----------------------------------------------------------------- helpers

namespace {

Matrix propagator(const FockOperator& h, double t) { return (Complex(0.0, -t) * h.matrix()).exp(); }

DensityMatrix conjugate(const Matrix& u, const DensityMatrix& rho)
{
    return DensityMatrix(rho.layout(), u * rho.matrix() * u.adjoint());
}

DensityMatrix evolve_to(const LindbladModel& model, const DensityMatrix& rho, double t)
{
    if (t == 0.0) return rho;
    auto result = evolve(model, rho, t, 2);
    return result.states.back();
}

Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

// 2x2 block of levels {0, 1}, renormalized.
Eigen::Matrix2cd qubit_block(const Matrix& rho)
{
    Eigen::Matrix2cd b = rho.topLeftCorner(2, 2);
    const double tr = b.trace().real();
    if (tr > 0.0) b /= tr;
    return 0.5 * (b + b.adjoint());
}

// Embeds a 2x2 qubit density into a d-level mode.
Matrix lift_qubit(const Eigen::Matrix2cd& q, Index dim)
{
    Matrix m = Matrix::Zero(dim, dim);
    m.topLeftCorner(2, 2) = q;
    return m;
}

Eigen::Matrix2cd phase_fix() { return Eigen::Vector2cd(1.0, Complex(0.0, 1.0)).asDiagonal(); }

double qubit_fidelity(const Eigen::Matrix2cd& rho, const Eigen::Vector2cd& target)
{
    return std::clamp((target.adjoint() * rho * target)(0, 0).real(), 0.0, 1.0);
}

double leakage(const DensityMatrix& rho, std::string_view label)
{
    const auto pops = populations(rho, label);
    double above = 0.0;
    for (std::size_t n = 2; n < pops.size(); ++n) above += pops[n];
    return above;
}

FockOperator ideal_cz(const SpaceLayout& layout, std::string_view l0, std::string_view l1)
{
    const auto p0 = layout.position(l0);
    const auto p1 = layout.position(l1);
    const Index n = layout.total_dim();
    Matrix u = Matrix::Identity(n, n);
    for (Index k = 0; k < n; ++k) {
        const auto d = layout.digits(k);
        if (d[p0] == 1 && d[p1] == 1) u(k, k) = -1.0;
    }
    return FockOperator(layout, u);
}

Eigen::Matrix2cd hadamard_matrix() { return gate_matrix(QubitGate::H); }

// Bare-spin lowering |down><up| in the z basis (|up> = index 0).
FockOperator spin_lowering(const SpaceLayout& layout, std::string_view label)
{
    Matrix m = Matrix::Zero(2, 2);
    m(1, 0) = 1.0;
    return embed(FockOperator(SpaceLayout{spin("spin")}, m), layout, label);
}

// Columns are the dressed states for bit 0 and bit 1.
Eigen::Matrix2cd dressed_basis()
{
    Eigen::Matrix2cd s;
    s.col(0) = dressed_qubit_state(0);
    s.col(1) = dressed_qubit_state(1);
    return s;
}

}  // namespace

// ------------------------------------------------------------------ cooling

ProtocolReport sideband_cool(const SystemParams& params, double n_init, double duration,
                             const CoolingOptions& options)
{
    ProtocolReport report;
    report.scenario = "cool";
    require(params.g, "g");
    require(params.kappa, "kappa");
    require(params.gamma_m, "gamma_m");
    require(params.n_bar, "n_bar");
    if (!(n_init >= 0.0)) throw InvalidArgument("sideband_cool: negative initial occupation");

    if (params.omega_m) {
        auto check = sideband_resolved(params);
        if (!check.holds) report.warnings.push_back("not sideband resolved: " + check.detail);
        report.checks.push_back(std::move(check));
    } else {
        report.warnings.push_back("omega_m not set; sideband-resolution check skipped");
    }
    report.checks.push_back(mode_strong_coupling(params));
    report.checks.push_back(quantum_regime(apply_elimination(params)));

    const ModeLabels labels;
    const SpaceLayout two_mode{mode(labels.lc, options.lc_dim), mode(labels.mech, options.mech_dim)};
    const auto full = cooling_model(params, two_mode, labels);

    EvolveOptions eo;
    eo.truncation_threshold = options.truncation_threshold;
    const auto thermal = DensityMatrix::thermal(two_mode.subsystem(labels.mech), n_init);

    EvolutionResult result;
    if (options.eliminated) {
        auto elim = adiabatic_eliminate(full, params, labels);
        for (auto& w : elim.warnings) report.warnings.push_back(std::move(w));
        result = evolve(elim.model, thermal, duration, options.samples, eo);
        report.segments.push_back({"eliminated cooling", duration, "single mode, (1+n')g' D[a_m] + n'g' D[a_m^dag]"});
    } else {
        const auto vacuum = DensityMatrix::pure(StateVector::basis(SpaceLayout{two_mode.subsystem(labels.lc)},
                                                                   std::vector<Index>{0}));
        result = evolve(full, tensor(vacuum, thermal), duration, options.samples, eo);
        report.segments.push_back({"beamsplitter cooling", duration, "g(a^dag a_m + h.c.), kappa D[a], thermal bath"});
    }
    report.times = result.times;
    report.phonons = result.observables.at("n_" + labels.mech);

    const auto elim_params = apply_elimination(params);
    report.values["final_phonons"] = report.phonons.back();
    report.values["eliminated_target"] = *elim_params.n_bar_prime;
    report.values["kappa_prime"] = *elim_params.kappa_prime;
    report.values["gamma_prime"] = *elim_params.gamma_prime;
    report.values["method"] = propagation_name(result.method);
    report.values["steps"] = result.steps;
    return report;
}

// ---------------------------------------------------------- state transfer

double phase_optimized_fidelity(const DensityMatrix& rho, const Vector& target)
{
    const Matrix& m = rho.matrix();
    if (target.size() != m.rows()) throw InvalidArgument("phase_optimized_fidelity: dimension mismatch");
    const double high = target.size() > 2 ? target.tail(target.size() - 2).squaredNorm() : 0.0;
    if (high > 1e-24) return std::clamp((target.adjoint() * m * target)(0, 0).real(), 0.0, 1.0);
    const Complex c0 = target(0);
    const Complex c1 = target(1);
    const double f = std::norm(c0) * m(0, 0).real() + std::norm(c1) * m(1, 1).real() +
                     2.0 * std::abs(std::conj(c0) * c1 * m(0, 1));
    return std::clamp(f, 0.0, 1.0);
}

TransferResult transfer_state(const Vector& state_on_a, double g, std::optional<double> t_opt,
                              const TransferOptions& options)
{
    if (!(g > 0.0)) throw InvalidArgument("transfer_state: g must be positive");
    const Index d = options.dim;
    if (state_on_a.size() > d) throw InvalidArgument("transfer_state: state exceeds the truncation");
    Vector psi = Vector::Zero(d);
    psi.head(state_on_a.size()) = state_on_a;
    if (std::abs(psi.norm() - 1.0) > 1e-10) throw InvalidArgument("transfer_state: state is not normalized");

    TransferResult out{DensityMatrix::maximally_mixed(SpaceLayout{mode("m", d)}), 0.0, 0.0, 0.0, 0.0, {}};
    if (d > 2 && psi.tail(d - 2).squaredNorm() > 1e-12) {
        out.warnings.push_back("source state has Fock content above |1>; transfer is truncation sensitive");
    }

    const ModeLabels labels{"a", "m"};
    const SpaceLayout layout{mode("a", d), mode("m", d)};
    SystemParams p;
    p.g = g;
    p.kappa = options.kappa;
    p.gamma_m = options.gamma_m;
    p.n_bar = options.n_bar;
    const auto model = cooling_model(p, layout, labels);
    const auto rho0 = tensor(DensityMatrix::pure(StateVector(SpaceLayout{mode("a", d)}, psi)),
                             DensityMatrix::thermal(mode("m", d), options.initial_phonons));

    const Matrix fix = lift_qubit(phase_fix(), d) + [&] {
        Matrix rest = Matrix::Identity(d, d);
        rest.topLeftCorner(2, 2).setZero();
        return rest;
    }();
    auto mech_at = [&](double t) {
        const auto rho = evolve_to(model, rho0, t);
        const auto reduced = partial_trace(rho, {"m"});
        return DensityMatrix(reduced.layout(), fix * reduced.matrix() * fix.adjoint());
    };
    auto fid_at = [&](double t) { return phase_optimized_fidelity(mech_at(t), psi); };

    double t_best;
    if (t_opt) {
        if (!(*t_opt >= 0.0)) throw InvalidArgument("transfer_state: negative time");
        t_best = *t_opt;
    } else {
        const double period = 2.0 * pi / g;
        constexpr int grid = 256;
        double f_best = -1.0;
        t_best = period;
        for (int k = 1; k <= grid; ++k) {
            const double t = period * k / grid;
            const double f = fid_at(t);
            if (f > f_best + 1e-14) {
                f_best = f;
                t_best = t;
            }
        }
        // Golden-section refinement within one grid cell either side.
        double lo = std::max(t_best - period / grid, period * 1e-6);
        double hi = std::min(t_best + period / grid, period);
        const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        double f1 = fid_at(x1), f2 = fid_at(x2);
        for (int it = 0; it < 60 && hi - lo > 1e-12 * period; ++it) {
            if (f1 < f2) {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = fid_at(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = fid_at(x1);
            }
        }
        const double t_ref = 0.5 * (lo + hi);
        if (fid_at(t_ref) >= f_best) t_best = t_ref;
    }
    out.mech_state = mech_at(t_best);
    out.fidelity = phase_optimized_fidelity(out.mech_state, psi);
    out.time = t_best;
    out.fidelity_at_pi_over_g = fid_at(pi / g);
    out.fidelity_at_pi_over_2g = fid_at(pi / (2.0 * g));
    return out;
}

// ---------------------------------------------------------- superposition

ProtocolReport prepare_motional_superposition(const SystemParams& params, const SuperposeOptions& options)
{
    ProtocolReport report;
    report.scenario = "superpose";
    const double g = require(params.g, "g");
    if (!(options.initial_phonons < 0.1)) {
        throw PreconditionError("prepare_motional_superposition: mechanics not cooled (<n_m> = " +
                                std::to_string(options.initial_phonons) + ", need < 0.1)");
    }
    if (params.kappa && params.gamma_m && params.n_bar) {
        auto c = mode_strong_coupling(params);
        if (!c.holds) report.warnings.push_back("strong coupling g > n_bar gamma_m, kappa does not hold: " + c.detail);
        report.checks.push_back(std::move(c));
    }
    TransferOptions to;
    to.kappa = params.kappa.value_or(0.0);
    to.gamma_m = params.gamma_m.value_or(0.0);
    to.n_bar = params.n_bar.value_or(0.0);
    to.dim = options.dim;
    to.initial_phonons = options.initial_phonons;
    const double r = 1.0 / std::sqrt(2.0);
    const Vector phi0 = Eigen::Vector2cd(r, r);
    const auto t = transfer_state(phi0, g, std::nullopt, to);

    report.segments.push_back({"prepare (|0>+|1>)/sqrt2 on LC", 0.0, "ideal gate"});
    report.segments.push_back({"beamsplitter transfer", t.time, "g(a^dag a_m + h.c.) with LC loss and mechanical bath"});
    report.final_fidelity = t.fidelity;
    report.warnings.insert(report.warnings.end(), t.warnings.begin(), t.warnings.end());
    report.values["transfer_time_s"] = t.time;
    report.values["transfer_time_over_pi_over_g"] = t.time * g / pi;
    report.values["fidelity_at_pi_over_g"] = t.fidelity_at_pi_over_g;
    report.values["fidelity_at_pi_over_2g"] = t.fidelity_at_pi_over_2g;
    return report;
}

StateVector prepare_entangled_lc(Index dim)
{
    if (dim < 2) throw InvalidArgument("prepare_entangled_lc: truncation below 2");
    const SpaceLayout layout{mode("a1", dim), mode("a2", dim)};
    Vector v = Vector::Zero(layout.total_dim());
    const std::array<Index, 2> d01{0, 1}, d10{1, 0};
    v(layout.flat_index(d01)) = 1.0 / std::sqrt(2.0);
    v(layout.flat_index(d10)) = 1.0 / std::sqrt(2.0);
    return StateVector(layout, v);
}

// -------------------------------------------------------------------- gates

FockOperator qubit_gate(const SpaceLayout& layout, std::string_view label, const Eigen::Matrix2cd& gate)
{
    const Index d = layout.subsystem(label).dim;
    Matrix m = Matrix::Identity(d, d);
    m.topLeftCorner(2, 2) = gate;
    return embed(FockOperator(SpaceLayout{Subsystem{"q", d, layout.subsystem(label).kind}}, m), layout, label);
}

StateVector hadamard(const StateVector& psi, std::string_view label)
{
    return StateVector(psi.layout(), qubit_gate(psi.layout(), label, hadamard_matrix()).matrix() * [&] {
        const double leak = leakage(DensityMatrix::pure(psi), label);
        if (leak > 1e-9) {
            throw PreconditionError("hadamard: " + std::to_string(leak) + " of the population is above |1>");
        }
        return psi.amplitudes();
    }());
}

DensityMatrix hadamard(const DensityMatrix& rho, std::string_view label)
{
    const double leak = leakage(rho, label);
    if (leak > 1e-9) throw PreconditionError("hadamard: " + std::to_string(leak) + " of the population is above |1>");
    return conjugate(qubit_gate(rho.layout(), label, hadamard_matrix()).matrix(), rho);
}

UnitarySegment cphase(const SpaceLayout& layout, const ModeLabels& pair, double g, double delta_disp, bool exact)
{
    if (delta_disp == 0.0) throw InvalidArgument("cphase: delta must be nonzero");
    if (!(g > 0.0)) throw InvalidArgument("cphase: g must be positive");
    if (exact && std::abs(delta_disp) / g < 10.0) {
        throw PreconditionError("cphase: |delta|/g = " + std::to_string(std::abs(delta_disp) / g) +
                                " below 10 for the exact detuned evolution");
    }
    const double t = pi * std::abs(delta_disp) / (g * g);
    const auto h = exact ? build_detuned(delta_disp, g, layout, pair) : build_dispersive(g, delta_disp, layout, pair);
    return {{exact ? "CPHASE (detuned beamsplitter)" : "CPHASE (dispersive)", t,
             exact ? "delta a^dag a + g(a^dag a_m + h.c.)" : "(g^2/delta) n n_m"},
            FockOperator(layout, propagator(h, t))};
}

double cphase_gate_fidelity(const FockOperator& unitary, const ModeLabels& pair)
{
    const auto& layout = unitary.layout();
    const auto p0 = layout.position(pair.lc);
    const auto p1 = layout.position(pair.mech);
    std::array<Index, 4> idx{};
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            std::vector<Index> digits(layout.size(), 0);
            digits[p0] = x;
            digits[p1] = y;
            idx[static_cast<std::size_t>(2 * x + y)] = layout.flat_index(digits);
        }
    }
    Eigen::Matrix4cd m;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) m(r, c) = unitary.matrix()(idx[r], idx[c]);
    const double mm = (m * m.adjoint()).trace().real();
    auto overlap = [&](double a, double b) {
        const Complex s = m(0, 0) + std::exp(Complex(0, -a)) * m(1, 1) + std::exp(Complex(0, -b)) * m(2, 2) -
                          std::exp(Complex(0, -a - b)) * m(3, 3);
        return std::norm(s);
    };
    constexpr int grid = 96;
    double best = -1.0, ba = 0.0, bb = 0.0;
    for (int i = 0; i < grid; ++i) {
        for (int k = 0; k < grid; ++k) {
            const double a = 2.0 * pi * i / grid, b = 2.0 * pi * k / grid;
            const double v = overlap(a, b);
            if (v > best) {
                best = v;
                ba = a;
                bb = b;
            }
        }
    }
    for (double step = 2.0 * pi / grid; step > 1e-12; step *= 0.5) {
        bool moved = true;
        while (moved) {
            moved = false;
            for (auto [da, db] : {std::pair{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}}) {
                const double v = overlap(ba + da, bb + db);
                if (v > best) {
                    best = v;
                    ba += da;
                    bb += db;
                    moved = true;
                }
            }
        }
    }
    return std::clamp((mm + best) / 20.0, 0.0, 1.0);
}

BellOutcome bell_measure(const DensityMatrix& rho, std::string_view label0, std::string_view label1,
                         OutcomeSource& source, const std::optional<FockOperator>& cphase_unitary)
{
    const auto& layout = rho.layout();
    const Matrix cz = cphase_unitary ? cphase_unitary->matrix() : ideal_cz(layout, label0, label1).matrix();
    if (cz.rows() != rho.dim()) throw InvalidArgument("bell_measure: CPHASE dimension mismatch");
    const Matrix hh = qubit_gate(layout, label0, hadamard_matrix()).matrix() *
                      qubit_gate(layout, label1, hadamard_matrix()).matrix();
    const Matrix u = hh * cz;
    const Matrix after = u * rho.matrix() * u.adjoint();

    const auto p0 = layout.position(label0);
    const auto p1 = layout.position(label1);
    const Index n = layout.total_dim();
    std::array<double, 4> probs{};
    for (Index k = 0; k < n; ++k) {
        const auto d = layout.digits(k);
        if (d[p0] < 2 && d[p1] < 2) probs[static_cast<std::size_t>(2 * d[p0] + d[p1])] += after(k, k).real();
    }
    const double kept = probs[0] + probs[1] + probs[2] + probs[3];
    if (kept < 1e-12) throw NumericalError("bell_measure: no population on the qubit subspace");
    std::array<double, 4> normalized{};
    for (std::size_t i = 0; i < 4; ++i) normalized[i] = probs[i] / kept;
    const int outcome = source.draw(normalized);
    const int b0 = outcome / 2, b1 = outcome % 2;

    Vector mask = Vector::Zero(n);
    for (Index k = 0; k < n; ++k) {
        const auto d = layout.digits(k);
        if (d[p0] == b0 && d[p1] == b1) mask(k) = 1.0;
    }
    Matrix collapsed = mask.asDiagonal() * after * mask.asDiagonal();
    collapsed /= collapsed.trace().real();
    return {b0, b1, normalized, DensityMatrix(layout, hermitize(collapsed))};
}

const CorrectionTable kTeleportCorrections{{QubitGate::ZH, QubitGate::XZH, QubitGate::H, QubitGate::XH}};

// ----------------------------------------------------------- teleportation

namespace {

struct TeleportRun {
    int b0 = 0;
    int b1 = 0;
    std::array<double, 4> probabilities{};
    Eigen::Matrix2cd output;
    std::vector<Segment> segments;
    std::vector<std::string> warnings;
};

TeleportRun run_teleport(const Eigen::Matrix2cd& input, const TeleportOptions& opt, OutcomeSource& source)
{
    TeleportRun run;
    const double r = 1.0 / std::sqrt(2.0);
    if (opt.level == SimulationLevel::qubit) {
        const SpaceLayout m1{mode("m1", 2)};
        const SpaceLayout pair{mode("a1", 2), mode("m2", 2)};
        const Vector resource = Eigen::Vector4cd(0, r, r, 0);
        const auto rho = tensor(DensityMatrix(m1, input), DensityMatrix::pure(StateVector(pair, resource)));
        run.segments.push_back({"resource (|01>+|10>)/sqrt2 on (a1, m2)", 0.0, "ideal"});
        const auto bell = bell_measure(rho, "m1", "a1", source);
        run.segments.push_back({"Bell measurement (CZ, H, H, read)", 0.0, "ideal"});
        run.b0 = bell.b0;
        run.b1 = bell.b1;
        run.probabilities = bell.probabilities;
        const Eigen::Matrix2cd remote = partial_trace(bell.collapsed, {"m2"}).matrix();
        const Eigen::Matrix2cd c = gate_matrix(kTeleportCorrections.at(run.b0, run.b1));
        run.output = c * remote * c.adjoint();
        run.segments.push_back({std::string("correction ") + std::string(gate_name(kTeleportCorrections.at(run.b0, run.b1))),
                                0.0, "ideal"});
        return run;
    }

    const Index d = opt.dim;
    if (d < 2) throw InvalidArgument("teleport_motional: truncation below 2");
    const SpaceLayout layout{mode("m1", d), mode("a1", d), mode("a2", d), mode("m2", d)};
    const auto lc = prepare_entangled_lc(d);
    const SpaceLayout m1{mode("m1", d)};
    const SpaceLayout m2{mode("m2", d)};
    auto rho = tensor(tensor(DensityMatrix(m1, lift_qubit(input, d)), DensityMatrix::pure(lc)),
                      DensityMatrix::pure(StateVector::basis(m2, std::vector<Index>{0})));
    run.segments.push_back({"resource (|01>+|10>)/sqrt2 on (a1, a2)", 0.0, "ideal"});

    std::vector<Dissipator> dissipators;
    if (opt.noise) {
        for (const char* a : {"a1", "a2"}) dissipators.push_back(loss(layout, a, opt.noise->kappa));
        for (const char* m : {"m1", "m2"}) {
            for (auto& x : thermal_bath(layout, m, opt.noise->gamma_m, opt.noise->n_bar)) dissipators.push_back(x);
        }
    }

    const ModeLabels transfer{"a2", "m2"};
    const double t_swap = pi / (2.0 * opt.g);
    const auto h_bs = build_beamsplitter(opt.g, layout, transfer);
    if (opt.noise) {
        rho = evolve_to(LindbladModel(h_bs, dissipators), rho, t_swap);
    } else {
        rho = conjugate(propagator(h_bs, t_swap), rho);
    }
    rho = conjugate(qubit_gate(layout, "m2", phase_fix()).matrix(), rho);
    run.segments.push_back({"transfer a2 -> m2", t_swap, "g(a2^dag a_m2 + h.c.), then diag(1,i) on m2"});

    const ModeLabels gate_pair{"a1", "m1"};
    auto seg = cphase(layout, gate_pair, opt.g, opt.delta_disp, false);
    std::optional<FockOperator> cz;
    if (opt.noise) {
        const auto h_disp = build_dispersive(opt.g, opt.delta_disp, layout, gate_pair);
        rho = evolve_to(LindbladModel(h_disp, dissipators), rho, seg.segment.duration);
        cz = identity(layout);
    } else {
        cz = seg.unitary;
    }
    run.segments.push_back(seg.segment);

    for (const char* l : {"m1", "a1"}) {
        const double leak = leakage(rho, l);
        if (leak > 1e-6) run.warnings.push_back(std::string(l) + " population above |1> is " + std::to_string(leak));
    }
    const auto bell = bell_measure(rho, "m1", "a1", source, cz);
    run.segments.push_back({"Bell measurement (H, H, read)", 0.0, "ideal"});
    run.b0 = bell.b0;
    run.b1 = bell.b1;
    run.probabilities = bell.probabilities;
    const Eigen::Matrix2cd remote = qubit_block(partial_trace(bell.collapsed, {"m2"}).matrix());
    const Eigen::Matrix2cd c = gate_matrix(kTeleportCorrections.at(run.b0, run.b1));
    run.output = c * remote * c.adjoint();
    run.segments.push_back({std::string("correction ") + std::string(gate_name(kTeleportCorrections.at(run.b0, run.b1))),
                            0.0, "ideal"});
    return run;
}

Eigen::Matrix2cd validate_qubit_density(const Eigen::Matrix2cd& m)
{
    DensityMatrix check(SpaceLayout{mode("q", 2)}, m);
    return m;
}

}  // namespace

Eigen::Matrix2cd qubit_density(const Eigen::Vector2cd& v)
{
    if (std::abs(v.norm() - 1.0) > 1e-10) throw InvalidArgument("qubit state is not normalized");
    return v * v.adjoint();
}

Eigen::Matrix2cd teleport_branch(const Eigen::Matrix2cd& input, int b0, int b1, const TeleportOptions& options)
{
    auto source = OutcomeSource::replay({2 * b0 + b1});
    return run_teleport(validate_qubit_density(input), options, source).output;
}

ProtocolReport teleport_motional(const Eigen::Matrix2cd& input, const Vector& target, const TeleportOptions& options)
{
    if (target.size() != 2 || std::abs(target.norm() - 1.0) > 1e-10) {
        throw InvalidArgument("teleport_motional: target must be a normalized qubit state");
    }
    const Eigen::Vector2cd t = target;
    ProtocolReport report;
    report.scenario = "teleport-motional";
    report.seed = options.seed;
    auto source = OutcomeSource::sampled(options.seed);
    auto run = run_teleport(validate_qubit_density(input), options, source);
    report.segments = run.segments;
    report.warnings = run.warnings;
    report.measurement_record = {run.b0, run.b1};
    report.correction_applied = gate_name(kTeleportCorrections.at(run.b0, run.b1));
    report.final_fidelity = qubit_fidelity(run.output, t);
    for (int k = 0; k < 4; ++k) {
        if (run.probabilities[static_cast<std::size_t>(k)] < 1e-12) {
            report.warnings.push_back("branch " + std::to_string(k) + " has zero probability");
            report.branch_fidelities.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        report.branch_fidelities.push_back(qubit_fidelity(teleport_branch(input, k / 2, k % 2, options), t));
    }
    auto probs = nlohmann::json::array();
    for (double p : run.probabilities) probs.push_back(p);
    report.values["outcome_probabilities"] = probs;
    report.values["level"] = options.level == SimulationLevel::qubit ? "qubit" : "physical";
    if ((qubit_density(t) - input).norm() < 1e-10) {
        report.checkpoint_fidelity = std::norm(
            teleport_checkpoint_reference(t).amplitudes().dot(teleport_checkpoint_state(t).amplitudes()));
    }
    return report;
}

ProtocolReport teleport_motional(const Eigen::Vector2cd& input, const TeleportOptions& options)
{
    return teleport_motional(qubit_density(input), Vector(input), options);
}

StateVector teleport_checkpoint_state(const Eigen::Vector2cd& input)
{
    const SpaceLayout layout{mode("m1", 2), mode("a1", 2), mode("m2", 2)};
    const double r = 1.0 / std::sqrt(2.0);
    Vector psi = Vector::Zero(8);
    for (int i = 0; i < 2; ++i) {
        psi(4 * i + 1) = input(i) * r;  // |i, 0, 1>
        psi(4 * i + 2) = input(i) * r;  // |i, 1, 0>
    }
    return StateVector(layout, ideal_cz(layout, "m1", "a1").matrix() * psi);
}

StateVector teleport_checkpoint_reference(const Eigen::Vector2cd& input)
{
    const SpaceLayout layout{mode("m1", 2), mode("a1", 2), mode("m2", 2)};
    const double r = 1.0 / std::sqrt(2.0);
    const Complex a = input(0), b = input(1);
    Vector psi = Vector::Zero(8);
    auto at = [&](Index m1, Index a1, Index m2) -> Complex& {
        const std::array<Index, 3> d{m1, a1, m2};
        return psi(layout.flat_index(d));
    };
    at(0, 0, 1) = a * r;
    at(0, 1, 0) = a * r;
    at(1, 0, 1) = b * r;
    at(1, 1, 0) = -b * r;
    return StateVector(layout, psi);
}

// ---------------------------------------------------------------- ESR scan

std::vector<std::size_t> find_peaks(std::span<const double> y, double fraction)
{
    std::vector<std::size_t> peaks;
    if (y.size() < 3) return peaks;
    const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
    const double span = *hi_it - *lo_it;
    if (!(span > 0.0)) return peaks;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
        double left = y[i];
        for (std::size_t j = i; j-- > 0;) {
            if (y[j] > y[i]) break;
            left = std::min(left, y[j]);
        }
        double right = y[i];
        for (std::size_t j = i + 1; j < y.size(); ++j) {
            if (y[j] > y[i]) break;
            right = std::min(right, y[j]);
        }
        if (y[i] - std::max(left, right) >= fraction * span) peaks.push_back(i);
    }
    return peaks;
}

double peak_fwhm(std::span<const double> x, std::span<const double> y, std::size_t peak)
{
    if (x.size() != y.size() || peak >= y.size()) throw InvalidArgument("peak_fwhm: bad input");
    const double base = *std::min_element(y.begin(), y.end());
    const double half = base + 0.5 * (y[peak] - base);
    std::size_t l = peak;
    while (l > 0 && y[l] > half) --l;
    std::size_t r = peak;
    while (r + 1 < y.size() && y[r] > half) ++r;
    if (y[l] > half || y[r] > half) return 0.0;
    const double xl = x[l] + (half - y[l]) * (x[l + 1] - x[l]) / (y[l + 1] - y[l]);
    const double xr = x[r - 1] + (half - y[r - 1]) * (x[r] - x[r - 1]) / (y[r] - y[r - 1]);
    return std::abs(xr - xl);
}

EsrSpectrum esr_scan(const SpinParams& spin, const SystemParams& params, const EsrSweep& sweep,
                     const EsrOptions& options)
{
    const double wm = require(params.omega_m, "omega_m");
    const double gp = require(params.gamma_prime, "gamma_prime");
    const double np = params.n_bar_prime.value_or(0.0);
    const double lam = require(spin.lambda, "lambda");
    if (!(lam < wm / 10.0)) {
        throw PreconditionError("esr_scan: lambda must be below omega_m/10 (lambda/omega_m = " +
                                std::to_string(lam / wm) + ")");
    }
    if (sweep.points < 3) throw InvalidArgument("esr_scan: need at least three points");
    if (sweep.variable == EsrVariable::Delta_e) {
        require(spin.Omega_d_prime, "Omega_d_prime");
    } else {
        require(spin.Delta_e, "Delta_e");
    }

    EsrSpectrum out;
    out.resolution = (sweep.to - sweep.from) / (sweep.points - 1);
    out.abscissa.resize(static_cast<std::size_t>(sweep.points));
    out.ordinate.assign(static_cast<std::size_t>(sweep.points), 0.0);
    for (int k = 0; k < sweep.points; ++k) out.abscissa[static_cast<std::size_t>(k)] = sweep.from + k * out.resolution;

    const SpinMechLabels labels;
    const SpaceLayout layout{emq::spin(labels.spin), mode(labels.mech, options.mech_dim)};
    std::vector<Dissipator> dissipators = thermal_bath(layout, labels.mech, gp, np);
    if (options.spin_decay > 0.0) dissipators.emplace_back(spin_lowering(layout, labels.spin), options.spin_decay);
    if (options.spin_dephasing > 0.0) {
        dissipators.emplace_back(pauli(layout, labels.spin, Axis::z), options.spin_dephasing);
    }
    const auto n_m = number(layout, labels.mech);

    std::vector<std::string> errors(out.abscissa.size());
    std::vector<double> top(out.abscissa.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < sweep.points; ++k) {
        const auto i = static_cast<std::size_t>(k);
        try {
            SpinParams s = spin;
            if (sweep.variable == EsrVariable::Delta_e) {
                s.Delta_e = out.abscissa[i];
            } else {
                s.Omega_d_prime = out.abscissa[i];
            }
            const LindbladModel model(build_spin_mech(params, s, layout, labels), dissipators);
            const auto rho = steady_state(model);
            out.ordinate[i] = gp * rho.expectation(n_m);
            top[i] = top_level_population(rho);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw NumericalError("esr_scan: " + e);
    }
    const double worst = *std::max_element(top.begin(), top.end());
    if (worst > 1e-4) {
        out.warnings.push_back("top-level mechanical population reaches " + std::to_string(worst));
    }
    out.peak_indices = find_peaks(out.ordinate, options.prominence);
    for (auto i : out.peak_indices) out.peaks.push_back(out.abscissa[i]);
    return out;
}

std::string spectrum_csv(const EsrSpectrum& s)
{
    std::ostringstream os;
    os << "abscissa_rad_s,emission_rate_per_s\n";
    char buf[96];
    for (std::size_t i = 0; i < s.abscissa.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s.abscissa[i], s.ordinate[i]);
        os << buf;
    }
    return os.str();
}

// ------------------------------------------------------------ spin swaps

SwapResult spin_mech_swap(SwapDirection direction, const SystemParams& params, const SpinParams& spin_params,
                          const Eigen::Matrix2cd& input, const Eigen::Vector2cd& target, const SwapOptions& options)
{
    const double lam = require(spin_params.lambda, "lambda");
    if (!(lam > 0.0)) throw InvalidArgument("spin_mech_swap: lambda must be positive");
    SwapResult out;
    if (spin_params.Delta_e || spin_params.Omega_d_prime) {
        const double wm = require(params.omega_m, "omega_m");
        if (spin_params.Delta_e && std::abs(*spin_params.Delta_e) > 1e-9 * wm) {
            throw PreconditionError("spin_mech_swap: Delta_e must be tuned to 0");
        }
        if (spin_params.Omega_d_prime && std::abs(std::abs(*spin_params.Omega_d_prime) - wm) > 1e-9 * wm) {
            throw PreconditionError("spin_mech_swap: |Omega_d_prime| must equal omega_m");
        }
    }
    if (params.n_bar && params.gamma_m) {
        out.checks.push_back(spin_strong_coupling(lam, *params.n_bar * *params.gamma_m));
        if (!out.checks.back().holds) out.warnings.push_back("spin-phonon strong coupling does not hold");
    }

    const SpinMechLabels labels;
    const Index d = options.mech_dim;
    if (d < 2) throw InvalidArgument("spin_mech_swap: mechanical truncation below 2");
    const SpaceLayout layout{spin(labels.spin), mode(labels.mech, d)};
    const SpaceLayout spin_only{spin(labels.spin)};
    const SpaceLayout mech_only{mode(labels.mech, d)};
    const Eigen::Matrix2cd s = dressed_basis();
    const Eigen::Matrix2cd in = validate_qubit_density(input);

    DensityMatrix rho0 = direction == SwapDirection::spin_to_mech
                             ? tensor(DensityMatrix(spin_only, s * in * s.adjoint()),
                                      DensityMatrix::pure(StateVector::basis(mech_only, std::vector<Index>{0})))
                             : tensor(DensityMatrix(spin_only, s.col(0) * s.col(0).adjoint()),
                                      DensityMatrix(mech_only, lift_qubit(in, d)));

    std::vector<Dissipator> dissipators;
    if (options.gamma_prime > 0.0) dissipators = thermal_bath(layout, labels.mech, options.gamma_prime, options.n_bar_prime);
    if (options.spin_decay > 0.0) dissipators.emplace_back(spin_lowering(layout, labels.spin), options.spin_decay);
    if (options.spin_dephasing > 0.0) {
        dissipators.emplace_back(pauli(layout, labels.spin, Axis::z), options.spin_dephasing);
    }
    const auto h = build_jc(lam, layout, Sign::plus, labels);
    out.time = jc_swap_time(lam);
    const DensityMatrix rho = dissipators.empty() ? conjugate(propagator(h, out.time), rho0)
                                                  : evolve_to(LindbladModel(h, dissipators), rho0, out.time);

    Eigen::Matrix2cd q;
    if (direction == SwapDirection::spin_to_mech) {
        q = qubit_block(partial_trace(rho, {labels.mech}).matrix());
    } else {
        const Eigen::Matrix2cd phys = partial_trace(rho, {labels.spin}).matrix();
        q = s.adjoint() * phys * s;
    }
    const Eigen::Matrix2cd fix = phase_fix();
    out.output = fix * q * fix.adjoint();
    out.output = 0.5 * (out.output + out.output.adjoint()).eval();
    out.fidelity = qubit_fidelity(out.output, target);
    return out;
}

ProtocolReport teleport_spin(const Eigen::Vector2cd& input, const SystemParams& params, const SpinParams& spin_params,
                             const SpinTeleportOptions& options)
{
    ProtocolReport report;
    report.scenario = "teleport-spin";
    report.seed = options.teleport.seed;
    if (spin_params.omega_1) {
        auto c = spin_initializable(*spin_params.omega_1);
        if (!c.holds) report.warnings.push_back("electron 1 level spacing below 500 MHz");
        report.checks.push_back(std::move(c));
    } else {
        report.warnings.push_back("omega_1 not set; spin initialization check skipped");
    }
    if (spin_params.omega_2) {
        auto c = spin_initializable(*spin_params.omega_2);
        c.name += " (electron 2)";
        if (!c.holds) report.warnings.push_back("electron 2 level spacing below 500 MHz");
        report.checks.push_back(std::move(c));
    }

    const Eigen::Matrix2cd in = qubit_density(input);
    const auto first = spin_mech_swap(SwapDirection::spin_to_mech, params, spin_params, in, input, options.swap);
    report.checks.insert(report.checks.end(), first.checks.begin(), first.checks.end());
    report.segments.push_back({"swap spin 1 -> m1", first.time, "lambda(sigma_+ a_m + h.c.), then diag(1,i)"});

    auto finish = [&](const Eigen::Matrix2cd& remote) {
        return spin_mech_swap(SwapDirection::mech_to_spin, params, spin_params, remote, input, options.swap);
    };

    auto source = OutcomeSource::sampled(options.teleport.seed);
    const auto run = run_teleport(first.output, options.teleport, source);
    for (const auto& s : run.segments) report.segments.push_back(s);
    const auto last = finish(run.output);
    report.segments.push_back({"swap m2 -> spin 2", last.time, "lambda(sigma_+ a_m + h.c.), then diag(1,i)"});
    report.measurement_record = {run.b0, run.b1};
    report.correction_applied = gate_name(kTeleportCorrections.at(run.b0, run.b1));
    report.final_fidelity = last.fidelity;
    report.warnings.insert(report.warnings.end(), run.warnings.begin(), run.warnings.end());

    for (int k = 0; k < 4; ++k) {
        auto forced = OutcomeSource::replay({k});
        const auto branch = run_teleport(first.output, options.teleport, forced);
        report.branch_fidelities.push_back(finish(branch.output).fidelity);
    }
    report.values["swap_time_s"] = first.time;
    report.values["spin_to_mech_fidelity"] = first.fidelity;
    return report;
}

}  // namespace emq
