#include "emq/lindblad.hpp"

#include "emq/error.hpp"
#include "emq/kernels.hpp"
#include "emq/serialize.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace emq {

Dissipator::Dissipator(FockOperator op_, double rate_) : op(std::move(op_)), rate(rate_)
{
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw InvalidArgument("Dissipator: rate must be nonnegative");
}

LindbladModel::LindbladModel(FockOperator hamiltonian, std::vector<Dissipator> dissipators)
    : hamiltonian_(std::move(hamiltonian)), dissipators_(std::move(dissipators))
{
    if (!hamiltonian_.is_hermitian()) throw InvalidArgument("LindbladModel: hamiltonian is not hermitian");
    for (const auto& d : dissipators_) {
        if (!(d.op.layout() == hamiltonian_.layout())) {
            throw InvalidArgument("LindbladModel: dissipator layout differs from hamiltonian layout");
        }
    }
}

std::vector<Matrix> LindbladModel::jump_matrices() const
{
    std::vector<Matrix> out;
    for (const auto& d : dissipators_) out.push_back(d.op.matrix());
    return out;
}

std::vector<double> LindbladModel::rates() const
{
    std::vector<double> out;
    for (const auto& d : dissipators_) out.push_back(d.rate);
    return out;
}

Dissipator loss(const SpaceLayout& layout, std::string_view label, double kappa)
{
    return Dissipator(annihilation(layout, label), kappa);
}

std::vector<Dissipator> thermal_bath(const SpaceLayout& layout, std::string_view label, double gamma, double nbar)
{
    if (!(nbar >= 0.0)) throw InvalidArgument("thermal_bath: negative occupation");
    const auto a = annihilation(layout, label);
    return {Dissipator(a, (1.0 + nbar) * gamma), Dissipator(a.adjoint(), nbar * gamma)};
}

namespace {

std::vector<Dissipator> cooling_dissipators(const SystemParams& p, const SpaceLayout& layout, const ModeLabels& labels)
{
    std::vector<Dissipator> d;
    d.push_back(loss(layout, labels.lc, require(p.kappa, "kappa")));
    for (auto& x : thermal_bath(layout, labels.mech, require(p.gamma_m, "gamma_m"), require(p.n_bar, "n_bar"))) {
        d.push_back(std::move(x));
    }
    return d;
}

}  // namespace

LindbladModel cooling_model(const SystemParams& params, const SpaceLayout& layout, const ModeLabels& labels)
{
    return LindbladModel(build_beamsplitter(require(params.g, "g"), layout, labels),
                         cooling_dissipators(params, layout, labels));
}

LindbladModel cooling_model_linearized(const SystemParams& params, const SpaceLayout& layout,
                                       const ModeLabels& labels)
{
    return LindbladModel(build_linearized(params, layout, labels), cooling_dissipators(params, layout, labels));
}

Matrix lindblad_rhs(const LindbladModel& model, const DensityMatrix& rho)
{
    if (!(model.layout() == rho.layout())) throw InvalidArgument("lindblad_rhs: layout mismatch");
    const auto ops = model.jump_matrices();
    const auto rates = model.rates();
    const auto plan = kernels::make_plan(model.hamiltonian().matrix(), ops, rates);
    Matrix out;
    kernels::lindblad_rhs_parallel(plan, rho.matrix(), out);
    return out;
}

Matrix liouvillian(const LindbladModel& model)
{
    const auto ops = model.jump_matrices();
    const auto rates = model.rates();
    return kernels::liouvillian_parallel(model.hamiltonian().matrix(), ops, rates);
}

// ---------------------------------------------------------------- evolution

namespace {

struct Recorder {
    const LindbladModel& model;
    const EvolveOptions& options;
    EvolutionResult& result;
    std::vector<std::pair<std::string, FockOperator>> observables;

    Recorder(const LindbladModel& m, const EvolveOptions& o, EvolutionResult& r) : model(m), options(o), result(r)
    {
        for (const auto& s : m.layout().subsystems()) {
            if (s.kind == SubsystemKind::bosonic) {
                observables.emplace_back("n_" + s.label, number(m.layout(), s.label));
            }
        }
        for (const auto& [name, op] : o.observables) {
            if (!(op.layout() == m.layout())) {
                throw InvalidArgument("evolve: observable '" + name + "' has a different layout");
            }
            observables.emplace_back(name, op);
        }
        for (const auto& [name, _] : observables) result.observables[name];
    }

    void record(double t, const Matrix& rho)
    {
        DensityMatrix state(model.layout(), rho, options.tolerance);
        if (options.truncation_threshold) check_truncation(state, *options.truncation_threshold);
        for (const auto& [name, op] : observables) result.observables[name].push_back(state.expectation(op));
        result.times.push_back(t);
        result.states.push_back(std::move(state));
    }
};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

void integrate_adaptive(const LindbladModel& model, const Matrix& rho0, double duration, int samples,
                        const EvolveOptions& opt, Recorder& rec)
{
    const auto ops = model.jump_matrices();
    const auto rates = model.rates();
    const auto plan = kernels::make_plan(model.hamiltonian().matrix(), ops, rates);
    const auto f = [&](const Matrix& y, Matrix& out) { kernels::lindblad_rhs_parallel(plan, y, out); };

    double scale = plan.effective.cwiseAbs().rowwise().sum().maxCoeff();
    for (const auto& j : plan.jumps) scale += j.squaredNorm() / std::max<Index>(1, j.rows());
    double h = scale > 0.0 ? 0.01 / scale : duration;
    const double h_min = 1e-14 * duration;

    Matrix y = rho0;
    Matrix k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
    f(y, k1);
    double t = 0.0;
    rec.record(0.0, y);
    std::size_t steps = 0;

    for (int s = 1; s < samples; ++s) {
        const double target = duration * static_cast<double>(s) / static_cast<double>(samples - 1);
        while (t < target) {
            if (steps++ >= opt.max_steps) {
                throw NumericalError("evolve: step-size failure (maximum step count reached at t = " +
                                     std::to_string(t) + " s)");
            }
            bool last = false;
            double step = h;
            if (t + step >= target) {
                step = target - t;
                last = true;
            }
            ytmp = y + step * a21 * k1;
            f(ytmp, k2);
            ytmp = y + step * (a31 * k1 + a32 * k2);
            f(ytmp, k3);
            ytmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
            f(ytmp, k4);
            ytmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            f(ytmp, k5);
            ytmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            f(ytmp, k6);
            ynew = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            f(ynew, k7);

            const Matrix err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const auto tol = (opt.atol + opt.rtol * y.cwiseAbs().cwiseMax(ynew.cwiseAbs()).array()).eval();
            const double err_norm = (err.cwiseAbs().array() / tol).maxCoeff();

            if (!std::isfinite(err_norm)) throw NumericalError("evolve: step-size failure (non-finite error)");
            if (err_norm <= 1.0) {
                t = last ? target : t + step;
                y.swap(ynew);
                k1.swap(k7);
            }
            const double factor = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
            if (!(last && err_norm <= 1.0)) h = step * factor;
            if (h < h_min) {
                throw NumericalError("evolve: step-size failure (step " + std::to_string(h) + " s below minimum at t = " +
                                     std::to_string(t) + " s)");
            }
        }
        rec.record(target, y);
    }
    rec.result.steps = steps;
}

void integrate_exponential(const LindbladModel& model, const Matrix& rho0, double duration, int samples,
                           Recorder& rec)
{
    const Index n = rho0.rows();
    const double dt = duration / static_cast<double>(samples - 1);
    const Matrix generator = liouvillian(model) * dt;
    const Matrix propagator = generator.exp();
    Vector v = Eigen::Map<const Vector>(rho0.data(), n * n);
    rec.record(0.0, rho0);
    for (int s = 1; s < samples; ++s) {
        v = propagator * v;
        rec.record(dt * s, Eigen::Map<const Matrix>(v.data(), n, n));
    }
    rec.result.steps = static_cast<std::size_t>(samples - 1);
}

void integrate_unitary(const LindbladModel& model, const Matrix& rho0, double duration, int samples,
                       Recorder& rec)
{
    const double dt = duration / static_cast<double>(samples - 1);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(model.hamiltonian().matrix());
    if (es.info() != Eigen::Success) throw NumericalError("evolve: eigendecomposition failed");
    const Vector phases = (Complex(0.0, -dt) * es.eigenvalues().cast<Complex>()).array().exp();
    const Matrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    Matrix rho = rho0;
    rec.record(0.0, rho);
    for (int s = 1; s < samples; ++s) {
        rho = u * rho * u.adjoint();
        rec.record(dt * s, rho);
    }
    rec.result.steps = static_cast<std::size_t>(samples - 1);
}

}  // namespace

std::string_view propagation_name(Propagation method)
{
    switch (method) {
    case Propagation::automatic: return "automatic";
    case Propagation::exponential: return "exponential";
    case Propagation::adaptive: return "adaptive";
    case Propagation::unitary: return "unitary";
    }
    return "unknown";
}

EvolutionResult evolve(const LindbladModel& model, const DensityMatrix& rho0, double duration, int samples,
                       const EvolveOptions& options)
{
    if (!(model.layout() == rho0.layout())) throw InvalidArgument("evolve: layout mismatch");
    if (!(duration > 0.0) || !std::isfinite(duration)) throw InvalidArgument("evolve: duration must be positive");
    if (samples < 2) throw InvalidArgument("evolve: need at least two samples");

    EvolutionResult result;
    Recorder rec(model, options, result);
    Propagation method = options.method;
    if (method == Propagation::automatic) {
        if (model.dissipators().empty()) {
            method = Propagation::unitary;
        } else {
            method = model.layout().total_dim() <= options.exponential_limit ? Propagation::exponential
                                                                             : Propagation::adaptive;
        }
    }
    if (method == Propagation::unitary && !model.dissipators().empty()) {
        throw InvalidArgument("evolve: unitary propagation needs a model without dissipators");
    }
    result.method = method;
    if (method == Propagation::unitary) {
        integrate_unitary(model, rho0.matrix(), duration, samples, rec);
    } else if (method == Propagation::exponential) {
        integrate_exponential(model, rho0.matrix(), duration, samples, rec);
    } else {
        integrate_adaptive(model, rho0.matrix(), duration, samples, options, rec);
    }
    return result;
}

// ------------------------------------------------------------- steady state

DensityMatrix steady_state(const LindbladModel& model, const SteadyStateOptions& options)
{
    const Index n = model.layout().total_dim();
    const Index big = n * n;
    Matrix l = liouvillian(model);
    const double scale = l.cwiseAbs().maxCoeff();
    if (scale == 0.0) throw NumericalError("steady_state: zero generator (degenerate null space)");
    l /= scale;

    if (big <= options.svd_limit) {
        Eigen::BDCSVD<Matrix> svd(l);
        const auto& sv = svd.singularValues();
        if (sv(big - 2) <= options.uniqueness_ratio * sv(0)) {
            throw NumericalError("steady_state: null space is degenerate (second-smallest singular value " +
                                 std::to_string(sv(big - 2) / sv(0)) + " of largest)");
        }
    }

    // Replace the (0,0) population equation with tr(rho) = 1.
    Matrix m = l;
    m.row(0).setZero();
    for (Index i = 0; i < n; ++i) m(0, i + i * n) = 1.0;
    Vector rhs = Vector::Zero(big);
    rhs(0) = 1.0;
    Eigen::PartialPivLU<Matrix> lu(m);
    if (big > options.svd_limit && lu.rcond() <= options.uniqueness_ratio) {
        throw NumericalError("steady_state: trace-constrained system is singular (degenerate null space)");
    }
    const Vector x = lu.solve(rhs);

    const double residual = (l * x).norm();
    if (!std::isfinite(residual) || residual > 1e-10 * std::max(1.0, x.norm()) * std::sqrt(static_cast<double>(big))) {
        throw NumericalError("steady_state: residual " + std::to_string(residual) + " too large");
    }
    Matrix rho = Eigen::Map<const Matrix>(x.data(), n, n);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    return DensityMatrix(model.layout(), std::move(rho));
}

// ------------------------------------------------------ adiabatic elimination

Elimination adiabatic_eliminate(const LindbladModel& two_mode, const SystemParams& params, const ModeLabels& labels)
{
    const auto& layout = two_mode.layout();
    if (!layout.contains(labels.lc) || !layout.contains(labels.mech)) {
        throw InvalidArgument("adiabatic_eliminate: model lacks the LC or mechanical mode");
    }
    const double g = require(params.g, "g");
    const double kappa = require(params.kappa, "kappa");
    std::vector<std::string> warnings;
    if (g > 0.0) {
        const double ratio = kappa / g;
        if (ratio < 5.0) {
            throw PreconditionError("adiabatic_eliminate: kappa/g = " + std::to_string(ratio) + " is below 5");
        }
        if (ratio < 10.0) warnings.push_back("kappa/g = " + std::to_string(ratio) + " is below 10");
    }
    SystemParams updated = apply_elimination(params);
    const SpaceLayout single{layout.subsystem(labels.mech)};
    auto dissipators = thermal_bath(single, labels.mech, *updated.gamma_prime, *updated.n_bar_prime);
    return {LindbladModel(zero(single), std::move(dissipators)), std::move(updated), std::move(warnings)};
}

// ------------------------------------------------------------------- export

std::string to_csv(const EvolutionResult& result)
{
    std::ostringstream os;
    os << "time";
    for (const auto& [name, _] : result.observables) os << ',' << name;
    os << '\n';
    char buf[64];
    for (std::size_t i = 0; i < result.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", result.times[i]);
        os << buf;
        for (const auto& [_, series] : result.observables) {
            std::snprintf(buf, sizeof buf, "%.17g", series[i]);
            os << ',' << buf;
        }
        os << '\n';
    }
    return os.str();
}

nlohmann::json to_json(const EvolutionResult& result, bool include_states)
{
    nlohmann::json j;
    j["times"] = result.times;
    j["observables"] = result.observables;
    j["method"] = propagation_name(result.method);
    j["steps"] = result.steps;
    if (include_states) {
        auto states = nlohmann::json::array();
        for (const auto& s : result.states) states.push_back(to_json(s));
        j["states"] = std::move(states);
    }
    return j;
}

}  // namespace emq
