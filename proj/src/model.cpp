#include "emq/model.hpp"

#include <cmath>
#include <sstream>

namespace emq {

namespace {

using constants::hbar;
using constants::pi;

void require_positive(double v, const char* name)
{
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidArgument(std::string(name) + " must be positive and finite");
    }
}

void require_nonnegative(double v, const char* name)
{
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InvalidArgument(std::string(name) + " must be nonnegative and finite");
    }
}

void set_or_check(std::optional<double>& field, double value, const char* name)
{
    if (!field) {
        field = value;
        return;
    }
    const double scale = std::max(std::abs(*field), std::abs(value));
    if (std::abs(*field - value) > 1e-9 * scale) {
        std::ostringstream os;
        os << "inconsistent parameter '" << name << "': given " << *field << ", derived " << value;
        throw InvalidArgument(os.str());
    }
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

Matrix hermitian_part(const Matrix& m)
{
    return 0.5 * (m + m.adjoint());
}

}  // namespace

// ---------------------------------------------------------------- calculators

double zero_point_fluctuation(double mass, double omega)
{
    require_positive(mass, "mass");
    require_positive(omega, "omega");
    return std::sqrt(hbar / (2.0 * mass * omega));
}

Complex steady_amplitude(double Omega_d, double Delta, double kappa)
{
    const Complex denom(2.0 * Delta, kappa);
    if (denom == Complex(0.0, 0.0)) {
        throw InvalidArgument("steady_amplitude: Delta and kappa are both zero");
    }
    return Omega_d / denom;
}

double frequency_shift(double Omega_m, double m_bio, double M_mem)
{
    require_nonnegative(m_bio, "m_bio");
    require_positive(M_mem, "M_mem");
    return -Omega_m * m_bio / (2.0 * M_mem);
}

double thermal_occupation(double omega, double temperature)
{
    require_positive(omega, "omega");
    require_nonnegative(temperature, "temperature");
    if (temperature == 0.0) return 0.0;
    const double x = hbar * omega / (constants::k_B * temperature);
    return 1.0 / std::expm1(x);
}

double spin_phonon_coupling(const SpinParams& spin)
{
    const double g_s = require(spin.g_s, "g_s");
    const double mu = require(spin.mu_B, "mu_B");
    const double grad = require(spin.G_m, "G_m");
    const double x0p = require(spin.x0_prime, "x0_prime");
    require_nonnegative(g_s, "g_s");
    require_nonnegative(mu, "mu_B");
    require_nonnegative(grad, "G_m");
    require_nonnegative(x0p, "x0_prime");
    return g_s * mu * grad * x0p / hbar;
}

double dressed_splitting(double Delta_e, double Omega_d_prime)
{
    return std::hypot(Delta_e, Omega_d_prime);
}

std::vector<double> resonance_detunings(double omega_m, double Omega_d_prime)
{
    require_positive(omega_m, "omega_m");
    const double rem = omega_m * omega_m - Omega_d_prime * Omega_d_prime;
    if (std::abs(rem) <= 1e-12 * omega_m * omega_m) return {0.0};
    if (rem < 0.0) return {};
    const double d = std::sqrt(rem);
    return {-d, d};
}

double level_spacing(double g_s, double field)
{
    return g_s * constants::mu_B * std::abs(field) / hbar;
}

double red_sideband_detuning(double omega_m)
{
    return omega_m;
}

SystemParams derive_parameters(SystemParams p)
{
    if (p.M_mem && p.omega_m) set_or_check(p.x0, zero_point_fluctuation(*p.M_mem, *p.omega_m), "x0");
    if (p.G_pull && p.x0) set_or_check(p.g0, *p.G_pull * *p.x0, "g0");
    if (p.omega_d && p.omega_0) set_or_check(p.Delta, *p.omega_d - *p.omega_0, "Delta");
    if (p.Omega_d && p.Delta && p.kappa && !p.alpha) {
        p.alpha = steady_amplitude(*p.Omega_d, *p.Delta, *p.kappa);
    }
    if (p.alpha && p.g0) set_or_check(p.g, std::abs(*p.alpha) * *p.g0, "g");
    if (p.omega_m && p.T) set_or_check(p.n_bar, thermal_occupation(*p.omega_m, *p.T), "n_bar");
    if (p.g && p.kappa && p.gamma_m && p.n_bar) p = apply_elimination(std::move(p));
    return p;
}

SpinParams derive_spin_parameters(SpinParams s)
{
    if (!s.mu_B) s.mu_B = constants::mu_B;
    if (s.g_s && s.G_m && s.x0_prime) set_or_check(s.lambda, spin_phonon_coupling(s), "lambda");
    if (s.g_s && s.B_at_spin) {
        set_or_check(s.omega_1, *s.g_s * *s.mu_B * std::abs(*s.B_at_spin) / hbar, "omega_1");
    }
    if (s.Delta_e && s.Omega_d_prime) {
        set_or_check(s.omega_eff, dressed_splitting(*s.Delta_e, *s.Omega_d_prime), "omega_eff");
    }
    return s;
}

SystemParams apply_elimination(SystemParams p)
{
    const double g = require(p.g, "g");
    const double kappa = require(p.kappa, "kappa");
    const double gamma = require(p.gamma_m, "gamma_m");
    const double nbar = require(p.n_bar, "n_bar");
    require_positive(kappa, "kappa");
    require_nonnegative(gamma, "gamma_m");
    const double kp = g * g / kappa;
    const double gp = gamma + kp;
    p.kappa_prime = kp;
    p.gamma_prime = gp;
    p.n_bar_prime = gp > 0.0 ? nbar * gamma / gp : nbar;
    return p;
}

Predicate sideband_resolved(const SystemParams& p)
{
    const double w = require(p.omega_m, "omega_m");
    const double k = require(p.kappa, "kappa");
    const double gm = require(p.gamma_m, "gamma_m");
    return {"sideband_resolved", w > k && w > gm,
            "omega_m/kappa = " + fmt(w / k) + ", omega_m/gamma_m = " + fmt(w / gm)};
}

Predicate mode_strong_coupling(const SystemParams& p)
{
    const double g = require(p.g, "g");
    const double k = require(p.kappa, "kappa");
    const double ng = require(p.n_bar, "n_bar") * require(p.gamma_m, "gamma_m");
    return {"mode_strong_coupling", g > ng && g > k,
            "g = " + fmt(g) + ", n_bar gamma_m = " + fmt(ng) + ", kappa = " + fmt(k)};
}

Predicate spin_strong_coupling(double lambda, double decoherence_rate)
{
    return {"spin_strong_coupling", lambda > decoherence_rate,
            "lambda = " + fmt(lambda) + " s^-1 vs " + fmt(decoherence_rate) + " s^-1"};
}

Predicate quantum_regime(const SystemParams& p)
{
    const auto q = apply_elimination(p);
    const double ng = *p.n_bar * *p.gamma_m;
    return {"quantum_regime", *q.kappa_prime > ng,
            "kappa' = " + fmt(*q.kappa_prime) + ", n_bar gamma_m = " + fmt(ng) +
                ", n_bar' = " + fmt(*q.n_bar_prime)};
}

Predicate spin_initializable(double spacing)
{
    const double threshold = 2.0 * pi * 500e6;
    return {"spin_initializable", spacing > threshold,
            "level spacing / 2pi = " + fmt(spacing / (2.0 * pi)) + " Hz vs 500 MHz"};
}

// ------------------------------------------------------------- field models

Vec3 DipoleTip::operator()(const Vec3& r) const
{
    const Vec3 d = r - position;
    const double dist = d.norm();
    if (dist == 0.0) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return Vec3(nan, nan, nan);
    }
    const Vec3 rhat = d / dist;
    const double pref = constants::mu_0 / (4.0 * pi * dist * dist * dist);
    return pref * (3.0 * rhat * moment.dot(rhat) - moment) + bias;
}

double DipoleTip::gradient(const Vec3& r, double step) const
{
    Eigen::Matrix3d jac;
    for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e(k) = step;
        jac.col(k) = ((*this)(r + e) - (*this)(r - e)) / (2.0 * step);
    }
    return jac.norm();
}

Predicate selective_addressing(const Vec3& x1, const Vec3& x2, const FieldMap& field, double Omega,
                               double g_s, double margin)
{
    const Vec3 b1 = field(x1);
    const Vec3 b2 = field(x2);
    if (!b1.allFinite() || !b2.allFinite()) {
        throw InvalidArgument("selective_addressing: field undefined at a spin position");
    }
    const double split = g_s * constants::mu_B * (b1 - b2).norm() / hbar;
    return {"selective_addressing", split >= margin * std::abs(Omega),
            "g_s mu_B |B1 - B2| / hbar = " + fmt(split) + ", |Omega| = " + fmt(std::abs(Omega))};
}

// -------------------------------------------------------------- Hamiltonians

FockOperator build_linearized(const SystemParams& params, const SpaceLayout& layout,
                              const ModeLabels& labels)
{
    const double Delta = require(params.Delta, "Delta");
    const double wm = require(params.omega_m, "omega_m");
    const double g = require(params.g, "g");
    const auto a = annihilation(layout, labels.lc);
    const auto am = annihilation(layout, labels.mech);
    const auto xa = a + a.adjoint();
    const auto xm = am + am.adjoint();
    const Matrix h = Delta * number(layout, labels.lc).matrix() + wm * number(layout, labels.mech).matrix() +
                     g * (xa * xm).matrix();
    return FockOperator::hermitian(layout, hermitian_part(h));
}

FockOperator build_beamsplitter(double g, const SpaceLayout& layout, const ModeLabels& labels)
{
    const auto a = annihilation(layout, labels.lc);
    const auto am = annihilation(layout, labels.mech);
    const Matrix h = g * (a.adjoint() * am + a * am.adjoint()).matrix();
    return FockOperator::hermitian(layout, hermitian_part(h));
}

FockOperator build_detuned(double delta_disp, double g, const SpaceLayout& layout, const ModeLabels& labels)
{
    const Matrix h = delta_disp * number(layout, labels.lc).matrix() +
                     build_beamsplitter(g, layout, labels).matrix();
    return FockOperator::hermitian(layout, h);
}

FockOperator build_dispersive(double g, double delta_disp, const SpaceLayout& layout,
                              const ModeLabels& labels)
{
    if (delta_disp == 0.0) throw InvalidArgument("build_dispersive: delta must be nonzero");
    const Matrix h = (g * g / delta_disp) * (number(layout, labels.lc) * number(layout, labels.mech)).matrix();
    return FockOperator::hermitian(layout, hermitian_part(h));
}

FockOperator build_spin_field(const std::vector<Vec3>& positions, const FieldMap& field, double g_s)
{
    if (positions.empty()) throw InvalidArgument("build_spin_field: no spins");
    std::vector<Subsystem> subs;
    for (std::size_t i = 0; i < positions.size(); ++i) subs.push_back(spin("s" + std::to_string(i)));
    const SpaceLayout layout(std::move(subs));

    Matrix h = Matrix::Zero(layout.total_dim(), layout.total_dim());
    const double pref = g_s * constants::mu_B / hbar * 0.5;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const Vec3 b = field(positions[i]);
        if (!b.allFinite()) {
            throw InvalidArgument("build_spin_field: field undefined at spin " + std::to_string(i));
        }
        const auto& label = layout.subsystems()[i].label;
        h += pref * (b.x() * pauli(layout, label, Axis::x).matrix() +
                     b.y() * pauli(layout, label, Axis::y).matrix() +
                     b.z() * pauli(layout, label, Axis::z).matrix());
    }
    return FockOperator::hermitian(layout, hermitian_part(h));
}

FockOperator build_spin_mech(const SystemParams& params, const SpinParams& spin_params,
                             const SpaceLayout& layout, const SpinMechLabels& labels)
{
    const double wm = require(params.omega_m, "omega_m");
    const double De = require(spin_params.Delta_e, "Delta_e");
    const double Op = require(spin_params.Omega_d_prime, "Omega_d_prime");
    const double lam = require(spin_params.lambda, "lambda");
    const auto am = annihilation(layout, labels.mech);
    const auto sz = pauli(layout, labels.spin, Axis::z);
    const auto sx = pauli(layout, labels.spin, Axis::x);
    const Matrix h = wm * number(layout, labels.mech).matrix() + 0.5 * De * sz.matrix() +
                     0.5 * Op * sx.matrix() + 0.5 * lam * ((am + am.adjoint()) * sz).matrix();
    return FockOperator::hermitian(layout, hermitian_part(h));
}

FockOperator build_jc(double lambda, const SpaceLayout& layout, Sign sign, const SpinMechLabels& labels)
{
    const auto sp = embed(dressed_ladder(Sign::plus), layout, labels.spin);
    const auto am = annihilation(layout, labels.mech);
    const auto coupling = sign == Sign::plus ? sp * am : sp * am.adjoint();
    const Matrix h = lambda * (coupling + coupling.adjoint()).matrix();
    return FockOperator::hermitian(layout, hermitian_part(h));
}

Vector dressed_qubit_state(int bit)
{
    if (bit != 0 && bit != 1) throw InvalidArgument("dressed_qubit_state: bit must be 0 or 1");
    Vector v(2);
    const double r = 1.0 / std::sqrt(2.0);
    v << r, bit == 0 ? r : -r;
    return v;
}

double jc_swap_time(double lambda)
{
    require_positive(lambda, "lambda");
    return pi / (2.0 * lambda * kJcRabiScale);
}

}  // namespace emq
