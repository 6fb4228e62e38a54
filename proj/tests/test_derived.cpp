// Values frozen from tools/derive_oracle_values.py (numpy/scipy, no engine code).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "emq/lindblad.hpp"
#include "emq/protocols.hpp"

#include <cmath>

using namespace emq;
using constants::pi;

namespace {

constexpr double kSteadyAlphaRe = -0.0499950005;
constexpr double kSteadyAlphaIm = -0.000499950004991;
constexpr double kRwaGap10 = 0.129936354459;
constexpr double kRwaGap30 = 0.0429214960863;
constexpr double kRwaGap100 = 0.0128629557936;
constexpr double kTwoModeNm5 = 0.103960474456;
constexpr double kTwoModeNm10 = 0.168325013612;
constexpr double kTwoModeNm20 = 0.250622415182;
constexpr double kCoolingFullNbar2 = 0.0393137205891;
constexpr double kCoolingEliminatedNbar2 = 0.0392156862745;
constexpr double kLossySuperposeFidelity = 0.963346010497;
constexpr double kLossySuperposeTime = 1.52268000668;
constexpr double kJcFlopTime = 0.785398162444;

double rel(double a, double b) { return std::abs(a / b - 1.0); }

double rwa_gap(double ratio)
{
    const Index d = 8;
    const SpaceLayout layout{mode("a", d), mode("m", d)};
    SystemParams p;
    p.g = 1.0;
    p.omega_m = ratio;
    p.Delta = red_sideband_detuning(ratio);
    Vector psi = Vector::Zero(layout.total_dim());
    const std::array<Index, 2> d00{0, 0}, d10{1, 0};
    psi(layout.flat_index(d00)) = 1.0 / std::sqrt(2.0);
    psi(layout.flat_index(d10)) = 1.0 / std::sqrt(2.0);
    const auto rho0 = DensityMatrix::pure(StateVector(layout, psi));
    const double t = pi / 2.0;
    const auto lab = evolve(LindbladModel(build_linearized(p, layout)), rho0, t, 2).states.back();
    const auto rwa = evolve(LindbladModel(build_beamsplitter(1.0, layout)), rho0, t, 2).states.back();
    // Interaction frame of omega_m (n_a + n_m).
    Vector phase(layout.total_dim());
    for (Index k = 0; k < layout.total_dim(); ++k) {
        const auto dg = layout.digits(k);
        phase(k) = std::exp(Complex(0.0, ratio * static_cast<double>(dg[0] + dg[1]) * t));
    }
    const Matrix frame = phase.asDiagonal() * lab.matrix() * phase.conjugate().asDiagonal();
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Matrix>(frame - rwa.matrix()).eigenvalues();
    return 0.5 * ev.cwiseAbs().sum();
}

double two_mode(double g, double kappa, double gamma, double nbar, Index da, Index dm)
{
    SystemParams p;
    p.g = g;
    p.kappa = kappa;
    p.gamma_m = gamma;
    p.n_bar = nbar;
    const SpaceLayout layout{mode("a", da), mode("m", dm)};
    return steady_state(cooling_model(p, layout)).expectation(number(layout, "m"));
}

}  // namespace

TEST_CASE("steady drive amplitude agrees with the integrated field equation")
{
    const Complex a = steady_amplitude(2 * pi * 1e6, -2 * pi * 10e6, 2 * pi * 0.2e6);
    CHECK(std::abs(a.real() - kSteadyAlphaRe) < 1e-10);
    CHECK(std::abs(a.imag() - kSteadyAlphaIm) < 1e-12);
}

TEST_CASE("rotating-wave gap at t = pi/(2g)")
{
    const double g10 = rwa_gap(10.0);
    const double g30 = rwa_gap(30.0);
    const double g100 = rwa_gap(100.0);
    CHECK(std::abs(g10 - kRwaGap10) < 1e-9);
    CHECK(std::abs(g30 - kRwaGap30) < 1e-9);
    CHECK(std::abs(g100 - kRwaGap100) < 1e-9);
}

TEST_CASE("two-mode cooling steady state")
{
    CHECK(rel(two_mode(1.0, 5.0, 0.05, 0.5, 4, 10), kTwoModeNm5) < 1e-8);
    CHECK(rel(two_mode(1.0, 10.0, 0.05, 0.5, 4, 10), kTwoModeNm10) < 1e-8);
    CHECK(rel(two_mode(1.0, 20.0, 0.05, 0.5, 4, 10), kTwoModeNm20) < 1e-8);
}

TEST_CASE("cooling with kappa'/gamma = 50 and n_bar = 2")
{
    CHECK(rel(two_mode(1.0, 20.0, 1e-3, 2.0, 4, 12), kCoolingFullNbar2) < 1e-8);
    SystemParams p;
    p.g = 1.0;
    p.kappa = 20.0;
    p.gamma_m = 1e-3;
    p.n_bar = 2.0;
    const SpaceLayout layout{mode("a", 2), mode("m", 40)};
    const auto e = adiabatic_eliminate(cooling_model(p, layout), p);
    const double nm = steady_state(e.model).expectation(number(e.model.layout(), "m"));
    CHECK(rel(nm, kCoolingEliminatedNbar2) < 1e-8);
    CHECK(rel(kCoolingEliminatedNbar2, 2.0 / 51.0) < 1e-9);
}

TEST_CASE("lossy superposition transfer with kappa = g/10")
{
    TransferOptions o;
    o.kappa = 0.1;
    const Vector phi0 = Eigen::Vector2cd(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
    const auto t = transfer_state(phi0, 1.0, std::nullopt, o);
    CHECK(std::abs(t.fidelity - kLossySuperposeFidelity) < 1e-8);
    CHECK(std::abs(t.time - kLossySuperposeTime) < 1e-4);
}

TEST_CASE("JC half-Rabi time")
{
    CHECK(std::abs(jc_swap_time(1.0) - kJcFlopTime) < 1e-8);
}

TEST_CASE("exact detuned evolution leaves no conditional phase")
{
    // Frozen oracle result: exact detuned beamsplitter evolution has conditional phase 0 mod 2 pi.
    const SpaceLayout layout{mode("a", 4), mode("m", 4)};
    for (double ratio : {10.0, 20.0, 40.0}) {
        const Matrix u = cphase(layout, {"a", "m"}, 1.0, ratio, true).unitary.matrix();
        const std::array<std::array<Index, 2>, 4> b{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
        std::array<Complex, 4> d;
        for (std::size_t k = 0; k < 4; ++k) d[k] = u(layout.flat_index(b[k]), layout.flat_index(b[k]));
        const double conditional = std::arg(d[3] * d[0] / (d[1] * d[2]));
        CHECK(std::abs(conditional) < 1e-9);
    }
}
