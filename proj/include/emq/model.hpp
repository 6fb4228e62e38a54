// model.hpp - physical parameters and Hamiltonian builders
//
// Conventions
//   * Every frequency and rate is angular (rad/s).
//   * Hamiltonians are stored divided by hbar, so matrix entries are rad/s.
//   * The linearized coupling g is real and nonnegative; the phase of the
//     drive amplitude is absorbed into the LC mode's phase reference.

#pragma once

#include "emq/error.hpp"
#include "emq/fockspace.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace emq {

namespace constants {
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double hbar = 1.054571817e-34;      // J s
inline constexpr double k_B = 1.380649e-23;          // J/K
inline constexpr double mu_B = 9.2740100783e-24;     // J/T
inline constexpr double mu_0 = 1.25663706212e-6;     // T m / A
inline constexpr double picogram = 1e-15;            // kg
}  // namespace constants

/// Electromechanical parameters. Unset fields stay std::nullopt.
struct SystemParams {
    std::optional<double> omega_m;            // mechanical frequency of membrane + organism
    std::optional<double> Omega_m_intrinsic;  // bare membrane frequency
    std::optional<double> Gamma_m_intrinsic;  // bare membrane decay; never equated with gamma_m
    std::optional<double> gamma_m;            // mechanical decay of the loaded membrane
    std::optional<double> kappa;              // LC decay (amplitude rate in the D_x convention)
    std::optional<double> omega_0;            // bare LC frequency
    std::optional<double> G_pull;             // d omega_c / dx, rad/s per m
    std::optional<double> g0;                 // single-photon coupling G x0
    std::optional<double> x0;                 // zero-point fluctuation, m
    std::optional<double> Omega_d;            // LC drive Rabi frequency
    std::optional<double> omega_d;            // LC drive frequency
    std::optional<double> Delta;              // omega_d - omega_0 (signed)
    std::optional<Complex> alpha;             // steady drive amplitude
    std::optional<double> g;                  // linearized coupling |alpha| g0
    std::optional<double> m_bio;              // organism mass, kg
    std::optional<double> M_mem;              // membrane mass, kg
    std::optional<double> T;                  // bath temperature, K
    std::optional<double> n_bar;              // thermal occupation of the mechanical bath
    std::optional<double> kappa_prime;        // engineered damping g^2/kappa
    std::optional<double> gamma_prime;        // gamma_m + kappa_prime
    std::optional<double> n_bar_prime;        // n_bar gamma_m / gamma_prime
    std::optional<double> delta_disp;         // dispersive detuning (signed)
};

using Vec3 = Eigen::Vector3d;

struct SpinParams {
    std::optional<double> g_s;            // electron g-factor
    std::optional<double> mu_B;           // Bohr magneton, J/T
    std::optional<double> B_at_spin;      // |B| at electron 1, T
    std::optional<double> G_m;            // |dB/dx| at electron 1, T/m
    std::optional<double> x0_prime;       // organism zero-point amplitude, m
    std::optional<double> lambda;         // single-phonon frequency shift
    std::optional<double> omega_1;        // level spacing of electron 1
    std::optional<double> omega_2;        // level spacing of electron 2
    std::optional<double> Delta_e;        // omega_d' - omega_1 (signed)
    std::optional<double> Omega_d_prime;  // spin Rabi frequency (signed)
    std::optional<double> omega_eff;      // dressed splitting
    std::vector<Vec3> spin_positions;     // m
};

/// Value of a required optional field; throws InvalidArgument naming it.
template <class T>
const T& require(const std::optional<T>& field, const char* name);

// ---------------------------------------------------------------- calculators

double zero_point_fluctuation(double mass, double omega);
Complex steady_amplitude(double Omega_d, double Delta, double kappa);
double frequency_shift(double Omega_m, double m_bio, double M_mem);
double thermal_occupation(double omega, double temperature);
double spin_phonon_coupling(const SpinParams& spin);
double dressed_splitting(double Delta_e, double Omega_d_prime);

/// Spin-drive detunings where the dressed splitting equals omega_m:
/// two values +/-sqrt(omega_m^2 - Omega'^2), one (zero) when |Omega'| = omega_m,
/// none when |Omega'| > omega_m.
std::vector<double> resonance_detunings(double omega_m, double Omega_d_prime);

/// Electron Zeeman level spacing g_s mu_B |B| / hbar.
double level_spacing(double g_s, double field);

/// LC frame coefficient of build_linearized that makes the beamsplitter term resonant.
/// With H = Delta a^dag a + omega_m a_m^dag a_m + ..., this is +omega_m.
double red_sideband_detuning(double omega_m);

/// Fills every derived field that its inputs allow: x0 from (M_mem, omega_m),
/// g0 = G x0, alpha, g = |alpha| g0, n_bar from (omega_m, T), and the
/// adiabatic-elimination totals when g, kappa, gamma_m and n_bar are known.
/// Fields already set are validated for consistency rather than overwritten.
SystemParams derive_parameters(SystemParams params);
SpinParams derive_spin_parameters(SpinParams spin);

/// kappa' = g^2/kappa, gamma' = gamma_m + kappa', n_bar' = n_bar gamma_m / gamma'.
SystemParams apply_elimination(SystemParams params);

struct Predicate {
    std::string name;
    bool holds = false;
    std::string detail;
};

/// omega_m > kappa and omega_m > gamma_m.
Predicate sideband_resolved(const SystemParams& params);
/// g > n_bar gamma_m and g > kappa.
Predicate mode_strong_coupling(const SystemParams& params);
/// lambda > rate (spin-phonon strong coupling).
Predicate spin_strong_coupling(double lambda, double decoherence_rate);
/// kappa' > n_bar gamma_m, which puts n_bar' below one.
Predicate quantum_regime(const SystemParams& params);
/// Electron level spacing above 2 pi x 500 MHz for thermal initialization at 10 mK.
Predicate spin_initializable(double level_spacing_rad_s);

// ------------------------------------------------------------- field models

using FieldMap = std::function<Vec3(const Vec3&)>;

/// Point-dipole tip plus a uniform bias:
/// B(r) = mu0/(4 pi) [3 rhat (m . rhat) - m] / |r - r_tip|^3 + B_bias.
struct DipoleTip {
    Vec3 moment = Vec3::Zero();    // A m^2
    Vec3 position = Vec3::Zero();  // m
    Vec3 bias = Vec3::Zero();      // T

    Vec3 operator()(const Vec3& r) const;
    /// Norm of the field Jacobian dB/dr (Frobenius), T/m.
    double gradient(const Vec3& r, double step = 1e-12) const;
};

/// g_s mu_B |B(x1) - B(x2)| / hbar >= margin * |Omega|.
Predicate selective_addressing(const Vec3& x1, const Vec3& x2, const FieldMap& field,
                               double Omega, double g_s = 2.0, double margin = 10.0);

// -------------------------------------------------------------- Hamiltonians

struct ModeLabels {
    std::string lc = "a";
    std::string mech = "m";
};

inline const std::string kSpinLabel = "s";

/// Delta a^dag a + omega_m a_m^dag a_m + g (a^dag + a)(a_m^dag + a_m).
FockOperator build_linearized(const SystemParams& params, const SpaceLayout& layout,
                              const ModeLabels& labels = {});

/// g (a^dag a_m + a a_m^dag).
FockOperator build_beamsplitter(double g, const SpaceLayout& layout, const ModeLabels& labels = {});

/// delta a^dag a + g (a^dag a_m + a a_m^dag).
FockOperator build_detuned(double delta_disp, double g, const SpaceLayout& layout,
                           const ModeLabels& labels = {});

/// (g^2/delta) a^dag a a_m^dag a_m.
FockOperator build_dispersive(double g, double delta_disp, const SpaceLayout& layout,
                              const ModeLabels& labels = {});

/// sum_i g_s mu_B S_i . B(x_i) / hbar with S = sigma/2, on spins "s0", "s1", ...
FockOperator build_spin_field(const std::vector<Vec3>& positions, const FieldMap& field,
                              double g_s = 2.0);

struct SpinMechLabels {
    std::string mech = "m";
    std::string spin = kSpinLabel;
};

/// omega_m a_m^dag a_m + (Delta_e/2) sigma_z + (Omega'/2) sigma_x + (lambda/2)(a_m + a_m^dag) sigma_z.
FockOperator build_spin_mech(const SystemParams& params, const SpinParams& spin,
                             const SpaceLayout& layout, const SpinMechLabels& labels = {});

/// lambda sigma_+ a_m + h.c. (Sign::plus) or lambda sigma_+ a_m^dag + h.c.
/// (Sign::minus), with the dressed ladder sigma_+ = sigma_z + i sigma_y.
FockOperator build_jc(double lambda, const SpaceLayout& layout, Sign sign,
                      const SpinMechLabels& labels = {});

/// Dressed qubit states in the spin's z basis: bit 0 -> |+x>, bit 1 -> |-x>.
/// sigma_+ maps bit 0 to bit 1.
Vector dressed_qubit_state(int bit);

/// build_jc's vacuum Rabi element is kJcRabiScale * lambda, so a full
/// excitation swap takes pi / (2 lambda kJcRabiScale).
inline constexpr double kJcRabiScale = 2.0;
double jc_swap_time(double lambda);

/// Rotating-wave reduction of build_spin_mech at Delta_e = 0, |Omega'| = omega_m
/// gives build_jc with lambda scaled by this factor (Omega' = -omega_m gives
/// the Sign::plus form, Omega' = +omega_m the Sign::minus form).
inline constexpr double kSpinMechToJcCoupling = 0.25;

// ------------------------------------------------------------ template impl

template <class T>
const T& require(const std::optional<T>& field, const char* name)
{
    if (!field) {
        throw InvalidArgument(std::string("missing parameter '") + name + "'");
    }
    return *field;
}

}  // namespace emq
