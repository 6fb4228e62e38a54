// protocols.hpp - cooling, state transfer, teleportation and ESR experiments
//
// Every protocol runs at one of two levels. The qubit level uses ideal
// gates on two-level truncations. The physical level evolves the
// beamsplitter, dispersive, Jaynes-Cummings and spin-mechanics Hamiltonians
// with optional dissipation on larger truncations. Both agree in the ideal limit.
//
// Swap segments (beamsplitter or JC at the half-Rabi time) map |1> to -i|1>;
// they are always followed by the local phase diag(1, i) on the receiver.

#pragma once

#include "emq/fockspace.hpp"
#include "emq/lindblad.hpp"
#include "emq/model.hpp"
#include "emq/qubit.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace emq {

inline constexpr const char* kReportSchema = "emq.report/1";

struct Segment {
    std::string label;
    double duration = 0.0;  // s
    std::string model;
};

struct ProtocolReport {
    std::string scenario;
    std::vector<Segment> segments;
    std::optional<double> final_fidelity;
    std::vector<double> times;    // phonon trajectory abscissa, s
    std::vector<double> phonons;  // <a_m^dag a_m>
    std::vector<int> measurement_record;
    std::string correction_applied;
    std::uint64_t seed = 0;
    std::vector<double> branch_fidelities;
    std::optional<double> checkpoint_fidelity;
    std::vector<Predicate> checks;
    std::vector<std::string> warnings;
    nlohmann::json values = nlohmann::json::object();
};

nlohmann::json to_json(const ProtocolReport& report);
/// `time,n_m` rows of the phonon trajectory.
std::string phonon_csv(const ProtocolReport& report);

/// Measurement randomness: sampled from a seeded generator, or replaying forced outcomes.
class OutcomeSource {
public:
    static OutcomeSource sampled(std::uint64_t seed);
    static OutcomeSource replay(std::vector<int> outcomes);

    /// Index drawn from `probabilities` (which must sum to one within 1e-9).
    /// Replay throws PreconditionError when the forced outcome has probability below 1e-12.
    int draw(std::span<const double> probabilities);
    std::uint64_t seed() const noexcept { return seed_; }

private:
    OutcomeSource() = default;

    bool replay_ = false;
    std::uint64_t seed_ = 0;
    std::mt19937_64 rng_;
    std::vector<int> forced_;
    std::size_t next_ = 0;
};

// ------------------------------------------------------------------ cooling

struct CoolingOptions {
    bool eliminated = false;  // evolve the single-mode effective model instead
    Index lc_dim = 4;
    Index mech_dim = 12;
    int samples = 101;
    double truncation_threshold = 1e-4;
};

/// Beamsplitter cooling from a thermal mechanical state with occupation n_init.
/// Needs g, kappa, gamma_m, n_bar; omega_m is used for the sideband check.
ProtocolReport sideband_cool(const SystemParams& params, double n_init, double duration,
                             const CoolingOptions& options = {});

// ---------------------------------------------------------- state transfer

struct TransferOptions {
    double kappa = 0.0;
    double gamma_m = 0.0;
    double n_bar = 0.0;
    Index dim = 3;
    double initial_phonons = 0.0;  // thermal occupation of the mechanics before transfer
};

struct TransferResult {
    DensityMatrix mech_state;  // after the diag(1, i) phase correction
    double fidelity = 0.0;
    double time = 0.0;
    double fidelity_at_pi_over_g = 0.0;
    double fidelity_at_pi_over_2g = 0.0;
    std::vector<std::string> warnings;
};

/// Moves `state_on_a` (LC Fock amplitudes) into the mechanics with H = g(a^dag a_m + h.c.).
/// Without `t_opt` the fidelity is maximized over t in (0, 2 pi/g].
TransferResult transfer_state(const Vector& state_on_a, double g, std::optional<double> t_opt = std::nullopt,
                              const TransferOptions& options = {});

/// Fidelity to `target` maximized over a relative phase on |1> (qubit support);
/// plain <psi|rho|psi> when the target has higher Fock content.
double phase_optimized_fidelity(const DensityMatrix& rho, const Vector& target);

// ---------------------------------------------------------- superposition

struct SuperposeOptions {
    Index dim = 3;
    double initial_phonons = 0.0;
};

/// Prepares (|0> + |1>)/sqrt(2) on the LC mode and transfers it to the mechanics.
/// Uses g and, when present, kappa, gamma_m, n_bar. Requires initial_phonons < 0.1.
ProtocolReport prepare_motional_superposition(const SystemParams& params, const SuperposeOptions& options = {});

/// (|0>_1|1>_2 + |1>_1|0>_2)/sqrt(2) on modes "a1", "a2" truncated at `dim`.
StateVector prepare_entangled_lc(Index dim = 2);

// -------------------------------------------------------------------- gates

/// 2x2 gate on the {|0>, |1>} levels of `label`, identity on higher levels.
FockOperator qubit_gate(const SpaceLayout& layout, std::string_view label, const Eigen::Matrix2cd& gate);

/// Ideal Hadamard on the qubit subspace; throws PreconditionError when more
/// than 1e-9 of the population of `label` sits above |1>.
StateVector hadamard(const StateVector& psi, std::string_view label);
DensityMatrix hadamard(const DensityMatrix& rho, std::string_view label);

struct UnitarySegment {
    Segment segment;
    FockOperator unitary;
};

/// exp(-iHt) with t = pi delta / g^2 and H the dispersive coupling on (pair.lc, pair.mech),
/// or the detuned beamsplitter when `exact` is set (requires |delta|/g >= 10).
UnitarySegment cphase(const SpaceLayout& layout, const ModeLabels& pair, double g, double delta_disp, bool exact);

/// Average gate fidelity of `unitary` restricted to the two-qubit subspace of `pair`
/// against CZ, maximized over local Z phases. Other subsystems must be in |0>.
double cphase_gate_fidelity(const FockOperator& unitary, const ModeLabels& pair);

struct BellOutcome {
    int b0 = 0;
    int b1 = 0;
    std::array<double, 4> probabilities{};
    DensityMatrix collapsed;
};

/// CPHASE on (label0, label1), Hadamards on both, then a projective read of
/// the {|0>, |1>} levels. `cphase_unitary` replaces the ideal CZ when given.
BellOutcome bell_measure(const DensityMatrix& rho, std::string_view label0, std::string_view label1,
                         OutcomeSource& source, const std::optional<FockOperator>& cphase_unitary = std::nullopt);

/// Corrections for outcomes (b on the input mode, b on the local resource mode).
extern const CorrectionTable kTeleportCorrections;

// ----------------------------------------------------------- teleportation

enum class SimulationLevel { qubit, physical };

struct TeleportNoise {
    double kappa = 0.0;
    double gamma_m = 0.0;
    double n_bar = 0.0;
};

struct TeleportOptions {
    SimulationLevel level = SimulationLevel::qubit;
    Index dim = 3;                 // physical-level truncation per mode
    double g = 1.0;                // rad/s, physical level
    double delta_disp = 20.0;      // rad/s, physical level
    std::optional<TeleportNoise> noise;
    std::uint64_t seed = 0;
};

/// Teleports the m1 qubit state (2x2 density on |0>, |1>) to m2.
/// Reports the sampled run plus the fidelity of every forced branch.
ProtocolReport teleport_motional(const Eigen::Matrix2cd& input, const Vector& target,
                                 const TeleportOptions& options = {});
ProtocolReport teleport_motional(const Eigen::Vector2cd& input, const TeleportOptions& options = {});

/// Remote qubit state after forcing outcome (b0, b1) and applying the table's correction.
Eigen::Matrix2cd teleport_branch(const Eigen::Matrix2cd& input, int b0, int b1, const TeleportOptions& options = {});

/// State of (m1, a1, m2) after the resource and CPHASE, and the checkpoint
/// (a|0,0,1> + a|0,1,0> + b|1,0,1> - b|1,1,0>)/sqrt(2).
StateVector teleport_checkpoint_state(const Eigen::Vector2cd& input);
StateVector teleport_checkpoint_reference(const Eigen::Vector2cd& input);

// ---------------------------------------------------------------- ESR scan

enum class EsrVariable { Delta_e, Omega_d_prime };

struct EsrSweep {
    EsrVariable variable = EsrVariable::Delta_e;
    double from = 0.0;
    double to = 0.0;
    int points = 241;
};

struct EsrOptions {
    Index mech_dim = 8;
    double spin_decay = 0.0;       // rate on sigma_- of the bare spin
    double spin_dephasing = 0.0;   // rate on sigma_z
    double prominence = 0.1;       // fraction of the spectrum's span
};

struct EsrSpectrum {
    std::vector<double> abscissa;  // rad/s
    std::vector<double> ordinate;  // gamma' <a_m^dag a_m>, 1/s
    std::vector<double> peaks;     // abscissa of detected peaks
    std::vector<std::size_t> peak_indices;
    double resolution = 0.0;
    std::vector<std::string> warnings;
};

/// Steady-state spin-mechanics spectrum. Needs omega_m, gamma_prime (n_bar_prime
/// defaults to 0) and lambda plus the non-swept spin drive parameter.
EsrSpectrum esr_scan(const SpinParams& spin, const SystemParams& params, const EsrSweep& sweep,
                     const EsrOptions& options = {});

/// Interior local maxima with prominence above `fraction` of the data span.
std::vector<std::size_t> find_peaks(std::span<const double> values, double fraction);

/// Full width at half maximum around `peak` by linear interpolation (0 if not bracketed).
double peak_fwhm(std::span<const double> x, std::span<const double> y, std::size_t peak);

std::string spectrum_csv(const EsrSpectrum& spectrum);

// ------------------------------------------------------------ spin swaps

enum class SwapDirection { spin_to_mech, mech_to_spin };

struct SwapOptions {
    Index mech_dim = 3;
    double gamma_prime = 0.0;
    double n_bar_prime = 0.0;
    double spin_decay = 0.0;
    double spin_dephasing = 0.0;
};

struct SwapResult {
    Eigen::Matrix2cd output;  // receiver qubit density after the phase correction
    double fidelity = 0.0;
    double time = 0.0;
    std::vector<Predicate> checks;
    std::vector<std::string> warnings;
};

/// JC (sigma_+ a_m + h.c.) swap for jc_swap_time(lambda). The spin qubit lives on the
/// dressed states; the mechanical qubit on Fock |0>, |1>. `target` is the pure input.
SwapResult spin_mech_swap(SwapDirection direction, const SystemParams& params, const SpinParams& spin,
                          const Eigen::Matrix2cd& input, const Eigen::Vector2cd& target,
                          const SwapOptions& options = {});

struct SpinTeleportOptions {
    SwapOptions swap;
    TeleportOptions teleport;
};

/// spin 1 -> mechanics 1 -> teleport -> mechanics 2 -> spin 2.
ProtocolReport teleport_spin(const Eigen::Vector2cd& input, const SystemParams& params, const SpinParams& spin,
                             const SpinTeleportOptions& options = {});

/// Pure-state projector |v><v| of a normalized qubit vector.
Eigen::Matrix2cd qubit_density(const Eigen::Vector2cd& v);

}  // namespace emq
