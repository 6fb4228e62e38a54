// oracle.hpp - brute-force references for the engine
//
// Shares only fockspace (and the qubit gate table) with the engine. Every
// routine here is deliberately naive: dense eigendecompositions, a
// Liouvillian assembled one basis matrix at a time, and a plain Taylor
// series with substepping for its exponential action.

#pragma once

#include "emq/fockspace.hpp"
#include "emq/qubit.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace emq::oracle {

inline constexpr Index kUnitaryCap = 4096;
inline constexpr Index kLiouvilleCap = 48;

struct OracleReport {
    std::string quantity;
    nlohmann::json engine_value;
    nlohmann::json oracle_value;
    std::string distance_name;
    double distance = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Sets distance and tolerance and derives pass from them.
OracleReport make_report(std::string quantity, nlohmann::json engine_value, nlohmann::json oracle_value,
                         std::string distance_name, double distance, double tolerance);
nlohmann::json to_json(const OracleReport& report);

/// exp(-iHt) through a dense Hermitian eigendecomposition.
Matrix exact_unitary(const FockOperator& hamiltonian, double t);
StateVector exact_unitary_evolve(const FockOperator& hamiltonian, const StateVector& psi0, double t);

/// Open system in the D_x = 2 x . x^dag - {x^dag x, .} convention.
struct OpenSystem {
    FockOperator hamiltonian;
    std::vector<std::pair<FockOperator, double>> jumps;
};

/// Vectorized (column-major) generator, one column per basis matrix |i><j|.
Matrix naive_liouvillian(const OpenSystem& system);

/// exp(A) v by Taylor series on substeps of unit 1-norm.
Vector taylor_expm_action(const Matrix& a, const Vector& v);

DensityMatrix exact_liouville_evolve(const OpenSystem& system, const DensityMatrix& rho0, double t);

/// Null vector of the naive Liouvillian (smallest right singular vector).
DensityMatrix exact_steady_state(const OpenSystem& system);

struct FidelityMetrics {
    double trace_distance = 0.0;
    double state_fidelity = 0.0;
};

/// Trace distance (1/2)||rho - sigma||_1 and Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
FidelityMetrics fidelity_metrics(const DensityMatrix& rho, const DensityMatrix& sigma);

// ----------------------------------------------------------- teleportation

/// Three-qubit teleportation circuit on (input, local, remote).
/// `resource` is the 4-amplitude state of (local, remote); `bell_unitary`
/// acts on (input, local) before both are read in the computational basis.
struct TeleportCircuit {
    Eigen::Vector4cd resource;
    Eigen::Matrix4cd bell_unitary;
};

/// Resource (|01> + |10>)/sqrt(2), then CPHASE and Hadamards on both measured qubits.
TeleportCircuit cphase_hadamard_teleport_circuit();

struct BranchSolution {
    int b0 = 0;
    int b1 = 0;
    double probability = 0.0;              // outcome probability for input |0>
    std::vector<QubitGate> candidates;     // gates fixing every tested input
};

struct TeleportVerification {
    OracleReport report;
    std::optional<CorrectionTable> table;  // present when every branch has a unique candidate
    std::vector<BranchSolution> branches;
};

/// Exhaustive check over 4 outcomes x inputs {|0>,|1>,|+>,|+i>} and every gate in `alphabet`.
TeleportVerification verify_teleportation(const TeleportCircuit& circuit, std::span<const QubitGate> alphabet);

// -------------------------------------------------------- closed forms

/// Steady phonon number of the two-mode beamsplitter cooling model (LC loss kappa,
/// mechanical bath gamma, n_bar), from the linear moment equations.
double two_mode_steady_phonons(double g, double kappa, double gamma, double n_bar);

/// n_bar gamma / (gamma + g^2/kappa).
double eliminated_steady_phonons(double g, double kappa, double gamma, double n_bar);

}  // namespace emq::oracle
