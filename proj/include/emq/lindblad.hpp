// lindblad.hpp - Lindblad master equations, time evolution and steady states
//
// Generator convention:  D_x rho = 2 x rho x^dag - x^dag x rho - rho x^dag x.
// With this factor of two a rate kappa on D_a is an amplitude decay rate:
// <a> decays as exp(-kappa t) and <a^dag a> as exp(-2 kappa t).

#pragma once

#include "emq/fockspace.hpp"
#include "emq/model.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace emq {

struct Dissipator {
    Dissipator(FockOperator op, double rate);

    FockOperator op;
    double rate;
};

class LindbladModel {
public:
    explicit LindbladModel(FockOperator hamiltonian, std::vector<Dissipator> dissipators = {});

    const FockOperator& hamiltonian() const noexcept { return hamiltonian_; }
    const std::vector<Dissipator>& dissipators() const noexcept { return dissipators_; }
    const SpaceLayout& layout() const noexcept { return hamiltonian_.layout(); }

    std::vector<Matrix> jump_matrices() const;
    std::vector<double> rates() const;

private:
    FockOperator hamiltonian_;
    std::vector<Dissipator> dissipators_;
};

/// kappa D_a on mode `label`.
Dissipator loss(const SpaceLayout& layout, std::string_view label, double kappa);
/// (1 + nbar) gamma D_a + nbar gamma D_a^dag on mode `label`.
std::vector<Dissipator> thermal_bath(const SpaceLayout& layout, std::string_view label, double gamma, double nbar);

/// Beamsplitter cooling model: H = g(a^dag a_m + a a_m^dag), LC loss kappa,
/// thermal bath (n_bar, gamma_m) on the mechanics only.
LindbladModel cooling_model(const SystemParams& params, const SpaceLayout& layout, const ModeLabels& labels = {});

/// Same dissipators around the full linearized Hamiltonian (no rotating-wave step).
LindbladModel cooling_model_linearized(const SystemParams& params, const SpaceLayout& layout,
                                       const ModeLabels& labels = {});

Matrix lindblad_rhs(const LindbladModel& model, const DensityMatrix& rho);
Matrix liouvillian(const LindbladModel& model);

/// `unitary` conjugates by exp(-iH dt) from one Hamiltonian eigendecomposition and
/// needs a model without dissipators; `automatic` picks it whenever that holds.
enum class Propagation { automatic, exponential, adaptive, unitary };

std::string_view propagation_name(Propagation method);

struct EvolveOptions {
    Propagation method = Propagation::automatic;
    /// Largest Hilbert dimension for which `automatic` picks the dense exponential.
    Index exponential_limit = 16;
    double rtol = 1e-10;
    double atol = 1e-12;
    std::size_t max_steps = 5'000'000;
    /// Invariant tolerances checked on every stored sample.
    DensityTolerance tolerance{1e-8, 1e-9, 1e-7};
    /// When set, every sample is checked with check_truncation.
    std::optional<double> truncation_threshold;
    /// Extra named observables; <n_label> for bosonic modes is always recorded.
    std::vector<std::pair<std::string, FockOperator>> observables;
};

struct EvolutionResult {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    std::map<std::string, std::vector<double>> observables;
    Propagation method = Propagation::adaptive;
    std::size_t steps = 0;
};

/// Integrates the master equation over `duration` seconds, storing `samples`
/// equally spaced states including t = 0 and t = duration.
EvolutionResult evolve(const LindbladModel& model, const DensityMatrix& rho0, double duration, int samples,
                       const EvolveOptions& options = {});

struct SteadyStateOptions {
    /// Second-smallest over largest singular value must exceed this.
    double uniqueness_ratio = 1e-8;
    /// Largest vectorized dimension checked by a full SVD; larger problems
    /// use the reciprocal condition of the trace-constrained system instead.
    Index svd_limit = 1600;
};

DensityMatrix steady_state(const LindbladModel& model, const SteadyStateOptions& options = {});

struct Elimination {
    LindbladModel model;
    SystemParams params;
    std::vector<std::string> warnings;
};

/// Removes the LC mode of a two-mode cooling model (kappa/g >= 5 required,
/// warns below 10). The result is the single-mechanical-mode model with
/// (1 + n_bar') gamma' D_a_m + n_bar' gamma' D_a_m^dag and zero Hamiltonian.
Elimination adiabatic_eliminate(const LindbladModel& two_mode, const SystemParams& params,
                                const ModeLabels& labels = {});

/// CSV with header `time,<observable>...`, fixed 17-digit formatting.
std::string to_csv(const EvolutionResult& result);
nlohmann::json to_json(const EvolutionResult& result, bool include_states = false);

}  // namespace emq
