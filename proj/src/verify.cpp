#include "emq/verify.hpp"

#include "emq/kernels.hpp"
#include "emq/lindblad.hpp"
#include "emq/protocols.hpp"
#include "emq/random.hpp"

#include <cmath>
#include <random>

namespace emq {

bool VerifySummary::pass() const { return failures() == 0; }

int VerifySummary::failures() const
{
    int n = 0;
    for (const auto& r : reports) n += r.pass ? 0 : 1;
    return n;
}

namespace {

using oracle::make_report;

SpaceLayout random_layout(Rng& rng)
{
    switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
    case 0: return SpaceLayout{mode("a", 4)};
    case 1: return SpaceLayout{mode("a", 2), mode("m", 3)};
    case 2: return SpaceLayout{spin("s"), mode("m", 3)};
    case 3: return SpaceLayout{mode("a", 3), mode("m", 3)};
    default: return SpaceLayout{spin("s"), mode("m", 4)};
    }
}

struct Instance {
    LindbladModel model;
    oracle::OpenSystem system;
    DensityMatrix rho;
    double time;
};

Instance random_instance(Rng& rng)
{
    const auto layout = random_layout(rng);
    const auto h = random_hermitian(layout, rng, 1.0);
    std::uniform_real_distribution<double> rate(0.05, 0.5);
    const int jumps = std::uniform_int_distribution<int>(1, 3)(rng);
    std::vector<Dissipator> d;
    oracle::OpenSystem sys{h, {}};
    for (int k = 0; k < jumps; ++k) {
        const auto op = random_operator(layout, rng, 0.5);
        const double r = rate(rng);
        d.emplace_back(op, r);
        sys.jumps.emplace_back(op, r);
    }
    return {LindbladModel(h, std::move(d)), std::move(sys), random_density(layout, rng),
            std::uniform_real_distribution<double>(0.3, 1.5)(rng)};
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b)
{
    return oracle::fidelity_metrics(a, b).trace_distance;
}

}  // namespace

VerifySummary verify_all(const VerifyOptions& options)
{
    VerifySummary s;
    Rng rng(options.seed);

    for (int i = 0; i < options.instances; ++i) {
        const std::string tag = " #" + std::to_string(i);
        const auto inst = random_instance(rng);

        const Matrix l_engine = liouvillian(inst.model);
        const Matrix l_oracle = oracle::naive_liouvillian(inst.system);
        s.reports.push_back(make_report("liouvillian" + tag, nullptr, nullptr, "max abs entry difference",
                                        (l_engine - l_oracle).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + l_oracle.norm())));

        const auto jumps = inst.model.jump_matrices();
        const auto rates = inst.model.rates();
        const Matrix serial = kernels::lindblad_rhs_serial(inst.model.hamiltonian().matrix(), jumps, rates,
                                                           inst.rho.matrix());
        s.reports.push_back(make_report("lindblad_rhs" + tag, nullptr, nullptr, "max abs entry difference",
                                        (lindblad_rhs(inst.model, inst.rho) - serial).cwiseAbs().maxCoeff(), 1e-12));

        const auto exact = oracle::exact_liouville_evolve(inst.system, inst.rho, inst.time);
        EvolveOptions eo;
        eo.method = Propagation::exponential;
        const auto by_exp = evolve(inst.model, inst.rho, inst.time, 2, eo).states.back();
        s.reports.push_back(make_report("evolve exponential" + tag, nullptr, nullptr, "trace distance",
                                        trace_distance(by_exp, exact), 1e-9));
        eo.method = Propagation::adaptive;
        const auto by_rk = evolve(inst.model, inst.rho, inst.time, 2, eo).states.back();
        s.reports.push_back(make_report("evolve adaptive" + tag, nullptr, nullptr, "trace distance",
                                        trace_distance(by_rk, exact), 1e-6));

        const auto ss = steady_state(inst.model);
        const auto ss_oracle = oracle::exact_steady_state(inst.system);
        s.reports.push_back(make_report("steady_state" + tag, nullptr, nullptr, "trace distance",
                                        trace_distance(ss, ss_oracle), 1e-8));

        // Self-consistency: no dissipators reduces to the unitary exponential.
        const oracle::OpenSystem closed{inst.system.hamiltonian, {}};
        const auto psi = haar_state(inst.rho.layout(), rng);
        const auto lifted = DensityMatrix::pure(oracle::exact_unitary_evolve(closed.hamiltonian, psi, inst.time));
        const auto via_l = oracle::exact_liouville_evolve(closed, DensityMatrix::pure(psi), inst.time);
        s.reports.push_back(make_report("oracle unitary vs Liouvillian" + tag, nullptr, nullptr, "max abs entry difference",
                                        (lifted.matrix() - via_l.matrix()).cwiseAbs().maxCoeff(), 1e-10));
    }

    // Closed form for the two-mode cooling steady state.
    for (double ratio : {5.0, 10.0, 20.0}) {
        SystemParams p;
        p.g = 1.0;
        p.kappa = ratio;
        p.gamma_m = 0.05;
        p.n_bar = 0.5;
        const SpaceLayout layout{mode("a", 4), mode("m", 10)};
        const auto rho = steady_state(cooling_model(p, layout));
        const double engine = rho.expectation(number(layout, "m"));
        const double closed = oracle::two_mode_steady_phonons(1.0, ratio, 0.05, 0.5);
        s.reports.push_back(make_report("two-mode steady phonons, kappa/g=" + std::to_string(static_cast<int>(ratio)),
                                        engine, closed, "relative difference", std::abs(engine - closed) / closed,
                                        1e-3));
    }

    // Beamsplitter single excitation: amplitudes (cos gt, -i sin gt).
    {
        const SpaceLayout layout{mode("a", 2), mode("m", 2)};
        const double g = 1.3, t = 0.4;
        const std::array<Index, 2> one0{1, 0};
        const auto psi = oracle::exact_unitary_evolve(build_beamsplitter(g, layout), StateVector::basis(layout, one0), t);
        const std::array<Index, 2> zero1{0, 1};
        const double err = std::abs(psi.amplitudes()(layout.flat_index(one0)) - std::cos(g * t)) +
                           std::abs(psi.amplitudes()(layout.flat_index(zero1)) - Complex(0.0, -std::sin(g * t)));
        s.reports.push_back(make_report("beamsplitter rotation", nullptr, nullptr, "amplitude error", err, 1e-12));
    }

    // Teleportation: oracle table equals the stored one; Pauli-only search finds none.
    {
        const auto v = oracle::verify_teleportation(oracle::cphase_hadamard_teleport_circuit(), kPauliHadamardGates);
        s.reports.push_back(v.report);
        const bool same = v.table && *v.table == kTeleportCorrections;
        s.reports.push_back(make_report("stored correction table matches oracle", nullptr, v.report.oracle_value,
                                        "mismatch", same ? 0.0 : 1.0, 0.0));
        const auto pauli = oracle::verify_teleportation(oracle::cphase_hadamard_teleport_circuit(), kPauliGates);
        s.reports.push_back(make_report("Pauli-only corrections insufficient for this circuit", nullptr,
                                        pauli.report.oracle_value, "unexpected table found", pauli.table ? 1.0 : 0.0,
                                        0.0));
    }

    // Engine teleportation against the input for random states, every branch.
    for (int i = 0; i < options.instances; ++i) {
        const auto psi = haar_state(SpaceLayout{mode("q", 2)}, rng);
        const Eigen::Vector2cd in = psi.amplitudes();
        double worst = 0.0;
        for (int b = 0; b < 4; ++b) {
            const Eigen::Matrix2cd out = teleport_branch(qubit_density(in), b / 2, b % 2);
            const DensityMatrix a(SpaceLayout{mode("q", 2)}, out);
            worst = std::max(worst, trace_distance(a, DensityMatrix::pure(psi)));
        }
        s.reports.push_back(make_report("teleport branches #" + std::to_string(i), nullptr, nullptr,
                                        "worst trace distance", worst, 1e-9));
    }
    return s;
}

nlohmann::json to_json(const VerifySummary& summary)
{
    auto reports = nlohmann::json::array();
    for (const auto& r : summary.reports) reports.push_back(oracle::to_json(r));
    return {{"schema", "emq.verify/1"},
            {"pass", summary.pass()},
            {"checks", summary.reports.size()},
            {"failures", summary.failures()},
            {"reports", reports}};
}

}  // namespace emq
