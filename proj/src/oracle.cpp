#include "emq/oracle.hpp"

#include "emq/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

namespace emq::oracle {

OracleReport make_report(std::string quantity, nlohmann::json engine_value, nlohmann::json oracle_value,
                         std::string distance_name, double distance, double tolerance)
{
    if (!(distance >= 0.0)) distance = std::numeric_limits<double>::infinity();
    return {std::move(quantity), std::move(engine_value), std::move(oracle_value), std::move(distance_name),
            distance,           tolerance,               distance <= tolerance};
}

nlohmann::json to_json(const OracleReport& r)
{
    return {{"quantity", r.quantity},           {"engine_value", r.engine_value}, {"oracle_value", r.oracle_value},
            {"distance", {{"metric", r.distance_name}, {"value", r.distance}}},
            {"tolerance", r.tolerance},         {"pass", r.pass}};
}

// ------------------------------------------------------------------ unitary

Matrix exact_unitary(const FockOperator& hamiltonian, double t)
{
    const Index n = hamiltonian.dim();
    if (n > kUnitaryCap) throw InvalidArgument("oracle: dimension cap exceeded for exact_unitary");
    const Matrix h = 0.5 * (hamiltonian.matrix() + hamiltonian.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("oracle: eigendecomposition failed");
    Vector phases(n);
    for (Index k = 0; k < n; ++k) phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * t));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

StateVector exact_unitary_evolve(const FockOperator& hamiltonian, const StateVector& psi0, double t)
{
    if (!(hamiltonian.layout() == psi0.layout())) throw InvalidArgument("oracle: layout mismatch");
    return StateVector(psi0.layout(), exact_unitary(hamiltonian, t) * psi0.amplitudes());
}

// --------------------------------------------------------------- Liouvillian

namespace {

Matrix apply_generator(const OpenSystem& s, const Matrix& rho)
{
    const Matrix& h = s.hamiltonian.matrix();
    Matrix out = Complex(0.0, -1.0) * (h * rho - rho * h);
    for (const auto& [op, rate] : s.jumps) {
        const Matrix& x = op.matrix();
        const Matrix xdx = x.adjoint() * x;
        out += rate * (2.0 * x * rho * x.adjoint() - xdx * rho - rho * xdx);
    }
    return out;
}

}  // namespace

Matrix naive_liouvillian(const OpenSystem& system)
{
    const Index n = system.hamiltonian.dim();
    if (n > kLiouvilleCap) throw InvalidArgument("oracle: dimension cap exceeded for the Liouvillian");
    for (const auto& [op, rate] : system.jumps) {
        if (!(op.layout() == system.hamiltonian.layout())) throw InvalidArgument("oracle: layout mismatch");
        if (rate < 0.0) throw InvalidArgument("oracle: negative rate");
    }
    Matrix l(n * n, n * n);
    Matrix basis = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            basis(i, j) = 1.0;
            const Matrix col = apply_generator(system, basis);
            l.col(i + j * n) = Eigen::Map<const Vector>(col.data(), n * n);
            basis(i, j) = 0.0;
        }
    }
    return l;
}

Vector taylor_expm_action(const Matrix& a, const Vector& v)
{
    const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
    const int substeps = std::max(1, static_cast<int>(std::ceil(norm)));
    const Matrix step = a / static_cast<double>(substeps);
    Vector x = v;
    for (int s = 0; s < substeps; ++s) {
        Vector term = x;
        Vector sum = x;
        for (int k = 1; k < 60; ++k) {
            term = step * term / static_cast<double>(k);
            sum += term;
            if (term.norm() <= 1e-18 * sum.norm()) break;
        }
        x = sum;
    }
    return x;
}

DensityMatrix exact_liouville_evolve(const OpenSystem& system, const DensityMatrix& rho0, double t)
{
    if (!(system.hamiltonian.layout() == rho0.layout())) throw InvalidArgument("oracle: layout mismatch");
    const Index n = rho0.dim();
    const Matrix l = naive_liouvillian(system) * t;
    const Vector v = taylor_expm_action(l, Eigen::Map<const Vector>(rho0.matrix().data(), n * n));
    Matrix rho = Eigen::Map<const Matrix>(v.data(), n, n);
    return DensityMatrix(rho0.layout(), rho, DensityTolerance{1e-8, 1e-9, 1e-7});
}

DensityMatrix exact_steady_state(const OpenSystem& system)
{
    const Index n = system.hamiltonian.dim();
    const Matrix l = naive_liouvillian(system);
    Eigen::JacobiSVD<Matrix> svd(l, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(n * n - 2) <= 1e-8 * sv(0)) throw NumericalError("oracle: degenerate null space");
    const Vector v = svd.matrixV().col(n * n - 1);
    Matrix rho = Eigen::Map<const Matrix>(v.data(), n, n);
    rho /= rho.trace();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix(system.hamiltonian.layout(), rho, DensityTolerance{1e-8, 1e-9, 1e-8});
}

// ------------------------------------------------------------------ metrics

namespace {

Matrix psd_sqrt(const Matrix& m)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

FidelityMetrics fidelity_metrics(const DensityMatrix& rho, const DensityMatrix& sigma)
{
    if (!(rho.layout() == sigma.layout())) throw InvalidArgument("fidelity_metrics: layout mismatch");
    const Matrix diff = rho.matrix() - sigma.matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
    const double td = 0.5 * es.eigenvalues().cwiseAbs().sum();
    const Matrix s = psd_sqrt(rho.matrix());
    const Matrix inner = s * sigma.matrix() * s;
    Eigen::SelfAdjointEigenSolver<Matrix> es2(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
    const double root = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return {std::clamp(td, 0.0, 1.0), std::clamp(root * root, 0.0, 1.0)};
}

// ------------------------------------------------------------ teleportation

TeleportCircuit cphase_hadamard_teleport_circuit()
{
    TeleportCircuit c;
    const double r = 1.0 / std::sqrt(2.0);
    c.resource << 0, r, r, 0;
    Eigen::Matrix4cd cz = Eigen::Matrix4cd::Identity();
    cz(3, 3) = -1.0;
    Eigen::Matrix2cd h;
    h << r, r, r, -r;
    Eigen::Matrix4cd hh;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) hh(2 * i + k, 2 * j + l) = h(i, j) * h(k, l);
    c.bell_unitary = hh * cz;
    return c;
}

namespace {

// |<a|b>| == 1 for normalized vectors, i.e. equal up to a global phase.
bool same_ray(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b, double tol)
{
    return std::abs(1.0 - std::abs(a.dot(b))) <= tol && std::abs(a.norm() - 1.0) <= tol;
}

}  // namespace

TeleportVerification verify_teleportation(const TeleportCircuit& circuit, std::span<const QubitGate> alphabet)
{
    const double r = 1.0 / std::sqrt(2.0);
    const std::array<Eigen::Vector2cd, 4> inputs{Eigen::Vector2cd(1, 0), Eigen::Vector2cd(0, 1),
                                                 Eigen::Vector2cd(r, r), Eigen::Vector2cd(r, Complex(0, r))};
    constexpr double tol = 1e-10;

    TeleportVerification out;
    bool all_unique = true;
    CorrectionTable table;
    for (int b0 = 0; b0 < 2; ++b0) {
        for (int b1 = 0; b1 < 2; ++b1) {
            BranchSolution branch{b0, b1, 0.0, {}};
            std::vector<Eigen::Vector2cd> outputs;
            std::vector<Eigen::Vector2cd> expected;
            for (std::size_t k = 0; k < inputs.size(); ++k) {
                // Amplitudes over (input, local, remote), index 4*i + 2*l + r.
                Eigen::Matrix<Complex, 8, 1> psi;
                for (int i = 0; i < 2; ++i)
                    for (int q = 0; q < 4; ++q) psi(4 * i + q) = inputs[k](i) * circuit.resource(q);
                Eigen::Matrix<Complex, 8, 1> after;
                for (int rr = 0; rr < 2; ++rr) {
                    Eigen::Vector4cd pair;
                    for (int p = 0; p < 4; ++p) pair(p) = psi(2 * p + rr);
                    pair = circuit.bell_unitary * pair;
                    for (int p = 0; p < 4; ++p) after(2 * p + rr) = pair(p);
                }
                const int p = 2 * b0 + b1;
                Eigen::Vector2cd remote(after(2 * p), after(2 * p + 1));
                const double prob = remote.squaredNorm();
                if (k == 0) branch.probability = prob;
                if (prob < 1e-12) continue;
                outputs.push_back(remote / std::sqrt(prob));
                expected.push_back(inputs[k]);
            }
            if (outputs.empty()) {
                all_unique = false;
                out.branches.push_back(branch);
                continue;
            }
            for (QubitGate g : alphabet) {
                const Eigen::Matrix2cd m = gate_matrix(g);
                bool ok = true;
                for (std::size_t k = 0; k < outputs.size() && ok; ++k) {
                    ok = same_ray(m * outputs[k], expected[k], tol);
                }
                // The inputs span the Bloch sphere, so a fix must hold on all four.
                if (ok && outputs.size() < inputs.size()) ok = false;
                if (ok) branch.candidates.push_back(g);
            }
            if (branch.candidates.size() == 1) {
                table.gates[static_cast<std::size_t>(2 * b0 + b1)] = branch.candidates.front();
            } else {
                all_unique = false;
            }
            out.branches.push_back(branch);
        }
    }

    nlohmann::json found = nlohmann::json::object();
    int failures = 0;
    for (const auto& b : out.branches) {
        auto names = nlohmann::json::array();
        for (auto g : b.candidates) names.push_back(gate_name(g));
        found[std::to_string(b.b0) + std::to_string(b.b1)] = names;
        if (b.candidates.size() != 1) ++failures;
    }
    if (all_unique) out.table = table;
    out.report = make_report("teleportation correction table", nullptr, found, "branches without a unique correction",
                             static_cast<double>(failures), 0.0);
    return out;
}

// ------------------------------------------------------------- closed forms

double two_mode_steady_phonons(double g, double kappa, double gamma, double n_bar)
{
    // Moments na = <a^dag a>, nm = <a_m^dag a_m>, c = <a^dag a_m>:
    //   d na = -2 kappa na + i g (c - c*)
    //   d nm = -2 gamma (nm - n_bar) - i g (c - c*)
    //   d c  = -(kappa + gamma) c + i g (na - nm)
    // Stationary with y = i(c - c*): y = 2 g (nm - na)/(kappa + gamma), 2 kappa na = g y.
    const double s = kappa + gamma;
    const double num = n_bar * gamma * (g * g + kappa * s);
    const double den = s * (g * g + kappa * gamma);
    return den == 0.0 ? n_bar : num / den;
}

double eliminated_steady_phonons(double g, double kappa, double gamma, double n_bar)
{
    return n_bar * gamma / (gamma + g * g / kappa);
}

}  // namespace emq::oracle
