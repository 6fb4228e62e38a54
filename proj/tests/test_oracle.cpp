#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "emq/error.hpp"
#include "emq/oracle.hpp"
#include "emq/random.hpp"
#include "emq/verify.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using namespace emq;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("exact unitary is unitary and matches the series exponential")
{
    Rng rng(1);
    const SpaceLayout layout{mode("a", 3), spin("s")};
    const auto h = random_hermitian(layout, rng);
    const Matrix u = oracle::exact_unitary(h, 0.7);
    CHECK(max_abs(u * u.adjoint() - Matrix::Identity(6, 6)) < 1e-13);
    const Matrix ref = (Complex(0, -0.7) * h.matrix()).exp();
    CHECK(max_abs(u - ref) < 1e-12);
}

TEST_CASE("taylor action agrees with a dense exponential")
{
    Rng rng(2);
    const SpaceLayout layout{mode("a", 4)};
    const Matrix a = 3.0 * random_operator(layout, rng).matrix();
    const Vector v = haar_state(layout, rng).amplitudes();
    CHECK((oracle::taylor_expm_action(a, v) - a.exp() * v).norm() < 1e-11 * (a.exp() * v).norm());
}

TEST_CASE("oracle liouvillian annihilates the trace functional")
{
    Rng rng(3);
    const SpaceLayout layout{mode("a", 2), mode("m", 3)};
    oracle::OpenSystem sys{random_hermitian(layout, rng), {{random_operator(layout, rng), 0.3}}};
    const Matrix l = oracle::naive_liouvillian(sys);
    const Index n = layout.total_dim();
    Vector tr = Vector::Zero(n * n);
    for (Index i = 0; i < n; ++i) tr(i * n + i) = 1.0;
    CHECK((tr.transpose() * l).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("oracle caps")
{
    const SpaceLayout big{mode("a", 7), mode("m", 7)};
    oracle::OpenSystem sys{zero(big), {}};
    CHECK_THROWS_AS(oracle::naive_liouvillian(sys), InvalidArgument);
}

TEST_CASE("Fuchs-van de Graaf inequalities on random pairs")
{
    Rng rng(4);
    const SpaceLayout layout{mode("a", 3), spin("s")};
    for (int i = 0; i < 100; ++i) {
        const auto r = random_density(layout, rng);
        const auto s = random_density(layout, rng);
        const auto m = oracle::fidelity_metrics(r, s);
        const double f = m.state_fidelity;
        CHECK(1.0 - std::sqrt(f) <= m.trace_distance + 1e-12);
        CHECK(m.trace_distance <= std::sqrt(1.0 - f) + 1e-12);
    }
}

TEST_CASE("correction table for the CPHASE + Hadamard Bell measurement")
{
    const auto v = oracle::verify_teleportation(oracle::cphase_hadamard_teleport_circuit(), kPauliHadamardGates);
    REQUIRE(v.table.has_value());
    CHECK(v.report.pass);
    CHECK(v.table->at(0, 0) == QubitGate::ZH);
    CHECK(v.table->at(0, 1) == QubitGate::XZH);
    CHECK(v.table->at(1, 0) == QubitGate::H);
    CHECK(v.table->at(1, 1) == QubitGate::XH);
    for (const auto& b : v.branches) {
        CHECK(b.candidates.size() == 1);
        CHECK(b.probability == doctest::Approx(0.25));
    }
}

TEST_CASE("Pauli-only corrections do not exist for this circuit")
{
    const auto v = oracle::verify_teleportation(oracle::cphase_hadamard_teleport_circuit(), kPauliGates);
    CHECK_FALSE(v.table.has_value());
    CHECK_FALSE(v.report.pass);
}

TEST_CASE("standard CNOT circuit recovers the textbook Pauli table")
{
    // Bell-basis measurement via CNOT then H on the input with resource |00> + |11>.
    oracle::TeleportCircuit c;
    const double r = 1.0 / std::sqrt(2.0);
    c.resource << r, 0, 0, r;
    Eigen::Matrix4cd cnot = Eigen::Matrix4cd::Zero();
    cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
    const Eigen::Matrix2cd h = gate_matrix(QubitGate::H);
    Eigen::Matrix4cd h_first = Eigen::Matrix4cd::Zero();
    h_first.topLeftCorner(2, 2) = h(0, 0) * Eigen::Matrix2cd::Identity();
    h_first.topRightCorner(2, 2) = h(0, 1) * Eigen::Matrix2cd::Identity();
    h_first.bottomLeftCorner(2, 2) = h(1, 0) * Eigen::Matrix2cd::Identity();
    h_first.bottomRightCorner(2, 2) = h(1, 1) * Eigen::Matrix2cd::Identity();
    c.bell_unitary = h_first * cnot;
    const auto v = oracle::verify_teleportation(c, kPauliGates);
    REQUIRE(v.table.has_value());
    CHECK(v.table->at(0, 0) == QubitGate::I);
    CHECK(v.table->at(0, 1) == QubitGate::X);
    CHECK(v.table->at(1, 0) == QubitGate::Z);
    CHECK(v.table->at(1, 1) == QubitGate::XZ);
}

TEST_CASE("closed forms")
{
    CHECK(oracle::eliminated_steady_phonons(1.0, 20.0, 0.01, 2.0) == doctest::Approx(2.0 * 0.01 / 0.06));
    // Two-mode value approaches the eliminated one as kappa/g grows.
    const double e = oracle::eliminated_steady_phonons(1.0, 200.0, 0.01, 2.0);
    CHECK(std::abs(oracle::two_mode_steady_phonons(1.0, 200.0, 0.01, 2.0) / e - 1.0) < 1e-4);
}

TEST_CASE("report json")
{
    const auto r = oracle::make_report("x", 1.0, 1.5, "abs", 0.5, 0.1);
    CHECK_FALSE(r.pass);
    const auto j = oracle::to_json(r);
    CHECK(j["quantity"] == "x");
    CHECK(j["pass"] == false);
}

TEST_CASE("verify-all passes on a small run")
{
    VerifyOptions o;
    o.instances = 3;
    o.seed = 17;
    const auto s = verify_all(o);
    for (const auto& r : s.reports) {
        INFO(r.quantity);
        CHECK(r.pass);
    }
    CHECK(s.pass());
    CHECK(to_json(s)["schema"] == "emq.verify/1");
}
