#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "emq/error.hpp"
#include "emq/fockspace.hpp"
#include "emq/random.hpp"
#include "emq/serialize.hpp"

#include <cmath>

using namespace emq;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("layout ordering and digits")
{
    const SpaceLayout layout{mode("a", 3), spin("s"), mode("m", 4)};
    CHECK(layout.total_dim() == 24);
    CHECK(layout.position("s") == 1);
    const std::array<Index, 3> d{2, 1, 3};
    const Index flat = layout.flat_index(d);
    CHECK(flat == 2 * 8 + 1 * 4 + 3);
    CHECK(layout.digits(flat) == std::vector<Index>{2, 1, 3});
    CHECK_THROWS_AS(layout.position("x"), InvalidArgument);
    CHECK_THROWS_AS((SpaceLayout{mode("a", 2), mode("a", 3)}), InvalidArgument);
    CHECK_THROWS_AS(SpaceLayout{mode("a", 0)}, InvalidArgument);
}

TEST_CASE("ladder algebra")
{
    const auto a = annihilation(5);
    const auto ad = creation(5);
    const Matrix comm = commutator(a, ad).matrix();
    // [a, a^dag] = 1 except in the last truncated level.
    for (Index k = 0; k < 4; ++k) CHECK(std::abs(comm(k, k) - 1.0) < 1e-14);
    CHECK(std::abs(comm(4, 4) + 4.0) < 1e-13);
    CHECK(max_abs((ad * a).matrix() - number(5).matrix()) < 1e-14);
    CHECK(number(5).is_hermitian());
}

TEST_CASE("dressed ladder products")
{
    const auto sp = dressed_ladder(Sign::plus);
    const auto sm = dressed_ladder(Sign::minus);
    // sigma_z + i sigma_y and its adjoint: sp sm + sm sp = 4 I in this normalization.
    const Matrix lhs = (sp * sm + sm * sp).matrix();
    CHECK(max_abs(lhs - 4.0 * Matrix::Identity(2, 2)) < 1e-14);
    CHECK(max_abs(sm.matrix() - sp.adjoint().matrix()) < 1e-15);
    CHECK(max_abs((pauli(Axis::z).matrix() + Complex(0, 1) * pauli(Axis::y).matrix()) - sp.matrix()) < 1e-15);
}

TEST_CASE("embedded operators on different modes commute")
{
    const SpaceLayout layout{mode("a", 3), mode("b", 3)};
    const auto a = annihilation(layout, "a");
    const auto b = annihilation(layout, "b");
    const auto ad = creation(layout, "a");
    const auto bd = creation(layout, "b");
    CHECK(max_abs(commutator(a, b).matrix()) < 1e-15);
    CHECK(max_abs(commutator(a, bd).matrix()) < 1e-15);
    CHECK(max_abs(commutator(number(layout, "a") + number(layout, "b"), ad * b + a * bd).matrix()) < 1e-13);
}

TEST_CASE("embed rejects mismatched dimension and unknown label")
{
    const SpaceLayout layout{mode("a", 3), mode("b", 2)};
    CHECK_THROWS_AS(embed(annihilation(4), layout, "a"), InvalidArgument);
    CHECK_THROWS_AS(embed(annihilation(3), layout, "c"), InvalidArgument);
}

TEST_CASE("density matrix validation")
{
    const SpaceLayout layout{mode("a", 2)};
    Matrix m = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(DensityMatrix(layout, m), NumericalError);
    m *= 0.5;
    CHECK_NOTHROW(DensityMatrix(layout, m));
    Matrix neg(2, 2);
    neg << 1.2, 0, 0, -0.2;
    CHECK_THROWS_AS(DensityMatrix(layout, neg), NumericalError);
    Matrix nonherm(2, 2);
    nonherm << 0.5, 0.1, 0.0, 0.5;
    CHECK_THROWS_AS(DensityMatrix(layout, nonherm), NumericalError);
    CHECK_THROWS_AS(DensityMatrix(SpaceLayout{mode("a", 3)}, m), InvalidArgument);
}

TEST_CASE("partial trace keeps unit trace for random states")
{
    Rng rng(11);
    const SpaceLayout layout{mode("a", 3), spin("s"), mode("m", 2)};
    for (int i = 0; i < 20; ++i) {
        const auto rho = random_density(layout, rng);
        const auto ra = partial_trace(rho, {"a"});
        const auto rsm = partial_trace(rho, {"s", "m"});
        CHECK(std::abs(ra.matrix().trace() - 1.0) < 1e-12);
        CHECK(std::abs(rsm.matrix().trace() - 1.0) < 1e-12);
        CHECK(ra.min_eigenvalue() > -1e-12);
    }
}

TEST_CASE("partial trace of a product state returns the factors")
{
    Rng rng(5);
    const auto r1 = random_density(SpaceLayout{mode("a", 3)}, rng);
    const auto r2 = random_density(SpaceLayout{mode("b", 2)}, rng);
    const auto joint = tensor(r1, r2);
    CHECK(max_abs(partial_trace(joint, {"a"}).matrix() - r1.matrix()) < 1e-14);
    CHECK(max_abs(partial_trace(joint, {"b"}).matrix() - r2.matrix()) < 1e-14);
}

TEST_CASE("thermal state and truncation check")
{
    const auto rho = DensityMatrix::thermal(mode("m", 40), 1.5);
    CHECK(rho.expectation(number(SpaceLayout{mode("m", 40)}, "m")) == doctest::Approx(1.5).epsilon(1e-6));
    const auto small = DensityMatrix::thermal(mode("m", 4), 1.5);
    CHECK(top_level_population(small) > 0.1);
    CHECK_THROWS_AS(check_truncation(small, 1e-3), TruncationError);
    CHECK_NOTHROW(check_truncation(rho, 1e-6));
}

TEST_CASE("pure state fidelity and purity")
{
    Rng rng(3);
    const SpaceLayout layout{spin("s"), mode("m", 3)};
    const auto psi = haar_state(layout, rng);
    const auto rho = DensityMatrix::pure(psi);
    CHECK(fidelity(rho, psi) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rho.purity() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(DensityMatrix::maximally_mixed(layout).purity() == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("json round trip of states and operators")
{
    Rng rng(9);
    const SpaceLayout layout{mode("a", 2), spin("s")};
    const auto rho = random_density(layout, rng);
    const auto back = density_from_json(to_json(rho));
    CHECK(back.layout() == layout);
    CHECK(max_abs(back.matrix() - rho.matrix()) == 0.0);
    const auto psi = haar_state(layout, rng);
    CHECK(max_abs(state_from_json(to_json(psi)).amplitudes() - psi.amplitudes()) == 0.0);
    const auto op = random_operator(layout, rng);
    CHECK(max_abs(operator_from_json(to_json(op)).matrix() - op.matrix()) == 0.0);
    CHECK(to_json(rho)["schema"] == kStateSchema);
}
