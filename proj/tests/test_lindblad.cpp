#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "emq/error.hpp"
#include "emq/kernels.hpp"
#include "emq/lindblad.hpp"
#include "emq/oracle.hpp"
#include "emq/random.hpp"

#include <cmath>

using namespace emq;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

double trace_distance(const DensityMatrix& a, const DensityMatrix& b)
{
    return oracle::fidelity_metrics(a, b).trace_distance;
}

LindbladModel random_model(const SpaceLayout& layout, Rng& rng, oracle::OpenSystem* sys = nullptr)
{
    const auto h = random_hermitian(layout, rng);
    std::vector<Dissipator> d;
    if (sys) *sys = {h, {}};
    for (int k = 0; k < 2; ++k) {
        const auto op = random_operator(layout, rng, 0.4);
        d.emplace_back(op, 0.2 + 0.1 * k);
        if (sys) sys->jumps.emplace_back(op, 0.2 + 0.1 * k);
    }
    return LindbladModel(h, std::move(d));
}

SystemParams cooling_params(double g, double kappa, double gamma, double nbar)
{
    SystemParams p;
    p.g = g;
    p.kappa = kappa;
    p.gamma_m = gamma;
    p.n_bar = nbar;
    return p;
}

}  // namespace

TEST_CASE("model construction errors")
{
    const SpaceLayout layout{mode("a", 2)};
    CHECK_THROWS_AS(Dissipator(annihilation(layout, "a"), -0.1), InvalidArgument);
    Matrix h(2, 2);
    h << 0, 1, 0, 0;
    CHECK_THROWS_AS(LindbladModel(FockOperator(layout, h)), InvalidArgument);
    const SpaceLayout other{mode("b", 2)};
    CHECK_THROWS_AS(LindbladModel(zero(layout), {loss(other, "b", 1.0)}), InvalidArgument);
}

TEST_CASE("rhs is traceless and hermitian on random states")
{
    Rng rng(4);
    const SpaceLayout layout{mode("a", 3), spin("s")};
    for (int i = 0; i < 20; ++i) {
        const auto model = random_model(layout, rng);
        const auto rho = random_density(layout, rng);
        const Matrix d = lindblad_rhs(model, rho);
        CHECK(std::abs(d.trace()) < 1e-12);
        CHECK(max_abs(d - d.adjoint()) < 1e-12);
    }
}

TEST_CASE("parallel kernels match the serial references")
{
    Rng rng(8);
    const SpaceLayout layout{mode("a", 3), mode("m", 3)};
    const auto model = random_model(layout, rng);
    const auto rho = random_density(layout, rng);
    const auto jumps = model.jump_matrices();
    const auto rates = model.rates();
    const Matrix& h = model.hamiltonian().matrix();
    for (int threads : {1, 2, 3}) {
        kernels::set_threads(threads);
        CHECK(max_abs(kernels::liouvillian_parallel(h, jumps, rates) - kernels::liouvillian_serial(h, jumps, rates)) <
              1e-13);
        Matrix out;
        kernels::lindblad_rhs_parallel(kernels::make_plan(h, jumps, rates), rho.matrix(), out);
        CHECK(max_abs(out - kernels::lindblad_rhs_serial(h, jumps, rates, rho.matrix())) < 1e-13);
    }
    kernels::set_threads(1);
}

TEST_CASE("liouvillian matches the naive oracle and acts like the rhs")
{
    Rng rng(12);
    const SpaceLayout layout{spin("s"), mode("m", 3)};
    oracle::OpenSystem sys{zero(layout), {}};
    const auto model = random_model(layout, rng, &sys);
    const Matrix l = liouvillian(model);
    CHECK(max_abs(l - oracle::naive_liouvillian(sys)) < 1e-12);
    const auto rho = random_density(layout, rng);
    const Vector v = Eigen::Map<const Vector>(rho.matrix().data(), rho.matrix().size());
    const Vector lv = l * v;
    const Matrix back = Eigen::Map<const Matrix>(lv.data(), rho.dim(), rho.dim());
    CHECK(max_abs(back - lindblad_rhs(model, rho)) < 1e-12);
}

TEST_CASE("amplitude decay convention")
{
    // kappa on D_a: <a^dag a> decays as exp(-2 kappa t).
    const SpaceLayout layout{mode("a", 3)};
    const LindbladModel model(zero(layout), {loss(layout, "a", 0.3)});
    const std::array<Index, 1> one{1};
    const auto r = evolve(model, DensityMatrix::pure(StateVector::basis(layout, one)), 2.0, 5);
    const auto& n = r.observables.at("n_a");
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        CHECK(n[k] == doctest::Approx(std::exp(-0.6 * r.times[k])).epsilon(1e-9));
    }
}

TEST_CASE("exponential and adaptive evolution agree with the oracle")
{
    Rng rng(30);
    const SpaceLayout layout{mode("a", 2), mode("m", 3)};
    oracle::OpenSystem sys{zero(layout), {}};
    const auto model = random_model(layout, rng, &sys);
    const auto rho0 = random_density(layout, rng);
    const auto exact = oracle::exact_liouville_evolve(sys, rho0, 1.1);
    EvolveOptions eo;
    eo.method = Propagation::exponential;
    const auto a = evolve(model, rho0, 1.1, 3, eo);
    CHECK(a.method == Propagation::exponential);
    CHECK(trace_distance(a.states.back(), exact) < 1e-10);
    eo.method = Propagation::adaptive;
    const auto b = evolve(model, rho0, 1.1, 3, eo);
    CHECK(b.method == Propagation::adaptive);
    CHECK(b.steps > 0);
    CHECK(trace_distance(b.states.back(), exact) < 1e-7);
    CHECK(b.times.back() == 1.1);
}

TEST_CASE("evolution preserves trace, hermiticity and positivity at every sample")
{
    Rng rng(2);
    const SpaceLayout layout{mode("a", 3), mode("m", 4)};
    const auto model = cooling_model(cooling_params(1.0, 2.0, 0.1, 0.3), layout);
    const auto rho0 = random_density(layout, rng);
    const auto r = evolve(model, rho0, 3.0, 31);
    for (const auto& s : r.states) {
        CHECK(std::abs(s.matrix().trace() - 1.0) < 1e-9);
        CHECK(relative_hermiticity_error(s.matrix()) < 1e-10);
        CHECK(s.min_eigenvalue() > -1e-9);
    }
}

TEST_CASE("closed models use the unitary path")
{
    Rng rng(19);
    const SpaceLayout layout{mode("a", 3), spin("s")};
    const auto h = random_hermitian(layout, rng);
    const auto psi = haar_state(layout, rng);
    const auto r = evolve(LindbladModel(h), DensityMatrix::pure(psi), 0.9, 4);
    CHECK(r.method == Propagation::unitary);
    const auto ref = DensityMatrix::pure(oracle::exact_unitary_evolve(h, psi, 0.9));
    CHECK(trace_distance(r.states.back(), ref) < 1e-12);
    EvolveOptions eo;
    eo.method = Propagation::unitary;
    CHECK_THROWS_AS(evolve(LindbladModel(h, {loss(layout, "a", 0.1)}), DensityMatrix::pure(psi), 1.0, 2, eo),
                    InvalidArgument);
}

TEST_CASE("evolve rejects bad arguments")
{
    const SpaceLayout layout{mode("a", 2)};
    const LindbladModel model(zero(layout));
    const auto rho = DensityMatrix::maximally_mixed(layout);
    CHECK_THROWS_AS(evolve(model, rho, -1.0, 3), InvalidArgument);
    CHECK_THROWS_AS(evolve(model, rho, 1.0, 1), InvalidArgument);
    CHECK_THROWS_AS(evolve(model, DensityMatrix::maximally_mixed(SpaceLayout{mode("b", 2)}), 1.0, 3),
                    InvalidArgument);
}

TEST_CASE("truncation guard during evolution")
{
    const SpaceLayout layout{mode("a", 3)};
    const LindbladModel model(zero(layout), thermal_bath(layout, "a", 1.0, 2.0));
    EvolveOptions eo;
    eo.truncation_threshold = 1e-3;
    const std::array<Index, 1> vac{0};
    CHECK_THROWS_AS(evolve(model, DensityMatrix::pure(StateVector::basis(layout, vac)), 5.0, 5, eo), TruncationError);
}

TEST_CASE("steady state of a thermal bath is the thermal state")
{
    const SpaceLayout layout{mode("m", 30)};
    const LindbladModel model(zero(layout), thermal_bath(layout, "m", 0.2, 0.7));
    const auto rho = steady_state(model);
    const auto ref = DensityMatrix::thermal(layout.subsystems()[0], 0.7);
    CHECK(trace_distance(rho, ref) < 1e-10);
}

TEST_CASE("steady state matches the oracle null vector")
{
    Rng rng(44);
    const SpaceLayout layout{mode("a", 3), spin("s")};
    oracle::OpenSystem sys{zero(layout), {}};
    const auto model = random_model(layout, rng, &sys);
    CHECK(trace_distance(steady_state(model), oracle::exact_steady_state(sys)) < 1e-9);
}

TEST_CASE("degenerate steady state is reported")
{
    const SpaceLayout layout{mode("a", 2)};
    const LindbladModel closed(number(layout, "a"));
    CHECK_THROWS_AS(steady_state(closed), NumericalError);
}

TEST_CASE("cooling model at g = 0 relaxes to n_bar")
{
    const SpaceLayout layout{mode("a", 2), mode("m", 25)};
    const auto rho = steady_state(cooling_model(cooling_params(0.0, 1.0, 0.1, 0.8), layout));
    CHECK(rho.expectation(number(layout, "m")) == doctest::Approx(0.8).epsilon(1e-6));
}

TEST_CASE("adiabatic elimination")
{
    const SpaceLayout layout{mode("a", 3), mode("m", 8)};
    const auto p = cooling_params(1.0, 20.0, 0.01, 2.0);
    const auto e = adiabatic_eliminate(cooling_model(p, layout), p);
    CHECK(e.warnings.empty());
    CHECK(*e.params.kappa_prime == doctest::Approx(0.05));
    CHECK(*e.params.gamma_prime == doctest::Approx(0.06));
    CHECK(*e.params.n_bar_prime == doctest::Approx(2.0 * 0.01 / 0.06));
    CHECK(e.model.layout() == SpaceLayout{mode("m", 8)});
    CHECK(max_abs(e.model.hamiltonian().matrix()) == 0.0);

    const auto marginal = cooling_params(1.0, 7.0, 0.01, 2.0);
    CHECK_FALSE(adiabatic_eliminate(cooling_model(marginal, layout), marginal).warnings.empty());
    const auto bad = cooling_params(1.0, 3.0, 0.01, 2.0);
    CHECK_THROWS_AS(adiabatic_eliminate(cooling_model(bad, layout), bad), PreconditionError);
}

TEST_CASE("csv and json output")
{
    const SpaceLayout layout{mode("a", 2)};
    const LindbladModel model(zero(layout), {loss(layout, "a", 0.5)});
    const auto r = evolve(model, DensityMatrix::maximally_mixed(layout), 1.0, 3);
    const auto csv = to_csv(r);
    CHECK(csv.rfind("time,n_a\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    const auto j = to_json(r, true);
    CHECK(j["times"].size() == 3);
    CHECK(j["states"].size() == 3);
    CHECK_FALSE(to_json(r).contains("states"));
}
