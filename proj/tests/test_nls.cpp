#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "subkam/errors.hpp"
#include "subkam/nls.hpp"

using namespace subkam;

namespace {

double bracket(int n) { return n == 0 ? 0.5 : std::abs(n); }

const Eigen::VectorXd omega27 = Eigen::VectorXd::Constant(1, 2.7);

} // namespace

TEST_CASE("zero forcing gives a zero perturbation")
{
    const auto [nf, P] = build_nls(cos_potential(0.0), omega27, 8);
    CHECK(P.is_zero());
    CHECK(nf.Omega(4) == doctest::Approx(3.0));
    CHECK(nf.Omega(0) == doctest::Approx(1.0));
}

TEST_CASE("cos potential couples n to n and n +- 1 only")
{
    const double eps = 1e-3;
    const auto [nf, P] = build_nls(cos_potential(eps), omega27, 8);
    CHECK(std::abs(P.coeff(MonomialKey::zzbar({0}, 2, 2)) - eps / std::sqrt(bracket(2) * bracket(2))) < 1e-18);
    CHECK(std::abs(P.coeff(MonomialKey::zzbar({0}, 2, 3)) - 0.5 * eps / std::sqrt(6.0)) < 1e-18);
    CHECK(std::abs(P.coeff(MonomialKey::zzbar({1}, 0, -1)) - 0.25 * eps / std::sqrt(0.5)) < 1e-18);
    CHECK(std::abs(P.coeff(MonomialKey::zzbar({-1}, 3, 2)) - 0.25 * eps / std::sqrt(6.0)) < 1e-18);
    CHECK(P.coeff(MonomialKey::zzbar({0}, 2, 4)) == cplx(0.0));
    CHECK(P.coeff(MonomialKey::zzbar({1}, 2, 2)) == cplx(0.0));
    CHECK(P.coeff(MonomialKey::zz({0}, 2, -2)) == cplx(0.0));
    CHECK(P.reality_defect() < 1e-18);
}

TEST_CASE("perturbation is linear in eps and independent of lambda")
{
    const auto [n1, P1] = build_nls(cos_potential(1e-3), omega27, 6);
    const auto [n2, P2] = build_nls(cos_potential(2e-3), omega27, 6);
    CHECK(max_coefficient(P2 - cplx(2.0, 0.0) * P1) < 1e-18);
    const auto [n3, P3] = build_nls(cos_potential(1e-3, 0.5, 2.0), omega27, 6);
    CHECK(max_coefficient(P3 - P1) == 0.0);
    for (int n = -6; n <= 6; ++n) CHECK(n3.Omega(n) - n1.Omega(n) == doctest::Approx(1.0));
}

TEST_CASE("standing assumptions")
{
    const DomainParams D{1.0, 1.0, 1.0, 1.0, 1};
    AssumptionOptions ao;
    ao.domain = D;
    ao.eps0 = 1e-2;
    ao.omega_samples = {{omega27, omega27}, {Eigen::VectorXd::Constant(1, 2.8), Eigen::VectorXd::Constant(1, 2.8)}};
    const auto [nf, P] = build_nls(cos_potential(1e-4), omega27, 8);
    const AssumptionReport ok = verify_assumptions(nf, P, 0.5, ao);
    CHECK(ok.pass());
    CHECK(ok.lipschitz == doctest::Approx(1.0));

    NormalForm bad = nf;
    bad.tilde_omega[3 + 8] = 0.1;
    const AssumptionReport a2 = verify_assumptions(bad, P, 0.5, ao);
    CHECK_FALSE(a2.a2);
    bad.L = bad.tilde_weight();
    CHECK(verify_assumptions(bad, P, 0.5, ao).a2);

    // Spatial modes decaying like e^{-|l|/10} are too slow for rho = 1; the widest coupling binds.
    PotentialSpec slow;
    slow.eps = 1e-4;
    for (int l = -8; l <= 8; ++l) slow.vhat[{KVec{0}, l}] = std::exp(-0.1 * std::abs(l));
    const auto [ns, Ps] = build_nls(slow, omega27, 8);
    const AssumptionReport b2 = verify_assumptions(ns, Ps, 0.5, ao);
    CHECK_FALSE(b2.b2);
    CHECK(b2.seminorm.value > ok.seminorm.value);
    CHECK(std::abs(b2.seminorm.n - b2.seminorm.m) >= 8);
}

TEST_CASE("zero forcing reduces to the diagonal operator")
{
    KamParams p;
    p.lattice_cutoff = 6;
    p.max_steps = 2;
    const NlsReduction red = reduce_nls(cos_potential(0.0), {omega27}, p);
    REQUIRE(red.operators.size() == 1);
    const ReducedOperator& op = red.operators.front();
    for (int n = -6; n <= 6; ++n) CHECK(std::abs(op.core(n + 6, n + 6) - (std::sqrt(std::abs(n)) + 1.0)) < 1e-15);
    CHECK(op.support_defect() == 0.0);
    CHECK(op.hermitian_defect() == 0.0);
    CHECK(op.norm() == doctest::Approx(std::sqrt(6.0) + 1.0));
}

TEST_CASE("reduced flow tracks the forced flow")
{
    KamParams p;
    p.lattice_cutoff = 6;
    p.max_steps = 3;
    const PotentialSpec spec = cos_potential(1e-4);
    const NlsReduction red = reduce_nls(spec, {omega27}, p);
    const auto& s = red.run.final_state.samples.front();
    const auto [nf, P] = build_nls(spec, omega27, 6);
    ReducibilityOptions ro;
    ro.horizon = 5.0;
    ro.dt = 0.02;
    const ReducibilityMetrics m = verify_reducibility(nf, P, red.operators.front(), s.chain, ro);
    ro.dt = 0.01;
    const ReducibilityMetrics h = verify_reducibility(nf, P, red.operators.front(), s.chain, ro);
    CHECK(m.max_distance < 1e-5);
    CHECK(m.max_distance / h.max_distance == doctest::Approx(16.0).epsilon(0.3));
    CHECK(m.reduced_norm_drift < 1e-10);
    CHECK(red.operators.front().hermitian_defect() < 1e-12);
}

TEST_CASE("potential file round trip and errors")
{
    std::stringstream ss;
    write_potential(ss, cos_potential(1e-5));
    const PotentialSpec back = read_potential(ss);
    CHECK(back.d == 1);
    CHECK(back.vhat.size() == 7);
    CHECK(back.eps == 1e-5);
    CHECK(back.vhat.at({KVec{1}, -1}) == cplx(0.25));

    std::stringstream missing("# subkam-potential v1\n0 0 1 0\n");
    CHECK_THROWS_AS(read_potential(missing), IoError);
    std::stringstream garbled("# subkam-potential v1\nangles 1\n0 x 1 0\n");
    CHECK_THROWS_AS(read_potential(garbled), IoError);
    CHECK_THROWS_AS(load_potential("/nonexistent/potential.txt"), IoError);

    PotentialSpec complex_v = cos_potential(1e-5);
    complex_v.vhat[{KVec{1}, 1}] = cplx(0.25, 0.1);
    CHECK_THROWS_AS(complex_v.validate(), ParameterError);
}
