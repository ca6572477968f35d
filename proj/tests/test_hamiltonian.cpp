#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "subkam/algebra.hpp"
#include "subkam/errors.hpp"
#include "subkam/homological.hpp"
#include "subkam/serialization.hpp"

using namespace subkam;

namespace {

const cplx I1(0.0, 1.0);

QuadHamiltonian random_h(int N, int K, std::uint64_t seed, bool real = true)
{
    RandomSeedOptions so;
    so.K = K;
    so.domain = {1.0, 1.0, 0.5, 1.0, 1};
    QuadHamiltonian H = random_decaying_perturbation(1, N, so, seed);
    H.set_real(real);
    return H;
}

PhasePoint random_point(int N, std::uint64_t seed)
{
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    PhasePoint x = PhasePoint::zero(1, N);
    x.theta[0] = 6.0 * u(g);
    x.action[0] = cplx(u(g), u(g));
    for (int i = 0; i < 2 * N + 1; ++i) {
        x.z[i] = cplx(u(g), u(g));
        x.zbar[i] = cplx(u(g), u(g));
    }
    return x;
}

double max_abs_diff(const QuadHamiltonian& a, const QuadHamiltonian& b) { return max_coefficient(a - b); }

} // namespace

TEST_CASE("evaluation follows the documented coefficient convention")
{
    QuadHamiltonian H(1, 2, 1, false);
    H.add(MonomialKey::constant({0}), 0.25);
    H.add(MonomialKey::action({1}, 0), 2.0);
    H.add(MonomialKey::zzbar({0}, 1, -1), cplx(0.0, 3.0));
    H.add(MonomialKey::zz({-1}, 0, 0), 6.0);
    H.add(MonomialKey::zbar({0}, 2), -1.0);
    PhasePoint x = PhasePoint::zero(1, 2);
    x.theta[0] = 0.4;
    x.action[0] = 0.7;
    x.z << 0.1, 0.2, 0.3, 0.4, 0.5;
    x.zbar << -0.1, 0.6, 0.7, 0.8, 0.9;
    const cplx e = std::polar(1.0, 0.4);
    // sites are stored at n + 2
    const cplx oracle = 0.25 + 2.0 * e * 0.7 + I1 * 3.0 * x.z[3] * x.zbar[1] + std::conj(e) * 3.0 * x.z[2] * x.z[2]
        - x.zbar[4];
    CHECK(std::abs(evaluate(H, x) - oracle) < 1e-15);
}

TEST_CASE("elementary brackets")
{
    // {I, e^{i theta}} = -i e^{i theta}
    QuadHamiltonian I(1, 1, 1), E(1, 1, 1, false);
    I.add(MonomialKey::action({0}, 0), 1.0);
    E.add(MonomialKey::constant({1}), 1.0);
    const QuadHamiltonian b = poisson_bracket(I, E);
    CHECK(std::abs(b.coeff(MonomialKey::constant({1})) + I1) < 1e-15);

    // {z_n, zbar_n} = i
    QuadHamiltonian z(1, 1, 0, false), zb(1, 1, 0, false);
    z.add(MonomialKey::z({0}, 1), 1.0);
    zb.add(MonomialKey::zbar({0}, 1), 1.0);
    CHECK(std::abs(poisson_bracket(z, zb).coeff(MonomialKey::constant({0})) - I1) < 1e-15);
    CHECK(poisson_bracket(z, z).is_zero());
}

TEST_CASE("gradient matches central differences of evaluate")
{
    const QuadHamiltonian H = random_h(3, 2, 11, false);
    const PhasePoint x = random_point(3, 5);
    const PhaseGradient g = gradient(H, x);
    const double h = 1e-6;
    auto shifted = [&](auto mutate) {
        PhasePoint p = x, m = x;
        mutate(p, h);
        mutate(m, -h);
        return (evaluate(H, p) - evaluate(H, m)) / (2.0 * h);
    };
    CHECK(std::abs(g.theta[0] - shifted([](PhasePoint& p, double t) { p.theta[0] += t; })) < 1e-7);
    CHECK(std::abs(g.action[0] - shifted([](PhasePoint& p, double t) { p.action[0] += t; })) < 1e-7);
    for (int i = 0; i < 7; ++i) {
        CHECK(std::abs(g.z[i] - shifted([i](PhasePoint& p, double t) { p.z[i] += t; })) < 1e-7);
        CHECK(std::abs(g.zbar[i] - shifted([i](PhasePoint& p, double t) { p.zbar[i] += t; })) < 1e-7);
    }
}

TEST_CASE("bracket agrees pointwise with the gradient formula")
{
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const QuadHamiltonian R = random_h(3, 2, s, false), F = random_h(3, 2, s + 50, false);
        const PhasePoint x = random_point(3, s + 7);
        const PhaseGradient gr = gradient(R, x), gf = gradient(F, x);
        const cplx oracle = (gr.theta.transpose() * gf.action)(0) - (gf.theta.transpose() * gr.action)(0)
            + I1 * ((gr.z.transpose() * gf.zbar)(0) - (gf.z.transpose() * gr.zbar)(0));
        CHECK(std::abs(evaluate(poisson_bracket(R, F), x) - oracle) < 1e-11);
    }
}

TEST_CASE("bracket is antisymmetric and satisfies Jacobi")
{
    const QuadHamiltonian A = random_h(3, 1, 1), B = random_h(3, 1, 2), C = random_h(3, 1, 3);
    CHECK(max_abs_diff(poisson_bracket(A, B), cplx(-1.0, 0.0) * poisson_bracket(B, A)) < 1e-13);
    const QuadHamiltonian jac = poisson_bracket(poisson_bracket(A, B), C) + poisson_bracket(poisson_bracket(B, C), A)
        + poisson_bracket(poisson_bracket(C, A), B);
    CHECK(max_coefficient(jac) < 1e-12);
    CHECK(poisson_bracket(A, B).reality_defect() < 1e-13);
}

TEST_CASE("generalized mean keeps actions, diagonal and anti-diagonal averages")
{
    QuadHamiltonian R(1, 3, 1, false);
    R.add(MonomialKey::action({0}, 0), 1.5);
    R.add(MonomialKey::action({1}, 0), 2.0);
    R.add(MonomialKey::zzbar({0}, 2, 2), 0.3);
    R.add(MonomialKey::zzbar({0}, 2, -2), 0.4);
    R.add(MonomialKey::zzbar({0}, 2, 1), 0.5);
    R.add(MonomialKey::zzbar({1}, 2, 2), 0.6);
    R.add(MonomialKey::constant({0}), 0.7);
    const QuadHamiltonian M = generalized_mean(R);
    CHECK(M.coeff(MonomialKey::action({0}, 0)) == cplx(1.5));
    CHECK(M.coeff(MonomialKey::zzbar({0}, 2, 2)) == cplx(0.3));
    CHECK(M.coeff(MonomialKey::zzbar({0}, 2, -2)) == cplx(0.4));
    CHECK(M.coeff(MonomialKey::zzbar({0}, 2, 1)) == cplx(0.0));
    CHECK(M.coeff(MonomialKey::zzbar({1}, 2, 2)) == cplx(0.0));
    CHECK(M.coeff(MonomialKey::action({1}, 0)) == cplx(0.0));
    CHECK(average_constant(R) == cplx(0.7));
}

TEST_CASE("truncation and mode dropping")
{
    const QuadHamiltonian H = random_h(2, 3, 9);
    const QuadHamiltonian T = truncate(H, 1);
    for (const auto& [k, md] : T.modes()) CHECK(l1_norm(k) <= 1);
    CHECK(T.coeff(MonomialKey::zzbar({1}, 1, 2)) == H.coeff(MonomialKey::zzbar({1}, 1, 2)));

    QuadHamiltonian G(1, 1, 2, false);
    G.add(MonomialKey::constant({0}), 1e-30);
    G.add(MonomialKey::z({1}, 0), 1.0);
    G.add(MonomialKey::z({2}, 0), 1e-25);
    const QuadHamiltonian D = drop_small_modes(G, 1.0, 1e-20);
    CHECK(D.find_mode({0}) != nullptr); // k = 0 is always kept
    CHECK(D.find_mode({1}) != nullptr);
    CHECK(D.find_mode({2}) == nullptr);
}

TEST_CASE("reality projection")
{
    QuadHamiltonian H(1, 2, 1, false);
    H.add(MonomialKey::zzbar({1}, 1, 2), cplx(1.0, 2.0));
    CHECK(H.reality_defect() > 0.5);
    H.enforce_reality();
    CHECK(H.reality_defect() < 1e-15);
    PhasePoint x = random_point(2, 3);
    x.zbar = x.z.conjugate();
    CHECK(std::abs(evaluate(H, x).imag()) < 1e-14);
}

TEST_CASE("incompatible keys are rejected")
{
    QuadHamiltonian H(1, 2, 1);
    CHECK_THROWS_AS(H.add(MonomialKey::z({0}, 3), 1.0), ClassError);
    CHECK_THROWS_AS(H.add(MonomialKey::z({0, 0}, 0), 1.0), ClassError);
}

TEST_CASE("serialization round trip")
{
    const QuadHamiltonian H = random_h(3, 2, 21, false);
    std::stringstream ss;
    write_hamiltonian(ss, H);
    const QuadHamiltonian G = read_hamiltonian(ss);
    CHECK(G.lattice_cutoff() == 3);
    CHECK(G.fourier_cutoff() == H.fourier_cutoff());
    CHECK(max_abs_diff(G, H) == 0.0);

    std::stringstream bad("# subkam-hamiltonian v1\nangles 1\nlattice_cutoff 1\nfourier_cutoff 0\nreal 1\nZZBAR 0 0 x 1 0\n");
    CHECK_THROWS_AS(read_hamiltonian(bad), IoError);
}
