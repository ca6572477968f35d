#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "subkam/algebra.hpp"
#include "subkam/homological.hpp"
#include "subkam/kam.hpp"
#include "subkam/lie.hpp"
#include "subkam/normal_form.hpp"

using namespace subkam;

namespace {

const cplx I1(0.0, 1.0);

QuadHamiltonian small_random(int N, int K, double scale, std::uint64_t seed)
{
    RandomSeedOptions so;
    so.K = K;
    so.scale = scale;
    so.domain = {1.0, 1.0, 0.5, 1.0, 1};
    return random_decaying_perturbation(1, N, so, seed);
}

} // namespace

TEST_CASE("flow of lambda |z_n|^2 rotates z_n by e^{i lambda}")
{
    const double lambda = 0.37;
    QuadHamiltonian F(1, 2, 0);
    F.add(MonomialKey::zzbar({0}, 1, 1), lambda);
    const SymplecticMap phi = lie_map(F);
    PhasePoint x = PhasePoint::zero(1, 2);
    x.theta[0] = 0.2;
    x.z << 0.1, 0.2, cplx(0.3, 0.1), 0.4, 0.5;
    x.zbar = x.z.conjugate();
    const PhasePoint y = phi.apply(x);
    CHECK(std::abs(y.z[3] - std::polar(1.0, lambda) * x.z[3]) < 1e-14);
    CHECK(std::abs(y.zbar[3] - std::polar(1.0, -lambda) * x.zbar[3]) < 1e-14);
    CHECK(std::abs(y.z[1] - x.z[1]) < 1e-15);
    CHECK(y.theta[0] == x.theta[0]);
}

TEST_CASE("flow of an angle function shifts the action by minus its gradient")
{
    QuadHamiltonian F(1, 1, 1);
    F.add(MonomialKey::constant({1}), 1.0);
    F.add(MonomialKey::constant({-1}), 1.0); // F = 2 cos theta
    const SymplecticMap phi = lie_map(F);
    PhasePoint x = PhasePoint::zero(1, 1);
    x.theta[0] = 0.9;
    x.action[0] = 0.25;
    const PhasePoint y = phi.apply(x);
    CHECK(std::abs(y.action[0] - (0.25 + 2.0 * std::sin(0.9))) < 1e-14);
}

TEST_CASE("Lie series and time-one map agree on random data")
{
    for (std::uint64_t s = 1; s <= 4; ++s) {
        const QuadHamiltonian H = small_random(3, 2, 1.0, s);
        const QuadHamiltonian F = small_random(3, 2, 0.05, s + 40);
        const auto series = lie_series(H, F);
        const SymplecticMap phi = lie_map(F);
        for (const PhasePoint& x : sample_phase_points(1, 3, {1.0, 0.5, 0.5, 1.0, 1}, 5, s)) {
            const cplx a = evaluate(series.value, x);
            const cplx b = evaluate(H, phi.apply(x));
            CHECK(std::abs(a - b) < 1e-12);
        }
        CHECK(series.tail <= 1e-14);
    }
}

TEST_CASE("time-one maps are symplectic")
{
    const QuadHamiltonian F = small_random(4, 2, 0.1, 77);
    const SymplecticMap phi = lie_map(F);
    const auto pts = sample_phase_points(1, 4, {1.0, 1.0, 0.5, 1.0, 1}, 6, 3);
    CHECK(symplectic_residual(phi, pts) < 1e-12);
    TransformChain chain(1, 4);
    chain.append(phi);
    chain.append(lie_map(small_random(4, 1, 0.1, 78)));
    CHECK(chain.symplectic_residual(pts) < 1e-12);
}

TEST_CASE("lie_transform reproduces the conjugated Hamiltonian")
{
    const int N = 6, K = 3;
    NormalForm nf(Eigen::VectorXd::Constant(1, 2.7), 0.5, 1.0, 0.5, N);
    const PairingForm A(N);
    const QuadHamiltonian P = small_random(N, 4, 1e-3, 5);
    const QuadHamiltonian R = truncate(P, K);
    const SmallDivisorReport rep = small_divisor_report(nf, A, K, 0.5, 4.0);
    const QuadHamiltonian F = solve_homological(nf, A, R, rep);
    const QuadHamiltonian mean = generalized_mean(R);
    const LieTransformResult tr = lie_transform(P, F, R, mean);
    const QuadHamiltonian H0 = to_hamiltonian(nf, A, 0) + P;
    QuadHamiltonian H1 = to_hamiltonian(nf, A, 0) + mean + tr.perturbation;
    H1.add(MonomialKey::constant({0}), average_constant(R));
    for (const PhasePoint& x : sample_phase_points(1, N, {1.0, 1.0, 1.0, 1.0, 1}, 8, 9)) {
        const cplx lhs = evaluate(H0, tr.map.apply(x));
        CHECK(std::abs(lhs - evaluate(H1, x)) < 1e-13);
    }
    // The new perturbation is quadratically small.
    CHECK(max_coefficient(tr.perturbation - (P - R)) < 1e-4);
}

TEST_CASE("zero generator gives the identity")
{
    const QuadHamiltonian F(1, 3, 0);
    const SymplecticMap phi = lie_map(F);
    const PhasePoint x = sample_phase_points(1, 3, {1.0, 1.0, 1.0, 1.0, 1}, 1, 2).front();
    const PhasePoint y = phi.apply(x);
    CHECK((y.z - x.z).norm() == 0.0);
    CHECK((y.action - x.action).norm() == 0.0);
}
