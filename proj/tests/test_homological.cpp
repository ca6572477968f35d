#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "subkam/errors.hpp"
#include "subkam/homological.hpp"
#include "subkam/normal_form.hpp"
#include "subkam/spaces.hpp"

using namespace subkam;

namespace {

const cplx I1(0.0, 1.0);

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

PairingForm small_pairing(int N, int K)
{
    PairingForm A(N);
    for (int n = 1; n <= std::min(N, K); ++n) {
        const cplx v(0.01 / n, 0.004 * n);
        A.a[n + N] = v;
        A.a[-n + N] = std::conj(v);
    }
    return A;
}

} // namespace

TEST_CASE("scalar block: F_k = -i R_k / <k, omega>")
{
    const NormalForm nf(Eigen::VectorXd::Constant(1, 2.7), 0.5, 1.0, 0.5, 4);
    const PairingForm A(4);
    QuadHamiltonian R(1, 4, 3, false);
    R.add(MonomialKey::constant({3}), cplx(0.2, -0.1));
    R.add(MonomialKey::constant({-2}), 0.5);
    const SmallDivisorReport rep = small_divisor_report(nf, A, 3, 0.1, 1.0);
    const QuadHamiltonian F = solve_homological(nf, A, R, rep);
    CHECK(std::abs(F.coeff(MonomialKey::constant({3})) - (-I1 * cplx(0.2, -0.1) / 8.1)) < 1e-15);
    CHECK(std::abs(F.coeff(MonomialKey::constant({-2})) - (-I1 * 0.5 / -5.4)) < 1e-15);
}

TEST_CASE("averaged off-diagonal entry: F = -i R / (Omega_n - Omega_m)")
{
    const int N = 6;
    const NormalForm nf(Eigen::VectorXd::Constant(1, 2.7), 0.5, 1.0, 0.5, N);
    const PairingForm A(N);
    QuadHamiltonian R(1, N, 0, false);
    R.add(MonomialKey::zzbar({0}, 4, 1), cplx(0.3, 0.2));
    const SmallDivisorReport rep = small_divisor_report(nf, A, 1, 0.1, 1.0);
    const QuadHamiltonian F = solve_homological(nf, A, R, rep);
    const double gap = (2.0 + 1.0) - (1.0 + 1.0);
    CHECK(std::abs(F.coeff(MonomialKey::zzbar({0}, 4, 1)) - (-I1 * cplx(0.3, 0.2) / gap)) < 1e-15);
    // Diagonal and anti-diagonal entries belong to the mean and are left alone.
    QuadHamiltonian M(1, N, 0, false);
    M.add(MonomialKey::zzbar({0}, 3, -3), 0.4);
    M.add(MonomialKey::zzbar({0}, 2, 2), 0.4);
    CHECK(solve_homological(nf, A, M, rep).is_zero());
}

TEST_CASE("difference block matches the Kronecker form")
{
    const int N = 5;
    NormalForm nf(Eigen::VectorXd::Constant(1, 2.7), 0.5, 1.0, 0.5, N);
    nf.tilde_omega[2 + N] = 0.01;
    const PairingForm A = small_pairing(N, 3);
    const BlockSystem b = assemble_block(nf, A, {1}, 2, 3, Component::F11);
    REQUIRE(b.dim == 4);
    const Eigen::MatrixXcd I2 = Eigen::MatrixXcd::Identity(2, 2);
    const Eigen::MatrixXcd An = block_matrix(nf, A, 2), Am = block_matrix(nf, A, 3);
    const Eigen::MatrixXcd oracle =
        2.7 * Eigen::MatrixXcd::Identity(4, 4) + kron(An, I2) - kron(I2, Am.transpose());
    CHECK((b.matrix - oracle).norm() < 1e-15);

    const BlockSystem s = assemble_block(nf, A, {-1}, 2, 1, Component::F20);
    const Eigen::MatrixXcd sum_oracle = -2.7 * Eigen::MatrixXcd::Identity(4, 4) + kron(An, I2)
        + kron(I2, block_matrix(nf, A, 1));
    CHECK((s.matrix - sum_oracle).norm() < 1e-15);

    const Eigen::MatrixXcd inv = block_inverse(b.matrix);
    CHECK((inv * b.matrix - Eigen::MatrixXcd::Identity(4, 4)).norm() < 1e-13);
    CHECK(inverse_norm(b.matrix) == doctest::Approx(b.matrix.inverse().operatorNorm()).epsilon(1e-12));
}

TEST_CASE("random right-hand sides are solved to round-off")
{
    const int N = 12, K = 4;
    const DomainParams D{1.0, 1.0, 0.5, 1.0, 1};
    const NormalForm nf(Eigen::VectorXd::Constant(1, 2.7), 0.5, 1.0, 0.5, N);
    const PairingForm A = small_pairing(N, K);
    const SmallDivisorReport rep = small_divisor_report(nf, A, K, 0.02, 1.0);
    REQUIRE(rep.all_pass());
    RandomSeedOptions so;
    so.K = K;
    so.domain = D;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const QuadHamiltonian R = random_decaying_perturbation(1, N, so, seed);
        const QuadHamiltonian F = solve_homological(nf, A, R, rep);
        const double res = homological_residual(nf, A, F, R, D, 0.5);
        CHECK(res <= 1e-10 * gamma_beta_seminorm(R, D, 0.5).value);
        CHECK(F.reality_defect() < 1e-14);
        CHECK(F.coeff(MonomialKey::zzbar({0}, 2, 2)) == cplx(0.0));
    }
}

TEST_CASE("a resonant block touched by the right-hand side raises ResonanceError")
{
    // omega = 1 and Omega_4 - Omega_1 = 1, so <k, omega> + Omega_1 - Omega_4 vanishes for k = 1.
    const int N = 6;
    const NormalForm nf(Eigen::VectorXd::Constant(1, 1.0), 0.5, 1.0, 0.5, N);
    const PairingForm A(N);
    const SmallDivisorReport rep = small_divisor_report(nf, A, 4, 0.1, 1.0);
    CHECK_FALSE(rep.all_pass());
    const DivisorEntry* f = rep.first_failure();
    REQUIRE(f != nullptr);
    QuadHamiltonian R(1, N, 1, false);
    R.add(MonomialKey::zzbar({1}, 1, 4), 0.1);
    R.add(MonomialKey::zzbar({-1}, 4, 1), 0.1);
    CHECK_THROWS_AS(solve_homological(nf, A, R, rep), ResonanceError);

    // Blocks away from the resonance still solve.
    QuadHamiltonian Q(1, N, 1, false);
    Q.add(MonomialKey::zzbar({1}, 2, 2), 0.1);
    CHECK_NOTHROW(solve_homological(nf, A, Q, rep));
}
