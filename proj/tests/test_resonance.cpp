#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "subkam/errors.hpp"
#include "subkam/homological.hpp"
#include "subkam/resonance.hpp"

using namespace subkam;

namespace {

double dense_inverse_norm(const Eigen::MatrixXcd& M)
{
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    return 1.0 / svd.singularValues().minCoeff();
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

ResonanceLevel level(double gamma, int K)
{
    ResonanceLevel L;
    L.gamma = gamma;
    L.K = K;
    L.tau1 = 1.0;
    L.varsigma = 4.0;
    return L;
}

} // namespace

TEST_CASE("family thresholds")
{
    const ResonanceLevel L = level(0.5, 2);
    CHECK(L.threshold(ResonanceFamily::R0) == doctest::Approx(4.0));
    CHECK(L.threshold(ResonanceFamily::R1) == doctest::Approx(8.0));
    CHECK(L.threshold(ResonanceFamily::R2) == doctest::Approx(32.0));
    CHECK(L.threshold(ResonanceFamily::R11) == doctest::Approx(std::ldexp(1.0, 77)));
    CHECK(L.orbit_cap(100) == 8);
    CHECK(L.orbit_cap(5) == 5);
    CHECK(L.difference_cap(1000) == 512);
    CHECK(resonance_family_from_string("R11") == ResonanceFamily::R11);
}

TEST_CASE("resonance values agree with dense inverses")
{
    const int N = 6;
    NormalForm nf(Eigen::VectorXd::Constant(1, 1.37), 0.5, 1.0, 0.5, N);
    PairingForm A(N);
    A.a[2 + N] = cplx(0.03, 0.01);
    A.a[-2 + N] = std::conj(A.a[2 + N]);
    const Eigen::MatrixXcd I2 = Eigen::MatrixXcd::Identity(2, 2);
    const Eigen::MatrixXcd A2 = block_matrix(nf, A, 2), A3 = block_matrix(nf, A, 3);

    ResonanceQuery q;
    q.level = level(0.1, 3);
    q.k = {2};
    q.family = ResonanceFamily::R0;
    CHECK(resonance_value(q, nf, A) == doctest::Approx(1.0 / 2.74));

    q.family = ResonanceFamily::R1;
    q.n = 2;
    CHECK(resonance_value(q, nf, A) == doctest::Approx(dense_inverse_norm(2.74 * I2 + A2)).epsilon(1e-12));

    q.family = ResonanceFamily::R11;
    q.k = {-1};
    q.m = 3;
    const Eigen::MatrixXcd M = -1.37 * Eigen::MatrixXcd::Identity(4, 4) + kron(A2, I2) - kron(I2, A3.transpose());
    CHECK(resonance_value(q, nf, A) == doctest::Approx(dense_inverse_norm(M)).epsilon(1e-12));

    q.family = ResonanceFamily::R2;
    const Eigen::MatrixXcd S = -1.37 * Eigen::MatrixXcd::Identity(4, 4) + kron(A2, I2) + kron(I2, A3);
    CHECK(resonance_value(q, nf, A) == doctest::Approx(dense_inverse_norm(S)).epsilon(1e-12));

    q.family = ResonanceFamily::R11;
    q.k = {0};
    CHECK_THROWS_AS(resonance_value(q, nf, A), ParameterError);
}

TEST_CASE("determinant gate on a diagonal block")
{
    const int N = 5;
    const NormalForm nf(Eigen::VectorXd::Constant(1, 1.2), 0.5, 1.0, 0.5, N);
    const PairingForm A(N);
    const DeterminantGate g = determinant_gate({1}, 4, 1, nf, A);
    // Diagonal entries 1.2 + Omega_{+-4} - Omega_{+-1} = 2.2 each.
    CHECK(g.det == doctest::Approx(std::pow(2.2, 4)).epsilon(1e-12));
    CHECK(g.norm == doctest::Approx(2.2).epsilon(1e-12));
    CHECK(g.norm_over_K == doctest::Approx(2.2));

    PairingForm B(N);
    B.a[1 + N] = 0.2;
    B.a[-1 + N] = 0.2;
    const Eigen::MatrixXcd M = assemble_block(nf, B, {1}, 4, 1, Component::F11).matrix;
    CHECK(determinant_gate({1}, 4, 1, nf, B).det == doctest::Approx(std::abs(M.fullPivLu().determinant())).epsilon(1e-12));
}

TEST_CASE("Wilson interval")
{
    const Interval a = wilson_interval(5, 10);
    CHECK(a.lo == doctest::Approx(0.236593).epsilon(1e-5));
    CHECK(a.hi == doctest::Approx(0.763407).epsilon(1e-5));
    const Interval b = wilson_interval(0, 10);
    CHECK(b.lo == 0.0);
    CHECK(b.hi == doctest::Approx(0.277533).epsilon(1e-5));
    CHECK_THROWS_AS(wilson_interval(0, 0), EmptySetError);
}

TEST_CASE("R0 Monte Carlo fraction matches the exact measure")
{
    const FrequencyModel model = identity_model(0.5, 1.0, 0.5, 8);
    MeasureOptions mo;
    mo.families = FamilyMask::only(ResonanceFamily::R0);
    mo.lattice_cutoff = 8;
    for (double gamma : {0.2, 0.1, 0.05}) {
        ParamSet O = ParamSet::halton(Eigen::VectorXd::Constant(1, -0.5), Eigen::VectorXd::Constant(1, 0.5), 4000, 3);
        const ResonanceLevel L = level(gamma, 8);
        const ExcludedMeasure em = excluded_measure(O, L, model, mo);
        const double exact = exact_excluded_fraction_1d(-0.5, 0.5, L, 0.5, 1.0, 8, mo.families);
        // The union of |xi| <= gamma / (8 |k|) is the k = 1 interval of length gamma / 4.
        CHECK(exact == doctest::Approx(gamma / 4.0).epsilon(1e-12));
        CHECK(em.ci.lo <= exact);
        CHECK(exact <= em.ci.hi);
    }
}

TEST_CASE("exclusions are nested in gamma and never revived")
{
    const FrequencyModel model = identity_model(0.5, 1.0, 0.5, 16);
    MeasureOptions mo;
    mo.lattice_cutoff = 16;
    mo.cross_check_fraction = 0.05;
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(1, 1.0), hi = Eigen::VectorXd::Constant(1, 2.0);
    ParamSet big = ParamSet::halton(lo, hi, 2000, 7), small = ParamSet::halton(lo, hi, 2000, 7);
    const ExcludedMeasure a = excluded_measure(big, level(0.1, 4), model, mo);
    const ExcludedMeasure b = excluded_measure(small, level(0.05, 4), model, mo);
    CHECK(b.excluded <= a.excluded);
    for (std::size_t i = 0; i < big.size(); ++i)
        if (!small.alive[i]) CHECK_FALSE(big.alive[i]);
    CHECK(a.cross_check_mismatch == 0);
    CHECK(b.cross_check_mismatch == 0);

    const std::size_t before = big.alive_count();
    excluded_measure(big, level(0.1, 6), model, mo);
    CHECK(big.alive_count() <= before);
}

TEST_CASE("alpha gap examples and scan")
{
    CHECK(alpha_gap(4, 1, 0.5) == doctest::Approx(1.0));
    CHECK(alpha_gap(1000001, 1000000, 0.5) == doctest::Approx(5e-4).epsilon(1e-3));
    CHECK_THROWS_AS(alpha_gap(3, -3, 0.5), ParameterError);
    CHECK_THROWS_AS(alpha_gap(10, 1, 0.5, 2), ParameterError);
    for (double a : {0.3, 0.5, 0.9}) {
        const GapScan s = alpha_gap_scan(300, a);
        CHECK(s.pairs == 300LL * 299LL);
        CHECK(s.violations == 0);
        CHECK(s.worst_ratio >= 1.0);
    }
}

TEST_CASE("sublevel measures")
{
    CHECK(sublevel_measure([](double x) { return x; }, -1.0, 1.0, 0.1) == doctest::Approx(0.1).epsilon(1e-4));
    CHECK(sublevel_measure([](double x) { return x * x; }, -1.0, 1.0, 0.01) == doctest::Approx(0.1).epsilon(1e-4));
    CHECK(sublevel_bound(2.0, 1.0, 0, 1e-3) == doctest::Approx(2.0 * 2.0 * (5.0 + 2.0) * 0.1).epsilon(1e-12));

    std::mt19937_64 g(5);
    std::uniform_int_distribution<int> kd(1, 8), nd(0, 30);
    std::uniform_real_distribution<double> qd(-0.05, 0.05);
    for (int trial = 0; trial < 20; ++trial) {
        const int k = kd(g), n = nd(g), m = nd(g);
        const double q = qd(g);
        const double c = std::sqrt(n) - std::sqrt(m);
        auto fn = [=](double x) { return k * x + q * x * x + c - 3.0 * k; };
        const double B = k - 4.0 * std::abs(q);
        const double A = std::max(k + 4.0 * std::abs(q), 2.0 * std::abs(q));
        const double h = 1e-3;
        CHECK(sublevel_measure(fn, 1.0, 2.0, h, 20000) <= sublevel_bound(A, B, 0, h));
    }
}

TEST_CASE("small divisor report certifies distant orbit pairs by the gap bound")
{
    const int N = 64;
    const NormalForm nf(Eigen::VectorXd::Constant(1, 2.7), 0.5, 1.0, 0.5, N);
    const SmallDivisorReport rep = small_divisor_report(nf, PairingForm(N), 2, 0.5, 1.0);
    CHECK(rep.auto_passed > 0);
}
