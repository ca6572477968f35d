// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "subkam/commands.hpp"
#include "subkam/homological.hpp"
#include "subkam/kam.hpp"
#include "subkam/nls.hpp"
#include "subkam/resonance.hpp"

using namespace subkam;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail)
{
    std::printf("%s criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...)
{
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double bracket(int n) { return n == 0 ? 0.5 : std::abs(n); }

// Shared setup for criteria 1 and 2.
struct HomologicalCase {
    NormalForm nf;
    PairingForm A;
    SmallDivisorReport report;
    DomainParams D{1.0, 1.0, 1.0, 1.0, 1};
    double gamma = 0.5;
    double tau = 4.0;
    int K = 8;
};

HomologicalCase homological_case()
{
    const int N = 32;
    HomologicalCase c;
    c.nf = NormalForm(Eigen::VectorXd::Constant(1, 2.7), 0.5, 1.0, 0.5, N);
    c.A = PairingForm(N);
    for (int n = 1; n <= c.K; ++n) {
        const cplx v(1e-3 * std::exp(-n), 5e-4 * std::exp(-n));
        c.A.a[n + N] = v;
        c.A.a[-n + N] = std::conj(v);
    }
    c.report = small_divisor_report(c.nf, c.A, c.K, c.gamma, c.tau);
    return c;
}

void criteria_1_and_2()
{
    const HomologicalCase hc = homological_case();
    RandomSeedOptions so;
    so.K = hc.K;
    so.domain = hc.D;
    so.beta = 0.5;
    const auto t0 = Clock::now();
    double worst_ratio = 0.0, worst_c = 0.0;
    bool solved = hc.report.all_pass();
    std::vector<QuadHamiltonian> Rs, Fs;
    std::vector<double> sizes;
    for (std::uint64_t seed = 1; seed <= 50 && solved; ++seed) {
        const QuadHamiltonian R = random_decaying_perturbation(1, 32, so, seed);
        const QuadHamiltonian F = solve_homological(hc.nf, hc.A, R, hc.report);
        const double size = gamma_beta_seminorm(R, hc.D, 0.5).value;
        const double res = homological_residual(hc.nf, hc.A, F, R, hc.D, 0.5);
        worst_ratio = std::max(worst_ratio, res / size);
        Rs.push_back(R);
        Fs.push_back(F);
        sizes.push_back(size);
    }
    const double elapsed = seconds_since(t0);
    report(1, "homological exactness", solved && worst_ratio <= 1e-10 && elapsed < 10.0,
           fmt("50 seeds, max residual/seminorm(R) = %.3e (<= 1e-10), %.2f s (< 10 s)", worst_ratio, elapsed));

    // Measured constant of the z zbar bounds, relative to seminorm(R).
    const double alpha = hc.nf.alpha, beta = 0.5;
    const double kfac = std::pow(hc.gamma, 2.0) * std::pow(static_cast<double>(hc.K), -8.0 * hc.tau);
    bool gap_exact = true;
    for (std::size_t i = 0; i < Fs.size(); ++i) {
        double c = 0.0;
        Fs[i].for_each_term([&](const MonomialKey& key, cplx v) {
            if (key.kind != MonomialKind::ZZBar) return;
            const double w = std::exp(-l1_norm(key.k) * hc.D.s) * std::exp(-std::abs(key.n - key.m) * hc.D.rho)
                * std::pow(bracket(key.n) * bracket(key.m), -beta);
            if (is_zero(key.k)) {
                if (std::abs(key.n) == std::abs(key.m)) {
                    if (v != cplx(0.0)) gap_exact = false; // the mean is never divided
                    return;
                }
                const double gap = std::abs(std::pow(std::abs(key.n), alpha) - std::pow(std::abs(key.m), alpha));
                c = std::max(c, std::abs(v) * gap / w);
            } else {
                c = std::max(c, std::abs(v) * kfac / w);
            }
        });
        worst_c = std::max(worst_c, c / sizes[i]);
    }
    report(2, "coefficient decay", gap_exact && worst_c <= 10.0 && !Fs.empty(),
           fmt("max measured C / seminorm(R) = %.3f (<= 10); k = 0 entries divided by the sublinear gap", worst_c));
}

KamParams nls_params()
{
    KamParams p;
    p.lattice_cutoff = 32;
    p.max_steps = 4;
    p.gamma = 0.5;
    p.profile = TauProfile::Desk;
    p.desk_tau = 4.0;
    p.desk_tau1 = 1.0;
    return p;
}

const Eigen::VectorXd omega0 = Eigen::VectorXd::Constant(1, 2.7);

void criteria_3_to_6()
{
    const KamParams p = nls_params();
    const auto t0 = Clock::now();
    const PotentialSpec spec = cos_potential(1e-5);
    const NlsReduction red = reduce_nls(spec, {omega0}, p);
    const double elapsed = seconds_since(t0);
    const KamSample& s = red.run.final_state.samples.front();
    const auto& eps = red.run.eps_history.front();

    bool decreasing = eps.size() == 5;
    for (std::size_t j = 1; j < eps.size(); ++j) decreasing = decreasing && eps[j] < eps[j - 1];
    double worst_ln = std::numeric_limits<double>::infinity();
    std::string ln;
    for (std::size_t nu = 1; nu + 1 < eps.size(); ++nu) {
        const double r = std::log(eps[nu + 1]) / std::log(eps[nu]);
        worst_ln = std::min(worst_ln, r);
        ln += fmt("%s%.3f", ln.empty() ? "" : ", ", r);
    }
    report(3, "super-linear contraction", decreasing && worst_ln >= 1.2 && elapsed < 120.0,
           fmt("eps = %.2e -> %.2e over %zu steps, ln ratios (nu >= 1) [%s] (>= 1.2), %.1f s (< 120 s)", eps.front(),
               eps.back(), eps.size() - 1, ln.c_str(), elapsed));

    const auto [seed_normal, seed_P] = build_nls(spec, omega0, p.lattice_cutoff);
    const QuadHamiltonian H0 = to_hamiltonian(seed_normal, PairingForm(p.lattice_cutoff)) + seed_P;
    const QuadHamiltonian Hc = to_hamiltonian(s.normal, s.pairing) + s.perturbation;
    const auto pts = sample_phase_points(1, p.lattice_cutoff, p.domain(), 20, 2024);
    const ConjugacyCheck cc = check_conjugacy(H0, Hc, s.chain, pts);
    const double bound = 10.0 * (p.lie.tail_tol + s.eps * s.eps);
    report(4, "conjugacy and symplecticity", cc.max_error <= bound && cc.max_symplectic <= 1e-8,
           fmt("20 points: max |H0 o Psi - H| = %.3e (<= %.1e), symplectic residual %.3e (<= 1e-8)", cc.max_error, bound,
               cc.max_symplectic));

    const ReducedOperator& op = red.operators.front();
    ReducibilityOptions ro;
    ro.horizon = 100.0;
    ro.dt = 0.02;
    ReducibilityOptions half = ro;
    half.dt = ro.dt / 2.0;
    const ReducibilityMetrics m1 = verify_reducibility(seed_normal, seed_P, op, s.chain, ro);
    const ReducibilityMetrics m2 = verify_reducibility(seed_normal, seed_P, op, s.chain, half);
    const double halving = m1.max_distance / m2.max_distance;
    const double scale = (s.eps + std::pow(ro.dt, 4.0)) * ro.horizon;
    const double C5 = m1.max_distance / scale;
    const double structure = 10.0 * s.eps;
    const bool ok5 = C5 <= 10.0 && std::abs(halving - 16.0) <= 0.3 * 16.0 && op.hermitian_defect() <= structure
        && op.support_defect() <= structure && m1.reduced_norm_drift <= 1e-10;
    report(5, "reducibility dynamics", ok5,
           fmt("T = 100: distance %.3e = %.3f (eps_final + dt^4) T (C <= 10), dt-halving ratio %.3f (16 +- 30%%), "
               "hermitian %.1e, support %.1e (<= 10 eps_final = %.1e), reduced norm drift %.1e (<= 1e-10)",
               m1.max_distance, C5, halving, op.hermitian_defect(), op.support_defect(), structure,
               m1.reduced_norm_drift));

    // Drift constants at two forcing amplitudes.
    const DriftBounds d1 = red.run.drift.front();
    const NlsReduction red6 = reduce_nls(cos_potential(1e-6), {omega0}, p);
    const DriftBounds d2 = red6.run.drift.front();
    auto worst = [](const DriftBounds& d) { return std::max({d.omega, d.Omega, d.pairing}); };
    const double c1 = worst(d1) / 1e-5, c2 = worst(d2) / 1e-6;
    const double stability = std::max(c1, c2) / std::min(c1, c2);
    report(6, "frequency drift", std::isfinite(stability) && stability <= 3.0,
           fmt("C(1e-5) = %.4f [omega %.1e, Omega %.2e, pairing %.2e], C(1e-6) = %.4f [omega %.1e, Omega %.2e, "
               "pairing %.2e], ratio %.3f (<= 3)",
               c1, d1.omega, d1.Omega, d1.pairing, c2, d2.omega, d2.Omega, d2.pairing, stability));
}

void criterion_7()
{
    const auto t0 = Clock::now();
    const int N = 32, K = 8;
    const FrequencyModel model = identity_model(0.5, 1.0, 0.5, N);
    MeasureOptions mo;
    mo.lattice_cutoff = N;
    bool ok = true;
    std::string detail;
    std::vector<double> gammas{0.2, 0.1, 0.05}, fractions;
    for (double gamma : gammas) {
        ResonanceLevel L;
        L.gamma = gamma;
        L.K = K;
        L.tau1 = 1.0;
        L.varsigma = (1.0 + 1.0) / (1.0 - 0.5);
        ParamSet O = ParamSet::halton(Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 2.0), 10000, 1);
        const ExcludedMeasure em = excluded_measure(O, L, model, mo);
        fractions.push_back(em.fraction);
        const bool below = em.fraction <= std::pow(gamma, 0.25) && em.cross_check_mismatch == 0;

        MeasureOptions r0 = mo;
        r0.families = FamilyMask::only(ResonanceFamily::R0);
        ParamSet Z = ParamSet::halton(Eigen::VectorXd::Constant(1, -0.5), Eigen::VectorXd::Constant(1, 0.5), 10000, 1);
        const ExcludedMeasure mc = excluded_measure(Z, L, model, r0);
        const double exact = exact_excluded_fraction_1d(-0.5, 0.5, L, 0.5, 1.0, N, r0.families);
        const bool within = mc.ci.lo <= exact && exact <= mc.ci.hi;
        ok = ok && below && within;
        detail += fmt("gamma %.2f: fraction %.4f (<= %.3f), R0 MC %.4f [%.4f, %.4f] vs exact %.4f; ", gamma, em.fraction,
                      std::pow(gamma, 0.25), mc.fraction, mc.ci.lo, mc.ci.hi, exact);
    }
    const double elapsed = seconds_since(t0);
    detail += fmt("slope %.3f, %.1f s (< 60 s)", loglog_slope(gammas, fractions), elapsed);
    report(7, "measure scaling", ok && elapsed < 60.0, detail);
}

void criterion_8()
{
    bool ok = true;
    std::string detail;
    for (double a : {0.3, 0.5, 0.9}) {
        const GapScan s = alpha_gap_scan(10000, a);
        ok = ok && s.violations == 0;
        detail += fmt("alpha %.1f: %lld pairs, %lld violations, min gap/bound %.4f; ", a, s.pairs, s.violations,
                      s.worst_ratio);
    }

    // g(x) = k x +- (Omega_n(x) - Omega_m(x)) with Omega_n(x) = |n|^alpha + 1 + e sin(x + n) / <n>:
    // g' >= |k| - 2e =: B and every derivative up to order 3 is at most |k| + 2e =: A.
    std::mt19937_64 gen(8);
    std::uniform_int_distribution<int> kd(-8, 8), nd(-32, 32), sd(0, 1);
    std::uniform_real_distribution<double> ed(0.0, 0.2), hd(-4.0, -2.0);
    int held = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        int k = 0;
        while (k == 0) k = kd(gen);
        const int n = nd(gen), m = nd(gen);
        const double sign = sd(gen) ? 1.0 : -1.0, e = ed(gen), h = std::pow(10.0, hd(gen));
        auto Om = [e](int j, double x) { return std::sqrt(std::abs(j)) + 1.0 + e * std::sin(x + j) / bracket(j); };
        const std::function<double(double)> g = [=](double x) { return k * x + sign * (Om(n, x) - Om(m, x)); };
        const double B = std::abs(k) - 2.0 * e, A = std::abs(k) + 2.0 * e;
        const double measured = sublevel_measure(g, 1.0, 2.0, h, 200000);
        const double bound = sublevel_bound(A, B, 0, h);
        worst = std::max(worst, measured / bound);
        held += measured <= bound ? 1 : 0;
    }
    ok = ok && held == 100;
    detail += fmt("sublevel bound held on %d/100 divisor functions (max measured/bound %.4f)", held, worst);
    report(8, "gap and sublevel lemmas", ok, detail);
}

void criterion_9()
{
    KamParams base;
    base.alpha = 0.5;
    const std::vector<int> cutoffs{16, 32, 64, 128};
    const std::vector<double> betas{0.25, 0.5, 0.75};
    const auto pts = degradation_sweep(base, cutoffs, betas, 8, 5, 1);
    bool ok = true;
    std::string detail;
    for (double beta : betas) {
        std::vector<double> x, y, ya;
        for (const auto& p : pts)
            if (p.beta == beta) {
                x.push_back(p.N);
                y.push_back(p.gamma_beta);
                ya.push_back(p.gamma_beta_alpha);
            }
        const double e = loglog_slope(x, y), ea = loglog_slope(x, ya);
        const double spread = *std::max_element(y.begin(), y.end()) / *std::min_element(y.begin(), y.end()) - 1.0;
        if (base.alpha + beta < 1.0) {
            const double witness = (1.0 - base.alpha - beta) / 2.0;
            ok = ok && e >= witness;
            detail += fmt("beta %.2f: exponent %.3f (>= %.3f); ", beta, e, witness);
        } else {
            ok = ok && spread <= 0.10;
            detail += fmt("beta %.2f: spread %.1f%% (<= 10%%), exponent %.3f; ", beta, 100.0 * spread, e);
        }
        detail += fmt("[Gamma^{beta,alpha} exponent %.3f] ", ea);
    }
    report(9, "degradation witness", ok, detail);
}

} // namespace

int main()
{
    try {
        criteria_1_and_2();
        criteria_3_to_6();
        criterion_7();
        criterion_8();
        criterion_9();
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
