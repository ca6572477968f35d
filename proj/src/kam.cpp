#include "subkam/kam.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "subkam/algebra.hpp"
#include "subkam/errors.hpp"
#include "subkam/parallel.hpp"

namespace subkam {

std::string to_string(TauProfile p) { return p == TauProfile::Paper ? "paper" : "desk"; }

TauProfile tau_profile_from_string(const std::string& s)
{
    if (s == "paper") return TauProfile::Paper;
    if (s == "desk") return TauProfile::Desk;
    throw ParameterError("unknown tau profile '" + s + "' (expected paper or desk)");
}

double KamParams::varsigma() const { return (measure_tau1() + 1.0) / (1.0 - alpha); }

double KamParams::tau() const
{
    if (profile == TauProfile::Paper) return 12.0 * tau1 + 16.0 * varsigma();
    return desk_tau;
}

std::vector<std::string> KamParams::violations() const
{
    std::vector<std::string> out;
    auto need = [&](bool ok, const char* msg) {
        if (!ok) out.emplace_back(msg);
    };
    need(d >= 1, "d must be at least 1");
    need(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    need(beta > 0.0, "beta must be positive");
    need(alpha + beta >= 1.0, "alpha + beta >= 1 is required (smoothing hypothesis)");
    need(lambda > 0.0, "lambda must be positive");
    need(gamma > 0.0, "gamma must be positive");
    need(c > 0.0, "schedule constant c must be positive");
    need(max_steps >= 1, "max_steps must be at least 1");
    need(lattice_cutoff >= 1, "lattice cutoff N must be at least 1");
    need(target >= 0.0, "target must be nonnegative");
    need(mode_floor >= 0.0 && mode_floor < 1.0, "mode_floor must lie in [0, 1)");
    need(s > 0.0 && r > 0.0 && rho > 0.0 && p > 0.0, "domain parameters s, r, rho, p must be positive");
    need(lie.order >= 2, "Lie order must be at least 2");
    need(lie.tail_tol > 0.0, "Lie tail tolerance must be positive");
    need(lie.max_order >= lie.order, "Lie max_order must be at least the Lie order");
    if (profile == TauProfile::Paper) {
        const double bound = d + 3.0 + 4.0 / (alpha * alpha);
        if (!(tau1 > bound)) {
            std::ostringstream os;
            os << "tau1 = " << tau1 << " violates tau1 > d + 3 + 4/alpha^2 = " << bound;
            out.push_back(os.str());
        }
    } else {
        need(desk_tau > 0.0, "desk_tau must be positive");
        need(desk_tau1 > 0.0, "desk_tau1 must be positive");
    }
    return out;
}

void KamParams::validate() const
{
    const auto v = violations();
    if (!v.empty()) throw ParameterError(v.front());
}

StepSchedule schedule(int nu, const KamParams& base, double s_nu, double r_nu, double rho_nu, double eps)
{
    if (nu < 0) throw ParameterError("step index must be nonnegative");
    if (!(eps < 1.0)) throw ParameterError("schedule undefined for epsilon >= 1");
    if (eps < 0.0) throw ParameterError("epsilon must be nonnegative");
    StepSchedule sc;
    sc.nu = nu;
    const double scale = std::ldexp(1.0, -(nu + 2));
    sc.sigma = base.s * scale;
    sc.mu = base.rho * scale;
    sc.s_next = s_nu - sc.sigma;
    sc.rho_next = rho_nu - sc.mu;
    sc.eta = std::cbrt(eps);
    sc.r_next = eps > 0.0 ? sc.eta * r_nu / 4.0 : r_nu / 4.0;
    const int N = base.lattice_cutoff;
    if (eps == 0.0) {
        sc.K = N;
    } else {
        const double k = std::ceil(base.c * std::log(1.0 / eps) / sc.mu);
        sc.K = static_cast<int>(std::clamp(k, 1.0, static_cast<double>(N)));
    }
    const double K = sc.K;
    const double tau = base.tau();
    sc.eps_next_predicted = base.c * eps
        * (sc.eta + std::exp(-K * sc.mu)
           + eps * std::pow(K, 4.0 * tau + 2.0) * std::pow(base.gamma, -4.0) * std::pow(sc.mu, -base.p - 2.0)
               * std::pow(sc.sigma, -base.d - 1.0));
    return sc;
}

double KamState::max_eps() const
{
    double e = 0.0;
    for (const auto& s : samples)
        if (s.alive) e = std::max(e, s.eps);
    return e;
}

std::size_t KamState::alive_count() const
{
    std::size_t n = 0;
    for (const auto& s : samples) n += s.alive ? 1 : 0;
    return n;
}

double measure_eps(const QuadHamiltonian& P, const DomainParams& D, double beta)
{
    return gamma_beta_seminorm(P, D, beta).value + vector_field_majorant(P, D);
}

KamState initial_state(const KamParams& params, std::vector<KamSample> samples)
{
    KamState st;
    st.s = params.s;
    st.r = params.r;
    st.rho = params.rho;
    st.samples = std::move(samples);
    const DomainParams D = st.domain(params);
    parallel_for(st.samples.size(), [&](std::size_t i) {
        KamSample& smp = st.samples[i];
        smp.eps = measure_eps(smp.perturbation, D, params.beta);
        if (smp.chain.size() == 0) smp.chain = TransformChain(params.d, params.lattice_cutoff);
    });
    return st;
}

namespace {

std::vector<PhasePoint> probe_points(int d, int N, const DomainParams& D, unsigned seed, int count)
{
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    std::normal_distribution<double> normal;
    std::vector<PhasePoint> pts;
    const Eigen::VectorXd zeta = site_majorants(N, D);
    for (int c = 0; c < count; ++c) {
        PhasePoint x = PhasePoint::zero(d, N);
        for (int j = 0; j < d; ++j) {
            x.theta[j] = angle(gen);
            x.action[j] = 0.1 * D.r * D.r * normal(gen);
        }
        for (int i = 0; i < 2 * N + 1; ++i) {
            const cplx w(normal(gen), normal(gen));
            x.z[i] = 0.1 * zeta[i] * w;
            x.zbar[i] = std::conj(x.z[i]);
        }
        pts.push_back(std::move(x));
    }
    return pts;
}

void exclude(KamSample& smp, int nu, const std::string& family, const KVec& k, int n, int m)
{
    smp.alive = false;
    smp.exclusion = {nu, family, k, n, m};
}

} // namespace

StepResult kam_step(const KamState& state, const KamParams& params)
{
    params.validate();
    StepResult out;
    out.state = state;
    KamState& st = out.state;
    const int nu = state.nu;
    const double eps_state = state.max_eps();
    const StepSchedule sc = schedule(nu, params, state.s, state.r, state.rho, eps_state);
    const DomainParams D = state.domain(params);
    const DomainParams Dn{sc.s_next, sc.r_next, sc.rho_next, params.p, params.d};
    const int K = sc.K;
    const double tau = params.tau();
    const int cut = params.lattice_cutoff;

    out.maps.assign(st.samples.size(), SymplecticMap::identity(params.d, cut));
    out.diagnostics.assign(st.samples.size(), StepDiagnostics{});

    parallel_for(st.samples.size(), [&](std::size_t i) {
        KamSample& smp = st.samples[i];
        StepDiagnostics& dg = out.diagnostics[i];
        const auto t0 = std::chrono::steady_clock::now();
        dg.nu = nu;
        dg.sample = static_cast<int>(i);
        dg.K = K;
        dg.s = state.s;
        dg.r = state.r;
        dg.rho = state.rho;
        dg.eps = smp.eps;
        dg.eps_predicted = sc.eps_next_predicted;
        dg.gate_literal = 0.5 * params.gamma * params.gamma * std::pow(static_cast<double>(K), -8.0 * tau - 1.0);
        if (!smp.alive) return;

        QuadHamiltonian R = truncate(smp.perturbation, K);
        if (params.mode_floor > 0.0) R = drop_small_modes(R, state.s, params.mode_floor);
        const SmallDivisorReport report = small_divisor_report(smp.normal, smp.pairing, K, params.gamma, tau);
        if (const DivisorEntry* f = report.first_failure()) {
            exclude(smp, nu, to_string(f->family), f->k, f->n, f->m);
            return;
        }
        QuadHamiltonian F;
        try {
            F = solve_homological(smp.normal, smp.pairing, R, report);
        } catch (const ResonanceError& e) {
            exclude(smp, nu, e.family, e.k, e.n, e.m);
            return;
        }
        const double r_size = gamma_beta_seminorm(R, D, params.beta).value;
        const double res = homological_residual(smp.normal, smp.pairing, F, R, D, params.beta);
        dg.residual = r_size > 0.0 ? res / r_size : res;
        dg.gate_measured = 2.0 * K * gamma_beta_alpha_seminorm(F, D, params.beta, params.alpha).value;
        if (!(dg.gate_measured < 1.0)) {
            std::ostringstream os;
            os << "smallness gate failed at step " << nu << ": 2 K [[F]] = " << dg.gate_measured
               << " (literal threshold 1/2 gamma^2 K^(-8 tau - 1) = " << dg.gate_literal << ")";
            throw GateError(os.str());
        }

        const QuadHamiltonian mean = generalized_mean(R);
        const cplx c0 = average_constant(R);
        LieOptions lie = params.lie;
        lie.mode_floor = params.mode_floor;
        lie.floor_width = state.s;
        LieTransformResult lt = lie_transform(smp.perturbation, F, R, mean, lie);
        if (smp.perturbation.real()) lt.perturbation.enforce_reality();
        if (params.mode_floor > 0.0) lt.perturbation = drop_small_modes(lt.perturbation, sc.s_next, params.mode_floor);
        dg.lie_tail = lt.tail;
        dg.lie_terms = lt.terms;

        NormalForm nf = smp.normal;
        PairingForm pf = smp.pairing;
        const FourierMode* m0 = mean.find_mode(KVec(params.d, 0));
        if (m0 && m0->action.size()) nf.omega += m0->action.real();
        if (m0 && m0->zzbar.size()) {
            for (int n = -cut; n <= cut; ++n) {
                nf.tilde_omega[n + cut] += m0->zzbar(n + cut, n + cut).real();
                if (n != 0) pf.a[n + cut] += m0->zzbar(n + cut, -n + cut);
            }
            for (int n = 1; n <= cut && smp.perturbation.real(); ++n) {
                const cplx h = 0.5 * (pf.a[n + cut] + std::conj(pf.a[-n + cut]));
                pf.a[n + cut] = h;
                pf.a[-n + cut] = std::conj(h);
            }
        }
        nf.energy += c0.real();
        nf.L = std::max(nf.L + smp.eps, nf.tilde_weight());

        dg.omega_shift = (nf.omega - smp.normal.omega).cwiseAbs().maxCoeff();
        for (int n = -cut; n <= cut; ++n) {
            const double w = std::pow(angle_bracket(n), 2.0 * params.beta);
            dg.Omega_shift = std::max(dg.Omega_shift, w * std::abs(nf.Omega(n) - smp.normal.Omega(n)));
            dg.pairing_size = std::max(dg.pairing_size, std::exp(std::abs(n) * sc.rho_next) * w * std::abs(pf.a[n + cut]));
        }

        const auto pts = probe_points(params.d, cut, Dn, 7919u * static_cast<unsigned>(nu + 1) + static_cast<unsigned>(i), 3);
        dg.symplectic_residual = symplectic_residual(lt.map, pts);

        smp.normal = std::move(nf);
        smp.pairing = std::move(pf);
        smp.perturbation = std::move(lt.perturbation);
        smp.chain.append(lt.map);
        out.maps[i] = std::move(lt.map);
        smp.eps = measure_eps(smp.perturbation, Dn, params.beta);
        dg.eps_next = smp.eps;
        dg.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });

    std::size_t excluded = 0;
    for (const auto& s : st.samples) excluded += s.alive ? 0 : 1;
    for (auto& dg : out.diagnostics) dg.excluded = excluded;
    st.M += eps_state;
    st.L += eps_state;
    st.nu = nu + 1;
    st.s = sc.s_next;
    st.r = sc.r_next;
    st.rho = sc.rho_next;
    if (st.alive_count() == 0) throw EmptySetError("every parameter sample was excluded at step " + std::to_string(nu));
    return out;
}

DriftBounds drift_bounds(const NormalForm& seed, const NormalForm& final_normal, const PairingForm& final_pairing,
                         double rho)
{
    DriftBounds b;
    b.omega = (final_normal.omega - seed.omega).cwiseAbs().maxCoeff();
    const int cut = seed.lattice_cutoff();
    for (int n = -cut; n <= cut; ++n) {
        const double w = std::pow(angle_bracket(n), 2.0 * seed.beta);
        b.Omega = std::max(b.Omega, w * std::abs(final_normal.Omega(n) - seed.Omega(n)));
        b.pairing = std::max(b.pairing, w * std::exp(std::abs(n) * rho) * std::abs(final_pairing.at(n)));
    }
    return b;
}

KamRunResult kam_run(const SeedFactory& seed, const std::vector<Eigen::VectorXd>& samples, const KamParams& params)
{
    params.validate();
    if (samples.empty()) throw EmptySetError("no parameter samples");
    std::vector<KamSample> seeds(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        seeds[i] = seed(samples[i]);
        seeds[i].xi = samples[i];
    });
    KamRunResult res;
    for (const auto& s : seeds) res.seed_normal.push_back(s.normal);
    KamState st = initial_state(params, std::move(seeds));
    res.eps_history.resize(st.samples.size());
    for (std::size_t i = 0; i < st.samples.size(); ++i) res.eps_history[i].push_back(st.samples[i].eps);

    for (int step = 0; step < params.max_steps; ++step) {
        StepResult sr = kam_step(st, params);
        for (std::size_t i = 0; i < st.samples.size(); ++i) {
            const KamSample& before = st.samples[i];
            const KamSample& after = sr.state.samples[i];
            if (!after.alive) continue;
            res.eps_history[i].push_back(after.eps);
            if (before.eps > 0.0 && after.eps >= before.eps) {
                std::ostringstream os;
                os << "measured epsilon did not decrease for sample " << i << " at step " << step << ": " << before.eps
                   << " -> " << after.eps << " (K = " << sr.diagnostics[i].K << ", residual "
                   << sr.diagnostics[i].residual << ", Lie tail " << sr.diagnostics[i].lie_tail << ")";
                throw DivergenceError(os.str());
            }
        }
        res.steps.insert(res.steps.end(), sr.diagnostics.begin(), sr.diagnostics.end());
        st = std::move(sr.state);
        bool done = true;
        for (const auto& s : st.samples)
            if (s.alive && s.eps > params.target) done = false;
        if (done) {
            res.converged = true;
            break;
        }
    }
    for (std::size_t i = 0; i < st.samples.size(); ++i)
        res.drift.push_back(drift_bounds(res.seed_normal[i], st.samples[i].normal, st.samples[i].pairing, params.rho));
    res.final_state = std::move(st);
    return res;
}

bool low_order_flatness(const QuadHamiltonian& P, double tol) { return max_coefficient(P) <= tol; }

std::vector<PhasePoint> sample_phase_points(int angles, int lattice_cutoff, const DomainParams& D, int count,
                                            std::uint64_t seed)
{
    D.validate();
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double twopi = 2.0 * std::acos(-1.0);
    const Eigen::VectorXd maj = site_majorants(lattice_cutoff, D);
    std::vector<PhasePoint> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        PhasePoint x = PhasePoint::zero(angles, lattice_cutoff);
        for (int j = 0; j < angles; ++j) x.theta[j] = twopi * unit(gen);
        for (int j = 0; j < angles; ++j) x.action[j] = D.r * D.r * (2.0 * unit(gen) - 1.0);
        for (int s = 0; s < maj.size(); ++s) {
            const double u = unit(gen);
            x.z[s] = u * maj[s] * std::polar(1.0, twopi * unit(gen));
            x.zbar[s] = std::conj(x.z[s]);
        }
        out.push_back(std::move(x));
    }
    return out;
}

ConjugacyCheck check_conjugacy(const QuadHamiltonian& seed, const QuadHamiltonian& converged,
                               const TransformChain& chain, const std::vector<PhasePoint>& points)
{
    if (!seed.compatible(converged) || seed.lattice_cutoff() != chain.lattice_cutoff())
        throw ParameterError("seed, converged Hamiltonian and chain disagree on angles or lattice cutoff");
    ConjugacyCheck out;
    out.errors.resize(points.size());
    out.symplectic.resize(points.size());
    parallel_for(points.size(), [&](std::size_t i) {
        const PhasePoint y = chain.apply(points[i]);
        out.errors[i] = std::abs(evaluate(seed, y) - evaluate(converged, points[i]));
        out.symplectic[i] = symplectic_defect(chain.jacobian(points[i]), seed.angles(), seed.sites());
    });
    for (std::size_t i = 0; i < points.size(); ++i) {
        out.max_error = std::max(out.max_error, out.errors[i]);
        out.max_symplectic = std::max(out.max_symplectic, out.symplectic[i]);
    }
    return out;
}

void write_step_csv(std::ostream& os, const std::vector<StepDiagnostics>& steps)
{
    os << "nu,sample,eps_measured,eps_next,eps_predicted,residual,excluded,s,r,rho,K,gate_measured,gate_literal,"
          "symplectic_residual,lie_terms,lie_tail,omega_shift,Omega_shift,pairing_size\n";
    os.precision(10);
    for (const auto& d : steps)
        os << d.nu << ',' << d.sample << ',' << d.eps << ',' << d.eps_next << ',' << d.eps_predicted << ','
           << d.residual << ',' << d.excluded << ',' << d.s << ',' << d.r << ',' << d.rho << ',' << d.K << ','
           << d.gate_measured << ',' << d.gate_literal << ',' << d.symplectic_residual << ',' << d.lie_terms << ','
           << d.lie_tail << ',' << d.omega_shift << ',' << d.Omega_shift << ',' << d.pairing_size
           << '\n';
}

} // namespace subkam
