#include "subkam/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <json.hpp>

#include "subkam/algebra.hpp"
#include "subkam/homological.hpp"
#include "subkam/nls.hpp"
#include "subkam/parallel.hpp"
#include "subkam/resonance.hpp"
#include "subkam/serialization.hpp"

namespace subkam {

using nlohmann::json;
namespace fs = std::filesystem;

ErrorClass classify(const std::exception& e)
{
    if (dynamic_cast<const IoError*>(&e)) return {ExitCode::Io, "io"};
    if (dynamic_cast<const DivergenceError*>(&e)) return {ExitCode::Divergence, "divergence"};
    if (dynamic_cast<const EmptySetError*>(&e)) return {ExitCode::EmptySet, "empty_parameter_set"};
    if (dynamic_cast<const GateError*>(&e)) return {ExitCode::Gate, "gate"};
    if (dynamic_cast<const ResonanceError*>(&e)) return {ExitCode::Resonance, "resonance"};
    if (dynamic_cast<const StepSizeError*>(&e)) return {ExitCode::StepSize, "step_size"};
    if (dynamic_cast<const ParameterError*>(&e) || dynamic_cast<const ClassError*>(&e))
        return {ExitCode::Config, "config"};
    return {ExitCode::Internal, "internal"};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
        ++n;
    }
    const double den = n * sxx - sx * sx;
    if (n < 2 || den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / den;
}

std::vector<DegradationPoint> degradation_sweep(const KamParams& base, const std::vector<int>& cutoffs,
                                                const std::vector<double>& betas, int K, int seeds, std::uint64_t seed)
{
    if (seeds < 1) throw ParameterError("degradation sweep needs at least one seed");
    std::vector<DegradationPoint> out;
    for (double beta : betas) {
        for (int N : cutoffs) {
            DegradationPoint pt;
            pt.beta = beta;
            pt.N = N;
            DomainParams D = base.domain();
            const NormalForm nf(Eigen::VectorXd::Constant(base.d, 1.0), base.alpha, base.lambda, beta, N);
            const PairingForm A(N);
            const SmallDivisorReport report = small_divisor_report(nf, A, K, base.gamma, base.tau());
            std::vector<double> gb(seeds), gba(seeds);
            parallel_for(static_cast<std::size_t>(seeds), [&](std::size_t j) {
                RandomSeedOptions so;
                so.K = 0;
                so.beta = beta;
                so.domain = D;
                so.zzbar_only = true;
                so.averaged_only = true;
                const QuadHamiltonian R = random_decaying_perturbation(base.d, N, so, seed + 1000003ULL * j);
                const QuadHamiltonian F = solve_homological(nf, A, R, report);
                const double r = gamma_beta_seminorm(R, D, beta).value;
                gb[j] = gamma_beta_seminorm(F, D, beta).value / r;
                gba[j] = gamma_beta_alpha_seminorm(F, D, beta, base.alpha).value / r;
            });
            for (int j = 0; j < seeds; ++j) {
                pt.gamma_beta += gb[j] / seeds;
                pt.gamma_beta_alpha += gba[j] / seeds;
            }
            out.push_back(pt);
        }
    }
    return out;
}

namespace {

struct Writer {
    fs::path dir;

    std::ofstream open(const std::string& name) const
    {
        std::ofstream os(dir / name);
        if (!os) throw IoError("cannot write " + (dir / name).string());
        os << std::setprecision(12);
        return os;
    }

    void json_file(const std::string& name, const json& j) const
    {
        std::ofstream os = open(name);
        os << j.dump(2) << '\n';
        if (!os) throw IoError("failed writing " + (dir / name).string());
    }
};

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd to_vector(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

PotentialSpec problem_potential(const RunConfig& cfg)
{
    const ProblemConfig& pr = cfg.problem;
    PotentialSpec spec = pr.potential.empty() ? cos_potential(pr.eps, pr.beta, pr.lambda) : load_potential(cfg.resolve(pr.potential));
    if (spec.d != pr.d) throw ParameterError("potential has " + std::to_string(spec.d) + " angles but problem.d = " + std::to_string(pr.d));
    spec.eps = pr.eps;
    spec.beta = pr.beta;
    spec.lambda = pr.lambda;
    spec.alpha = pr.alpha;
    spec.validate();
    return spec;
}

std::vector<Eigen::VectorXd> parameter_samples(const RunConfig& cfg, std::uint64_t seed)
{
    const Eigen::VectorXd lo = to_vector(cfg.params.lo), hi = to_vector(cfg.params.hi);
    if (cfg.params.samples == 1) return {0.5 * (lo + hi)};
    if (cfg.params.sampling == "grid") {
        const int per = std::max(1, static_cast<int>(std::lround(std::pow(double(cfg.params.samples), 1.0 / lo.size()))));
        return ParamSet::grid(lo, hi, per).samples;
    }
    return ParamSet::halton(lo, hi, cfg.params.samples, seed).samples;
}

FamilyMask family_mask(const std::vector<std::string>& names)
{
    FamilyMask m{false, false, false, false};
    for (const auto& s : names) {
        switch (resonance_family_from_string(s)) {
        case ResonanceFamily::R0: m.r0 = true; break;
        case ResonanceFamily::R1: m.r1 = true; break;
        case ResonanceFamily::R2: m.r2 = true; break;
        case ResonanceFamily::R11: m.r11 = true; break;
        }
    }
    return m;
}

ReducibilityOptions reducibility_options(const VerifyConfig& v, std::uint64_t seed)
{
    ReducibilityOptions ro;
    if (!v.phi0.empty()) ro.phi0 = to_vector(v.phi0);
    ro.horizon = v.horizon;
    ro.dt = v.dt;
    ro.record_interval = v.record_interval;
    ro.rho = v.rho;
    ro.p = v.p;
    ro.seed = seed;
    return ro;
}

json reducibility_json(const ReducibilityMetrics& full, const ReducibilityMetrics& half, double dt)
{
    json j;
    j["dt"] = dt;
    j["max_distance"] = full.max_distance;
    j["max_distance_half_dt"] = half.max_distance;
    j["halving_ratio"] = half.max_distance > 0.0 ? full.max_distance / half.max_distance : 0.0;
    j["forced_norm_drift"] = full.forced_norm_drift;
    j["reduced_norm_drift"] = full.reduced_norm_drift;
    return j;
}

json conjugacy_json(const ConjugacyCheck& c)
{
    return {{"max_error", c.max_error}, {"max_symplectic", c.max_symplectic}, {"errors", c.errors}, {"symplectic", c.symplectic}};
}

void write_conjugacy_csv(const Writer& w, const std::string& name, const ConjugacyCheck& c)
{
    std::ofstream os = w.open(name);
    os << "point,conjugacy_error,symplectic_defect\n";
    for (std::size_t i = 0; i < c.errors.size(); ++i) os << i << ',' << c.errors[i] << ',' << c.symplectic[i] << '\n';
}

json run_reduce(const RunConfig& cfg, std::uint64_t seed, const Writer& w)
{
    const PotentialSpec spec = problem_potential(cfg);
    const std::vector<Eigen::VectorXd> omegas = parameter_samples(cfg, seed);
    const KamParams& kp = cfg.kam;
    const NlsReduction red = reduce_nls(spec, omegas, kp);
    const KamRunResult& run = red.run;
    const auto& samples = run.final_state.samples;

    {
        std::ofstream os = w.open("steps.csv");
        write_step_csv(os, run.steps);
    }
    {
        std::ofstream os = w.open("eps.csv");
        os << "sample,nu,eps\n";
        for (std::size_t i = 0; i < run.eps_history.size(); ++i)
            for (std::size_t nu = 0; nu < run.eps_history[i].size(); ++nu) os << i << ',' << nu << ',' << run.eps_history[i][nu] << '\n';
    }
    {
        std::ofstream os = w.open("samples.csv");
        os << "sample";
        for (int j = 0; j < kp.d; ++j) os << ",xi_" << j + 1;
        os << ",alive,excluded_nu,family,eps_final,drift_omega,drift_Omega,drift_pairing,hermitian_defect,support_defect\n";
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const KamSample& s = samples[i];
            os << i;
            for (int j = 0; j < kp.d; ++j) os << ',' << s.xi[j];
            const DriftBounds db = i < run.drift.size() ? run.drift[i] : DriftBounds{};
            os << ',' << int(s.alive) << ',' << s.exclusion.nu << ',' << s.exclusion.family << ',' << s.eps << ','
               << db.omega << ',' << db.Omega << ',' << db.pairing << ',';
            if (s.alive) os << red.operators[i].hermitian_defect() << ',' << red.operators[i].support_defect();
            else os << ',';
            os << '\n';
        }
    }

    json summary;
    summary["command"] = "reduce";
    summary["converged"] = run.converged;
    summary["samples"] = samples.size();
    summary["alive"] = red.alive.size();
    summary["steps"] = run.steps.empty() ? 0 : run.steps.back().nu + 1;
    json seqs = json::array();
    for (const auto& h : run.eps_history) seqs.push_back(h);
    summary["eps_sequences"] = seqs;

    const std::size_t i0 = red.alive.front();
    const KamSample& s0 = samples[i0];
    const auto& eps = run.eps_history[i0];
    json ratios = json::array();
    for (std::size_t nu = 1; nu + 1 < eps.size(); ++nu)
        if (eps[nu] > 0.0 && eps[nu] < 1.0 && eps[nu + 1] > 0.0) ratios.push_back(std::log(eps[nu + 1]) / std::log(eps[nu]));
    summary["reference_sample"] = i0;
    summary["ln_ratios"] = ratios;
    json predicted = json::array();
    for (const auto& d : run.steps)
        if (d.sample == static_cast<int>(i0)) predicted.push_back(d.eps_predicted);
    summary["eps_predicted"] = predicted;
    const DriftBounds db = run.drift[i0];
    const double eps0 = cfg.problem.eps;
    summary["drift"] = {{"omega", db.omega}, {"Omega", db.Omega}, {"pairing", db.pairing}, {"eps0", eps0},
                        {"eps0_measured", eps.front()},
                        {"constant", eps0 > 0.0 ? std::max({db.omega, db.Omega, db.pairing}) / eps0 : 0.0}};
    const ReducedOperator& op = red.operators[i0];
    const double eps_final = s0.eps;
    summary["reduced_operator"] = {{"hermitian_defect", op.hermitian_defect()}, {"support_defect", op.support_defect()},
                                   {"norm", op.norm()}, {"eps_final", eps_final}};

    const auto [seed_normal, seed_P] = build_nls(spec, s0.xi, kp.lattice_cutoff);
    const QuadHamiltonian H0 = to_hamiltonian(seed_normal, PairingForm(kp.lattice_cutoff), 0) + seed_P;
    const QuadHamiltonian Hc = to_hamiltonian(s0.normal, s0.pairing, 0) + s0.perturbation;
    const auto points = sample_phase_points(kp.d, kp.lattice_cutoff, kp.domain(), cfg.verify.points, seed);
    const ConjugacyCheck cc = check_conjugacy(H0, Hc, s0.chain, points);
    write_conjugacy_csv(w, "conjugacy.csv", cc);
    summary["conjugacy"] = {{"max_error", cc.max_error}, {"max_symplectic", cc.max_symplectic},
                            {"bound", 10.0 * (kp.lie.tail_tol + eps_final * eps_final)}};

    if (cfg.verify.dynamics) {
        const ReducibilityOptions ro = reducibility_options(cfg.verify, seed);
        ReducibilityOptions half = ro;
        half.dt = ro.dt / 2.0;
        const ReducibilityMetrics m1 = verify_reducibility(seed_normal, seed_P, op, s0.chain, ro);
        const ReducibilityMetrics m2 = verify_reducibility(seed_normal, seed_P, op, s0.chain, half);
        if (cfg.outputs.trajectories) {
            std::ofstream a = w.open("trajectory.csv");
            write_trajectory_csv(a, m1.rows);
            std::ofstream b = w.open("trajectory_half_dt.csv");
            write_trajectory_csv(b, m2.rows);
        }
        summary["reducibility"] = reducibility_json(m1, m2, ro.dt);
    }

    if (cfg.outputs.checkpoint) {
        const fs::path cp = w.dir / "checkpoint";
        fs::create_directories(cp);
        save_hamiltonian((cp / "seed.ham").string(), H0);
        save_hamiltonian((cp / "converged.ham").string(), Hc);
        save_chain((cp / "chain.txt").string(), s0.chain);
        json meta;
        meta["sample"] = i0;
        meta["omega"] = to_json(s0.xi);
        meta["domain"] = {{"s", kp.s}, {"r", kp.r}, {"rho", kp.rho}, {"p", kp.p}};
        meta["points"] = cfg.verify.points;
        meta["point_seed"] = seed;
        meta["eps_final"] = eps_final;
        meta["conjugacy"] = conjugacy_json(cc);
        Writer{cp}.json_file("checkpoint.json", meta);
    }
    return summary;
}

json read_json_file(const fs::path& p)
{
    std::ifstream in(p);
    if (!in) throw IoError("cannot open " + p.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("malformed " + p.string() + ": " + e.what());
    }
}

json run_verify(const RunConfig& cfg, std::uint64_t seed, const Writer& w)
{
    if (cfg.verify.checkpoint.empty()) throw ParameterError("verify.checkpoint is required for the verify command");
    const fs::path cp = cfg.resolve(cfg.verify.checkpoint);
    const json meta = read_json_file(cp / "checkpoint.json");
    const QuadHamiltonian H0 = load_hamiltonian((cp / "seed.ham").string());
    const QuadHamiltonian Hc = load_hamiltonian((cp / "converged.ham").string());
    const TransformChain chain = load_chain((cp / "chain.txt").string());
    Eigen::VectorXd omega;
    DomainParams D;
    int count = 0;
    std::uint64_t point_seed = 0;
    json stored;
    try {
        omega = to_vector(meta.at("omega").get<std::vector<double>>());
        const json& dom = meta.at("domain");
        D = {dom.at("s").get<double>(), dom.at("r").get<double>(), dom.at("rho").get<double>(), dom.at("p").get<double>(), H0.angles()};
        count = meta.at("points").get<int>();
        point_seed = meta.at("point_seed").get<std::uint64_t>();
        stored = meta.at("conjugacy");
    } catch (const json::exception& e) {
        throw IoError("checkpoint.json is missing fields: " + std::string(e.what()));
    }
    const auto points = sample_phase_points(H0.angles(), H0.lattice_cutoff(), D, count, point_seed);
    const ConjugacyCheck cc = check_conjugacy(H0, Hc, chain, points);
    write_conjugacy_csv(w, "conjugacy.csv", cc);
    const double stored_err = stored.at("max_error").get<double>();
    const double stored_sym = stored.at("max_symplectic").get<double>();
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({std::abs(a), std::abs(b), 1e-300}) + 1e-300; };

    json summary;
    summary["command"] = "verify";
    summary["checkpoint"] = cp.string();
    summary["conjugacy"] = {{"max_error", cc.max_error}, {"max_symplectic", cc.max_symplectic},
                            {"stored_max_error", stored_err}, {"stored_max_symplectic", stored_sym},
                            {"matches", close(cc.max_error, stored_err) && close(cc.max_symplectic, stored_sym)}};
    if (cfg.verify.dynamics) {
        const ReducedOperator op = reduced_operator(Hc);
        const ReducibilityOptions ro = reducibility_options(cfg.verify, seed);
        ReducibilityOptions half = ro;
        half.dt = ro.dt / 2.0;
        const ReducibilityMetrics m1 = verify_reducibility(H0, omega, op, chain, ro);
        const ReducibilityMetrics m2 = verify_reducibility(H0, omega, op, chain, half);
        if (cfg.outputs.trajectories) {
            std::ofstream a = w.open("trajectory.csv");
            write_trajectory_csv(a, m1.rows);
        }
        summary["reducibility"] = reducibility_json(m1, m2, ro.dt);
        summary["reduced_operator"] = {{"hermitian_defect", op.hermitian_defect()}, {"support_defect", op.support_defect()},
                                       {"norm", op.norm()}};
    }
    return summary;
}

json run_measure(const RunConfig& cfg, std::uint64_t seed, const Writer& w)
{
    const KamParams& kp = cfg.kam;
    const Eigen::VectorXd lo = to_vector(cfg.params.lo), hi = to_vector(cfg.params.hi);
    const FamilyMask mask = family_mask(cfg.measure.families);
    const FrequencyModel model = identity_model(kp.alpha, kp.lambda, kp.beta, kp.lattice_cutoff);
    MeasureOptions mo;
    mo.families = mask;
    mo.lattice_cutoff = kp.lattice_cutoff;
    mo.cross_check_fraction = cfg.measure.cross_check_fraction;

    std::ofstream csv = w.open("measure.csv");
    write_measure_csv_header(csv);
    json levels = json::array();
    std::vector<double> gammas, fractions;
    std::size_t mismatches = 0;
    for (double g : cfg.measure.gammas) {
        ParamSet O = cfg.params.sampling == "grid"
                         ? ParamSet::grid(lo, hi, std::max(1, static_cast<int>(std::lround(std::pow(double(cfg.params.samples), 1.0 / lo.size())))))
                         : ParamSet::halton(lo, hi, cfg.params.samples, seed);
        for (std::size_t nu = 0; nu < cfg.measure.K.size(); ++nu) {
            ResonanceLevel level{g, cfg.measure.K[nu], kp.measure_tau1(), kp.varsigma(), static_cast<int>(nu)};
            const ExcludedMeasure m = excluded_measure(O, level, model, mo);
            write_measure_csv_rows(csv, level, m);
            mismatches += m.cross_check_mismatch;
        }
        const std::size_t excluded = O.size() - O.alive_count();
        const double frac = double(excluded) / O.size();
        const Interval ci = wilson_interval(excluded, O.size());
        gammas.push_back(g);
        fractions.push_back(frac);
        levels.push_back({{"gamma", g}, {"excluded_fraction", frac}, {"ci_low", ci.lo}, {"ci_high", ci.hi},
                          {"bound", std::pow(g, 0.25)}, {"within_bound", frac <= std::pow(g, 0.25)}});
    }
    json summary;
    summary["command"] = "measure";
    summary["levels"] = levels;
    const double slope = loglog_slope(gammas, fractions);
    summary["slope"] = std::isfinite(slope) ? json(slope) : json(nullptr);
    summary["cross_check_mismatches"] = mismatches;

    if (kp.d == 1 && cfg.measure.r0_box.size() == 2) {
        std::ofstream os = w.open("r0_oracle.csv");
        os << "gamma,K,mc_fraction,ci_low,ci_high,exact_fraction,within_ci\n";
        json rows = json::array();
        const double a = cfg.measure.r0_box[0], b = cfg.measure.r0_box[1];
        MeasureOptions r0 = mo;
        r0.families = FamilyMask::only(ResonanceFamily::R0);
        r0.mark = false;
        for (double g : cfg.measure.gammas) {
            ResonanceLevel level{g, cfg.measure.K.front(), kp.measure_tau1(), kp.varsigma(), 0};
            ParamSet O = ParamSet::halton(Eigen::VectorXd::Constant(1, a), Eigen::VectorXd::Constant(1, b), cfg.params.samples, seed);
            const ExcludedMeasure m = excluded_measure(O, level, model, r0);
            const double exact = exact_excluded_fraction_1d(a, b, level, kp.alpha, kp.lambda, kp.lattice_cutoff, r0.families);
            const bool within = exact >= m.ci.lo && exact <= m.ci.hi;
            os << g << ',' << level.K << ',' << m.fraction << ',' << m.ci.lo << ',' << m.ci.hi << ',' << exact << ',' << int(within) << '\n';
            rows.push_back({{"gamma", g}, {"mc_fraction", m.fraction}, {"exact_fraction", exact}, {"within_ci", within}});
        }
        summary["r0_oracle"] = rows;
    }
    return summary;
}

json run_sweep(const RunConfig& cfg, std::uint64_t seed, const Writer& w)
{
    const auto pts = degradation_sweep(cfg.kam, cfg.sweep.cutoffs, cfg.sweep.betas, cfg.sweep.K, cfg.sweep.seeds, seed);
    std::ofstream os = w.open("sweep.csv");
    os << "alpha,beta,N,gamma_beta_ratio,gamma_beta_alpha_ratio\n";
    for (const auto& p : pts) os << cfg.kam.alpha << ',' << p.beta << ',' << p.N << ',' << p.gamma_beta << ',' << p.gamma_beta_alpha << '\n';
    json fits = json::array();
    for (double beta : cfg.sweep.betas) {
        std::vector<double> n, g, ga;
        for (const auto& p : pts)
            if (p.beta == beta) {
                n.push_back(p.N);
                g.push_back(p.gamma_beta);
                ga.push_back(p.gamma_beta_alpha);
            }
        const double lo = *std::min_element(g.begin(), g.end()), hi = *std::max_element(g.begin(), g.end());
        fits.push_back({{"beta", beta}, {"alpha_plus_beta", cfg.kam.alpha + beta},
                        {"gamma_beta_exponent", loglog_slope(n, g)}, {"gamma_beta_alpha_exponent", loglog_slope(n, ga)},
                        {"gamma_beta_spread", lo > 0.0 ? hi / lo - 1.0 : 0.0},
                        {"witness_exponent", (1.0 - cfg.kam.alpha - beta) / 2.0}});
    }
    return {{"command", "sweep"}, {"fits", fits}};
}

} // namespace

RunOutcome run(const RunConfig& cfg, const RunOptions& opts)
{
    RunOutcome out;
    Writer w{opts.out_dir};
    try {
        std::error_code ec;
        fs::create_directories(w.dir, ec);
        if (ec) throw IoError("cannot create output directory " + w.dir.string() + ": " + ec.message());
        if (opts.threads) set_worker_threads(opts.threads);
        const std::uint64_t seed = opts.seed.value_or(cfg.params.seed);
        json summary;
        switch (cfg.command) {
        case Command::Reduce: summary = run_reduce(cfg, seed, w); break;
        case Command::Measure: summary = run_measure(cfg, seed, w); break;
        case Command::Verify: summary = run_verify(cfg, seed, w); break;
        case Command::Sweep: summary = run_sweep(cfg, seed, w); break;
        }
        summary["seed"] = seed;
        w.json_file("summary.json", summary);
        return out;
    } catch (const std::exception& e) {
        const ErrorClass c = classify(e);
        out.code = c.code;
        out.reason = c.reason;
        out.message = e.what();
    }
    try {
        w.json_file("error.json", {{"reason", out.reason}, {"exit_code", static_cast<int>(out.code)}, {"message", out.message}});
    } catch (const std::exception&) {
    }
    return out;
}

} // namespace subkam
