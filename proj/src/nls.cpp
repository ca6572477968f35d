#include "subkam/nls.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "subkam/errors.hpp"

namespace subkam {

int PotentialSpec::fourier_cutoff() const
{
    int K = 0;
    for (const auto& [key, v] : vhat) K = std::max(K, l1_norm(key.first));
    return K;
}

int PotentialSpec::spatial_cutoff() const
{
    int L = 0;
    for (const auto& [key, v] : vhat) L = std::max(L, std::abs(key.second));
    return L;
}

double PotentialSpec::reality_defect() const
{
    double e = 0.0;
    for (const auto& [key, v] : vhat) {
        const auto it = vhat.find({negate(key.first), -key.second});
        const cplx partner = it == vhat.end() ? cplx(0.0) : it->second;
        e = std::max(e, std::abs(partner - std::conj(v)));
    }
    return e;
}

double PotentialSpec::analytic_constant() const
{
    double c = 0.0;
    for (const auto& [key, v] : vhat)
        c = std::max(c, std::abs(v) * std::exp((l1_norm(key.first) + std::abs(key.second)) * rho_V));
    return c;
}

void PotentialSpec::validate() const
{
    if (d < 1) throw ParameterError("potential needs at least one angle");
    if (!(eps >= 0.0)) throw ParameterError("forcing amplitude eps must be nonnegative");
    if (!(beta > 0.0)) throw ParameterError("beta must be positive");
    if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
    if (!(rho_V > 0.0)) throw ParameterError("rho_V must be positive");
    for (const auto& [key, v] : vhat)
        if (static_cast<int>(key.first.size()) != d) throw ParameterError("potential mode has the wrong number of angles");
    if (reality_defect() > 1e-12 * (1.0 + analytic_constant()))
        throw ParameterError("potential is not real: vhat_{-k,-l} != conj(vhat_{k,l})");
}

PotentialSpec cos_potential(double eps, double beta, double lambda)
{
    PotentialSpec s;
    s.d = 1;
    s.eps = eps;
    s.beta = beta;
    s.lambda = lambda;
    s.vhat[{KVec{0}, 0}] = 1.0;
    s.vhat[{KVec{0}, 1}] = 0.5;
    s.vhat[{KVec{0}, -1}] = 0.5;
    for (int k : {-1, 1})
        for (int l : {-1, 1}) s.vhat[{KVec{k}, l}] = 0.25;
    return s;
}

PotentialSpec read_potential(std::istream& is)
{
    PotentialSpec s;
    std::string line;
    int lineno = 0;
    bool have_d = false;
    auto fail = [&](const std::string& what) {
        throw IoError("potential line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head)) continue;
        double value = 0.0;
        if (head == "angles") {
            if (!(ls >> s.d) || s.d < 1) fail("bad angle count");
            have_d = true;
            continue;
        }
        if (head == "eps" || head == "beta" || head == "lambda" || head == "rho_V" || head == "alpha") {
            if (!(ls >> value)) fail("missing value for " + head);
            if (head == "eps") s.eps = value;
            else if (head == "beta") s.beta = value;
            else if (head == "lambda") s.lambda = value;
            else if (head == "rho_V") s.rho_V = value;
            else s.alpha = value;
            continue;
        }
        if (!have_d) fail("coefficient row before 'angles'");
        std::istringstream row(line);
        KVec k(s.d);
        int l = 0;
        double re = 0.0, im = 0.0;
        for (int j = 0; j < s.d; ++j)
            if (!(row >> k[j])) fail("expected " + std::to_string(s.d) + " integer k components");
        if (!(row >> l >> re >> im)) fail("expected 'l re im'");
        std::string extra;
        if (row >> extra) fail("trailing token '" + extra + "'");
        s.vhat[{k, l}] += cplx(re, im);
    }
    if (!have_d) throw IoError("potential file has no 'angles' line");
    s.validate();
    return s;
}

PotentialSpec load_potential(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open potential file " + path);
    return read_potential(in);
}

void write_potential(std::ostream& os, const PotentialSpec& spec)
{
    const auto prec = os.precision(17);
    os << "# subkam-potential v1\n";
    os << "angles " << spec.d << "\neps " << spec.eps << "\nbeta " << spec.beta << "\nlambda " << spec.lambda
       << "\nrho_V " << spec.rho_V << "\nalpha " << spec.alpha << '\n';
    for (const auto& [key, v] : spec.vhat) {
        for (int kj : key.first) os << kj << ' ';
        os << key.second << ' ' << v.real() << ' ' << v.imag() << '\n';
    }
    os.precision(prec);
}

std::pair<NormalForm, QuadHamiltonian> build_nls(const PotentialSpec& spec, const Eigen::VectorXd& omega,
                                                 int lattice_cutoff)
{
    spec.validate();
    if (lattice_cutoff < 1) throw ParameterError("lattice cutoff N must be at least 1");
    if (omega.size() != spec.d) throw ParameterError("frequency vector length differs from the potential's angle count");
    NormalForm nf(omega, spec.alpha, spec.lambda, spec.beta, lattice_cutoff);
    QuadHamiltonian P(spec.d, lattice_cutoff, spec.fourier_cutoff(), true);
    if (spec.eps == 0.0) return {std::move(nf), std::move(P)};
    const int N = lattice_cutoff;
    for (const auto& [key, v] : spec.vhat) {
        if (v == cplx(0.0)) continue;
        const int l = key.second;
        for (int n = -N; n <= N; ++n) {
            const int m = n - l;
            if (m < -N || m > N) continue;
            const double w = std::pow(angle_bracket(n), -spec.beta) * std::pow(angle_bracket(m), -spec.beta);
            P.add(MonomialKey::zzbar(key.first, n, m), spec.eps * v * w);
        }
    }
    return {std::move(nf), std::move(P)};
}

std::string AssumptionReport::summary() const
{
    std::ostringstream os;
    os << "A1 " << (a1 ? "pass" : "fail") << " (Lipschitz " << lipschitz << "); "
       << "A2 " << (a2 ? "pass" : "fail") << " (weight " << tilde_weight << " vs L " << L << "); "
       << "B1 " << (b1 ? "pass" : "fail") << " (majorant " << majorant << "); "
       << "B2 " << (b2 ? "pass" : "fail") << " (seminorm " << seminorm.value << " vs " << eps0 << ", binding "
       << to_string(seminorm.binding_condition) << ")";
    return os.str();
}

AssumptionReport verify_assumptions(const NormalForm& N, const QuadHamiltonian& P, double beta,
                                    const AssumptionOptions& opts)
{
    opts.domain.validate();
    AssumptionReport r;
    const auto& om = opts.omega_samples;
    for (std::size_t a = 0; a < om.size(); ++a)
        for (std::size_t b = a + 1; b < om.size(); ++b) {
            const double dist = (om[a].first - om[b].first).norm();
            if (dist > 0.0) r.lipschitz = std::max(r.lipschitz, (om[a].second - om[b].second).norm() / dist);
        }
    r.a1 = r.lipschitz <= opts.M_budget;
    r.tilde_weight = N.tilde_weight();
    r.L = N.L;
    r.a2 = r.tilde_weight <= N.L * (1.0 + 1e-12) + 1e-300;
    r.majorant = vector_field_majorant(P, opts.domain);
    r.b1 = std::isfinite(r.majorant);
    r.seminorm = gamma_beta_seminorm(P, opts.domain, beta);
    r.eps0 = opts.eps0;
    r.b2 = std::isfinite(r.seminorm.value) && r.seminorm.value <= opts.eps0;
    return r;
}

double ReducedOperator::hermitian_defect() const
{
    return A.size() ? (A - A.adjoint()).cwiseAbs().maxCoeff() : 0.0;
}

double ReducedOperator::support_defect() const
{
    const int S = static_cast<int>(A.rows());
    double e = 0.0;
    for (int i = 0; i < S; ++i)
        for (int j = 0; j < S; ++j)
            if (i != j && i + j != S - 1) e = std::max(e, std::abs(A(i, j)));
    return e;
}

double ReducedOperator::norm() const
{
    return core.size() ? Eigen::JacobiSVD<Eigen::MatrixXcd>(core).singularValues()[0] : 0.0;
}

ReducedOperator reduced_operator(const NormalForm& N, const PairingForm& A, const QuadHamiltonian* residual)
{
    ReducedOperator op;
    op.core = normal_matrix(N, A);
    op.A = op.core;
    if (residual) {
        const FourierMode* m0 = residual->find_mode(KVec(N.angles(), 0));
        if (m0 && m0->zzbar.size()) op.A += m0->zzbar;
    }
    return op;
}

ReducedOperator reduced_operator(const QuadHamiltonian& converged)
{
    const int S = converged.sites();
    ReducedOperator op;
    op.A = Eigen::MatrixXcd::Zero(S, S);
    const FourierMode* m0 = converged.find_mode(KVec(converged.angles(), 0));
    if (m0 && m0->zzbar.size()) op.A = m0->zzbar;
    op.core = Eigen::MatrixXcd::Zero(S, S);
    for (int i = 0; i < S; ++i) {
        op.core(i, i) = op.A(i, i);
        op.core(i, S - 1 - i) = op.A(i, S - 1 - i);
    }
    return op;
}

NlsReduction reduce_nls(const PotentialSpec& spec, const std::vector<Eigen::VectorXd>& omegas, const KamParams& params)
{
    KamParams p = params;
    p.d = spec.d;
    p.alpha = spec.alpha;
    p.beta = spec.beta;
    p.lambda = spec.lambda;
    p.validate();
    if (omegas.empty()) throw EmptySetError("reduce_nls needs at least one frequency sample");
    {
        const auto [nf, P] = build_nls(spec, omegas.front(), p.lattice_cutoff);
        AssumptionOptions ao;
        ao.domain = p.domain();
        ao.eps0 = 1.0;
        for (const auto& w : omegas) ao.omega_samples.emplace_back(w, w);
        const AssumptionReport rep = verify_assumptions(nf, P, p.beta, ao);
        if (!rep.pass()) throw ParameterError("NLS seed fails the standing assumptions: " + rep.summary());
    }
    const SeedFactory seed = [&](const Eigen::VectorXd& xi) {
        auto [nf, P] = build_nls(spec, xi, p.lattice_cutoff);
        KamSample s;
        s.xi = xi;
        s.normal = std::move(nf);
        s.pairing = PairingForm(p.lattice_cutoff);
        s.perturbation = std::move(P);
        s.chain = TransformChain(p.d, p.lattice_cutoff);
        return s;
    };
    NlsReduction out;
    out.run = kam_run(seed, omegas, p);
    const auto& samples = out.run.final_state.samples;
    out.operators.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!samples[i].alive) continue;
        out.alive.push_back(i);
        out.operators[i] = reduced_operator(samples[i].normal, samples[i].pairing, &samples[i].perturbation);
    }
    return out;
}

namespace {

struct ForcingMode {
    KVec k;
    Eigen::MatrixXcd Bt; // transpose of the z zbar block
    Eigen::MatrixXcd C;  // zbar zbar block
    Eigen::VectorXcd v;  // linear zbar coefficients
};

cplx phase_at(const KVec& k, const Eigen::VectorXd& theta)
{
    double a = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) a += k[j] * theta[j];
    return std::polar(1.0, a);
}

} // namespace

ReducibilityMetrics verify_reducibility(const NormalForm& seed_normal, const QuadHamiltonian& seed_perturbation,
                                        const ReducedOperator& reduced, const TransformChain& chain,
                                        const ReducibilityOptions& opts)
{
    if (seed_perturbation.lattice_cutoff() != seed_normal.lattice_cutoff())
        throw ParameterError("seed perturbation and normal form use different lattice cutoffs");
    const QuadHamiltonian H = to_hamiltonian(seed_normal, PairingForm(seed_normal.lattice_cutoff()), 0) + seed_perturbation;
    return verify_reducibility(H, seed_normal.omega, reduced, chain, opts);
}

ReducibilityMetrics verify_reducibility(const QuadHamiltonian& H, const Eigen::VectorXd& omega,
                                        const ReducedOperator& reduced, const TransformChain& chain,
                                        const ReducibilityOptions& opts)
{
    const int d = H.angles();
    const int N = H.lattice_cutoff();
    const int S = 2 * N + 1;
    if (!(opts.dt > 0.0) || !(opts.horizon > 0.0)) throw ParameterError("dt and horizon must be positive");
    if (omega.size() != d) throw ParameterError("omega has the wrong length");
    if (reduced.core.rows() != S) throw ParameterError("reduced operator size differs from the lattice");
    if (chain.lattice_cutoff() != N) throw ParameterError("seed and chain use different lattice cutoffs");
    const Eigen::VectorXd phi0 = opts.phi0.size() ? opts.phi0 : Eigen::VectorXd::Zero(d);
    if (phi0.size() != d) throw ParameterError("phi0 has the wrong length");

    std::vector<ForcingMode> modes;
    for (const auto& [k, md] : H.modes()) {
        ForcingMode f;
        f.k = k;
        f.Bt = md.zzbar.size() ? Eigen::MatrixXcd(md.zzbar.transpose()) : Eigen::MatrixXcd::Zero(S, S);
        f.C = md.zbarzbar.size() ? md.zbarzbar : Eigen::MatrixXcd::Zero(S, S);
        f.v = md.zbar.size() ? md.zbar : Eigen::VectorXcd::Zero(S);
        modes.push_back(std::move(f));
    }
    auto rhs = [&](double t, const Eigen::VectorXcd& z) {
        const Eigen::VectorXd theta = phi0 + t * omega;
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(S);
        const Eigen::VectorXcd zc = z.conjugate();
        for (const auto& f : modes) acc += phase_at(f.k, theta) * (f.Bt * z + f.C * zc + f.v);
        return Eigen::VectorXcd(cplx(0.0, 1.0) * acc);
    };

    std::mt19937_64 gen(opts.seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    Eigen::VectorXcd w0(S);
    for (int n = -N; n <= N; ++n) w0[n + N] = 0.1 * std::exp(-std::abs(n) * (opts.rho + 0.5)) * std::polar(1.0, angle(gen));

    const Eigen::MatrixXcd Bt = reduced.core.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (Bt + Bt.adjoint()));
    const Eigen::MatrixXcd V = eig.eigenvectors();
    const Eigen::VectorXd lam = eig.eigenvalues();
    const Eigen::VectorXcd c0 = V.adjoint() * w0;
    auto reduced_at = [&](double t) {
        Eigen::VectorXcd c(S);
        for (int i = 0; i < S; ++i) c[i] = std::polar(1.0, lam[i] * t) * c0[i];
        return Eigen::VectorXcd(V * c);
    };
    auto mapped = [&](double t, const Eigen::VectorXcd& w) {
        const Eigen::VectorXd theta = phi0 + t * omega;
        Eigen::VectorXcd W(2 * S);
        W << w, w.conjugate();
        const Eigen::VectorXcd Z = chain.z_offset(theta) + chain.z_matrix(theta) * W;
        return Eigen::VectorXcd(Z.head(S));
    };

    ReducibilityMetrics out;
    Eigen::VectorXcd z = mapped(0.0, w0);
    const double n0 = z.squaredNorm(), m0 = w0.squaredNorm();
    const long steps = std::lround(opts.horizon / opts.dt);
    const long every = std::max(1L, std::lround(opts.record_interval / opts.dt));
    const double dt = opts.dt;
    auto record = [&](double t) {
        const Eigen::VectorXcd w = reduced_at(t);
        const Eigen::VectorXcd diff = z - mapped(t, w);
        TrajectoryRow row;
        row.t = t;
        row.norm = z.norm();
        row.distance = weighted_norm(WeightedSeq(N, diff), opts.rho, opts.p);
        out.rows.push_back(row);
        out.max_distance = std::max(out.max_distance, row.distance);
        out.forced_norm_drift = std::max(out.forced_norm_drift, std::abs(z.squaredNorm() - n0) / n0);
        out.reduced_norm_drift = std::max(out.reduced_norm_drift, std::abs(w.squaredNorm() - m0) / m0);
    };
    record(0.0);
    for (long s = 1; s <= steps; ++s) {
        const double t = (s - 1) * dt;
        const Eigen::VectorXcd k1 = rhs(t, z);
        const Eigen::VectorXcd k2 = rhs(t + 0.5 * dt, z + 0.5 * dt * k1);
        const Eigen::VectorXcd k3 = rhs(t + 0.5 * dt, z + 0.5 * dt * k2);
        const Eigen::VectorXcd k4 = rhs(t + dt, z + dt * k3);
        z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!z.allFinite()) throw StepSizeError("forced integration blew up at t = " + std::to_string(s * dt));
        if (s % every == 0 || s == steps) record(s * dt);
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows)
{
    const auto prec = os.precision(12);
    os << "t,norm,distance\n";
    for (const auto& r : rows) os << r.t << ',' << r.norm << ',' << r.distance << '\n';
    os.precision(prec);
}

} // namespace subkam
