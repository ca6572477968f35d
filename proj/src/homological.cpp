#include "subkam/homological.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "subkam/algebra.hpp"
#include "subkam/errors.hpp"
#include "subkam/parallel.hpp"

namespace subkam {

std::string to_string(Component c)
{
    switch (c) {
    case Component::F0: return "F0";
    case Component::F1: return "F1";
    case Component::F10: return "F10";
    case Component::F01: return "F01";
    case Component::F11: return "F11";
    case Component::F20: return "F20";
    case Component::F02: return "F02";
    }
    return "?";
}

std::string to_string(DivisorFamily f)
{
    switch (f) {
    case DivisorFamily::Scalar: return "scalar";
    case DivisorFamily::Pair: return "pair";
    case DivisorFamily::Sum: return "sum";
    case DivisorFamily::Difference: return "difference";
    }
    return "?";
}

namespace {

const cplx kI(0.0, 1.0);

std::vector<int> orbit(int n) { return n == 0 ? std::vector<int>{0} : std::vector<int>{n, -n}; }

template <int Dim>
Eigen::MatrixXcd fixed_inverse(const Eigen::MatrixXcd& M)
{
    Eigen::Matrix<cplx, Dim, Dim> F = M;
    return Eigen::MatrixXcd(F.inverse());
}

// Largest singular value of a block of dimension at most 4.
double spectral_norm(const Eigen::MatrixXcd& X)
{
    if (X.size() == 1) return std::abs(X(0, 0));
    double top = 0.0;
    if (X.rows() == 2) {
        const Eigen::Matrix2cd F = X;
        const Eigen::Matrix2cd G = F.adjoint() * F;
        const double a = G(0, 0).real(), d = G(1, 1).real();
        top = 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + std::norm(G(0, 1)));
    } else if (X.rows() == 4) {
        const Eigen::Matrix4cd F = X;
        const Eigen::Matrix4cd G = F.adjoint() * F;
        top = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd>(G, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    } else {
        const Eigen::MatrixXcd G = X.adjoint() * X;
        top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(G, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    }
    const double s = std::sqrt(std::max(top, 0.0));
    return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

bool is_singular(const Eigen::MatrixXcd& M)
{
    cplx det;
    switch (M.rows()) {
    case 1: det = M(0, 0); break;
    case 2: det = Eigen::Matrix2cd(M).determinant(); break;
    case 4: det = Eigen::Matrix4cd(M).determinant(); break;
    default: det = M.determinant();
    }
    return det == cplx(0.0) || !std::isfinite(std::abs(det));
}

} // namespace

Eigen::MatrixXcd block_inverse(const Eigen::MatrixXcd& M)
{
    if (M.rows() != M.cols()) throw ClassError("block is not square");
    if (is_singular(M)) throw ResonanceError("singular block", {}, 0, 0, "singular");
    switch (M.rows()) {
    case 1: return Eigen::MatrixXcd::Constant(1, 1, 1.0 / M(0, 0));
    case 2: return fixed_inverse<2>(M);
    case 3: return fixed_inverse<3>(M);
    case 4: return fixed_inverse<4>(M);
    default: throw ClassError("blocks have dimension at most 4");
    }
}

double inverse_norm(const Eigen::MatrixXcd& M)
{
    if (is_singular(M)) return std::numeric_limits<double>::infinity();
    return spectral_norm(block_inverse(M));
}

BlockSystem assemble_block(const NormalForm& N, const PairingForm& A, const KVec& k, int n, int m, Component c,
                           const QuadHamiltonian* R)
{
    const int cut = N.lattice_cutoff();
    if (static_cast<int>(k.size()) != N.angles()) throw ClassError("Fourier index has wrong dimension");
    BlockSystem b;
    b.k = k;
    b.n = n;
    b.m = m;
    b.component = c;
    const double kw = dot(k, N.omega);
    const FourierMode* md = R ? R->find_mode(k) : nullptr;
    auto idx = [cut](int s) { return s + cut; };

    if (c == Component::F0 || c == Component::F1) {
        if (c == Component::F1 && (n < 0 || n >= N.angles())) throw ParameterError("action index out of range");
        b.dim = 1;
        b.matrix = Eigen::MatrixXcd::Constant(1, 1, kI * kw);
        b.rhs = Eigen::VectorXcd::Zero(1);
        if (md) b.rhs[0] = c == Component::F0 ? md->constant : (md->action.size() ? md->action[n] : cplx(0.0));
        return b;
    }
    if (n < 0 || n > cut || m < 0 || m > cut) throw ParameterError("orbit index outside lattice cutoff");
    const Eigen::MatrixXcd An = block_matrix(N, A, n);
    b.first_sites = orbit(n);
    if (c == Component::F10 || c == Component::F01) {
        b.dim = static_cast<int>(An.rows());
        const Eigen::MatrixXcd Id = Eigen::MatrixXcd::Identity(b.dim, b.dim);
        b.matrix = c == Component::F10 ? Eigen::MatrixXcd(kw * Id + An) : Eigen::MatrixXcd(kw * Id - An.transpose());
        b.rhs = Eigen::VectorXcd::Zero(b.dim);
        const Eigen::VectorXcd* v = nullptr;
        if (md) v = c == Component::F10 ? &md->z : &md->zbar;
        if (v && v->size())
            for (int i = 0; i < b.dim; ++i) b.rhs[i] = -kI * (*v)[idx(b.first_sites[i])];
        return b;
    }
    const Eigen::MatrixXcd Am = block_matrix(N, A, m);
    b.second_sites = orbit(m);
    const Eigen::Index p = An.rows(), q = Am.rows();
    b.dim = static_cast<int>(p * q);
    // Entry (i q + j, i' q + j') of kw I + An (x) I +- I (x) Am, with transposes per component.
    const Eigen::MatrixXcd* Q = nullptr;
    cplx sn = 1.0, sm = 1.0;
    bool tn = false, tm = false;
    switch (c) {
    case Component::F11:
        sm = -1.0;
        tm = true;
        if (md && md->zzbar.size()) Q = &md->zzbar;
        break;
    case Component::F20:
        if (md && md->zz.size()) Q = &md->zz;
        break;
    case Component::F02:
        sn = sm = -1.0;
        tn = tm = true;
        if (md && md->zbarzbar.size()) Q = &md->zbarzbar;
        break;
    default: break;
    }
    b.matrix = Eigen::MatrixXcd::Zero(b.dim, b.dim);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < q; ++j) {
            const Eigen::Index r = i * q + j;
            b.matrix(r, r) += kw;
            for (Eigen::Index i2 = 0; i2 < p; ++i2) b.matrix(r, i2 * q + j) += sn * (tn ? An(i2, i) : An(i, i2));
            for (Eigen::Index j2 = 0; j2 < q; ++j2) b.matrix(r, i * q + j2) += sm * (tm ? Am(j2, j) : Am(j, j2));
        }
    b.rhs = Eigen::VectorXcd::Zero(b.dim);
    if (Q)
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = 0; j < q; ++j)
                b.rhs[i * q + j] = -kI * (*Q)(idx(b.first_sites[i]), idx(b.second_sites[j]));
    return b;
}

double SmallDivisorReport::threshold(DivisorFamily f) const
{
    const double base = static_cast<double>(K);
    switch (f) {
    case DivisorFamily::Scalar: return std::pow(base, tau) / gamma;
    case DivisorFamily::Pair: return std::pow(base, 2.0 * tau) / gamma;
    case DivisorFamily::Sum:
    case DivisorFamily::Difference: return std::pow(base, 4.0 * tau) / gamma;
    }
    return 0.0;
}

bool SmallDivisorReport::all_pass() const { return first_failure() == nullptr; }

const DivisorEntry* SmallDivisorReport::first_failure() const
{
    for (const auto& e : entries)
        if (!e.pass) return &e;
    return nullptr;
}

std::size_t SmallDivisorReport::failure_count() const
{
    std::size_t c = 0;
    for (const auto& e : entries) c += e.pass ? 0 : 1;
    return c;
}

void SmallDivisorReport::write_csv(std::ostream& os) const
{
    os << "k,n,m,family,value,threshold,pass\n";
    for (const auto& e : entries)
        os << to_string(e.k) << ',' << e.n << ',' << e.m << ',' << to_string(e.family) << ',' << e.value << ','
           << e.threshold << ',' << (e.pass ? 1 : 0) << '\n';
}

SmallDivisorReport small_divisor_report(const NormalForm& N, const PairingForm& A, int K, double gamma, double tau)
{
    if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
    if (K < 1) throw ParameterError("K must be at least 1");
    SmallDivisorReport rep;
    rep.gamma = gamma;
    rep.tau = tau;
    rep.K = K;
    const int cut = N.lattice_cutoff();
    const double cap = std::ceil(std::pow(static_cast<double>(K), 2.0 * tau) / gamma);
    rep.orbit_cap = cap >= cut ? cut : static_cast<int>(cap);
    const long long orbits = cut + 1, kept = rep.orbit_cap + 1;
    const auto ks = enumerate_kvecs(N.angles(), K);
    rep.auto_passed = static_cast<long long>(ks.size()) * (orbits * orbits - kept * kept);

    std::vector<std::vector<DivisorEntry>> per_k(ks.size());
    parallel_for(ks.size(), [&](std::size_t t) {
        const KVec& k = ks[t];
        auto& out = per_k[t];
        auto push = [&](DivisorFamily f, int n, int m, double v) {
            const double th = rep.threshold(f);
            out.push_back({k, n, m, f, v, th, v < th});
        };
        const bool k0 = is_zero(k);
        if (!k0) {
            const double kw = std::abs(dot(k, N.omega));
            push(DivisorFamily::Scalar, 0, 0, kw == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / kw);
        }
        for (int n = 0; n <= rep.orbit_cap; ++n)
            push(DivisorFamily::Pair, n, 0, inverse_norm(assemble_block(N, A, k, n, 0, Component::F10).matrix));
        for (int n = 0; n <= rep.orbit_cap; ++n)
            for (int m = n; m <= rep.orbit_cap; ++m)
                push(DivisorFamily::Sum, n, m, inverse_norm(assemble_block(N, A, k, n, m, Component::F20).matrix));
        if (!k0)
            for (int n = 0; n <= rep.orbit_cap; ++n)
                for (int m = 0; m <= rep.orbit_cap; ++m)
                    if (std::abs(n - m) < K)
                        push(DivisorFamily::Difference, n, m,
                             inverse_norm(assemble_block(N, A, k, n, m, Component::F11).matrix));
    });
    for (auto& v : per_k) rep.entries.insert(rep.entries.end(), v.begin(), v.end());
    return rep;
}

namespace {

void gate(const SmallDivisorReport& rep, DivisorFamily f, const KVec& k, int n, int m, double value)
{
    if (value < rep.threshold(f)) return;
    throw ResonanceError("small divisor " + to_string(f) + " at k = (" + to_string(k) + "), n = " + std::to_string(n)
                             + ", m = " + std::to_string(m) + ": inverse norm " + std::to_string(value)
                             + " >= threshold " + std::to_string(rep.threshold(f)),
                         k, n, m, to_string(f));
}

bool touched(const BlockSystem& b) { return !b.rhs.isZero(0.0); }

} // namespace

QuadHamiltonian solve_homological(const NormalForm& N, const PairingForm& A, const QuadHamiltonian& R,
                                  const SmallDivisorReport& report)
{
    if (R.angles() != N.angles() || R.lattice_cutoff() != N.lattice_cutoff())
        throw ClassError("normal form and right-hand side live on different phase spaces");
    const int cut = N.lattice_cutoff();
    const int S = R.sites();
    const int d = R.angles();
    QuadHamiltonian F(d, cut, R.fourier_cutoff(), R.real());
    std::vector<std::pair<const KVec*, FourierMode*>> work;
    for (const auto& [k, md] : R.modes()) work.emplace_back(&k, &F.mode(k));
    auto idx = [cut](int s) { return s + cut; };

    parallel_for(work.size(), [&](std::size_t t) {
        const KVec& k = *work[t].first;
        FourierMode& out = *work[t].second;
        const FourierMode& rm = *R.find_mode(k);
        const bool k0 = is_zero(k);
        if (!k0) {
            if (rm.constant != cplx(0.0)) {
                const BlockSystem b = assemble_block(N, A, k, 0, 0, Component::F0, &R);
                gate(report, DivisorFamily::Scalar, k, 0, 0, inverse_norm(b.matrix));
                out.constant = b.rhs[0] / b.matrix(0, 0);
            }
            if (rm.action.size() && !rm.action.isZero(0.0)) {
                out.action = Eigen::VectorXcd::Zero(d);
                for (int j = 0; j < d; ++j) {
                    if (rm.action[j] == cplx(0.0)) continue;
                    const BlockSystem b = assemble_block(N, A, k, j, 0, Component::F1, &R);
                    gate(report, DivisorFamily::Scalar, k, 0, 0, inverse_norm(b.matrix));
                    out.action[j] = b.rhs[0] / b.matrix(0, 0);
                }
            }
        }
        auto solve_linear = [&](Component c, Eigen::VectorXcd& dst) {
            for (int n = 0; n <= cut; ++n) {
                const BlockSystem b = assemble_block(N, A, k, n, 0, c, &R);
                if (!touched(b)) continue;
                if (is_singular(b.matrix)) gate(report, DivisorFamily::Pair, k, n, 0, std::numeric_limits<double>::infinity());
                const Eigen::MatrixXcd inv = block_inverse(b.matrix);
                gate(report, DivisorFamily::Pair, k, n, 0, spectral_norm(inv));
                const Eigen::VectorXcd x = inv * b.rhs;
                if (dst.size() == 0) dst = Eigen::VectorXcd::Zero(S);
                for (int i = 0; i < b.dim; ++i) dst[idx(b.first_sites[i])] = x[i];
            }
        };
        if (rm.z.size()) solve_linear(Component::F10, out.z);
        if (rm.zbar.size()) solve_linear(Component::F01, out.zbar);

        auto solve_quadratic = [&](Component c, const Eigen::MatrixXcd& src, Eigen::MatrixXcd& dst) {
            const bool symmetric = c != Component::F11;
            for (int n = 0; n <= cut; ++n) {
                for (int m = symmetric ? n : 0; m <= cut; ++m) {
                    if (c == Component::F11 && k0 && n == m) continue;
                    const cplx zero(0.0);
                    const bool any = src(idx(n), idx(m)) != zero || src(idx(n), idx(-m)) != zero
                                     || src(idx(-n), idx(m)) != zero || src(idx(-n), idx(-m)) != zero;
                    if (!any) continue;
                    const BlockSystem b = assemble_block(N, A, k, n, m, c, &R);
                    const bool singular = is_singular(b.matrix);
                    Eigen::MatrixXcd inv;
                    if (!singular) inv = block_inverse(b.matrix);
                    const double v = singular ? std::numeric_limits<double>::infinity() : spectral_norm(inv);
                    if (c == Component::F11) {
                        if (!k0)
                            gate(report, DivisorFamily::Difference, k, n, m, v);
                        else if (!std::isfinite(v))
                            throw ResonanceError("singular averaged difference block", k, n, m, "difference");
                    } else {
                        gate(report, DivisorFamily::Sum, k, n, m, v);
                    }
                    const Eigen::VectorXcd x = inv * b.rhs;
                    if (dst.size() == 0) dst = Eigen::MatrixXcd::Zero(S, S);
                    const std::size_t q = b.second_sites.size();
                    for (std::size_t i = 0; i < b.first_sites.size(); ++i)
                        for (std::size_t j = 0; j < q; ++j) {
                            const int r = idx(b.first_sites[i]), s = idx(b.second_sites[j]);
                            dst(r, s) = x[static_cast<Eigen::Index>(i * q + j)];
                            if (symmetric) dst(s, r) = dst(r, s);
                        }
                }
            }
        };
        if (rm.zzbar.size()) solve_quadratic(Component::F11, rm.zzbar, out.zzbar);
        if (rm.zz.size()) solve_quadratic(Component::F20, rm.zz, out.zz);
        if (rm.zbarzbar.size()) solve_quadratic(Component::F02, rm.zbarzbar, out.zbarzbar);
    });
    F.prune();
    return F;
}

QuadHamiltonian homological_defect(const NormalForm& N, const PairingForm& A, const QuadHamiltonian& F,
                                   const QuadHamiltonian& R)
{
    QuadHamiltonian out = poisson_bracket(to_hamiltonian(N, A), F);
    out += R;
    out -= generalized_mean(R);
    const cplx c0 = average_constant(R);
    if (c0 != cplx(0.0)) out.add(MonomialKey::constant(KVec(R.angles(), 0)), -c0);
    out.prune();
    return out;
}

double homological_residual(const NormalForm& N, const PairingForm& A, const QuadHamiltonian& F,
                            const QuadHamiltonian& R, const DomainParams& D, double beta)
{
    return gamma_beta_seminorm(homological_defect(N, A, F, R), D, beta).value;
}

QuadHamiltonian random_decaying_perturbation(int angles, int lattice_cutoff, const RandomSeedOptions& opts,
                                             std::uint64_t seed)
{
    opts.domain.validate();
    if (opts.K < 0 || lattice_cutoff < 0) throw ParameterError("K and the lattice cutoff must be nonnegative");
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double twopi = 2.0 * std::acos(-1.0);
    auto draw = [&](double bound) { return bound * unit(gen) * std::polar(1.0, twopi * unit(gen)); };
    const int N = lattice_cutoff;
    const double rho = opts.domain.rho, b = opts.beta, r = opts.domain.r;
    auto w1 = [&](int n) { return r * std::exp(-std::abs(n) * rho) * std::pow(angle_bracket(n), -b); };
    auto w2 = [&](int n, int m, int sign) {
        return std::exp(-std::abs(n + sign * m) * rho) * std::pow(angle_bracket(n) * angle_bracket(m), -b);
    };
    QuadHamiltonian R(angles, N, opts.averaged_only ? 0 : opts.K, true);
    const auto ks = opts.averaged_only ? std::vector<KVec>{KVec(angles, 0)} : enumerate_kvecs(angles, opts.K);
    for (const KVec& k : ks) {
        const double c = opts.scale * std::exp(-l1_norm(k) * opts.domain.s);
        for (int n = -N; n <= N; ++n)
            for (int m = -N; m <= N; ++m) R.add(MonomialKey::zzbar(k, n, m), c * draw(w2(n, m, -1)));
        if (opts.zzbar_only) continue;
        R.add(MonomialKey::constant(k), c * draw(r * r));
        for (int j = 0; j < angles; ++j) R.add(MonomialKey::action(k, j), c * draw(1.0));
        for (int n = -N; n <= N; ++n) {
            R.add(MonomialKey::z(k, n), c * draw(w1(n)));
            R.add(MonomialKey::zbar(k, n), c * draw(w1(n)));
            for (int m = n; m <= N; ++m) {
                R.add(MonomialKey::zz(k, n, m), c * draw(w2(n, m, 1)));
                R.add(MonomialKey::zbarzbar(k, n, m), c * draw(w2(n, m, 1)));
            }
        }
    }
    R.enforce_reality();
    return R;
}

} // namespace subkam
