#include "subkam/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "subkam/errors.hpp"
#include "subkam/parallel.hpp"

namespace subkam {

PhasePoint PhasePoint::zero(int angles, int lattice_cutoff)
{
    const int S = 2 * lattice_cutoff + 1;
    return {Eigen::VectorXd::Zero(angles), Eigen::VectorXcd::Zero(angles), Eigen::VectorXcd::Zero(S),
            Eigen::VectorXcd::Zero(S)};
}

Eigen::VectorXcd PhasePoint::flat() const
{
    Eigen::VectorXcd out(theta.size() + action.size() + z.size() + zbar.size());
    out << theta.cast<cplx>(), action, z, zbar;
    return out;
}

Eigen::VectorXcd PhaseGradient::flat() const
{
    Eigen::VectorXcd out(theta.size() + action.size() + z.size() + zbar.size());
    out << theta, action, z, zbar;
    return out;
}

namespace {

Eigen::MatrixXcd symmetrized(const Eigen::MatrixXcd& M) { return M + M.transpose(); }

// G(X, Y) = sum_n dX/dz_n dY/dzbar_n, added to out.
void add_g(const FourierMode& X, const FourierMode& Y, cplx scale, FourierMode& out)
{
    const bool xu = X.z.size(), xa = X.zz.size(), xb = X.zzbar.size();
    const bool yv = Y.zbar.size(), yb = Y.zzbar.size(), yc = Y.zbarzbar.size();
    if (xu && yv) out.constant += scale * X.z.cwiseProduct(Y.zbar).sum();
    if (xu && yb) accumulate(out.z, Y.zzbar * X.z, scale);
    if (xa && yv) accumulate(out.z, X.zz * Y.zbar, scale);
    if (xu && yc) accumulate(out.zbar, Y.zbarzbar * X.z, scale);
    if (xb && yv) accumulate(out.zbar, X.zzbar.transpose() * Y.zbar, scale);
    if (xa && yb) accumulate(out.zz, symmetrized(X.zz * Y.zzbar.transpose()), scale);
    if (xa && yc) accumulate(out.zzbar, X.zz * Y.zbarzbar, scale);
    if (yb && xb) accumulate(out.zzbar, Y.zzbar * X.zzbar, scale);
    if (xb && yc) accumulate(out.zbarzbar, symmetrized(X.zzbar.transpose() * Y.zbarzbar), scale);
}

cplx k_dot(const KVec& k, const Eigen::VectorXcd& a)
{
    cplx s = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) s += static_cast<double>(k[j]) * a[static_cast<Eigen::Index>(j)];
    return s;
}

void add_scaled(FourierMode& out, const FourierMode& src, cplx s)
{
    out.constant += s * src.constant;
    accumulate(out.action, src.action, s);
    accumulate(out.z, src.z, s);
    accumulate(out.zbar, src.zbar, s);
    accumulate(out.zz, src.zz, s);
    accumulate(out.zzbar, src.zzbar, s);
    accumulate(out.zbarzbar, src.zbarzbar, s);
}

void bracket_pair(const KVec& k1, const FourierMode& X, const KVec& k2, const FourierMode& Y, FourierMode& out)
{
    const cplx I(0.0, 1.0);
    if (Y.action.size()) {
        const cplx c = I * k_dot(k1, Y.action);
        if (c != cplx(0.0)) add_scaled(out, X, c);
    }
    if (X.action.size()) {
        const cplx c = -I * k_dot(k2, X.action);
        if (c != cplx(0.0)) add_scaled(out, Y, c);
    }
    add_g(X, Y, I, out);
    add_g(Y, X, -I, out);
}

} // namespace

QuadHamiltonian poisson_bracket(const QuadHamiltonian& R, const QuadHamiltonian& F)
{
    if (!R.compatible(F)) throw ClassError("cutoff mismatch in Poisson bracket");
    QuadHamiltonian out(R.angles(), R.lattice_cutoff(), R.fourier_cutoff() + F.fourier_cutoff(),
                        R.real() && F.real());
    using ModeRef = const std::pair<const KVec, FourierMode>*;
    std::map<KVec, std::vector<std::pair<ModeRef, ModeRef>>> targets;
    for (const auto& x : R.modes()) {
        for (const auto& y : F.modes()) {
            targets[add(x.first, y.first)].emplace_back(&x, &y);
        }
    }
    std::vector<std::pair<FourierMode*, const std::vector<std::pair<ModeRef, ModeRef>>*>> work;
    for (const auto& [k, pairs] : targets) work.emplace_back(&out.mode(k), &pairs);
    parallel_for(work.size(), [&](std::size_t t) {
        for (const auto& [x, y] : *work[t].second) bracket_pair(x->first, x->second, y->first, y->second, *work[t].first);
    });
    out.prune();
    return out;
}

QuadHamiltonian truncate(const QuadHamiltonian& P, int K)
{
    if (K < 1) throw ParameterError("truncation order must be positive");
    QuadHamiltonian out(P.angles(), P.lattice_cutoff(), K, P.real());
    const Lattice& L = P.lattice();
    const int S = P.sites();
    for (const auto& [k, md] : P.modes()) {
        if (l1_norm(k) > K) continue;
        FourierMode r;
        r.constant = md.constant;
        r.action = md.action;
        auto keep_linear = [&](const Eigen::VectorXcd& v) {
            Eigen::VectorXcd w = v;
            for (int i = 0; i < S; ++i)
                if (std::abs(L.site(i)) > K) w[i] = 0.0;
            return w;
        };
        auto keep_quadratic = [&](const Eigen::MatrixXcd& M, int sign) {
            Eigen::MatrixXcd W = M;
            for (int i = 0; i < S; ++i)
                for (int j = 0; j < S; ++j)
                    if (std::abs(L.site(i) + sign * L.site(j)) > K) W(i, j) = 0.0;
            return W;
        };
        if (md.z.size()) r.z = keep_linear(md.z);
        if (md.zbar.size()) r.zbar = keep_linear(md.zbar);
        if (md.zz.size()) r.zz = keep_quadratic(md.zz, 1);
        if (md.zzbar.size()) r.zzbar = keep_quadratic(md.zzbar, -1);
        if (md.zbarzbar.size()) r.zbarzbar = keep_quadratic(md.zbarzbar, 1);
        out.mode(k) = std::move(r);
    }
    out.prune();
    return out;
}

QuadHamiltonian generalized_mean(const QuadHamiltonian& R)
{
    QuadHamiltonian out(R.angles(), R.lattice_cutoff(), 0, R.real());
    const KVec zero(R.angles(), 0);
    const FourierMode* md = R.find_mode(zero);
    if (!md) return out;
    FourierMode r;
    r.action = md->action;
    if (md->zzbar.size()) {
        const int S = R.sites();
        r.zzbar = Eigen::MatrixXcd::Zero(S, S);
        for (int i = 0; i < S; ++i) {
            r.zzbar(i, i) = md->zzbar(i, i);
            r.zzbar(i, S - 1 - i) = md->zzbar(i, S - 1 - i);
        }
    }
    out.mode(zero) = std::move(r);
    out.prune();
    return out;
}

cplx average_constant(const QuadHamiltonian& R)
{
    const FourierMode* md = R.find_mode(KVec(R.angles(), 0));
    return md ? md->constant : cplx(0.0);
}

namespace {

cplx phase(const KVec& k, const Eigen::VectorXd& theta) { return std::exp(cplx(0.0, dot(k, theta))); }

cplx mode_value(const FourierMode& md, const PhasePoint& x)
{
    cplx v = md.constant;
    if (md.action.size()) v += md.action.cwiseProduct(x.action).sum();
    if (md.z.size()) v += md.z.cwiseProduct(x.z).sum();
    if (md.zbar.size()) v += md.zbar.cwiseProduct(x.zbar).sum();
    if (md.zz.size()) v += 0.5 * (x.z.transpose() * md.zz * x.z).value();
    if (md.zzbar.size()) v += (x.z.transpose() * md.zzbar * x.zbar).value();
    if (md.zbarzbar.size()) v += 0.5 * (x.zbar.transpose() * md.zbarzbar * x.zbar).value();
    return v;
}

} // namespace

cplx evaluate(const QuadHamiltonian& H, const PhasePoint& x)
{
    cplx out = 0.0;
    for (const auto& [k, md] : H.modes()) out += phase(k, x.theta) * mode_value(md, x);
    return out;
}

PhaseGradient gradient(const QuadHamiltonian& H, const PhasePoint& x)
{
    const int d = H.angles();
    const int S = H.sites();
    PhaseGradient g{Eigen::VectorXcd::Zero(d), Eigen::VectorXcd::Zero(d), Eigen::VectorXcd::Zero(S),
                    Eigen::VectorXcd::Zero(S)};
    for (const auto& [k, md] : H.modes()) {
        const cplx e = phase(k, x.theta);
        const cplx v = mode_value(md, x);
        for (int j = 0; j < d; ++j) g.theta[j] += cplx(0.0, k[j]) * e * v;
        if (md.action.size()) g.action += e * md.action;
        if (md.z.size()) g.z += e * md.z;
        if (md.zbar.size()) g.zbar += e * md.zbar;
        if (md.zz.size()) g.z += e * (md.zz * x.z);
        if (md.zzbar.size()) {
            g.z += e * (md.zzbar * x.zbar);
            g.zbar += e * (md.zzbar.transpose() * x.z);
        }
        if (md.zbarzbar.size()) g.zbar += e * (md.zbarzbar * x.zbar);
    }
    return g;
}

QuadHamiltonian action_derivative(const QuadHamiltonian& H, int j)
{
    if (j < 0 || j >= H.angles()) throw ParameterError("action index out of range");
    QuadHamiltonian out(H.angles(), H.lattice_cutoff(), H.fourier_cutoff(), H.real());
    for (const auto& [k, md] : H.modes())
        if (md.action.size() && md.action[j] != cplx(0.0)) out.mode(k).constant = md.action[j];
    return out;
}

QuadHamiltonian angle_derivative(const QuadHamiltonian& H, int j)
{
    if (j < 0 || j >= H.angles()) throw ParameterError("angle index out of range");
    QuadHamiltonian out(H.angles(), H.lattice_cutoff(), H.fourier_cutoff(), H.real());
    for (const auto& [k, md] : H.modes()) {
        if (k[j] == 0) continue;
        FourierMode r = md;
        r *= cplx(0.0, k[j]);
        out.mode(k) = std::move(r);
    }
    return out;
}

QuadHamiltonian site_derivative(const QuadHamiltonian& H, int n, bool conjugate)
{
    if (!H.lattice().contains(n)) throw ParameterError("site outside lattice cutoff");
    const int i = H.lattice().index(n);
    QuadHamiltonian out(H.angles(), H.lattice_cutoff(), H.fourier_cutoff(), false);
    for (const auto& [k, md] : H.modes()) {
        FourierMode r;
        if (!conjugate) {
            if (md.z.size()) r.constant = md.z[i];
            if (md.zz.size()) r.z = md.zz.row(i).transpose();
            if (md.zzbar.size()) r.zbar = md.zzbar.row(i).transpose();
        } else {
            if (md.zbar.size()) r.constant = md.zbar[i];
            if (md.zzbar.size()) r.z = md.zzbar.col(i);
            if (md.zbarzbar.size()) r.zbar = md.zbarzbar.row(i).transpose();
        }
        if (!r.empty()) out.mode(k) = std::move(r);
    }
    out.prune();
    return out;
}

double max_coefficient(const QuadHamiltonian& H)
{
    double m = 0.0;
    H.for_each_term([&](const MonomialKey&, cplx c) { m = std::max(m, std::abs(c)); });
    return m;
}

namespace {

double mode_size(const FourierMode& md)
{
    double m = std::abs(md.constant);
    auto upd = [&](const auto& x) {
        if (x.size()) m = std::max(m, x.cwiseAbs().maxCoeff());
    };
    upd(md.action);
    upd(md.z);
    upd(md.zbar);
    upd(md.zz);
    upd(md.zzbar);
    upd(md.zbarzbar);
    return m;
}

} // namespace

QuadHamiltonian drop_small_modes(const QuadHamiltonian& H, double width, double rel)
{
    std::vector<std::pair<KVec, double>> sizes;
    double top = 0.0;
    for (const auto& [k, md] : H.modes()) {
        const double w = mode_size(md) * std::exp(width * l1_norm(k));
        sizes.emplace_back(k, w);
        top = std::max(top, w);
    }
    QuadHamiltonian out = H;
    for (const auto& [k, w] : sizes)
        if (!is_zero(k) && w < rel * top) out.erase_mode(k);
    return out;
}

} // namespace subkam
