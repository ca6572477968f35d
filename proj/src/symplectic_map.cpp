#include "subkam/symplectic_map.hpp"

#include <algorithm>
#include <cmath>

#include "subkam/errors.hpp"

namespace subkam {

namespace {

cplx phase(const KVec& k, const Eigen::VectorXd& theta) { return std::exp(cplx(0.0, dot(k, theta))); }

void add_shifted(QuadHamiltonian& out, const QuadHamiltonian& src, const KVec& shift, cplx scale)
{
    for (const auto& [l, md] : src.modes()) {
        FourierMode m = md;
        m *= scale;
        out.mode(add(shift, l)) += m;
    }
}

// Writes 1/2 Zᵀ Q Z (Q symmetric, Z = (z, zbar)) into the quadratic blocks of a mode.
void add_quadratic(FourierMode& md, const Eigen::MatrixXcd& Q, int S)
{
    accumulate(md.zz, Q.topLeftCorner(S, S));
    accumulate(md.zzbar, Q.topRightCorner(S, S));
    accumulate(md.zbarzbar, Q.bottomRightCorner(S, S));
}

void add_linear(FourierMode& md, const Eigen::VectorXcd& w, int S)
{
    accumulate(md.z, w.head(S));
    accumulate(md.zbar, w.tail(S));
}

// H(theta, I', Z') with I' = images(theta, I, Z) and Z' = sum_l e^{il theta}(T_l + U_l Z).
QuadHamiltonian substitute(const QuadHamiltonian& H, const std::vector<QuadHamiltonian>& images,
                           const std::map<KVec, Eigen::VectorXcd>& T, const std::map<KVec, Eigen::MatrixXcd>& U)
{
    const int S = H.sites();
    const int D = 2 * S;
    int kmax = H.fourier_cutoff();
    for (const auto& g : images) kmax = std::max(kmax, g.fourier_cutoff());
    QuadHamiltonian out(H.angles(), H.lattice_cutoff(), kmax, false);
    std::vector<KVec> keys;
    for (const auto& [l, t] : T) keys.push_back(l);
    for (const auto& [l, u] : U)
        if (!T.count(l)) keys.push_back(l);
    auto t_of = [&](const KVec& l) -> Eigen::VectorXcd {
        auto it = T.find(l);
        return it == T.end() ? Eigen::VectorXcd::Zero(D) : it->second;
    };
    auto u_of = [&](const KVec& l) -> Eigen::MatrixXcd {
        auto it = U.find(l);
        return it == U.end() ? Eigen::MatrixXcd::Zero(D, D) : it->second;
    };
    for (const auto& [k, md] : H.modes()) {
        out.mode(k).constant += md.constant;
        if (md.action.size())
            for (Eigen::Index j = 0; j < md.action.size(); ++j)
                if (md.action[j] != cplx(0.0)) add_shifted(out, images[j], k, md.action[j]);
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(D);
        if (md.z.size()) w.head(S) = md.z;
        if (md.zbar.size()) w.tail(S) = md.zbar;
        Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(D, D);
        const bool quad = md.zz.size() || md.zzbar.size() || md.zbarzbar.size();
        if (md.zz.size()) Q.topLeftCorner(S, S) = md.zz;
        if (md.zzbar.size()) {
            Q.topRightCorner(S, S) = md.zzbar;
            Q.bottomLeftCorner(S, S) = md.zzbar.transpose();
        }
        if (md.zbarzbar.size()) Q.bottomRightCorner(S, S) = md.zbarzbar;
        const bool lin = !w.isZero(0.0);
        for (const KVec& l : keys) {
            const Eigen::VectorXcd tl = t_of(l);
            const Eigen::MatrixXcd ul = u_of(l);
            FourierMode& target = out.mode(add(k, l));
            if (lin) {
                target.constant += w.cwiseProduct(tl).sum();
                add_linear(target, ul.transpose() * w, S);
            }
            if (!quad) continue;
            for (const KVec& l2 : keys) {
                const Eigen::VectorXcd t2 = t_of(l2);
                const Eigen::MatrixXcd u2 = u_of(l2);
                FourierMode& tgt = out.mode(add(add(k, l), l2));
                tgt.constant += 0.5 * (tl.transpose() * Q * t2).value();
                add_linear(tgt, 0.5 * (u2.transpose() * Q * tl + ul.transpose() * Q * t2), S);
                const Eigen::MatrixXcd M = ul.transpose() * Q * u2;
                add_quadratic(tgt, 0.5 * (M + M.transpose()), S);
            }
        }
    }
    out.prune();
    return out;
}

} // namespace

SymplecticMap make_map(int angles, int lattice_cutoff)
{
    SymplecticMap phi;
    phi.d_ = angles;
    phi.cutoff_ = lattice_cutoff;
    for (int j = 0; j < angles; ++j) {
        QuadHamiltonian I(angles, lattice_cutoff, 0);
        I.set(MonomialKey::action(KVec(angles, 0), j), 1.0);
        phi.action_images.push_back(std::move(I));
        phi.angle_shifts.emplace_back(angles, lattice_cutoff, 0);
    }
    return phi;
}

SymplecticMap SymplecticMap::identity(int angles, int lattice_cutoff)
{
    SymplecticMap phi = make_map(angles, lattice_cutoff);
    const int D = 2 * phi.sites();
    phi.U[KVec(angles, 0)] = Eigen::MatrixXcd::Identity(D, D);
    return phi;
}

bool SymplecticMap::theta_identity() const
{
    return std::all_of(angle_shifts.begin(), angle_shifts.end(), [](const QuadHamiltonian& s) { return s.is_zero(); });
}

Eigen::VectorXcd SymplecticMap::z_offset(const Eigen::VectorXd& theta) const
{
    Eigen::VectorXcd t = Eigen::VectorXcd::Zero(2 * sites());
    for (const auto& [k, v] : T) t += phase(k, theta) * v;
    return t;
}

Eigen::MatrixXcd SymplecticMap::z_matrix(const Eigen::VectorXd& theta) const
{
    const int D = 2 * sites();
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(D, D);
    for (const auto& [k, m] : U) u += phase(k, theta) * m;
    return u;
}

PhasePoint SymplecticMap::apply(const PhasePoint& x) const
{
    const int S = sites();
    PhasePoint y = x;
    for (int j = 0; j < d_; ++j) {
        y.theta[j] = x.theta[j] + evaluate(angle_shifts[j], x).real();
        y.action[j] = evaluate(action_images[j], x);
    }
    Eigen::VectorXcd Z(2 * S);
    Z << x.z, x.zbar;
    const Eigen::VectorXcd out = z_offset(x.theta) + z_matrix(x.theta) * Z;
    y.z = out.head(S);
    y.zbar = out.tail(S);
    return y;
}

Eigen::MatrixXcd SymplecticMap::jacobian(const PhasePoint& x) const
{
    const int S = sites();
    const int D = 2 * S;
    const int n = phase_dim();
    Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(n, n);
    for (int j = 0; j < d_; ++j) {
        J.row(j) = gradient(angle_shifts[j], x).flat().transpose();
        J(j, j) += 1.0;
        J.row(d_ + j) = gradient(action_images[j], x).flat().transpose();
    }
    Eigen::VectorXcd Z(D);
    Z << x.z, x.zbar;
    for (const auto& [k, t] : T) {
        const cplx e = phase(k, x.theta);
        for (int j = 0; j < d_; ++j) J.block(2 * d_, j, D, 1) += cplx(0.0, k[j]) * e * t;
    }
    for (const auto& [k, u] : U) {
        const cplx e = phase(k, x.theta);
        const Eigen::VectorXcd uz = u * Z;
        for (int j = 0; j < d_; ++j) J.block(2 * d_, j, D, 1) += cplx(0.0, k[j]) * e * uz;
        J.block(2 * d_, 2 * d_, D, D) += e * u;
    }
    return J;
}

SymplecticMap compose(const SymplecticMap& first, const SymplecticMap& second)
{
    if (first.angles() != second.angles() || first.lattice_cutoff() != second.lattice_cutoff())
        throw ClassError("cannot compose maps on different phase spaces");
    if (!first.theta_identity()) throw ClassError("composition requires the inner map to fix the angles");
    SymplecticMap out = make_map(first.angles(), first.lattice_cutoff());
    out.angle_shifts = second.angle_shifts;
    for (const auto& [k, t2] : second.T) {
        auto& slot = out.T[k];
        if (slot.size() == 0) slot = Eigen::VectorXcd::Zero(t2.size());
        slot += t2;
    }
    for (const auto& [k, u2] : second.U) {
        for (const auto& [l, t1] : first.T) {
            auto& slot = out.T[add(k, l)];
            if (slot.size() == 0) slot = Eigen::VectorXcd::Zero(t1.size());
            slot += u2 * t1;
        }
        for (const auto& [l, u1] : first.U) {
            auto& slot = out.U[add(k, l)];
            if (slot.size() == 0) slot = Eigen::MatrixXcd::Zero(u1.rows(), u1.cols());
            slot += u2 * u1;
        }
    }
    for (int j = 0; j < first.angles(); ++j)
        out.action_images[j] = substitute(second.action_images[j], first.action_images, first.T, first.U);
    return out;
}

Eigen::MatrixXcd symplectic_form(int angles, int sites)
{
    const int n = 2 * angles + 2 * sites;
    Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(n, n);
    for (int j = 0; j < angles; ++j) {
        J(angles + j, j) = 1.0;
        J(j, angles + j) = -1.0;
    }
    const int z0 = 2 * angles;
    for (int i = 0; i < sites; ++i) {
        J(z0 + i, z0 + sites + i) = cplx(0.0, 1.0);
        J(z0 + sites + i, z0 + i) = cplx(0.0, -1.0);
    }
    return J;
}

double symplectic_defect(const Eigen::MatrixXcd& D, int angles, int sites)
{
    const Eigen::MatrixXcd J = symplectic_form(angles, sites);
    return (D.transpose() * J * D - J).norm();
}

double symplectic_residual(const SymplecticMap& phi, const std::vector<PhasePoint>& samples)
{
    if (samples.empty()) throw ParameterError("symplectic residual needs at least one sample");
    double out = 0.0;
    for (const auto& x : samples) out = std::max(out, symplectic_defect(phi.jacobian(x), phi.angles(), phi.sites()));
    return out;
}

PhasePoint TransformChain::apply(const PhasePoint& x) const
{
    PhasePoint y = x;
    for (auto it = maps_.rbegin(); it != maps_.rend(); ++it) y = it->apply(y);
    return y;
}

Eigen::MatrixXcd TransformChain::jacobian(const PhasePoint& x) const
{
    const int n = 2 * d_ + 2 * (2 * cutoff_ + 1);
    Eigen::MatrixXcd J = Eigen::MatrixXcd::Identity(n, n);
    PhasePoint y = x;
    for (auto it = maps_.rbegin(); it != maps_.rend(); ++it) {
        J = it->jacobian(y) * J;
        y = it->apply(y);
    }
    return J;
}

Eigen::MatrixXcd TransformChain::z_matrix(const Eigen::VectorXd& theta) const
{
    const int D = 2 * (2 * cutoff_ + 1);
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(D, D);
    for (const auto& phi : maps_) {
        if (!phi.theta_identity()) throw ClassError("Z-block of the chain requires angle-fixing maps");
        M = M * phi.z_matrix(theta);
    }
    return M;
}

Eigen::VectorXcd TransformChain::z_offset(const Eigen::VectorXd& theta) const
{
    const int D = 2 * (2 * cutoff_ + 1);
    Eigen::VectorXcd t = Eigen::VectorXcd::Zero(D);
    for (auto it = maps_.rbegin(); it != maps_.rend(); ++it) t = it->z_offset(theta) + it->z_matrix(theta) * t;
    return t;
}

double TransformChain::symplectic_residual(const std::vector<PhasePoint>& samples) const
{
    if (samples.empty()) throw ParameterError("symplectic residual needs at least one sample");
    double out = 0.0;
    for (const auto& x : samples) out = std::max(out, symplectic_defect(jacobian(x), d_, 2 * cutoff_ + 1));
    return out;
}

} // namespace subkam
