#include "subkam/spaces.hpp"

#include <cmath>
#include <limits>

#include "subkam/errors.hpp"

namespace subkam {

WeightedSeq::WeightedSeq(int cutoff, Eigen::VectorXcd values) : lattice_{cutoff}, values_(std::move(values))
{
    if (values_.size() != lattice_.size()) throw ParameterError("sequence length does not match cutoff");
}

cplx WeightedSeq::at(int n) const
{
    if (!lattice_.contains(n)) throw ParameterError("site outside cutoff");
    return values_[lattice_.index(n)];
}

void WeightedSeq::set(int n, cplx v)
{
    if (!lattice_.contains(n)) throw ParameterError("site outside cutoff");
    values_[lattice_.index(n)] = v;
}

void DomainParams::validate() const
{
    if (!(s > 0.0) || !(r > 0.0) || !(rho > 0.0) || !(p > 0.0)) throw ParameterError("domain parameters must be positive");
    if (d < 1) throw ParameterError("number of angles must be positive");
}

Eigen::VectorXd site_weights(int cutoff, double rho, double p)
{
    Eigen::VectorXd w(2 * cutoff + 1);
    for (int n = -cutoff; n <= cutoff; ++n) w[n + cutoff] = std::exp(std::abs(n) * rho) * std::pow(angle_bracket(n), p);
    return w;
}

Eigen::VectorXd site_majorants(int cutoff, const DomainParams& D)
{
    return D.r * site_weights(cutoff, D.rho, D.p).cwiseInverse();
}

double weighted_norm(const WeightedSeq& w, double rho, double p)
{
    if (rho < 0.0 || p < 0.0) throw ParameterError("weights must be nonnegative");
    return w.values().cwiseProduct(site_weights(w.cutoff(), rho, p).cast<cplx>()).norm();
}

double phase_vector_norm(const PhaseVector& W, double r, double rho, double p)
{
    if (!(r > 0.0)) throw ParameterError("radius must be positive");
    auto sup = [](const Eigen::VectorXcd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; };
    double out = sup(W.X) + sup(W.Y) / (r * r);
    if (W.U.values().size()) out += weighted_norm(W.U, rho, p) / r;
    if (W.V.values().size()) out += weighted_norm(W.V, rho, p) / r;
    return out;
}

std::string to_string(SeminormCondition c)
{
    switch (c) {
    case SeminormCondition::None: return "none";
    case SeminormCondition::Value: return "value";
    case SeminormCondition::ActionGradient: return "action_gradient";
    case SeminormCondition::FirstDerivative: return "first_derivative";
    case SeminormCondition::SecondDerivative: return "second_derivative";
    case SeminormCondition::PureSecond: return "pure_second_derivative";
    case SeminormCondition::DiagonalSecond: return "diagonal_second_derivative";
    case SeminormCondition::AntiDiagonalSecond: return "antidiagonal_second_derivative";
    case SeminormCondition::OscillatingSecond: return "oscillating_second_derivative";
    case SeminormCondition::AveragedSecond: return "averaged_second_derivative";
    }
    return "?";
}

namespace {

double mode_weight(const KVec& k, double s) { return std::exp(l1_norm(k) * s); }

// Sup bound of a single Fourier mode over the sequence ball (without the e^{|k|s} factor).
double mode_sup(const FourierMode& md, const Eigen::VectorXd& zeta, double r)
{
    double out = std::abs(md.constant);
    if (md.action.size()) out += r * r * md.action.cwiseAbs().sum();
    if (md.z.size()) out += md.z.cwiseAbs().dot(zeta);
    if (md.zbar.size()) out += md.zbar.cwiseAbs().dot(zeta);
    if (md.zz.size()) out += 0.5 * zeta.dot(md.zz.cwiseAbs() * zeta);
    if (md.zzbar.size()) out += zeta.dot(md.zzbar.cwiseAbs() * zeta);
    if (md.zbarzbar.size()) out += 0.5 * zeta.dot(md.zbarzbar.cwiseAbs() * zeta);
    return out;
}

// Majorant sums shared by both seminorms.
struct Aggregates {
    double value = 0.0;
    Eigen::VectorXd action;
    Eigen::VectorXd first_z;
    Eigen::VectorXd first_zbar;
    Eigen::MatrixXd zz;
    Eigen::MatrixXd zzbar;
    Eigen::MatrixXd zbarzbar;
    Eigen::MatrixXd zzbar_oscillating;
    Eigen::MatrixXd zzbar_average;
};

Aggregates aggregate(const QuadHamiltonian& P, const DomainParams& D)
{
    const int S = P.sites();
    const Eigen::VectorXd zeta = site_majorants(P.lattice_cutoff(), D);
    Aggregates a;
    a.action = Eigen::VectorXd::Zero(P.angles());
    a.first_z = Eigen::VectorXd::Zero(S);
    a.first_zbar = Eigen::VectorXd::Zero(S);
    a.zz = Eigen::MatrixXd::Zero(S, S);
    a.zzbar = Eigen::MatrixXd::Zero(S, S);
    a.zbarzbar = Eigen::MatrixXd::Zero(S, S);
    a.zzbar_oscillating = Eigen::MatrixXd::Zero(S, S);
    a.zzbar_average = Eigen::MatrixXd::Zero(S, S);
    for (const auto& [k, md] : P.modes()) {
        const double ek = mode_weight(k, D.s);
        a.value += ek * mode_sup(md, zeta, D.r);
        if (md.action.size()) a.action += ek * md.action.cwiseAbs();
        if (md.z.size()) a.first_z += ek * md.z.cwiseAbs();
        if (md.zbar.size()) a.first_zbar += ek * md.zbar.cwiseAbs();
        if (md.zz.size()) {
            Eigen::MatrixXd abs = md.zz.cwiseAbs();
            a.first_z += ek * (abs * zeta);
            a.zz += ek * abs;
        }
        if (md.zzbar.size()) {
            Eigen::MatrixXd abs = md.zzbar.cwiseAbs();
            a.first_z += ek * (abs * zeta);
            a.first_zbar += ek * (abs.transpose() * zeta);
            a.zzbar += ek * abs;
            if (is_zero(k))
                a.zzbar_average += abs;
            else
                a.zzbar_oscillating += ek * abs;
        }
        if (md.zbarzbar.size()) {
            Eigen::MatrixXd abs = md.zbarzbar.cwiseAbs();
            a.first_zbar += ek * (abs * zeta);
            a.zbarzbar += ek * abs;
        }
    }
    return a;
}

double first_weight(int n, const DomainParams& D, double beta)
{
    return D.r * std::exp(-std::abs(n) * D.rho) * std::pow(angle_bracket(n), -beta);
}

double second_weight(int n, int m, int iota1, int iota2, double rho, double beta)
{
    return std::exp(-std::abs(iota1 * n + iota2 * m) * rho) * std::pow(angle_bracket(n) * angle_bracket(m), -beta);
}

double frequency_gap(int n, int m, double alpha)
{
    return std::abs(std::pow(std::abs(n), alpha) - std::pow(std::abs(m), alpha));
}

// Later conditions win exact ties so that the most specific family is reported.
class Tracker {
public:
    explicit Tracker(SeminormReport& r) : r_(r) {}
    void offer(double ratio, SeminormCondition c, int n, int m, int i1, int i2)
    {
        constexpr double tie = 1e-12;
        const bool better = ratio > r_.value * (1.0 + tie);
        const bool tie_later = ratio > 0.0 && ratio >= r_.value * (1.0 - tie) && static_cast<int>(c) > static_cast<int>(r_.binding_condition);
        if (better || tie_later) {
            r_.value = std::max(r_.value, ratio);
            r_.binding_condition = c;
            r_.n = n;
            r_.m = m;
            r_.iota1 = i1;
            r_.iota2 = i2;
        }
    }

private:
    SeminormReport& r_;
};

void offer_common(const Aggregates& a, const QuadHamiltonian& P, const DomainParams& D, double beta, Tracker& t)
{
    t.offer(a.value / (D.r * D.r), SeminormCondition::Value, 0, 0, 0, 0);
    for (Eigen::Index j = 0; j < a.action.size(); ++j)
        t.offer(a.action[j], SeminormCondition::ActionGradient, static_cast<int>(j), 0, 0, 0);
    const Lattice& L = P.lattice();
    for (int i = 0; i < L.size(); ++i) {
        const int n = L.site(i);
        const double w = first_weight(n, D, beta);
        t.offer(a.first_z[i] / w, SeminormCondition::FirstDerivative, n, 0, 1, 0);
        t.offer(a.first_zbar[i] / w, SeminormCondition::FirstDerivative, n, 0, -1, 0);
    }
}

double dominant_contribution(const FourierMode& md, const SeminormReport& r, const Lattice& L, const Eigen::VectorXd& zeta,
                             double rdom)
{
    const int i = L.index(r.n);
    const int j = L.index(r.m);
    switch (r.binding_condition) {
    case SeminormCondition::Value: return mode_sup(md, zeta, rdom);
    case SeminormCondition::ActionGradient: return md.action.size() ? std::abs(md.action[r.n]) : 0.0;
    case SeminormCondition::FirstDerivative: {
        double out = 0.0;
        if (r.iota1 > 0) {
            if (md.z.size()) out += std::abs(md.z[i]);
            if (md.zz.size()) out += md.zz.row(i).cwiseAbs().dot(zeta.transpose());
            if (md.zzbar.size()) out += md.zzbar.row(i).cwiseAbs().dot(zeta.transpose());
        } else {
            if (md.zbar.size()) out += std::abs(md.zbar[i]);
            if (md.zzbar.size()) out += md.zzbar.col(i).cwiseAbs().dot(zeta);
            if (md.zbarzbar.size()) out += md.zbarzbar.row(i).cwiseAbs().dot(zeta.transpose());
        }
        return out;
    }
    default: {
        if (r.iota1 > 0 && r.iota2 > 0) return md.zz.size() ? std::abs(md.zz(i, j)) : 0.0;
        if (r.iota1 < 0 && r.iota2 < 0) return md.zbarzbar.size() ? std::abs(md.zbarzbar(i, j)) : 0.0;
        return md.zzbar.size() ? std::abs(md.zzbar(i, j)) : 0.0;
    }
    }
}

void fill_dominant_mode(const QuadHamiltonian& P, const DomainParams& D, SeminormReport& r)
{
    if (r.binding_condition == SeminormCondition::None) return;
    const Eigen::VectorXd zeta = site_majorants(P.lattice_cutoff(), D);
    double best = -1.0;
    for (const auto& [k, md] : P.modes()) {
        if (r.binding_condition == SeminormCondition::AveragedSecond && !is_zero(k)) continue;
        if (r.binding_condition == SeminormCondition::OscillatingSecond && is_zero(k)) continue;
        const double c = mode_weight(k, D.s) * dominant_contribution(md, r, P.lattice(), zeta, D.r);
        if (c > best) {
            best = c;
            r.k = k;
        }
    }
}

} // namespace

double hamiltonian_sup_bound(const QuadHamiltonian& H, const DomainParams& D)
{
    const Eigen::VectorXd zeta = site_majorants(H.lattice_cutoff(), D);
    double out = 0.0;
    for (const auto& [k, md] : H.modes()) out += mode_weight(k, D.s) * mode_sup(md, zeta, D.r);
    return out;
}

double vector_field_majorant(const QuadHamiltonian& H, const DomainParams& D)
{
    const int d = H.angles();
    const int S = H.sites();
    const Eigen::VectorXd zeta = site_majorants(H.lattice_cutoff(), D);
    const Eigen::VectorXd w = site_weights(H.lattice_cutoff(), D.rho, D.p);
    Eigen::VectorXd grad_I = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd grad_theta = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd dz = Eigen::VectorXd::Zero(S);
    Eigen::VectorXd dzbar = Eigen::VectorXd::Zero(S);
    for (const auto& [k, md] : H.modes()) {
        const double ek = mode_weight(k, D.s);
        if (md.action.size()) grad_I += ek * md.action.cwiseAbs();
        const double sup = mode_sup(md, zeta, D.r);
        for (int j = 0; j < d; ++j) grad_theta[j] += ek * std::abs(k[j]) * sup;
        if (md.z.size()) dz += ek * md.z.cwiseAbs();
        if (md.zbar.size()) dzbar += ek * md.zbar.cwiseAbs();
        if (md.zz.size()) dz += ek * (md.zz.cwiseAbs() * zeta);
        if (md.zzbar.size()) {
            dz += ek * (md.zzbar.cwiseAbs() * zeta);
            dzbar += ek * (md.zzbar.cwiseAbs().transpose() * zeta);
        }
        if (md.zbarzbar.size()) dzbar += ek * (md.zbarzbar.cwiseAbs() * zeta);
    }
    const double r = D.r;
    return grad_I.maxCoeff() + grad_theta.maxCoeff() / (r * r) + dz.cwiseProduct(w).norm() / r
        + dzbar.cwiseProduct(w).norm() / r;
}

SeminormReport gamma_beta_seminorm(const QuadHamiltonian& P, const DomainParams& D, double beta)
{
    if (!(beta > 0.0)) throw ParameterError("beta must be positive");
    const Aggregates a = aggregate(P, D);
    SeminormReport rep;
    Tracker t(rep);
    offer_common(a, P, D, beta, t);
    const Lattice& L = P.lattice();
    for (int i = 0; i < L.size(); ++i) {
        for (int j = 0; j < L.size(); ++j) {
            const int n = L.site(i);
            const int m = L.site(j);
            if (j >= i) {
                t.offer(a.zz(i, j) / second_weight(n, m, 1, 1, D.rho, beta), SeminormCondition::SecondDerivative, n, m, 1, 1);
                t.offer(a.zbarzbar(i, j) / second_weight(n, m, -1, -1, D.rho, beta), SeminormCondition::SecondDerivative,
                        n, m, -1, -1);
            }
            t.offer(a.zzbar(i, j) / second_weight(n, m, 1, -1, D.rho, beta), SeminormCondition::SecondDerivative, n, m,
                    1, -1);
        }
    }
    fill_dominant_mode(P, D, rep);
    return rep;
}

SeminormReport gamma_beta_alpha_seminorm(const QuadHamiltonian& P, const DomainParams& D, double beta, double alpha)
{
    if (!(beta > 0.0)) throw ParameterError("beta must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
    const Aggregates a = aggregate(P, D);
    SeminormReport rep;
    Tracker t(rep);
    offer_common(a, P, D, beta, t);
    const Lattice& L = P.lattice();
    for (int i = 0; i < L.size(); ++i) {
        const int n = L.site(i);
        for (int j = i; j < L.size(); ++j) {
            const int m = L.site(j);
            t.offer(a.zz(i, j) / second_weight(n, m, 1, 1, D.rho, beta), SeminormCondition::PureSecond, n, m, 1, 1);
            t.offer(a.zbarzbar(i, j) / second_weight(n, m, -1, -1, D.rho, beta), SeminormCondition::PureSecond, n, m, -1,
                    -1);
        }
    }
    for (int i = 0; i < L.size(); ++i) {
        const int n = L.site(i);
        t.offer(a.zzbar(i, i) / std::pow(angle_bracket(n), -2.0 * beta), SeminormCondition::DiagonalSecond, n, n, 1, -1);
        if (n != 0) {
            const int j = L.index(-n);
            t.offer(a.zzbar(i, j) / second_weight(n, -n, 1, -1, D.rho, beta), SeminormCondition::AntiDiagonalSecond, n,
                    -n, 1, -1);
        }
    }
    for (int i = 0; i < L.size(); ++i) {
        for (int j = 0; j < L.size(); ++j) {
            const int n = L.site(i);
            const int m = L.site(j);
            if (std::abs(n) == std::abs(m)) continue;
            const double w = second_weight(n, m, 1, -1, D.rho, beta);
            t.offer(a.zzbar_oscillating(i, j) / w, SeminormCondition::OscillatingSecond, n, m, 1, -1);
            t.offer(a.zzbar_average(i, j) * frequency_gap(n, m, alpha) / w, SeminormCondition::AveragedSecond, n, m, 1,
                    -1);
        }
    }
    fill_dominant_mode(P, D, rep);
    return rep;
}

double evaluate_binding(const QuadHamiltonian& P, const DomainParams& D, double beta, double alpha,
                        const SeminormReport& r)
{
    const Aggregates a = aggregate(P, D);
    const Lattice& L = P.lattice();
    const int i = L.index(r.n);
    const int j = L.index(r.m);
    switch (r.binding_condition) {
    case SeminormCondition::None: return 0.0;
    case SeminormCondition::Value: return a.value / (D.r * D.r);
    case SeminormCondition::ActionGradient: return a.action[r.n];
    case SeminormCondition::FirstDerivative:
        return (r.iota1 > 0 ? a.first_z[i] : a.first_zbar[i]) / first_weight(r.n, D, beta);
    case SeminormCondition::SecondDerivative:
    case SeminormCondition::PureSecond:
    case SeminormCondition::AntiDiagonalSecond: {
        const double w = second_weight(r.n, r.m, r.iota1, r.iota2, D.rho, beta);
        if (r.iota1 > 0 && r.iota2 > 0) return a.zz(i, j) / w;
        if (r.iota1 < 0 && r.iota2 < 0) return a.zbarzbar(i, j) / w;
        return a.zzbar(i, j) / w;
    }
    case SeminormCondition::DiagonalSecond: return a.zzbar(i, i) / std::pow(angle_bracket(r.n), -2.0 * beta);
    case SeminormCondition::OscillatingSecond:
        return a.zzbar_oscillating(i, j) / second_weight(r.n, r.m, 1, -1, D.rho, beta);
    case SeminormCondition::AveragedSecond:
        return a.zzbar_average(i, j) * frequency_gap(r.n, r.m, alpha) / second_weight(r.n, r.m, 1, -1, D.rho, beta);
    }
    return 0.0;
}

double lipschitz_seminorm(const std::vector<std::pair<Eigen::VectorXd, cplx>>& values)
{
    if (values.size() < 2) throw ParameterError("Lipschitz seminorm needs at least two samples");
    double out = 0.0;
    for (std::size_t a = 0; a < values.size(); ++a) {
        for (std::size_t b = a + 1; b < values.size(); ++b) {
            const double dist = (values[a].first - values[b].first).norm();
            if (dist == 0.0) continue;
            out = std::max(out, std::abs(values[a].second - values[b].second) / dist);
        }
    }
    return out;
}

} // namespace subkam
