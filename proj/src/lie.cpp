#include "subkam/lie.hpp"

#include <cmath>
#include <map>
#include <vector>

#include "subkam/algebra.hpp"
#include "subkam/errors.hpp"
#include "subkam/parallel.hpp"

namespace subkam {

double coefficient_l1(const QuadHamiltonian& H)
{
    double s = 0.0;
    for (const auto& [k, md] : H.modes()) {
        s += std::abs(md.constant);
        if (md.action.size()) s += md.action.cwiseAbs().sum();
        if (md.z.size()) s += md.z.cwiseAbs().sum();
        if (md.zbar.size()) s += md.zbar.cwiseAbs().sum();
        if (md.zz.size()) s += md.zz.cwiseAbs().sum();
        if (md.zzbar.size()) s += md.zzbar.cwiseAbs().sum();
        if (md.zbarzbar.size()) s += md.zbarzbar.cwiseAbs().sum();
    }
    return s;
}

namespace {

// Decides when a series sum_j t_j may stop, from the sizes of its terms.
class TailMonitor {
public:
    explicit TailMonitor(const LieOptions& opts) : opts_(opts)
    {
        if (opts.order < 1) throw ParameterError("Lie series order must be positive");
    }

    // Returns true when the term of index j (size s) is the last one needed.
    bool finished(int j, double s)
    {
        const double prev = last_;
        last_ = s;
        if (j < opts_.order) return false;
        if (s == 0.0) {
            tail_ = 0.0;
            return true;
        }
        const double q = prev > 0.0 ? s / prev : 0.0;
        if (q < 1.0) {
            tail_ = s * q / (1.0 - q);
            if (tail_ <= opts_.tail_tol) return true;
        }
        if (j >= opts_.max_order) {
            if (q >= 1.0) throw StepSizeError("Lie series terms are not decreasing; reduce the perturbation or raise the truncation");
            return true;
        }
        return false;
    }

    double tail() const { return tail_; }

private:
    const LieOptions& opts_;
    double last_ = -1.0;
    double tail_ = 0.0;
};

QuadHamiltonian floored(QuadHamiltonian G, const LieOptions& opts)
{
    if (opts.mode_floor <= 0.0) return G;
    return drop_small_modes(G, opts.floor_width, opts.mode_floor);
}

// sum_{m>=1} G_m / m! with G_1 given and G_{m+1} = {G_m, F}.
QuadHamiltonian bracket_series(QuadHamiltonian G, const QuadHamiltonian& F, const LieOptions& opts, double& tail)
{
    QuadHamiltonian sum = G;
    if (G.is_zero()) {
        tail = 0.0;
        return sum;
    }
    TailMonitor mon(opts);
    double fact = 1.0;
    for (int m = 1;; ++m) {
        if (mon.finished(m, coefficient_l1(G) / fact)) break;
        G = floored(poisson_bracket(G, F), opts);
        fact *= m + 1;
        sum += (1.0 / fact) * G;
    }
    tail = mon.tail();
    return sum;
}

struct AffineTerm {
    std::map<KVec, Eigen::VectorXcd> T;
    std::map<KVec, Eigen::MatrixXcd> U;
};

void drop_small_modes(AffineTerm& g, const LieOptions& opts)
{
    if (opts.mode_floor <= 0.0) return;
    std::map<KVec, double> size;
    double top = 0.0;
    for (const auto& [k, v] : g.T) size[k] = std::max(size[k], v.cwiseAbs().maxCoeff());
    for (const auto& [k, m] : g.U) size[k] = std::max(size[k], m.cwiseAbs().maxCoeff());
    for (auto& [k, v] : size) {
        v *= std::exp(opts.floor_width * l1_norm(k));
        top = std::max(top, v);
    }
    for (const auto& [k, v] : size)
        if (!is_zero(k) && v < opts.mode_floor * top) {
            g.T.erase(k);
            g.U.erase(k);
        }
}

double affine_l1(const AffineTerm& g)
{
    double s = 0.0;
    for (const auto& [k, v] : g.T) s += v.cwiseAbs().sum();
    for (const auto& [k, m] : g.U) s += m.cwiseAbs().sum();
    return s;
}

// {G, F} for a vector of affine functions G = T(theta) + U(theta) Z of the angles and Z only.
AffineTerm ad_affine(const AffineTerm& G, const QuadHamiltonian& F)
{
    const int S = F.sites();
    const int D = 2 * S;
    const cplx I(0.0, 1.0);
    std::map<KVec, std::vector<std::pair<KVec, KVec>>> targets;
    std::vector<KVec> gkeys;
    for (const auto& [k, t] : G.T) gkeys.push_back(k);
    for (const auto& [k, u] : G.U)
        if (!G.T.count(k)) gkeys.push_back(k);
    for (const KVec& k1 : gkeys)
        for (const auto& [k2, md] : F.modes()) {
            targets[add(k1, k2)].emplace_back(k1, k2);
        }
    AffineTerm out;
    std::vector<std::pair<Eigen::VectorXcd*, Eigen::MatrixXcd*>> slots;
    std::vector<const std::vector<std::pair<KVec, KVec>>*> lists;
    for (const auto& [k, pairs] : targets) {
        auto& t = out.T[k];
        auto& u = out.U[k];
        t = Eigen::VectorXcd::Zero(D);
        u = Eigen::MatrixXcd::Zero(D, D);
        slots.emplace_back(&t, &u);
        lists.push_back(&pairs);
    }
    parallel_for(slots.size(), [&](std::size_t i) {
        Eigen::VectorXcd& t = *slots[i].first;
        Eigen::MatrixXcd& u = *slots[i].second;
        for (const auto& [k1, k2] : *lists[i]) {
            const FourierMode& f = *F.find_mode(k2);
            auto ti = G.T.find(k1);
            auto ui = G.U.find(k1);
            const bool has_t = ti != G.T.end();
            const bool has_u = ui != G.U.end();
            if (f.action.size()) {
                cplx c = 0.0;
                for (std::size_t j = 0; j < k1.size(); ++j) c += static_cast<double>(k1[j]) * f.action[j];
                c *= I;
                if (c != cplx(0.0)) {
                    if (has_t) t += c * ti->second;
                    if (has_u) u += c * ui->second;
                }
            }
            if (!has_u) continue;
            const Eigen::MatrixXcd& g = ui->second;
            const auto gz = g.leftCols(S);
            const auto gzb = g.rightCols(S);
            if (f.zbar.size()) t += I * (gz * f.zbar);
            if (f.z.size()) t -= I * (gzb * f.z);
            if (f.zzbar.size()) {
                u.leftCols(S) += I * (gz * f.zzbar.transpose());
                u.rightCols(S) -= I * (gzb * f.zzbar);
            }
            if (f.zz.size()) u.leftCols(S) -= I * (gzb * f.zz);
            if (f.zbarzbar.size()) u.rightCols(S) += I * (gz * f.zbarzbar);
        }
    });
    return out;
}

} // namespace

LieSeriesResult lie_series(const QuadHamiltonian& H, const QuadHamiltonian& F, const LieOptions& opts)
{
    LieSeriesResult r;
    r.value = H;
    if (F.is_zero() || H.is_zero()) return r;
    QuadHamiltonian G = H;
    TailMonitor mon(opts);
    double fact = 1.0;
    for (int j = 1;; ++j) {
        G = floored(poisson_bracket(G, F), opts);
        fact *= j;
        QuadHamiltonian term = (1.0 / fact) * G;
        r.value += term;
        r.terms = j;
        if (mon.finished(j, coefficient_l1(term))) break;
    }
    r.tail = mon.tail();
    return r;
}

SymplecticMap lie_map(const QuadHamiltonian& F, const LieOptions& opts, double* tail)
{
    const int d = F.angles();
    const int S = F.sites();
    SymplecticMap phi = SymplecticMap::identity(d, F.lattice_cutoff());
    double worst = 0.0;
    if (F.is_zero()) {
        if (tail) *tail = 0.0;
        return phi;
    }
    AffineTerm G;
    G.U[KVec(d, 0)] = Eigen::MatrixXcd::Identity(2 * S, 2 * S);
    TailMonitor mon(opts);
    double fact = 1.0;
    for (int j = 1;; ++j) {
        G = ad_affine(G, F);
        drop_small_modes(G, opts);
        fact *= j;
        for (const auto& [k, t] : G.T) {
            auto& slot = phi.T[k];
            if (slot.size() == 0) slot = Eigen::VectorXcd::Zero(2 * S);
            slot += t / fact;
        }
        for (const auto& [k, u] : G.U) {
            auto& slot = phi.U[k];
            if (slot.size() == 0) slot = Eigen::MatrixXcd::Zero(2 * S, 2 * S);
            slot += u / fact;
        }
        if (mon.finished(j, affine_l1(G) / fact)) break;
    }
    worst = std::max(worst, mon.tail());
    for (auto it = phi.T.begin(); it != phi.T.end();)
        it = it->second.isZero(0.0) ? phi.T.erase(it) : std::next(it);
    for (auto it = phi.U.begin(); it != phi.U.end();)
        it = it->second.isZero(0.0) ? phi.U.erase(it) : std::next(it);

    for (int j = 0; j < d; ++j) {
        double t = 0.0;
        QuadHamiltonian first = -1.0 * angle_derivative(F, j);
        phi.action_images[j] += bracket_series(first, F, opts, t);
        worst = std::max(worst, t);
        phi.angle_shifts[j] = bracket_series(action_derivative(F, j), F, opts, t);
        worst = std::max(worst, t);
    }
    if (tail) *tail = worst;
    return phi;
}

LieTransformResult lie_transform(const QuadHamiltonian& P, const QuadHamiltonian& F, const QuadHamiltonian& R,
                                 const QuadHamiltonian& mean, const LieOptions& opts)
{
    LieTransformResult out;
    out.perturbation = P - R;
    out.perturbation.set_fourier_cutoff(std::max(P.fourier_cutoff(), R.fourier_cutoff()));
    if (F.is_zero()) {
        out.map = SymplecticMap::identity(P.angles(), P.lattice_cutoff());
        out.perturbation.prune();
        return out;
    }
    QuadHamiltonian w = mean - R;
    QuadHamiltonian p = P;
    TailMonitor mon(opts);
    double fact = 1.0;
    for (int j = 1;; ++j) {
        w = floored(poisson_bracket(w, F), opts);
        p = floored(poisson_bracket(p, F), opts);
        fact *= j;
        QuadHamiltonian term = (1.0 / (fact * (j + 1))) * w + (1.0 / fact) * p;
        out.perturbation += term;
        out.terms = j;
        if (mon.finished(j, coefficient_l1(term))) break;
    }
    out.tail = mon.tail();
    out.perturbation.prune();
    double map_tail = 0.0;
    out.map = lie_map(F, opts, &map_tail);
    out.tail = std::max(out.tail, map_tail);
    return out;
}

} // namespace subkam
