#include "subkam/quad_hamiltonian.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "subkam/errors.hpp"

namespace subkam {

std::string to_string(MonomialKind kind)
{
    switch (kind) {
    case MonomialKind::Const: return "CONST";
    case MonomialKind::Action: return "ACTION";
    case MonomialKind::Z: return "Z";
    case MonomialKind::ZBar: return "ZBAR";
    case MonomialKind::ZZ: return "ZZ";
    case MonomialKind::ZZBar: return "ZZBAR";
    case MonomialKind::ZBarZBar: return "ZBARZBAR";
    }
    return "?";
}

MonomialKind monomial_kind_from_string(const std::string& s)
{
    if (s == "CONST") return MonomialKind::Const;
    if (s == "ACTION") return MonomialKind::Action;
    if (s == "Z") return MonomialKind::Z;
    if (s == "ZBAR") return MonomialKind::ZBar;
    if (s == "ZZ") return MonomialKind::ZZ;
    if (s == "ZZBAR") return MonomialKind::ZZBar;
    if (s == "ZBARZBAR") return MonomialKind::ZBarZBar;
    throw ClassError("unknown monomial kind '" + s + "'");
}

MonomialKey MonomialKey::constant(KVec k) { return {std::move(k), MonomialKind::Const, 0, 0}; }
MonomialKey MonomialKey::action(KVec k, int j) { return {std::move(k), MonomialKind::Action, j, 0}; }
MonomialKey MonomialKey::z(KVec k, int n) { return {std::move(k), MonomialKind::Z, n, 0}; }
MonomialKey MonomialKey::zbar(KVec k, int n) { return {std::move(k), MonomialKind::ZBar, n, 0}; }
MonomialKey MonomialKey::zz(KVec k, int n, int m)
{
    return {std::move(k), MonomialKind::ZZ, std::min(n, m), std::max(n, m)};
}
MonomialKey MonomialKey::zzbar(KVec k, int n, int m) { return {std::move(k), MonomialKind::ZZBar, n, m}; }
MonomialKey MonomialKey::zbarzbar(KVec k, int n, int m)
{
    return {std::move(k), MonomialKind::ZBarZBar, std::min(n, m), std::max(n, m)};
}

bool FourierMode::empty() const
{
    auto zero_v = [](const Eigen::VectorXcd& v) { return v.size() == 0 || v.isZero(0.0); };
    auto zero_m = [](const Eigen::MatrixXcd& m) { return m.size() == 0 || m.isZero(0.0); };
    return constant == cplx(0.0) && zero_v(action) && zero_v(z) && zero_v(zbar) && zero_m(zz) && zero_m(zzbar)
        && zero_m(zbarzbar);
}

void accumulate(Eigen::VectorXcd& dst, const Eigen::VectorXcd& src, cplx scale)
{
    if (src.size() == 0) return;
    if (dst.size() == 0)
        dst = scale * src;
    else
        dst += scale * src;
}

void accumulate(Eigen::MatrixXcd& dst, const Eigen::MatrixXcd& src, cplx scale)
{
    if (src.size() == 0) return;
    if (dst.size() == 0)
        dst = scale * src;
    else
        dst += scale * src;
}

FourierMode& FourierMode::operator+=(const FourierMode& o)
{
    constant += o.constant;
    accumulate(action, o.action);
    accumulate(z, o.z);
    accumulate(zbar, o.zbar);
    accumulate(zz, o.zz);
    accumulate(zzbar, o.zzbar);
    accumulate(zbarzbar, o.zbarzbar);
    return *this;
}

FourierMode& FourierMode::operator*=(cplx s)
{
    constant *= s;
    if (action.size()) action *= s;
    if (z.size()) z *= s;
    if (zbar.size()) zbar *= s;
    if (zz.size()) zz *= s;
    if (zzbar.size()) zzbar *= s;
    if (zbarzbar.size()) zbarzbar *= s;
    return *this;
}

QuadHamiltonian::QuadHamiltonian(int angles, int lattice_cutoff, int fourier_cutoff, bool real)
    : d_(angles), lattice_{lattice_cutoff}, fourier_cutoff_(fourier_cutoff), real_(real)
{
    if (angles < 1) throw ParameterError("number of angles must be positive");
    if (lattice_cutoff < 0) throw ParameterError("lattice cutoff must be nonnegative");
    if (fourier_cutoff < 0) throw ParameterError("Fourier cutoff must be nonnegative");
}

void QuadHamiltonian::check_key(const MonomialKey& key) const
{
    if (static_cast<int>(key.k.size()) != d_) throw ClassError("Fourier index has wrong dimension");
    switch (key.kind) {
    case MonomialKind::Const: break;
    case MonomialKind::Action:
        if (key.n < 0 || key.n >= d_) throw ClassError("action index out of range");
        break;
    case MonomialKind::Z:
    case MonomialKind::ZBar:
        if (!lattice_.contains(key.n)) throw ClassError("site outside lattice cutoff");
        break;
    default:
        if (!lattice_.contains(key.n) || !lattice_.contains(key.m)) throw ClassError("site outside lattice cutoff");
    }
}

cplx QuadHamiltonian::coeff(const MonomialKey& key) const
{
    check_key(key);
    const FourierMode* md = find_mode(key.k);
    if (!md) return 0.0;
    const int i = lattice_.index(key.n);
    const int j = lattice_.index(key.m);
    switch (key.kind) {
    case MonomialKind::Const: return md->constant;
    case MonomialKind::Action: return md->action.size() ? md->action[key.n] : cplx(0.0);
    case MonomialKind::Z: return md->z.size() ? md->z[i] : cplx(0.0);
    case MonomialKind::ZBar: return md->zbar.size() ? md->zbar[i] : cplx(0.0);
    case MonomialKind::ZZ: return md->zz.size() ? md->zz(i, j) : cplx(0.0);
    case MonomialKind::ZZBar: return md->zzbar.size() ? md->zzbar(i, j) : cplx(0.0);
    case MonomialKind::ZBarZBar: return md->zbarzbar.size() ? md->zbarzbar(i, j) : cplx(0.0);
    }
    return 0.0;
}

void QuadHamiltonian::set(const MonomialKey& key, cplx value)
{
    check_key(key);
    FourierMode& md = mode(key.k);
    const int S = sites();
    const int i = lattice_.index(key.n);
    const int j = lattice_.index(key.m);
    auto vec = [&](Eigen::VectorXcd& v, int size) -> Eigen::VectorXcd& {
        if (v.size() == 0) v = Eigen::VectorXcd::Zero(size);
        return v;
    };
    auto mat = [&](Eigen::MatrixXcd& m) -> Eigen::MatrixXcd& {
        if (m.size() == 0) m = Eigen::MatrixXcd::Zero(S, S);
        return m;
    };
    switch (key.kind) {
    case MonomialKind::Const: md.constant = value; break;
    case MonomialKind::Action: vec(md.action, d_)[key.n] = value; break;
    case MonomialKind::Z: vec(md.z, S)[i] = value; break;
    case MonomialKind::ZBar: vec(md.zbar, S)[i] = value; break;
    case MonomialKind::ZZ:
        mat(md.zz)(i, j) = value;
        md.zz(j, i) = value;
        break;
    case MonomialKind::ZZBar: mat(md.zzbar)(i, j) = value; break;
    case MonomialKind::ZBarZBar:
        mat(md.zbarzbar)(i, j) = value;
        md.zbarzbar(j, i) = value;
        break;
    }
}

void QuadHamiltonian::add(const MonomialKey& key, cplx value) { set(key, coeff(key) + value); }

FourierMode& QuadHamiltonian::mode(const KVec& k)
{
    if (static_cast<int>(k.size()) != d_) throw ClassError("Fourier index has wrong dimension");
    return modes_[k];
}

const FourierMode* QuadHamiltonian::find_mode(const KVec& k) const
{
    auto it = modes_.find(k);
    return it == modes_.end() ? nullptr : &it->second;
}

std::size_t QuadHamiltonian::term_count() const
{
    std::size_t n = 0;
    for_each_term([&](const MonomialKey&, cplx) { ++n; });
    return n;
}

bool QuadHamiltonian::is_zero() const
{
    for (const auto& [k, md] : modes_)
        if (!md.empty()) return false;
    return true;
}

void QuadHamiltonian::prune()
{
    for (auto it = modes_.begin(); it != modes_.end();) {
        FourierMode& md = it->second;
        if (md.action.size() && md.action.isZero(0.0)) md.action.resize(0);
        if (md.z.size() && md.z.isZero(0.0)) md.z.resize(0);
        if (md.zbar.size() && md.zbar.isZero(0.0)) md.zbar.resize(0);
        if (md.zz.size() && md.zz.isZero(0.0)) md.zz.resize(0, 0);
        if (md.zzbar.size() && md.zzbar.isZero(0.0)) md.zzbar.resize(0, 0);
        if (md.zbarzbar.size() && md.zbarzbar.isZero(0.0)) md.zbarzbar.resize(0, 0);
        if (md.empty())
            it = modes_.erase(it);
        else
            ++it;
    }
}

namespace {

double max_diff(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b_conj)
{
    if (a.size() == 0 && b_conj.size() == 0) return 0.0;
    if (a.size() == 0) return b_conj.cwiseAbs().maxCoeff();
    if (b_conj.size() == 0) return a.cwiseAbs().maxCoeff();
    return (a - b_conj.conjugate()).cwiseAbs().maxCoeff();
}

double max_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b_conj)
{
    if (a.size() == 0 && b_conj.size() == 0) return 0.0;
    if (a.size() == 0) return b_conj.cwiseAbs().maxCoeff();
    if (b_conj.size() == 0) return a.cwiseAbs().maxCoeff();
    return (a - b_conj.conjugate()).cwiseAbs().maxCoeff();
}

Eigen::VectorXcd average_conj(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
    // (a + conj(b)) / 2 with empty blocks read as zero
    if (a.size() == 0 && b.size() == 0) return {};
    if (a.size() == 0) return 0.5 * b.conjugate();
    if (b.size() == 0) return 0.5 * a;
    return 0.5 * (a + b.conjugate());
}

Eigen::MatrixXcd average_conj(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    if (a.size() == 0 && b.size() == 0) return {};
    if (a.size() == 0) return 0.5 * b.conjugate();
    if (b.size() == 0) return 0.5 * a;
    return 0.5 * (a + b.conjugate());
}

Eigen::MatrixXcd transposed(const Eigen::MatrixXcd& m) { return m.size() ? Eigen::MatrixXcd(m.transpose()) : m; }

} // namespace

double QuadHamiltonian::reality_defect() const
{
    double defect = 0.0;
    FourierMode none;
    for (const auto& [k, md] : modes_) {
        const FourierMode* partner = find_mode(negate(k));
        const FourierMode& p = partner ? *partner : none;
        defect = std::max(defect, std::abs(md.constant - std::conj(p.constant)));
        defect = std::max(defect, max_diff(md.action, p.action));
        defect = std::max(defect, max_diff(md.z, p.zbar));
        defect = std::max(defect, max_diff(md.zbar, p.z));
        defect = std::max(defect, max_diff(md.zz, p.zbarzbar));
        defect = std::max(defect, max_diff(md.zbarzbar, p.zz));
        defect = std::max(defect, max_diff(md.zzbar, transposed(p.zzbar)));
    }
    return defect;
}

void QuadHamiltonian::enforce_reality()
{
    std::set<KVec> keys;
    for (const auto& [k, md] : modes_) {
        keys.insert(k);
        keys.insert(negate(k));
    }
    std::map<KVec, FourierMode> out;
    FourierMode none;
    for (const KVec& k : keys) {
        const FourierMode* a = find_mode(k);
        const FourierMode* b = find_mode(negate(k));
        const FourierMode& x = a ? *a : none;
        const FourierMode& y = b ? *b : none;
        FourierMode r;
        r.constant = 0.5 * (x.constant + std::conj(y.constant));
        r.action = average_conj(x.action, y.action);
        r.z = average_conj(x.z, y.zbar);
        r.zbar = average_conj(x.zbar, y.z);
        r.zz = average_conj(x.zz, y.zbarzbar);
        r.zbarzbar = average_conj(x.zbarzbar, y.zz);
        r.zzbar = average_conj(x.zzbar, transposed(y.zzbar));
        out.emplace(k, std::move(r));
    }
    modes_ = std::move(out);
    prune();
    real_ = true;
}

QuadHamiltonian& QuadHamiltonian::operator+=(const QuadHamiltonian& other)
{
    if (!compatible(other)) throw ClassError("cutoff mismatch in sum");
    for (const auto& [k, md] : other.modes_) modes_[k] += md;
    fourier_cutoff_ = std::max(fourier_cutoff_, other.fourier_cutoff_);
    real_ = real_ && other.real_;
    return *this;
}

QuadHamiltonian& QuadHamiltonian::operator-=(const QuadHamiltonian& other)
{
    if (!compatible(other)) throw ClassError("cutoff mismatch in difference");
    for (const auto& [k, md] : other.modes_) {
        FourierMode neg = md;
        neg *= -1.0;
        modes_[k] += neg;
    }
    fourier_cutoff_ = std::max(fourier_cutoff_, other.fourier_cutoff_);
    real_ = real_ && other.real_;
    return *this;
}

QuadHamiltonian& QuadHamiltonian::operator*=(cplx s)
{
    for (auto& [k, md] : modes_) md *= s;
    if (s.imag() != 0.0) real_ = false;
    return *this;
}

} // namespace subkam
