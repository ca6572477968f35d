#ifndef SUBKAM_QUAD_HAMILTONIAN_HPP
#define SUBKAM_QUAD_HAMILTONIAN_HPP

#include <compare>
#include <complex>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "subkam/lattice.hpp"

namespace subkam {

enum class MonomialKind { Const, Action, Z, ZBar, ZZ, ZZBar, ZBarZBar };

std::string to_string(MonomialKind kind);
MonomialKind monomial_kind_from_string(const std::string& s);

// Fourier index plus monomial type. For Action, n holds the action index j.
// ZZ and ZBarZBar keys are canonical with n <= m; ZZBar keeps (holomorphic, antiholomorphic).
struct MonomialKey {
    KVec k;
    MonomialKind kind = MonomialKind::Const;
    int n = 0;
    int m = 0;

    static MonomialKey constant(KVec k);
    static MonomialKey action(KVec k, int j);
    static MonomialKey z(KVec k, int n);
    static MonomialKey zbar(KVec k, int n);
    static MonomialKey zz(KVec k, int n, int m);
    static MonomialKey zzbar(KVec k, int n, int m);
    static MonomialKey zbarzbar(KVec k, int n, int m);

    friend auto operator<=>(const MonomialKey&, const MonomialKey&) = default;
};

// One Fourier mode e^{i<k,theta>} of a quadratic-class Hamiltonian:
//   c + <a, I> + u.z + v.zbar + 1/2 z^T A z + z^T B zbar + 1/2 zbar^T C zbar
// with A, C symmetric. Matrix entries are second derivatives, so the coefficient of
// z_n z_m (n < m) is A(n, m) and that of z_n^2 is A(n, n) / 2.
// Blocks of size zero stand for zero.
struct FourierMode {
    cplx constant{0.0, 0.0};
    Eigen::VectorXcd action;
    Eigen::VectorXcd z;
    Eigen::VectorXcd zbar;
    Eigen::MatrixXcd zz;
    Eigen::MatrixXcd zzbar;
    Eigen::MatrixXcd zbarzbar;

    bool empty() const;
    FourierMode& operator+=(const FourierMode& other);
    FourierMode& operator*=(cplx s);
};

void accumulate(Eigen::VectorXcd& dst, const Eigen::VectorXcd& src, cplx scale = 1.0);
void accumulate(Eigen::MatrixXcd& dst, const Eigen::MatrixXcd& src, cplx scale = 1.0);

// Fourier-in-theta Hamiltonian of degree <= 1 in I and <= 2 in (z, zbar), without I*z terms.
class QuadHamiltonian {
public:
    QuadHamiltonian() = default;
    QuadHamiltonian(int angles, int lattice_cutoff, int fourier_cutoff, bool real = true);

    int angles() const { return d_; }
    int lattice_cutoff() const { return lattice_.cutoff; }
    const Lattice& lattice() const { return lattice_; }
    int sites() const { return lattice_.size(); }
    int fourier_cutoff() const { return fourier_cutoff_; }
    void set_fourier_cutoff(int K) { fourier_cutoff_ = K; }

    bool real() const { return real_; }
    void set_real(bool real) { real_ = real; }

    cplx coeff(const MonomialKey& key) const;
    void set(const MonomialKey& key, cplx value);
    void add(const MonomialKey& key, cplx value);

    const std::map<KVec, FourierMode>& modes() const { return modes_; }
    FourierMode& mode(const KVec& k);
    const FourierMode* find_mode(const KVec& k) const;
    void erase_mode(const KVec& k) { modes_.erase(k); }

    // Visits every nonzero coefficient under its canonical key.
    template <class Visitor>
    void for_each_term(Visitor&& visit) const;

    std::size_t term_count() const;
    bool is_zero() const;
    void prune();

    // Largest |c(k, key) - conj(c(-k, conjugate key))|.
    double reality_defect() const;
    // Projects onto the real class by averaging each coefficient with its conjugate partner.
    void enforce_reality();

    bool compatible(const QuadHamiltonian& other) const
    {
        return d_ == other.d_ && lattice_.cutoff == other.lattice_.cutoff;
    }

    QuadHamiltonian& operator+=(const QuadHamiltonian& other);
    QuadHamiltonian& operator-=(const QuadHamiltonian& other);
    QuadHamiltonian& operator*=(cplx s);

    friend QuadHamiltonian operator+(QuadHamiltonian a, const QuadHamiltonian& b) { return a += b; }
    friend QuadHamiltonian operator-(QuadHamiltonian a, const QuadHamiltonian& b) { return a -= b; }
    friend QuadHamiltonian operator*(cplx s, QuadHamiltonian a) { return a *= s; }

private:
    void check_key(const MonomialKey& key) const;

    int d_ = 1;
    Lattice lattice_{};
    int fourier_cutoff_ = 0;
    bool real_ = true;
    std::map<KVec, FourierMode> modes_;
};

template <class Visitor>
void QuadHamiltonian::for_each_term(Visitor&& visit) const
{
    const int S = sites();
    for (const auto& [k, md] : modes_) {
        if (md.constant != cplx(0.0)) visit(MonomialKey::constant(k), md.constant);
        for (Eigen::Index j = 0; j < md.action.size(); ++j)
            if (md.action[j] != cplx(0.0)) visit(MonomialKey::action(k, static_cast<int>(j)), md.action[j]);
        for (Eigen::Index i = 0; i < md.z.size(); ++i)
            if (md.z[i] != cplx(0.0)) visit(MonomialKey::z(k, lattice_.site(static_cast<int>(i))), md.z[i]);
        for (Eigen::Index i = 0; i < md.zbar.size(); ++i)
            if (md.zbar[i] != cplx(0.0)) visit(MonomialKey::zbar(k, lattice_.site(static_cast<int>(i))), md.zbar[i]);
        if (md.zz.size())
            for (int i = 0; i < S; ++i)
                for (int j = i; j < S; ++j)
                    if (md.zz(i, j) != cplx(0.0)) visit(MonomialKey::zz(k, lattice_.site(i), lattice_.site(j)), md.zz(i, j));
        if (md.zzbar.size())
            for (int i = 0; i < S; ++i)
                for (int j = 0; j < S; ++j)
                    if (md.zzbar(i, j) != cplx(0.0))
                        visit(MonomialKey::zzbar(k, lattice_.site(i), lattice_.site(j)), md.zzbar(i, j));
        if (md.zbarzbar.size())
            for (int i = 0; i < S; ++i)
                for (int j = i; j < S; ++j)
                    if (md.zbarzbar(i, j) != cplx(0.0))
                        visit(MonomialKey::zbarzbar(k, lattice_.site(i), lattice_.site(j)), md.zbarzbar(i, j));
    }
}

} // namespace subkam

#endif
