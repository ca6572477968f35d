#ifndef SUBKAM_LATTICE_HPP
#define SUBKAM_LATTICE_HPP

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace subkam {

using cplx = std::complex<double>;

// Fourier index in Z^d.
using KVec = std::vector<int>;

int l1_norm(const KVec& k);
KVec negate(const KVec& k);
KVec add(const KVec& a, const KVec& b);
bool is_zero(const KVec& k);
double dot(const KVec& k, const Eigen::VectorXd& omega);
std::string to_string(const KVec& k);

// All k in Z^d with |k|_1 <= K, lexicographic order.
std::vector<KVec> enumerate_kvecs(int d, int K);

// <n> = max(1/2, |n|).
inline double angle_bracket(int n) { return n == 0 ? 0.5 : static_cast<double>(n < 0 ? -n : n); }

// Sites n in [-N, N] stored at offset n + N.
struct Lattice {
    int cutoff = 0;

    int size() const { return 2 * cutoff + 1; }
    int index(int n) const { return n + cutoff; }
    int site(int i) const { return i - cutoff; }
    bool contains(int n) const { return n >= -cutoff && n <= cutoff; }
};

} // namespace subkam

#endif
