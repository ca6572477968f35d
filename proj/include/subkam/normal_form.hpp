#ifndef SUBKAM_NORMAL_FORM_HPP
#define SUBKAM_NORMAL_FORM_HPP

#include <Eigen/Dense>

#include "subkam/lattice.hpp"
#include "subkam/quad_hamiltonian.hpp"

namespace subkam {

// <omega, I> + sum_n Omega_n |z_n|^2 + energy, Omega_n = |n|^alpha + lambda + tilde_Omega_n.
struct NormalForm {
    Eigen::VectorXd omega;
    double alpha = 0.5;
    double lambda = 1.0;
    Eigen::VectorXd tilde_omega; // indexed by site n + N
    double beta = 0.5;
    double energy = 0.0;
    double L = 0.0; // bound on sup_n <n>^{2 beta} |tilde_Omega_n|

    NormalForm() = default;
    NormalForm(Eigen::VectorXd omega, double alpha, double lambda, double beta, int lattice_cutoff);

    int angles() const { return static_cast<int>(omega.size()); }
    int lattice_cutoff() const { return static_cast<int>((tilde_omega.size() - 1) / 2); }
    double Omega(int n) const;
    // sup_n <n>^{2 beta} |tilde_Omega_n|
    double tilde_weight() const;
    // Checks 0 < alpha < 1, lambda > 0, Omega_n > 0 and the tracked budget L.
    void validate() const;
};

// Coefficients a_n of z_n zbar_{-n}, indexed by site n + N; a_0 is always zero.
struct PairingForm {
    Eigen::VectorXcd a;

    PairingForm() = default;
    explicit PairingForm(int lattice_cutoff) : a(Eigen::VectorXcd::Zero(2 * lattice_cutoff + 1)) {}

    int lattice_cutoff() const { return static_cast<int>((a.size() - 1) / 2); }
    cplx at(int n) const { return a[n + lattice_cutoff()]; }
    // Largest |a_n - conj(a_{-n})|.
    double hermitian_defect() const;
    // Largest |a_n| over |n| > K.
    double support_excess(int K) const;
};

// The 2x2 block on (z_n, z_{-n}): [[Omega_n, a_n], [a_{-n}, Omega_{-n}]], or the 1x1 block Omega_0.
Eigen::MatrixXcd block_matrix(const NormalForm& N, const PairingForm& A, int n);

// k = 0 z zbar matrix of N + A: diag(Omega) plus a_n at (n, -n).
Eigen::MatrixXcd normal_matrix(const NormalForm& N, const PairingForm& A);

// N + A as a Hamiltonian, including the energy constant.
QuadHamiltonian to_hamiltonian(const NormalForm& N, const PairingForm& A, int fourier_cutoff = 0);

} // namespace subkam

#endif
