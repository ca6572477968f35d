#ifndef SUBKAM_ALGEBRA_HPP
#define SUBKAM_ALGEBRA_HPP

#include <Eigen/Dense>

#include "subkam/quad_hamiltonian.hpp"

namespace subkam {

// A point (theta, I, z, zbar). Angles are real; the remaining coordinates may be complexified.
struct PhasePoint {
    Eigen::VectorXd theta;
    Eigen::VectorXcd action;
    Eigen::VectorXcd z;
    Eigen::VectorXcd zbar;

    static PhasePoint zero(int angles, int lattice_cutoff);
    // Flattened as (theta, I, z, zbar).
    Eigen::VectorXcd flat() const;
};

struct PhaseGradient {
    Eigen::VectorXcd theta;
    Eigen::VectorXcd action;
    Eigen::VectorXcd z;
    Eigen::VectorXcd zbar;

    Eigen::VectorXcd flat() const;
};

// {R, F} = sum_j (dR/dtheta_j dF/dI_j - dF/dtheta_j dR/dI_j) + i sum_n (dR/dz_n dF/dzbar_n - dF/dz_n dR/dzbar_n).
// All Fourier modes are kept; the result cutoff is the sum of the operand cutoffs.
QuadHamiltonian poisson_bracket(const QuadHamiltonian& R, const QuadHamiltonian& F);

// Keeps |k| <= K, |n| <= K for linear terms, |n - m| <= K for z zbar, |n + m| <= K for z z and zbar zbar.
QuadHamiltonian truncate(const QuadHamiltonian& P, int K);

// <R^1_0, I> + sum_n R^11_{0,nn} |z_n|^2 + sum_n R^11_{0,n,-n} z_n zbar_{-n}.
QuadHamiltonian generalized_mean(const QuadHamiltonian& R);

// The k = 0 constant, which no bracket with a generating function can produce.
cplx average_constant(const QuadHamiltonian& R);

cplx evaluate(const QuadHamiltonian& H, const PhasePoint& x);
PhaseGradient gradient(const QuadHamiltonian& H, const PhasePoint& x);

QuadHamiltonian action_derivative(const QuadHamiltonian& H, int j);
QuadHamiltonian angle_derivative(const QuadHamiltonian& H, int j);
// dH/dz_n (conjugate = false) or dH/dzbar_n (conjugate = true).
QuadHamiltonian site_derivative(const QuadHamiltonian& H, int n, bool conjugate);

// Largest coefficient modulus.
double max_coefficient(const QuadHamiltonian& H);

// Copy of H without the k != 0 modes whose largest coefficient times e^{|k| width} is below rel times the
// largest such value.
QuadHamiltonian drop_small_modes(const QuadHamiltonian& H, double width, double rel);

} // namespace subkam

#endif
