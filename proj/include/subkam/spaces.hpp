#ifndef SUBKAM_SPACES_HPP
#define SUBKAM_SPACES_HPP

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "subkam/lattice.hpp"
#include "subkam/quad_hamiltonian.hpp"

namespace subkam {

// Complex sequence on sites [-N, N].
class WeightedSeq {
public:
    WeightedSeq() = default;
    explicit WeightedSeq(int cutoff) : lattice_{cutoff}, values_(Eigen::VectorXcd::Zero(2 * cutoff + 1)) {}
    WeightedSeq(int cutoff, Eigen::VectorXcd values);

    int cutoff() const { return lattice_.cutoff; }
    cplx operator[](int n) const { return values_[lattice_.index(n)]; }
    cplx& operator[](int n) { return values_[lattice_.index(n)]; }
    cplx at(int n) const;
    void set(int n, cplx v);
    const Eigen::VectorXcd& values() const { return values_; }

private:
    Lattice lattice_{};
    Eigen::VectorXcd values_;
};

struct DomainParams {
    double s = 1.0;   // angle strip width
    double r = 1.0;   // action / sequence radius
    double rho = 1.0; // exponential weight
    double p = 1.0;   // polynomial weight
    int d = 1;        // number of angles

    void validate() const;
};

// e^{|n| rho} <n>^p for every site, <0> = 1/2.
Eigen::VectorXd site_weights(int cutoff, double rho, double p);

// Single-site extremal |z_n| = r e^{-|n| rho} <n>^{-p}.
Eigen::VectorXd site_majorants(int cutoff, const DomainParams& D);

double weighted_norm(const WeightedSeq& w, double rho, double p);

struct PhaseVector {
    Eigen::VectorXcd X;
    Eigen::VectorXcd Y;
    WeightedSeq U;
    WeightedSeq V;
};

// |X| + |Y| / r^2 + (|U| + |V|) / r with sup norms on the finite parts.
double phase_vector_norm(const PhaseVector& W, double r, double rho, double p);

enum class SeminormCondition {
    None,
    Value,              // |P| <= r^2 C
    ActionGradient,     // |dP/dI_j| <= C
    FirstDerivative,    // |dP/dw_n| <= r C e^{-|n| rho} <n>^{-beta}
    SecondDerivative,   // every second derivative, momentum-weighted
    PureSecond,         // d^2/dz dz and d^2/dzbar dzbar
    DiagonalSecond,     // d^2/dz_n dzbar_n
    AntiDiagonalSecond, // d^2/dz_n dzbar_{-n}, n != 0
    OscillatingSecond,  // angle-dependent part of d^2/dz_n dzbar_m, |n| != |m|
    AveragedSecond,     // angle average of d^2/dz_n dzbar_m, |n| != |m|, divided by the frequency gap
};

std::string to_string(SeminormCondition c);

struct SeminormReport {
    double value = 0.0;
    SeminormCondition binding_condition = SeminormCondition::None;
    // Sites and derivative directions (+1 for z, -1 for zbar) of the binding entry;
    // for ActionGradient, n holds the action index. k is the dominant Fourier mode.
    int n = 0;
    int m = 0;
    int iota1 = 0;
    int iota2 = 0;
    KVec k;
};

// Upper bound of sup over D(s, r) of |H| by the coefficient majorant rule.
double hamiltonian_sup_bound(const QuadHamiltonian& H, const DomainParams& D);

// Majorant of the phase-space norm of the Hamiltonian vector field.
double vector_field_majorant(const QuadHamiltonian& H, const DomainParams& D);

SeminormReport gamma_beta_seminorm(const QuadHamiltonian& P, const DomainParams& D, double beta);
SeminormReport gamma_beta_alpha_seminorm(const QuadHamiltonian& P, const DomainParams& D, double beta, double alpha);

// Recomputes the ratio of the condition named in the report at its binding entry.
double evaluate_binding(const QuadHamiltonian& P, const DomainParams& D, double beta, double alpha,
                        const SeminormReport& report);

// max over pairs |f(x) - f(y)| / |x - y| (Euclidean distance between samples).
double lipschitz_seminorm(const std::vector<std::pair<Eigen::VectorXd, cplx>>& values);

} // namespace subkam

#endif
