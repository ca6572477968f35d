#ifndef SUBKAM_NLS_HPP
#define SUBKAM_NLS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "subkam/kam.hpp"
#include "subkam/normal_form.hpp"
#include "subkam/quad_hamiltonian.hpp"
#include "subkam/spaces.hpp"
#include "subkam/symplectic_map.hpp"

namespace subkam {

// Fourier data of V(theta, x) = sum vhat_{k,l} e^{i<k,theta> + i l x} and the model constants.
struct PotentialSpec {
    int d = 1;
    std::map<std::pair<KVec, int>, cplx> vhat;
    double rho_V = 1.0;
    double eps = 0.0;
    double beta = 0.5;
    double lambda = 1.0;
    double alpha = 0.5;

    int fourier_cutoff() const; // largest |k|
    int spatial_cutoff() const; // largest |l|
    // Largest |vhat_{-k,-l} - conj(vhat_{k,l})|.
    double reality_defect() const;
    // max |vhat_{k,l}| e^{(|k| + |l|) rho_V}.
    double analytic_constant() const;
    void validate() const;
};

// V = 1 + cos x + cos(theta_1) cos x.
PotentialSpec cos_potential(double eps, double beta = 0.5, double lambda = 1.0);

// Text format:
//   # subkam-potential v1
//   angles <d>
//   eps <e>  beta <b>  lambda <l>  rho_V <r>  alpha <a>   (one key per line, all optional but angles)
//   k_1 .. k_d l re im                                    (one row per coefficient)
PotentialSpec read_potential(std::istream& is);
PotentialSpec load_potential(const std::string& path);
void write_potential(std::ostream& os, const PotentialSpec& spec);

// Normal form with Omega_n = |n|^alpha + lambda and the purely z zbar perturbation
// P^{11}_{k,nm} = eps vhat_{k,n-m} <n>^{-beta} <m>^{-beta}.
std::pair<NormalForm, QuadHamiltonian> build_nls(const PotentialSpec& spec, const Eigen::VectorXd& omega,
                                                 int lattice_cutoff);

struct AssumptionOptions {
    DomainParams domain;
    double eps0 = 1e-3;                    // smallness budget for B2
    double M_budget = 1e300;               // budget for the Lipschitz constant of omega
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> omega_samples; // (xi, omega(xi))
};

struct AssumptionReport {
    bool a1 = true;
    double lipschitz = 0.0;
    bool a2 = true;
    double tilde_weight = 0.0;
    double L = 0.0;
    bool b1 = true;
    double majorant = 0.0;
    bool b2 = true;
    SeminormReport seminorm;
    double eps0 = 0.0;

    bool pass() const { return a1 && a2 && b1 && b2; }
    std::string summary() const;
};

AssumptionReport verify_assumptions(const NormalForm& N, const QuadHamiltonian& P, double beta,
                                    const AssumptionOptions& opts);

// Reduced operator on [-N, N]^2. `A` is the k = 0 z zbar matrix of the converged N + A + P*,
// `core` its diagonal plus anti-diagonal part used for the reduced flow.
struct ReducedOperator {
    Eigen::MatrixXcd A;
    Eigen::MatrixXcd core;

    double hermitian_defect() const;      // max |A - A^*| entrywise
    double support_defect() const;        // max |A_{nm}| with n != m, n != -m
    double norm() const;                  // operator 2-norm of core
};

ReducedOperator reduced_operator(const NormalForm& N, const PairingForm& A, const QuadHamiltonian* residual = nullptr);
// From the k = 0 z zbar block of a converged Hamiltonian N + A + P*.
ReducedOperator reduced_operator(const QuadHamiltonian& converged);

struct NlsReduction {
    KamRunResult run;
    std::vector<ReducedOperator> operators; // per sample, empty matrices for excluded ones
    std::vector<std::size_t> alive;
};

// Runs the KAM iteration on build_nls seeds at the given frequency samples.
NlsReduction reduce_nls(const PotentialSpec& spec, const std::vector<Eigen::VectorXd>& omegas, const KamParams& params);

struct ReducibilityOptions {
    Eigen::VectorXd phi0;   // initial phase, zero when empty
    double horizon = 100.0;
    double dt = 0.02;
    double record_interval = 1.0; // time between distance evaluations, rounded to whole steps
    double rho = 0.5;       // weight of the distance norm
    double p = 1.0;
    std::uint64_t seed = 1;
};

struct TrajectoryRow {
    double t = 0.0;
    double norm = 0.0;
    double distance = 0.0;
};

struct ReducibilityMetrics {
    double max_distance = 0.0;
    double forced_norm_drift = 0.0;
    double reduced_norm_drift = 0.0;
    std::vector<TrajectoryRow> rows;
};

// Integrates z' = i dH/dzbar for the forced Hamiltonian H(phi0 + t omega) by RK4 and the reduced system
// w' = i core^T w exactly, maps w through the chain at theta = phi0 + t omega and records the weighted distance.
ReducibilityMetrics verify_reducibility(const NormalForm& seed_normal, const QuadHamiltonian& seed_perturbation,
                                        const ReducedOperator& reduced, const TransformChain& chain,
                                        const ReducibilityOptions& opts);
// Same, with the forced Hamiltonian given in full.
ReducibilityMetrics verify_reducibility(const QuadHamiltonian& seed, const Eigen::VectorXd& omega,
                                        const ReducedOperator& reduced, const TransformChain& chain,
                                        const ReducibilityOptions& opts);

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows);

} // namespace subkam

#endif
