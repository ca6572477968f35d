#ifndef SUBKAM_KAM_HPP
#define SUBKAM_KAM_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "subkam/homological.hpp"
#include "subkam/lie.hpp"
#include "subkam/normal_form.hpp"
#include "subkam/quad_hamiltonian.hpp"
#include "subkam/spaces.hpp"
#include "subkam/symplectic_map.hpp"

namespace subkam {

enum class TauProfile { Paper, Desk };

std::string to_string(TauProfile p);
TauProfile tau_profile_from_string(const std::string& s);

struct KamParams {
    int d = 1;
    double alpha = 0.5;
    double beta = 0.5;
    double lambda = 1.0;
    double gamma = 0.5;
    TauProfile profile = TauProfile::Desk;
    double tau1 = 25.0;     // measure exponent (Paper profile)
    double desk_tau = 4.0;  // gate exponent (Desk profile)
    double desk_tau1 = 1.0; // measure exponent (Desk profile)
    double c = 1.0;         // schedule constant
    int max_steps = 4;
    int lattice_cutoff = 32;
    double target = 0.0; // stop once every alive sample has measured epsilon <= target
    double mode_floor = 1e-20; // relative weighted size below which Fourier modes of R and P_+ are dropped
    double s = 1.0;
    double r = 1.0;
    double rho = 1.0;
    double p = 1.0;
    LieOptions lie{};

    // Active measure exponent tau_1.
    double measure_tau1() const { return profile == TauProfile::Paper ? tau1 : desk_tau1; }
    // (tau_1 + 1) / (1 - alpha)
    double varsigma() const;
    // 12 tau_1 + 16 varsigma (Paper) or desk_tau (Desk).
    double tau() const;
    DomainParams domain() const { return {s, r, rho, p, d}; }
    // Every violated constraint, in a fixed order.
    std::vector<std::string> violations() const;
    // Throws ParameterError naming the first violated constraint.
    void validate() const;
};

struct StepSchedule {
    int nu = 0;
    double sigma = 0.0;
    double s_next = 0.0;
    double eta = 0.0;
    double r_next = 0.0;
    double mu = 0.0;
    double rho_next = 0.0;
    int K = 0;
    double eps_next_predicted = 0.0;
};

// Iteration sequences at step nu from the current widths and measured epsilon.
// sigma_nu = s / 2^{nu+2}, mu_nu = rho / 2^{nu+2}, eta = eps^{1/3}, r_{nu+1} = eta r_nu / 4,
// K_nu = ceil(c ln(1/eps) / mu_nu) capped at the lattice cutoff.
StepSchedule schedule(int nu, const KamParams& base, double s_nu, double r_nu, double rho_nu, double eps);

struct ExclusionTag {
    int nu = -1;
    std::string family;
    KVec k;
    int n = 0;
    int m = 0;
};

struct KamSample {
    Eigen::VectorXd xi;
    NormalForm normal;
    PairingForm pairing;
    QuadHamiltonian perturbation;
    TransformChain chain;
    double eps = 0.0;
    bool alive = true;
    ExclusionTag exclusion;
};

struct KamState {
    int nu = 0;
    double s = 0.0;
    double r = 0.0;
    double rho = 0.0;
    double M = 0.0;
    double L = 0.0;
    std::vector<KamSample> samples;

    DomainParams domain(const KamParams& p) const { return {s, r, rho, p.p, p.d}; }
    double max_eps() const;
    std::size_t alive_count() const;
};

struct StepDiagnostics {
    int nu = 0;
    int sample = 0;
    int K = 0;
    double s = 0.0;
    double r = 0.0;
    double rho = 0.0;
    double eps = 0.0;
    double eps_next = 0.0;
    double eps_predicted = 0.0;
    double residual = 0.0;            // homological residual relative to the seminorm of R
    double gate_literal = 0.0;        // 1/2 gamma^2 K^{-8 tau - 1}
    double gate_measured = 0.0;       // 2 K [[F]]^{beta, alpha}, must stay below 1
    double symplectic_residual = 0.0;
    double lie_tail = 0.0;
    int lie_terms = 0;
    double omega_shift = 0.0;         // |omega_{nu+1} - omega_nu|
    double Omega_shift = 0.0;         // sup_n <n>^{2 beta} |Omega^{nu+1}_n - Omega^nu_n|
    double pairing_size = 0.0;        // sup_n e^{|n| rho_{nu+1}} <n>^{2 beta} |a^{nu+1}_n|
    std::size_t excluded = 0;
    double seconds = 0.0;
};

struct StepResult {
    KamState state;
    std::vector<SymplecticMap> maps; // per sample, identity for excluded samples
    std::vector<StepDiagnostics> diagnostics;
};

// Measured size: Gamma^beta seminorm plus vector-field majorant.
double measure_eps(const QuadHamiltonian& P, const DomainParams& D, double beta);

KamState initial_state(const KamParams& params, std::vector<KamSample> samples);

StepResult kam_step(const KamState& state, const KamParams& params);

struct DriftBounds {
    double omega = 0.0;   // |omega* - omega|
    double Omega = 0.0;   // sup_n <n>^{2 beta} |Omega*_n - Omega_n|
    double pairing = 0.0; // sup_n <n>^{2 beta} e^{|n| rho} |a*_n|
};

struct KamRunResult {
    KamState final_state;
    std::vector<StepDiagnostics> steps;
    std::vector<std::vector<double>> eps_history; // per sample
    std::vector<DriftBounds> drift;               // per sample, against the seed
    std::vector<NormalForm> seed_normal;
    bool converged = false;
};

using SeedFactory = std::function<KamSample(const Eigen::VectorXd& xi)>;

// Iterates kam_step until every alive sample reaches the target or max_steps is hit.
KamRunResult kam_run(const SeedFactory& seed, const std::vector<Eigen::VectorXd>& samples, const KamParams& params);

DriftBounds drift_bounds(const NormalForm& seed, const NormalForm& final_normal, const PairingForm& final_pairing,
                         double rho);

// True iff every coefficient of P* has modulus at most tol.
bool low_order_flatness(const QuadHamiltonian& P, double tol);

// Real phase points: theta uniform on the torus, I_j uniform in [-r^2, r^2],
// z_n = u r e^{-|n| rho} <n>^{-p} e^{i phi} with u uniform in [0, 1] and zbar = conj(z).
std::vector<PhasePoint> sample_phase_points(int angles, int lattice_cutoff, const DomainParams& D, int count,
                                            std::uint64_t seed);

struct ConjugacyCheck {
    std::vector<double> errors;     // |H0(Psi(x)) - H(x)| per point
    std::vector<double> symplectic; // Frobenius defect of D Psi per point
    double max_error = 0.0;
    double max_symplectic = 0.0;
};

// Compares the seed Hamiltonian pulled back through the chain with the converged one.
ConjugacyCheck check_conjugacy(const QuadHamiltonian& seed, const QuadHamiltonian& converged,
                               const TransformChain& chain, const std::vector<PhasePoint>& points);

void write_step_csv(std::ostream& os, const std::vector<StepDiagnostics>& steps);

} // namespace subkam

#endif
