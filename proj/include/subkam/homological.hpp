#ifndef SUBKAM_HOMOLOGICAL_HPP
#define SUBKAM_HOMOLOGICAL_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "subkam/normal_form.hpp"
#include "subkam/quad_hamiltonian.hpp"
#include "subkam/spaces.hpp"

namespace subkam {

enum class Component { F0, F1, F10, F01, F11, F20, F02 };

std::string to_string(Component c);

// One block of the homological equation, M x = rhs.
//   F0, F1:   i<k,omega>, rhs = R
//   F10:      <k,omega> I + A_n,                              unknowns F^10 on (n, -n), rhs = -i R^10
//   F01:      <k,omega> I - A_n^T,                            unknowns F^01 on (n, -n), rhs = -i R^01
//   F11:      <k,omega> I + A_n (x) I - I (x) A_m^T,          rhs = -i R^11
//   F20:      <k,omega> I + A_n (x) I + I (x) A_m,            rhs = -i R^20
//   F02:      <k,omega> I - A_n^T (x) I - I (x) A_m^T,        rhs = -i R^02
// Unknowns are ordered (n, m), (n, -m), (-n, m), (-n, -m); n = 0 or m = 0 collapse the factor to one site.
struct BlockSystem {
    int dim = 1;
    Eigen::MatrixXcd matrix;
    Eigen::VectorXcd rhs;
    KVec k;
    int n = 0;
    int m = 0;
    Component component = Component::F0;
    std::vector<int> first_sites;  // sites of the first factor, (n) or (n, -n)
    std::vector<int> second_sites; // sites of the second factor
};

// rhs is filled from R when given, zero otherwise. n, m >= 0 select the orbits {+-n}, {+-m}.
BlockSystem assemble_block(const NormalForm& N, const PairingForm& A, const KVec& k, int n, int m, Component c,
                           const QuadHamiltonian* R = nullptr);

// Explicit inverse for dim <= 4.
Eigen::MatrixXcd block_inverse(const Eigen::MatrixXcd& M);
// Largest singular value of the explicit inverse; infinity for a singular block.
double inverse_norm(const Eigen::MatrixXcd& M);

enum class DivisorFamily { Scalar, Pair, Sum, Difference };

std::string to_string(DivisorFamily f);

struct DivisorEntry {
    KVec k;
    int n = 0;
    int m = 0;
    DivisorFamily family = DivisorFamily::Scalar;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = true;
};

struct SmallDivisorReport {
    double gamma = 0.0;
    double tau = 0.0;
    int K = 0;
    int orbit_cap = 0;       // largest |n| enumerated
    long long auto_passed = 0; // orbit pairs certified by the gap bound instead of enumeration
    std::vector<DivisorEntry> entries;

    double threshold(DivisorFamily f) const;
    bool all_pass() const;
    const DivisorEntry* first_failure() const;
    std::size_t failure_count() const;
    void write_csv(std::ostream& os) const;
};

// Evaluates inverse norms of every block with |k| <= K and orbits |n|, |m| <= min(N, ceil(K^{2 tau} / gamma)).
// Families: scalar <k,omega> (k != 0), pair <k,omega> + A_n, sum blocks, difference blocks (k != 0, ||n| - |m|| < K).
SmallDivisorReport small_divisor_report(const NormalForm& N, const PairingForm& A, int K, double gamma, double tau);

// Solves {N + A, F} + R - <R> - R^0_0 = 0 block by block. F vanishes on the support of <R> and on the k = 0 constant.
// Touched blocks failing the report thresholds raise ResonanceError; untouched blocks are ignored.
QuadHamiltonian solve_homological(const NormalForm& N, const PairingForm& A, const QuadHamiltonian& R,
                                  const SmallDivisorReport& report);

// {N + A, F} + R - <R> - R^0_0.
QuadHamiltonian homological_defect(const NormalForm& N, const PairingForm& A, const QuadHamiltonian& F,
                                   const QuadHamiltonian& R);

// Gamma^beta seminorm of the defect.
double homological_residual(const NormalForm& N, const PairingForm& A, const QuadHamiltonian& F,
                            const QuadHamiltonian& R, const DomainParams& D, double beta);

struct RandomSeedOptions {
    int K = 8;
    double beta = 0.5;
    DomainParams domain;
    double scale = 1.0;
    bool zzbar_only = false;   // only z zbar monomials
    bool averaged_only = false; // only the k = 0 mode
};

// Random real Hamiltonian whose coefficients have modulus at most
// scale e^{-|k| s} times the Gamma^beta weight of each monomial, with uniform phases.
QuadHamiltonian random_decaying_perturbation(int angles, int lattice_cutoff, const RandomSeedOptions& opts,
                                             std::uint64_t seed);

} // namespace subkam

#endif
