#ifndef SUBKAM_RESONANCE_HPP
#define SUBKAM_RESONANCE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "subkam/kam.hpp"
#include "subkam/normal_form.hpp"

namespace subkam {

enum class ResonanceFamily { R0, R1, R2, R11 };

std::string to_string(ResonanceFamily f);
ResonanceFamily resonance_family_from_string(const std::string& s);

// Parameter box with samples, alive flags and exclusion tags. Excluded samples never re-enter.
struct ParamSet {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
    std::vector<Eigen::VectorXd> samples;
    std::vector<char> alive;
    std::vector<ExclusionTag> tags;

    // Halton points with a seeded Cranley-Patterson shift.
    static ParamSet halton(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, std::size_t count, std::uint64_t seed);
    // Cell-centred grid with per_dim points per axis.
    static ParamSet grid(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int per_dim);

    int dim() const { return static_cast<int>(lo.size()); }
    std::size_t size() const { return samples.size(); }
    double volume() const;
    std::size_t alive_count() const;
    double alive_fraction() const;
    // Alive fraction times box volume.
    double alive_measure() const;
    void exclude(std::size_t i, const ExclusionTag& tag);
    void validate() const;
};

struct ResonanceLevel {
    double gamma = 0.1;
    int K = 1;
    double tau1 = 1.0;
    double varsigma = 4.0;
    int nu = 0;

    // K^{tau1}/gamma, K^{2 tau1}/gamma, K^{4 tau1}/gamma, K^{12 tau1 + 16 varsigma}/gamma.
    double threshold(ResonanceFamily f) const;
    // min(N, ceil(K^{2 tau1}/gamma)) for R1 and R2 orbits.
    int orbit_cap(int N) const;
    // min(N, floor(K^{tau1 + 2 varsigma})) for R11 orbits.
    int difference_cap(int N) const;
    void validate() const;
};

struct ResonanceQuery {
    ResonanceFamily family = ResonanceFamily::R0;
    KVec k;
    int n = 0; // orbit representatives, n, m >= 0
    int m = 0;
    ResonanceLevel level;

    void validate() const;
};

// Inverse norm of the block named by the query, computed from the dense block.
double resonance_value(const ResonanceQuery& q, const NormalForm& N, const PairingForm& A);
// True iff the inverse norm reaches the family threshold.
bool resonance_membership(const ResonanceQuery& q, const NormalForm& N, const PairingForm& A);

using FrequencyModel = std::function<std::pair<NormalForm, PairingForm>(const Eigen::VectorXd& xi)>;

// omega(xi) = xi, Omega_n = |n|^alpha + lambda, no pairing.
FrequencyModel identity_model(double alpha, double lambda, double beta, int lattice_cutoff);

struct FamilyMask {
    bool r0 = true;
    bool r1 = true;
    bool r2 = true;
    bool r11 = true;

    bool has(ResonanceFamily f) const;
    static FamilyMask only(ResonanceFamily f);
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct MeasureOptions {
    FamilyMask families;
    int lattice_cutoff = 32;
    double cross_check_fraction = 0.01;
    bool mark = true; // exclude members from the parameter set
};

struct ExcludedMeasure {
    std::size_t evaluated = 0; // alive samples on entry
    std::size_t total = 0;
    std::size_t excluded = 0;
    double fraction = 0.0; // excluded / total
    Interval ci;
    double measure = 0.0; // fraction times box volume
    std::array<std::size_t, 4> family_counts{}; // samples belonging to each family
    long long enumerated = 0; // (k, n, m) queries per sample
    std::size_t cross_checked = 0;
    std::size_t cross_check_mismatch = 0;
};

// Evaluates every alive sample against the enabled families at the given level.
ExcludedMeasure excluded_measure(ParamSet& O, const ResonanceLevel& level, const FrequencyModel& model,
                                 const MeasureOptions& opts);

// Exact measure fraction of the union of enabled families on [lo, hi] for omega = xi, no pairing (d = 1).
double exact_excluded_fraction_1d(double lo, double hi, const ResonanceLevel& level, double alpha, double lambda,
                                  int lattice_cutoff, const FamilyMask& families);

// Length of the union of intervals clipped to [lo, hi].
double interval_union_length(std::vector<Interval> intervals, double lo, double hi);

// ||n|^alpha - |m|^alpha|, checking the lower bound alpha / (2 |m|^{1 - alpha}) and, for K > 1, |m|/K <= |n| <= K|m|.
double alpha_gap(int n, int m, double alpha, int K = 0);

struct GapScan {
    long long pairs = 0;
    long long violations = 0;
    double worst_ratio = 0.0; // min over pairs of gap / bound
};

// Scans 1 <= n, m <= max_index, n != m.
GapScan alpha_gap_scan(int max_index, double alpha);

// Fraction of [lo, hi] where |g| <= h, midpoint rule on the given number of cells.
double sublevel_measure(const std::function<double(double)>& g, double lo, double hi, double h, int cells = 200000);

// (A/B) 2 (2 + 3 + ... + (b + 3) + 2/B) h^{1/(b+3)}.
double sublevel_bound(double A, double B, int b, double h);

struct DeterminantGate {
    double det = 0.0;   // |det M| of the difference block
    double norm = 0.0;  // ||M||_2
    double norm_over_K = 0.0;
};

DeterminantGate determinant_gate(const KVec& k, int n, int m, const NormalForm& N, const PairingForm& A);

// Rows gamma,nu,family,excluded_fraction,ci_low,ci_high,enumerated.
void write_measure_csv_header(std::ostream& os);
void write_measure_csv_rows(std::ostream& os, const ResonanceLevel& level, const ExcludedMeasure& m);

} // namespace subkam

#endif
