#ifndef SUBKAM_LIE_HPP
#define SUBKAM_LIE_HPP

#include "subkam/quad_hamiltonian.hpp"
#include "subkam/symplectic_map.hpp"

namespace subkam {

struct LieOptions {
    int order = 6;          // nested brackets always summed
    double tail_tol = 1e-14; // target for the geometric tail estimate
    int max_order = 40;     // hard cap on the adaptive extension
    double mode_floor = 0.0;  // nested brackets drop Fourier modes below this relative weighted size
    double floor_width = 0.0; // angle width s of the weight e^{|k| s} used by mode_floor
};

struct LieSeriesResult {
    QuadHamiltonian value;
    int terms = 0;
    double tail = 0.0;
};

// H o X_F^1 = sum_j ad_F^j H / j!, ad_F G = {G, F}.
LieSeriesResult lie_series(const QuadHamiltonian& H, const QuadHamiltonian& F, const LieOptions& opts = {});

// Time-one map X_F^1 from the Lie series of the coordinate functions.
SymplecticMap lie_map(const QuadHamiltonian& F, const LieOptions& opts = {}, double* tail = nullptr);

struct LieTransformResult {
    QuadHamiltonian perturbation; // P_+
    SymplecticMap map;            // X_F^1
    int terms = 0;
    double tail = 0.0;
};

// For F solving {N + A, F} = <R> - R, returns P_+ with
//   (N + A + P) o X_F^1 = N + A + <R> + R^0_0 + P_+,
// evaluated as (P - R) + sum_{j>=1} [ad_F^j W / (j+1)! + ad_F^j P / j!], W = <R> - R,
// so that N never enters a bracket.
LieTransformResult lie_transform(const QuadHamiltonian& P, const QuadHamiltonian& F, const QuadHamiltonian& R,
                                 const QuadHamiltonian& mean, const LieOptions& opts = {});

// Sum of coefficient moduli, used for term sizes.
double coefficient_l1(const QuadHamiltonian& H);

} // namespace subkam

#endif
