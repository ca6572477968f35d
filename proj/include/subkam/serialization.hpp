#ifndef SUBKAM_SERIALIZATION_HPP
#define SUBKAM_SERIALIZATION_HPP

#include <iosfwd>
#include <string>

#include "subkam/quad_hamiltonian.hpp"
#include "subkam/symplectic_map.hpp"

namespace subkam {

// Hamiltonian text format:
//   # subkam-hamiltonian v1
//   angles <d>
//   lattice_cutoff <N>
//   fourier_cutoff <K>
//   real <0|1>
//   <KIND> <k_1> ... <k_d> <n> <m> <re> <im>      one line per nonzero coefficient
// Map text format:
//   # subkam-map v1
//   angles <d>
//   lattice_cutoff <N>
//   T <k...> <i> <re> <im>                          offset entries, i in [0, 2(2N+1))
//   U <k...> <i> <j> <re> <im>                      matrix entries
//   IMAGE <j> <KIND> <k...> <n> <m> <re> <im>       action image coefficients
//   SHIFT <j> <KIND> <k...> <n> <m> <re> <im>       angle shift coefficients
// A chain is "# subkam-chain v1", "maps <count>", then the maps in order Phi_0, Phi_1, ...

void write_hamiltonian(std::ostream& os, const QuadHamiltonian& H);
QuadHamiltonian read_hamiltonian(std::istream& is);

void write_map(std::ostream& os, const SymplecticMap& phi);
SymplecticMap read_map(std::istream& is);

void write_chain(std::ostream& os, const TransformChain& chain);
TransformChain read_chain(std::istream& is);

void save_hamiltonian(const std::string& path, const QuadHamiltonian& H);
QuadHamiltonian load_hamiltonian(const std::string& path);
void save_chain(const std::string& path, const TransformChain& chain);
TransformChain load_chain(const std::string& path);

} // namespace subkam

#endif
