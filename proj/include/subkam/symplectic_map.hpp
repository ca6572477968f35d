#ifndef SUBKAM_SYMPLECTIC_MAP_HPP
#define SUBKAM_SYMPLECTIC_MAP_HPP

#include <map>
#include <vector>

#include <Eigen/Dense>

#include "subkam/algebra.hpp"
#include "subkam/quad_hamiltonian.hpp"

namespace subkam {

// Transformation of the form
//   theta -> theta + s(theta)
//   I     -> I + M(theta, Z) + L(theta) Z      (stored as full images I'_j(theta, I, Z))
//   Z     -> T(theta) + U(theta) Z,            Z = (z, zbar)
// with T, U given by their Fourier coefficients.
class SymplecticMap {
public:
    SymplecticMap() = default;
    static SymplecticMap identity(int angles, int lattice_cutoff);

    int angles() const { return d_; }
    int lattice_cutoff() const { return cutoff_; }
    int sites() const { return 2 * cutoff_ + 1; }
    int phase_dim() const { return 2 * d_ + 2 * sites(); }

    std::map<KVec, Eigen::VectorXcd> T;
    std::map<KVec, Eigen::MatrixXcd> U;
    std::vector<QuadHamiltonian> action_images;
    std::vector<QuadHamiltonian> angle_shifts;

    bool theta_identity() const;

    Eigen::VectorXcd z_offset(const Eigen::VectorXd& theta) const;
    Eigen::MatrixXcd z_matrix(const Eigen::VectorXd& theta) const;

    PhasePoint apply(const PhasePoint& x) const;
    // Rows and columns ordered (theta, I, z, zbar).
    Eigen::MatrixXcd jacobian(const PhasePoint& x) const;

private:
    int d_ = 1;
    int cutoff_ = 0;
    friend SymplecticMap make_map(int angles, int lattice_cutoff);
};

// Empty map shell (no Fourier blocks, identity action and zero angle images) to be filled by a builder.
SymplecticMap make_map(int angles, int lattice_cutoff);

// The map x -> second(first(x)). Requires first to leave the angles fixed.
SymplecticMap compose(const SymplecticMap& first, const SymplecticMap& second);

// Matrix of the form dI ^ dtheta + i sum dz ^ dzbar in (theta, I, z, zbar) order.
Eigen::MatrixXcd symplectic_form(int angles, int sites);

// Frobenius norm of Dᵀ J D - J.
double symplectic_defect(const Eigen::MatrixXcd& D, int angles, int sites);

// max over samples of the defect of the Jacobian.
double symplectic_residual(const SymplecticMap& phi, const std::vector<PhasePoint>& samples);

// Psi = Phi_0 o Phi_1 o ... o Phi_nu, kept as a list and evaluated right to left.
class TransformChain {
public:
    TransformChain() = default;
    TransformChain(int angles, int lattice_cutoff) : d_(angles), cutoff_(lattice_cutoff) {}

    void append(SymplecticMap phi) { maps_.push_back(std::move(phi)); }
    const std::vector<SymplecticMap>& maps() const { return maps_; }
    std::size_t size() const { return maps_.size(); }
    int angles() const { return d_; }
    int lattice_cutoff() const { return cutoff_; }

    PhasePoint apply(const PhasePoint& x) const;
    Eigen::MatrixXcd jacobian(const PhasePoint& x) const;
    // Z-block of the composed map at fixed angles (valid when every map leaves the angles fixed).
    Eigen::MatrixXcd z_matrix(const Eigen::VectorXd& theta) const;
    Eigen::VectorXcd z_offset(const Eigen::VectorXd& theta) const;
    double symplectic_residual(const std::vector<PhasePoint>& samples) const;

private:
    int d_ = 1;
    int cutoff_ = 0;
    std::vector<SymplecticMap> maps_;
};

} // namespace subkam

#endif
