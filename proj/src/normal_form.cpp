#include "subkam/normal_form.hpp"

#include <cmath>

#include "subkam/errors.hpp"

namespace subkam {

NormalForm::NormalForm(Eigen::VectorXd omega_, double alpha_, double lambda_, double beta_, int lattice_cutoff)
    : omega(std::move(omega_)), alpha(alpha_), lambda(lambda_),
      tilde_omega(Eigen::VectorXd::Zero(2 * lattice_cutoff + 1)), beta(beta_)
{
    validate();
}

double NormalForm::Omega(int n) const
{
    const int N = lattice_cutoff();
    return std::pow(std::abs(n), alpha) + lambda + tilde_omega[n + N];
}

double NormalForm::tilde_weight() const
{
    const int N = lattice_cutoff();
    double w = 0.0;
    for (int n = -N; n <= N; ++n) w = std::max(w, std::pow(angle_bracket(n), 2.0 * beta) * std::abs(tilde_omega[n + N]));
    return w;
}

void NormalForm::validate() const
{
    if (omega.size() < 1) throw ParameterError("frequency vector is empty");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
    if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
    if (!(beta > 0.0)) throw ParameterError("beta must be positive");
    if (tilde_omega.size() % 2 != 1) throw ParameterError("frequency corrections must cover [-N, N]");
    const int N = lattice_cutoff();
    for (int n = -N; n <= N; ++n)
        if (!(Omega(n) > 0.0)) throw ParameterError("normal frequency Omega_" + std::to_string(n) + " is not positive");
    if (tilde_weight() > L * (1.0 + 1e-12) + 1e-300)
        throw ParameterError("frequency corrections exceed the tracked budget L");
}

double PairingForm::hermitian_defect() const
{
    const int N = lattice_cutoff();
    double d = 0.0;
    for (int n = -N; n <= N; ++n) d = std::max(d, std::abs(a[n + N] - std::conj(a[-n + N])));
    return d;
}

double PairingForm::support_excess(int K) const
{
    const int N = lattice_cutoff();
    double e = 0.0;
    for (int n = -N; n <= N; ++n)
        if (std::abs(n) > K) e = std::max(e, std::abs(a[n + N]));
    return e;
}

Eigen::MatrixXcd block_matrix(const NormalForm& N, const PairingForm& A, int n)
{
    if (n == 0) return Eigen::MatrixXcd::Constant(1, 1, N.Omega(0));
    Eigen::MatrixXcd M(2, 2);
    M << N.Omega(n), A.at(n), A.at(-n), N.Omega(-n);
    return M;
}

Eigen::MatrixXcd normal_matrix(const NormalForm& N, const PairingForm& A)
{
    const int cut = N.lattice_cutoff();
    const int S = 2 * cut + 1;
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(S, S);
    for (int n = -cut; n <= cut; ++n) {
        B(n + cut, n + cut) = N.Omega(n);
        if (n != 0) B(n + cut, -n + cut) = A.at(n);
    }
    return B;
}

QuadHamiltonian to_hamiltonian(const NormalForm& N, const PairingForm& A, int fourier_cutoff)
{
    const int d = N.angles();
    QuadHamiltonian H(d, N.lattice_cutoff(), fourier_cutoff);
    FourierMode& md = H.mode(KVec(d, 0));
    md.constant = N.energy;
    md.action = N.omega.cast<cplx>();
    md.zzbar = normal_matrix(N, A);
    return H;
}

} // namespace subkam
