#include "subkam/serialization.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "subkam/errors.hpp"

namespace subkam {

namespace {

void write_k(std::ostream& os, const KVec& k)
{
    for (int v : k) os << ' ' << v;
}

void write_cplx(std::ostream& os, cplx c) { os << ' ' << c.real() << ' ' << c.imag(); }

void write_terms(std::ostream& os, const QuadHamiltonian& H, const std::string& prefix)
{
    H.for_each_term([&](const MonomialKey& key, cplx c) {
        os << prefix << to_string(key.kind);
        write_k(os, key.k);
        os << ' ' << key.n << ' ' << key.m;
        write_cplx(os, c);
        os << '\n';
    });
}

std::string next_line(std::istream& is)
{
    std::string line;
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '#') return line;
    return {};
}

int read_header(std::istream& is, const std::string& name)
{
    std::istringstream ls(next_line(is));
    std::string key;
    int v = 0;
    if (!(ls >> key >> v) || key != name) throw IoError("expected header field '" + name + "'");
    return v;
}

KVec read_k(std::istream& ls, int d)
{
    KVec k(d);
    for (int j = 0; j < d; ++j)
        if (!(ls >> k[j])) throw IoError("truncated Fourier index");
    return k;
}

cplx read_cplx(std::istream& ls)
{
    double re = 0.0, im = 0.0;
    if (!(ls >> re >> im)) throw IoError("truncated coefficient");
    return {re, im};
}

void read_term(std::istream& ls, QuadHamiltonian& H)
{
    std::string kind;
    if (!(ls >> kind)) throw IoError("missing monomial kind");
    MonomialKey key;
    key.kind = monomial_kind_from_string(kind);
    key.k = read_k(ls, H.angles());
    if (!(ls >> key.n >> key.m)) throw IoError("truncated lattice index");
    H.add(key, read_cplx(ls));
}

void expect_magic(std::istream& is, const std::string& magic)
{
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) break;
    if (line != magic) throw IoError("expected '" + magic + "'");
}

} // namespace

void write_hamiltonian(std::ostream& os, const QuadHamiltonian& H)
{
    os << std::setprecision(17);
    os << "# subkam-hamiltonian v1\n";
    os << "angles " << H.angles() << "\nlattice_cutoff " << H.lattice_cutoff() << "\nfourier_cutoff "
       << H.fourier_cutoff() << "\nreal " << (H.real() ? 1 : 0) << '\n';
    write_terms(os, H, "");
    os << "end\n";
}

QuadHamiltonian read_hamiltonian(std::istream& is)
{
    expect_magic(is, "# subkam-hamiltonian v1");
    const int d = read_header(is, "angles");
    const int N = read_header(is, "lattice_cutoff");
    const int K = read_header(is, "fourier_cutoff");
    const int real = read_header(is, "real");
    QuadHamiltonian H(d, N, K, real != 0);
    for (std::string line = next_line(is); line != "end"; line = next_line(is)) {
        if (line.empty()) throw IoError("missing 'end' in Hamiltonian record");
        std::istringstream ls(line);
        read_term(ls, H);
    }
    H.set_real(real != 0);
    return H;
}

void write_map(std::ostream& os, const SymplecticMap& phi)
{
    os << std::setprecision(17);
    os << "# subkam-map v1\n";
    os << "angles " << phi.angles() << "\nlattice_cutoff " << phi.lattice_cutoff() << '\n';
    for (const auto& [k, t] : phi.T)
        for (Eigen::Index i = 0; i < t.size(); ++i)
            if (t[i] != cplx(0.0)) {
                os << 'T';
                write_k(os, k);
                os << ' ' << i;
                write_cplx(os, t[i]);
                os << '\n';
            }
    for (const auto& [k, u] : phi.U)
        for (Eigen::Index i = 0; i < u.rows(); ++i)
            for (Eigen::Index j = 0; j < u.cols(); ++j)
                if (u(i, j) != cplx(0.0)) {
                    os << 'U';
                    write_k(os, k);
                    os << ' ' << i << ' ' << j;
                    write_cplx(os, u(i, j));
                    os << '\n';
                }
    for (int j = 0; j < phi.angles(); ++j) {
        write_terms(os, phi.action_images[j], "IMAGE " + std::to_string(j) + " ");
        write_terms(os, phi.angle_shifts[j], "SHIFT " + std::to_string(j) + " ");
    }
    os << "end\n";
}

SymplecticMap read_map(std::istream& is)
{
    expect_magic(is, "# subkam-map v1");
    const int d = read_header(is, "angles");
    const int N = read_header(is, "lattice_cutoff");
    SymplecticMap phi = make_map(d, N);
    for (auto& g : phi.action_images) g = QuadHamiltonian(d, N, 0);
    const int D = 2 * (2 * N + 1);
    for (std::string line = next_line(is); line != "end"; line = next_line(is)) {
        if (line.empty()) throw IoError("missing 'end' in map record");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "T") {
            KVec k = read_k(ls, d);
            int i = 0;
            if (!(ls >> i) || i < 0 || i >= D) throw IoError("bad offset index");
            auto& t = phi.T[k];
            if (t.size() == 0) t = Eigen::VectorXcd::Zero(D);
            t[i] = read_cplx(ls);
        } else if (tag == "U") {
            KVec k = read_k(ls, d);
            int i = 0, j = 0;
            if (!(ls >> i >> j) || i < 0 || j < 0 || i >= D || j >= D) throw IoError("bad matrix index");
            auto& u = phi.U[k];
            if (u.size() == 0) u = Eigen::MatrixXcd::Zero(D, D);
            u(i, j) = read_cplx(ls);
        } else if (tag == "IMAGE" || tag == "SHIFT") {
            int j = 0;
            if (!(ls >> j) || j < 0 || j >= d) throw IoError("bad action index");
            QuadHamiltonian& H = tag == "IMAGE" ? phi.action_images[j] : phi.angle_shifts[j];
            read_term(ls, H);
        } else {
            throw IoError("unknown map record '" + tag + "'");
        }
    }
    for (int j = 0; j < d; ++j) {
        int kmax = 0;
        for (const auto& [k, md] : phi.action_images[j].modes()) kmax = std::max(kmax, l1_norm(k));
        phi.action_images[j].set_fourier_cutoff(kmax);
    }
    return phi;
}

void write_chain(std::ostream& os, const TransformChain& chain)
{
    os << "# subkam-chain v1\n";
    os << "angles " << chain.angles() << "\nlattice_cutoff " << chain.lattice_cutoff() << "\nmaps " << chain.size()
       << '\n';
    for (const auto& phi : chain.maps()) write_map(os, phi);
}

TransformChain read_chain(std::istream& is)
{
    expect_magic(is, "# subkam-chain v1");
    const int d = read_header(is, "angles");
    const int N = read_header(is, "lattice_cutoff");
    const int count = read_header(is, "maps");
    TransformChain chain(d, N);
    for (int i = 0; i < count; ++i) chain.append(read_map(is));
    return chain;
}

namespace {

template <class F>
void with_output(const std::string& path, F&& body)
{
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    body(os);
    if (!os) throw IoError("write to '" + path + "' failed");
}

template <class F>
auto with_input(const std::string& path, F&& body)
{
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "'");
    return body(is);
}

} // namespace

void save_hamiltonian(const std::string& path, const QuadHamiltonian& H)
{
    with_output(path, [&](std::ostream& os) { write_hamiltonian(os, H); });
}

QuadHamiltonian load_hamiltonian(const std::string& path)
{
    return with_input(path, [](std::istream& is) { return read_hamiltonian(is); });
}

void save_chain(const std::string& path, const TransformChain& chain)
{
    with_output(path, [&](std::ostream& os) { write_chain(os, chain); });
}

TransformChain load_chain(const std::string& path)
{
    return with_input(path, [](std::istream& is) { return read_chain(is); });
}

} // namespace subkam
