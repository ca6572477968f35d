#include "subkam/lattice.hpp"

#include <cstdlib>
#include <stdexcept>

namespace subkam {

int l1_norm(const KVec& k)
{
    int s = 0;
    for (int v : k) s += std::abs(v);
    return s;
}

KVec negate(const KVec& k)
{
    KVec out(k.size());
    for (std::size_t j = 0; j < k.size(); ++j) out[j] = -k[j];
    return out;
}

KVec add(const KVec& a, const KVec& b)
{
    if (a.size() != b.size()) throw std::invalid_argument("Fourier index dimension mismatch");
    KVec out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] + b[j];
    return out;
}

bool is_zero(const KVec& k)
{
    for (int v : k)
        if (v != 0) return false;
    return true;
}

double dot(const KVec& k, const Eigen::VectorXd& omega)
{
    double s = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) s += k[j] * omega[static_cast<Eigen::Index>(j)];
    return s;
}

std::string to_string(const KVec& k)
{
    std::string s;
    for (std::size_t j = 0; j < k.size(); ++j) {
        if (j) s += ' ';
        s += std::to_string(k[j]);
    }
    return s;
}

namespace {

void enumerate_rec(int d, int budget, KVec& cur, std::vector<KVec>& out)
{
    if (static_cast<int>(cur.size()) == d) {
        out.push_back(cur);
        return;
    }
    for (int v = -budget; v <= budget; ++v) {
        cur.push_back(v);
        enumerate_rec(d, budget - std::abs(v), cur, out);
        cur.pop_back();
    }
}

} // namespace

std::vector<KVec> enumerate_kvecs(int d, int K)
{
    std::vector<KVec> out;
    KVec cur;
    enumerate_rec(d, K, cur, out);
    return out;
}

} // namespace subkam
