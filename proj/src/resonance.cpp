#include "subkam/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "subkam/errors.hpp"
#include "subkam/homological.hpp"
#include "subkam/parallel.hpp"

namespace subkam {

std::string to_string(ResonanceFamily f)
{
    switch (f) {
    case ResonanceFamily::R0: return "R0";
    case ResonanceFamily::R1: return "R1";
    case ResonanceFamily::R2: return "R2";
    case ResonanceFamily::R11: return "R11";
    }
    return "?";
}

ResonanceFamily resonance_family_from_string(const std::string& s)
{
    if (s == "R0") return ResonanceFamily::R0;
    if (s == "R1") return ResonanceFamily::R1;
    if (s == "R2") return ResonanceFamily::R2;
    if (s == "R11") return ResonanceFamily::R11;
    throw ParameterError("unknown resonance family '" + s + "'");
}

namespace {

const int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double radical_inverse(std::uint64_t i, int base)
{
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

void check_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi)
{
    if (lo.size() < 1 || lo.size() != hi.size()) throw ParameterError("parameter box bounds must have equal nonzero length");
    for (Eigen::Index j = 0; j < lo.size(); ++j)
        if (!(hi[j] > lo[j])) throw ParameterError("parameter box must have positive extent on every axis");
}

} // namespace

ParamSet ParamSet::halton(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, std::size_t count, std::uint64_t seed)
{
    check_box(lo, hi);
    const int d = static_cast<int>(lo.size());
    if (d > static_cast<int>(std::size(kPrimes))) throw ParameterError("Halton sampling supports at most 16 dimensions");
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd shift(d);
    for (int j = 0; j < d; ++j) shift[j] = u(gen);
    ParamSet O;
    O.lo = lo;
    O.hi = hi;
    O.samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Eigen::VectorXd x(d);
        for (int j = 0; j < d; ++j) {
            double t = radical_inverse(i + 1, kPrimes[j]) + shift[j];
            t -= std::floor(t);
            x[j] = lo[j] + t * (hi[j] - lo[j]);
        }
        O.samples.push_back(std::move(x));
    }
    O.alive.assign(count, 1);
    O.tags.assign(count, ExclusionTag{});
    return O;
}

ParamSet ParamSet::grid(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int per_dim)
{
    check_box(lo, hi);
    if (per_dim < 1) throw ParameterError("grid needs at least one point per axis");
    const int d = static_cast<int>(lo.size());
    std::size_t count = 1;
    for (int j = 0; j < d; ++j) count *= static_cast<std::size_t>(per_dim);
    ParamSet O;
    O.lo = lo;
    O.hi = hi;
    for (std::size_t i = 0; i < count; ++i) {
        Eigen::VectorXd x(d);
        std::size_t r = i;
        for (int j = 0; j < d; ++j) {
            const double c = (static_cast<double>(r % per_dim) + 0.5) / per_dim;
            r /= per_dim;
            x[j] = lo[j] + c * (hi[j] - lo[j]);
        }
        O.samples.push_back(std::move(x));
    }
    O.alive.assign(count, 1);
    O.tags.assign(count, ExclusionTag{});
    return O;
}

double ParamSet::volume() const { return (hi - lo).prod(); }

std::size_t ParamSet::alive_count() const { return static_cast<std::size_t>(std::count(alive.begin(), alive.end(), 1)); }

double ParamSet::alive_fraction() const
{
    return samples.empty() ? 0.0 : static_cast<double>(alive_count()) / static_cast<double>(samples.size());
}

double ParamSet::alive_measure() const { return alive_fraction() * volume(); }

void ParamSet::exclude(std::size_t i, const ExclusionTag& tag)
{
    if (!alive.at(i)) return;
    alive[i] = 0;
    tags[i] = tag;
}

void ParamSet::validate() const
{
    check_box(lo, hi);
    if (alive.size() != samples.size() || tags.size() != samples.size())
        throw ParameterError("parameter set flags do not match the sample count");
    for (const auto& x : samples) {
        if (x.size() != lo.size()) throw ParameterError("sample dimension differs from the box");
        if ((x.array() < lo.array()).any() || (x.array() > hi.array()).any())
            throw ParameterError("sample lies outside the parameter box");
    }
}

double ResonanceLevel::threshold(ResonanceFamily f) const
{
    const double k = K;
    switch (f) {
    case ResonanceFamily::R0: return std::pow(k, tau1) / gamma;
    case ResonanceFamily::R1: return std::pow(k, 2.0 * tau1) / gamma;
    case ResonanceFamily::R2: return std::pow(k, 4.0 * tau1) / gamma;
    case ResonanceFamily::R11: return std::pow(k, 12.0 * tau1 + 16.0 * varsigma) / gamma;
    }
    return 0.0;
}

int ResonanceLevel::orbit_cap(int N) const
{
    const double c = std::ceil(std::pow(static_cast<double>(K), 2.0 * tau1) / gamma);
    return c >= N ? N : static_cast<int>(c);
}

int ResonanceLevel::difference_cap(int N) const
{
    const double c = std::floor(std::pow(static_cast<double>(K), tau1 + 2.0 * varsigma));
    return c >= N ? N : static_cast<int>(c);
}

void ResonanceLevel::validate() const
{
    if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
    if (K < 1) throw ParameterError("K must be at least 1");
    if (!(tau1 > 0.0)) throw ParameterError("tau1 must be positive");
    if (!(varsigma > 0.0)) throw ParameterError("varsigma must be positive");
}

void ResonanceQuery::validate() const
{
    level.validate();
    if (n < 0 || m < 0) throw ParameterError("orbit representatives must be nonnegative");
    if ((family == ResonanceFamily::R0 || family == ResonanceFamily::R11) && is_zero(k))
        throw ParameterError(to_string(family) + " requires k != 0");
    if (family == ResonanceFamily::R11 && std::abs(n - m) > level.K) throw ParameterError("R11 requires |n - m| <= K");
    if (l1_norm(k) > level.K) throw ParameterError("|k| exceeds K");
}

double resonance_value(const ResonanceQuery& q, const NormalForm& N, const PairingForm& A)
{
    q.validate();
    switch (q.family) {
    case ResonanceFamily::R0: return inverse_norm(assemble_block(N, A, q.k, 0, 0, Component::F0).matrix);
    case ResonanceFamily::R1: return inverse_norm(assemble_block(N, A, q.k, q.n, 0, Component::F10).matrix);
    case ResonanceFamily::R2: return inverse_norm(assemble_block(N, A, q.k, q.n, q.m, Component::F20).matrix);
    case ResonanceFamily::R11: return inverse_norm(assemble_block(N, A, q.k, q.n, q.m, Component::F11).matrix);
    }
    return 0.0;
}

bool resonance_membership(const ResonanceQuery& q, const NormalForm& N, const PairingForm& A)
{
    return resonance_value(q, N, A) >= q.level.threshold(q.family);
}

FrequencyModel identity_model(double alpha, double lambda, double beta, int lattice_cutoff)
{
    return [=](const Eigen::VectorXd& xi) {
        return std::make_pair(NormalForm(xi, alpha, lambda, beta, lattice_cutoff), PairingForm(lattice_cutoff));
    };
}

bool FamilyMask::has(ResonanceFamily f) const
{
    switch (f) {
    case ResonanceFamily::R0: return r0;
    case ResonanceFamily::R1: return r1;
    case ResonanceFamily::R2: return r2;
    case ResonanceFamily::R11: return r11;
    }
    return false;
}

FamilyMask FamilyMask::only(ResonanceFamily f)
{
    FamilyMask m{false, false, false, false};
    switch (f) {
    case ResonanceFamily::R0: m.r0 = true; break;
    case ResonanceFamily::R1: m.r1 = true; break;
    case ResonanceFamily::R2: m.r2 = true; break;
    case ResonanceFamily::R11: m.r11 = true; break;
    }
    return m;
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z)
{
    if (trials == 0) throw EmptySetError("Wilson interval needs at least one trial");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

// Spectrum of A_n on the orbit {n, -n}: one value for n = 0, two otherwise.
struct OrbitSpectrum {
    double e[2] = {0.0, 0.0};
    int count = 1;
};

std::vector<OrbitSpectrum> orbit_spectra(const NormalForm& N, const PairingForm& A, int cap)
{
    std::vector<OrbitSpectrum> out(cap + 1);
    out[0].e[0] = N.Omega(0);
    for (int n = 1; n <= cap; ++n) {
        const double p = N.Omega(n), q = N.Omega(-n);
        const double mean = 0.5 * (p + q);
        const double rad = std::hypot(0.5 * (p - q), std::abs(A.at(n)));
        out[n].e[0] = mean - rad;
        out[n].e[1] = mean + rad;
        out[n].count = 2;
    }
    return out;
}

struct SampleOutcome {
    std::array<bool, 4> member{};
    bool any = false;
    ExclusionTag tag;
    long long queries = 0;
};

struct Evaluator {
    const ResonanceLevel& level;
    const FamilyMask& mask;
    int N;
    std::vector<KVec> kvecs;
    double h0, h1, h2, h11; // reciprocal thresholds
    int cap, dcap;

    Evaluator(const ResonanceLevel& lv, const FamilyMask& m, int N_, int d)
        : level(lv), mask(m), N(N_), kvecs(enumerate_kvecs(d, lv.K)),
          h0(1.0 / lv.threshold(ResonanceFamily::R0)), h1(1.0 / lv.threshold(ResonanceFamily::R1)),
          h2(1.0 / lv.threshold(ResonanceFamily::R2)), h11(1.0 / lv.threshold(ResonanceFamily::R11)),
          cap(lv.orbit_cap(N_)), dcap(lv.difference_cap(N_))
    {
    }

    void hit(SampleOutcome& o, ResonanceFamily f, const KVec& k, int n, int m) const
    {
        o.member[static_cast<int>(f)] = true;
        if (!o.any) o.tag = {level.nu, to_string(f), k, n, m};
        o.any = true;
    }

    // Every block is a real shift of a Hermitian matrix, so the inverse norm is 1 / min |eigenvalue|.
    SampleOutcome fast(const NormalForm& nf, const PairingForm& pf) const
    {
        SampleOutcome o;
        const auto spec = orbit_spectra(nf, pf, std::max(cap, dcap));
        for (const KVec& k : kvecs) {
            const double w = dot(k, nf.omega);
            const bool k0 = is_zero(k);
            if (mask.r0 && !k0) {
                ++o.queries;
                if (std::abs(w) <= h0) hit(o, ResonanceFamily::R0, k, 0, 0);
            }
            if (mask.r1)
                for (int n = 0; n <= cap; ++n) {
                    ++o.queries;
                    double v = std::numeric_limits<double>::infinity();
                    for (int i = 0; i < spec[n].count; ++i) v = std::min(v, std::abs(w + spec[n].e[i]));
                    if (v <= h1) hit(o, ResonanceFamily::R1, k, n, 0);
                }
            if (mask.r2)
                for (int n = 0; n <= cap; ++n)
                    for (int m = n; m <= cap; ++m) {
                        ++o.queries;
                        double v = std::numeric_limits<double>::infinity();
                        for (int i = 0; i < spec[n].count; ++i)
                            for (int j = 0; j < spec[m].count; ++j)
                                v = std::min(v, std::abs(w + spec[n].e[i] + spec[m].e[j]));
                        if (v <= h2) hit(o, ResonanceFamily::R2, k, n, m);
                    }
            if (mask.r11 && !k0)
                for (int n = 0; n <= dcap; ++n)
                    for (int m = std::max(0, n - level.K); m <= std::min(dcap, n + level.K); ++m) {
                        ++o.queries;
                        double v = std::numeric_limits<double>::infinity();
                        for (int i = 0; i < spec[n].count; ++i)
                            for (int j = 0; j < spec[m].count; ++j)
                                v = std::min(v, std::abs(w + spec[n].e[i] - spec[m].e[j]));
                        if (v <= h11) hit(o, ResonanceFamily::R11, k, n, m);
                    }
        }
        return o;
    }

    SampleOutcome dense(const NormalForm& nf, const PairingForm& pf) const
    {
        SampleOutcome o;
        auto check = [&](ResonanceFamily f, const KVec& k, int n, int m) {
            ++o.queries;
            if (resonance_membership({f, k, n, m, level}, nf, pf)) hit(o, f, k, n, m);
        };
        for (const KVec& k : kvecs) {
            const bool k0 = is_zero(k);
            if (mask.r0 && !k0) check(ResonanceFamily::R0, k, 0, 0);
            if (mask.r1)
                for (int n = 0; n <= cap; ++n) check(ResonanceFamily::R1, k, n, 0);
            if (mask.r2)
                for (int n = 0; n <= cap; ++n)
                    for (int m = n; m <= cap; ++m) check(ResonanceFamily::R2, k, n, m);
            if (mask.r11 && !k0)
                for (int n = 0; n <= dcap; ++n)
                    for (int m = std::max(0, n - level.K); m <= std::min(dcap, n + level.K); ++m)
                        check(ResonanceFamily::R11, k, n, m);
        }
        return o;
    }
};

} // namespace

ExcludedMeasure excluded_measure(ParamSet& O, const ResonanceLevel& level, const FrequencyModel& model,
                                 const MeasureOptions& opts)
{
    level.validate();
    O.validate();
    if (O.size() == 0) throw EmptySetError("excluded_measure needs a nonempty sample set");
    const Evaluator ev(level, opts.families, opts.lattice_cutoff, O.dim());
    const std::size_t stride =
        opts.cross_check_fraction > 0.0 ? std::max<std::size_t>(1, static_cast<std::size_t>(1.0 / opts.cross_check_fraction))
                                        : 0;

    std::vector<SampleOutcome> outcome(O.size());
    std::vector<char> checked(O.size(), 0), mismatch(O.size(), 0);
    parallel_for(O.size(), [&](std::size_t i) {
        if (!O.alive[i]) return;
        const auto [nf, pf] = model(O.samples[i]);
        const bool hermitian = pf.hermitian_defect() <= 1e-14 * (1.0 + pf.a.cwiseAbs().maxCoeff());
        outcome[i] = hermitian ? ev.fast(nf, pf) : ev.dense(nf, pf);
        if (hermitian && stride && i % stride == 0) {
            checked[i] = 1;
            const SampleOutcome ref = ev.dense(nf, pf);
            mismatch[i] = ref.member != outcome[i].member;
        }
    });

    ExcludedMeasure res;
    res.total = O.size();
    res.enumerated = 0;
    for (std::size_t i = 0; i < O.size(); ++i) {
        if (!O.alive[i]) continue;
        ++res.evaluated;
        res.enumerated = std::max(res.enumerated, outcome[i].queries);
        for (int f = 0; f < 4; ++f) res.family_counts[f] += outcome[i].member[f] ? 1 : 0;
        res.cross_checked += checked[i];
        res.cross_check_mismatch += mismatch[i];
        if (outcome[i].any) {
            ++res.excluded;
            if (opts.mark) O.exclude(i, outcome[i].tag);
        }
    }
    res.fraction = static_cast<double>(res.excluded) / static_cast<double>(res.total);
    res.ci = wilson_interval(res.excluded, res.total);
    res.measure = res.fraction * O.volume();
    return res;
}

double interval_union_length(std::vector<Interval> intervals, double lo, double hi)
{
    for (auto& iv : intervals) {
        iv.lo = std::max(iv.lo, lo);
        iv.hi = std::min(iv.hi, hi);
    }
    intervals.erase(std::remove_if(intervals.begin(), intervals.end(), [](const Interval& iv) { return !(iv.hi > iv.lo); }),
                    intervals.end());
    std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    double total = 0.0, cur_lo = 0.0, cur_hi = 0.0;
    bool open = false;
    for (const auto& iv : intervals) {
        if (open && iv.lo <= cur_hi) {
            cur_hi = std::max(cur_hi, iv.hi);
            continue;
        }
        if (open) total += cur_hi - cur_lo;
        cur_lo = iv.lo;
        cur_hi = iv.hi;
        open = true;
    }
    if (open) total += cur_hi - cur_lo;
    return total;
}

double exact_excluded_fraction_1d(double lo, double hi, const ResonanceLevel& level, double alpha, double lambda,
                                  int lattice_cutoff, const FamilyMask& families)
{
    level.validate();
    if (!(hi > lo)) throw ParameterError("interval must have positive length");
    std::vector<double> Om(lattice_cutoff + 1);
    for (int n = 0; n <= lattice_cutoff; ++n) Om[n] = std::pow(n, alpha) + lambda;
    const int cap = level.orbit_cap(lattice_cutoff), dcap = level.difference_cap(lattice_cutoff);
    std::vector<Interval> ivs;
    // {xi : |k xi + c| <= h}
    auto add = [&](int k, double c, double h) {
        if (k == 0) {
            if (std::abs(c) <= h) ivs.push_back({lo, hi});
            return;
        }
        const double a = (-c - h) / k, b = (-c + h) / k;
        ivs.push_back({std::min(a, b), std::max(a, b)});
    };
    for (int k = -level.K; k <= level.K; ++k) {
        if (families.r0 && k != 0) add(k, 0.0, 1.0 / level.threshold(ResonanceFamily::R0));
        if (families.r1)
            for (int n = 0; n <= cap; ++n) add(k, Om[n], 1.0 / level.threshold(ResonanceFamily::R1));
        if (families.r2)
            for (int n = 0; n <= cap; ++n)
                for (int m = n; m <= cap; ++m) add(k, Om[n] + Om[m], 1.0 / level.threshold(ResonanceFamily::R2));
        if (families.r11 && k != 0)
            for (int n = 0; n <= dcap; ++n)
                for (int m = std::max(0, n - level.K); m <= std::min(dcap, n + level.K); ++m)
                    add(k, Om[n] - Om[m], 1.0 / level.threshold(ResonanceFamily::R11));
    }
    return interval_union_length(std::move(ivs), lo, hi) / (hi - lo);
}

double alpha_gap(int n, int m, double alpha, int K)
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
    if (n == 0 || m == 0) throw ParameterError("alpha_gap needs nonzero n and m");
    if (std::abs(n) == std::abs(m)) throw ParameterError("alpha_gap needs |n| != |m|");
    if (K > 0 && std::abs(n - m) > K) throw ParameterError("alpha_gap needs |n - m| <= K");
    const double an = std::abs(n), am = std::abs(m);
    const double gap = std::abs(std::pow(an, alpha) - std::pow(am, alpha));
    const double bound = alpha / (2.0 * std::pow(am, 1.0 - alpha));
    if (gap < bound) throw Error("alpha gap lower bound violated at n = " + std::to_string(n) + ", m = " + std::to_string(m));
    if (K > 1 && (an < am / K || an > K * am))
        throw Error("index ratio bound violated at n = " + std::to_string(n) + ", m = " + std::to_string(m));
    return gap;
}

GapScan alpha_gap_scan(int max_index, double alpha)
{
    if (max_index < 2) throw ParameterError("scan needs max_index >= 2");
    std::vector<double> p(max_index + 1), b(max_index + 1);
    for (int n = 1; n <= max_index; ++n) {
        p[n] = std::pow(n, alpha);
        b[n] = alpha / (2.0 * std::pow(n, 1.0 - alpha));
    }
    std::vector<GapScan> per(max_index + 1);
    parallel_for(static_cast<std::size_t>(max_index), [&](std::size_t idx) {
        const int m = static_cast<int>(idx) + 1;
        GapScan& s = per[m];
        s.worst_ratio = std::numeric_limits<double>::infinity();
        for (int n = 1; n <= max_index; ++n) {
            if (n == m) continue;
            ++s.pairs;
            const double r = std::abs(p[n] - p[m]) / b[m];
            s.worst_ratio = std::min(s.worst_ratio, r);
            if (r < 1.0) ++s.violations;
        }
    });
    GapScan total;
    total.worst_ratio = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= max_index; ++m) {
        total.pairs += per[m].pairs;
        total.violations += per[m].violations;
        total.worst_ratio = std::min(total.worst_ratio, per[m].worst_ratio);
    }
    return total;
}

double sublevel_measure(const std::function<double(double)>& g, double lo, double hi, double h, int cells)
{
    if (!(hi > lo)) throw ParameterError("interval must have positive length");
    if (!(h > 0.0)) throw ParameterError("sublevel height must be positive");
    if (cells < 1) throw ParameterError("cells must be positive");
    const double dx = (hi - lo) / cells;
    long long hits = 0;
    for (int i = 0; i < cells; ++i) hits += std::abs(g(lo + (i + 0.5) * dx)) <= h ? 1 : 0;
    return static_cast<double>(hits) / cells;
}

double sublevel_bound(double A, double B, int b, double h)
{
    if (!(A > 0.0 && B > 0.0)) throw ParameterError("derivative bounds must be positive");
    if (b < 0) throw ParameterError("b must be nonnegative");
    double sum = 0.0;
    for (int j = 2; j <= b + 3; ++j) sum += j;
    return A / B * 2.0 * (sum + 2.0 / B) * std::pow(h, 1.0 / (b + 3));
}

DeterminantGate determinant_gate(const KVec& k, int n, int m, const NormalForm& N, const PairingForm& A)
{
    const Eigen::MatrixXcd M = assemble_block(N, A, k, n, m, Component::F11).matrix;
    DeterminantGate g;
    g.det = std::abs(M.determinant());
    g.norm = Eigen::JacobiSVD<Eigen::MatrixXcd>(M).singularValues()[0];
    const int K = std::max(1, l1_norm(k));
    g.norm_over_K = g.norm / K;
    return g;
}

void write_measure_csv_header(std::ostream& os)
{
    os << "gamma,nu,K,family,excluded_fraction,ci_low,ci_high,enumerated\n";
}

void write_measure_csv_rows(std::ostream& os, const ResonanceLevel& level, const ExcludedMeasure& m)
{
    const auto prec = os.precision(10);
    const double n = static_cast<double>(m.total);
    for (int f = 0; f < 4; ++f) {
        const Interval ci = wilson_interval(m.family_counts[f], m.total);
        os << level.gamma << ',' << level.nu << ',' << level.K << ',' << to_string(static_cast<ResonanceFamily>(f)) << ','
           << m.family_counts[f] / n << ',' << ci.lo << ',' << ci.hi << ',' << m.enumerated << '\n';
    }
    os << level.gamma << ',' << level.nu << ',' << level.K << ",union," << m.fraction << ',' << m.ci.lo << ','
       << m.ci.hi << ',' << m.enumerated << '\n';
    os.precision(prec);
}

} // namespace subkam
