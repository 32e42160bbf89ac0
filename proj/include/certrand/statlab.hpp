#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "certrand/rng.hpp"
#include "certrand/simcore.hpp"
#include "json.hpp"

namespace certrand::statlab {

/// Classical probability distribution on K >= 1 outcomes.
struct Dist {
    std::vector<double> probabilities;

    explicit Dist(std::vector<double> p) : probabilities(std::move(p)) { validate(); }

    void validate() const {
        if (probabilities.empty()) throw std::invalid_argument("Dist: K >= 1 required");
        double total = 0.0;
        for (double x : probabilities) {
            if (x < 0.0) throw std::invalid_argument("Dist: negative probability");
            total += x;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("Dist: normalization off by " + std::to_string(total - 1.0));
    }

    std::size_t size() const { return probabilities.size(); }
    double max() const { return *std::max_element(probabilities.begin(), probabilities.end()); }
};

/// dim x dim Hermitian PSD matrix with unit trace, dim <= 64.
struct DensityMatrix {
    Eigen::MatrixXcd entries;

    explicit DensityMatrix(Eigen::MatrixXcd m) : entries(std::move(m)) { validate(); }

    void validate() const {
        if (entries.rows() != entries.cols() || entries.rows() < 1 || entries.rows() > 64)
            throw std::invalid_argument("DensityMatrix: dim must be in [1, 64]");
        if ((entries - entries.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
            throw std::invalid_argument("DensityMatrix: not Hermitian");
        if (std::abs(entries.trace().real() - 1.0) > 1e-10 || std::abs(entries.trace().imag()) > 1e-10)
            throw std::invalid_argument("DensityMatrix: trace != 1");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(entries, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10)
            throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    }

    int dim() const { return static_cast<int>(entries.rows()); }
};

struct OracleReport {
    std::string lemma_id;
    std::uint64_t trials = 0;
    double empirical = 0.0;
    double predicted = 0.0;
    double tolerance = 0.0;  // 0 for one-sided bounds
    bool one_sided = false;
    bool pass = false;
    std::string note;
};

inline void to_json(nlohmann::json& j, const OracleReport& r) {
    j = nlohmann::json{{"lemma_id", r.lemma_id},   {"trials", r.trials},
                       {"empirical", r.empirical}, {"predicted", r.predicted},
                       {"tolerance", r.tolerance}, {"one_sided", r.one_sided},
                       {"pass", r.pass},           {"note", r.note}};
}

// ---------------------------------------------------------------------------
// Basic quantities

inline double log2_safe(double x) { return std::log2(x); }

inline double binary_entropy(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

enum class EntropyKind { Shannon, Min };

/// Shannon or min-entropy of a classical distribution, in bits.
inline double entropy(const Dist& p, EntropyKind kind) {
    if (kind == EntropyKind::Min) return -std::log2(p.max());
    double h = 0.0;
    for (double x : p.probabilities)
        if (x > 0.0) h -= x * std::log2(x);
    return h;
}

/// Shannon entropy of a raw non-negative weight vector normalized to 1.
inline double shannon_bits(const std::vector<double>& p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log2(x);
    return h;
}

/// S = sum_z p(z)^2.
inline double collision_probability(const Dist& p) {
    std::vector<double> sq(p.probabilities.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = p.probabilities[i] * p.probabilities[i];
    return pairwise_sum(sq);
}

/// Dir(1^N) sample: N iid Exponential(1) draws normalized by their sum.
inline Dist sample_dirichlet(std::size_t n, RngStream& rng) {
    if (n < 2) throw std::invalid_argument("sample_dirichlet: N >= 2 required");
    std::vector<double> q(n);
    for (double& x : q) x = rng.exponential();
    double total = pairwise_sum(q);
    for (double& x : q) x /= total;
    return Dist(std::move(q));
}

/// Smoothed min-entropy over the total-variation eps-ball, computed by
/// water-filling: shave the largest probabilities down to a common cap c
/// with sum_i (p_i - c)^+ = eps; the shaved mass is parked on entries
/// below the cap, so the smoothed max is max(c, 1/K).
inline double smooth_min_entropy(const Dist& p, double eps) {
    if (eps < 0.0 || eps >= 1.0) throw std::invalid_argument("smooth_min_entropy: eps in [0,1)");
    const std::size_t k = p.size();
    if (k == 1) return 0.0;
    std::vector<double> sorted = p.probabilities;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cap = sorted.front();
    double prefix = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
        prefix += sorted[j - 1];
        double c = (prefix - eps) / static_cast<double>(j);
        double lower = j < k ? sorted[j] : 0.0;
        if (c >= lower) {
            cap = c;
            break;
        }
    }
    cap = std::max(cap, 1.0 / static_cast<double>(k));
    return -std::log2(cap);
}

/// Posterior mean under the Dir(1^N) prior after observing counts m:
/// entry z is (m_z + 1) / (N + k).
inline std::vector<double> posterior_mean(const std::vector<std::int64_t>& freq, std::size_t n,
                                          std::int64_t k) {
    if (freq.size() != n) throw std::invalid_argument("posterior_mean: freq length != N");
    std::int64_t total = 0;
    for (auto m : freq) {
        if (m < 0) throw std::invalid_argument("posterior_mean: negative count");
        total += m;
    }
    if (total != k) throw std::invalid_argument("posterior_mean: counts do not sum to k");
    std::vector<double> out(n);
    for (std::size_t z = 0; z < n; ++z)
        out[z] = static_cast<double>(freq[z] + 1) / static_cast<double>(n + k);
    return out;
}

// ---------------------------------------------------------------------------
// Quantum-state quantities

/// Von Neumann entropy in bits; eigenvalues in [-1e-10, 0) are clamped to 0.
inline double von_neumann_entropy(const Eigen::MatrixXcd& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    double h = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        double lam = es.eigenvalues()(i);
        if (lam < -1e-10) throw std::invalid_argument("von_neumann_entropy: non-PSD input");
        if (lam > 0.0) h -= lam * std::log2(lam);
    }
    return h;
}

inline Eigen::MatrixXcd partial_trace_a(const Eigen::MatrixXcd& rho, int dim_a, int dim_b) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_b, dim_b);
    for (int a = 0; a < dim_a; ++a)
        out += rho.block(a * dim_b, a * dim_b, dim_b, dim_b);
    return out;
}

inline Eigen::MatrixXcd partial_trace_b(const Eigen::MatrixXcd& rho, int dim_a, int dim_b) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_a, dim_a);
    for (int a = 0; a < dim_a; ++a)
        for (int a2 = 0; a2 < dim_a; ++a2)
            for (int b = 0; b < dim_b; ++b)
                out(a, a2) += rho(a * dim_b + b, a2 * dim_b + b);
    return out;
}

/// H(A|B) = H(AB) - H(B), base-2 logs.
inline double von_neumann_conditional(const DensityMatrix& rho, int dim_a, int dim_b) {
    if (dim_a * dim_b != rho.dim())
        throw std::invalid_argument("von_neumann_conditional: dimA*dimB != dim");
    double h_ab = von_neumann_entropy(rho.entries);
    double h_b = von_neumann_entropy(partial_trace_a(rho.entries, dim_a, dim_b));
    return h_ab - h_b;
}

/// Holevo information of the cq-state obtained by measuring system D of a
/// bipartite pure state: equals the Shannon entropy of the Schmidt spectrum,
/// read off from the singular values of the dA x dB reshaping.
inline double holevo_from_schmidt(const Eigen::VectorXcd& state, int dim_a, int dim_b) {
    if (dim_a * dim_b != state.size())
        throw std::invalid_argument("holevo_from_schmidt: dA*dB != length");
    if (std::abs(state.squaredNorm() - 1.0) > 1e-9)
        throw std::invalid_argument("holevo_from_schmidt: state not normalized");
    Eigen::MatrixXcd m(dim_a, dim_b);
    for (int a = 0; a < dim_a; ++a)
        for (int b = 0; b < dim_b; ++b) m(a, b) = state(a * dim_b + b);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    double h = 0.0;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        double lam = svd.singularValues()(i);
        lam *= lam;
        if (lam > 0.0) h -= lam * std::log2(lam);
    }
    return h;
}

// ---------------------------------------------------------------------------
// Monte-Carlo oracle registry

namespace detail {

struct MeanVar {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
};

inline MeanVar mean_se(const std::vector<double>& xs) {
    double mean = pairwise_sum(xs) / static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

inline std::size_t sample_index(const Dist& p, RngStream& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t z = 0; z + 1 < p.size(); ++z) {
        acc += p.probabilities[z];
        if (u < acc) return z;
    }
    return p.size() - 1;
}

/// Chi-square survival function (upper tail), via the regularized gamma Q.
inline double chi_square_pvalue(double statistic, double dof) {
    return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

}  // namespace detail

/// Alias table for fast repeated sampling from one fixed distribution.
class AliasSampler {
public:
    explicit AliasSampler(const std::vector<double>& p) {
        const std::size_t n = p.size();
        prob_.resize(n);
        alias_.resize(n);
        std::vector<double> scaled(n);
        double total = pairwise_sum(p);
        std::vector<std::size_t> small, large;
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = p[i] * static_cast<double>(n) / total;
            (scaled[i] < 1.0 ? small : large).push_back(i);
        }
        while (!small.empty() && !large.empty()) {
            std::size_t s = small.back(), l = large.back();
            small.pop_back();
            large.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = scaled[l] + scaled[s] - 1.0;
            (scaled[l] < 1.0 ? small : large).push_back(l);
        }
        for (std::size_t i : large) prob_[i] = 1.0, alias_[i] = i;
        for (std::size_t i : small) prob_[i] = 1.0, alias_[i] = i;
    }

    std::size_t operator()(RngStream& rng) const {
        std::size_t i = static_cast<std::size_t>(rng.uniform_below(prob_.size()));
        return rng.uniform() < prob_[i] ? i : alias_[i];
    }

private:
    std::vector<double> prob_;
    std::vector<std::size_t> alias_;
};

/// Monte-Carlo check of one named lemma against its closed-form prediction.
/// Two-sided checks use a 3-standard-error tolerance; one-sided lemma
/// bounds are asserted directly.
inline OracleReport oracle_check(const std::string& lemma_id, const nlohmann::json& params,
                                 std::uint64_t trials, RngStream& rng) {
    OracleReport r;
    r.lemma_id = lemma_id;
    r.trials = trials;
    const std::size_t n = params.value("N", 256);

    if (lemma_id == "haar-min") {
        double threshold = 4.0 * std::log(static_cast<double>(n)) / static_cast<double>(n);
        std::uint64_t hits = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            if (sample_dirichlet(n, rng).max() <= threshold) ++hits;
        }
        r.empirical = static_cast<double>(hits) / static_cast<double>(trials);
        r.predicted = 1.0 - 6.0 / static_cast<double>(n);
        r.one_sided = true;
        r.pass = r.empirical >= r.predicted;
        r.note = "Pr[max P_z <= 4 ln N / N] >= 1 - 6/N";
    } else if (lemma_id == "haar-min-avg") {
        std::vector<double> maxes(trials);
        for (std::uint64_t t = 0; t < trials; ++t) maxes[t] = sample_dirichlet(n, rng).max();
        auto mv = detail::mean_se(maxes);
        r.empirical = mv.mean;
        r.predicted = (2.0 * std::log(static_cast<double>(n)) + 7.0) / static_cast<double>(n);
        r.one_sided = true;
        r.pass = r.empirical <= r.predicted;
        r.note = "E[max P_z] <= (2 ln N + 7)/N";
    } else if (lemma_id == "completeness") {
        std::vector<double> scores(trials);
        for (std::uint64_t t = 0; t < trials; ++t) {
            Dist p = sample_dirichlet(n, rng);
            scores[t] = p.probabilities[detail::sample_index(p, rng)];
        }
        auto mv = detail::mean_se(scores);
        r.empirical = mv.mean;
        r.predicted = 2.0 / static_cast<double>(n + 1);
        r.tolerance = 3.0 * mv.se;
        r.pass = std::abs(r.empirical - r.predicted) <= r.tolerance;
        r.note = "E[p_C(z)], z ~ p_C equals 2/(N+1)";
    } else if (lemma_id == "collision-concentration") {
        std::vector<double> s(trials);
        for (std::uint64_t t = 0; t < trials; ++t)
            s[t] = collision_probability(sample_dirichlet(n, rng));
        double mean = pairwise_sum(s) / static_cast<double>(trials);
        double var = 0.0;
        for (double x : s) var += (x - mean) * (x - mean);
        var /= static_cast<double>(trials - 1);
        double nn = static_cast<double>(n);
        r.empirical = var;
        r.predicted = 4.0 * (nn - 1.0) / ((nn + 1.0) * (nn + 1.0) * (nn + 2.0) * (nn + 3.0));
        r.tolerance = 0.10 * r.predicted;
        r.pass = std::abs(r.empirical - r.predicted) <= r.tolerance;
        r.note = "Var[S_C] = 4(N-1)/((N+1)^2(N+2)(N+3)), 10% relative";
    } else if (lemma_id == "lxeb-perfect") {
        const std::size_t k = params.value("k", 500);
        const double b = params.value("b", 1.5);
        std::uint64_t hits = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            Dist p = sample_dirichlet(n, rng);
            AliasSampler sampler(p.probabilities);
            std::vector<double> vals(k);
            for (std::size_t i = 0; i < k; ++i) vals[i] = p.probabilities[sampler(rng)];
            if (pairwise_sum(vals) / static_cast<double>(k) >= b / static_cast<double>(n)) ++hits;
        }
        r.empirical = static_cast<double>(hits) / static_cast<double>(trials);
        r.predicted = params.value("floor", 0.99);
        r.one_sided = true;
        r.pass = r.empirical >= r.predicted;
        r.note = "perfect device passes LXEB_{b,k} (relaxed b, desk scale)";
    } else if (lemma_id == "lxeb-product") {
        const std::size_t k = params.value("k", 500);
        const std::size_t m = params.value("m", 16);
        const double b = params.value("b", 1.5);
        std::uint64_t hits = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            std::size_t good = 0;
            for (std::size_t j = 0; j < m; ++j) {
                Dist p = sample_dirichlet(n, rng);
                AliasSampler sampler(p.probabilities);
                std::vector<double> vals(k);
                for (std::size_t i = 0; i < k; ++i) vals[i] = p.probabilities[sampler(rng)];
                if (pairwise_sum(vals) / static_cast<double>(k) >= b / static_cast<double>(n)) ++good;
            }
            if (static_cast<double>(good) >= 0.99 * static_cast<double>(m)) ++hits;
        }
        r.empirical = static_cast<double>(hits) / static_cast<double>(trials);
        r.predicted = 1.0 - 1.0 / std::log2(static_cast<double>(n));
        r.one_sided = true;
        r.pass = r.empirical >= r.predicted;
        r.note = "0.99-fraction of m circuits pass LXEB, rate >= 1 - 1/n";
    } else if (lemma_id == "freq-dist") {
        const std::size_t k = params.value("k", 2);
        // Enumerate compositions of k into N parts by sorted sample multiset.
        std::map<std::vector<std::size_t>, std::uint64_t> counts;
        for (std::uint64_t t = 0; t < trials; ++t) {
            Dist p = sample_dirichlet(n, rng);
            std::vector<std::size_t> freq(n, 0);
            for (std::size_t i = 0; i < k; ++i) ++freq[detail::sample_index(p, rng)];
            ++counts[freq];
        }
        // Total number of frequency vectors: C(N+k-1, k).
        double cells = 1.0;
        for (std::size_t i = 0; i < k; ++i)
            cells = cells * static_cast<double>(n + k - 1 - i) / static_cast<double>(k - i);
        double expected = static_cast<double>(trials) / cells;
        double chi2 = 0.0;
        double observed_cells = 0.0;
        for (auto& [vec, c] : counts) {
            chi2 += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
            observed_cells += 1.0;
        }
        // Cells never hit still contribute their expectation.
        chi2 += (cells - observed_cells) * expected;
        double dof = cells - 1.0;
        r.empirical = detail::chi_square_pvalue(chi2, dof);
        r.predicted = params.value("significance", 0.01);
        r.one_sided = true;
        r.pass = r.empirical >= r.predicted;
        r.note = "frequency vector uniform over compositions (chi-square p-value)";
    } else if (lemma_id == "semi-honest") {
        // Basis scores S_i = (1 + delta_{i0})/(N+1): estimate N E[P_0^2] and N E[P_0 P_1].
        std::vector<double> s0(trials), s1(trials);
        for (std::uint64_t t = 0; t < trials; ++t) {
            Dist p = sample_dirichlet(n, rng);
            s0[t] = static_cast<double>(n) * p.probabilities[0] * p.probabilities[0];
            s1[t] = static_cast<double>(n) * p.probabilities[0] * p.probabilities[1];
        }
        auto mv0 = detail::mean_se(s0);
        auto mv1 = detail::mean_se(s1);
        r.empirical = mv0.mean;
        r.predicted = 2.0 / static_cast<double>(n + 1);
        r.tolerance = 3.0 * mv0.se;
        bool pass0 = std::abs(mv0.mean - r.predicted) <= r.tolerance;
        bool pass1 = std::abs(mv1.mean - 1.0 / static_cast<double>(n + 1)) <= 3.0 * mv1.se;
        r.pass = pass0 && pass1;
        r.note = "S_0 = 2/(N+1) and S_i = 1/(N+1) for i != 0 (off-diagonal in tolerance too)";
    } else {
        throw std::invalid_argument("oracle_check: unknown lemma_id " + lemma_id);
    }
    return r;
}

inline const std::vector<std::string>& registered_lemmas() {
    static const std::vector<std::string> ids = {
        "haar-min",     "haar-min-avg", "completeness", "collision-concentration",
        "lxeb-perfect", "lxeb-product", "freq-dist",    "semi-honest"};
    return ids;
}

}  // namespace certrand::statlab
