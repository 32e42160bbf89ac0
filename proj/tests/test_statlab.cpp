#include <Eigen/Dense>
#include <complex>

#include "catch_amalgamated.hpp"
#include "certrand/statlab.hpp"

using namespace certrand;
using namespace certrand::statlab;

namespace {
RngStream make_rng(const char* label) {
    Key256 key{};
    key[0] = 0x42;
    return RngStream(key, label);
}

/// Brute-force smoothing oracle: scan a dense grid of caps c, keep the
/// smallest feasible smoothed max-probability. Only viable for tiny K.
double smooth_min_entropy_grid(const Dist& p, double eps) {
    double best = p.max();
    for (int step = 0; step <= 2000000; ++step) {
        double c = static_cast<double>(step) / 2000000.0;
        double shaved = 0.0;
        for (double x : p.probabilities) shaved += std::max(0.0, x - c);
        if (shaved <= eps + 1e-15) best = std::min(best, std::max(c, 1.0 / p.size()));
    }
    return -std::log2(best);
}
}  // namespace

TEST_CASE("dist validation") {
    REQUIRE_THROWS(Dist(std::vector<double>{}));
    REQUIRE_THROWS(Dist({0.5, 0.4}));
    REQUIRE_THROWS(Dist({1.2, -0.2}));
    REQUIRE_NOTHROW(Dist({0.25, 0.25, 0.5}));
}

TEST_CASE("entropy of basic distributions") {
    Dist uniform(std::vector<double>(8, 0.125));
    REQUIRE_THAT(entropy(uniform, EntropyKind::Shannon), Catch::Matchers::WithinAbs(3.0, 1e-12));
    REQUIRE_THAT(entropy(uniform, EntropyKind::Min), Catch::Matchers::WithinAbs(3.0, 1e-12));
    Dist point({1.0, 0.0, 0.0});
    REQUIRE(entropy(point, EntropyKind::Shannon) == 0.0);
    REQUIRE(entropy(point, EntropyKind::Min) == 0.0);
    Dist skew({0.75, 0.25});
    REQUIRE(entropy(skew, EntropyKind::Min) < entropy(skew, EntropyKind::Shannon));
}

TEST_CASE("smoothing a point mass by half yields one bit") {
    Dist point({1.0, 0.0, 0.0, 0.0});
    REQUIRE_THAT(smooth_min_entropy(point, 0.5), Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE(smooth_min_entropy(point, 0.0) == 0.0);
}

TEST_CASE("smoothing matches the brute-force cap grid") {
    auto rng = make_rng("smooth");
    for (int trial = 0; trial < 20; ++trial) {
        Dist p = sample_dirichlet(5, rng);
        for (double eps : {0.0, 0.01, 0.1, 0.3}) {
            double fast = smooth_min_entropy(p, eps);
            double slow = smooth_min_entropy_grid(p, eps);
            REQUIRE_THAT(fast, Catch::Matchers::WithinAbs(slow, 1e-4));
        }
    }
}

TEST_CASE("smoothing is monotone in eps") {
    auto rng = make_rng("smooth-mono");
    Dist p = sample_dirichlet(16, rng);
    double prev = smooth_min_entropy(p, 0.0);
    for (double eps : {0.05, 0.1, 0.2, 0.4, 0.8}) {
        double h = smooth_min_entropy(p, eps);
        REQUIRE(h >= prev - 1e-12);
        prev = h;
    }
    REQUIRE(prev <= std::log2(16.0) + 1e-12);
}

TEST_CASE("dirichlet draws are normalized with full support") {
    auto rng = make_rng("dir");
    Dist p = sample_dirichlet(64, rng);
    REQUIRE(p.size() == 64);
    for (double x : p.probabilities) REQUIRE(x > 0.0);
    REQUIRE_THROWS(sample_dirichlet(1, rng));
}

TEST_CASE("posterior mean shifts toward observed counts") {
    std::vector<std::int64_t> freq = {3, 0, 1, 0};
    auto post = posterior_mean(freq, 4, 4);
    REQUIRE_THAT(post[0], Catch::Matchers::WithinAbs(4.0 / 8.0, 1e-15));
    REQUIRE_THAT(post[1], Catch::Matchers::WithinAbs(1.0 / 8.0, 1e-15));
    REQUIRE_THAT(post[2], Catch::Matchers::WithinAbs(2.0 / 8.0, 1e-15));
    double total = post[0] + post[1] + post[2] + post[3];
    REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THROWS(posterior_mean(freq, 4, 5));
    REQUIRE_THROWS(posterior_mean({-1, 5, 0, 0}, 4, 4));
}

TEST_CASE("density matrix validation") {
    Eigen::MatrixXcd ok = Eigen::MatrixXcd::Identity(4, 4) / 4.0;
    REQUIRE_NOTHROW(DensityMatrix(ok));
    Eigen::MatrixXcd bad_trace = Eigen::MatrixXcd::Identity(4, 4);
    REQUIRE_THROWS(DensityMatrix(bad_trace));
    Eigen::MatrixXcd not_herm = ok;
    not_herm(0, 1) = std::complex<double>(0.1, 0.0);
    REQUIRE_THROWS(DensityMatrix(not_herm));
    Eigen::MatrixXcd neg = Eigen::MatrixXcd::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    REQUIRE_THROWS(DensityMatrix(neg));
}

TEST_CASE("conditional entropy: classically correlated vs product states") {
    // Maximally correlated classical state on two qubits: H(A|B) = 0.
    Eigen::MatrixXcd corr = Eigen::MatrixXcd::Zero(4, 4);
    corr(0, 0) = 0.5;
    corr(3, 3) = 0.5;
    REQUIRE_THAT(von_neumann_conditional(DensityMatrix(corr), 2, 2),
                 Catch::Matchers::WithinAbs(0.0, 1e-9));
    // Product of a uniform bit with anything: H(A|B) = 1.
    Eigen::MatrixXcd prod = Eigen::MatrixXcd::Identity(4, 4) / 4.0;
    REQUIRE_THAT(von_neumann_conditional(DensityMatrix(prod), 2, 2),
                 Catch::Matchers::WithinAbs(1.0, 1e-9));
    // Bell state: conditional entropy is -1, the entangled signature.
    Eigen::VectorXcd bell(4);
    bell << 1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0);
    Eigen::MatrixXcd bell_rho = bell * bell.adjoint();
    REQUIRE_THAT(von_neumann_conditional(DensityMatrix(bell_rho), 2, 2),
                 Catch::Matchers::WithinAbs(-1.0, 1e-9));
}

TEST_CASE("entropy triangle and concavity spot checks") {
    auto rng = make_rng("vn-props");
    for (int trial = 0; trial < 25; ++trial) {
        // Random 2x2 density matrices via random pure states mixed.
        auto rand_rho = [&]() {
            Eigen::VectorXcd v(2);
            v << std::complex<double>(rng.gaussian(), rng.gaussian()),
                std::complex<double>(rng.gaussian(), rng.gaussian());
            v.normalize();
            Eigen::MatrixXcd pure = v * v.adjoint();
            double lam = 0.3 + 0.4 * rng.uniform();
            return (lam * pure + (1.0 - lam) * Eigen::MatrixXcd::Identity(2, 2) / 2.0).eval();
        };
        Eigen::MatrixXcd rho = rand_rho();
        Eigen::MatrixXcd sigma = rand_rho();
        double lam = rng.uniform();
        Eigen::MatrixXcd mix = lam * rho + (1.0 - lam) * sigma;
        double lhs = von_neumann_entropy(mix);
        double rhs = lam * von_neumann_entropy(rho) + (1.0 - lam) * von_neumann_entropy(sigma) +
                     binary_entropy(lam);
        REQUIRE(lhs <= rhs + 1e-9);
        REQUIRE(lhs + 1e-9 >= lam * von_neumann_entropy(rho) +
                                  (1.0 - lam) * von_neumann_entropy(sigma));
    }
}

TEST_CASE("holevo from schmidt equals spectrum entropy") {
    // Product state: zero Schmidt entropy.
    Eigen::VectorXcd prod = Eigen::VectorXcd::Zero(4);
    prod(0) = 1.0;
    REQUIRE_THAT(holevo_from_schmidt(prod, 2, 2), Catch::Matchers::WithinAbs(0.0, 1e-12));
    // Bell state: one bit.
    Eigen::VectorXcd bell(4);
    bell << 1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0);
    REQUIRE_THAT(holevo_from_schmidt(bell, 2, 2), Catch::Matchers::WithinAbs(1.0, 1e-12));
    Eigen::VectorXcd unnorm = Eigen::VectorXcd::Ones(4);
    REQUIRE_THROWS(holevo_from_schmidt(unnorm, 2, 2));
}

TEST_CASE("oracle registry covers the advertised lemmas and rejects strangers") {
    auto rng = make_rng("registry");
    REQUIRE(registered_lemmas().size() == 8);
    REQUIRE_THROWS(oracle_check("no-such-lemma", {}, 10, rng));
}

TEST_CASE("completeness oracle at moderate N") {
    auto rng = make_rng("oracle-completeness");
    auto rep = oracle_check("completeness", {{"N", 128}}, 20000, rng);
    REQUIRE(rep.pass);
    REQUIRE_THAT(rep.predicted, Catch::Matchers::WithinAbs(2.0 / 129.0, 1e-15));
}

TEST_CASE("max probability oracles") {
    auto rng = make_rng("oracle-max");
    REQUIRE(oracle_check("haar-min", {{"N", 256}}, 3000, rng).pass);
    REQUIRE(oracle_check("haar-min-avg", {{"N", 256}}, 3000, rng).pass);
}

TEST_CASE("semi-honest basis scores oracle") {
    auto rng = make_rng("oracle-semi");
    auto rep = oracle_check("semi-honest", {{"N", 64}}, 40000, rng);
    REQUIRE(rep.pass);
}

TEST_CASE("alias sampler reproduces its distribution") {
    auto rng = make_rng("alias");
    Dist p = sample_dirichlet(16, rng);
    AliasSampler sampler(p.probabilities);
    std::vector<double> counts(16, 0.0);
    const int draws = 200000;
    for (int i = 0; i < draws; ++i) counts[sampler(rng)] += 1.0;
    for (std::size_t z = 0; z < 16; ++z) {
        double freq = counts[z] / draws;
        double se = std::sqrt(p.probabilities[z] * (1.0 - p.probabilities[z]) / draws);
        REQUIRE(std::abs(freq - p.probabilities[z]) <= 4.0 * se + 1e-4);
    }
}
