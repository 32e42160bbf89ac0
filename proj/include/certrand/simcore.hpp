#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "certrand/common.hpp"
#include "certrand/rng.hpp"
#include "json.hpp"

namespace certrand::simcore {

enum class Ensemble { HaarColumn, Brickwork, Fourier };

inline std::string ensemble_name(Ensemble e) {
    switch (e) {
        case Ensemble::HaarColumn: return "haar-column";
        case Ensemble::Brickwork: return "brickwork";
        case Ensemble::Fourier: return "fourier";
    }
    throw std::logic_error("bad ensemble");
}

inline Ensemble ensemble_from_name(const std::string& s) {
    if (s == "haar-column") return Ensemble::HaarColumn;
    if (s == "brickwork") return Ensemble::Brickwork;
    if (s == "fourier") return Ensemble::Fourier;
    throw std::invalid_argument("unknown ensemble: " + s);
}

inline int max_qubits(Ensemble e) { return e == Ensemble::Brickwork ? 20 : 24; }

/// Seeded, ensemble-tagged challenge description. Expansion to an output
/// distribution is a pure function of the fields.
struct Circuit {
    Ensemble ensemble = Ensemble::HaarColumn;
    int n = 0;
    Key256 seed{};
    int depth = 0;  // brickwork only

    std::uint64_t dim() const { return std::uint64_t{1} << n; }

    bool operator==(const Circuit&) const = default;
};

inline void to_json(nlohmann::json& j, const Circuit& c) {
    j = nlohmann::json{{"ensemble", ensemble_name(c.ensemble)},
                       {"n", c.n},
                       {"seed", to_hex(c.seed)},
                       {"depth", c.depth}};
}

inline void from_json(const nlohmann::json& j, Circuit& c) {
    c.ensemble = ensemble_from_name(j.at("ensemble").get<std::string>());
    c.n = j.at("n").get<int>();
    c.seed = key_from_hex(j.at("seed").get<std::string>());
    c.depth = j.at("depth").get<int>();
}

/// Exact output distribution p_C over n-bit strings; entries are
/// non-negative and sum to 1 within 1e-12.
struct OutputDistribution {
    std::vector<double> probabilities;

    std::size_t size() const { return probabilities.size(); }
    double operator[](std::size_t z) const { return probabilities[z]; }
};

inline void validate_circuit(const Circuit& c) {
    if (c.n < 2 || c.n > max_qubits(c.ensemble))
        throw std::invalid_argument("qubit count " + std::to_string(c.n) +
                                    " out of range for " + ensemble_name(c.ensemble));
    if (c.ensemble != Ensemble::Brickwork && c.depth != 0)
        throw std::invalid_argument("depth is only meaningful for brickwork");
    if (c.depth < 0) throw std::invalid_argument("negative depth");
}

/// PRF-derived circuit: seed = PRF(master_key, "circuit/<ensemble>", epoch).
/// Same inputs always yield the same Circuit.
inline Circuit derive_circuit(const Key256& master_key, std::uint64_t epoch_index,
                              Ensemble ensemble, int n, int depth = 0) {
    Circuit c{ensemble, n, {}, depth};
    validate_circuit(c);
    netcli::PrfStream prf(master_key, "circuit/" + ensemble_name(ensemble));
    auto block = prf.block_at(epoch_index);
    std::copy(block.begin(), block.begin() + 32, c.seed.begin());
    return c;
}

/// In-place fast Walsh-Hadamard transform with the 1/N normalization:
/// out[x] = (1/N) sum_y (-1)^{x.y} in[y].
inline void walsh_hadamard_transform(std::vector<double>& table) {
    std::size_t n = table.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("walsh_hadamard_transform: length must be a power of two");
    for (std::size_t h = 1; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                double a = table[j];
                double b = table[j + h];
                table[j] = a + b;
                table[j + h] = a - b;
            }
        }
    }
    double inv = 1.0 / static_cast<double>(n);
    for (double& x : table) x *= inv;
}

namespace detail {

using Gate = Eigen::Matrix4cd;

/// Exactly Haar-distributed 4x4 unitary: QR of a complex Ginibre sample
/// with the R-diagonal phase correction.
inline Gate haar_gate(RngStream& rng) {
    Gate g;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            g(r, c) = std::complex<double>(rng.gaussian(), rng.gaussian());
    Eigen::HouseholderQR<Gate> qr(g);
    Gate q = qr.householderQ();
    Gate r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < 4; ++c) {
        std::complex<double> d = r(c, c);
        std::complex<double> phase = d == 0.0 ? 1.0 : d / std::abs(d);
        q.col(c) *= phase;
    }
    return q;
}

/// Apply a 2-qubit gate on adjacent qubits (q, q+1); qubit 0 is the
/// least-significant bit of the basis index.
inline void apply_gate(std::vector<std::complex<double>>& state, const Gate& g, int q) {
    const std::uint64_t n = state.size();
    const std::uint64_t lo = std::uint64_t{1} << q;
    const std::uint64_t hi = lo << 1;
    for (std::uint64_t base = 0; base < n; ++base) {
        if (base & (lo | hi)) continue;  // enumerate only the 00 pattern
        std::uint64_t idx[4] = {base, base | lo, base | hi, base | lo | hi};
        std::complex<double> v[4];
        for (int i = 0; i < 4; ++i) v[i] = state[idx[i]];
        for (int i = 0; i < 4; ++i) {
            std::complex<double> acc = 0.0;
            for (int j = 0; j < 4; ++j) acc += g(i, j) * v[j];
            state[idx[i]] = acc;
        }
    }
}

inline OutputDistribution haar_column_distribution(const Circuit& c) {
    RngStream rng(c.seed, "expand/haar-column");
    const std::uint64_t n = c.dim();
    std::vector<double> p(n);
    double total = 0.0;
    for (std::uint64_t z = 0; z < n; ++z) {
        double re = rng.gaussian();
        double im = rng.gaussian();
        p[z] = re * re + im * im;
    }
    total = pairwise_sum(p);
    for (double& x : p) x /= total;
    return {std::move(p)};
}

inline OutputDistribution fourier_distribution(const Circuit& c) {
    RngStream rng(c.seed, "expand/fourier");
    const std::uint64_t n = c.dim();
    std::vector<double> f(n);
    std::uint64_t word = 0;
    int bits = 0;
    for (std::uint64_t y = 0; y < n; ++y) {
        if (bits == 0) {
            word = rng.next_u64();
            bits = 64;
        }
        f[y] = (word & 1) ? -1.0 : 1.0;
        word >>= 1;
        --bits;
    }
    walsh_hadamard_transform(f);
    std::vector<double> p(n);
    for (std::uint64_t z = 0; z < n; ++z) p[z] = f[z] * f[z];
    // Parseval: sum is already 1 up to rounding; renormalize for the 1e-12 invariant.
    double total = pairwise_sum(p);
    for (double& x : p) x /= total;
    return {std::move(p)};
}

inline OutputDistribution brickwork_distribution(const Circuit& c) {
    RngStream rng(c.seed, "expand/brickwork");
    const std::uint64_t n = c.dim();
    std::vector<std::complex<double>> state(n, 0.0);
    state[0] = 1.0;
    for (int layer = 0; layer < c.depth; ++layer) {
        int first = layer % 2 == 0 ? 0 : 1;
        for (int q = first; q + 1 < c.n; q += 2) {
            apply_gate(state, haar_gate(rng), q);
        }
    }
    std::vector<double> p(n);
    for (std::uint64_t z = 0; z < n; ++z) p[z] = std::norm(state[z]);
    double total = pairwise_sum(p);
    if (std::abs(total - 1.0) > 1e-10)
        throw std::runtime_error("brickwork statevector norm drifted: " + std::to_string(total));
    for (double& x : p) x /= total;
    return {std::move(p)};
}

}  // namespace detail

/// Expand a circuit to its exact output distribution. Pure: no global
/// state, replay-identical for identical fields.
inline OutputDistribution output_distribution(const Circuit& c) {
    validate_circuit(c);
    switch (c.ensemble) {
        case Ensemble::HaarColumn: return detail::haar_column_distribution(c);
        case Ensemble::Fourier: return detail::fourier_distribution(c);
        case Ensemble::Brickwork: return detail::brickwork_distribution(c);
    }
    throw std::logic_error("bad ensemble");
}

}  // namespace certrand::simcore
