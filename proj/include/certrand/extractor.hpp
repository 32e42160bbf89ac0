#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace certrand::extractor {

using u128 = unsigned __int128;

/// Low-order terms of a fixed irreducible polynomial over GF(2) of the
/// given degree (the leading x^s term is implicit).
inline std::uint64_t irreducible_poly(int s) {
    switch (s) {
        case 1: return 0x1;
        case 2: return 0x3;
        case 3: return 0x3;
        case 4: return 0x3;
        case 5: return 0x5;
        case 6: return 0x3;
        case 7: return 0x3;
        case 8: return 0x1B;
        case 9: return 0x11;
        case 10: return 0x9;
        case 11: return 0x5;
        case 12: return 0x53;
        case 13: return 0x1B;
        case 14: return 0x143;
        case 15: return 0x3;
        case 16: return 0x2B;
        case 24: return 0x1B;
        case 32: return 0x8D;
        case 64: return 0x1B;
        default: throw std::invalid_argument("irreducible_poly: unsupported degree " + std::to_string(s));
    }
}

/// Carryless multiply in GF(2^s), s <= 64.
inline std::uint64_t gf_mul(std::uint64_t a, std::uint64_t b, int s) {
    u128 prod = 0;
    u128 aa = a;
    while (b) {
        if (b & 1) prod ^= aa;
        aa <<= 1;
        b >>= 1;
    }
    u128 modulus = (u128{1} << s) | irreducible_poly(s);
    for (int i = 2 * s - 2; i >= s; --i)
        if ((prod >> i) & 1) prod ^= modulus << (i - s);
    return static_cast<std::uint64_t>(prod);
}

/// Horner evaluation of a polynomial with the given coefficients
/// (constant term first) at point x, over GF(2^s).
inline std::uint64_t gf_poly_eval(const std::vector<std::uint64_t>& coeffs, std::uint64_t x, int s) {
    std::uint64_t acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = gf_mul(acc, x, s) ^ *it;
    return acc;
}

// ---------------------------------------------------------------------------
// Weak designs

struct WeakDesign {
    int d = 0;  // seed length in bits
    int t = 0;  // set size
    std::size_t m = 0;
    double r = 0.0;  // measured overlap parameter
    std::vector<std::vector<int>> sets;
};

namespace detail {

/// max over i of (1/m) sum_{j<i} 2^{|S_i cap S_j|}, computed exhaustively.
inline double measured_overlap(const std::vector<std::vector<int>>& sets, int d) {
    double worst = 0.0;
    std::vector<char> member(static_cast<std::size_t>(d), 0);
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (int x : sets[i]) member[static_cast<std::size_t>(x)] = 1;
        double total = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
            int overlap = 0;
            for (int x : sets[j]) overlap += member[static_cast<std::size_t>(x)];
            total += std::ldexp(1.0, overlap);
        }
        for (int x : sets[i]) member[static_cast<std::size_t>(x)] = 0;
        worst = std::max(worst, total / static_cast<double>(sets.size()));
    }
    return worst;
}

inline bool is_power_of_two(std::uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

}  // namespace detail

/// Disjoint blocks when the seed budget allows (overlap parameter 1),
/// otherwise the polynomial-graph construction over GF(t) with seed length
/// t^2: set i is the graph {(a, p_i(a))} of the i-th polynomial, enumerated
/// by increasing degree. Invariants are verified exhaustively either way.
inline WeakDesign build_weak_design(std::size_t m, int t) {
    if (m < 1) throw std::invalid_argument("build_weak_design: m >= 1");
    if (t < 2 || !detail::is_power_of_two(static_cast<std::uint64_t>(t)))
        throw std::invalid_argument("build_weak_design: t must be a power of two >= 2");
    WeakDesign w;
    w.t = t;
    w.m = m;

    const int d_poly = t * t;
    if (m <= static_cast<std::size_t>(d_poly / t)) {
        // Disjoint blocks inside d = m*t bits.
        w.d = static_cast<int>(m) * t;
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<int> s(static_cast<std::size_t>(t));
            for (int b = 0; b < t; ++b) s[static_cast<std::size_t>(b)] = static_cast<int>(i) * t + b;
            w.sets.push_back(std::move(s));
        }
    } else {
        const int width = static_cast<int>(std::round(std::log2(t)));
        // Degree bound: smallest e with t^(e+1) >= m.
        int degree = 0;
        u128 count = t;
        while (count < m) {
            count *= static_cast<unsigned>(t);
            ++degree;
            if (degree > 8) throw std::invalid_argument("build_weak_design: m infeasible for this t");
        }
        w.d = d_poly;
        for (std::size_t i = 0; i < m; ++i) {
            // Coefficients of the i-th polynomial in base t, low degree first.
            std::vector<std::uint64_t> coeffs(static_cast<std::size_t>(degree) + 1, 0);
            std::size_t idx = i;
            for (auto& c : coeffs) {
                c = idx % static_cast<std::size_t>(t);
                idx /= static_cast<std::size_t>(t);
            }
            std::vector<int> s(static_cast<std::size_t>(t));
            for (int a = 0; a < t; ++a) {
                std::uint64_t pa = gf_poly_eval(coeffs, static_cast<std::uint64_t>(a), width);
                s[static_cast<std::size_t>(a)] = a * t + static_cast<int>(pa);
            }
            w.sets.push_back(std::move(s));
        }
    }

    for (const auto& s : w.sets) {
        if (s.size() != static_cast<std::size_t>(t))
            throw std::logic_error("build_weak_design: set size violation");
        for (int x : s)
            if (x < 0 || x >= w.d) throw std::logic_error("build_weak_design: index out of range");
    }
    w.r = std::max(1.0, detail::measured_overlap(w.sets, w.d));
    if (w.r > 2.0 * std::exp(1.0))
        throw std::logic_error("build_weak_design: overlap parameter exceeds 2e");
    return w;
}

// ---------------------------------------------------------------------------
// One-bit extractor and Trevisan composition

using Bits = std::vector<std::uint8_t>;  // one bit per entry, values 0/1

/// Reads ceil(|x|/s) field elements from x, most significant bit of each
/// element first; trailing bits are zero-padded.
inline std::vector<std::uint64_t> pack_field_elements(const Bits& x, int s) {
    std::vector<std::uint64_t> coeffs((x.size() + static_cast<std::size_t>(s) - 1) /
                                      static_cast<std::size_t>(s));
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] & 1)
            coeffs[i / static_cast<std::size_t>(s)] |=
                std::uint64_t{1} << (s - 1 - static_cast<int>(i % static_cast<std::size_t>(s)));
    }
    return coeffs;
}

inline std::uint64_t bits_to_uint(const Bits& y, std::size_t begin, std::size_t len) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < len; ++i) v = (v << 1) | (y[begin + i] & 1);
    return v;
}

/// Reed-Solomon / Hadamard bit selection: the source is read as polynomial
/// coefficients over GF(2^s) with s = t/2, the seed picks an evaluation
/// point y1 and a mask y2, and the output is the parity of the masked
/// evaluation. Linear in the source for every fixed seed.
inline int one_bit_extract(const Bits& x, const Bits& y) {
    if (y.size() < 2 || y.size() % 2 != 0)
        throw std::invalid_argument("one_bit_extract: seed length must be even");
    const int s = static_cast<int>(y.size() / 2);
    if (s > 64) throw std::invalid_argument("one_bit_extract: seed too long (field width > 64)");
    if (x.empty()) throw std::invalid_argument("one_bit_extract: empty source");
    auto coeffs = pack_field_elements(x, s);
    std::uint64_t y1 = bits_to_uint(y, 0, static_cast<std::size_t>(s));
    std::uint64_t y2 = bits_to_uint(y, static_cast<std::size_t>(s), static_cast<std::size_t>(s));
    std::uint64_t v = gf_poly_eval(coeffs, y1, s) & y2;
    return static_cast<int>(__builtin_parityll(v));
}

struct ExtractorSpec {
    std::size_t source_len = 0;
    std::size_t m = 0;          // output bits
    double eps = 0.0;           // per-bit error of the one-bit extractor
    int t = 0;                  // one-bit seed length
    int d = 0;                  // total seed length
    double r = 0.0;             // design overlap parameter
    double required_entropy = 0.0;  // k + r*m + log2(1/eps)
    double output_error = 0.0;      // 6*m*sqrt(eps)
};

inline void to_json(nlohmann::json& j, const ExtractorSpec& s) {
    j = nlohmann::json{{"source_len", s.source_len},
                       {"m", s.m},
                       {"eps", s.eps},
                       {"t", s.t},
                       {"d", s.d},
                       {"r", s.r},
                       {"required_entropy", s.required_entropy},
                       {"output_error", s.output_error}};
}

/// Composed extractor parameters. The one-bit seed length t is the
/// smallest power of two such that the polynomial-evaluation bias bound
/// L / 2^(t/2) (L source field elements) sits below eps, and the one-bit
/// extractor is treated as (k1, eps)-strong with k1 = 4 log2(1/eps); the
/// composition then needs source min-entropy k1 + r*m + log2(1/eps) and
/// outputs m bits within 6 m sqrt(eps) of uniform given the seed.
inline ExtractorSpec extractor_params(std::size_t source_len, std::size_t target_m, double eps,
                                      const WeakDesign* design = nullptr) {
    if (source_len < 1 || target_m < 1) throw std::invalid_argument("extractor_params: sizes >= 1");
    if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("extractor_params: eps in (0,1)");
    ExtractorSpec spec;
    spec.source_len = source_len;
    spec.m = target_m;
    spec.eps = eps;
    int t = 4;
    while (true) {
        int s = t / 2;
        double elements = std::ceil(static_cast<double>(source_len) / s);
        if (s <= 64 && std::log2(elements) - s <= std::log2(eps)) break;
        t *= 2;
        if (t > 128) throw std::invalid_argument("extractor_params: eps unattainable at width <= 64");
    }
    spec.t = t;
    WeakDesign local;
    if (design == nullptr) {
        local = build_weak_design(target_m, t);
        design = &local;
    } else if (design->t != t || design->m != target_m) {
        throw std::invalid_argument("extractor_params: design does not match derived (t, m)");
    }
    spec.d = design->d;
    spec.r = design->r;
    double k1 = 4.0 * std::log2(1.0 / eps);
    spec.required_entropy = k1 + spec.r * static_cast<double>(target_m) + std::log2(1.0 / eps);
    spec.output_error = 6.0 * static_cast<double>(target_m) * std::sqrt(eps);
    return spec;
}

/// Ext(x, y)_i = one_bit_extract(x, y restricted to S_i).
inline Bits trevisan_extract(const Bits& x, const Bits& y, const WeakDesign& design) {
    if (y.size() != static_cast<std::size_t>(design.d))
        throw std::invalid_argument("trevisan_extract: seed length != design d");
    Bits out(design.m);
    Bits sub(static_cast<std::size_t>(design.t));
    for (std::size_t i = 0; i < design.m; ++i) {
        for (int b = 0; b < design.t; ++b)
            sub[static_cast<std::size_t>(b)] = y[static_cast<std::size_t>(design.sets[i][b])];
        out[i] = static_cast<std::uint8_t>(one_bit_extract(x, sub));
    }
    return out;
}

}  // namespace certrand::extractor
