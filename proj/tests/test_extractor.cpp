#include <set>

#include "catch_amalgamated.hpp"
#include "certrand/extractor.hpp"
#include "certrand/rng.hpp"

using namespace certrand;
using namespace certrand::extractor;

namespace {
RngStream make_rng(const char* label) {
    Key256 key{};
    key[0] = 0x9E;
    return RngStream(key, label);
}

Bits random_bits(std::size_t count, RngStream& rng) {
    Bits b(count);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng.uniform_below(2));
    return b;
}
}  // namespace

TEST_CASE("field arithmetic sanity") {
    // GF(4) = {0,1,w,w+1} with w^2 = w+1 under x^2+x+1.
    REQUIRE(gf_mul(2, 2, 2) == 3);
    REQUIRE(gf_mul(2, 3, 2) == 1);
    // Every nonzero element of GF(16) has order dividing 15.
    for (std::uint64_t a = 1; a < 16; ++a) {
        std::uint64_t acc = 1;
        for (int i = 0; i < 15; ++i) acc = gf_mul(acc, a, 4);
        REQUIRE(acc == 1);
    }
    // Multiplication is commutative and distributes over xor in GF(256).
    auto rng = make_rng("gf");
    for (int trial = 0; trial < 200; ++trial) {
        std::uint64_t a = rng.uniform_below(256), b = rng.uniform_below(256),
                      c = rng.uniform_below(256);
        REQUIRE(gf_mul(a, b, 8) == gf_mul(b, a, 8));
        REQUIRE(gf_mul(a, b ^ c, 8) == (gf_mul(a, b, 8) ^ gf_mul(a, c, 8)));
    }
    // Wide field spot check: inverse-free associativity in GF(2^64).
    std::uint64_t x = 0x0123456789ABCDEFull, y = 0xFEDCBA9876543210ull, z = 0x55AA55AA55AA55AAull;
    REQUIRE(gf_mul(gf_mul(x, y, 64), z, 64) == gf_mul(x, gf_mul(y, z, 64), 64));
}

TEST_CASE("weak design: single set and disjoint blocks") {
    auto single = build_weak_design(1, 8);
    REQUIRE(single.sets.size() == 1);
    REQUIRE(single.r == 1.0);

    auto blocks = build_weak_design(3, 4);
    REQUIRE(blocks.d == 12);
    REQUIRE(blocks.r == 1.0);
    std::set<int> all;
    for (const auto& s : blocks.sets) {
        REQUIRE(s.size() == 4);
        for (int x : s) REQUIRE(all.insert(x).second);  // pairwise disjoint
    }
}

TEST_CASE("weak design: polynomial construction meets the overlap bound") {
    auto w = build_weak_design(20, 16);
    REQUIRE(w.d == 256);
    REQUIRE(w.sets.size() == 20);
    for (const auto& s : w.sets) REQUIRE(s.size() == 16);
    REQUIRE(w.r <= 2.0 * std::exp(1.0));

    // Larger instance forced into degree >= 2.
    auto big = build_weak_design(300, 16);
    REQUIRE(big.d == 256);
    REQUIRE(big.r <= 2.0 * std::exp(1.0));
    REQUIRE_THROWS(build_weak_design(10, 6));  // not a power of two
}

TEST_CASE("one-bit extractor: zero source, linearity, determinism") {
    auto rng = make_rng("onebit");
    Bits zero(16, 0);
    Bits x = random_bits(16, rng);
    Bits x2 = random_bits(16, rng);
    for (int trial = 0; trial < 50; ++trial) {
        Bits y = random_bits(8, rng);
        REQUIRE(one_bit_extract(zero, y) == 0);
        Bits x_xor(16);
        for (int i = 0; i < 16; ++i) x_xor[i] = x[i] ^ x2[i];
        REQUIRE(one_bit_extract(x_xor, y) ==
                (one_bit_extract(x, y) ^ one_bit_extract(x2, y)));
        REQUIRE(one_bit_extract(x, y) == one_bit_extract(x, y));
    }
    REQUIRE_THROWS(one_bit_extract(x, Bits(7, 0)));  // odd seed length
}

TEST_CASE("one-bit extractor: unbiased over uniform sources") {
    auto rng = make_rng("bias");
    const int trials = 100000;
    Bits y = random_bits(8, rng);
    if (bits_to_uint(y, 4, 4) == 0) y[7] = 1;  // nonzero mask
    long ones = 0;
    for (int i = 0; i < trials; ++i) {
        Bits x = random_bits(16, rng);
        ones += one_bit_extract(x, y);
    }
    double bias = static_cast<double>(ones) / trials - 0.5;
    double se = 0.5 / std::sqrt(static_cast<double>(trials));
    REQUIRE(std::abs(bias) <= 3.0 * se);
}

TEST_CASE("trevisan composition basics") {
    auto rng = make_rng("trev");
    auto design = build_weak_design(1, 8);
    Bits x = random_bits(32, rng);
    Bits y = random_bits(static_cast<std::size_t>(design.d), rng);
    auto out = trevisan_extract(x, y, design);
    REQUIRE(out.size() == 1);
    Bits sub(8);
    for (int b = 0; b < 8; ++b) sub[static_cast<std::size_t>(b)] = y[static_cast<std::size_t>(design.sets[0][b])];
    REQUIRE(out[0] == one_bit_extract(x, sub));
    REQUIRE_THROWS(trevisan_extract(x, Bits(3, 0), design));
}

TEST_CASE("permuting design sets permutes output bits") {
    auto rng = make_rng("perm");
    auto design = build_weak_design(6, 8);
    Bits x = random_bits(40, rng);
    Bits y = random_bits(static_cast<std::size_t>(design.d), rng);
    auto out = trevisan_extract(x, y, design);
    auto shuffled = design;
    std::swap(shuffled.sets[0], shuffled.sets[4]);
    std::swap(shuffled.sets[2], shuffled.sets[5]);
    auto out2 = trevisan_extract(x, y, shuffled);
    REQUIRE(out2[0] == out[4]);
    REQUIRE(out2[4] == out[0]);
    REQUIRE(out2[2] == out[5]);
    REQUIRE(out2[1] == out[1]);
}

TEST_CASE("flat micro-source per-bit bias within the composed guarantee") {
    // Source uniform over a 2^10-subset of 16-bit strings (min-entropy 10).
    auto rng = make_rng("flat");
    const double eps = 1.0 / 4096.0;
    auto spec = extractor_params(16, 4, eps);
    auto design = build_weak_design(4, spec.t);
    const int trials = 30000;
    std::vector<long> ones(4, 0);
    for (int i = 0; i < trials; ++i) {
        std::uint64_t v = rng.uniform_below(1024) << 6 | 0x2A;  // flat subset
        Bits x(16);
        for (int b = 0; b < 16; ++b) x[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>((v >> (15 - b)) & 1);
        Bits y = random_bits(static_cast<std::size_t>(design.d), rng);
        auto out = trevisan_extract(x, y, design);
        for (int j = 0; j < 4; ++j) ones[static_cast<std::size_t>(j)] += out[static_cast<std::size_t>(j)];
    }
    double bound = 6.0 * std::sqrt(eps) + 3.0 * 0.5 / std::sqrt(static_cast<double>(trials));
    for (long o : ones) {
        double bias = std::abs(static_cast<double>(o) / trials - 0.5);
        REQUIRE(bias <= bound + 0.01);
    }
}

TEST_CASE("parameter calculus recomputes the composed guarantee") {
    auto spec = extractor_params(5000, 1024, 0x1p-32);
    REQUIRE(spec.t >= 4);
    REQUIRE(spec.output_error == 6.0 * 1024.0 * std::sqrt(0x1p-32));
    double k1 = 4.0 * 32.0;
    REQUIRE_THAT(spec.required_entropy,
                 Catch::Matchers::WithinAbs(k1 + spec.r * 1024.0 + 32.0, 1e-9));
    // End-to-end budget: a 5000-bit certificate covers 1024 output bits.
    REQUIRE(spec.required_entropy <= 5000.0);

    auto one = extractor_params(64, 1, 0.01);
    REQUIRE_THAT(one.required_entropy,
                 Catch::Matchers::WithinAbs(4.0 * std::log2(100.0) + one.r + std::log2(100.0), 1e-9));

    auto narrow = extractor_params(64, 2, 0.01);
    auto wide = extractor_params(64, 4, 0.01);
    REQUIRE(wide.required_entropy >= narrow.required_entropy);
    REQUIRE_THROWS(extractor_params(64, 4, 1.5));
}
