#include <doctest.h>

#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "cbai/error.hpp"
#include "cbai/stimulus.hpp"

using namespace cbai;

namespace {

// Test-side oracle: walks the register as a plain vector<int>, independent of
// the bit-packed implementation, and reports (output bits, period).
std::pair<std::vector<int>, std::size_t> walk_lfsr(int degree, const std::vector<int>& taps,
                                                   const std::vector<int>& seed) {
    std::vector<int> reg = seed;
    std::vector<int> out;
    std::size_t period = 0;
    const std::size_t cap = (std::size_t{1} << degree) + 1;
    do {
        out.push_back(reg[degree - 1]);
        int fb = 0;
        for (int t : taps) fb ^= reg[t - 1];
        for (int j = degree - 1; j > 0; --j) reg[j] = reg[j - 1];
        reg[0] = fb;
        ++period;
    } while (reg != seed && period < cap);
    return {out, period};
}

int brute_correlation(const Bits& a, const Bits& b) {
    int s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] ? 1 : -1) * (b[i] ? 1 : -1);
    return s;
}

// Primitive trinomial/pentanomial taps per degree (reciprocal convention does
// not matter for primitivity).
const std::map<int, std::vector<int>> kPrimitiveTaps = {
    {2, {2, 1}}, {3, {3, 2}}, {4, {4, 3}}, {5, {5, 2}}, {6, {6, 5}},
    {7, {7, 6}}, {8, {8, 6, 5, 4}}, {9, {9, 5}}, {10, {10, 7}},
};

}  // namespace

TEST_CASE("default m-sequence: length 31, 16 ones, matches the register-walk oracle") {
    const MSequence seq = default_msequence();
    CHECK(seq.length() == 31);
    CHECK(std::accumulate(seq.bits.begin(), seq.bits.end(), 0) == 16);

    auto [oracle, period] = walk_lfsr(5, {5, 2}, {0, 0, 0, 0, 1});
    CHECK(period == 31);
    REQUIRE(oracle.size() == seq.bits.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(oracle[i] == seq.bits[i]);
}

TEST_CASE("degree-2 m-sequence has two ones and one zero") {
    const std::vector<int> taps = {2, 1};
    const std::vector<std::uint8_t> seed = {0, 1};
    const MSequence seq = generate_msequence(2, taps, seed);
    CHECK(seq.length() == 3);
    CHECK(std::accumulate(seq.bits.begin(), seq.bits.end(), 0) == 2);
}

TEST_CASE("non-primitive taps {5,1} are rejected; oracle period is 21") {
    auto [oracle, period] = walk_lfsr(5, {5, 1}, {0, 0, 0, 0, 1});
    CHECK(period == 21);
    const std::vector<int> taps = {5, 1};
    const std::vector<std::uint8_t> seed = {0, 0, 0, 0, 1};
    try {
        (void)generate_msequence(5, taps, seed);
        FAIL("expected DegenerateSequence");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateSequence);
    }
}

TEST_CASE("zero seed and bad arguments") {
    const std::vector<int> taps = {5, 2};
    const std::vector<std::uint8_t> zero(5, 0);
    CHECK_THROWS_AS(generate_msequence(5, taps, zero), Error);
    try {
        (void)generate_msequence(5, taps, zero);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroSeed);
    }
    const std::vector<std::uint8_t> seed1 = {1};
    const std::vector<int> tap1 = {1};
    CHECK_THROWS_AS(generate_msequence(1, tap1, seed1), Error);
    const std::vector<int> bad_taps = {6, 2};
    const std::vector<std::uint8_t> seed5 = {1, 0, 0, 0, 0};
    CHECK_THROWS_AS(generate_msequence(5, bad_taps, seed5), Error);
}

TEST_CASE("property: primitive configurations give period 2^k-1, balance, two-valued autocorrelation") {
    for (const auto& [degree, taps] : kPrimitiveTaps) {
        CAPTURE(degree);
        // Several nonzero seeds per degree.
        for (std::uint32_t seed_word : {1u, 3u, (1u << degree) - 1u, 0x5u}) {
            std::vector<std::uint8_t> seed(degree);
            bool any = false;
            for (int j = 0; j < degree; ++j) {
                seed[j] = (seed_word >> j) & 1u;
                any = any || seed[j];
            }
            if (!any) continue;
            const MSequence seq = generate_msequence(degree, taps, seed);
            const std::size_t len = (std::size_t{1} << degree) - 1;
            CHECK(seq.length() == len);
            CHECK(static_cast<std::size_t>(std::accumulate(seq.bits.begin(), seq.bits.end(), 0)) ==
                  (std::size_t{1} << (degree - 1)));
            CHECK(periodic_autocorrelation(seq.bits, 0) == static_cast<int>(len));
            for (std::size_t lag = 1; lag < len; ++lag) {
                CHECK(periodic_autocorrelation(seq.bits, lag) == -1);
            }
        }
    }
}

TEST_CASE("autocorrelation of the default code, brute force over every lag") {
    const MSequence seq = default_msequence();
    CHECK(periodic_autocorrelation(seq.bits, 0) == 31);
    for (std::size_t lag = 1; lag < 31; ++lag) {
        CHECK(brute_correlation(seq.bits, circular_shift(seq.bits, static_cast<long long>(lag))) == -1);
        CHECK(periodic_autocorrelation(seq.bits, lag) == -1);
    }
    const std::vector<int> taps = {2, 1};
    const std::vector<std::uint8_t> seed = {0, 1};
    const MSequence tiny = generate_msequence(2, taps, seed);
    CHECK(periodic_autocorrelation(tiny.bits, 1) == -1);
    CHECK_THROWS_AS(periodic_autocorrelation(seq.bits, 31), Error);
}

TEST_CASE("circular shift identities") {
    const MSequence seq = default_msequence();
    CHECK(circular_shift(seq.bits, 0) == seq.bits);
    CHECK(circular_shift(seq.bits, 31) == seq.bits);
    CHECK(circular_shift(circular_shift(seq.bits, 3), 28) == seq.bits);
    CHECK(circular_shift(seq.bits, -1) == circular_shift(seq.bits, 30));
    const Bits s5 = circular_shift(seq.bits, 5);
    for (std::size_t i = 0; i < 31; ++i) CHECK(s5[i] == seq.bits[(i + 5) % 31]);
}

TEST_CASE("codebook shifts and pairwise agreement 15/31") {
    const StimulusCodebook book = build_codebook(default_msequence(), 10, 3);
    REQUIRE(book.num_stimuli() == 10);
    CHECK(book.amplitude == 0.5);
    for (std::size_t s = 0; s < 10; ++s) CHECK(book.shifts[s] == 3 * s);
    CHECK(std::set<std::size_t>(book.shifts.begin(), book.shifts.end()).size() == 10);

    for (std::size_t a = 0; a < 10; ++a) {
        for (std::size_t b = a + 1; b < 10; ++b) {
            const Bits ra = book.row(a);
            const Bits rb = book.row(b);
            int agree = 0;
            for (std::size_t i = 0; i < 31; ++i) agree += ra[i] == rb[i];
            CHECK(agree == 15);
        }
    }
    try {
        (void)build_codebook(default_msequence(), 32, 1);
        FAIL("expected ShiftCollision");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ShiftCollision);
    }
}

TEST_CASE("timeline: 217 frames, 50 ms apart, period-31 wrap") {
    const StimulusCodebook book = build_codebook(default_msequence());
    const FrameTimeline tl = build_timeline(book, 20.0, 7);
    REQUIRE(tl.frames.size() == 217);
    CHECK(tl.frame_duration_ms == 50.0);
    CHECK(tl.frames.back().onset_ms == 10800.0);
    CHECK(tl.span_ms() == 10850.0);
    for (std::size_t s = 0; s < 10; ++s) CHECK(tl.frames[0].states[s] == book.base.bits[book.shifts[s]]);
    CHECK(tl.frames[31].states == tl.frames[0].states);
    for (const FrameEvent& f : tl.frames) {
        CHECK(f.onset_ms == static_cast<double>(f.frame_index) * 50.0);
        for (std::size_t s = 0; s < 10; ++s) CHECK(f.states[s] == book.base.bits[(f.frame_index + book.shifts[s]) % 31]);
    }
    const FrameTimeline again = build_timeline(book, 20.0, 7);
    for (std::size_t i = 0; i < tl.frames.size(); ++i) CHECK(again.frames[i].states == tl.frames[i].states);
    CHECK_THROWS_AS(build_timeline(book, 0.0, 7), Error);
}

TEST_CASE("codebook text export parses back") {
    const StimulusCodebook book = build_codebook(default_msequence());
    const std::string text = export_codebook(book);
    CHECK(text.rfind("degree=5\ntaps=5,2\nshift_step=3\n", 0) == 0);
    const StimulusCodebook back = parse_codebook(text);
    CHECK(back.shifts == book.shifts);
    CHECK(back.base.bits == book.base.bits);
    CHECK(back.base.taps == book.base.taps);
    CHECK_THROWS_AS(parse_codebook("degree=5\n\n01x\n"), Error);
}
