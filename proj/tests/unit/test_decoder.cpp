#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <optional>

#include "cbai/decoder.hpp"
#include "cbai/error.hpp"
#include "cbai/rng.hpp"

using namespace cbai;

namespace {

const StimulusCodebook& book() {
    static const StimulusCodebook b = build_codebook(default_msequence());
    return b;
}

struct Run {
    std::optional<DecisionOutcome> outcome;
    DecoderState state;
};

Run feed(const Bits& stream, const DecoderConfig& cfg = {}) {
    Run run;
    for (std::uint8_t bit : stream) {
        run.outcome = push_prediction(run.state, bit, book(), cfg);
        if (run.outcome) break;
    }
    return run;
}

Bits code_stream(std::size_t stimulus, std::size_t frames) {
    Bits out(frames);
    for (std::size_t i = 0; i < frames; ++i) out[i] = book().bit(stimulus, i);
    return out;
}

// Independent re-statement of the decision rule, recomputing each window from
// scratch with integer counts.
std::optional<std::pair<std::size_t, std::size_t>> oracle_decision(const Bits& stream, const DecoderConfig& cfg,
                                                                   bool* timed_out) {
    std::size_t hits = 0;
    *timed_out = false;
    for (std::size_t n = 1; n <= stream.size(); ++n) {
        std::vector<double> acc(10, 0.0);
        if (n >= cfg.min_frames) {
            const std::size_t w = std::min(n, cfg.window_frames);
            for (std::size_t s = 0; s < 10; ++s) {
                int agree = 0;
                for (std::size_t i = n - w; i < n; ++i) agree += stream[i] == book().bit(s, i);
                acc[s] = static_cast<double>(agree) / static_cast<double>(w);
            }
            for (std::size_t s = 0; s < 10; ++s) {
                bool ok = acc[s] >= cfg.select_threshold;
                for (std::size_t o = 0; o < 10 && ok; ++o) ok = o == s || acc[o] < cfg.reject_ceiling;
                if (!ok) continue;
                if (s != cfg.finished_stimulus) return std::make_pair(s, n);
                if (++hits >= cfg.finished_required_frames) return std::make_pair(s, n);
            }
        }
        if (n == cfg.max_frames) {
            std::size_t best = 0;
            for (std::size_t s = 1; s < 10; ++s) {
                if (acc[s] > acc[best]) best = s;
            }
            *timed_out = true;
            return std::make_pair(best, n);
        }
    }
    return std::nullopt;
}

}  // namespace

TEST_CASE("config invariants") {
    DecoderConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.reject_ceiling = 0.9;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = DecoderConfig{};
    cfg.min_frames = 40;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("perfect stream for stimulus 3 is selected between frames 16 and 31") {
    DecoderState state;
    std::optional<DecisionOutcome> out;
    const Bits stream = code_stream(3, 217);
    for (std::size_t i = 0; i < stream.size() && !out; ++i) {
        out = push_prediction(state, stream[i], book(), DecoderConfig{});
        if (state.frames_seen >= 16) CHECK(state.accuracies[3] == 1.0);
        if (state.frames_seen < 16) CHECK_FALSE(out.has_value());
    }
    REQUIRE(out.has_value());
    CHECK(out->kind == DecisionKind::Selected);
    CHECK(out->stimulus == 3);
    CHECK(out->frames_to_decision >= 16);
    CHECK(out->frames_to_decision <= 31);
    CHECK(out->selection_time_ms() == 50.0 * static_cast<double>(out->frames_to_decision));
    CHECK(out->wall_time_ms() == out->selection_time_ms() + 200.0);
}

TEST_CASE("every perfect stream decides correctly by frame 31") {
    for (std::size_t s = 0; s < 10; ++s) {
        const Run run = feed(code_stream(s, 217));
        REQUIRE(run.outcome.has_value());
        CHECK(run.outcome->stimulus == s);
        CHECK(run.outcome->kind == DecisionKind::Selected);
        CHECK(run.outcome->frames_to_decision <= 31);
    }
}

TEST_CASE("finished stimulus needs ten qualifying pushes") {
    DecoderConfig cfg;
    const Bits stream = code_stream(cfg.finished_stimulus, 217);
    DecoderState state;
    std::optional<DecisionOutcome> out;
    std::size_t qualifying = 0;
    for (std::size_t i = 0; i < stream.size() && !out; ++i) {
        const std::size_t before = state.finished_hits;
        out = push_prediction(state, stream[i], book(), cfg);
        if (state.finished_hits > before) {
            ++qualifying;
            if (qualifying == 1) CHECK_FALSE(out.has_value());
        }
    }
    REQUIRE(out.has_value());
    REQUIRE(state.first_qualifying_frame.has_value());
    CHECK(out->stimulus == cfg.finished_stimulus);
    CHECK(qualifying == 10);
    CHECK(state.finished_hits == 10);
    CHECK(out->frames_to_decision > *state.first_qualifying_frame);
    CHECK(out->frames_to_decision >= *state.first_qualifying_frame + 9);
}

TEST_CASE("consecutive finished mode resets on a non-qualifying push") {
    DecoderConfig cfg;
    cfg.finished_mode = FinishedMode::Consecutive;
    Bits stream = code_stream(cfg.finished_stimulus, 217);
    const Run cumulative = feed(stream);
    const Run consecutive = feed(stream, cfg);
    REQUIRE(cumulative.outcome.has_value());
    REQUIRE(consecutive.outcome.has_value());
    CHECK(consecutive.outcome->stimulus == cfg.finished_stimulus);
    CHECK(consecutive.outcome->frames_to_decision >= cumulative.outcome->frames_to_decision);
}

TEST_CASE("all-ones stream times out at 217 with lowest-id tie break") {
    const Run run = feed(Bits(217, 1));
    REQUIRE(run.outcome.has_value());
    CHECK(run.outcome->kind == DecisionKind::Timeout);
    CHECK(run.outcome->frames_to_decision == 217);
    // last 31 frames are a full period: every stimulus agrees on its 16 ones
    for (double a : run.state.accuracies) CHECK(a == 16.0 / 31.0);
    CHECK(run.outcome->stimulus == 0);
    CHECK(run.outcome->wall_time_ms() == 11050.0);
}

TEST_CASE("seeded random streams time out at 217 returning the argmax") {
    int timeouts = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        Rng rng(seed);
        Bits stream(217);
        for (auto& b : stream) b = static_cast<std::uint8_t>(rng() & 1u);
        bool timed_out = false;
        const auto expected = oracle_decision(stream, DecoderConfig{}, &timed_out);
        const Run run = feed(stream);
        REQUIRE(expected.has_value());
        REQUIRE(run.outcome.has_value());
        CHECK(run.outcome->stimulus == expected->first);
        CHECK(run.outcome->frames_to_decision == expected->second);
        CHECK((run.outcome->kind == DecisionKind::Timeout) == timed_out);
        if (timed_out) {
            ++timeouts;
            CHECK(run.outcome->frames_to_decision == 217);
        }
    }
    CHECK(timeouts > 30);
}

TEST_CASE("property: decoder matches the brute-force rule on noisy code streams") {
    // Streams copy a target's code with a per-frame flip probability; this
    // mixes early selections, finished counting, near-threshold rejections
    // and timeouts.
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        Rng rng(seed);
        const std::size_t target = uniform_index(rng, 10);
        const double flip = 0.05 * static_cast<double>(seed % 7);
        Bits stream = code_stream(target, 217);
        for (auto& b : stream) {
            if (uniform01(rng) < flip) b ^= 1u;
        }
        bool timed_out = false;
        const auto expected = oracle_decision(stream, DecoderConfig{}, &timed_out);
        const Run run = feed(stream);
        REQUIRE(expected.has_value());
        REQUIRE(run.outcome.has_value());
        CAPTURE(seed);
        CHECK(run.outcome->stimulus == expected->first);
        CHECK(run.outcome->frames_to_decision == expected->second);
        CHECK(run.outcome->frames_to_decision >= 16);
        CHECK(run.state.predicted_bits.size() <= 31);
        CHECK(run.state.predicted_bits.size() == std::min<std::size_t>(run.state.frames_seen, 31));
    }
}

TEST_CASE("high target accuracy alone is not enough when a rival is >= 0.6") {
    // Stimuli 0 and 1 (shift 3 apart) agree on many frames early; search the
    // prefix where stimulus 0 reaches 0.8 but some rival is still >= 0.6.
    const Bits stream = code_stream(0, 31);
    DecoderState state;
    bool saw_blocked = false;
    for (std::uint8_t bit : stream) {
        const auto out = push_prediction(state, bit, book(), DecoderConfig{});
        if (state.frames_seen >= 16 && !out) {
            bool rival = false;
            for (std::size_t s = 1; s < 10; ++s) rival = rival || state.accuracies[s] >= 0.6;
            CHECK(state.accuracies[0] == 1.0);
            CHECK(rival);
            saw_blocked = true;
        }
        if (out) break;
    }
    CHECK(saw_blocked);
}

TEST_CASE("push_prediction is a pure transition and refuses after a decision") {
    Rng rng(3);
    DecoderState state;
    for (int i = 0; i < 20; ++i) (void)push_prediction(state, static_cast<std::uint8_t>(rng() & 1u), book(), {});
    DecoderState a = state;
    DecoderState b = state;
    const auto ra = push_prediction(a, 1, book(), {});
    const auto rb = push_prediction(b, 1, book(), {});
    CHECK(a == b);
    CHECK(ra == rb);

    Run done = feed(code_stream(2, 217));
    REQUIRE(done.outcome.has_value());
    try {
        (void)push_prediction(done.state, 0, book(), {});
        FAIL("expected AlreadyDecided");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AlreadyDecided);
    }
}

TEST_CASE("run_offline with a ground-truth predictor on noiseless EEG") {
    const FrameTimeline tl = build_timeline(book());
    const VepKernel kernel = default_kernel();
    for (std::size_t s = 0; s < 10; ++s) {
        const EegSegment seg = synthesize(tl, s, kernel, NoiseModel{});
        const DecisionOutcome out = run_offline(seg, tl, GroundTruthPredictor(book(), s), book(), DecoderConfig{});
        CHECK(out.stimulus == s);
        CHECK(out.kind == DecisionKind::Selected);
        CHECK(out.frames_to_decision >= 16);
        CHECK(out.frames_to_decision <= 31);
    }
}

TEST_CASE("zero segment with a zero linear model equals the all-ones stream") {
    const FrameTimeline tl = build_timeline(book());
    const EegSegment seg(6, 11100);
    ModelDescriptor lin;
    lin.kind = ModelKind::Linear;
    std::vector<TrialLogRecord> log;
    const DecisionOutcome out = run_offline(seg, tl, ClassifierModel::zeros(lin), book(), DecoderConfig{},
                                            [&log](const TrialLogRecord& r) { log.push_back(r); });
    const Run ones = feed(Bits(217, 1));
    REQUIRE(ones.outcome.has_value());
    CHECK(out == *ones.outcome);
    REQUIRE(log.size() == 217);
    for (const auto& r : log) CHECK(r.bit == 1);
    CHECK(log.back().decided);
    CHECK_FALSE(log.front().decided);
}

TEST_CASE("replaying a saved segment gives the same outcome") {
    const FrameTimeline tl = build_timeline(book());
    const EegSegment seg = synthesize(tl, 6, default_kernel(), NoiseModel{NoiseKind::White, 0.4, 17});
    const auto path = std::filesystem::temp_directory_path() / "cbai_replay_test.bin";
    save_segment(path.string(), seg);
    ModelDescriptor d;
    d.seed = 5;
    const ClassifierModel model = ClassifierModel::initialized(d);
    const EegSegment a = load_segment(path.string());
    const EegSegment b = load_segment(path.string());
    CHECK(run_offline(a, tl, model, book(), {}) == run_offline(b, tl, model, book(), {}));
    std::filesystem::remove(path);
}

TEST_CASE("selection accuracy") {
    DecisionOutcome o;
    std::vector<TrialResult> trials;
    for (int i = 0; i < 11; ++i) {
        o.stimulus = static_cast<std::size_t>(i % 10);
        trials.push_back({static_cast<std::size_t>(i == 10 ? 3 : i % 10), o});
    }
    CHECK(selection_accuracy(trials) == doctest::Approx(10.0 / 11.0));
    trials.resize(10);
    CHECK(selection_accuracy(trials) == 1.0);
    for (auto& t : trials) t.true_stimulus = (t.outcome.stimulus + 1) % 10;
    CHECK(selection_accuracy(trials) == 0.0);
    try {
        (void)selection_accuracy({});
        FAIL("expected EmptyInput");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyInput);
    }
}

TEST_CASE("trial log records round trip") {
    TrialLogRecord r;
    r.frame_index = 43;
    r.bit = 1;
    r.accuracies = std::vector<double>(10, 0.25);
    r.decided = true;
    r.outcome = DecisionOutcome{DecisionKind::Selected, 4, 44};
    r.target = 4;
    const std::string line = format_trial_log_record(r);
    CHECK(line.find('\n') == std::string::npos);
    const TrialLogRecord back = parse_trial_log_record(line);
    CHECK(back.frame_index == 43);
    CHECK(back.accuracies == r.accuracies);
    REQUIRE(back.outcome.has_value());
    CHECK(back.outcome->frames_to_decision == 44);
    CHECK(back.target == std::optional<std::size_t>(4));
    CHECK_THROWS_AS(parse_trial_log_record("{not json"), Error);
}
