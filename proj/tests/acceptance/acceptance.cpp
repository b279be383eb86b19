// Runs every primary acceptance criterion and prints one PASS/FAIL line each.
// Oracles are computed independently of the library code under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cbai/datasetgen.hpp"
#include "cbai/error.hpp"
#include "cbai/evalstats.hpp"
#include "cbai/harness.hpp"
#include "cbai/rng.hpp"

using namespace cbai;

namespace {

using Clock = std::chrono::steady_clock;

// Collects failed expectations of one criterion.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && failures_.size() < 8) failures_.push_back(what);
        if (!ok) ++failed_;
    }
    void note(const std::string& s) { notes_.push_back(s); }
    bool ok() const { return failed_ == 0; }
    std::string summary() const {
        std::string out;
        for (const auto& n : notes_) out += (out.empty() ? "" : "; ") + n;
        for (const auto& f : failures_) out += (out.empty() ? "" : "; ") + std::string("failed: ") + f;
        if (failed_ > failures_.size()) out += "; +" + std::to_string(failed_ - failures_.size()) + " more";
        return out;
    }

private:
    std::vector<std::string> notes_, failures_;
    std::size_t failed_ = 0;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---- code properties -------------------------------------------------------

void code_properties(Check& c) {
    const auto t0 = Clock::now();
    const MSequence m = default_msequence();
    const std::size_t L = m.length();
    c.expect(L == 31, "length " + std::to_string(L));
    c.expect(std::count(m.bits.begin(), m.bits.end(), 1) == 16, "ones");
    for (std::size_t lag = 0; lag < L; ++lag) {
        long sum = 0;
        for (std::size_t i = 0; i < L; ++i) {
            sum += (m.bits[i] ? 1 : -1) * (m.bits[(i + lag) % L] ? 1 : -1);
        }
        c.expect(sum == (lag == 0 ? 31 : -1), "autocorrelation at lag " + std::to_string(lag));
        c.expect(periodic_autocorrelation(m.bits, lag) == sum, "library autocorrelation at lag " + std::to_string(lag));
    }
    const StimulusCodebook book = build_codebook(m);
    c.expect(book.num_stimuli() == 10, "ten stimuli");
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < book.num_stimuli(); ++a) {
        for (std::size_t b = a + 1; b < book.num_stimuli(); ++b) {
            std::size_t agree = 0;
            for (std::size_t f = 0; f < L; ++f) agree += book.bit(a, f) == book.bit(b, f);
            c.expect(agree == 15, "pair " + std::to_string(a) + "," + std::to_string(b));
            ++pairs;
        }
    }
    const double t = seconds_since(t0);
    c.expect(t < 1.0, "runtime");
    c.note("L=31, 16 ones, autocorrelation 31/-1, " + std::to_string(pairs) + " pairs at 15/31, " + fmt("%.3fs", t));
}

// ---- timing ----------------------------------------------------------------

void timing(Check& c) {
    const EngineConfig cfg;
    const Simulator sim = make_simulator(cfg);
    c.expect(sim.timeline.frames.size() == 217, "217 frames");
    c.expect(sim.timeline.span_ms() == 10850.0, "span 10.85 s");
    c.expect(sim.timeline.frames.back().onset_ms == 10800.0, "last onset");
    const DecisionOutcome first{DecisionKind::Selected, 0, 16, cfg.decoder.frame_duration_ms,
                                cfg.decoder.acquisition_tail_ms};
    c.expect(first.selection_time_ms() == 800.0, "frame 16 at 800 ms");
    c.expect(first.wall_time_ms() == 1000.0, "frame 16 + tail = 1000 ms");
    c.expect(selection_time_ms(16, cfg.decoder) == 1000.0, "evaluation selection time");
    const DecisionOutcome last{DecisionKind::Timeout, 0, 217, 50.0, 200.0};
    c.expect(last.selection_time_ms() == 10850.0, "timeout at 10.85 s");
    c.note("217 frames = 10850 ms; frame 16 = 800 ms + 200 ms tail = 1000 ms");
}

// ---- oracle closed loop ----------------------------------------------------

void oracle_loop(Check& c) {
    const auto t0 = Clock::now();
    EngineConfig cfg;
    apply_snr_level(cfg, SnrLevel::Noiseless);
    const Simulator sim = make_simulator(cfg);
    std::size_t correct = 0, total = 0, lo = SIZE_MAX, hi = 0;
    for (std::size_t target = 0; target < 10; ++target) {
        for (std::size_t trial = 0; trial < 100; ++trial) {
            const DecisionOutcome o =
                decode_trial(sim, nullptr, cfg.decoder, target, 1000 + trial,
                             "oracle/" + std::to_string(target) + "/" + std::to_string(trial));
            correct += o.stimulus == target && o.kind == DecisionKind::Selected;
            ++total;
            lo = std::min(lo, o.frames_to_decision);
            hi = std::max(hi, o.frames_to_decision);
            c.expect(o.frames_to_decision >= 16 && o.frames_to_decision <= 31,
                     "decision frame " + std::to_string(o.frames_to_decision));
        }
    }
    const double t = seconds_since(t0);
    c.expect(correct == total, "accuracy");
    c.expect(t < 10.0, "runtime");
    c.note("accuracy " + fmt("%.3f", static_cast<double>(correct) / static_cast<double>(total)) + " over " +
           std::to_string(total) + " trials, decisions in frames [" + std::to_string(lo) + ", " + std::to_string(hi) +
           "], " + fmt("%.2fs", t));
}

// ---- decision rule ---------------------------------------------------------

struct OracleDecision {
    bool timeout = false;
    std::size_t stimulus = 0;
    std::size_t frames = 0;
    bool operator==(const OracleDecision&) const = default;
};

// Straight transcription of the rule in integer arithmetic.
std::optional<OracleDecision> oracle_decide(const std::vector<std::uint8_t>& stream, const StimulusCodebook& book) {
    const std::size_t N = book.num_stimuli();
    std::size_t finished_hits = 0;
    std::vector<std::size_t> agree(N), width(N);
    for (std::size_t n = 1; n <= stream.size(); ++n) {
        if (n >= 16) {
            const std::size_t w = std::min<std::size_t>(n, 31);
            for (std::size_t s = 0; s < N; ++s) {
                agree[s] = 0;
                for (std::size_t f = n - w; f < n; ++f) agree[s] += stream[f] == book.bit(s, f);
                width[s] = w;
            }
            std::optional<std::size_t> q;
            for (std::size_t s = 0; s < N && !q; ++s) {
                if (5 * agree[s] < 4 * w) continue;
                bool low = true;
                for (std::size_t o = 0; o < N; ++o) low = low && (o == s || 10 * agree[o] < 6 * w);
                if (low) q = s;
            }
            if (q && *q != 9) return OracleDecision{false, *q, n};
            if (q && ++finished_hits >= 10) return OracleDecision{false, 9, n};
        }
        if (n == 217) {
            std::size_t best = 0;
            for (std::size_t s = 1; s < N; ++s) {
                if (agree[s] > agree[best]) best = s;
            }
            return OracleDecision{true, best, n};
        }
    }
    return std::nullopt;
}

std::optional<OracleDecision> library_decide(const std::vector<std::uint8_t>& stream, const StimulusCodebook& book) {
    DecoderState st;
    const DecoderConfig cfg;
    for (auto b : stream) {
        if (auto d = push_prediction(st, b, book, cfg)) {
            return OracleDecision{d->kind == DecisionKind::Timeout, d->stimulus, d->frames_to_decision};
        }
    }
    return std::nullopt;
}

std::vector<std::uint8_t> code_stream(const StimulusCodebook& book, std::size_t s, std::size_t from, std::size_t to,
                                      std::vector<std::uint8_t> prefix = {}) {
    for (std::size_t f = from; f < to; ++f) prefix.push_back(book.bit(s, f));
    return prefix;
}

void decision_rule(Check& c) {
    const StimulusCodebook book = build_codebook(default_msequence());
    std::size_t cases = 0;
    auto agree_both = [&](const std::vector<std::uint8_t>& stream, const std::string& name) {
        const auto want = oracle_decide(stream, book);
        const auto got = library_decide(stream, book);
        c.expect(want == got, name);
        ++cases;
        return got;
    };

    // a pure code: selected at the first frame where it co-occurs with all others below the ceiling
    for (std::size_t s = 0; s < 9; ++s) {
        const auto d = agree_both(code_stream(book, s, 0, 217), "pure code " + std::to_string(s));
        c.expect(d && !d->timeout && d->stimulus == s && d->frames >= 16, "pure code selects " + std::to_string(s));
    }

    // co-occurrence: stimulus 1's code with every fourth 1-vs-4 disagreement flipped
    // toward stimulus 4, so 4 climbs while 1 stays high
    {
        std::vector<std::uint8_t> blocked;
        for (std::size_t f = 0; f < 217; ++f) {
            const bool flip = book.bit(1, f) != book.bit(4, f) && (f % 31) % 4 == 0;
            blocked.push_back(flip ? book.bit(4, f) : book.bit(1, f));
        }
        agree_both(blocked, "co-occurrence stream");
        DecoderState st;
        std::size_t blocked_pushes = 0;
        for (auto b : blocked) {
            const auto d = push_prediction(st, b, book, DecoderConfig{});
            const auto& acc = st.accuracies;
            for (std::size_t s = 0; s < acc.size(); ++s) {
                bool rival = false;
                for (std::size_t o = 0; o < acc.size(); ++o) rival = rival || (o != s && acc[o] >= 0.6);
                if (acc[s] >= 0.8 && rival) {
                    ++blocked_pushes;
                    c.expect(!d, "decided despite a rival at frame " + std::to_string(st.frames_seen));
                }
            }
            if (d) break;
        }
        c.expect(blocked_pushes > 0, "co-occurrence stream exercises a blocked push");
    }
    // threshold edges: for every window width, agreement exactly at and one below 0.8,
    // first evaluated at push w so the window holds exactly the constructed bits
    for (std::size_t w = 16; w <= 31; ++w) {
        DecoderConfig cfg;
        cfg.min_frames = w;
        const std::size_t need = (4 * w + 4) / 5;
        for (std::size_t agree : {need, need - 1}) {
            std::vector<std::uint8_t> stream = code_stream(book, 1, 0, w);
            for (std::size_t f = 0, wrong = w - agree; wrong > 0; f += 2, --wrong) stream[f] ^= 1;
            bool others_low = true;
            for (std::size_t o = 0; o < 10; ++o) {
                std::size_t a = 0;
                for (std::size_t f = 0; f < w; ++f) a += stream[f] == book.bit(o, f);
                if (o != 1) others_low = others_low && 10 * a < 6 * w;
            }
            DecoderState st;
            std::optional<DecisionOutcome> d;
            for (auto bit : stream) d = push_prediction(st, bit, book, cfg);
            c.expect(st.accuracies[1] == static_cast<double>(agree) / static_cast<double>(w),
                     "edge accuracy at width " + std::to_string(w));
            const bool want = agree == need && others_low;
            c.expect(static_cast<bool>(d && d->stimulus == 1) == want,
                     "edge decision at width " + std::to_string(w) + " agreement " + std::to_string(agree));
            ++cases;
        }
    }

    // finished rule: 10 qualifying pushes, counted cumulatively
    {
        // pushes at which stimulus 9 qualifies: at or above 0.8 with every rival below 0.6
        auto qualifying = [&](const std::vector<std::uint8_t>& stream) {
            std::vector<std::size_t> hits;
            for (std::size_t n = 16; n <= stream.size(); ++n) {
                const std::size_t w = std::min<std::size_t>(n, 31);
                bool ok = true;
                for (std::size_t o = 0; o < 10; ++o) {
                    std::size_t a = 0;
                    for (std::size_t f = n - w; f < n; ++f) a += stream[f] == book.bit(o, f);
                    ok = ok && (o == 9 ? 5 * a >= 4 * w : 10 * a < 6 * w);
                }
                if (ok) hits.push_back(n);
            }
            return hits;
        };
        auto check_finished = [&](const std::vector<std::uint8_t>& stream, const std::string& name) {
            const auto hits = qualifying(stream);
            const auto d = agree_both(stream, name);
            const bool selected9 = d && d->stimulus == 9 && !d->timeout;
            c.expect(selected9 == (hits.size() >= 10 && hits[9] <= (d ? d->frames : 217)), name + ": 10 hits");
            if (selected9) c.expect(d->frames == hits[9], name + ": decided on the 10th hit");
            return hits;
        };
        const auto pure = code_stream(book, 9, 0, 217);
        const auto hits = check_finished(pure, "finished pure");
        c.expect(hits.size() >= 10 && hits[9] > hits[0] + 8, "pure finished code needs ten pushes");
        // switch to other codes partway through the count
        for (std::size_t k = 1; k < 10 && k < hits.size(); ++k) {
            for (std::size_t other : {0, 4}) {
                check_finished(code_stream(book, other, hits[k], 217,
                                           std::vector<std::uint8_t>(pure.begin(), pure.begin() + static_cast<long>(hits[k]))),
                               "finished switched after hit " + std::to_string(k));
            }
        }
        // qualifying pushes need not be consecutive: three corrupted frames after a few hits
        std::vector<std::uint8_t> gap(pure.begin(), pure.begin() + static_cast<long>(hits.front() + 4));
        for (std::size_t f = gap.size(); f < 217; ++f) gap.push_back(book.bit(9, f) ^ (f < hits.front() + 7 ? 1 : 0));
        const auto gh = check_finished(gap, "finished with a gap");
        bool consecutive = true;
        for (std::size_t i = 1; i < std::min<std::size_t>(gh.size(), 10); ++i) consecutive = consecutive && gh[i] == gh[i - 1] + 1;
        c.expect(!consecutive, "gap stream has non-consecutive hits");
    }

    // timeout at frame 217 with lowest-id tie-break
    {
        // even blend of stimuli 5 and 2: where they disagree, alternate between them
        std::vector<std::uint8_t> blend;
        std::size_t toggle = 0;
        std::vector<std::uint8_t> period(31);
        for (std::size_t f = 0; f < 31; ++f) {
            period[f] = book.bit(5, f) == book.bit(2, f) ? book.bit(5, f) : (toggle++ % 2 ? book.bit(2, f)
                                                                                            : book.bit(5, f));
        }
        for (std::size_t f = 0; f < 217; ++f) blend.push_back(period[f % 31]);
        const auto d = agree_both(blend, "blend timeout");
        c.expect(d && d->timeout && d->frames == 217, "blend times out at 217");
        std::size_t a2 = 0, a5 = 0;
        for (std::size_t f = 186; f < 217; ++f) {
            a2 += blend[f] == book.bit(2, f);
            a5 += blend[f] == book.bit(5, f);
        }
        c.expect(a2 == a5, "blend ties 2 and 5");
        c.expect(d && d->stimulus == 2, "tie goes to the lowest id");
        // a stream of all zeros: every stimulus ties at 15/31, stimulus 0 wins
        const auto z = agree_both(std::vector<std::uint8_t>(217, 0), "all-zero stream");
        c.expect(z && z->timeout && z->stimulus == 0 && z->frames == 217, "all-zero tie-break");
    }

    // randomized agreement with the oracle
    Rng rng(2024);
    for (int t = 0; t < 400; ++t) {
        const std::size_t s = t % 10;
        const double flip = 0.05 * static_cast<double>(t % 8);
        std::vector<std::uint8_t> stream;
        for (std::size_t f = 0; f < 217; ++f) stream.push_back(book.bit(s, f) ^ (uniform01(rng) < flip ? 1 : 0));
        agree_both(stream, "random stream " + std::to_string(t));
    }
    c.note(std::to_string(cases) + " constructed and random streams match the reference rule exactly");
}

// ---- trained pipeline ------------------------------------------------------

double evaluate(const EngineConfig& cfg, const ClassifierModel& model, std::uint64_t master, std::size_t per_target,
                const std::string& tag) {
    const Simulator sim = make_simulator(cfg);
    std::vector<TrialResult> trials;
    for (std::size_t k = 0; k < per_target; ++k) {
        for (std::size_t target = 0; target < sim.codebook.num_stimuli(); ++target) {
            const auto o = decode_trial(sim, &model, cfg.decoder, target, master,
                                        tag + "/" + std::to_string(k) + "/" + std::to_string(target));
            trials.push_back({target, o});
        }
    }
    return selection_accuracy(trials);
}

void trained_pipeline(Check& c) {
    const auto t0 = Clock::now();
    std::vector<double> means;
    std::string levels;
    double high_accuracy = 0.0;
    for (SnrLevel level : kSnrSweep) {
        EngineConfig cfg;
        apply_snr_level(cfg, level);
        const TrainingSessionResult tr = run_training_session(cfg);
        if (level == SnrLevel::High) {
            c.expect(tr.training_frames == 1519, "1519 training frames");
            c.expect(tr.model.kind() == ModelKind::Cnn, "cnn model");
            high_accuracy = evaluate(cfg, tr.model, 77, 10, "acceptance/high");
            c.expect(high_accuracy >= 0.95, "high-SNR accuracy " + fmt("%.2f", high_accuracy));
        }
        double sum = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) sum += evaluate(cfg, tr.model, 500 + seed, 1, "sweep");
        means.push_back(sum / 20.0);
        levels += (levels.empty() ? "" : " ") + std::string(to_string(level)) + "=" + fmt("%.3f", means.back());
    }
    for (std::size_t i = 1; i < means.size(); ++i) c.expect(means[i] <= means[i - 1], "non-increasing sweep");
    const double t = seconds_since(t0);
    c.expect(t < 600.0, "runtime");
    c.note("high-SNR accuracy " + fmt("%.2f", high_accuracy) + " over 100 trials; sweep means " + levels +
           "; chance 0.1; " + fmt("%.0fs", t));
}

// ---- gradient checks -------------------------------------------------------

void gradient_checks(Check& c) {
    EngineConfig cfg;
    const Simulator sim = make_simulator(cfg);
    const EegSegment seg = sim.trial(3, 9, "acceptance/gradients");
    std::vector<FrameWindow> windows;
    for (std::size_t f : {20, 100, 180}) windows.push_back(extract_window(seg, sim.timeline.frames[f]));
    Rng rng(31);
    FrameWindow noise;
    noise.data.resize(kNumChannels * kWindowSamples);
    for (double& v : noise.data) v = standard_normal(rng);
    windows.push_back(noise);

    const ClassifierModel cnn = ClassifierModel::initialized(ModelDescriptor{});
    ModelDescriptor lin_desc;
    lin_desc.kind = ModelKind::Linear;
    ClassifierModel lin = ClassifierModel::zeros(lin_desc);
    for (double& p : lin.parameters()) p = 0.02 * standard_normal(rng);

    double cnn_max = 0.0, lin_max = 0.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        for (int label : {0, 1}) {
            cnn_max = std::max(cnn_max, gradient_check(cnn, windows[i], label, 150, 10 + i));
            lin_max = std::max(lin_max, gradient_check(lin, windows[i], label, 150, 20 + i));
        }
    }
    c.expect(cnn_max < 1e-3, "cnn " + fmt("%.2e", cnn_max));
    c.expect(lin_max < 1e-6, "linear " + fmt("%.2e", lin_max));
    c.note("max relative error cnn " + fmt("%.2e", cnn_max) + ", linear " + fmt("%.2e", lin_max) +
           " (150 coordinates x 8 windows/labels each)");
}

// ---- dataset pipeline ------------------------------------------------------

void dataset_pipeline(Check& c) {
    const auto corpus = synthetic_corpus(1000, 1);
    std::size_t pairs = 0;
    for (const auto& conv : corpus) pairs += conv.turns.size();
    c.expect(pairs == 1000, "1000 pairs");
    std::string notes;
    for (DatasetVariant v : {DatasetVariant::Xl, DatasetVariant::Cr}) {
        DatasetStats st;
        const auto samples = build_dataset(corpus, v, 1, &st);
        std::array<double, 4> share{};
        for (const auto& s : samples) {
            const std::string answer = s.completion.substr(0, s.completion.size() - kStopToken.size());
            c.expect(answer.size() <= kMaxAnswerChars, "answer over 110 chars: " + s.id);
            c.expect(s.completion.ends_with(kStopToken) && s.prompt.ends_with(kPromptTerminator), "layout " + s.id);
            share[s.history_depth] += 1.0 / static_cast<double>(samples.size());
        }
        const char* name = v == DatasetVariant::Xl ? "xl" : "cr";
        notes += std::string(notes.empty() ? "" : "; ") + name + " " + std::to_string(samples.size()) +
                 " samples, depth";
        for (std::size_t d = 0; d < 4; ++d) {
            c.expect(std::abs(share[d] - kHistoryDepthProbabilities[d]) <= 0.03,
                     std::string(name) + " depth " + std::to_string(d) + " " + fmt("%.3f", share[d]));
            notes += " " + fmt("%.3f", share[d]);
        }

        if (v != DatasetVariant::Cr) continue;
        const auto extractors = default_extractors();
        for (const auto& s : samples) {
            const std::size_t colon = s.id.rfind(':');
            const auto conv = std::find_if(corpus.begin(), corpus.end(),
                                           [&](const Conversation& x) { return x.id == s.id.substr(0, colon); });
            const std::string answer = conv->turns[std::stoul(s.id.substr(colon + 1))].second;
            std::optional<std::vector<std::string>> best;
            std::string best_tag;
            for (const auto& ex : extractors) {
                const auto kw = ex->extract(expand_contractions(answer));
                if (!kw.empty() && (!best || kw.size() < best->size())) {
                    best = kw;
                    best_tag = ex->tag();
                }
            }
            c.expect(best && s.keywords == inject_negation(*best, answer) && s.extractor == best_tag,
                     "cr minimal keywords " + s.id);
        }
    }

    const auto small = parse_corpus(
        "What did you do on the weekend?\n"
        "I went hiking with Anna on Saturday.\n"
        "Do you have any pets?\n"
        "No, I don't have any pets.\n"
        "\n"
        "What would you like to drink?\n"
        "I'll have a coffee with milk.\n");
    const std::string path = (std::filesystem::temp_directory_path() / "cbai_acceptance_dataset.jsonl").string();
    write_dataset(build_dataset(small, DatasetVariant::Xl, 5), path);
    const std::string golden_dir = CBAI_GOLDEN_DIR;
    c.expect(read_file(path) == read_file(golden_dir + "/dataset_three_samples.jsonl"), "dataset golden bytes");
    std::filesystem::remove(path);
    const std::vector<QaPair> history = {
        {"Hello how are you doing today?", "Great, how are you?"},
        {"What is your favorite food?", "I love salad."},
        {"What's your favorite animal?", "I like cats."},
    };
    c.expect(format_sentence_prompt(history, "Do you have any pets?", {"dog", "not"}) ==
                 read_file(golden_dir + "/prompt_three_pairs.txt"),
             "prompt golden bytes");
    c.note(notes + "; golden files byte-equal");
}

// ---- evaluation math -------------------------------------------------------

void evaluation_math(Check& c) {
    c.expect(adjusted_rating(RatingRecord{"m", 4, Mistake::AddedDetails}) == 2.0, "adjusted (4, added details)");

    const AnovaResult a = one_way_anova({{1, 2}, {3, 4}});
    const double t = std::sqrt(8.0);
    const double p_t2 = 1.0 - t / std::sqrt(t * t + 2.0);
    c.expect(a.f == 8.0, "F = 8, got " + fmt("%.17g", a.f));
    c.expect(std::abs(a.p - p_t2) < 1e-3, "p vs t(2) closed form");
    c.expect(std::abs(a.p - p_t2) < 1e-9, "p to 1e-9");

    const AnovaResult same = one_way_anova({{2, 3, 4}, {2, 3, 4}});
    c.expect(same.f == 0.0 && same.p == 1.0, "identical groups");

    Rng rng(8);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> g(3);
        for (auto& grp : g) {
            for (int i = 0; i < 7; ++i) grp.push_back(1.0 + 4.0 * uniform01(rng));
        }
        const double base = one_way_anova(g).f;
        // transforms that keep the inputs well conditioned: rounding the shifted data
        // itself must stay far below the tolerance
        for (auto [scale, shift] : {std::pair{3.5, -11.0}, std::pair{0.3, 7.0}, std::pair{-2.0, 0.5},
                                    std::pair{1000.0, 1e4}}) {
            auto h = g;
            for (auto& grp : h) {
                for (double& x : grp) x = scale * x + shift;
            }
            worst = std::max(worst, std::abs(one_way_anova(h).f - base) / base);
        }
    }
    c.expect(worst < 1e-12, "shift/scale invariance " + fmt("%.2e", worst));
    c.note("adjusted 2.0; F=8 p=" + fmt("%.4f", a.p) + " (t(2) " + fmt("%.4f", p_t2) +
           "); identical F=0 p=1; invariance " + fmt("%.1e", worst) +
           "; published ratings-derived means and p-value not reproducible, excluded");
}

// ---- dialogue conformance --------------------------------------------------

void dialogue_conformance(Check& c) {
    MockProvider mock;
    DialogueEngine engine(mock, default_knowledge_base());
    engine.ingest_question("Are you hungry?");
    c.expect(engine.apply_selection(Selection::none()).text == "I am sorry, I cannot answer this question right now.",
             "none reply");
    engine.ingest_question("Are you sure?");
    c.expect(engine.apply_selection(Selection::correction()).text == "I am sorry, I misspoke earlier.",
             "correction reply");

    engine.ingest_question("What is your name?");
    c.expect(engine.state().from_knowledge_base && engine.state().category == "NAME", "NAME routing");
    const auto* names = engine.knowledge_base().find("NAME");
    c.expect(names && engine.state().keyword_pages[0][0] == names->front(), "NAME options");
    (void)engine.apply_selection(Selection::keyword(0));
    engine.ingest_question("What is your address?");
    c.expect(engine.state().from_knowledge_base && engine.state().category == "ADDRESS", "ADDRESS routing");
    const auto* addresses = engine.knowledge_base().find("ADDRESS");
    c.expect(addresses && engine.state().keyword_pages[0][0] == addresses->front(), "ADDRESS options");
    const Action fin = engine.apply_selection(Selection::finished());
    c.expect(fin.text == "Thank you, goodbye." && fin.ended, "finished reply");

    DialogueEngine budget(mock, default_knowledge_base());
    budget.ingest_question("Are you hungry?");
    std::size_t used = 0;
    Action last;
    while (!last.ended && used < 100) {
        last = budget.apply_selection(Selection::more());
        ++used;
    }
    c.expect(used == 30 && budget.state().status == ConversationStatus::Ended, "budget of 30 selections");

    EngineConfig cfg;
    apply_snr_level(cfg, SnrLevel::Noiseless);
    const ScenarioResult r = run_scenario(cfg, pizzeria_script(), nullptr, mock);
    const std::string text = format_transcript(r.transcript);
    bool parsed = false;
    try {
        parsed = parse_transcript(text) == r.transcript && format_transcript(parse_transcript(text)) == text;
    } catch (const Error& e) {
        c.expect(false, std::string("transcript parse: ") + e.what());
    }
    c.expect(parsed, "transcript round trip");
    c.expect(r.finished, "scenario finished");
    c.note("canned strings exact; NAME/ADDRESS routed; budget ends at 30; pizzeria transcript (" +
           std::to_string(r.trials.size()) + " selections) parses and round-trips");
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<void(Check&)> run;
    };
    const std::vector<Criterion> criteria = {
        {"code-properties", code_properties},
        {"timing-arithmetic", timing},
        {"oracle-closed-loop", oracle_loop},
        {"decision-rule", decision_rule},
        {"trained-pipeline", trained_pipeline},
        {"gradient-checks", gradient_checks},
        {"dataset-pipeline", dataset_pipeline},
        {"evaluation-math", evaluation_math},
        {"dialogue-conformance", dialogue_conformance},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Check c;
        try {
            cr.run(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        std::printf("%s %s: %s\n", c.ok() ? "PASS" : "FAIL", cr.name, c.summary().c_str());
        std::fflush(stdout);
        failed += !c.ok();
    }
    return failed == 0 ? 0 : 1;
}
