#include "cbai/decoder.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "cbai/error.hpp"

namespace cbai {

void DecoderConfig::validate() const {
    if (!(0.0 < reject_ceiling && reject_ceiling < select_threshold && select_threshold <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "need 0 < reject_ceiling < select_threshold <= 1");
    }
    if (!(min_frames >= 1 && min_frames <= window_frames && window_frames <= max_frames)) {
        throw Error(ErrorCode::InvalidArgument, "need 1 <= min_frames <= window_frames <= max_frames");
    }
    if (finished_required_frames < 1) {
        throw Error(ErrorCode::InvalidArgument, "finished_required_frames must be >= 1");
    }
}

std::optional<DecisionOutcome> push_prediction(DecoderState& state, std::uint8_t bit,
                                               const StimulusCodebook& codebook, const DecoderConfig& cfg) {
    if (state.decided) throw Error(ErrorCode::AlreadyDecided, "trial already has a decision");
    const std::size_t n_stim = codebook.num_stimuli();
    if (state.accuracies.size() != n_stim) state.accuracies.assign(n_stim, 0.0);

    state.predicted_bits.push_back(bit ? 1 : 0);
    if (state.predicted_bits.size() > cfg.window_frames) state.predicted_bits.pop_front();
    ++state.frames_seen;

    auto decide = [&](DecisionKind kind, std::size_t stimulus) {
        state.decided = DecisionOutcome{kind, stimulus, state.frames_seen, cfg.frame_duration_ms,
                                        cfg.acquisition_tail_ms};
        return state.decided;
    };

    if (state.frames_seen >= cfg.min_frames) {
        const std::size_t w = state.predicted_bits.size();
        const std::size_t first_frame = state.frames_seen - w;
        for (std::size_t s = 0; s < n_stim; ++s) {
            std::size_t agree = 0;
            for (std::size_t k = 0; k < w; ++k) {
                if (state.predicted_bits[k] == codebook.bit(s, first_frame + k)) ++agree;
            }
            state.accuracies[s] = static_cast<double>(agree) / static_cast<double>(w);
        }

        std::optional<std::size_t> qualifying;
        for (std::size_t s = 0; s < n_stim && !qualifying; ++s) {
            if (state.accuracies[s] < cfg.select_threshold) continue;
            bool others_low = true;
            for (std::size_t o = 0; o < n_stim; ++o) {
                if (o != s && state.accuracies[o] >= cfg.reject_ceiling) {
                    others_low = false;
                    break;
                }
            }
            if (others_low) qualifying = s;
        }

        if (qualifying && !state.first_qualifying_frame) state.first_qualifying_frame = state.frames_seen;

        const bool finished_qualifies = qualifying && *qualifying == cfg.finished_stimulus;
        if (finished_qualifies) {
            ++state.finished_hits;
        } else if (cfg.finished_mode == FinishedMode::Consecutive) {
            state.finished_hits = 0;
        }

        if (qualifying && !finished_qualifies) return decide(DecisionKind::Selected, *qualifying);
        if (finished_qualifies && state.finished_hits >= cfg.finished_required_frames) {
            return decide(DecisionKind::Selected, cfg.finished_stimulus);
        }
    }

    if (state.frames_seen >= cfg.max_frames) {
        std::size_t best = 0;
        for (std::size_t s = 1; s < n_stim; ++s) {
            if (state.accuracies[s] > state.accuracies[best]) best = s;
        }
        return decide(DecisionKind::Timeout, best);
    }
    return std::nullopt;
}

std::string format_trial_log_record(const TrialLogRecord& r) {
    nlohmann::ordered_json j;
    j["frame_index"] = r.frame_index;
    j["bit"] = r.bit;
    j["accuracies"] = r.accuracies;
    j["decided"] = r.decided;
    if (r.outcome) {
        j["kind"] = r.outcome->kind == DecisionKind::Selected ? "selected" : "timeout";
        j["stimulus"] = r.outcome->stimulus;
        j["frames"] = r.outcome->frames_to_decision;
    }
    if (r.target) j["target"] = *r.target;
    return j.dump();
}

TrialLogRecord parse_trial_log_record(const std::string& line) {
    try {
        const auto j = nlohmann::json::parse(line);
        TrialLogRecord r;
        r.frame_index = j.at("frame_index").get<std::size_t>();
        r.bit = j.at("bit").get<std::uint8_t>();
        r.accuracies = j.at("accuracies").get<std::vector<double>>();
        r.decided = j.at("decided").get<bool>();
        if (j.contains("stimulus")) {
            DecisionOutcome o;
            o.kind = j.at("kind").get<std::string>() == "timeout" ? DecisionKind::Timeout : DecisionKind::Selected;
            o.stimulus = j.at("stimulus").get<std::size_t>();
            o.frames_to_decision = j.at("frames").get<std::size_t>();
            r.outcome = o;
        }
        if (j.contains("target")) r.target = j.at("target").get<std::size_t>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("trial log record: ") + e.what());
    }
}

DecisionOutcome run_offline(const EegSegment& segment, const FrameTimeline& timeline,
                            const FramePredictor& model, const StimulusCodebook& codebook,
                            const DecoderConfig& cfg, const TrialLogSink& sink) {
    cfg.validate();
    if (timeline.frames.size() < cfg.max_frames) {
        throw Error(ErrorCode::InvalidArgument, "timeline shorter than max_frames");
    }
    DecoderState state;
    for (const FrameEvent& frame : timeline.frames) {
        const FrameWindow window = extract_window(segment, frame);
        const std::uint8_t bit = model.predict(window) >= 0.5 ? 1 : 0;
        const auto outcome = push_prediction(state, bit, codebook, cfg);
        if (sink) {
            TrialLogRecord rec;
            rec.frame_index = frame.frame_index;
            rec.bit = bit;
            rec.accuracies = state.accuracies;
            rec.decided = outcome.has_value();
            rec.outcome = outcome;
            sink(rec);
        }
        if (outcome) return *outcome;
    }
    throw Error(ErrorCode::InvalidState, "decoder ran out of frames without a decision");
}

double selection_accuracy(const std::vector<TrialResult>& trials) {
    if (trials.empty()) throw Error(ErrorCode::EmptyInput, "no trials");
    const auto correct = std::count_if(trials.begin(), trials.end(), [](const TrialResult& t) {
        return t.outcome.stimulus == t.true_stimulus;
    });
    return static_cast<double>(correct) / static_cast<double>(trials.size());
}

}  // namespace cbai
