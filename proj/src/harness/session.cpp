#include <cstdio>
#include <fstream>
#include <sstream>

#include "cbai/error.hpp"
#include "cbai/harness.hpp"
#include "cbai/rng.hpp"
#include "cbai/text.hpp"

namespace cbai {

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::size_t timeline_frames(const Simulator& sim) { return sim.timeline.frames.size(); }

}  // namespace

EegSegment Simulator::trial(std::size_t attended, std::uint64_t master, std::string_view label) const {
    return synthesize(timeline, attended, kernel, NoiseModel{noise_kind, noise_sigma, derive_seed(master, label)},
                      options);
}

KnowledgeBase make_knowledge_base(const EngineConfig& cfg) {
    return cfg.knowledge_base_path.empty() ? default_knowledge_base() : load_knowledge_base(cfg.knowledge_base_path);
}

std::unique_ptr<LanguageModelProvider> make_provider(const EngineConfig& cfg) {
    if (cfg.provider == ProviderMode::Remote) return std::make_unique<HttpCompletionProvider>(cfg.remote);
    return std::make_unique<MockProvider>();
}

DecisionOutcome decode_trial(const Simulator& sim, const FramePredictor* model, const DecoderConfig& dcfg,
                             std::size_t attended, std::uint64_t master, std::string_view label,
                             const TrialLogSink& sink) {
    const EegSegment seg = sim.trial(attended, master, label);
    TrialLogSink tagged;
    if (sink) {
        tagged = [&](const TrialLogRecord& r) {
            TrialLogRecord copy = r;
            copy.target = attended;
            sink(copy);
        };
    }
    if (model) return run_offline(seg, sim.timeline, *model, sim.codebook, dcfg, tagged);
    const GroundTruthPredictor oracle(sim.codebook, attended);
    return run_offline(seg, sim.timeline, oracle, sim.codebook, dcfg, tagged);
}

TrainingSessionResult run_training_session(const EngineConfig& cfg) {
    cfg.validate();
    const Simulator sim = make_simulator(cfg);
    const std::size_t n_stim = sim.codebook.num_stimuli();
    TrainingSet train_set;
    for (std::size_t t = 0; t < cfg.training_trials; ++t) {
        const std::size_t target = t % n_stim;
        const EegSegment seg = sim.trial(target, cfg.seed, "train/trial/" + std::to_string(t));
        append_trial(train_set, seg, sim.timeline, sim.codebook, target, t, timeline_frames(sim));
    }
    ModelDescriptor desc = cfg.model;
    desc.seed = derive_seed(cfg.seed, "classifier/init");

    TrainingSessionResult out;
    out.training_frames = train_set.size();
    out.model = train(train_set, desc, &out.report);

    if (cfg.heldout_trials > 0) {
        TrainingSet heldout;
        for (std::size_t t = 0; t < cfg.heldout_trials; ++t) {
            // offset so the held-out targets differ from the first training ones
            const std::size_t target = (t * 3 + 1) % n_stim;
            const EegSegment seg = sim.trial(target, cfg.seed, "heldout/trial/" + std::to_string(t));
            append_trial(heldout, seg, sim.timeline, sim.codebook, target, t, timeline_frames(sim));
        }
        out.heldout_frame_accuracy = frame_accuracy(out.model, heldout);
    }
    out.digest = hex64(fnv1a64(serialize_model(out.model)));
    return out;
}

std::string format_training_report(const TrainingSessionResult& r) {
    std::string out;
    out += "model " + to_string(r.model.kind()) + "\n";
    out += "training_frames " + std::to_string(r.training_frames) + "\n";
    out += "epochs " + std::to_string(r.report.epochs_run) + "\n";
    out += "initial_loss " + fixed4(r.report.initial_loss) + "\n";
    out += "final_loss " + fixed4(r.report.final_loss) + "\n";
    out += "train_accuracy " + fixed4(r.report.train_accuracy) + "\n";
    out += "validation_accuracy " + fixed4(r.report.validation_accuracy) + "\n";
    out += "heldout_frame_accuracy " + fixed4(r.heldout_frame_accuracy) + "\n";
    out += "digest " + r.digest + "\n";
    return out;
}

// ---- scenarios -------------------------------------------------------------

void ScenarioScript::validate() const {
    if (steps.empty() || text::trim(steps.front().question).empty()) {
        throw Error(ErrorCode::InvalidArgument, "scenario needs a nonempty opening line");
    }
    for (const auto& s : steps) {
        if (text::trim(s.question).empty() || text::trim(s.target).empty()) {
            throw Error(ErrorCode::InvalidArgument, "scenario steps need a question and a target");
        }
        if (s.question.find('\n') != std::string::npos) {
            throw Error(ErrorCode::InvalidArgument, "scenario questions must be single lines");
        }
    }
}

ScenarioScript pizzeria_script() {
    ScenarioScript s;
    s.tag = "PIZZERIA";
    s.goal = "Reserve a table for 5 people on Monday at 1pm under the name Anna.";
    s.steps = {
        {"Hello, this is Pizzeria Napoli. How can I help you?", "Reservation"},
        {"Sure. Which day would you like to come?", "Monday"},
        {"And at what time?", "1pm"},
        {"How many people will be coming?", "5"},
        {"Under which name should I put the reservation?", "Anna"},
        {"So that is a table for 5 on Monday at 1pm. Is that correct?", "Yes"},
        {"Great, is there anything else I can do for you?", std::string(kFinishedTarget)},
    };
    return s;
}

ScenarioScript parse_script(std::string_view json_text) {
    ScenarioScript s;
    try {
        const auto j = nlohmann::json::parse(json_text);
        s.tag = j.value("tag", std::string("SESSION"));
        s.goal = j.at("goal").get<std::string>();
        for (const auto& step : j.at("steps")) {
            s.steps.push_back({step.at("question").get<std::string>(), step.at("target").get<std::string>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("scenario script: ") + e.what());
    }
    try {
        s.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    return s;
}

ScenarioScript load_script(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open scenario " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_script(buf.str());
}

std::size_t intended_stimulus(const DialogueEngine& engine, std::string_view target) {
    if (text::iequals(target, kFinishedTarget)) return Selection::finished().stimulus();
    const auto& st = engine.state();
    const auto& here = st.keyword_pages[st.current_page];
    const auto& there = st.keyword_pages[1 - st.current_page];
    auto find = [&](const auto& page, auto match) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < page.size(); ++i) {
            if (!page[i].empty() && match(page[i])) return i;
        }
        return std::nullopt;
    };
    auto exact = [&](const std::string& o) { return text::iequals(o, target); };
    auto contains = [&](const std::string& o) { return text::icontains(o, target) || text::icontains(target, o); };
    if (const auto i = find(here, exact)) return Selection::keyword(*i).stimulus();
    if (find(there, exact)) return Selection::more().stimulus();
    if (const auto i = find(here, contains)) return Selection::keyword(*i).stimulus();
    if (find(there, contains)) return Selection::more().stimulus();
    return Selection::none().stimulus();
}

ScenarioResult run_scenario(const EngineConfig& cfg, const ScenarioScript& script, const FramePredictor* model,
                            LanguageModelProvider& provider) {
    cfg.validate();
    script.validate();
    const Simulator sim = make_simulator(cfg);
    DialogueEngine engine(provider, make_knowledge_base(cfg), cfg.dialogue);
    engine.set_scenario(script.tag, script.goal);

    ScenarioResult out;
    const TrialLogSink sink = [&out](const TrialLogRecord& r) { out.trial_log.push_back(format_trial_log_record(r)); };
    std::size_t step = 0;
    bool ended = false;
    while (!ended && step < script.steps.size()) {
        const ScriptStep& s = script.steps[step];
        engine.ingest_question(s.question);
        bool answered = false;
        while (!answered && !ended) {
            // wasted trials are not counted by the engine, so cap the total here
            if (out.trials.size() >= cfg.dialogue.budget) {
                ended = true;
                break;
            }
            ScenarioTrial trial;
            trial.step = step;
            trial.intended = intended_stimulus(engine, s.target);
            const std::string label = "scenario/" + script.tag + "/trial/" + std::to_string(out.trials.size());
            trial.outcome = decode_trial(sim, model, cfg.decoder, trial.intended, cfg.seed, label, sink);
            Action action;
            try {
                action = engine.apply_selection(Selection::from_stimulus(trial.outcome.stimulus));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::InvalidIndex) throw;
                trial.wasted = true;
                out.trials.push_back(trial);
                continue;
            }
            out.trials.push_back(trial);
            const bool correct = trial.outcome.stimulus == trial.intended;
            switch (action.kind) {
                case ActionKind::RepageOnly:
                    break;
                case ActionKind::Answer:
                    answered = true;
                    // the partner asks again after a wrong answer
                    if (correct) {
                        ++step;
                        ++out.steps_completed;
                    }
                    break;
                case ActionKind::EndScenario:
                    out.finished = trial.outcome.stimulus == Selection::finished().stimulus();
                    if (out.finished && correct) ++out.steps_completed;
                    ended = true;
                    break;
            }
            if (action.ended) ended = true;
        }
    }
    out.transcript = engine.transcript();
    std::size_t hits = 0;
    for (const auto& t : out.trials) hits += t.outcome.stimulus == t.intended;
    out.selection_accuracy = out.trials.empty() ? 0.0 : static_cast<double>(hits) / out.trials.size();
    return out;
}

// ---- accuracy evaluation ---------------------------------------------------

const std::vector<AccuracyQuestion>& default_accuracy_questions() {
    // Intended options cover every stimulus twice.
    static const std::vector<AccuracyQuestion> questions = {
        {"Do you like coffee?", 0},
        {"What is your favorite season?", 3},
        {"How are you today?", 7},
        {"Do you have any siblings?", 1},
        {"What did you eat for breakfast?", 9},
        {"Which color do you like best?", 4},
        {"How many children do you have?", 2},
        {"Where did you grow up?", 6},
        {"Do you enjoy reading?", 8},
        {"What time do you usually wake up?", 5},
        {"Is it raining outside?", 5},
        {"What is your favorite animal?", 8},
        {"How old are you?", 0},
        {"Do you play an instrument?", 6},
        {"Which day is your birthday?", 2},
        {"What did you do yesterday?", 9},
        {"Would you like some tea?", 1},
        {"How was your weekend?", 4},
        {"Where would you like to travel?", 7},
        {"Are you tired?", 3},
    };
    return questions;
}

AccuracyReport run_accuracy_evaluation(const EngineConfig& cfg, const FramePredictor* model, std::size_t n) {
    if (n == 0) throw Error(ErrorCode::EmptyInput, "accuracy evaluation needs at least one question");
    cfg.validate();
    const Simulator sim = make_simulator(cfg);
    const auto& pool = default_accuracy_questions();
    AccuracyReport out;
    out.chance_level = 1.0 / static_cast<double>(sim.codebook.num_stimuli());
    double total_ms = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        AccuracyQuestion q = pool[i % pool.size()];
        q.intended %= sim.codebook.num_stimuli();
        const DecisionOutcome o =
            decode_trial(sim, model, cfg.decoder, q.intended, cfg.seed, "accuracy/trial/" + std::to_string(i));
        out.questions.push_back(q);
        out.trials.push_back({q.intended, o});
        total_ms += o.wall_time_ms();
    }
    out.accuracy = selection_accuracy(out.trials);
    out.mean_selection_time_ms = total_ms / static_cast<double>(n);
    return out;
}

std::string format_accuracy_report(const AccuracyReport& r) {
    std::string out;
    for (std::size_t i = 0; i < r.trials.size(); ++i) {
        const auto& t = r.trials[i];
        out += "trial " + std::to_string(i) + " intended " + std::to_string(t.true_stimulus) + " decoded " +
               std::to_string(t.outcome.stimulus) + " frames " + std::to_string(t.outcome.frames_to_decision) +
               (t.outcome.kind == DecisionKind::Timeout ? " timeout" : "") + "\n";
    }
    out += "accuracy " + fixed4(r.accuracy) + "\n";
    out += "chance_level " + fixed4(r.chance_level) + "\n";
    out += "mean_selection_time_ms " + fixed4(r.mean_selection_time_ms) + "\n";
    return out;
}

}  // namespace cbai
