#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "cbai/datasetgen.hpp"
#include "cbai/error.hpp"
#include "cbai/evalstats.hpp"
#include "cbai/harness.hpp"

using namespace cbai;

namespace {

struct Common {
    std::string config_path;
    std::string snr;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "Engine configuration (JSON)");
    cmd->add_option("--snr", c.snr, "Noise preset: noiseless, high, medium, low");
    cmd->add_option("--seed", c.seed, "Master seed");
}

EngineConfig resolve(const Common& c) {
    EngineConfig cfg = c.config_path.empty() ? EngineConfig{} : load_config(c.config_path);
    if (!c.snr.empty()) apply_snr_level(cfg, parse_snr_level(c.snr));
    if (c.seed) cfg.seed = *c.seed;
    cfg.validate();
    return cfg;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

std::optional<ClassifierModel> maybe_model(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return load_model(path);
}

void print_decision(const DecisionOutcome& o) {
    std::printf("decision %s stimulus %zu frames %zu selection_time_ms %.0f wall_time_ms %.0f\n",
                o.kind == DecisionKind::Timeout ? "timeout" : "selected", o.stimulus, o.frames_to_decision,
                o.selection_time_ms(), o.wall_time_ms());
}

std::string format_histogram(const Histogram& h) {
    std::string out = "edge_lo,edge_hi,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        out += std::to_string(h.edges[i]) + "," + std::to_string(h.edges[i + 1]) + "," + std::to_string(h.counts[i]) + "\n";
    }
    return out;
}

// ---- commands --------------------------------------------------------------

void cmd_codes(const Common& c, const std::string& export_path) {
    const Simulator sim = make_simulator(resolve(c));
    const auto& book = sim.codebook;
    std::size_t ones = 0;
    for (auto b : book.base.bits) ones += b;
    std::printf("length %zu ones %zu\n", book.code_length(), ones);
    std::printf("autocorrelation");
    for (std::size_t lag = 0; lag < book.code_length(); ++lag) {
        std::printf(" %d", periodic_autocorrelation(book.base.bits, lag));
    }
    std::printf("\n");
    for (std::size_t s = 0; s < book.num_stimuli(); ++s) {
        std::printf("stimulus %zu shift %2zu ", s, book.shifts[s]);
        for (auto b : book.row(s)) std::printf("%d", b);
        std::printf("\n");
    }
    std::size_t min_agree = book.code_length(), max_agree = 0;
    for (std::size_t a = 0; a < book.num_stimuli(); ++a) {
        for (std::size_t b = a + 1; b < book.num_stimuli(); ++b) {
            std::size_t agree = 0;
            for (std::size_t f = 0; f < book.code_length(); ++f) agree += book.bit(a, f) == book.bit(b, f);
            min_agree = std::min(min_agree, agree);
            max_agree = std::max(max_agree, agree);
        }
    }
    std::printf("pairwise_agreement %zu..%zu of %zu\n", min_agree, max_agree, book.code_length());
    std::printf("timeline_frames %zu span_ms %.0f\n", sim.timeline.frames.size(), sim.timeline.span_ms());
    if (!export_path.empty()) write_text(export_path, export_codebook(book));
}

void cmd_simulate_segment(const Common& c, std::size_t stimulus, const std::string& out_path) {
    const EngineConfig cfg = resolve(c);
    const Simulator sim = make_simulator(cfg);
    if (stimulus >= sim.codebook.num_stimuli()) throw Error(ErrorCode::BadStimulusId, "stimulus out of range");
    const EegSegment seg = sim.trial(stimulus, cfg.seed, "simulate/segment");
    Simulator clean_sim = sim;
    clean_sim.noise_sigma = 0.0;
    const EegSegment clean = clean_sim.trial(stimulus, cfg.seed, "simulate/segment");
    std::printf("channels %zu samples %zu snr_db %.2f\n", seg.channels(), seg.samples(), snr_estimate(seg, clean));
    save_segment(out_path, seg);
}

void cmd_simulate_scenario(const Common& c, const std::string& script_path, const std::string& model_path,
                           const std::string& transcript_out, const std::string& log_out) {
    const EngineConfig cfg = resolve(c);
    const ScenarioScript script = script_path.empty() ? pizzeria_script() : load_script(script_path);
    const auto model = maybe_model(model_path);
    const auto provider = make_provider(cfg);
    const ScenarioResult r = run_scenario(cfg, script, model ? &*model : nullptr, *provider);
    const std::string transcript = format_transcript(r.transcript);
    std::cout << transcript;
    std::printf("trials %zu steps_completed %zu/%zu finished %s selection_accuracy %.4f\n", r.trials.size(),
                r.steps_completed, script.steps.size(), r.finished ? "yes" : "no", r.selection_accuracy);
    if (!transcript_out.empty()) write_text(transcript_out, transcript);
    if (!log_out.empty()) {
        std::string log;
        for (const auto& line : r.trial_log) log += line + "\n";
        write_text(log_out, log);
    }
}

void cmd_simulate_accuracy(const Common& c, const std::string& model_path, std::size_t n) {
    const EngineConfig cfg = resolve(c);
    const auto model = maybe_model(model_path);
    std::cout << format_accuracy_report(run_accuracy_evaluation(cfg, model ? &*model : nullptr, n));
}

void cmd_train(const Common& c, const std::string& kind, const std::string& out_path) {
    EngineConfig cfg = resolve(c);
    if (!kind.empty()) cfg.model.kind = parse_model_kind(kind);
    const TrainingSessionResult r = run_training_session(cfg);
    std::cout << format_training_report(r);
    save_model(out_path, r.model);
}

void cmd_decode(const Common& c, const std::string& model_path, const std::string& segment_path,
                std::optional<std::size_t> stimulus, const std::string& log_out) {
    const EngineConfig cfg = resolve(c);
    const Simulator sim = make_simulator(cfg);
    const auto model = maybe_model(model_path);
    std::string log;
    const TrialLogSink sink = [&log](const TrialLogRecord& r) { log += format_trial_log_record(r) + "\n"; };
    DecisionOutcome o;
    if (!segment_path.empty()) {
        if (!model) throw Error(ErrorCode::InvalidArgument, "decoding a recorded segment needs --model");
        o = run_offline(load_segment(segment_path), sim.timeline, *model, sim.codebook, cfg.decoder, sink);
    } else {
        if (!stimulus) throw Error(ErrorCode::InvalidArgument, "give --segment or --stimulus");
        if (*stimulus >= sim.codebook.num_stimuli()) throw Error(ErrorCode::BadStimulusId, "stimulus out of range");
        o = decode_trial(sim, model ? &*model : nullptr, cfg.decoder, *stimulus, cfg.seed, "decode/trial", sink);
    }
    print_decision(o);
    if (!log_out.empty()) write_text(log_out, log);
}

void cmd_dataset(const std::string& corpus_path, std::size_t synthetic, const std::string& variant,
                 std::uint64_t seed, const std::string& overrides_path, const std::string& out_path) {
    if (variant != "xl" && variant != "cr") throw Error(ErrorCode::InvalidArgument, "variant must be xl or cr");
    const auto corpus = corpus_path.empty() ? synthetic_corpus(synthetic, seed) : load_corpus(corpus_path);
    DatasetStats st;
    auto samples = build_dataset(corpus, variant == "xl" ? DatasetVariant::Xl : DatasetVariant::Cr, seed, &st);
    if (!overrides_path.empty()) apply_overrides(samples, corpus, parse_overrides(read_text(overrides_path)));
    std::array<std::size_t, 4> depth{};
    for (const auto& s : samples) ++depth[s.history_depth];
    std::printf("conversations %zu pairs %zu samples %zu skipped_long %zu rejected_no_keywords %zu\n", corpus.size(),
                st.pairs, samples.size(), st.skipped_long, st.rejected_no_keywords);
    for (std::size_t d = 0; d < depth.size(); ++d) {
        std::printf("history_depth_%zu %.4f\n", d,
                    samples.empty() ? 0.0 : static_cast<double>(depth[d]) / static_cast<double>(samples.size()));
    }
    write_dataset(samples, out_path);
}

void cmd_eval_ratings(const std::string& csv_path) {
    const auto records = load_ratings_csv(csv_path);
    const auto groups = summarize(records);
    std::cout << format_summary(groups);
    if (groups.size() < 2) return;
    std::vector<std::vector<double>> raw(groups.size()), adj(groups.size());
    for (const auto& r : records) {
        const auto g = static_cast<std::size_t>(
            std::find_if(groups.begin(), groups.end(), [&](const GroupSummary& s) { return s.model_tag == r.model_tag; }) -
            groups.begin());
        raw[g].push_back(r.rating);
        adj[g].push_back(adjusted_rating(r));
    }
    for (const auto& [name, data] : {std::pair{"raw", raw}, std::pair{"adjusted", adj}}) {
        try {
            const AnovaResult a = one_way_anova(data);
            std::printf("anova_%s F %.4f p %.4g df %.0f,%.0f\n", name, a.f, a.p, a.df_between, a.df_within);
        } catch (const Error& e) {
            std::printf("anova_%s unavailable: %s\n", name, e.what());
        }
    }
}

void cmd_eval_metrics(const std::vector<std::string>& transcripts, const std::string& log_path,
                      const std::string& hist_prefix) {
    std::vector<Transcript> parsed;
    for (const auto& path : transcripts) {
        for (auto& t : parse_transcripts(read_text(path))) parsed.push_back(std::move(t));
    }
    const SessionMetrics m = session_metrics(parsed, log_path.empty() ? std::string() : read_text(log_path));
    std::cout << format_metrics(m);
    if (!hist_prefix.empty()) {
        write_text(hist_prefix + "_selection_time.csv", format_histogram(make_histogram(m.selection_times_ms,
                                                                                        uniform_edges(0, 11050, 17))));
        std::vector<double> positions(m.keyword_positions.begin(), m.keyword_positions.end());
        write_text(hist_prefix + "_keyword_position.csv",
                   format_histogram(make_histogram(positions, uniform_edges(0.5, 12.5, 12))));
    }
}

void cmd_serve(const Common& c, const std::string& model_path, std::uint16_t port) {
    const EngineConfig cfg = resolve(c);
    const auto model = maybe_model(model_path);
    const FramePredictor* predictor = model ? &*model : nullptr;
    const LogSink log = [](const std::string& s) { std::fprintf(stderr, "[serve] %s\n", s.c_str()); };
    ServeServer server(
        [&](const LogSink& l) { return std::make_unique<ServeSession>(cfg, predictor, make_provider(cfg), l); }, log);
    const std::uint16_t bound = server.bind(port);
    std::printf("listening 127.0.0.1:%u\n", bound);
    std::fflush(stdout);
    server.run();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conversational brain-AI interface simulator"};
    app.require_subcommand(1);

    Common common;

    auto* codes = app.add_subcommand("codes", "Print the stimulus code set and its properties");
    add_common(codes, common);
    std::string export_path;
    codes->add_option("--export", export_path, "Write the codebook to a file");

    auto* simulate = app.add_subcommand("simulate", "Simulate EEG, whole scenarios or the accuracy task");
    simulate->require_subcommand(1);
    auto* sim_segment = simulate->add_subcommand("segment", "Synthesize one trial's EEG");
    add_common(sim_segment, common);
    std::size_t stimulus_id = 0;
    std::string out_path;
    sim_segment->add_option("--stimulus", stimulus_id, "Attended stimulus")->required();
    sim_segment->add_option("--out", out_path, "Segment file")->required();

    auto* sim_scenario = simulate->add_subcommand("scenario", "Run a closed-loop conversation scenario");
    add_common(sim_scenario, common);
    std::string script_path, model_path, transcript_out, log_out;
    sim_scenario->add_option("--script", script_path, "Scenario script (JSON); default: pizzeria");
    sim_scenario->add_option("--model", model_path, "Trained classifier; default: ground-truth decoding");
    sim_scenario->add_option("--transcript", transcript_out, "Write the transcript");
    sim_scenario->add_option("--log", log_out, "Write the decoder trial log");

    auto* sim_accuracy = simulate->add_subcommand("accuracy", "Run the question-answering accuracy task");
    add_common(sim_accuracy, common);
    std::size_t n_questions = 20;
    sim_accuracy->add_option("--model", model_path, "Trained classifier; default: ground-truth decoding");
    sim_accuracy->add_option("-n,--questions", n_questions, "Number of questions");

    auto* train_cmd = app.add_subcommand("train", "Run a training session and save the classifier");
    add_common(train_cmd, common);
    std::string kind;
    train_cmd->add_option("--kind", kind, "cnn or linear");
    train_cmd->add_option("--out", out_path, "Model file")->required();

    auto* decode = app.add_subcommand("decode", "Decode one trial");
    add_common(decode, common);
    std::string segment_path;
    std::optional<std::size_t> decode_stimulus;
    decode->add_option("--model", model_path, "Trained classifier");
    decode->add_option("--segment", segment_path, "Recorded segment to decode");
    decode->add_option("--stimulus", decode_stimulus, "Simulate and decode this attended stimulus");
    decode->add_option("--log", log_out, "Write the decoder trial log");

    auto* dataset = app.add_subcommand("dataset", "Build a fine-tuning data set");
    std::string corpus_path, variant = "xl", overrides_path;
    std::size_t synthetic = 1000;
    std::uint64_t dataset_seed = 1;
    dataset->add_option("--corpus", corpus_path, "Conversation corpus; default: synthetic");
    dataset->add_option("--synthetic", synthetic, "Pairs in the synthetic corpus");
    dataset->add_option("--variant", variant, "xl or cr");
    dataset->add_option("--seed", dataset_seed, "Seed");
    dataset->add_option("--overrides", overrides_path, "Reviewed sample overrides (JSONL)");
    dataset->add_option("--out", out_path, "Output JSONL")->required();

    auto* eval = app.add_subcommand("eval", "Rating statistics and session metrics");
    eval->require_subcommand(1);
    auto* ratings = eval->add_subcommand("ratings", "Summaries and one-way ANOVA of rated answers");
    std::string csv_path;
    ratings->add_option("--csv", csv_path, "model_tag,rating,mistake table")->required();
    auto* metrics = eval->add_subcommand("metrics", "Selection times and keyword positions");
    std::vector<std::string> transcripts;
    std::string hist_prefix;
    metrics->add_option("--transcript", transcripts, "Transcript files");
    metrics->add_option("--log", log_out, "Decoder trial log");
    metrics->add_option("--hist", hist_prefix, "Write histogram CSVs with this prefix");

    auto* serve = app.add_subcommand("serve", "Serve engine sessions over line-delimited JSON");
    add_common(serve, common);
    std::uint16_t port = 8765;
    serve->add_option("--model", model_path, "Trained classifier; default: ground-truth decoding");
    serve->add_option("--port", port, "TCP port on 127.0.0.1 (0 picks one)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (codes->parsed()) cmd_codes(common, export_path);
        if (sim_segment->parsed()) cmd_simulate_segment(common, stimulus_id, out_path);
        if (sim_scenario->parsed()) cmd_simulate_scenario(common, script_path, model_path, transcript_out, log_out);
        if (sim_accuracy->parsed()) cmd_simulate_accuracy(common, model_path, n_questions);
        if (train_cmd->parsed()) cmd_train(common, kind, out_path);
        if (decode->parsed()) cmd_decode(common, model_path, segment_path, decode_stimulus, log_out);
        if (dataset->parsed()) cmd_dataset(corpus_path, synthetic, variant, dataset_seed, overrides_path, out_path);
        if (ratings->parsed()) cmd_eval_ratings(csv_path);
        if (metrics->parsed()) cmd_eval_metrics(transcripts, log_out, hist_prefix);
        if (serve->parsed()) cmd_serve(common, model_path, port);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
