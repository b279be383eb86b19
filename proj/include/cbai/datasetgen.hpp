#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbai/dialogue.hpp"
#include "cbai/rng.hpp"

namespace cbai {

inline constexpr std::size_t kMaxAnswerChars = 110;

struct Conversation {
    std::string id;
    std::vector<QaPair> turns;
};

// ---- keyword extraction ----------------------------------------------------

enum class ExtractorKind { Rake, YakeSparse, YakeDense };

struct ExtractorConfig {
    ExtractorKind kind = ExtractorKind::Rake;
    int max_ngram = 3;             // yake: longest candidate phrase
    double dedup_threshold = 0.9;  // yake: drop candidates more similar than this; 0 disables
    std::size_t top = 20;

    static ExtractorConfig rake();
    static ExtractorConfig yake_sparse();  // n=1, dedup 0.9
    static ExtractorConfig yake_dense();   // n=5, dedup 0
    // Throws InvalidArgument.
    void validate() const;
};

std::string_view to_string(ExtractorKind kind);

// Bundled English stoplist (lowercase).
bool is_stopword(std::string_view lower_word);

std::vector<std::string> rake_keywords(std::string_view text, std::size_t top = 20);
std::vector<std::string> yake_keywords(std::string_view text, int max_ngram, double dedup_threshold,
                                       std::size_t top = 20);
std::vector<std::string> extract_keywords(std::string_view text, const ExtractorConfig& cfg);

// Normalised Levenshtein similarity in [0, 1].
double levenshtein_similarity(std::string_view a, std::string_view b);

// Extension point for further extractors (an embedding-based one, for
// instance). Implementations must be deterministic.
class KeywordExtractor {
public:
    virtual ~KeywordExtractor() = default;
    virtual std::vector<std::string> extract(std::string_view text) const = 0;
    virtual std::string tag() const = 0;
};

class ConfiguredExtractor : public KeywordExtractor {
public:
    explicit ConfiguredExtractor(ExtractorConfig cfg);
    std::vector<std::string> extract(std::string_view text) const override { return extract_keywords(text, cfg_); }
    std::string tag() const override;

private:
    ExtractorConfig cfg_;
};

// rake, yake_sparse, yake_dense in that order.
std::vector<std::shared_ptr<const KeywordExtractor>> default_extractors();

// ---- text rules ------------------------------------------------------------

// Table-driven; idempotent; keeps the leading letter's case.
std::string expand_contractions(std::string_view text);

inline constexpr std::array<std::string_view, 5> kNegationMarkers = {"not", "never", "no", "none", "cannot"};
bool contains_negation(std::string_view text);
// Prepends "not" when the answer negates and no keyword does.
std::vector<std::string> inject_negation(std::vector<std::string> keywords, std::string_view answer);

inline constexpr std::array<double, 4> kHistoryDepthProbabilities = {0.50, 0.35, 0.08, 0.07};
std::size_t sample_history_depth(Rng& rng);

// ---- dataset construction --------------------------------------------------

enum class DatasetVariant { Xl, Cr };

struct DatasetSample {
    std::string id;  // "<conversation id>:<pair index>"
    std::string prompt;
    std::string completion;
    std::size_t history_depth = 0;  // after truncation to the available pairs
    std::size_t drawn_depth = 0;
    std::string extractor;
    std::vector<std::string> keywords;
};

struct DatasetStats {
    std::size_t pairs = 0;
    std::size_t skipped_long = 0;
    std::size_t rejected_no_keywords = 0;
};

// Throws EmptyCorpus. Each conversation draws from its own generator seeded
// with derive_seed(seed, "datasetgen/" + conversation id).
std::vector<DatasetSample> build_dataset(const std::vector<Conversation>& corpus, DatasetVariant variant,
                                         std::uint64_t seed, DatasetStats* stats = nullptr,
                                         const std::vector<std::shared_ptr<const KeywordExtractor>>& extractors =
                                             default_extractors());

struct SampleOverride {
    std::string id;
    std::optional<std::vector<std::string>> keywords;
    std::optional<std::string> answer;
};

// Line-delimited JSON {"id":..., "keywords":[...], "answer":...}. Throws ParseError.
std::vector<SampleOverride> parse_overrides(std::string_view jsonl);
// Rebuilds the prompt/completion of every overridden sample. Throws
// InvalidArgument for unknown ids or answers over the length limit.
void apply_overrides(std::vector<DatasetSample>& samples, const std::vector<Conversation>& corpus,
                     const std::vector<SampleOverride>& overrides);

// Blank-line separated blocks of alternating question/answer lines; a
// trailing unpaired line is dropped. Throws EmptyCorpus.
std::vector<Conversation> parse_corpus(std::string_view text);
std::vector<Conversation> load_corpus(const std::string& path);

// Deterministic conversational corpus for tests and acceptance runs.
std::vector<Conversation> synthetic_corpus(std::size_t pairs, std::uint64_t seed);

struct PromptCompletion {
    std::string prompt;
    std::string completion;
    friend bool operator==(const PromptCompletion&, const PromptCompletion&) = default;
};

std::string format_dataset(const std::vector<DatasetSample>& samples);
std::vector<PromptCompletion> parse_dataset(std::string_view jsonl);
void write_dataset(const std::vector<DatasetSample>& samples, const std::string& path);
std::vector<PromptCompletion> read_dataset(const std::string& path);

}  // namespace cbai
