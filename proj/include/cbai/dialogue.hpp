#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cbai/provider.hpp"
#include "cbai/transcript.hpp"

namespace cbai {

inline constexpr std::size_t kKeywordsPerPage = 6;
inline constexpr std::size_t kKeywordPages = 2;
inline constexpr std::size_t kKeywordCount = kKeywordsPerPage * kKeywordPages;

inline constexpr std::string_view kCorrectionReply = "I am sorry, I misspoke earlier.";
inline constexpr std::string_view kNoneReply = "I am sorry, I cannot answer this question right now.";
inline constexpr std::string_view kFinishedReply = "Thank you, goodbye.";
inline constexpr std::string_view kRepeatRequest = "Sorry, could you please repeat the question?";
inline constexpr std::string_view kStopToken = "END";
inline constexpr std::string_view kPromptTerminator = "\n\n###\n\n";

using QaPair = std::pair<std::string, std::string>;

// ---- knowledge base --------------------------------------------------------

struct KnowledgeBase {
    std::map<std::string, std::vector<std::string>> entries;  // category -> options

    const std::vector<std::string>* find(std::string_view category) const;
};

// NAME and ADDRESS lists used by the bundled scenarios.
KnowledgeBase default_knowledge_base();
// JSON object mapping category -> array of strings. Throws IoError,
// ParseError, or InvalidArgument for empty lists.
KnowledgeBase load_knowledge_base(const std::string& path);
KnowledgeBase parse_knowledge_base(std::string_view json);
std::string format_knowledge_base(const KnowledgeBase& kb);

// ---- keyword generation ----------------------------------------------------

struct KeywordSet {
    std::vector<std::string> keywords;  // exactly n, nonempty, no commas
    std::string category;
};

std::string keyword_prompt(std::string_view question, std::size_t n);
// Parses "Answers: 1. X; 2. Y ..." and "Category: Z"; missing parts come back
// empty rather than throwing.
KeywordSet parse_keyword_completion(std::string_view completion);
// Rule-table answer used by the mock provider and for padding.
KeywordSet mock_keywords(std::string_view question, std::size_t n = kKeywordCount);

// Throws EmptyQuestion. Falls back to mock_keywords on ProviderUnavailable.
KeywordSet generate_keywords(std::string_view question, LanguageModelProvider& provider,
                             std::size_t n = kKeywordCount, double temperature = 0.5);

// ---- full-sentence prompt --------------------------------------------------

std::string format_sentence_prompt(const std::vector<QaPair>& history, std::string_view question,
                                   const std::vector<std::string>& keywords);

struct SentencePrompt {
    std::vector<QaPair> history;
    std::string question;
    std::vector<std::string> keywords;
};
// Inverse of format_sentence_prompt for newline-free fields. Throws ParseError.
SentencePrompt parse_sentence_prompt(std::string_view prompt);

// Truncates at the first stop token and trims. Throws EmptyCompletion.
std::string clean_completion(std::string_view completion);
// Falls back to "<keywords>." when the provider is unavailable.
std::string generate_sentence(std::string_view prompt, const std::vector<std::string>& keywords,
                              LanguageModelProvider& provider, double temperature = 0.0);

// ---- conversation state machine --------------------------------------------

enum class ConversationStatus { AwaitingQuestion, AwaitingSelection, Ended };

enum class SelectionKind { Keyword, Correction, MoreOrPrevious, None, Finished };

struct Selection {
    SelectionKind kind = SelectionKind::None;
    std::size_t index = 0;  // keyword slot on the current page

    static Selection keyword(std::size_t i) { return {SelectionKind::Keyword, i}; }
    static Selection correction() { return {SelectionKind::Correction, 0}; }
    static Selection more() { return {SelectionKind::MoreOrPrevious, 0}; }
    static Selection none() { return {SelectionKind::None, 0}; }
    static Selection finished() { return {SelectionKind::Finished, 0}; }

    // Stimuli 0-5 are keyword slots, then Correction, More/Previous, None,
    // Finished. Throws InvalidIndex.
    static Selection from_stimulus(std::size_t stimulus);
    std::size_t stimulus() const;

    friend bool operator==(const Selection&, const Selection&) = default;
};

enum class ActionKind { Answer, RepageOnly, EndScenario };

struct Action {
    ActionKind kind = ActionKind::Answer;
    std::string text;
    bool ended = false;  // scenario over (Finished or budget)
};

struct DialogueConfig {
    std::size_t budget = 30;
    double keyword_temperature = 0.5;
    double sentence_temperature = 0.0;
};

struct ConversationState {
    std::vector<QaPair> history;
    std::string current_question;
    // Two pages of six; an empty string is an unused slot (short knowledge
    // base lists).
    std::array<std::array<std::string, kKeywordsPerPage>, kKeywordPages> keyword_pages{};
    std::size_t current_page = 0;
    std::string category;
    bool from_knowledge_base = false;
    std::size_t selections_used = 0;
    std::size_t budget = 30;
    ConversationStatus status = ConversationStatus::AwaitingQuestion;
};

class DialogueEngine {
public:
    DialogueEngine(LanguageModelProvider& provider, KnowledgeBase kb, DialogueConfig cfg = {});

    // Throws EmptyQuestion, Ended, InvalidState.
    void ingest_question(std::string_view text);
    // Throws InvalidIndex, Ended, InvalidState.
    Action apply_selection(const Selection& sel);

    const ConversationState& state() const { return state_; }
    const KnowledgeBase& knowledge_base() const { return kb_; }
    // The ten on-screen labels for the current page.
    std::array<std::string, 10> option_labels() const;
    const Transcript& transcript() const { return transcript_; }
    void set_scenario(std::string tag, std::string goal);

private:
    LanguageModelProvider& provider_;
    KnowledgeBase kb_;
    DialogueConfig cfg_;
    ConversationState state_;
    Transcript transcript_;
};

}  // namespace cbai
