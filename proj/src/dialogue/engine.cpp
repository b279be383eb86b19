#include "cbai/dialogue.hpp"
#include "cbai/error.hpp"
#include "cbai/text.hpp"

namespace cbai {

Selection Selection::from_stimulus(std::size_t stimulus) {
    if (stimulus < kKeywordsPerPage) return keyword(stimulus);
    switch (stimulus) {
        case 6: return correction();
        case 7: return more();
        case 8: return none();
        case 9: return finished();
        default: throw Error(ErrorCode::InvalidIndex, "stimulus " + std::to_string(stimulus) + " has no option");
    }
}

std::size_t Selection::stimulus() const {
    switch (kind) {
        case SelectionKind::Keyword: return index;
        case SelectionKind::Correction: return 6;
        case SelectionKind::MoreOrPrevious: return 7;
        case SelectionKind::None: return 8;
        case SelectionKind::Finished: return 9;
    }
    return 8;
}

DialogueEngine::DialogueEngine(LanguageModelProvider& provider, KnowledgeBase kb, DialogueConfig cfg)
    : provider_(provider), kb_(std::move(kb)), cfg_(cfg) {
    if (cfg_.budget == 0) throw Error(ErrorCode::InvalidArgument, "selection budget must be positive");
    state_.budget = cfg_.budget;
}

void DialogueEngine::set_scenario(std::string tag, std::string goal) {
    transcript_.tag = std::move(tag);
    transcript_.goal = std::move(goal);
}

void DialogueEngine::ingest_question(std::string_view raw) {
    if (state_.status == ConversationStatus::Ended) throw Error(ErrorCode::Ended, "conversation has ended");
    if (state_.status != ConversationStatus::AwaitingQuestion) {
        throw Error(ErrorCode::InvalidState, "a question is already awaiting a selection");
    }
    const std::string_view question = text::trim(raw);
    if (question.empty() || question.find('\n') != std::string_view::npos) {
        throw Error(ErrorCode::EmptyQuestion, "question is empty or spans several lines");
    }

    const KeywordSet ks = generate_keywords(question, provider_, kKeywordCount, cfg_.keyword_temperature);
    const std::vector<std::string>* kb = kb_.find(ks.category);
    const std::vector<std::string>& source = kb ? *kb : ks.keywords;
    for (std::size_t i = 0; i < kKeywordCount; ++i) {
        state_.keyword_pages[i / kKeywordsPerPage][i % kKeywordsPerPage] = i < source.size() ? source[i] : "";
    }
    state_.current_question = std::string(question);
    state_.category = ks.category;
    state_.from_knowledge_base = kb != nullptr;
    state_.current_page = 0;
    state_.status = ConversationStatus::AwaitingSelection;
    transcript_.turns.push_back(TranscriptTurn{state_.current_question, {}, std::nullopt});
}

std::array<std::string, 10> DialogueEngine::option_labels() const {
    std::array<std::string, 10> out;
    const auto& page = state_.keyword_pages[state_.current_page];
    for (std::size_t i = 0; i < kKeywordsPerPage; ++i) out[i] = page[i];
    out[6] = "Correction";
    out[7] = state_.current_page == 0 ? "More" : "Previous";
    out[8] = "None";
    out[9] = "Finished";
    return out;
}

Action DialogueEngine::apply_selection(const Selection& sel) {
    if (state_.status == ConversationStatus::Ended) throw Error(ErrorCode::Ended, "conversation has ended");
    if (state_.status != ConversationStatus::AwaitingSelection) {
        throw Error(ErrorCode::InvalidState, "no question is awaiting a selection");
    }
    const auto& page = state_.keyword_pages[state_.current_page];
    if (sel.kind == SelectionKind::Keyword && (sel.index >= kKeywordsPerPage || page[sel.index].empty())) {
        throw Error(ErrorCode::InvalidIndex, "keyword slot " + std::to_string(sel.index) + " is empty");
    }

    TranscriptTurn& turn = transcript_.turns.back();
    turn.option_lines.push_back(OptionLine{option_labels(), sel.stimulus()});

    Action action;
    auto answer = [&](std::string text) {
        action.kind = ActionKind::Answer;
        action.text = text;
        state_.history.emplace_back(state_.current_question, text);
        turn.answer = std::move(text);
        state_.status = ConversationStatus::AwaitingQuestion;
    };

    switch (sel.kind) {
        case SelectionKind::Keyword: {
            const std::vector<std::string> kw = {page[sel.index]};
            const std::string prompt = format_sentence_prompt(state_.history, state_.current_question, kw);
            answer(generate_sentence(prompt, kw, provider_, cfg_.sentence_temperature));
            break;
        }
        case SelectionKind::Correction:
            answer(std::string(kCorrectionReply));
            break;
        case SelectionKind::None:
            answer(std::string(kNoneReply));
            break;
        case SelectionKind::MoreOrPrevious:
            action.kind = ActionKind::RepageOnly;
            state_.current_page = 1 - state_.current_page;
            break;
        case SelectionKind::Finished:
            action.kind = ActionKind::EndScenario;
            action.text = std::string(kFinishedReply);
            turn.answer = action.text;
            state_.status = ConversationStatus::Ended;
            break;
    }

    ++state_.selections_used;
    if (state_.selections_used >= state_.budget && state_.status != ConversationStatus::Ended) {
        state_.status = ConversationStatus::Ended;
        if (action.kind == ActionKind::RepageOnly) action.kind = ActionKind::EndScenario;
    }
    action.ended = state_.status == ConversationStatus::Ended;
    return action;
}

}  // namespace cbai
