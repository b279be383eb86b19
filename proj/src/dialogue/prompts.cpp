#include "cbai/dialogue.hpp"
#include "cbai/error.hpp"
#include "cbai/text.hpp"

namespace cbai {

std::string format_sentence_prompt(const std::vector<QaPair>& history, std::string_view question,
                                   const std::vector<std::string>& keywords) {
    if (text::trim(question).empty()) throw Error(ErrorCode::EmptyQuestion, "question is empty");
    if (keywords.empty()) throw Error(ErrorCode::InvalidArgument, "at least one keyword is required");
    std::string out;
    for (const auto& [q, a] : history) {
        out += "Question: " + q + "\n";
        out += "Answer: " + a + "\n";
    }
    out += "Question: ";
    out += question;
    out += "\nKeyword: " + text::join(keywords, ", ") + "\nAnswer:";
    out += kPromptTerminator;
    return out;
}

SentencePrompt parse_sentence_prompt(std::string_view prompt) {
    auto fail = [](const std::string& why) -> SentencePrompt {
        throw Error(ErrorCode::ParseError, "sentence prompt: " + why);
    };
    if (!prompt.ends_with(kPromptTerminator)) return fail("missing terminator");
    prompt.remove_suffix(kPromptTerminator.size());
    const auto lines = text::split(prompt, "\n");
    if (lines.size() < 3 || lines.size() % 2 == 0) return fail("unexpected line count");
    SentencePrompt out;
    const std::size_t pairs = (lines.size() - 3) / 2;
    for (std::size_t i = 0; i < pairs; ++i) {
        const std::string& q = lines[2 * i];
        const std::string& a = lines[2 * i + 1];
        if (!q.starts_with("Question: ") || !a.starts_with("Answer: ")) return fail("bad history pair");
        out.history.emplace_back(q.substr(10), a.substr(8));
    }
    const std::string& q = lines[lines.size() - 3];
    const std::string& k = lines[lines.size() - 2];
    if (!q.starts_with("Question: ") || !k.starts_with("Keyword: ") || lines.back() != "Answer:") {
        return fail("bad final block");
    }
    out.question = q.substr(10);
    out.keywords = text::split(std::string_view(k).substr(9), ", ");
    return out;
}

std::string clean_completion(std::string_view completion) {
    const std::size_t stop = completion.find(kStopToken);
    if (stop != std::string_view::npos) completion = completion.substr(0, stop);
    const std::string_view out = text::trim(completion);
    if (out.empty()) throw Error(ErrorCode::EmptyCompletion, "provider returned no answer text");
    return std::string(out);
}

std::string generate_sentence(std::string_view prompt, const std::vector<std::string>& keywords,
                              LanguageModelProvider& provider, double temperature) {
    CompletionRequest req;
    req.prompt = std::string(prompt);
    req.temperature = temperature;
    req.stop = {std::string(kStopToken)};
    try {
        return clean_completion(provider.complete(req));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ProviderUnavailable) throw;
        if (keywords.empty()) throw Error(ErrorCode::EmptyCompletion, "no keyword to fall back on");
        return text::join(keywords, ", ") + ".";
    }
}

}  // namespace cbai
