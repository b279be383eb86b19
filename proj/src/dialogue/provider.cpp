#include "cbai/provider.hpp"

#include "cbai/dialogue.hpp"
#include "cbai/error.hpp"
#include "cbai/text.hpp"

namespace cbai {

namespace {

std::string echo_sentence(const std::vector<std::string>& keywords) {
    std::string s = text::join(keywords, ", ");
    if (!s.empty() && s.back() != '.' && s.back() != '!' && s.back() != '?') s += '.';
    return s;
}

}  // namespace

std::string MockProvider::complete(const CompletionRequest& request) {
    const std::string_view prompt = request.prompt;
    if (prompt.starts_with("Generate N keywords")) {
        const std::size_t q = prompt.rfind("\nQuestion: ");
        const std::size_t n = prompt.rfind("\nN: ");
        if (q == std::string_view::npos || n == std::string_view::npos || n < q) {
            throw Error(ErrorCode::InvalidArgument, "mock: malformed keyword prompt");
        }
        const std::string question(prompt.substr(q + 11, n - q - 11));
        const std::size_t count = std::stoul(std::string(text::trim(prompt.substr(n + 4))));
        const KeywordSet ks = mock_keywords(question, count);
        std::string out = "Answers: ";
        for (std::size_t i = 0; i < ks.keywords.size(); ++i) {
            if (i) out += "; ";
            out += std::to_string(i + 1) + ". " + ks.keywords[i];
        }
        return out + "\nCategory: " + ks.category;
    }
    if (prompt.ends_with(kPromptTerminator)) {
        return echo_sentence(parse_sentence_prompt(prompt).keywords) + std::string(kStopToken);
    }
    throw Error(ErrorCode::InvalidArgument, "mock: unrecognised prompt");
}

std::string UnavailableProvider::complete(const CompletionRequest&) {
    throw Error(ErrorCode::ProviderUnavailable, "no language model configured");
}

}  // namespace cbai
