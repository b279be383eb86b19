#include "cbai/transcript.hpp"

#include "cbai/error.hpp"
#include "cbai/text.hpp"

namespace cbai {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& why) {
    throw Error(ErrorCode::ParseError, "transcript line " + std::to_string(line_no) + ": " + why);
}

std::string format_options(const OptionLine& line) {
    std::string out = "KW: ";
    for (std::size_t i = 0; i < line.options.size(); ++i) {
        if (i) out += ", ";
        const std::string& o = line.options[i].empty() ? std::string(kEmptySlot) : line.options[i];
        out += i == line.chosen ? "[" + o + "]" : o;
    }
    return out;
}

OptionLine parse_options(std::string_view body, std::size_t line_no) {
    const auto parts = text::split(body, ", ");
    if (parts.size() != 10) fail(line_no, "expected 10 options, got " + std::to_string(parts.size()));
    OptionLine line;
    std::optional<std::size_t> chosen;
    for (std::size_t i = 0; i < 10; ++i) {
        std::string o = parts[i];
        if (o.size() >= 2 && o.front() == '[' && o.back() == ']') {
            if (chosen) fail(line_no, "more than one chosen option");
            chosen = i;
            o = o.substr(1, o.size() - 2);
        }
        if (o.empty()) fail(line_no, "empty option");
        line.options[i] = o == kEmptySlot ? std::string() : o;
    }
    if (!chosen) fail(line_no, "no chosen option");
    line.chosen = *chosen;
    return line;
}

}  // namespace

std::string format_transcript(const Transcript& t) {
    std::string out = "(" + t.tag + ") " + t.goal + "\n";
    for (const TranscriptTurn& turn : t.turns) {
        out += "Q: " + turn.question + "\n";
        for (const OptionLine& line : turn.option_lines) out += format_options(line) + "\n";
        if (turn.answer) out += "A: " + *turn.answer + "\n";
    }
    out += std::string(kTranscriptSeparator) + "\n";
    return out;
}

std::vector<Transcript> parse_transcripts(std::string_view input) {
    std::vector<Transcript> out;
    std::optional<Transcript> cur;
    const auto lines = text::split(input, "\n");
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string_view line = lines[i];
        const std::size_t no = i + 1;
        if (!cur) {
            if (text::trim(line).empty()) continue;
            const std::size_t close = line.find(") ");
            if (line.empty() || line.front() != '(' || close == std::string_view::npos || close < 2) {
                fail(no, "expected '(TAG) goal' header");
            }
            cur = Transcript{std::string(line.substr(1, close - 1)), std::string(line.substr(close + 2)), {}};
            continue;
        }
        if (line == kTranscriptSeparator) {
            out.push_back(std::move(*cur));
            cur.reset();
            continue;
        }
        if (line.starts_with("Q: ")) {
            if (!cur->turns.empty() && cur->turns.back().option_lines.empty()) fail(no, "question without options");
            cur->turns.push_back(TranscriptTurn{std::string(line.substr(3)), {}, std::nullopt});
        } else if (line.starts_with("KW: ")) {
            if (cur->turns.empty() || cur->turns.back().answer) fail(no, "options outside a question");
            cur->turns.back().option_lines.push_back(parse_options(line.substr(4), no));
        } else if (line.starts_with("A: ")) {
            if (cur->turns.empty() || cur->turns.back().option_lines.empty() || cur->turns.back().answer) {
                fail(no, "answer without a preceding option line");
            }
            cur->turns.back().answer = std::string(line.substr(3));
        } else {
            fail(no, "unrecognised line");
        }
    }
    if (cur) throw Error(ErrorCode::ParseError, "transcript missing closing separator");
    return out;
}

Transcript parse_transcript(std::string_view text) {
    auto all = parse_transcripts(text);
    if (all.size() != 1) throw Error(ErrorCode::ParseError, "expected exactly one transcript block");
    return std::move(all.front());
}

}  // namespace cbai
