#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cbai {

inline constexpr std::string_view kTranscriptSeparator = "----------";
inline constexpr std::string_view kEmptySlot = "-";

// One displayed page: six keyword slots then the four special options.
struct OptionLine {
    std::array<std::string, 10> options;
    std::size_t chosen = 0;

    friend bool operator==(const OptionLine&, const OptionLine&) = default;
};

struct TranscriptTurn {
    std::string question;
    std::vector<OptionLine> option_lines;  // one per selection, More/Previous adds a line
    std::optional<std::string> answer;     // absent if the budget ran out mid-question

    friend bool operator==(const TranscriptTurn&, const TranscriptTurn&) = default;
};

// Block layout:
//   (TAG) goal
//   Q: question
//   KW: a, [b], c, d, e, f, Correction, More, None, Finished
//   A: answer
//   ----------
struct Transcript {
    std::string tag = "SESSION";
    std::string goal;
    std::vector<TranscriptTurn> turns;

    friend bool operator==(const Transcript&, const Transcript&) = default;
};

std::string format_transcript(const Transcript& t);
// Throws ParseError on any grammar violation.
Transcript parse_transcript(std::string_view text);
std::vector<Transcript> parse_transcripts(std::string_view text);

}  // namespace cbai
