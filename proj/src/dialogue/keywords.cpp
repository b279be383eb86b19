#include <algorithm>
#include <array>

#include "cbai/dialogue.hpp"
#include "cbai/error.hpp"
#include "cbai/text.hpp"

namespace cbai {

namespace {

constexpr std::string_view kKeywordInstructions =
    "Generate N keywords that might help a speech-impaired person respond to a given question. The "
    "keywords should be as short as possible and only describe one possible answer each. Provide "
    "answers which are as different as possible and try to include every viewpoint in the answers. "
    "For example if one of the answers is yes, also include no, and when one of the answers is good, "
    "also include bad. When the question is asking for a day or time, be specific in your suggested "
    "answers. In addition to suggesting answers, also provide the category of what the question is "
    "asking for. For example, if the question is asking for the name of a person, the category "
    "should be NAME. If the question is asking for an address or street name, the category should "
    "be ADDRESS. Here are some examples:\n"
    "\n"
    "Example 1:\n"
    "Question: How was your day?\n"
    "N: 6\n"
    "Answers: 1. Good; 2. Fantastic; 3. Bad; 4. Horrible; 5. Splendid; 6. Boring\n"
    "Category: ADJECTIVE\n"
    "Example 2:\n"
    "Question: How many people are living in your household?\n"
    "N: 10\n"
    "Answers: 1. 1; 2. 2; 3. 3; 4. 4; 5. 5; 6. 6; 7. 7; 8. 8; 9. 9; 10. 10\n"
    "Category: NUMBER\n"
    "Example 3:\n"
    "Question: What is your mother's name?\n"
    "N: 4\n"
    "Answers: 1. Rose; 2. Mary; 3. Miriam; 4. Joanna\n"
    "Category: NAME\n"
    "Example 4:\n"
    "Question: Are you hungry?\n"
    "N: 3\n"
    "Answers: 1. Yes; 2. No; 3. Very\n"
    "Category: YESNO\n"
    "\n";

struct RuleTable {
    std::string_view category;
    std::array<std::string_view, kKeywordCount> options;
};

// Ordered: the first matching rule wins.
constexpr RuleTable kService{"SERVICE", {"Reservation", "Order", "Delivery", "Takeout", "Menu", "Prices",
                                         "Appointment", "Schedule", "Hours", "Directions", "Information",
                                         "Cancel"}};
constexpr RuleTable kName{"NAME", {"Rose", "Mary", "Miriam", "Joanna", "John", "Paul", "Sarah", "Michael",
                                   "Emma", "James", "Lisa", "Thomas"}};
constexpr RuleTable kAddress{"ADDRESS", {"Main Street", "Park Avenue", "Station Road", "Church Street",
                                         "High Street", "Mill Lane", "Oak Road", "Garden Way", "Lake View",
                                         "Hill Road", "River Lane", "Market Square"}};
constexpr RuleTable kNumber{"NUMBER", {"1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "11", "12"}};
constexpr RuleTable kTime{"TIME", {"8am", "9am", "10am", "11am", "12pm", "1pm", "2pm", "3pm", "4pm", "5pm",
                                   "6pm", "7pm"}};
constexpr RuleTable kDay{"DAY", {"Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday",
                                 "Sunday", "Today", "Tomorrow", "Next week", "Weekend", "Any day"}};
constexpr RuleTable kAdjective{"ADJECTIVE", {"Good", "Fantastic", "Bad", "Horrible", "Splendid", "Boring",
                                             "Great", "Fine", "Okay", "Tired", "Happy", "Sad"}};
constexpr RuleTable kYesNo{"YESNO", {"Yes", "No", "Maybe", "Sure", "Absolutely", "Definitely", "Not sure",
                                     "Later", "Never", "Always", "Sometimes", "Of course"}};
constexpr RuleTable kDefault{"OTHER", {"Yes", "No", "Maybe", "I don't know", "Good", "Bad", "Later", "Now",
                                       "Sometimes", "Never", "Always", "Thanks"}};

constexpr std::array<std::string_view, 16> kAuxiliaries = {
    "are", "is", "do", "does", "did", "can", "could", "would", "will", "have", "has", "should", "shall",
    "was", "were", "may"};
constexpr std::array<std::string_view, 8> kFillers = {"okay", "ok", "so", "and", "well", "yes", "alright", "right"};

constexpr std::array<std::pair<std::string_view, std::string_view>, 6> kOpposites = {{
    {"Yes", "No"}, {"Good", "Bad"}, {"Always", "Never"}, {"Early", "Late"}, {"Morning", "Afternoon"},
    {"Correct", "Incorrect"}}};

bool any_of(const std::string& q, std::initializer_list<std::string_view> needles) {
    return std::any_of(needles.begin(), needles.end(),
                       [&q](std::string_view n) { return q.find(n) != std::string::npos; });
}

bool is_yes_no(std::string_view question) {
    const auto ws = text::words(question);
    std::size_t i = 0;
    // skip conversational fillers ("Okay so, is that correct")
    while (i < ws.size() && std::find(kFillers.begin(), kFillers.end(), ws[i]) != kFillers.end()) ++i;
    if (i + 1 < ws.size() && ws[i] == "all" && ws[i + 1] == "right") i += 2;
    if (i < ws.size() && std::find(kAuxiliaries.begin(), kAuxiliaries.end(), ws[i]) != kAuxiliaries.end()) {
        return true;
    }
    const std::string q = text::to_lower(question);
    return any_of(q, {"is that", "anything else", "is it", "are you", "would you like", "do you"});
}

const RuleTable& match_rule(std::string_view question) {
    const std::string q = text::to_lower(question);
    if (any_of(q, {"how can i help", "how may i help", "what can i do for you"})) return kService;
    if (any_of(q, {"name"})) return kName;
    if (any_of(q, {"address", "street"})) return kAddress;
    if (any_of(q, {"how many", "how much", "number of", "how old"})) return kNumber;
    if (any_of(q, {"what time", "which time", "at what time", "what hour"})) return kTime;
    if (any_of(q, {"what day", "which day", "when would", "when do", "when can"})) return kDay;
    if (any_of(q, {"how was", "how are", "how is", "how do you feel", "how did", "how have"})) return kAdjective;
    if (is_yes_no(question)) return kYesNo;
    return kDefault;
}

std::string sanitize(std::string_view keyword) {
    std::string out;
    for (char c : text::trim(keyword)) {
        if (c == ',' || c == '\n' || c == '\r' || c == '[' || c == ']') continue;
        out += c;
    }
    return std::string(text::trim(out));
}

bool contains_ci(const std::vector<std::string>& list, std::string_view s) {
    return std::any_of(list.begin(), list.end(), [s](const std::string& x) { return text::iequals(x, s); });
}

void push_unique(std::vector<std::string>& list, std::string_view candidate) {
    const std::string s = sanitize(candidate);
    if (!s.empty() && s != kEmptySlot && !contains_ci(list, s)) list.push_back(s);
}

// Opposing viewpoints: when one pole of a pair is among the first n but its
// partner is not, the partner is placed right after it.
void add_opposites(std::vector<std::string>& list, std::size_t n) {
    auto find_ci = [&list](std::string_view s) {
        return std::find_if(list.begin(), list.end(), [s](const std::string& x) { return text::iequals(x, s); });
    };
    for (const auto& [a, b] : kOpposites) {
        for (const auto& [have, want] : {std::pair{a, b}, std::pair{b, a}}) {
            const auto h = find_ci(have);
            const auto w = find_ci(want);
            const auto pos = static_cast<std::size_t>(h - list.begin());
            if (h == list.end() || pos >= n || (w != list.end() && static_cast<std::size_t>(w - list.begin()) < n)) {
                continue;
            }
            if (w != list.end()) list.erase(w);
            list.insert(list.begin() + static_cast<std::ptrdiff_t>(pos + 1), std::string(want));
        }
    }
}

}  // namespace

std::string keyword_prompt(std::string_view question, std::size_t n) {
    std::string out(kKeywordInstructions);
    out += "Question: ";
    out += text::trim(question);
    out += "\nN: " + std::to_string(n) + "\n";
    return out;
}

KeywordSet parse_keyword_completion(std::string_view completion) {
    KeywordSet out;
    for (const std::string& raw : text::split(completion, "\n")) {
        const std::string_view line = text::trim(raw);
        if (line.starts_with("Answers:")) {
            for (const std::string& item : text::split(line.substr(8), ";")) {
                std::string_view v = text::trim(item);
                // strip "12." numbering
                std::size_t d = 0;
                while (d < v.size() && v[d] >= '0' && v[d] <= '9') ++d;
                if (d > 0 && d < v.size() && v[d] == '.') v = text::trim(v.substr(d + 1));
                push_unique(out.keywords, v);
            }
        } else if (line.starts_with("Category:")) {
            std::string cat(text::trim(line.substr(9)));
            std::transform(cat.begin(), cat.end(), cat.begin(),
                           [](char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); });
            out.category = cat;
        }
    }
    return out;
}

KeywordSet mock_keywords(std::string_view question, std::size_t n) {
    const RuleTable& rule = match_rule(question);
    KeywordSet out;
    out.category = std::string(rule.category);
    for (std::string_view o : rule.options) push_unique(out.keywords, o);
    for (std::string_view o : kDefault.options) push_unique(out.keywords, o);
    for (std::size_t i = 1; out.keywords.size() < n; ++i) push_unique(out.keywords, "Option " + std::to_string(i));
    out.keywords.resize(n);
    return out;
}

KeywordSet generate_keywords(std::string_view question, LanguageModelProvider& provider, std::size_t n,
                             double temperature) {
    if (text::trim(question).empty()) throw Error(ErrorCode::EmptyQuestion, "question is empty");
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "keyword count must be positive");
    KeywordSet got;
    try {
        CompletionRequest req;
        req.prompt = keyword_prompt(question, n);
        req.temperature = temperature;
        req.max_tokens = 256;
        got = parse_keyword_completion(provider.complete(req));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ProviderUnavailable) throw;
        return mock_keywords(question, n);
    }
    const KeywordSet fill = mock_keywords(question, 2 * n);
    if (got.category.empty()) got.category = fill.category;
    std::vector<std::string> list;
    for (const auto& k : got.keywords) push_unique(list, k);
    add_opposites(list, n);
    for (const auto& k : fill.keywords) {
        if (list.size() >= n) break;
        push_unique(list, k);
    }
    list.resize(std::min(list.size(), n));
    got.keywords = std::move(list);
    return got;
}

}  // namespace cbai
