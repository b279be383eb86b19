#include <array>
#include <string>

#include "cbai/datasetgen.hpp"
#include "cbai/error.hpp"

namespace cbai {

namespace {

// Pairs per conversation. Long conversations keep the history-depth
// truncation at the start of each conversation a small effect.
constexpr std::size_t kPairsPerConversation = 50;

struct Template {
    std::string_view question;
    std::array<std::string_view, 4> answers;  // "{}" is replaced by a slot filler
};

constexpr std::array<Template, 16> kTemplates = {{
    {"What did you do on the weekend?",
     {"I went hiking with {} on Saturday.", "I didn't do much, I stayed at home.", "We visited {} in the city.",
      "I cleaned the house and read a book."}},
    {"Do you have any pets?",
     {"Yes, I have a dog called {}.", "No, I don't have any pets.", "I have two cats at home.",
      "Not anymore, my old dog passed away last year."}},
    {"What is your favorite food?",
     {"I love pizza with extra cheese.", "I'd say pasta, especially the one {} makes.", "Probably salad.",
      "I can't decide, I like almost everything."}},
    {"How are you feeling today?",
     {"I'm feeling great, thank you.", "Not so good, I'm a bit tired.", "Fine, thanks for asking.",
      "I've been better, to be honest."}},
    {"Where would you like to go on holiday?",
     {"I'd like to visit Italy with {}.", "Somewhere by the sea would be lovely.", "I won't travel this year.",
      "Maybe the mountains in autumn."}},
    {"What time should we meet?",
     {"Let's meet at 3pm.", "Any time after lunch works for me.", "I can't make it before 5pm.",
      "Morning is best, around 9am."}},
    {"Who did you meet yesterday?",
     {"I met {} at the market.", "Nobody, I was alone all day.", "My sister and {} came over for dinner.",
      "I had coffee with {}."}},
    {"What kind of music do you like?",
     {"I really enjoy classical music.", "Mostly jazz, and sometimes rock.", "I never listen to music.",
      "Whatever {} plays on the radio."}},
    {"Did you sleep well?",
     {"Yes, very well.", "No, I woke up several times.", "I slept for almost nine hours.",
      "It wasn't great because of the noise outside."}},
    {"What would you like to drink?",
     {"A cup of tea, please.", "Just water.", "I'll have a coffee with milk.", "Nothing for now, thank you."}},
    {"How was the doctor's appointment?",
     {"It went well, nothing to worry about.", "The doctor said I need more rest.",
      "I haven't been there yet.", "It was quick, {} drove me there."}},
    {"Can you tell me about your family?",
     {"I have two brothers and one sister.", "My daughter {} lives in Berlin.", "We're a small family.",
      "My parents live close to me."}},
    {"What are your plans for tomorrow?",
     {"I'm going shopping with {}.", "Nothing special, just relaxing.", "I have physiotherapy in the morning.",
      "I'll call {} and then go for a walk."}},
    {"Do you want to watch a movie tonight?",
     {"Sure, a comedy would be nice.", "No, I'm too tired tonight.", "Only if {} comes too.",
      "Maybe tomorrow instead."}},
    {"What was your first job?",
     {"I worked in a bakery.", "I was a teacher for many years.", "I delivered newspapers as a child.",
      "I started as a clerk at the post office."}},
    {"Is there anything I can help you with?",
     {"Could you open the window, please?", "No, everything is fine.", "Yes, please bring me my glasses.",
      "Not right now, thanks."}},
}};

constexpr std::array<std::string_view, 8> kPeople = {"Anna", "Peter", "Laura", "Oliver", "Sophia", "Tim", "Maria",
                                                     "Felix"};

constexpr std::string_view kLongTail =
    " and afterwards we spent a long time talking about everything that happened over the past few months, "
    "which was really nice";

std::string fill(std::string_view pattern, std::string_view person) {
    std::string out(pattern);
    if (const auto at = out.find("{}"); at != std::string::npos) out.replace(at, 2, person);
    return out;
}

}  // namespace

std::vector<Conversation> synthetic_corpus(std::size_t pairs, std::uint64_t seed) {
    if (pairs == 0) throw Error(ErrorCode::EmptyCorpus, "synthetic corpus needs at least one pair");
    Rng rng(derive_seed(seed, "datasetgen/synthetic"));
    std::vector<Conversation> out;
    for (std::size_t made = 0; made < pairs;) {
        Conversation c;
        c.id = "syn" + std::to_string(out.size());
        const std::size_t n = std::min(kPairsPerConversation, pairs - made);
        for (std::size_t i = 0; i < n; ++i) {
            const Template& t = kTemplates[uniform_index(rng, kTemplates.size())];
            std::string answer = fill(t.answers[uniform_index(rng, t.answers.size())],
                                      kPeople[uniform_index(rng, kPeople.size())]);
            // about one answer in twenty is too long for the dataset
            if (uniform_index(rng, 20) == 0) {
                answer.pop_back();
                answer += std::string(kLongTail) + ".";
            }
            c.turns.emplace_back(std::string(t.question), std::move(answer));
        }
        made += n;
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace cbai
