#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cbai/datasetgen.hpp"
#include "cbai/error.hpp"
#include "cbai/text.hpp"

namespace cbai {

namespace {

// Whole-word forms first; suffix rules cover the regular cases.
const std::map<std::string, std::string, std::less<>>& contraction_words() {
    static const std::map<std::string, std::string, std::less<>> table = {
        {"won't", "will not"}, {"can't", "cannot"},   {"shan't", "shall not"}, {"ain't", "am not"},
        {"let's", "let us"},   {"it's", "it is"},     {"that's", "that is"},   {"what's", "what is"},
        {"there's", "there is"}, {"here's", "here is"}, {"he's", "he is"},     {"she's", "she is"},
        {"who's", "who is"},   {"where's", "where is"}, {"how's", "how is"},   {"y'all", "you all"},
        {"o'clock", "o'clock"},
    };
    return table;
}

constexpr std::pair<std::string_view, std::string_view> kSuffixes[] = {
    {"n't", " not"}, {"'re", " are"}, {"'ve", " have"}, {"'m", " am"}, {"'ll", " will"}, {"'d", " would"},
};

std::string match_case(std::string_view original, std::string replacement) {
    const bool all_upper = std::none_of(original.begin(), original.end(), [](char c) {
        return std::islower(static_cast<unsigned char>(c));
    });
    if (all_upper && original.size() > 1) {
        for (char& c : replacement) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    } else if (!original.empty() && std::isupper(static_cast<unsigned char>(original[0]))) {
        replacement[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement[0])));
    }
    return replacement;
}

std::string expand_word(std::string_view word) {
    const std::string lower = text::to_lower(word);
    if (const auto it = contraction_words().find(lower); it != contraction_words().end()) {
        return match_case(word, it->second);
    }
    for (const auto& [suffix, full] : kSuffixes) {
        if (lower.size() > suffix.size() && lower.ends_with(suffix)) {
            const std::string_view stem = word.substr(0, word.size() - suffix.size());
            std::string tail(full);
            if (std::isupper(static_cast<unsigned char>(word.back()))) {
                for (char& c : tail) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            }
            return std::string(stem) + tail;
        }
    }
    return std::string(word);
}

std::string normalise_apostrophes(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        // U+2019 RIGHT SINGLE QUOTATION MARK
        if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
            static_cast<unsigned char>(s[i + 1]) == 0x80 && static_cast<unsigned char>(s[i + 2]) == 0x99) {
            out += '\'';
            i += 2;
        } else {
            out += s[i];
        }
    }
    return out;
}

std::size_t utf8_length(std::string_view s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

struct Built {
    std::vector<std::string> keywords;
    std::string extractor;
};

std::optional<Built> pick_keywords(std::string_view answer, DatasetVariant variant, Rng& rng,
                                   const std::vector<std::shared_ptr<const KeywordExtractor>>& extractors) {
    const std::string source = expand_contractions(answer);
    if (variant == DatasetVariant::Cr) {
        std::optional<Built> best;
        for (const auto& ex : extractors) {
            auto kw = ex->extract(source);
            if (kw.empty()) continue;
            if (!best || kw.size() < best->keywords.size()) best = Built{std::move(kw), ex->tag()};
        }
        return best;
    }
    std::vector<std::size_t> remaining(extractors.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
    while (!remaining.empty()) {
        const std::size_t pick = uniform_index(rng, remaining.size());
        const auto& ex = extractors[remaining[pick]];
        auto kw = ex->extract(source);
        if (!kw.empty()) return Built{std::move(kw), ex->tag()};
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return std::nullopt;
}

// Every emitted text goes through contraction expansion.
void render(DatasetSample& s, const Conversation& c, std::size_t pair, std::string_view answer) {
    std::vector<QaPair> history;
    for (std::size_t k = pair - s.history_depth; k < pair; ++k) {
        history.emplace_back(expand_contractions(c.turns[k].first), expand_contractions(c.turns[k].second));
    }
    s.prompt = format_sentence_prompt(history, expand_contractions(c.turns[pair].first), s.keywords);
    s.completion = expand_contractions(answer) + std::string(kStopToken);
}

}  // namespace

std::string expand_contractions(std::string_view input) {
    const std::string s = normalise_apostrophes(input);
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!std::isalpha(static_cast<unsigned char>(s[i]))) {
            out += s[i++];
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && (std::isalpha(static_cast<unsigned char>(s[j])) ||
                                (s[j] == '\'' && j + 1 < s.size() && std::isalpha(static_cast<unsigned char>(s[j + 1]))))) {
            ++j;
        }
        const std::string_view word(s.data() + i, j - i);
        out += word.find('\'') == std::string_view::npos ? std::string(word) : expand_word(word);
        i = j;
    }
    return out;
}

bool contains_negation(std::string_view input) {
    const auto ws = text::words(expand_contractions(input));
    return std::any_of(ws.begin(), ws.end(), [](const std::string& w) {
        return std::find(kNegationMarkers.begin(), kNegationMarkers.end(), w) != kNegationMarkers.end();
    });
}

std::vector<std::string> inject_negation(std::vector<std::string> keywords, std::string_view answer) {
    if (!contains_negation(answer)) return keywords;
    if (std::any_of(keywords.begin(), keywords.end(), [](const std::string& k) { return contains_negation(k); })) {
        return keywords;
    }
    keywords.insert(keywords.begin(), "not");
    return keywords;
}

std::size_t sample_history_depth(Rng& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t d = 0; d + 1 < kHistoryDepthProbabilities.size(); ++d) {
        acc += kHistoryDepthProbabilities[d];
        if (u < acc) return d;
    }
    return kHistoryDepthProbabilities.size() - 1;
}

std::vector<DatasetSample> build_dataset(const std::vector<Conversation>& corpus, DatasetVariant variant,
                                         std::uint64_t seed, DatasetStats* stats,
                                         const std::vector<std::shared_ptr<const KeywordExtractor>>& extractors) {
    if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus has no conversations");
    if (extractors.empty()) throw Error(ErrorCode::InvalidArgument, "no keyword extractors");
    DatasetStats local;
    std::vector<DatasetSample> out;
    for (const Conversation& c : corpus) {
        Rng rng(derive_seed(seed, "datasetgen/" + c.id));
        for (std::size_t i = 0; i < c.turns.size(); ++i) {
            ++local.pairs;
            const auto& [question, answer] = c.turns[i];
            if (utf8_length(expand_contractions(answer)) > kMaxAnswerChars) {
                ++local.skipped_long;
                continue;
            }
            DatasetSample s;
            s.id = c.id + ":" + std::to_string(i);
            s.drawn_depth = sample_history_depth(rng);
            s.history_depth = std::min(s.drawn_depth, i);
            auto built = pick_keywords(answer, variant, rng, extractors);
            if (!built) {
                ++local.rejected_no_keywords;
                continue;
            }
            s.keywords = inject_negation(std::move(built->keywords), answer);
            s.extractor = std::move(built->extractor);
            render(s, c, i, answer);
            out.push_back(std::move(s));
        }
    }
    if (stats) *stats = local;
    return out;
}

std::vector<SampleOverride> parse_overrides(std::string_view jsonl) {
    std::vector<SampleOverride> out;
    std::size_t line_no = 0;
    for (const std::string& line : text::split(jsonl, "\n")) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            SampleOverride o;
            o.id = j.at("id").get<std::string>();
            if (j.contains("keywords")) o.keywords = j.at("keywords").get<std::vector<std::string>>();
            if (j.contains("answer")) o.answer = j.at("answer").get<std::string>();
            out.push_back(std::move(o));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ParseError, "overrides line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void apply_overrides(std::vector<DatasetSample>& samples, const std::vector<Conversation>& corpus,
                     const std::vector<SampleOverride>& overrides) {
    for (const SampleOverride& o : overrides) {
        const auto it = std::find_if(samples.begin(), samples.end(), [&o](const DatasetSample& s) { return s.id == o.id; });
        if (it == samples.end()) throw Error(ErrorCode::InvalidArgument, "override for unknown sample " + o.id);
        const std::size_t colon = o.id.rfind(':');
        const std::string conv = o.id.substr(0, colon);
        const std::size_t pair = std::stoul(o.id.substr(colon + 1));
        const auto c = std::find_if(corpus.begin(), corpus.end(), [&conv](const Conversation& x) { return x.id == conv; });
        if (c == corpus.end() || pair >= c->turns.size()) {
            throw Error(ErrorCode::InvalidArgument, "override id does not match the corpus: " + o.id);
        }
        const std::string answer = o.answer ? *o.answer : c->turns[pair].second;
        if (utf8_length(expand_contractions(answer)) > kMaxAnswerChars) {
            throw Error(ErrorCode::InvalidArgument, "override answer exceeds the length limit: " + o.id);
        }
        if (o.keywords) {
            if (o.keywords->empty()) throw Error(ErrorCode::InvalidArgument, "override has no keywords: " + o.id);
            it->keywords = *o.keywords;
            it->extractor = "override";
        }
        render(*it, *c, pair, answer);
    }
}

std::vector<Conversation> parse_corpus(std::string_view input) {
    std::vector<Conversation> out;
    std::vector<std::string> block;
    auto flush = [&] {
        if (block.size() >= 2) {
            Conversation c;
            c.id = std::to_string(out.size());
            for (std::size_t i = 0; i + 1 < block.size(); i += 2) c.turns.emplace_back(block[i], block[i + 1]);
            out.push_back(std::move(c));
        }
        block.clear();
    };
    for (const std::string& raw : text::split(input, "\n")) {
        const std::string_view line = text::trim(raw);
        if (line.empty()) {
            flush();
        } else {
            block.emplace_back(line);
        }
    }
    flush();
    if (out.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus has no question/answer pairs");
    return out;
}

std::vector<Conversation> load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open corpus " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_corpus(buf.str());
}

std::string format_dataset(const std::vector<DatasetSample>& samples) {
    std::string out;
    for (const DatasetSample& s : samples) {
        nlohmann::ordered_json j;
        j["prompt"] = s.prompt;
        j["completion"] = s.completion;
        out += j.dump() + "\n";
    }
    return out;
}

std::vector<PromptCompletion> parse_dataset(std::string_view jsonl) {
    std::vector<PromptCompletion> out;
    std::size_t line_no = 0;
    for (const std::string& line : text::split(jsonl, "\n")) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            if (j.size() != 2) throw Error(ErrorCode::ParseError, "dataset record must have exactly two fields");
            out.push_back({j.at("prompt").get<std::string>(), j.at("completion").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ParseError, "dataset line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_dataset(const std::vector<DatasetSample>& samples, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write dataset " + path);
    out << format_dataset(samples);
    if (!out) throw Error(ErrorCode::IoError, "failed writing dataset " + path);
}

std::vector<PromptCompletion> read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open dataset " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str());
}

}  // namespace cbai
