#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "cbai/datasetgen.hpp"
#include "cbai/error.hpp"
#include "cbai/text.hpp"

namespace cbai {

namespace {

// NLTK English stoplist, 179 entries.
const std::set<std::string, std::less<>>& stoplist() {
    static const std::set<std::string, std::less<>> words = {
        "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've", "you'll",
        "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "she's",
        "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them", "their", "theirs",
        "themselves", "what", "which", "who", "whom", "this", "that", "that'll", "these", "those", "am", "is",
        "are", "was", "were", "be", "been", "being", "have", "has", "had", "having", "do", "does", "did",
        "doing", "a", "an", "the", "and", "but", "if", "or", "because", "as", "until", "while", "of", "at",
        "by", "for", "with", "about", "against", "between", "into", "through", "during", "before", "after",
        "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over", "under", "again",
        "further", "then", "once", "here", "there", "when", "where", "why", "how", "all", "any", "both",
        "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same",
        "so", "than", "too", "very", "s", "t", "can", "will", "just", "don", "don't", "should", "should've",
        "now", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn",
        "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn", "isn't",
        "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan", "shan't", "shouldn",
        "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't", "wouldn", "wouldn't"};
    return words;
}

struct Token {
    std::string surface;
    std::string lower;
    std::size_t sentence = 0;
    std::size_t position = 0;  // index within the sentence
};

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '\''; }
bool sentence_end(char c) { return c == '.' || c == '!' || c == '?' || c == ';' || c == '\n'; }

// Sentences of word tokens; any other punctuation splits phrases in RAKE, so
// a phrase break is recorded as a token with empty surface.
std::vector<std::vector<Token>> tokenize(std::string_view text) {
    std::vector<std::vector<Token>> sentences(1);
    std::string cur;
    auto flush = [&] {
        while (!cur.empty() && cur.back() == '\'') cur.pop_back();
        while (!cur.empty() && cur.front() == '\'') cur.erase(cur.begin());
        if (!cur.empty()) {
            auto& s = sentences.back();
            s.push_back(Token{cur, text::to_lower(cur), sentences.size() - 1, s.size()});
        }
        cur.clear();
    };
    for (char c : text) {
        if (word_char(c)) {
            cur += c;
            continue;
        }
        flush();
        if (sentence_end(c)) {
            if (!sentences.back().empty()) sentences.emplace_back();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            auto& s = sentences.back();
            if (!s.empty() && !s.back().surface.empty()) s.push_back(Token{"", "", sentences.size() - 1, s.size()});
        }
    }
    flush();
    if (sentences.back().empty()) sentences.pop_back();
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        for (auto& t : sentences[i]) t.sentence = i;
    }
    return sentences;
}

bool is_candidate_word(const Token& t) {
    return !t.surface.empty() && !is_stopword(t.lower) &&
           std::any_of(t.lower.begin(), t.lower.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); });
}

std::string join_surface(const std::vector<Token>& s, std::size_t from, std::size_t to) {
    std::string out;
    for (std::size_t i = from; i < to; ++i) {
        if (i > from) out += ' ';
        out += s[i].surface;
    }
    return out;
}

}  // namespace

bool is_stopword(std::string_view lower_word) { return stoplist().contains(lower_word); }

ExtractorConfig ExtractorConfig::rake() { return {ExtractorKind::Rake, 3, 0.0, 20}; }
ExtractorConfig ExtractorConfig::yake_sparse() { return {ExtractorKind::YakeSparse, 1, 0.9, 20}; }
ExtractorConfig ExtractorConfig::yake_dense() { return {ExtractorKind::YakeDense, 5, 0.0, 20}; }

void ExtractorConfig::validate() const {
    if (max_ngram < 1 || max_ngram > 8) throw Error(ErrorCode::InvalidArgument, "max_ngram must be in [1, 8]");
    if (!(dedup_threshold >= 0.0 && dedup_threshold <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "dedup threshold must be in [0, 1]");
    }
    if (top == 0) throw Error(ErrorCode::InvalidArgument, "top must be positive");
}

std::string_view to_string(ExtractorKind kind) {
    switch (kind) {
        case ExtractorKind::Rake: return "rake";
        case ExtractorKind::YakeSparse: return "yake_sparse";
        case ExtractorKind::YakeDense: return "yake_dense";
    }
    return "unknown";
}

double levenshtein_similarity(std::string_view a, std::string_view b) {
    if (a.empty() && b.empty()) return 1.0;
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> cur(b.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return 1.0 - static_cast<double>(prev[b.size()]) / static_cast<double>(std::max(a.size(), b.size()));
}

// Phrases are maximal stopword-free runs; word score = degree / frequency,
// phrase score = sum of its word scores.
std::vector<std::string> rake_keywords(std::string_view input, std::size_t top) {
    struct Phrase {
        std::string surface;
        std::string key;
        std::vector<std::string> words;
    };
    std::vector<Phrase> phrases;
    for (const auto& sentence : tokenize(input)) {
        std::size_t i = 0;
        while (i < sentence.size()) {
            if (!is_candidate_word(sentence[i])) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < sentence.size() && is_candidate_word(sentence[j])) ++j;
            Phrase p;
            p.surface = join_surface(sentence, i, j);
            for (std::size_t k = i; k < j; ++k) p.words.push_back(sentence[k].lower);
            p.key = text::join(p.words, " ");
            phrases.push_back(std::move(p));
            i = j;
        }
    }
    std::map<std::string, double> freq;
    std::map<std::string, double> degree;
    for (const Phrase& p : phrases) {
        for (const auto& w : p.words) {
            freq[w] += 1.0;
            degree[w] += static_cast<double>(p.words.size());
        }
    }
    struct Scored {
        std::string surface;
        std::string key;
        double score;
        std::size_t first;
    };
    std::vector<Scored> scored;
    for (std::size_t i = 0; i < phrases.size(); ++i) {
        const Phrase& p = phrases[i];
        if (std::any_of(scored.begin(), scored.end(), [&p](const Scored& s) { return s.key == p.key; })) continue;
        double s = 0.0;
        for (const auto& w : p.words) s += degree[w] / freq[w];
        scored.push_back({p.surface, p.key, s, i});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });
    std::vector<std::string> out;
    for (const auto& s : scored) {
        if (out.size() >= top) break;
        out.push_back(s.surface);
    }
    return out;
}

// Simplified YAKE: per-term casing, position, normalised frequency,
// relatedness to context and sentence spread; n-grams up to max_ngram that do
// not start or end on a stopword. Lower scores rank first.
std::vector<std::string> yake_keywords(std::string_view input, int max_ngram, double dedup_threshold,
                                       std::size_t top) {
    const auto sentences = tokenize(input);
    if (sentences.empty()) return {};

    struct Stats {
        double tf = 0.0;
        double tf_upper = 0.0;
        std::vector<double> sentence_ids;
        std::set<std::string> left, right;
        double left_n = 0.0, right_n = 0.0;
    };
    std::map<std::string, Stats> terms;
    for (const auto& s : sentences) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const Token& t = s[i];
            if (t.surface.empty()) continue;
            Stats& st = terms[t.lower];
            st.tf += 1.0;
            const bool upper = std::isupper(static_cast<unsigned char>(t.surface[0])) != 0;
            const bool acronym = t.surface.size() > 1 &&
                                 std::all_of(t.surface.begin(), t.surface.end(), [](char c) {
                                     return !std::isalpha(static_cast<unsigned char>(c)) ||
                                            std::isupper(static_cast<unsigned char>(c));
                                 });
            // sentence-initial capitals do not count unless the term is an acronym
            if (upper && (t.position > 0 || acronym)) {
                st.tf_upper += 1.0;
            }
            st.sentence_ids.push_back(static_cast<double>(t.sentence));
            if (i > 0 && !s[i - 1].surface.empty()) {
                st.left.insert(s[i - 1].lower);
                st.left_n += 1.0;
            }
            if (i + 1 < s.size() && !s[i + 1].surface.empty()) {
                st.right.insert(s[i + 1].lower);
                st.right_n += 1.0;
            }
        }
    }

    std::vector<double> content_tf;
    double max_tf = 0.0;
    for (const auto& [w, st] : terms) {
        if (is_stopword(w)) continue;
        content_tf.push_back(st.tf);
        max_tf = std::max(max_tf, st.tf);
    }
    if (content_tf.empty()) return {};
    const double mean_tf = std::accumulate(content_tf.begin(), content_tf.end(), 0.0) / static_cast<double>(content_tf.size());
    double var = 0.0;
    for (double v : content_tf) var += (v - mean_tf) * (v - mean_tf);
    const double std_tf = std::sqrt(var / static_cast<double>(content_tf.size()));
    const double n_sent = static_cast<double>(sentences.size());

    std::map<std::string, double> term_score;
    for (const auto& [w, st] : terms) {
        if (is_stopword(w)) continue;
        const double t_case = st.tf_upper / (1.0 + std::log(st.tf));
        auto ids = st.sentence_ids;
        std::sort(ids.begin(), ids.end());
        const double median = ids.size() % 2 ? ids[ids.size() / 2] : 0.5 * (ids[ids.size() / 2 - 1] + ids[ids.size() / 2]);
        const double t_pos = std::log(std::log(3.0 + median));
        const double t_norm = st.tf / (mean_tf + std_tf);
        const double dl = st.left_n > 0 ? static_cast<double>(st.left.size()) / st.left_n : 0.0;
        const double dr = st.right_n > 0 ? static_cast<double>(st.right.size()) / st.right_n : 0.0;
        const double t_rel = 1.0 + (dl + dr) * st.tf / max_tf;
        std::set<double> distinct(st.sentence_ids.begin(), st.sentence_ids.end());
        const double t_sent = static_cast<double>(distinct.size()) / n_sent;
        term_score[w] = t_pos * t_rel / (t_case + t_norm / t_rel + t_sent / t_rel);
    }

    struct Candidate {
        std::string surface;
        std::string key;
        std::vector<std::string> words;
        double tf = 0.0;
        std::size_t first = 0;
    };
    std::vector<Candidate> cands;
    std::map<std::string, std::size_t> index;
    std::size_t order = 0;
    for (const auto& s : sentences) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            for (int n = 1; n <= max_ngram && i + static_cast<std::size_t>(n) <= s.size(); ++n) {
                const std::size_t j = i + static_cast<std::size_t>(n);
                if (s[j - 1].surface.empty()) break;  // phrase break inside the window
                if (!is_candidate_word(s[i]) || !is_candidate_word(s[j - 1])) continue;
                std::vector<std::string> ws;
                for (std::size_t k = i; k < j; ++k) ws.push_back(s[k].lower);
                const std::string key = text::join(ws, " ");
                const auto it = index.find(key);
                if (it != index.end()) {
                    cands[it->second].tf += 1.0;
                    continue;
                }
                index[key] = cands.size();
                cands.push_back({join_surface(s, i, j), key, ws, 1.0, order++});
            }
        }
    }

    struct Scored {
        std::string surface;
        std::string key;
        double score;
        std::size_t first;
    };
    std::vector<Scored> scored;
    for (const auto& c : cands) {
        double prod = 1.0;
        double sum = 0.0;
        for (const auto& w : c.words) {
            if (is_stopword(w)) continue;
            prod *= term_score[w];
            sum += term_score[w];
        }
        scored.push_back({c.surface, c.key, prod / (c.tf * (1.0 + sum)), c.first});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.score < b.score; });

    std::vector<std::string> out;
    std::vector<std::string> kept_keys;
    for (const auto& s : scored) {
        if (out.size() >= top) break;
        if (dedup_threshold > 0.0 &&
            std::any_of(kept_keys.begin(), kept_keys.end(), [&](const std::string& k) {
                return levenshtein_similarity(k, s.key) > dedup_threshold;
            })) {
            continue;
        }
        kept_keys.push_back(s.key);
        out.push_back(s.surface);
    }
    return out;
}

std::vector<std::string> extract_keywords(std::string_view text, const ExtractorConfig& cfg) {
    cfg.validate();
    if (cfg.kind == ExtractorKind::Rake) return rake_keywords(text, cfg.top);
    return yake_keywords(text, cfg.max_ngram, cfg.dedup_threshold, cfg.top);
}

ConfiguredExtractor::ConfiguredExtractor(ExtractorConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::string ConfiguredExtractor::tag() const { return std::string(to_string(cfg_.kind)); }

std::vector<std::shared_ptr<const KeywordExtractor>> default_extractors() {
    return {std::make_shared<ConfiguredExtractor>(ExtractorConfig::rake()),
            std::make_shared<ConfiguredExtractor>(ExtractorConfig::yake_sparse()),
            std::make_shared<ConfiguredExtractor>(ExtractorConfig::yake_dense())};
}

}  // namespace cbai
