#include "cbai/evalstats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "cbai/error.hpp"
#include "cbai/text.hpp"

namespace cbai {

namespace {

constexpr std::array<std::pair<Mistake, std::string_view>, 7> kMistakeNames = {{
    {Mistake::SlightlyDifferent, "SlightlyDifferent"},
    {Mistake::TooBrief, "TooBrief"},
    {Mistake::MissedDetails, "MissedDetails"},
    {Mistake::AddedDetails, "AddedDetails"},
    {Mistake::WrongInformation, "WrongInformation"},
    {Mistake::TotallyDifferent, "TotallyDifferent"},
    {Mistake::NoMistake, "NoMistake"},
}};

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    return h;
}

}  // namespace

std::string_view to_string(Mistake m) {
    for (const auto& [k, name] : kMistakeNames) {
        if (k == m) return name;
    }
    return "NoMistake";
}

Mistake parse_mistake(std::string_view name) {
    const std::string_view n = text::trim(name);
    for (const auto& [k, s] : kMistakeNames) {
        if (text::iequals(s, n)) return k;
    }
    throw Error(ErrorCode::ParseError, "unknown mistake category: " + std::string(n));
}

void RatingRecord::validate() const {
    if (rating < 1 || rating > 5) throw Error(ErrorCode::InvalidArgument, "rating must be 1..5");
    if (rating == 5 && mistake != Mistake::NoMistake) {
        throw Error(ErrorCode::InvalidArgument, "a perfect rating cannot carry a mistake");
    }
}

double adjustment_factor(Mistake m) {
    switch (m) {
        case Mistake::SlightlyDifferent: return 1.0;
        case Mistake::TooBrief: return 0.9;
        case Mistake::MissedDetails: return 2.0 / 3.0;
        case Mistake::AddedDetails: return 0.5;
        case Mistake::WrongInformation: return 0.25;
        case Mistake::TotallyDifferent: return 0.1;
        case Mistake::NoMistake: return 1.0;
    }
    return 1.0;
}

double adjusted_rating(const RatingRecord& r) {
    r.validate();
    return r.rating * adjustment_factor(r.mistake);
}

MeanSd mean_sd(const std::vector<double>& values) {
    if (values.empty()) throw Error(ErrorCode::EmptyGroup, "cannot summarise an empty group");
    MeanSd out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

std::vector<GroupSummary> summarize(const std::vector<RatingRecord>& records) {
    if (records.empty()) throw Error(ErrorCode::EmptyGroup, "no rating records");
    std::vector<std::string> order;
    for (const auto& r : records) {
        if (std::find(order.begin(), order.end(), r.model_tag) == order.end()) order.push_back(r.model_tag);
    }
    std::vector<GroupSummary> out;
    for (const std::string& tag : order) {
        std::vector<double> raw, adj;
        for (const auto& r : records) {
            if (r.model_tag != tag) continue;
            adj.push_back(adjusted_rating(r));
            raw.push_back(r.rating);
        }
        out.push_back({tag, raw.size(), mean_sd(raw), mean_sd(adj)});
    }
    return out;
}

std::string format_summary(const std::vector<GroupSummary>& groups) {
    std::string out = "model\tn\tmean\tsd\tadjusted_mean\tadjusted_sd\n";
    for (const auto& g : groups) {
        out += g.model_tag + "\t" + std::to_string(g.n) + "\t" + fixed4(g.raw.mean) + "\t" + fixed4(g.raw.sd) + "\t" +
               fixed4(g.adjusted.mean) + "\t" + fixed4(g.adjusted.sd) + "\n";
    }
    return out;
}

std::vector<RatingRecord> parse_ratings_csv(std::string_view csv) {
    std::vector<RatingRecord> out;
    std::size_t line_no = 0;
    for (const std::string& raw : text::split(csv, "\n")) {
        ++line_no;
        const std::string_view line = text::trim(raw);
        if (line.empty()) continue;
        const auto fields = text::split(line, ",");
        if (fields.size() != 3) {
            throw Error(ErrorCode::ParseError, "ratings line " + std::to_string(line_no) + ": expected 3 fields");
        }
        if (line_no == 1 && text::iequals(text::trim(fields[1]), "rating")) continue;
        RatingRecord r;
        r.model_tag = std::string(text::trim(fields[0]));
        const std::string rating(text::trim(fields[1]));
        if (rating.size() != 1 || rating[0] < '1' || rating[0] > '5') {
            throw Error(ErrorCode::ParseError, "ratings line " + std::to_string(line_no) + ": rating must be 1..5");
        }
        r.rating = rating[0] - '0';
        r.mistake = parse_mistake(fields[2]);
        try {
            r.validate();
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, "ratings line " + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RatingRecord> load_ratings_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open ratings " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_ratings_csv(buf.str());
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw Error(ErrorCode::InvalidArgument, "beta parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front =
        std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
    // the continued fraction converges fast on this side of the mean
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_distribution_upper_tail(double f, double d1, double d2) {
    if (d1 <= 0.0 || d2 <= 0.0) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
    if (std::isinf(f)) return 0.0;
    if (f <= 0.0) return 1.0;
    return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw Error(ErrorCode::InvalidArgument, "ANOVA needs at least two groups");
    std::size_t n = 0;
    double grand = 0.0;
    for (const auto& g : groups) {
        if (g.empty()) throw Error(ErrorCode::EmptyGroup, "ANOVA group is empty");
        n += g.size();
        for (double v : g) grand += v;
    }
    if (n <= groups.size()) throw Error(ErrorCode::InvalidArgument, "ANOVA needs within-group degrees of freedom");
    grand /= static_cast<double>(n);
    AnovaResult r;
    for (const auto& g : groups) {
        const double mean = mean_sd(g).mean;
        r.ss_between += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
        for (double v : g) r.ss_within += (v - mean) * (v - mean);
    }
    r.df_between = static_cast<double>(groups.size() - 1);
    r.df_within = static_cast<double>(n - groups.size());
    if (r.ss_within == 0.0) {
        r.degenerate_within = r.ss_between > 0.0;
        r.f = r.degenerate_within ? std::numeric_limits<double>::infinity() : 0.0;
        r.p = r.degenerate_within ? 0.0 : 1.0;
        return r;
    }
    r.f = (r.ss_between / r.df_between) / (r.ss_within / r.df_within);
    r.p = f_distribution_upper_tail(r.f, r.df_between, r.df_within);
    return r;
}

Histogram make_histogram(const std::vector<double>& values, const std::vector<double>& edges) {
    if (edges.size() < 2) throw Error(ErrorCode::InvalidArgument, "histogram needs at least two edges");
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) throw Error(ErrorCode::InvalidArgument, "histogram edges must increase");
    }
    Histogram h{edges, std::vector<std::size_t>(edges.size() - 1, 0)};
    for (double v : values) {
        const auto it = std::upper_bound(edges.begin(), edges.end(), v);
        std::size_t bin = it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
        bin = std::min(bin, h.counts.size() - 1);
        ++h.counts[bin];
    }
    return h;
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
    if (bins == 0 || !(hi > lo)) throw Error(ErrorCode::InvalidArgument, "bad histogram range");
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * static_cast<double>(i) / bins;
    return edges;
}

double selection_time_ms(std::size_t frames_to_decision, const DecoderConfig& cfg) {
    return static_cast<double>(frames_to_decision) * cfg.frame_duration_ms + cfg.acquisition_tail_ms;
}

std::optional<std::size_t> keyword_position(const OptionLine& line) {
    if (line.chosen >= 6) return std::nullopt;
    const bool second_page = line.options[7] == "Previous";
    return line.chosen + 1 + (second_page ? 6 : 0);
}

SessionMetrics session_metrics(const std::vector<Transcript>& transcripts, std::string_view trial_log,
                               const DecoderConfig& cfg) {
    SessionMetrics m;
    m.position_counts.assign(12, 0);
    for (const auto& t : transcripts) {
        for (const auto& turn : t.turns) {
            for (const auto& line : turn.option_lines) {
                if (const auto pos = keyword_position(line)) {
                    m.keyword_positions.push_back(*pos);
                    ++m.position_counts[*pos - 1];
                }
            }
        }
    }
    std::vector<TrialResult> scored;
    std::size_t line_no = 0;
    for (const std::string& raw : text::split(trial_log, "\n")) {
        ++line_no;
        if (text::trim(raw).empty()) continue;
        TrialLogRecord rec;
        try {
            rec = parse_trial_log_record(raw);
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, "trial log line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!rec.decided || !rec.outcome) continue;
        ++m.trials;
        m.selection_times_ms.push_back(selection_time_ms(rec.outcome->frames_to_decision, cfg));
        if (rec.target) scored.push_back({*rec.target, *rec.outcome});
    }
    if (!scored.empty()) m.accuracy = selection_accuracy(scored);
    return m;
}

std::string format_metrics(const SessionMetrics& m) {
    std::string out = "trials " + std::to_string(m.trials) + "\n";
    if (!m.selection_times_ms.empty()) {
        const MeanSd t = mean_sd(m.selection_times_ms);
        out += "selection_time_mean_ms " + fixed4(t.mean) + "\n";
        out += "selection_time_sd_ms " + fixed4(t.sd) + "\n";
    }
    out += "accuracy " + (m.accuracy ? fixed4(*m.accuracy) : std::string("n/a")) + "\n";
    out += "keyword_selections " + std::to_string(m.keyword_positions.size()) + "\n";
    for (std::size_t i = 0; i < m.position_counts.size(); ++i) {
        out += "position_" + std::to_string(i + 1) + " " + std::to_string(m.position_counts[i]) + "\n";
    }
    return out;
}

}  // namespace cbai
