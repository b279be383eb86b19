#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbai/decoder.hpp"
#include "cbai/transcript.hpp"

namespace cbai {

// ---- ratings ---------------------------------------------------------------

enum class Mistake {
    SlightlyDifferent,
    TooBrief,
    MissedDetails,
    AddedDetails,
    WrongInformation,
    TotallyDifferent,
    NoMistake,
};

std::string_view to_string(Mistake m);
// Case-insensitive; throws ParseError.
Mistake parse_mistake(std::string_view name);

struct RatingRecord {
    std::string model_tag;
    int rating = 5;  // 1 Wrong .. 5 Perfect
    Mistake mistake = Mistake::NoMistake;

    // Throws InvalidArgument: rating outside 1..5, or a perfect rating with a mistake.
    void validate() const;
};

double adjustment_factor(Mistake m);
double adjusted_rating(const RatingRecord& r);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;  // sample (n - 1) standard deviation; 0 for a single value
};

// Throws EmptyGroup.
MeanSd mean_sd(const std::vector<double>& values);

struct GroupSummary {
    std::string model_tag;
    std::size_t n = 0;
    MeanSd raw;
    MeanSd adjusted;
};

// Groups in first-appearance order. Throws EmptyGroup on no records.
std::vector<GroupSummary> summarize(const std::vector<RatingRecord>& records);
// Tab-separated table with four decimals.
std::string format_summary(const std::vector<GroupSummary>& groups);

// Comma-separated model_tag,rating,mistake; an optional header line is
// skipped. Throws ParseError.
std::vector<RatingRecord> parse_ratings_csv(std::string_view csv);
std::vector<RatingRecord> load_ratings_csv(const std::string& path);

// ---- ANOVA -----------------------------------------------------------------

struct AnovaResult {
    double f = 0.0;
    double p = 1.0;
    double df_between = 0.0;
    double df_within = 0.0;
    double ss_between = 0.0;
    double ss_within = 0.0;
    // Zero within-group variance with differing means: F is infinite and p
    // is reported as 0.
    bool degenerate_within = false;
};

// Regularized incomplete beta I_x(a, b).
double regularized_incomplete_beta(double a, double b, double x);
// P(F(d1, d2) > f).
double f_distribution_upper_tail(double f, double d1, double d2);

// Throws InvalidArgument for fewer than two groups or no within-group
// degrees of freedom, EmptyGroup for an empty group.
AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups);

// ---- session metrics -------------------------------------------------------

struct Histogram {
    std::vector<double> edges;  // bins [e_i, e_i+1); the last bin is closed
    std::vector<std::size_t> counts;
};

// Values outside the edges fall into the first or last bin. Throws
// InvalidArgument for fewer than two or non-increasing edges.
Histogram make_histogram(const std::vector<double>& values, const std::vector<double>& edges);
std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

// frames x 50 ms plus the acquisition tail.
double selection_time_ms(std::size_t frames_to_decision, const DecoderConfig& cfg = {});

struct SessionMetrics {
    std::vector<double> selection_times_ms;
    std::vector<std::size_t> keyword_positions;       // 1..12, special options excluded
    std::vector<std::size_t> position_counts;         // index 0 is position 1
    std::optional<double> accuracy;                   // when trial logs carry targets
    std::size_t trials = 0;
};

// Position of a keyword selection on an option line, 1..12, or nothing for a
// special option. A line whose eighth option reads "Previous" is page two.
std::optional<std::size_t> keyword_position(const OptionLine& line);

// Trial logs are the line-delimited decoder records; a trial ends at each
// decided record. Throws ParseError.
SessionMetrics session_metrics(const std::vector<Transcript>& transcripts, std::string_view trial_log,
                               const DecoderConfig& cfg = {});
std::string format_metrics(const SessionMetrics& m);

}  // namespace cbai
