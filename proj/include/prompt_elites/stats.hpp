// SPDX-License-Identifier: Apache-2.0
//
// The analysis battery: 2x2 chi-square with Yates continuity correction,
// Cramer's V, Spearman rank correlation, and the two-proportion z-test, plus
// the coverage-contingency and feature-enrichment constructions built on
// them. Significance is flagged at alpha = 0.05 throughout.
#ifndef PROMPT_ELITES_STATS_HPP
#define PROMPT_ELITES_STATS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prompt_elites/archive.hpp"

namespace prompt_elites {

struct ContingencyTable2x2 {
    long a = 0, b = 0;  // row 1: method A covered / uncovered
    long c = 0, d = 0;  // row 2: method B covered / uncovered
    long n() const { return a + b + c + d; }
};

struct StatResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::optional<double> effect_size;
    bool significant = false;
    bool degenerate = false;  // zero marginal, constant input, degenerate pool
};

/// Covered vs uncovered bins of the shots x depth projection for two
/// archives over the same universe (fitness strictly above threshold counts
/// as covered).
ContingencyTable2x2 coverage_contingency(const Archive& map_archive, const Archive& random_archive,
                                         double threshold, const std::vector<int>& universe);

/// chi2 = n * (|ad-bc| - n/2)^2 / ((a+b)(c+d)(a+c)(b+d)), continuity term
/// floored at zero; p from the 1-dof chi-square survival function. A zero
/// marginal yields the degenerate (0, 1) result.
StatResult chi_square_2x2_yates(const ContingencyTable2x2& t);

/// V = sqrt(chi2 / n) for a 2x2 table.
double cramers_v(double chi2, long n);

/// "small" < 0.2, "medium" 0.2-0.5, "large" > 0.5.
const char* effect_size_label(double v);

/// Spearman rank correlation with average-rank tie handling; two-sided p via
/// the t transform against Student-t with n-2 dof. Constant input yields the
/// degenerate result.
StatResult spearman(std::span<const double> x, std::span<const double> y);

/// Pooled two-proportion z-test, two-sided. A pooled proportion of 0 or 1
/// yields the degenerate result.
StatResult two_proportion_z(long k1, long n1, long k2, long n2);

/// One evaluated individual, as consumed by the analysis pipeline.
struct PopulationRow {
    int shots = 0;
    int word_count = 0;
    int depth = 0;
    bool has_context = false;
    double ttr = 0.0;
    double fitness = 0.0;
};

struct FeatureEnrichment {
    std::string feature;
    double overall_proportion = 0.0;
    double hp_proportion = 0.0;
    StatResult vs_overall;     // HP subset against the full population
    double complement_proportion = 0.0;
    StatResult vs_complement;  // HP subset against the non-HP complement
};

struct EnrichmentReport {
    long population_size = 0;
    long high_performer_count = 0;
    double threshold = 0.0;
    std::vector<FeatureEnrichment> features;
};

/// Feature prevalence among high performers (fitness > threshold) vs the
/// population, for has-context, the three shot categories, and the three CoT
/// categories. Emits both the HP-vs-overall comparison (the subset overlaps
/// its baseline, which makes the test anti-conservative) and the cleaner
/// HP-vs-complement one. Throws NoHighPerformers when the subset is empty.
EnrichmentReport enrichment_report(std::span<const PopulationRow> individuals, double threshold);

// Special functions backing the p-values.
double chi_square_sf_1df(double x);
double normal_sf(double z);
double normal_two_sided_p(double z);
double student_t_two_sided_p(double t, int dof);
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace prompt_elites

#endif
