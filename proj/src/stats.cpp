// SPDX-License-Identifier: Apache-2.0
#include "prompt_elites/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "prompt_elites/csv.hpp"
#include "prompt_elites/errors.hpp"
#include "prompt_elites/phenotype.hpp"

namespace prompt_elites {

namespace {
constexpr double kAlpha = 0.05;
}

// ---------------------------------------------------------------------------
// Special functions

double chi_square_sf_1df(double x) {
    if (x <= 0.0) return 1.0;
    return std::erfc(std::sqrt(x / 2.0));
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_two_sided_p(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

namespace {

// Continued fraction for the regularized incomplete beta (Lentz's method).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                         b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
    return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int dof) {
    if (dof < 1) throw ConfigError("student t needs dof >= 1");
    if (std::isinf(t)) return 0.0;
    const double v = static_cast<double>(dof);
    return regularized_incomplete_beta(v / 2.0, 0.5, v / (v + t * t));
}

// ---------------------------------------------------------------------------
// Tests

ContingencyTable2x2 coverage_contingency(const Archive& map_archive, const Archive& random_archive,
                                         double threshold, const std::vector<int>& universe) {
    if (universe.size() != 2) throw ConfigError("coverage contingency expects a 2-axis universe");
    long total = static_cast<long>(universe[0]) * universe[1];
    const std::vector<Axis> axes{Axis::Shots, Axis::Depth};
    long a = covered_cell_count(map_archive, axes, threshold, universe);
    long c = covered_cell_count(random_archive, axes, threshold, universe);
    return {a, total - a, c, total - c};
}

StatResult chi_square_2x2_yates(const ContingencyTable2x2& t) {
    if (t.a < 0 || t.b < 0 || t.c < 0 || t.d < 0) throw ConfigError("negative cell count");
    const long n = t.n();
    if (n < 1) throw ConfigError("empty contingency table");
    StatResult r;
    const double r1 = static_cast<double>(t.a + t.b);
    const double r2 = static_cast<double>(t.c + t.d);
    const double c1 = static_cast<double>(t.a + t.c);
    const double c2 = static_cast<double>(t.b + t.d);
    if (r1 == 0.0 || r2 == 0.0 || c1 == 0.0 || c2 == 0.0) {
        r.degenerate = true;
        r.effect_size = 0.0;
        return r;  // statistic 0, p 1
    }
    const double ad_bc = static_cast<double>(t.a) * static_cast<double>(t.d) -
                         static_cast<double>(t.b) * static_cast<double>(t.c);
    const double corrected = std::max(0.0, std::fabs(ad_bc) - static_cast<double>(n) / 2.0);
    r.statistic = static_cast<double>(n) * corrected * corrected / (r1 * r2 * c1 * c2);
    r.p_value = chi_square_sf_1df(r.statistic);
    r.effect_size = cramers_v(r.statistic, n);
    r.significant = r.p_value < kAlpha;
    return r;
}

double cramers_v(double chi2, long n) {
    if (n < 1) throw ConfigError("cramers_v needs n >= 1");
    return std::sqrt(chi2 / static_cast<double>(n));
}

const char* effect_size_label(double v) {
    if (v < 0.2) return "small";
    if (v <= 0.5) return "medium";
    return "large";
}

namespace {

// Average ranks (1-based), ties share the mean rank of their run.
std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

StatResult spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ConfigError("spearman: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw ConfigError("spearman: need n >= 3");
    StatResult r;
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double rho = pearson(rx, ry);
    if (std::isnan(rho)) {
        r.degenerate = true;  // constant input
        return r;
    }
    r.statistic = rho;
    const double denom = 1.0 - rho * rho;
    if (denom <= 1e-15) {
        r.p_value = 0.0;
    } else {
        const double t = rho * std::sqrt((static_cast<double>(n) - 2.0) / denom);
        r.p_value = student_t_two_sided_p(t, static_cast<int>(n) - 2);
    }
    r.significant = r.p_value < kAlpha;
    return r;
}

StatResult two_proportion_z(long k1, long n1, long k2, long n2) {
    if (n1 < 1 || n2 < 1) throw ConfigError("two_proportion_z: group sizes must be >= 1");
    if (k1 < 0 || k1 > n1 || k2 < 0 || k2 > n2) throw ConfigError("two_proportion_z: bad counts");
    StatResult r;
    const double pooled = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
    if (pooled == 0.0 || pooled == 1.0) {
        r.degenerate = true;
        return r;  // z 0, p 1
    }
    const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
    const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
    const double se = std::sqrt(pooled * (1.0 - pooled) *
                                (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
    r.statistic = (p1 - p2) / se;
    r.p_value = normal_two_sided_p(r.statistic);
    r.significant = r.p_value < kAlpha;
    return r;
}

namespace {

struct Feature {
    std::string name;
    bool (*holds)(const PopulationRow&);
};

const Feature kFeatures[] = {
    {"has_context", [](const PopulationRow& r) { return r.has_context; }},
    {"0-shot", [](const PopulationRow& r) { return shot_category(r.shots) == ShotCategory::ZeroShot; }},
    {"few-shot", [](const PopulationRow& r) { return shot_category(r.shots) == ShotCategory::FewShot; }},
    {"many-shot", [](const PopulationRow& r) { return shot_category(r.shots) == ShotCategory::ManyShot; }},
    {"no-cot", [](const PopulationRow& r) { return cot_category(r.depth) == CotCategory::NoCot; }},
    {"cot-1", [](const PopulationRow& r) { return cot_category(r.depth) == CotCategory::Cot1; }},
    {"cot-2plus", [](const PopulationRow& r) { return cot_category(r.depth) == CotCategory::Cot2Plus; }},
};

}  // namespace

EnrichmentReport enrichment_report(std::span<const PopulationRow> individuals, double threshold) {
    EnrichmentReport report;
    report.population_size = static_cast<long>(individuals.size());
    report.threshold = threshold;
    long hp = 0;
    for (const auto& row : individuals)
        if (row.fitness > threshold) ++hp;
    report.high_performer_count = hp;
    if (hp == 0) throw NoHighPerformers("no individual above threshold " + format_double(threshold));
    const long n_all = report.population_size;
    const long n_comp = n_all - hp;

    for (const Feature& feature : kFeatures) {
        long k_all = 0, k_hp = 0;
        for (const auto& row : individuals) {
            const bool v = feature.holds(row);
            k_all += v;
            if (row.fitness > threshold) k_hp += v;
        }
        FeatureEnrichment fe;
        fe.feature = feature.name;
        fe.overall_proportion = static_cast<double>(k_all) / static_cast<double>(n_all);
        fe.hp_proportion = static_cast<double>(k_hp) / static_cast<double>(hp);
        fe.vs_overall = two_proportion_z(k_hp, hp, k_all, n_all);
        if (n_comp > 0) {
            const long k_comp = k_all - k_hp;
            fe.complement_proportion = static_cast<double>(k_comp) / static_cast<double>(n_comp);
            fe.vs_complement = two_proportion_z(k_hp, hp, k_comp, n_comp);
        } else {
            fe.vs_complement.degenerate = true;
        }
        report.features.push_back(std::move(fe));
    }
    return report;
}

}  // namespace prompt_elites
