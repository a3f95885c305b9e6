#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace ciqa::eval {

// Spearman's rho: Pearson correlation of average-ranked data.
double srocc(std::span<const double> x, std::span<const double> y);

// Kendall's tau-b with tie corrections; O(n log n) merge-sort counting.
double krocc(std::span<const double> x, std::span<const double> y);

double accuracy(std::span<const int> predicted, std::span<const int> truth);
double accuracy(const std::vector<std::string>& predicted,
                const std::vector<std::string>& truth);

struct WilcoxonOutcome {
    double statistic = 0.0;  // min(W+, W-) over nonzero differences
    double p_value = 1.0;
    int n_effective = 0;
    bool reject = false;
    int direction = 0;  // +1 first group's mean larger, -1 second, 0 no rejection
};

// Paired signed-rank test, two-sided. Exact tail enumeration for
// n_effective <= 25, tie-corrected normal approximation with continuity
// correction beyond that. Zero differences are dropped.
WilcoxonOutcome wilcoxon_paired(std::span<const double> a, std::span<const double> b,
                                double alpha = 0.05);

// One protocol round evaluated against one test set.
struct RoundResult {
    int round = 0;
    std::string test_set;
    double srocc = 0.0;
    double krocc = 0.0;
    double accuracy = 0.0;
    std::map<std::string, double> per_class_srocc;
    std::map<std::string, double> per_class_krocc;
};

void write_results_csv_header(std::ostream& os);
void write_results_csv_row(std::ostream& os, const RoundResult& r);
std::vector<RoundResult> read_results_csv(const std::string& path);

struct ComparisonRow {
    std::string test_set;
    std::string metric;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double statistic = 0.0;
    double p_value = 1.0;
    int n_effective = 0;
    bool reject = false;
    int winner = 0;  // +1 model a, -1 model b, 0 none
};

// Pairs rounds by (round, test set) and runs the Wilcoxon comparison per
// (test set, metric); the winner flag follows the larger mean when the
// null is rejected.
std::vector<ComparisonRow> compare_models(const std::vector<RoundResult>& a,
                                          const std::vector<RoundResult>& b,
                                          double alpha = 0.05);

void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows);
void write_comparison_text(std::ostream& os, const std::vector<ComparisonRow>& rows,
                           const std::string& name_a, const std::string& name_b);

}  // namespace ciqa::eval
