#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace ciqa::svm {

// Columnwise zero-mean unit-variance scaling with training-set
// statistics; zero-variance columns fall back to std 1.
struct Standardizer {
    std::vector<double> means;
    std::vector<double> stds;

    std::vector<double> apply(std::span<const double> x) const;
    std::vector<double> unapply(std::span<const double> x) const;
    void apply_inplace(std::vector<std::vector<double>>& rows) const;
};

Standardizer fit_standardizer(const std::vector<std::vector<double>>& rows);

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma);

// K[i][j] = rbf(X[i], X[j]); rows computed in parallel.
std::vector<std::vector<double>> rbf_kernel_matrix(
    const std::vector<std::vector<double>>& x, double gamma);

// One-vs-one soft-margin classifier with per-pair Platt sigmoids and
// pairwise-coupled multiclass probabilities.
struct SvcModel {
    struct PairModel {
        int class_a = 0;  // +1 side, index into labels
        int class_b = 0;  // -1 side
        std::vector<int> sv_index;      // into support_vectors
        std::vector<double> coef;       // alpha_i * y_i
        double bias = 0.0;
        double sigmoid_a = 0.0;
        double sigmoid_b = 0.0;
        double kkt_gap = 0.0;
    };

    std::vector<int> labels;  // sorted distinct class ids
    double c = 0.0;
    double gamma = 0.0;
    std::vector<std::vector<double>> support_vectors;
    std::vector<PairModel> pairs;
    bool trained = false;
};

// SMO with first-order maximal-violating-pair selection, lowest-index
// tie-breaking, KKT tolerance `tol`. Samples are re-ordered internally
// into a canonical order, so results do not depend on input permutation,
// and a global label swap mirrors the decision function exactly.
SvcModel train_svc(const std::vector<std::vector<double>>& x,
                   const std::vector<int>& labels, double c, double gamma,
                   double tol = 1e-3);

// Class probabilities in labels order; they are non-negative and sum
// to 1.
std::vector<double> predict_proba(const SvcModel& model, std::span<const double> x);

// argmax of predict_proba (lowest index on ties).
int predict_class(const SvcModel& model, std::span<const double> x);

// Pairwise decision value, exposed for calibration diagnostics.
double decision_value(const SvcModel& model, const SvcModel::PairModel& pair,
                      std::span<const double> x);

// nu-SVR in the libsvm convention (box [0, C] per dual variable, total
// dual mass C*nu*n), solved by the two-group SMO. epsilon is recovered
// from the KKT conditions.
struct SvrModel {
    double c = 0.0;
    double gamma = 0.0;
    double nu = 0.0;
    double bias = 0.0;
    double epsilon = 0.0;
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> coef;  // alpha_i - alpha_i^* per support vector
    double kkt_gap = 0.0;
    int n_train = 0;
    int n_dual_active = 0;  // samples with alpha_i + alpha_i^* > 0
    bool trained = false;
};

SvrModel train_svr(const std::vector<std::vector<double>>& x,
                   const std::vector<double>& targets, double c, double gamma, double nu,
                   double tol = 1e-3);

double predict(const SvrModel& model, std::span<const double> x);

void write_standardizer(std::ostream& os, const Standardizer& s);
Standardizer read_standardizer(std::istream& is);
void write_svc(std::ostream& os, const SvcModel& m);
SvcModel read_svc(std::istream& is);
void write_svr(std::ostream& os, const SvrModel& m);
SvrModel read_svr(std::istream& is);

}  // namespace ciqa::svm
