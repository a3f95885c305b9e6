#include "ciqa/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "ciqa/errors.hpp"
#include "ciqa/parallel.hpp"
#include "ciqa/serialize.hpp"

namespace ciqa::svm {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite_matrix(const std::vector<std::vector<double>>& x) {
    if (x.empty()) throw EmptyInput("empty training matrix");
    const auto dim = x.front().size();
    for (const auto& row : x) {
        if (row.size() != dim) throw DimensionMismatch("ragged training matrix");
        for (double v : row)
            if (!std::isfinite(v)) throw NonFinite("non-finite feature value");
    }
}

bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Binary soft-margin dual solved by SMO with first-order
// maximal-violating-pair selection; ties break to the lowest index.
struct BinarySolution {
    std::vector<double> alpha;
    double rho = 0.0;
    double kkt_gap = 0.0;
};

BinarySolution solve_c_svc(const std::vector<std::vector<double>>& kernel,
                           const std::vector<int>& y, double c, double tol) {
    const int l = static_cast<int>(y.size());
    std::vector<double> alpha(l, 0.0);
    std::vector<double> grad(l, -1.0);

    auto q = [&](int i, int j) { return y[i] * y[j] * kernel[i][j]; };

    const long max_iter = std::max(10000000L, 100L * l);
    double gap = kInf;
    for (long iter = 0; iter < max_iter; ++iter) {
        int i = -1, j = -1;
        double gmax = -kInf, gmin = kInf;
        for (int t = 0; t < l; ++t) {
            const bool in_up = (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
            const bool in_low = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c);
            const double v = -y[t] * grad[t];
            if (in_up && v > gmax) { gmax = v; i = t; }
            if (in_low && v < gmin) { gmin = v; j = t; }
        }
        gap = gmax - gmin;
        if (gap < tol || i < 0 || j < 0) break;

        const double old_ai = alpha[i], old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j];
            if (quad <= 0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
            } else {
                if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
            }
            if (diff > 0) {
                if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
            } else {
                if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
            }
        } else {
            double quad = kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j];
            if (quad <= 0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
            } else {
                if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
            }
            if (sum > c) {
                if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
            } else {
                if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
            }
        }
        const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
        for (int t = 0; t < l; ++t)
            grad[t] += q(t, i) * dai + q(t, j) * daj;
    }

    // bias from the KKT conditions of the free support vectors
    double ub = kInf, lb = -kInf, sum_free = 0.0;
    int nr_free = 0;
    for (int t = 0; t < l; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= c) {
            if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0) {
            if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++nr_free;
            sum_free += yg;
        }
    }
    BinarySolution sol;
    sol.alpha = std::move(alpha);
    sol.rho = nr_free > 0 ? sum_free / nr_free : (ub + lb) / 2.0;
    sol.kkt_gap = std::max(gap, 0.0);
    return sol;
}

// Platt sigmoid fitted by regularized maximum likelihood (Newton with
// backtracking and the standard prior-count targets).
std::pair<double, double> sigmoid_train(const std::vector<double>& dec,
                                        const std::vector<int>& y) {
    const int l = static_cast<int>(dec.size());
    double prior1 = 0, prior0 = 0;
    for (int t : y) (t > 0 ? prior1 : prior0) += 1.0;

    const int max_iter = 100;
    const double min_step = 1e-10, sigma = 1e-12, eps = 1e-5;
    const double hi = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo = 1.0 / (prior0 + 2.0);

    std::vector<double> t(l);
    for (int i = 0; i < l; ++i) t[i] = y[i] > 0 ? hi : lo;

    double a = 0.0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));
    double fval = 0.0;
    for (int i = 0; i < l; ++i) {
        const double f = dec[i] * a + b;
        fval += f >= 0 ? t[i] * f + std::log1p(std::exp(-f))
                       : (t[i] - 1) * f + std::log1p(std::exp(f));
    }

    for (int iter = 0; iter < max_iter; ++iter) {
        double h11 = sigma, h22 = sigma, h21 = 0, g1 = 0, g2 = 0;
        for (int i = 0; i < l; ++i) {
            const double f = dec[i] * a + b;
            double p, q;
            if (f >= 0) {
                p = std::exp(-f) / (1.0 + std::exp(-f));
                q = 1.0 / (1.0 + std::exp(-f));
            } else {
                p = 1.0 / (1.0 + std::exp(f));
                q = std::exp(f) / (1.0 + std::exp(f));
            }
            const double d2 = p * q;
            h11 += dec[i] * dec[i] * d2;
            h22 += d2;
            h21 += dec[i] * d2;
            const double d1 = t[i] - p;
            g1 += dec[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < eps && std::abs(g2) < eps) break;

        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;

        double step = 1.0;
        while (step >= min_step) {
            const double na = a + step * da, nb = b + step * db;
            double nf = 0.0;
            for (int i = 0; i < l; ++i) {
                const double f = dec[i] * na + nb;
                nf += f >= 0 ? t[i] * f + std::log1p(std::exp(-f))
                             : (t[i] - 1) * f + std::log1p(std::exp(f));
            }
            if (nf < fval + 1e-4 * step * gd) {
                a = na; b = nb; fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < min_step) break;
    }
    return {a, b};
}

double sigmoid_predict(double dec, double a, double b) {
    const double f = dec * a + b;
    return f >= 0 ? std::exp(-f) / (1.0 + std::exp(-f)) : 1.0 / (1.0 + std::exp(f));
}

// Pairwise coupling of the one-vs-one probabilities (Wu, Lin & Weng,
// second method): solves the coupled system by the usual fixed-point
// iteration.
std::vector<double> couple_probabilities(const std::vector<std::vector<double>>& r) {
    const int k = static_cast<int>(r.size());
    std::vector<double> p(k, 1.0 / k);
    std::vector<std::vector<double>> q(k, std::vector<double>(k, 0.0));
    std::vector<double> qp(k, 0.0);

    for (int t = 0; t < k; ++t) {
        for (int j = 0; j < k; ++j) {
            if (j == t) continue;
            q[t][t] += r[j][t] * r[j][t];
            q[t][j] = -r[j][t] * r[t][j];
        }
    }

    const int max_iter = std::max(100, k);
    const double eps = 0.005 / k;
    for (int iter = 0; iter < max_iter; ++iter) {
        double pqp = 0.0;
        for (int t = 0; t < k; ++t) {
            qp[t] = 0.0;
            for (int j = 0; j < k; ++j) qp[t] += q[t][j] * p[j];
            pqp += p[t] * qp[t];
        }
        double max_err = 0.0;
        for (int t = 0; t < k; ++t) max_err = std::max(max_err, std::abs(qp[t] - pqp));
        if (max_err < eps) break;

        for (int t = 0; t < k; ++t) {
            const double diff = (-qp[t] + pqp) / q[t][t];
            p[t] += diff;
            pqp = (pqp + diff * (diff * q[t][t] + 2.0 * qp[t])) / ((1 + diff) * (1 + diff));
            for (int j = 0; j < k; ++j) {
                qp[j] = (qp[j] + diff * q[j][t]) / (1 + diff);
                p[j] /= (1 + diff);
            }
        }
    }
    double sum = 0.0;
    for (double v : p) sum += v;
    for (double& v : p) v = std::max(v, 0.0) / sum;
    return p;
}

}  // namespace

std::vector<double> Standardizer::apply(std::span<const double> x) const {
    if (x.size() != means.size()) throw DimensionMismatch("standardizer dimension");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - means[i]) / stds[i];
    return out;
}

std::vector<double> Standardizer::unapply(std::span<const double> x) const {
    if (x.size() != means.size()) throw DimensionMismatch("standardizer dimension");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * stds[i] + means[i];
    return out;
}

void Standardizer::apply_inplace(std::vector<std::vector<double>>& rows) const {
    for (auto& row : rows) {
        if (row.size() != means.size()) throw DimensionMismatch("standardizer dimension");
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = (row[i] - means[i]) / stds[i];
    }
}

Standardizer fit_standardizer(const std::vector<std::vector<double>>& rows) {
    if (rows.size() < 2) throw EmptyInput("standardizer needs at least 2 samples");
    require_finite_matrix(rows);
    const auto n = rows.size();
    const auto dim = rows.front().size();
    Standardizer s;
    s.means.assign(dim, 0.0);
    s.stds.assign(dim, 0.0);
    for (const auto& row : rows)
        for (std::size_t j = 0; j < dim; ++j) s.means[j] += row[j];
    for (auto& m : s.means) m /= static_cast<double>(n);
    for (const auto& row : rows)
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = row[j] - s.means[j];
            s.stds[j] += d * d;
        }
    for (auto& v : s.stds) {
        v = std::sqrt(v / static_cast<double>(n));
        if (v <= 0.0) v = 1.0;
    }
    return s;
}

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
    if (x.size() != y.size()) throw DimensionMismatch("kernel operands differ in dimension");
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

std::vector<std::vector<double>> rbf_kernel_matrix(
    const std::vector<std::vector<double>>& x, double gamma) {
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> k(n, std::vector<double>(n));
#pragma omp parallel for schedule(static) num_threads(par::effective_workers())
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) k[i][j] = rbf_kernel(x[i], x[j], gamma);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) k[i][j] = k[j][i];
    return k;
}

SvcModel train_svc(const std::vector<std::vector<double>>& x,
                   const std::vector<int>& labels, double c, double gamma, double tol) {
    require_finite_matrix(x);
    if (labels.size() != x.size()) throw DimensionMismatch("label count");
    if (!(c > 0.0) || !(gamma > 0.0)) throw NonFinite("C and gamma must be positive");

    std::vector<int> classes(labels);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.size() < 2) throw SingleClass("training data has a single class");

    // canonical sample order: independent of the caller's permutation and,
    // because labels only break exact feature ties, stable under label swaps
    std::vector<int> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (x[a] != x[b]) return lex_less(x[a], x[b]);
        return labels[a] < labels[b];
    });
    std::vector<std::vector<double>> xs(x.size());
    std::vector<int> ys(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        xs[i] = x[order[i]];
        ys[i] = labels[order[i]];
    }

    SvcModel model;
    model.labels = classes;
    model.c = c;
    model.gamma = gamma;

    std::vector<char> used(xs.size(), 0);
    struct RawPair {
        int a, b;
        std::vector<int> subset;  // canonical indices
        BinarySolution sol;
        double sig_a, sig_b;
    };
    std::vector<RawPair> raw;

    for (std::size_t a = 0; a < classes.size(); ++a) {
        for (std::size_t b = a + 1; b < classes.size(); ++b) {
            RawPair rp;
            rp.a = static_cast<int>(a);
            rp.b = static_cast<int>(b);
            for (std::size_t i = 0; i < xs.size(); ++i)
                if (ys[i] == classes[a] || ys[i] == classes[b])
                    rp.subset.push_back(static_cast<int>(i));

            const int l = static_cast<int>(rp.subset.size());
            std::vector<std::vector<double>> sub(l);
            std::vector<int> suby(l);
            int count_a = 0;
            for (int i = 0; i < l; ++i) {
                sub[i] = xs[rp.subset[i]];
                suby[i] = ys[rp.subset[i]] == classes[a] ? +1 : -1;
                count_a += suby[i] > 0;
            }
            const int count_b = l - count_a;

            // out-of-fold decision values for the sigmoid, stratified
            // round-robin folds in canonical order
            const int folds = std::min({5, count_a, count_b});
            std::vector<double> cal_dec;
            std::vector<int> cal_y;
            if (folds >= 2) {
                std::vector<int> fold_of(l);
                int ia = 0, ib = 0;
                for (int i = 0; i < l; ++i)
                    fold_of[i] = suby[i] > 0 ? (ia++ % folds) : (ib++ % folds);
                for (int f = 0; f < folds; ++f) {
                    std::vector<int> tr, te;
                    for (int i = 0; i < l; ++i) (fold_of[i] == f ? te : tr).push_back(i);
                    std::vector<std::vector<double>> xtr(tr.size());
                    std::vector<int> ytr(tr.size());
                    for (std::size_t i = 0; i < tr.size(); ++i) {
                        xtr[i] = sub[tr[i]];
                        ytr[i] = suby[tr[i]];
                    }
                    const auto ktr = rbf_kernel_matrix(xtr, gamma);
                    const auto fold_sol = solve_c_svc(ktr, ytr, c, tol);
                    for (int ti : te) {
                        double dec = -fold_sol.rho;
                        for (std::size_t i = 0; i < tr.size(); ++i)
                            if (fold_sol.alpha[i] > 0)
                                dec += fold_sol.alpha[i] * ytr[i] *
                                       rbf_kernel(xtr[i], sub[ti], gamma);
                        cal_dec.push_back(dec);
                        cal_y.push_back(suby[ti]);
                    }
                }
            }

            const auto kfull = rbf_kernel_matrix(sub, gamma);
            rp.sol = solve_c_svc(kfull, suby, c, tol);

            if (cal_dec.empty()) {
                // too few samples for folds: calibrate on training decisions
                for (int i = 0; i < l; ++i) {
                    double dec = -rp.sol.rho;
                    for (int t = 0; t < l; ++t)
                        if (rp.sol.alpha[t] > 0)
                            dec += rp.sol.alpha[t] * suby[t] * kfull[t][i];
                    cal_dec.push_back(dec);
                    cal_y.push_back(suby[i]);
                }
            }
            std::tie(rp.sig_a, rp.sig_b) = sigmoid_train(cal_dec, cal_y);

            for (int i = 0; i < l; ++i)
                if (rp.sol.alpha[i] > 0) used[rp.subset[i]] = 1;
            raw.push_back(std::move(rp));
        }
    }

    std::vector<int> sv_of(xs.size(), -1);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (used[i]) {
            sv_of[i] = static_cast<int>(model.support_vectors.size());
            model.support_vectors.push_back(xs[i]);
        }
    }

    for (auto& rp : raw) {
        SvcModel::PairModel pm;
        pm.class_a = rp.a;
        pm.class_b = rp.b;
        pm.bias = -rp.sol.rho;
        pm.sigmoid_a = rp.sig_a;
        pm.sigmoid_b = rp.sig_b;
        pm.kkt_gap = rp.sol.kkt_gap;
        for (std::size_t i = 0; i < rp.subset.size(); ++i) {
            if (rp.sol.alpha[i] > 0) {
                pm.sv_index.push_back(sv_of[rp.subset[i]]);
                const int yi = ys[rp.subset[i]] == classes[rp.a] ? +1 : -1;
                pm.coef.push_back(rp.sol.alpha[i] * yi);
            }
        }
        model.pairs.push_back(std::move(pm));
    }

    model.trained = true;
    return model;
}

double decision_value(const SvcModel& model, const SvcModel::PairModel& pair,
                      std::span<const double> x) {
    double dec = pair.bias;
    for (std::size_t i = 0; i < pair.sv_index.size(); ++i)
        dec += pair.coef[i] * rbf_kernel(model.support_vectors[pair.sv_index[i]], x,
                                         model.gamma);
    return dec;
}

std::vector<double> predict_proba(const SvcModel& model, std::span<const double> x) {
    if (!model.trained) throw UntrainedModel("predict_proba on an untrained model");
    const int k = static_cast<int>(model.labels.size());
    std::vector<std::vector<double>> r(k, std::vector<double>(k, 0.0));
    const double min_prob = 1e-7;
    for (const auto& pair : model.pairs) {
        const double dec = decision_value(model, pair, x);
        double pa = sigmoid_predict(dec, pair.sigmoid_a, pair.sigmoid_b);
        pa = std::min(std::max(pa, min_prob), 1.0 - min_prob);
        r[pair.class_a][pair.class_b] = pa;
        r[pair.class_b][pair.class_a] = 1.0 - pa;
    }
    return couple_probabilities(r);
}

int predict_class(const SvcModel& model, std::span<const double> x) {
    const auto p = predict_proba(model, x);
    return model.labels[std::max_element(p.begin(), p.end()) - p.begin()];
}

SvrModel train_svr(const std::vector<std::vector<double>>& x,
                   const std::vector<double>& targets, double c, double gamma, double nu,
                   double tol) {
    require_finite_matrix(x);
    if (targets.size() != x.size()) throw DimensionMismatch("target count");
    if (x.size() < 2) throw EmptyInput("nu-SVR needs at least 2 samples");
    if (!(c > 0.0) || !(gamma > 0.0)) throw NonFinite("C and gamma must be positive");
    if (!(nu > 0.0 && nu < 1.0)) throw NonFinite("nu must lie in (0,1)");
    for (double t : targets)
        if (!std::isfinite(t)) throw NonFinite("non-finite regression target");

    const int l = static_cast<int>(x.size());
    std::vector<int> order(l);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (x[a] != x[b]) return lex_less(x[a], x[b]);
        return targets[a] < targets[b];
    });
    std::vector<std::vector<double>> xs(l);
    std::vector<double> y(l);
    for (int i = 0; i < l; ++i) {
        xs[i] = x[order[i]];
        y[i] = targets[order[i]];
    }

    const auto kernel = rbf_kernel_matrix(xs, gamma);
    // libsvm/scikit convention: per-variable box C, total dual mass C*nu*n
    const double ub = c;

    std::vector<double> bp(l, 0.0), bm(l, 0.0), grad(l);
    double rem = c * nu * l / 2.0;
    for (int i = 0; i < l && rem > 0; ++i) {
        const double a = std::min(rem, ub);
        bp[i] = bm[i] = a;
        rem -= a;
    }
    for (int i = 0; i < l; ++i) grad[i] = -y[i];  // theta starts at zero

    const long max_iter = std::max(10000000L, 200L * l);
    double gap = kInf;
    for (long iter = 0; iter < max_iter; ++iter) {
        int ip = -1, jp = -1, im = -1, jm = -1;
        double pmax = -kInf, pmin = kInf, mmax = -kInf, mmin = kInf;
        for (int t = 0; t < l; ++t) {
            if (bp[t] < ub && -grad[t] > pmax) { pmax = -grad[t]; ip = t; }
            if (bp[t] > 0 && -grad[t] < pmin) { pmin = -grad[t]; jp = t; }
            if (bm[t] < ub && grad[t] > mmax) { mmax = grad[t]; im = t; }
            if (bm[t] > 0 && grad[t] < mmin) { mmin = grad[t]; jm = t; }
        }
        const double viol_p = (ip >= 0 && jp >= 0) ? pmax - pmin : -kInf;
        const double viol_m = (im >= 0 && jm >= 0) ? mmax - mmin : -kInf;
        gap = std::max(viol_p, viol_m);
        if (gap < tol) break;

        if (viol_p >= viol_m) {
            const int i = ip, j = jp;
            double quad = kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j];
            if (quad <= 0) quad = kTau;
            double delta = (grad[j] - grad[i]) / quad;
            delta = std::min({delta, ub - bp[i], bp[j]});
            bp[i] += delta;
            bp[j] -= delta;
            for (int t = 0; t < l; ++t)
                grad[t] += delta * (kernel[t][i] - kernel[t][j]);
        } else {
            const int i = im, j = jm;
            double quad = kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j];
            if (quad <= 0) quad = kTau;
            double delta = (grad[i] - grad[j]) / quad;
            delta = std::min({delta, ub - bm[i], bm[j]});
            bm[i] += delta;
            bm[j] -= delta;
            for (int t = 0; t < l; ++t)
                grad[t] += delta * (kernel[t][j] - kernel[t][i]);
        }
    }

    // b and epsilon from the two groups' free variables
    auto group_rate = [&](const std::vector<double>& beta, double sign) {
        double lo = -kInf, hi = kInf, sum = 0.0;
        int free = 0;
        for (int t = 0; t < l; ++t) {
            const double v = sign * grad[t];
            if (beta[t] <= 0) hi = std::min(hi, v);
            else if (beta[t] >= ub) lo = std::max(lo, v);
            else { ++free; sum += v; }
        }
        if (free > 0) return sum / free;
        if (std::isinf(lo) && std::isinf(hi)) return 0.0;
        if (std::isinf(lo)) return hi;
        if (std::isinf(hi)) return lo;
        return (lo + hi) / 2.0;
    };
    const double r1 = group_rate(bp, -1.0);  // b + eps
    const double r2 = group_rate(bm, +1.0);  // eps - b

    SvrModel model;
    model.c = c;
    model.gamma = gamma;
    model.nu = nu;
    model.bias = (r1 - r2) / 2.0;
    // the primal tube width is non-negative; the midpoint estimate can
    // dip below zero at degenerate vertex solutions
    model.epsilon = std::max(0.0, (r1 + r2) / 2.0);
    model.kkt_gap = std::max(gap, 0.0);
    model.n_train = l;
    model.n_dual_active = 0;
    for (int i = 0; i < l; ++i) {
        if (bp[i] > 0.0 || bm[i] > 0.0) ++model.n_dual_active;
        const double theta = bp[i] - bm[i];
        if (theta != 0.0) {
            model.support_vectors.push_back(xs[i]);
            model.coef.push_back(theta);
        }
    }
    model.trained = true;
    return model;
}

double predict(const SvrModel& model, std::span<const double> x) {
    if (!model.trained) throw UntrainedModel("predict on an untrained model");
    double out = model.bias;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
        out += model.coef[i] * rbf_kernel(model.support_vectors[i], x, model.gamma);
    return out;
}

namespace {

void write_matrix(std::ostream& os, const std::vector<std::vector<double>>& m) {
    io::write_u32(os, static_cast<std::uint32_t>(m.size()));
    io::write_u32(os, m.empty() ? 0 : static_cast<std::uint32_t>(m.front().size()));
    for (const auto& row : m)
        for (double v : row) io::write_f64(os, v);
}

std::vector<std::vector<double>> read_matrix(std::istream& is) {
    const auto n = io::read_u32(is);
    const auto d = io::read_u32(is);
    std::vector<std::vector<double>> m(n, std::vector<double>(d));
    for (auto& row : m)
        for (auto& v : row) v = io::read_f64(is);
    return m;
}

void write_vec(std::ostream& os, const std::vector<double>& v) {
    io::write_u32(os, static_cast<std::uint32_t>(v.size()));
    for (double x : v) io::write_f64(os, x);
}

std::vector<double> read_vec(std::istream& is) {
    std::vector<double> v(io::read_u32(is));
    for (auto& x : v) x = io::read_f64(is);
    return v;
}

}  // namespace

void write_standardizer(std::ostream& os, const Standardizer& s) {
    write_vec(os, s.means);
    write_vec(os, s.stds);
}

Standardizer read_standardizer(std::istream& is) {
    Standardizer s;
    s.means = read_vec(is);
    s.stds = read_vec(is);
    return s;
}

void write_svc(std::ostream& os, const SvcModel& m) {
    io::write_u32(os, static_cast<std::uint32_t>(m.labels.size()));
    for (int v : m.labels) io::write_u32(os, static_cast<std::uint32_t>(v));
    io::write_f64(os, m.c);
    io::write_f64(os, m.gamma);
    write_matrix(os, m.support_vectors);
    io::write_u32(os, static_cast<std::uint32_t>(m.pairs.size()));
    for (const auto& p : m.pairs) {
        io::write_u32(os, static_cast<std::uint32_t>(p.class_a));
        io::write_u32(os, static_cast<std::uint32_t>(p.class_b));
        io::write_u32(os, static_cast<std::uint32_t>(p.sv_index.size()));
        for (int i : p.sv_index) io::write_u32(os, static_cast<std::uint32_t>(i));
        for (double v : p.coef) io::write_f64(os, v);
        io::write_f64(os, p.bias);
        io::write_f64(os, p.sigmoid_a);
        io::write_f64(os, p.sigmoid_b);
        io::write_f64(os, p.kkt_gap);
    }
}

SvcModel read_svc(std::istream& is) {
    SvcModel m;
    m.labels.resize(io::read_u32(is));
    for (auto& v : m.labels) v = static_cast<int>(io::read_u32(is));
    m.c = io::read_f64(is);
    m.gamma = io::read_f64(is);
    m.support_vectors = read_matrix(is);
    m.pairs.resize(io::read_u32(is));
    for (auto& p : m.pairs) {
        p.class_a = static_cast<int>(io::read_u32(is));
        p.class_b = static_cast<int>(io::read_u32(is));
        const auto n = io::read_u32(is);
        p.sv_index.resize(n);
        for (auto& i : p.sv_index) i = static_cast<int>(io::read_u32(is));
        p.coef.resize(n);
        for (auto& v : p.coef) v = io::read_f64(is);
        p.bias = io::read_f64(is);
        p.sigmoid_a = io::read_f64(is);
        p.sigmoid_b = io::read_f64(is);
        p.kkt_gap = io::read_f64(is);
    }
    m.trained = true;
    return m;
}

void write_svr(std::ostream& os, const SvrModel& m) {
    io::write_f64(os, m.c);
    io::write_f64(os, m.gamma);
    io::write_f64(os, m.nu);
    io::write_f64(os, m.bias);
    io::write_f64(os, m.epsilon);
    io::write_f64(os, m.kkt_gap);
    io::write_u32(os, static_cast<std::uint32_t>(m.n_train));
    io::write_u32(os, static_cast<std::uint32_t>(m.n_dual_active));
    write_matrix(os, m.support_vectors);
    write_vec(os, m.coef);
}

SvrModel read_svr(std::istream& is) {
    SvrModel m;
    m.c = io::read_f64(is);
    m.gamma = io::read_f64(is);
    m.nu = io::read_f64(is);
    m.bias = io::read_f64(is);
    m.epsilon = io::read_f64(is);
    m.kkt_gap = io::read_f64(is);
    m.n_train = static_cast<int>(io::read_u32(is));
    m.n_dual_active = static_cast<int>(io::read_u32(is));
    m.support_vectors = read_matrix(is);
    m.coef = read_vec(is);
    m.trained = true;
    return m;
}

}  // namespace ciqa::svm
