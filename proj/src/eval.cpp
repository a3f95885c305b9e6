#include "ciqa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ciqa/errors.hpp"

namespace ciqa::eval {

namespace {

const std::vector<std::string>& canonical_classes() {
    static const std::vector<std::string> classes = {"jp2k", "jpeg", "wn", "gblur"};
    return classes;
}

std::vector<double> average_ranks(std::span<const double> v) {
    const auto n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    const auto n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= n; my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateVariance("constant input to correlation");
    return sxy / std::sqrt(sxx * syy);
}

// counts pairs i<j with v[i] > v[j]
long long merge_count(std::vector<double>& v, std::vector<double>& tmp,
                      std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    long long count = merge_count(v, tmp, lo, mid) + merge_count(v, tmp, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[i] <= v[j]) {
            tmp[k++] = v[i++];
        } else {
            count += static_cast<long long>(mid - i);
            tmp[k++] = v[j++];
        }
    }
    while (i < mid) tmp[k++] = v[i++];
    while (j < hi) tmp[k++] = v[j++];
    std::copy(tmp.begin() + lo, tmp.begin() + hi, v.begin() + lo);
    return count;
}

long long tie_pair_count(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    long long total = 0;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
        const long long t = static_cast<long long>(j - i + 1);
        total += t * (t - 1) / 2;
        i = j + 1;
    }
    return total;
}

double normal_sf_two_sided(double z) {
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

double format_or_nan(const std::map<std::string, double>& m, const std::string& key) {
    auto it = m.find(key);
    return it == m.end() ? std::nan("") : it->second;
}

}  // namespace

double srocc(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw LengthMismatch("srocc inputs differ in length");
    if (x.size() < 3) throw LengthMismatch("srocc needs at least 3 pairs");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

double krocc(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw LengthMismatch("krocc inputs differ in length");
    const auto n = x.size();
    if (n < 2) throw LengthMismatch("krocc needs at least 2 pairs");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });

    const long long n0 = static_cast<long long>(n) * (n - 1) / 2;
    long long n1 = 0, n3 = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
        const long long t = static_cast<long long>(j - i + 1);
        n1 += t * (t - 1) / 2;
        std::size_t a = i;
        while (a <= j) {
            std::size_t b = a;
            while (b + 1 <= j && y[idx[b + 1]] == y[idx[a]]) ++b;
            const long long u = static_cast<long long>(b - a + 1);
            n3 += u * (u - 1) / 2;
            a = b + 1;
        }
        i = j + 1;
    }

    std::vector<double> ys(n), tmp(n);
    for (std::size_t t = 0; t < n; ++t) ys[t] = y[idx[t]];
    const long long swaps = merge_count(ys, tmp, 0, n);
    const long long n2 = tie_pair_count(std::vector<double>(y.begin(), y.end()));

    if (n0 == n1 || n0 == n2) throw DegenerateVariance("constant input to krocc");
    const double num = static_cast<double>(n0 - n1 - n2 + n3 - 2 * swaps);
    const double den =
        std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
    return num / den;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) throw LengthMismatch("accuracy inputs");
    if (predicted.empty()) throw LengthMismatch("accuracy needs at least 1 pair");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double accuracy(const std::vector<std::string>& predicted,
                const std::vector<std::string>& truth) {
    if (predicted.size() != truth.size()) throw LengthMismatch("accuracy inputs");
    if (predicted.empty()) throw LengthMismatch("accuracy needs at least 1 pair");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

WilcoxonOutcome wilcoxon_paired(std::span<const double> a, std::span<const double> b,
                                double alpha) {
    if (a.size() != b.size()) throw LengthMismatch("wilcoxon inputs differ in length");
    std::vector<double> diff;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) diff.push_back(d);
    }
    const int n = static_cast<int>(diff.size());
    if (n == 0) throw AllZeroDifferences("all paired differences are zero");

    std::vector<double> mag(n);
    for (int i = 0; i < n; ++i) mag[i] = std::abs(diff[i]);
    const auto ranks = average_ranks(mag);

    double wplus = 0.0;
    for (int i = 0; i < n; ++i)
        if (diff[i] > 0) wplus += ranks[i];
    const double total = static_cast<double>(n) * (n + 1) / 2.0;
    const double wminus = total - wplus;
    const double wmin = std::min(wplus, wminus);

    double p;
    if (n <= 25) {
        // subset-sum tally over doubled ranks: identical to enumerating
        // all 2^n sign assignments
        std::vector<long long> r2(n);
        long long sum2 = 0;
        for (int i = 0; i < n; ++i) {
            r2[i] = std::llround(2.0 * ranks[i]);
            sum2 += r2[i];
        }
        std::vector<double> counts(sum2 + 1, 0.0);
        counts[0] = 1.0;
        for (int i = 0; i < n; ++i)
            for (long long s = sum2; s >= r2[i]; --s) counts[s] += counts[s - r2[i]];
        const long long w2 = std::llround(2.0 * wmin);
        double tail = 0.0;
        for (long long s = 0; s <= w2 && s <= sum2; ++s) tail += counts[s];
        p = std::min(1.0, 2.0 * tail / std::ldexp(1.0, n));
    } else {
        const double mu = total / 2.0;
        double tie_term = 0.0;
        {
            std::vector<double> sorted_mag = mag;
            std::sort(sorted_mag.begin(), sorted_mag.end());
            std::size_t i = 0;
            while (i < sorted_mag.size()) {
                std::size_t j = i;
                while (j + 1 < sorted_mag.size() && sorted_mag[j + 1] == sorted_mag[i]) ++j;
                const double t = static_cast<double>(j - i + 1);
                tie_term += t * t * t - t;
                i = j + 1;
            }
        }
        const double var =
            static_cast<double>(n) * (n + 1) * (2.0 * n + 1) / 24.0 - tie_term / 48.0;
        double z = wplus - mu;
        z -= 0.5 * (z > 0 ? 1.0 : (z < 0 ? -1.0 : 0.0));
        z /= std::sqrt(var);
        p = std::min(1.0, normal_sf_two_sided(z));
    }

    WilcoxonOutcome out;
    out.statistic = wmin;
    out.p_value = p;
    out.n_effective = n;
    out.reject = p < alpha;
    if (out.reject) {
        double ma = 0, mb = 0;
        for (std::size_t i = 0; i < a.size(); ++i) { ma += a[i]; mb += b[i]; }
        out.direction = ma > mb ? +1 : (mb > ma ? -1 : 0);
    }
    return out;
}

void write_results_csv_header(std::ostream& os) {
    os << "round,test_set,srocc,krocc,accuracy";
    for (const auto& c : canonical_classes()) os << ",srocc_" << c << ",krocc_" << c;
    os << "\n";
}

void write_results_csv_row(std::ostream& os, const RoundResult& r) {
    os << std::setprecision(17);
    os << r.round << ',' << r.test_set << ',' << r.srocc << ',' << r.krocc << ','
       << r.accuracy;
    for (const auto& c : canonical_classes())
        os << ',' << format_or_nan(r.per_class_srocc, c) << ','
           << format_or_nan(r.per_class_krocc, c);
    os << "\n";
}

std::vector<RoundResult> read_results_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open results file " + path);
    std::string line;
    if (!std::getline(is, line)) throw SchemaError("empty results file " + path);

    std::vector<RoundResult> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != 5 + 2 * canonical_classes().size())
            throw SchemaError(path + ":" + std::to_string(lineno) + ": wrong column count");
        RoundResult r;
        r.round = std::stoi(fields[0]);
        r.test_set = fields[1];
        r.srocc = std::strtod(fields[2].c_str(), nullptr);
        r.krocc = std::strtod(fields[3].c_str(), nullptr);
        r.accuracy = std::strtod(fields[4].c_str(), nullptr);
        for (std::size_t c = 0; c < canonical_classes().size(); ++c) {
            const double s = std::strtod(fields[5 + 2 * c].c_str(), nullptr);
            const double k = std::strtod(fields[6 + 2 * c].c_str(), nullptr);
            if (!std::isnan(s)) r.per_class_srocc[canonical_classes()[c]] = s;
            if (!std::isnan(k)) r.per_class_krocc[canonical_classes()[c]] = k;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ComparisonRow> compare_models(const std::vector<RoundResult>& a,
                                          const std::vector<RoundResult>& b,
                                          double alpha) {
    if (a.size() != b.size())
        throw UnpairedRounds("result sets differ in size");

    std::map<std::pair<int, std::string>, const RoundResult*> bmap;
    for (const auto& r : b) bmap[{r.round, r.test_set}] = &r;

    // rounds per test set, in first-appearance order
    std::vector<std::string> test_sets;
    std::map<std::string, std::vector<std::pair<const RoundResult*, const RoundResult*>>>
        grouped;
    for (const auto& r : a) {
        auto it = bmap.find({r.round, r.test_set});
        if (it == bmap.end())
            throw UnpairedRounds("no paired round " + std::to_string(r.round) + " for " +
                                 r.test_set);
        if (grouped.find(r.test_set) == grouped.end()) test_sets.push_back(r.test_set);
        grouped[r.test_set].emplace_back(&r, it->second);
    }

    std::vector<ComparisonRow> rows;
    for (const auto& ts : test_sets) {
        const auto& pairs = grouped[ts];

        struct MetricDef {
            std::string name;
            std::function<double(const RoundResult&)> get;
            bool available = true;
        };
        std::vector<MetricDef> metrics = {
            {"srocc", [](const RoundResult& r) { return r.srocc; }, true},
            {"krocc", [](const RoundResult& r) { return r.krocc; }, true},
            {"accuracy", [](const RoundResult& r) { return r.accuracy; }, true},
        };
        for (const auto& cls : canonical_classes()) {
            for (const char* kind : {"srocc", "krocc"}) {
                const std::string name = std::string(kind) + "_" + cls;
                auto get = [cls, kind](const RoundResult& r) {
                    const auto& m = std::string(kind) == "srocc" ? r.per_class_srocc
                                                                 : r.per_class_krocc;
                    return format_or_nan(m, cls);
                };
                bool available = true;
                for (const auto& [ra, rb] : pairs)
                    if (std::isnan(get(*ra)) || std::isnan(get(*rb))) available = false;
                metrics.push_back({name, get, available});
            }
        }

        for (const auto& metric : metrics) {
            if (!metric.available) continue;
            std::vector<double> va, vb;
            for (const auto& [ra, rb] : pairs) {
                va.push_back(metric.get(*ra));
                vb.push_back(metric.get(*rb));
            }
            ComparisonRow row;
            row.test_set = ts;
            row.metric = metric.name;
            row.mean_a = std::accumulate(va.begin(), va.end(), 0.0) / va.size();
            row.mean_b = std::accumulate(vb.begin(), vb.end(), 0.0) / vb.size();
            try {
                const auto w = wilcoxon_paired(va, vb, alpha);
                row.statistic = w.statistic;
                row.p_value = w.p_value;
                row.n_effective = w.n_effective;
                row.reject = w.reject;
                row.winner = w.reject ? (row.mean_a > row.mean_b ? +1 : -1) : 0;
            } catch (const AllZeroDifferences&) {
                // identical measurements: no decision possible
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows) {
    os << "test_set,metric,mean_a,mean_b,statistic,p_value,n_effective,reject,winner\n";
    os << std::setprecision(17);
    for (const auto& r : rows)
        os << r.test_set << ',' << r.metric << ',' << r.mean_a << ',' << r.mean_b << ','
           << r.statistic << ',' << r.p_value << ',' << r.n_effective << ','
           << (r.reject ? 1 : 0) << ',' << r.winner << "\n";
}

void write_comparison_text(std::ostream& os, const std::vector<ComparisonRow>& rows,
                           const std::string& name_a, const std::string& name_b) {
    std::string current;
    char buf[256];
    for (const auto& r : rows) {
        if (r.test_set != current) {
            current = r.test_set;
            os << "== " << current << " ==\n";
            std::snprintf(buf, sizeof(buf), "%-14s %12s %12s %10s  %s\n", "metric",
                          name_a.c_str(), name_b.c_str(), "p-value", "significant");
            os << buf;
        }
        std::snprintf(buf, sizeof(buf), "%-14s %11.4f%c %11.4f%c %10.4g  %s\n",
                      r.metric.c_str(), r.mean_a, r.winner == +1 ? '*' : ' ', r.mean_b,
                      r.winner == -1 ? '*' : ' ', r.p_value,
                      r.reject ? (r.winner == +1 ? name_a.c_str() : name_b.c_str()) : "-");
        os << buf;
    }
    os << "(* marks the mean favored when the null hypothesis is rejected, p < 0.05)\n";
}

}  // namespace ciqa::eval
