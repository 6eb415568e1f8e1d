// Residualization, percentile binning, binned means with confidence
// intervals, and high-dimensional fixed-effects least squares with
// heteroskedasticity-robust (HC1) standard errors.

#ifndef SNPL_ECONOMETRICS_HPP
#define SNPL_ECONOMETRICS_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "snpl/corpus.hpp"

namespace snpl::econ {

// ---------------------------------------------------------------------------
// Residualization: y_i - mean(y | group_i) + mean(y)
// ---------------------------------------------------------------------------

inline std::vector<double> residualize(const std::vector<double>& y,
                                       const std::vector<int>& group) {
    if (y.size() != group.size())
        throw std::invalid_argument("residualize: size mismatch");
    if (y.empty())
        return {};
    int max_group = 0;
    for (int g : group) {
        if (g < 0)
            throw std::invalid_argument("residualize: every row needs a group key");
        max_group = std::max(max_group, g);
    }
    std::vector<long double> sums(static_cast<std::size_t>(max_group) + 1, 0.0L);
    std::vector<std::size_t> counts(static_cast<std::size_t>(max_group) + 1, 0);
    long double total = 0.0L;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sums[static_cast<std::size_t>(group[i])] += y[i];
        ++counts[static_cast<std::size_t>(group[i])];
        total += y[i];
    }
    const long double overall = total / static_cast<long double>(y.size());
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto g = static_cast<std::size_t>(group[i]);
        const long double gmean = sums[g] / static_cast<long double>(counts[g]);
        out[i] = static_cast<double>(y[i] - gmean + overall);
    }
    return out;
}

inline std::vector<double> residualize(const std::vector<double>& y,
                                       const std::vector<std::string>& group) {
    std::unordered_map<std::string, int> ids;
    std::vector<int> levels(group.size());
    for (std::size_t i = 0; i < group.size(); ++i)
        levels[i] = ids.emplace(group[i], static_cast<int>(ids.size())).first->second;
    return residualize(y, levels);
}

// ---------------------------------------------------------------------------
// Percentile bins
// ---------------------------------------------------------------------------

struct BinScheme {
    std::vector<double> percentiles = {50, 70, 80, 90, 95, 99, 99.9, 99.99};
};

struct BinAssignment {
    struct Bin {
        std::string label;
        double lower = 0.0; // threshold opening the bin (bottom bin: -inf)
        std::size_t count = 0;
        std::vector<std::string> merged_from; // labels collapsed into this bin
    };
    std::vector<Bin> bins;     // effective bins, ascending
    std::vector<int> bin_of;   // per input value, index into bins
    std::vector<std::string> merge_notes;
};

namespace detail {

inline std::string format_pct(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", p);
    return buf;
}

} // namespace detail

// Thresholds by nearest rank; ties at a threshold go to the upper bin,
// except that values equal to the sample minimum always stay in the bottom
// bin (so a mass of zeros sits below the median when the median is zero).
// Threshold collapse merges adjacent bins, reported in merge_notes.
inline BinAssignment percentile_bins(const std::vector<double>& values, const BinScheme& scheme) {
    if (values.empty())
        throw std::invalid_argument("percentile_bins: empty sample");
    for (double v : values)
        if (v < 0.0 || !std::isfinite(v))
            throw std::invalid_argument("percentile_bins: values must be nonnegative finite");
    for (std::size_t i = 1; i < scheme.percentiles.size(); ++i)
        if (!(scheme.percentiles[i] > scheme.percentiles[i - 1]))
            throw std::invalid_argument("percentile_bins: percentiles must increase");
    if (scheme.percentiles.empty())
        throw std::invalid_argument("percentile_bins: empty scheme");

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double min_value = sorted.front();
    const std::size_t k = scheme.percentiles.size();
    std::vector<double> thresholds(k);
    for (std::size_t j = 0; j < k; ++j)
        thresholds[j] = nearest_rank_sorted(sorted, scheme.percentiles[j]);

    BinAssignment out;
    auto& bins = out.bins;
    bins.push_back({"<p" + detail::format_pct(scheme.percentiles[0]),
                    -std::numeric_limits<double>::infinity(),
                    0,
                    {}});
    // group runs of equal thresholds into one effective bin
    std::size_t j = 0;
    while (j < k) {
        std::size_t run_end = j;
        while (run_end + 1 < k && thresholds[run_end + 1] == thresholds[j])
            ++run_end;
        BinAssignment::Bin bin;
        bin.lower = thresholds[j];
        const std::string lo = detail::format_pct(scheme.percentiles[j]);
        if (run_end + 1 < k) {
            bin.label = "p" + lo + "-" + detail::format_pct(scheme.percentiles[run_end + 1]);
        } else {
            bin.label = ">=p" + lo;
        }
        if (run_end > j) {
            for (std::size_t m = j; m <= run_end; ++m) {
                const std::string l = detail::format_pct(scheme.percentiles[m]);
                const std::string u = m + 1 < k ? detail::format_pct(scheme.percentiles[m + 1])
                                                : std::string();
                bin.merged_from.push_back(m + 1 < k ? "p" + l + "-" + u : ">=p" + l);
            }
            out.merge_notes.push_back("threshold collapse at " +
                                      detail::format_pct(bin.lower) + ": merged " +
                                      std::to_string(run_end - j + 1) + " bins into " +
                                      bin.label);
        }
        bins.push_back(std::move(bin));
        j = run_end + 1;
    }

    out.bin_of.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        int assigned = 0;
        if (!(v == min_value && bins.size() > 1 && bins[1].lower == min_value)) {
            for (std::size_t b = 1; b < bins.size(); ++b)
                if (v >= bins[b].lower)
                    assigned = static_cast<int>(b);
        }
        out.bin_of[i] = assigned;
        ++bins[static_cast<std::size_t>(assigned)].count;
    }

    // drop bins that ended up empty (degenerate distributions)
    std::vector<int> remap(bins.size(), -1);
    std::vector<BinAssignment::Bin> kept;
    for (std::size_t b = 0; b < bins.size(); ++b) {
        if (bins[b].count == 0) {
            out.merge_notes.push_back("empty bin dropped: " + bins[b].label);
            continue;
        }
        remap[b] = static_cast<int>(kept.size());
        kept.push_back(std::move(bins[b]));
    }
    for (auto& b : out.bin_of)
        b = remap[static_cast<std::size_t>(b)];
    out.bins = std::move(kept);
    return out;
}

// ---------------------------------------------------------------------------
// Binned means with normal-approximation 95% confidence intervals
// ---------------------------------------------------------------------------

struct BinStats {
    std::size_t n = 0;
    double mean = 0.0;
    std::optional<double> ci_half_width; // null when n < 2
};

inline std::vector<BinStats> binned_means_ci(const std::vector<double>& y,
                                             const std::vector<int>& bin_of,
                                             std::size_t n_bins) {
    if (y.size() != bin_of.size())
        throw std::invalid_argument("binned_means_ci: size mismatch");
    std::vector<long double> sum(n_bins, 0.0L), sum2(n_bins, 0.0L);
    std::vector<std::size_t> count(n_bins, 0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (bin_of[i] < 0)
            continue; // excluded row
        const auto b = static_cast<std::size_t>(bin_of[i]);
        if (b >= n_bins)
            throw std::invalid_argument("binned_means_ci: bin index out of range");
        sum[b] += y[i];
        sum2[b] += static_cast<long double>(y[i]) * y[i];
        ++count[b];
    }
    std::vector<BinStats> out(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        out[b].n = count[b];
        if (count[b] == 0)
            continue;
        const long double n = static_cast<long double>(count[b]);
        const long double mean = sum[b] / n;
        out[b].mean = static_cast<double>(mean);
        if (count[b] >= 2) {
            long double var = (sum2[b] - n * mean * mean) / (n - 1.0L);
            if (var < 0.0L)
                var = 0.0L;
            out[b].ci_half_width =
                static_cast<double>(1.96L * std::sqrt(var) / std::sqrt(n));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// High-dimensional fixed-effects least squares
// ---------------------------------------------------------------------------

struct HdfeOptions {
    double demean_tol = 1e-11; // max absolute group mean at the fixed point
    int max_iterations = 10000;
    double drop_rel_tol = 1e-7; // relative column-norm threshold for drops
    std::vector<double>* demean_trace = nullptr; // max |group mean| per pass
};

struct FitResult {
    std::vector<std::string> names; // kept regressors
    std::vector<double> coef;
    std::vector<double> robust_se;
    std::vector<double> t_stat;
    std::vector<std::string> dropped; // collinear or zero-variance regressors
    std::size_t n_obs = 0;
    std::size_t dof_k = 0; // regressors + absorbed FE levels (+ intercept)
    double r2_within = 0.0;
    int demean_iterations = 0;

    std::optional<double> coefficient(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name)
                return coef[i];
        return std::nullopt;
    }
    std::optional<double> se(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name)
                return robust_se[i];
        return std::nullopt;
    }
};

namespace detail {

// Distinct levels, remapped to 0..L-1.
inline std::vector<int> compact_levels(const std::vector<int>& levels, std::size_t& n_levels) {
    std::unordered_map<int, int> map;
    std::vector<int> out(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i)
        out[i] = map.emplace(levels[i], static_cast<int>(map.size())).first->second;
    n_levels = map.size();
    return out;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

// Absorbed parameter count: exact for one or two FE sets (mobility groups via
// union-find), plus (levels - 1) for each additional set; one absorbed
// intercept is counted separately by the caller.
inline std::size_t absorbed_dof(const std::vector<std::vector<int>>& fe,
                                const std::vector<std::size_t>& n_levels) {
    if (fe.empty())
        return 0;
    if (fe.size() == 1)
        return n_levels[0] - 1;
    UnionFind uf(n_levels[0] + n_levels[1]);
    for (std::size_t i = 0; i < fe[0].size(); ++i)
        uf.unite(fe[0][i], static_cast<int>(n_levels[0]) + fe[1][i]);
    std::vector<bool> seen(n_levels[0] + n_levels[1], false);
    std::size_t components = 0;
    for (std::size_t i = 0; i < fe[0].size(); ++i) {
        const int r = uf.find(fe[0][i]);
        if (!seen[static_cast<std::size_t>(r)]) {
            seen[static_cast<std::size_t>(r)] = true;
            ++components;
        }
    }
    std::size_t k = n_levels[0] + n_levels[1] - components - 1; // minus intercept
    for (std::size_t s = 2; s < fe.size(); ++s)
        k += n_levels[s] - 1;
    return k;
}

} // namespace detail

// Least squares of y on the named regressors after absorbing every FE set by
// alternating within-group demeaning. Collinear regressors (zero variance
// after absorption, or rank-deficient) are dropped and reported. Standard
// errors are HC1 with k counting the absorbed FE levels.
inline FitResult hdfe_ols(const std::vector<double>& y, const std::vector<std::string>& names,
                          const std::vector<std::vector<double>>& regressors,
                          const std::vector<std::vector<int>>& fe_sets,
                          const HdfeOptions& opt = HdfeOptions{}) {
    const std::size_t n = y.size();
    if (names.size() != regressors.size())
        throw std::invalid_argument("hdfe_ols: names/regressors mismatch");
    for (const auto& col : regressors)
        if (col.size() != n)
            throw std::invalid_argument("hdfe_ols: regressor length mismatch");
    for (const auto& fe : fe_sets)
        if (fe.size() != n)
            throw std::invalid_argument("hdfe_ols: FE length mismatch");
    if (n == 0)
        throw std::invalid_argument("hdfe_ols: empty panel");
    for (const auto& col : regressors)
        for (double v : col)
            if (!std::isfinite(v))
                throw std::invalid_argument("hdfe_ols: non-finite regressor value");

    // Compact FE levels; with no FE sets absorb a single constant group.
    std::vector<std::vector<int>> fe;
    std::vector<std::size_t> n_levels;
    if (fe_sets.empty()) {
        fe.emplace_back(n, 0);
        n_levels.push_back(1);
    } else {
        for (const auto& set : fe_sets) {
            std::size_t L = 0;
            fe.push_back(detail::compact_levels(set, L));
            n_levels.push_back(L);
        }
    }

    // Working copies.
    std::vector<std::vector<double>> cols = regressors;
    cols.push_back(y); // demean y alongside
    std::vector<double> pre_norm(cols.size(), 0.0);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        long double s = 0;
        for (double v : cols[c])
            s += static_cast<long double>(v) * v;
        pre_norm[c] = static_cast<double>(std::sqrt(s / static_cast<long double>(n)));
    }

    FitResult fit;
    fit.n_obs = n;

    // Alternating projections until every group mean is below tolerance.
    std::vector<std::vector<long double>> sums(fe.size());
    std::vector<std::vector<std::size_t>> counts(fe.size());
    for (std::size_t s = 0; s < fe.size(); ++s) {
        sums[s].resize(n_levels[s]);
        counts[s].assign(n_levels[s], 0);
        for (std::size_t i = 0; i < n; ++i)
            ++counts[s][static_cast<std::size_t>(fe[s][i])];
    }
    int iterations = 0;
    while (iterations < opt.max_iterations) {
        ++iterations;
        long double max_dev = 0.0L;
        for (std::size_t s = 0; s < fe.size(); ++s) {
            for (auto& col : cols) {
                std::fill(sums[s].begin(), sums[s].end(), 0.0L);
                for (std::size_t i = 0; i < n; ++i)
                    sums[s][static_cast<std::size_t>(fe[s][i])] += col[i];
                for (std::size_t g = 0; g < n_levels[s]; ++g) {
                    sums[s][g] /= static_cast<long double>(counts[s][g]);
                    const long double dev = sums[s][g] < 0 ? -sums[s][g] : sums[s][g];
                    if (dev > max_dev)
                        max_dev = dev;
                }
                for (std::size_t i = 0; i < n; ++i)
                    col[i] = static_cast<double>(col[i] -
                                                 sums[s][static_cast<std::size_t>(fe[s][i])]);
            }
        }
        if (opt.demean_trace)
            opt.demean_trace->push_back(static_cast<double>(max_dev));
        if (max_dev < opt.demean_tol)
            break;
    }
    fit.demean_iterations = iterations;

    // Zero-variance columns after absorption are collinear with the FEs.
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c + 1 < cols.size(); ++c) {
        long double s = 0;
        for (double v : cols[c])
            s += static_cast<long double>(v) * v;
        const double rms = static_cast<double>(std::sqrt(s / static_cast<long double>(n)));
        if (rms < opt.drop_rel_tol * (pre_norm[c] + 1.0))
            fit.dropped.push_back(names[c]);
        else
            kept.push_back(c);
    }

    // Rank-revealing QR on the demeaned regressors drops the rest.
    Eigen::VectorXd ydm(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        ydm(static_cast<Eigen::Index>(i)) = cols.back()[i];
    while (!kept.empty()) {
        Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kept.size()));
        for (std::size_t c = 0; c < kept.size(); ++c)
            for (std::size_t i = 0; i < n; ++i)
                X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = cols[kept[c]][i];
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        qr.setThreshold(1e-10);
        const auto rank = static_cast<std::size_t>(qr.rank());
        if (rank == kept.size()) {
            const Eigen::VectorXd beta = qr.solve(ydm);
            const Eigen::VectorXd resid = ydm - X * beta;

            const std::size_t m = kept.size();
            fit.dof_k = m + 1 + detail::absorbed_dof(fe, n_levels);
            if (fit.n_obs <= fit.dof_k)
                throw std::invalid_argument("hdfe_ols: more parameters than observations");

            const Eigen::MatrixXd xtx_inv =
                (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(
                    static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)));
            Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                                         static_cast<Eigen::Index>(m));
            for (std::size_t i = 0; i < n; ++i) {
                const auto xi = X.row(static_cast<Eigen::Index>(i));
                meat.noalias() += resid(static_cast<Eigen::Index>(i)) *
                                  resid(static_cast<Eigen::Index>(i)) *
                                  (xi.transpose() * xi);
            }
            const double dof_factor = static_cast<double>(n) /
                                      (static_cast<double>(n) - static_cast<double>(fit.dof_k));
            const Eigen::MatrixXd vcov = dof_factor * xtx_inv * meat * xtx_inv;

            const double sst = ydm.squaredNorm();
            const double ssr = resid.squaredNorm();
            fit.r2_within = sst > 0 ? 1.0 - ssr / sst : 0.0;
            for (std::size_t c = 0; c < m; ++c) {
                fit.names.push_back(names[kept[c]]);
                fit.coef.push_back(beta(static_cast<Eigen::Index>(c)));
                const double se =
                    std::sqrt(std::max(0.0, vcov(static_cast<Eigen::Index>(c),
                                                 static_cast<Eigen::Index>(c))));
                fit.robust_se.push_back(se);
                fit.t_stat.push_back(se > 0 ? fit.coef.back() / se : 0.0);
            }
            return fit;
        }
        // rank deficient: drop the least-pivoted column and retry
        const auto perm = qr.colsPermutation().indices();
        const std::size_t victim =
            static_cast<std::size_t>(perm(static_cast<Eigen::Index>(kept.size() - 1)));
        fit.dropped.push_back(names[kept[victim]]);
        kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(victim));
    }

    // Everything dropped: still report degrees of freedom and residual stats.
    fit.dof_k = 1 + detail::absorbed_dof(fe, n_levels);
    fit.r2_within = 0.0;
    return fit;
}

// ---------------------------------------------------------------------------
// Elasticity table
// ---------------------------------------------------------------------------

struct ReportColumn {
    std::string title;
    const FitResult* fit = nullptr;
};

// Coefficients with t-statistics in parentheses, one column per
// specification; dropped regressors show a dash.
inline std::string elasticity_report(const std::vector<ReportColumn>& columns) {
    std::vector<std::string> rows;
    for (const auto& col : columns) {
        for (const auto& name : col.fit->names)
            if (std::find(rows.begin(), rows.end(), name) == rows.end())
                rows.push_back(name);
        for (const auto& name : col.fit->dropped)
            if (std::find(rows.begin(), rows.end(), name) == rows.end())
                rows.push_back(name);
    }
    std::ostringstream os;
    auto cell = [&](const std::string& s) {
        os << ' ';
        for (std::size_t pad = s.size(); pad < 12; ++pad)
            os << ' ';
        os << s;
    };
    cell("");
    for (const auto& col : columns)
        cell(col.title);
    os << '\n';
    char buf[64];
    for (const auto& name : rows) {
        cell(name);
        for (const auto& col : columns) {
            const bool dropped = std::find(col.fit->dropped.begin(), col.fit->dropped.end(),
                                           name) != col.fit->dropped.end();
            if (dropped) {
                cell("-");
                continue;
            }
            const auto c = col.fit->coefficient(name);
            if (!c) {
                cell("");
                continue;
            }
            std::snprintf(buf, sizeof buf, "%.4f", *c);
            cell(buf);
        }
        os << '\n';
        cell("");
        for (const auto& col : columns) {
            const auto c = col.fit->coefficient(name);
            const auto se = col.fit->se(name);
            if (!c || !se || *se <= 0) {
                cell("");
                continue;
            }
            std::snprintf(buf, sizeof buf, "(%.1f)", *c / *se);
            cell(buf);
        }
        os << '\n';
    }
    cell("n");
    for (const auto& col : columns)
        cell(std::to_string(col.fit->n_obs));
    os << '\n';
    cell("r2_within");
    for (const auto& col : columns) {
        std::snprintf(buf, sizeof buf, "%.4f", col.fit->r2_within);
        cell(buf);
    }
    os << '\n';
    return os.str();
}

} // namespace snpl::econ

#endif // SNPL_ECONOMETRICS_HPP
