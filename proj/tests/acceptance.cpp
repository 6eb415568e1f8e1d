// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance is pinned in code.

#include <Eigen/Dense>

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "snpl/econometrics.hpp"
#include "snpl/frontier.hpp"
#include "snpl/match.hpp"
#include "snpl/metrics.hpp"
#include "snpl/pipeline.hpp"
#include "snpl/synth.hpp"

namespace fs = std::filesystem;
using namespace snpl;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] %2d. %-28s %s\n", ok ? "PASS" : "FAIL", criterion, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!ok)
        ++g_failures;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. matching oracle + 7. selection-curve shape (share one large corpus)
// ---------------------------------------------------------------------------

synth::SynthConfig large_corpus_config() {
    synth::SynthConfig cfg;
    cfg.seed = 20240811;
    cfg.n_pubs = 100000;
    cfg.n_families = 20000;
    cfg.snpl_share = 0.55;
    cfg.max_refs_per_family = 5;
    return cfg;
}

struct MatchRun {
    synth::SynthResult synth;
    match::LinkResult links;
    match::EvalResult eval;
};

MatchRun run_matching(const synth::SynthConfig& cfg, int threshold) {
    MatchRun run{synth::generate(cfg), {}, {}};
    const auto index = match::build_index(run.synth.corpus.publications);
    match::MatchConfig mcfg;
    mcfg.threshold = threshold;
    const auto t0 = std::chrono::steady_clock::now();
    run.links = match::link_references(run.synth.corpus, index, mcfg);
    (void)t0;
    run.eval = match::evaluate_matching(run.links.candidates, run.synth.corpus.gold_links,
                                        threshold);
    return run;
}

MatchRun criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();

    auto clean_cfg = large_corpus_config();
    auto clean = run_matching(clean_cfg, 3);
    bool exact = clean.eval.at_threshold.precision &&
                 *clean.eval.at_threshold.precision == 1.0 &&
                 clean.eval.at_threshold.recall == 1.0;
    for (const auto& pt : clean.eval.curve) // perfect at every threshold <= 6
        if (!pt.precision || *pt.precision != 1.0 || pt.recall != 1.0)
            exact = false;

    auto noisy_cfg = large_corpus_config();
    noisy_cfg.seed = 20240812;
    noisy_cfg.corruption = synth::Corruption::uniform_drop(0.15);
    const auto noisy = run_matching(noisy_cfg, 3);
    // Precision is judged at one-link resolution: raising the threshold can
    // only remove links, and removing a correct link lowers precision by
    // less than 1/n_links without changing the tradeoff shape.
    bool monotone = true;
    double max_dip = 0.0;
    for (std::size_t t = 1; t < noisy.eval.curve.size(); ++t) {
        const auto& prev = noisy.eval.curve[t - 1];
        const auto& cur = noisy.eval.curve[t];
        if (cur.recall > prev.recall + 1e-12)
            monotone = false;
        if (prev.precision && cur.precision) {
            const double granularity =
                1.0 / static_cast<double>(std::max<std::size_t>(1, cur.n_links));
            max_dip = std::max(max_dip, *prev.precision - *cur.precision);
            if (*cur.precision < *prev.precision - granularity)
                monotone = false;
        }
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = seconds < 60.0;
    report(1, "matching oracle",
           exact && monotone && in_time,
           fmt("clean P=%.4f R=%.4f; noisy curve monotone=%s (max dip %.1e); %.1fs "
               "(< 60s: %s)",
               clean.eval.at_threshold.precision ? *clean.eval.at_threshold.precision : -1.0,
               clean.eval.at_threshold.recall, monotone ? "yes" : "no", max_dip, seconds,
               in_time ? "yes" : "no"));
    return clean;
}

// ---------------------------------------------------------------------------
// 2. scoring exhaustiveness and the acceptance boundary
// ---------------------------------------------------------------------------

void criterion_2() {
    Publication pub;
    pub.pub_id = "P";
    pub.year = 1987;
    pub.volume = "14";
    pub.first_page = "233";
    pub.first_author_surname = "Okabe";
    pub.journal_title = "Acta Metallurgica";
    pub.title = "Rotor blade fatigue";
    const char* fragments[6] = {"1987",     "vol. 14",           "p. 233",
                                "Okabe Q.", "Acta Metallurgica", "Rotor blade fatigue"};
    bool all_popcount = true;
    for (unsigned mask = 0; mask < 64 && all_popcount; ++mask) {
        std::string raw = "cited document";
        int expected = 0;
        for (unsigned bit = 0; bit < 6; ++bit)
            if (mask & (1u << bit)) {
                raw += ", ";
                raw += fragments[bit];
                ++expected;
            }
        match::ParsedReference ref;
        ref.raw = raw;
        ref.raw_normalized = text::normalize(raw);
        ref.is_target = true;
        const auto scored = match::score_match(ref, pub);
        if (scored.quality_score != expected)
            all_popcount = false;
        for (unsigned bit = 0; bit < 6; ++bit)
            if (scored.indicators[bit] != ((mask >> bit) & 1u))
                all_popcount = false;
    }

    // boundary: a top candidate scoring 2 is rejected, scoring 3 accepted
    Corpus corpus;
    corpus.publications.push_back(pub);
    corpus.publications[0].author_surnames = {"okabe"};
    PatentFamily fam;
    fam.family_id = "F";
    fam.first_filing_year = 1990;
    fam.tech_field = 1;
    fam.n_inventors = 1;
    fam.npl_strings = {"Acta Metallurgica, 1987",          // journal + year: 2
                       "Okabe Q., Acta Metallurgica, 1987"}; // + author: 3
    corpus.families.push_back(fam);
    corpus.rebuild_indexes();
    const auto index = match::build_index(corpus.publications);
    const auto result = match::link_references(corpus, index, match::MatchConfig{});
    const bool boundary = result.candidates.size() == 2 &&
                          result.candidates[0].quality_score == 2 &&
                          result.candidates[1].quality_score == 3 &&
                          result.links.size() == 1 && result.links[0].npl_index == 1;

    report(2, "scoring exhaustiveness", all_popcount && boundary,
           fmt("64 patterns popcount=%s; boundary 2->reject 3->accept=%s",
               all_popcount ? "yes" : "no", boundary ? "yes" : "no"));
}

// ---------------------------------------------------------------------------
// 3. residualization at scale
// ---------------------------------------------------------------------------

void criterion_3() {
    const auto worked = econ::residualize({1, 3, 5, 7},
                                          std::vector<std::string>{"A", "A", "B", "B"});
    const bool example_ok = worked == std::vector<double>{3, 5, 3, 5};

    const std::size_t n = 1000000;
    const int groups = 1000;
    std::mt19937_64 rng(99);
    std::vector<double> y(n);
    std::vector<int> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = static_cast<int>(rng() % groups);
        y[i] = static_cast<double>(rng() % 10007) / 100.0 + 3.0 * g[i];
    }
    long double total = 0;
    for (double v : y)
        total += v;
    const double overall = static_cast<double>(total / static_cast<long double>(n));

    const auto out = econ::residualize(y, g);
    std::vector<long double> gsum(groups, 0);
    std::vector<std::size_t> gcnt(groups, 0);
    for (std::size_t i = 0; i < n; ++i) {
        gsum[static_cast<std::size_t>(g[i])] += out[i];
        ++gcnt[static_cast<std::size_t>(g[i])];
    }
    double worst = 0;
    for (int k = 0; k < groups; ++k) {
        const double gmean = static_cast<double>(
            gsum[static_cast<std::size_t>(k)] /
            static_cast<long double>(gcnt[static_cast<std::size_t>(k)]));
        worst = std::max(worst, std::abs(gmean - overall));
    }
    report(3, "residualization", example_ok && worst < 1e-10,
           fmt("worked example=%s; 1e6x1e3 max |group mean - overall| = %.2e (< 1e-10)",
               example_ok ? "yes" : "no", worst));
}

// ---------------------------------------------------------------------------
// 4. HDFE vs dense dummy OLS
// ---------------------------------------------------------------------------

struct DenseFit {
    std::vector<double> coef;
    std::vector<double> hc1_se;
    std::size_t k = 0;
};

bool dense_dummy_ols(const std::vector<double>& y,
                     const std::vector<std::vector<double>>& regressors,
                     const std::vector<std::vector<int>>& fe_sets, DenseFit& out) {
    const auto n = static_cast<Eigen::Index>(y.size());
    const std::size_t m = regressors.size();
    std::vector<std::size_t> levels;
    for (const auto& fe : fe_sets) {
        std::size_t L = 0;
        for (int g : fe)
            L = std::max<std::size_t>(L, static_cast<std::size_t>(g) + 1);
        levels.push_back(L);
    }
    Eigen::Index cols = static_cast<Eigen::Index>(m);
    for (std::size_t s = 0; s < fe_sets.size(); ++s)
        cols += static_cast<Eigen::Index>(levels[s] - (s == 0 ? 0 : 1));
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, cols);
    for (std::size_t c = 0; c < m; ++c)
        for (Eigen::Index i = 0; i < n; ++i)
            X(i, static_cast<Eigen::Index>(c)) = regressors[c][static_cast<std::size_t>(i)];
    Eigen::Index offset = static_cast<Eigen::Index>(m);
    for (std::size_t s = 0; s < fe_sets.size(); ++s) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const int g = fe_sets[s][static_cast<std::size_t>(i)];
            if (s == 0)
                X(i, offset + g) = 1.0;
            else if (g >= 1)
                X(i, offset + g - 1) = 1.0;
        }
        offset += static_cast<Eigen::Index>(levels[s] - (s == 0 ? 0 : 1));
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-9);
    if (qr.rank() < cols)
        return false;
    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i)
        yv(i) = y[static_cast<std::size_t>(i)];
    const Eigen::VectorXd beta = qr.solve(yv);
    const Eigen::VectorXd resid = yv - X * beta;
    const Eigen::MatrixXd xtx_inv =
        (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(cols, cols));
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(cols, cols);
    for (Eigen::Index i = 0; i < n; ++i)
        meat.noalias() += resid(i) * resid(i) * (X.row(i).transpose() * X.row(i));
    const double factor =
        static_cast<double>(n) / (static_cast<double>(n) - static_cast<double>(cols));
    const Eigen::MatrixXd vcov = factor * xtx_inv * meat * xtx_inv;
    out.coef.clear();
    out.hc1_se.clear();
    for (std::size_t c = 0; c < m; ++c) {
        out.coef.push_back(beta(static_cast<Eigen::Index>(c)));
        out.hc1_se.push_back(
            std::sqrt(vcov(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c))));
    }
    out.k = static_cast<std::size_t>(cols);
    return true;
}

void criterion_4() {
    std::mt19937_64 rng(777);
    auto normal = [&rng]() {
        static std::normal_distribution<double> d(0, 1);
        return d(rng);
    };
    int done = 0;
    double worst_coef = 0, worst_se = 0;
    bool dof_ok = true;
    while (done < 200) {
        const std::size_t n = 60 + rng() % 441; // up to 500
        const std::size_t m = 1 + rng() % 3;
        const std::size_t n_sets = 1 + rng() % 3;
        std::vector<std::vector<int>> fe(n_sets);
        for (std::size_t s = 0; s < n_sets; ++s) {
            const std::size_t L = 2 + rng() % 19; // up to 20 groups
            fe[s].resize(n);
            for (std::size_t i = 0; i < n; ++i)
                fe[s][i] = static_cast<int>(rng() % L);
            for (std::size_t g = 0; g < L; ++g)
                fe[s][g % n] = static_cast<int>(g);
        }
        std::vector<std::vector<double>> X(m, std::vector<double>(n));
        std::vector<std::string> names;
        for (std::size_t c = 0; c < m; ++c) {
            names.push_back("x" + std::to_string(c));
            for (std::size_t i = 0; i < n; ++i)
                X[c][i] = normal();
        }
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = normal() * (1.0 + 0.3 * (i % 3)); // heteroskedastic
            for (std::size_t c = 0; c < m; ++c)
                y[i] += (0.5 + static_cast<double>(c)) * X[c][i];
            for (std::size_t s = 0; s < n_sets; ++s)
                y[i] += 0.6 * fe[s][i];
        }
        DenseFit oracle;
        if (!dense_dummy_ols(y, X, fe, oracle))
            continue; // disconnected FE draw
        ++done;
        const auto fit = econ::hdfe_ols(y, names, X, fe);
        if (fit.names.size() != m || fit.dof_k != oracle.k) {
            dof_ok = false;
            continue;
        }
        for (std::size_t c = 0; c < m; ++c) {
            worst_coef = std::max(worst_coef, std::abs(fit.coef[c] - oracle.coef[c]));
            worst_se = std::max(worst_se, std::abs(fit.robust_se[c] - oracle.hc1_se[c]));
        }
    }
    report(4, "hdfe correctness", dof_ok && worst_coef < 1e-8 && worst_se < 1e-8,
           fmt("200 instances; max |coef diff| = %.2e, max |HC1 diff| = %.2e (< 1e-8), "
               "dof match=%s",
               worst_coef, worst_se, dof_ok ? "yes" : "no"));
}

// ---------------------------------------------------------------------------
// 5. planted-elasticity recovery
// ---------------------------------------------------------------------------

econ::FitResult fit_value_model(const synth::SynthResult& result) {
    const auto& corpus = result.corpus;
    std::vector<double> y, has, logq;
    std::vector<std::string> fe_keys;
    for (std::size_t f = 0; f < corpus.families.size(); ++f) {
        const auto& fam = corpus.families[f];
        y.push_back(std::log1p(*fam.monetary_value_usd));
        const bool h = result.q_max_true[f] >= 0.0;
        has.push_back(h ? 1.0 : 0.0);
        logq.push_back(h ? std::log1p(result.q_max_true[f]) : 0.0);
        fe_keys.push_back(std::to_string(fam.tech_field) + "|" +
                          std::to_string(fam.first_filing_year));
    }
    std::unordered_map<std::string, int> ids;
    std::vector<int> fe(fe_keys.size());
    for (std::size_t i = 0; i < fe_keys.size(); ++i)
        fe[i] = ids.emplace(fe_keys[i], static_cast<int>(ids.size())).first->second;
    return econ::hdfe_ols(y, {"has_snpl", "log_q"}, {has, logq}, {fe});
}

void criterion_5() {
    synth::SynthConfig base;
    base.n_pubs = 4000;
    base.n_families = 2000;

    int covered = 0;
    for (int s = 0; s < 100; ++s) {
        auto cfg = base;
        cfg.seed = 51000 + static_cast<std::uint64_t>(s);
        cfg.planted_beta = 0.05;
        const auto fit = fit_value_model(synth::generate(cfg));
        const auto b = fit.coefficient("log_q");
        const auto se = fit.se("log_q");
        if (b && se && *b - 1.96 * *se <= 0.05 && *b + 1.96 * *se >= 0.05)
            ++covered;
    }

    int rejected = 0;
    for (int s = 0; s < 100; ++s) {
        auto cfg = base;
        cfg.seed = 52000 + static_cast<std::uint64_t>(s);
        cfg.planted_beta = 0.0;
        const auto fit = fit_value_model(synth::generate(cfg));
        const auto b = fit.coefficient("log_q");
        const auto se = fit.se("log_q");
        if (b && se && std::abs(*b / *se) > 1.96)
            ++rejected;
    }
    const bool ok = covered >= 90 && rejected >= 2 && rejected <= 10;
    report(5, "planted-elasticity recovery", ok,
           fmt("beta=0.05 CI coverage %d/100 (>= 90); beta=0 rejections %d/100 (2..10)",
               covered, rejected));
}

// ---------------------------------------------------------------------------
// 6. frontier oracle
// ---------------------------------------------------------------------------

void criterion_6() {
    std::mt19937_64 rng(606);
    bool all_dist = true, all_quality = true;
    const int inf = 1 << 28;
    for (int iter = 0; iter < 100; ++iter) {
        const int n = 20 + static_cast<int>(rng() % 181); // up to 200
        std::vector<PatentFamily> families;
        for (int i = 0; i < n; ++i) {
            PatentFamily f;
            f.family_id = "N" + std::to_string(i);
            f.first_filing_year = 2000;
            f.tech_field = 1;
            f.n_inventors = 1;
            families.push_back(std::move(f));
        }
        const double edge_prob = 2.5 / n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && (rng() % 1000) < edge_prob * 1000)
                    families[static_cast<std::size_t>(i)].backward_patent_refs.push_back(
                        "N" + std::to_string(j));
        std::vector<bool> is_frontier(static_cast<std::size_t>(n), false);
        std::vector<std::optional<double>> quality(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            if (rng() % 100 < 15) {
                is_frontier[static_cast<std::size_t>(i)] = true;
                quality[static_cast<std::size_t>(i)] = static_cast<double>(rng() % 1000);
            }
        if (std::none_of(is_frontier.begin(), is_frontier.end(), [](bool b) { return b; })) {
            is_frontier[0] = true;
            quality[0] = 7.0;
        }

        const auto g = frontier::build_graph(families);
        const auto dist = frontier::frontier_distance(g, is_frontier);
        const auto inherited = frontier::propagate_quality(g, dist, quality);

        // Floyd-Warshall all-pairs oracle
        std::vector<std::vector<int>> d(static_cast<std::size_t>(n),
                                        std::vector<int>(static_cast<std::size_t>(n), inf));
        for (int i = 0; i < n; ++i)
            d[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 0;
        for (int i = 0; i < n; ++i)
            for (const auto j : g.cites[static_cast<std::size_t>(i)])
                d[static_cast<std::size_t>(i)][j] = 1;
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (d[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                            d[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] <
                        d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
                        d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                            d[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                            d[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];

        for (int v = 0; v < n; ++v) {
            int best = inf;
            for (int f = 0; f < n; ++f)
                if (is_frontier[static_cast<std::size_t>(f)])
                    best = std::min(best, d[static_cast<std::size_t>(v)][static_cast<std::size_t>(f)]);
            const int expect = best == inf ? frontier::kUnreachable : best;
            if (dist[static_cast<std::size_t>(v)] != expect)
                all_dist = false;
            if (best == inf) {
                if (inherited[static_cast<std::size_t>(v)].has_value())
                    all_quality = false;
                continue;
            }
            // enumerate the shortest-path DAG from v and collect frontier quality
            std::optional<double> want;
            std::vector<int> stack = {v};
            std::vector<bool> seen(static_cast<std::size_t>(n), false);
            seen[static_cast<std::size_t>(v)] = true;
            auto dist_of = [&](int x) {
                int b = inf;
                for (int f = 0; f < n; ++f)
                    if (is_frontier[static_cast<std::size_t>(f)])
                        b = std::min(b, d[static_cast<std::size_t>(x)][static_cast<std::size_t>(f)]);
                return b;
            };
            while (!stack.empty()) {
                const int x = stack.back();
                stack.pop_back();
                const int dx = dist_of(x);
                if (dx == 0) {
                    const double q = *quality[static_cast<std::size_t>(x)];
                    if (!want || q > *want)
                        want = q;
                    continue;
                }
                for (const auto y : g.cites[static_cast<std::size_t>(x)])
                    if (dist_of(static_cast<int>(y)) == dx - 1 && !seen[y]) {
                        seen[y] = true;
                        stack.push_back(static_cast<int>(y));
                    }
            }
            if (inherited[static_cast<std::size_t>(v)] != want)
                all_quality = false;
        }
    }
    report(6, "frontier oracle", all_dist && all_quality,
           fmt("100 digraphs <= 200 nodes; distances exact=%s, propagation exact=%s",
               all_dist ? "yes" : "no", all_quality ? "yes" : "no"));
}

// ---------------------------------------------------------------------------
// 7. selection-curve shape (uses the criterion-1 clean corpus)
// ---------------------------------------------------------------------------

void criterion_7(const MatchRun& clean) {
    const auto& corpus = clean.synth.corpus;
    metrics::MetricsConfig mcfg;
    const auto tallies = metrics::CitationTallies::build(corpus, mcfg);

    std::unordered_map<std::string, std::vector<std::string>> linkers;
    for (const auto& link : clean.links.links)
        linkers[link.pub_id].push_back(link.family_id);

    std::vector<double> cit, linked;
    for (std::size_t i = 0; i < corpus.publications.size(); ++i) {
        cit.push_back(static_cast<double>(tallies.cit3y(i)));
        const auto it = linkers.find(corpus.publications[i].pub_id);
        linked.push_back(it != linkers.end() && !it->second.empty() ? 1.0 : 0.0);
    }
    const auto assignment = econ::percentile_bins(cit, econ::BinScheme{});
    const auto share = econ::binned_means_ci(linked, assignment.bin_of, assignment.bins.size());

    bool zero_bottom = share[0].n > 0 && share[0].mean == 0.0;
    // strictly increasing until the share saturates at 1
    bool increasing = true;
    std::string shares;
    for (std::size_t b = 0; b < share.size(); ++b) {
        if (share[b].n == 0) {
            increasing = false;
            continue;
        }
        shares += fmt("%s%.3f", shares.empty() ? "" : " < ", share[b].mean);
        if (b > 0 && share[b].mean <= share[b - 1].mean && share[b - 1].mean < 1.0)
            increasing = false;
        if (b > 0 && share[b].mean < share[b - 1].mean)
            increasing = false;
    }
    report(7, "selection-curve shape", zero_bottom && increasing && share.size() == 9,
           fmt("shares [%s]; bottom zero=%s; bins=%zu (want 9)", shares.c_str(),
               zero_bottom ? "yes" : "no", share.size()));
}

// ---------------------------------------------------------------------------
// 8. quality-value curve shape (full pipeline on a planted-beta corpus)
// ---------------------------------------------------------------------------

void criterion_8() {
    PipelineConfig cfg;
    cfg.synth.seed = 808;
    cfg.synth.n_pubs = 30000;
    cfg.synth.n_families = 12000;
    cfg.synth.planted_beta = 0.40;
    cfg.synth.selection_weight_power = 0.8; // spread q_max over the bins
    cfg.synth.citation_cap = 300;
    cfg.synth.max_refs_per_family = 3;
    cfg.regression.value_measure = "monetary_usd";
    cfg.bins.percentiles = {50, 70, 80, 90, 95};

    const auto root = fs::temp_directory_path() / "snpl_acceptance_c8";
    fs::remove_all(root);
    const pipeline::Workspace ws{root};
    pipeline::run_synth(ws, cfg);
    pipeline::run_ingest(ws, cfg);
    pipeline::run_match(ws, cfg);
    pipeline::run_metrics(ws, cfg);
    pipeline::run_residualize(ws, cfg);
    pipeline::run_bins(ws, cfg);

    // read the binned curve and the no-SNPL baseline
    const auto resid = artifacts::read_resid(ws.resid());
    std::vector<double> baseline;
    for (const auto& r : resid)
        if (!r.has_snpl && r.value_resid)
            baseline.push_back(*r.value_resid);
    const auto base_stats =
        econ::binned_means_ci(baseline, std::vector<int>(baseline.size(), 0), 1);

    std::ifstream in(ws.bins());
    std::string line;
    std::vector<double> means, los, his;
    std::vector<std::string> labels;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("bin\t", 0) == 0)
            continue;
        const auto cells = text::split(line, '\t');
        labels.push_back(cells[0]);
        means.push_back(std::stod(cells[2]));
        los.push_back(std::stod(cells[3]));
        his.push_back(std::stod(cells[4]));
    }
    bool increasing = !means.empty();
    for (std::size_t b = 1; b < means.size(); ++b)
        if (means[b] < means[b - 1])
            increasing = false;
    bool overlap = false;
    if (!means.empty() && base_stats[0].ci_half_width) {
        const double b_lo = base_stats[0].mean - *base_stats[0].ci_half_width;
        const double b_hi = base_stats[0].mean + *base_stats[0].ci_half_width;
        overlap = los.front() <= b_hi && b_lo <= his.front();
    }
    std::string detail = fmt("baseline %.3f; bins", base_stats[0].mean);
    for (std::size_t b = 0; b < means.size(); ++b)
        detail += fmt(" %s=%.3f", labels[b].c_str(), means[b]);
    report(8, "quality-value curve shape", increasing && overlap,
           detail + fmt("; increasing=%s bottom-vs-baseline overlap=%s",
                        increasing ? "yes" : "no", overlap ? "yes" : "no"));
    fs::remove_all(root);
}

// ---------------------------------------------------------------------------
// 9. determinism of the full pipeline
// ---------------------------------------------------------------------------

std::map<std::string, std::uint64_t> hash_workspace(const fs::path& root) {
    std::map<std::string, std::uint64_t> out;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file())
            continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::string data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        out[fs::relative(entry.path(), root).string()] = text::fnv1a(data);
    }
    return out;
}

void criterion_9() {
    PipelineConfig cfg;
    cfg.synth.seed = 909;
    cfg.synth.n_pubs = 2000;
    cfg.synth.n_families = 800;
    cfg.bins.percentiles = {50, 70, 80, 90, 95};

    const auto root1 = fs::temp_directory_path() / "snpl_acceptance_c9a";
    const auto root2 = fs::temp_directory_path() / "snpl_acceptance_c9b";
    fs::remove_all(root1);
    fs::remove_all(root2);
    cfg.threads = 1;
    pipeline::run_all(pipeline::Workspace{root1}, cfg);
    cfg.threads = 4;
    pipeline::run_all(pipeline::Workspace{root2}, cfg);

    const auto h1 = hash_workspace(root1);
    const auto h2 = hash_workspace(root2);
    bool identical = h1.size() == h2.size() && !h1.empty();
    std::size_t files = h1.size();
    if (identical)
        for (const auto& [name, hash] : h1) {
            const auto it = h2.find(name);
            if (it == h2.end() || it->second != hash)
                identical = false;
        }
    report(9, "determinism", identical,
           fmt("%zu artifacts digest-identical across reruns with 1 vs 4 threads: %s", files,
               identical ? "yes" : "no"));
    fs::remove_all(root1);
    fs::remove_all(root2);
}

// ---------------------------------------------------------------------------
// 10. aggregation identities
// ---------------------------------------------------------------------------

void criterion_10() {
    using metrics::Aggregation;
    const bool rss345 = metrics::aggregate({3, 4}, Aggregation::Rss) == 5.0;
    std::mt19937_64 rng(345);
    bool ordered = true;
    for (int iter = 0; iter < 10000 && ordered; ++iter) {
        std::vector<double> v;
        const int n = 1 + static_cast<int>(rng() % 30);
        for (int i = 0; i < n; ++i)
            v.push_back(static_cast<double>(rng() % 100000) / 100.0);
        const double mx = metrics::aggregate(v, Aggregation::Max);
        const double sm = metrics::aggregate(v, Aggregation::Sum);
        const double av = metrics::aggregate(v, Aggregation::Avg);
        const double rs = metrics::aggregate(v, Aggregation::Rss);
        if (!(av <= mx + 1e-9 && mx <= rs + 1e-9 && rs <= sm + 1e-9))
            ordered = false;
    }
    report(10, "aggregation identities", rss345 && ordered,
           fmt("{3,4} rss == 5 exactly: %s; 1e4 lists avg<=max<=rss<=sum: %s",
               rss345 ? "yes" : "no", ordered ? "yes" : "no"));
}

} // namespace

int main() {
    std::printf("snpl acceptance suite\n");
    const auto clean = criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7(clean);
    criterion_8();
    criterion_9();
    criterion_10();
    if (g_failures) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all 10 criteria passed\n");
    return 0;
}
