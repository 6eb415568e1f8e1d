// Staged batch pipeline over a workspace directory. Each stage reads its
// predecessors' artifacts, verifies the config digest, and writes its own
// outputs; reruns with an identical config and seed are byte-identical.

#ifndef SNPL_PIPELINE_HPP
#define SNPL_PIPELINE_HPP

#include <filesystem>
#include <map>
#include <set>

#include "snpl/artifacts.hpp"
#include "snpl/config.hpp"
#include "snpl/econometrics.hpp"
#include "snpl/frontier.hpp"
#include "snpl/synth.hpp"

namespace snpl::pipeline {

using artifacts::StageError;

inline artifacts::Stamp make_stamp(const PipelineConfig& cfg) {
    return {config_digest(cfg), config_to_json(cfg).dump()};
}

struct Workspace {
    std::filesystem::path root;

    explicit Workspace(std::filesystem::path r) : root(std::move(r)) {}

    std::filesystem::path synth_dir() const { return root / "synth"; }
    std::filesystem::path synth_publications() const { return synth_dir() / "publications.tsv"; }
    std::filesystem::path synth_families() const { return synth_dir() / "families.tsv"; }
    std::filesystem::path synth_citations() const { return synth_dir() / "citations.tsv"; }
    std::filesystem::path synth_gold() const { return synth_dir() / "gold_links.tsv"; }
    std::filesystem::path truth() const { return synth_dir() / "truth.json"; }

    std::filesystem::path corpus_dir() const { return root / "corpus"; }
    std::filesystem::path publications() const { return corpus_dir() / "publications.tsv"; }
    std::filesystem::path families() const { return corpus_dir() / "families.tsv"; }
    std::filesystem::path citations() const { return corpus_dir() / "citations.tsv"; }
    std::filesystem::path gold_links() const { return corpus_dir() / "gold_links.tsv"; }
    std::filesystem::path ingest_report() const { return corpus_dir() / "ingest_report.json"; }

    std::filesystem::path links() const { return root / "match" / "links.tsv"; }
    std::filesystem::path candidates() const { return root / "match" / "candidates.tsv"; }
    std::filesystem::path eval() const { return root / "eval" / "eval.json"; }
    std::filesystem::path metrics() const { return root / "metrics" / "metrics.tsv"; }
    std::filesystem::path quality() const { return root / "metrics" / "quality.tsv"; }
    std::filesystem::path frontier() const { return root / "frontier" / "frontier.tsv"; }
    std::filesystem::path resid() const { return root / "resid" / "resid.tsv"; }
    std::filesystem::path bins() const { return root / "bins" / "bins.tsv"; }
    std::filesystem::path regress() const { return root / "regress" / "regress.json"; }
    std::filesystem::path elasticities() const { return root / "regress" / "elasticities.txt"; }
    std::filesystem::path figures_dir() const { return root / "figures"; }
    std::filesystem::path fig(const std::string& name) const {
        return figures_dir() / (name + ".tsv");
    }
};

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

inline void run_synth(const Workspace& ws, const PipelineConfig& cfg) {
    const auto stamp = make_stamp(cfg);
    const auto result = synth::generate(cfg.synth);

    std::filesystem::create_directories(ws.synth_dir());
    const io::CorpusPaths paths{ws.synth_publications().string(), ws.synth_families().string(),
                                ws.synth_citations().string(), ws.synth_gold().string()};
    io::write_corpus_files(paths, result.corpus, stamp.lines());

    nlohmann::json truth;
    truth["planted_beta"] = result.planted_beta;
    truth["has_coef"] = result.has_coef;
    truth["fe_tech_year"] = result.fe_tech_year;
    truth["fe_applicant"] = result.fe_applicant;
    nlohmann::json survival = nlohmann::json::array();
    for (const auto& rec : result.survival) {
        nlohmann::json bits = nlohmann::json::array();
        for (bool b : rec.survived)
            bits.push_back(b ? 1 : 0);
        survival.push_back({{"family_id", rec.family_id},
                            {"npl_index", rec.npl_index},
                            {"pub_id", rec.pub_id},
                            {"template", rec.template_id},
                            {"survived", bits}});
    }
    truth["survival"] = std::move(survival);
    truth["q_max_true"] = result.q_max_true;
    artifacts::write_json(ws.truth(), std::move(truth), stamp);
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

inline io::CorpusPaths input_paths(const Workspace& ws, const PipelineConfig& cfg) {
    if (cfg.external_corpus())
        return {cfg.publications_path, cfg.families_path, cfg.citations_path,
                cfg.gold_links_path};
    return {ws.synth_publications().string(), ws.synth_families().string(),
            ws.synth_citations().string(), ws.synth_gold().string()};
}

inline void run_ingest(const Workspace& ws, const PipelineConfig& cfg) {
    const auto stamp = make_stamp(cfg);
    const auto& digest = stamp.digest;
    const auto paths = input_paths(ws, cfg);
    if (!std::filesystem::exists(paths.publications)) {
        if (cfg.external_corpus())
            throw StageError("input file " + paths.publications + " does not exist");
        throw StageError("missing artifact " + paths.publications +
                         "; run `snpl synth` first or configure paths.* in the config file");
    }
    if (!cfg.external_corpus())
        artifacts::check_digest(paths.publications, digest, "synth");

    io::IngestReport report;
    Corpus corpus = io::ingest(paths, cfg.corpus, report);
    corpus.rebuild_indexes();

    const io::CorpusPaths out{ws.publications().string(), ws.families().string(),
                              ws.citations().string(),
                              corpus.gold_links.empty() ? "" : ws.gold_links().string()};
    std::filesystem::create_directories(ws.corpus_dir());
    if (corpus.gold_links.empty())
        std::filesystem::remove(ws.gold_links()); // no stale gold from earlier runs
    io::write_corpus_files(out, corpus, stamp.lines());

    nlohmann::json j;
    j["counts"] = {{"publications", corpus.publications.size()},
                   {"families", corpus.families.size()},
                   {"citations", corpus.citations.size()},
                   {"gold_links", corpus.gold_links.size()}};
    j["dropped"] = {{"pubs_year_range", report.pubs_dropped_year_range},
                    {"pubs_duplicate", report.pubs_dropped_duplicate},
                    {"families_no_tech_field", report.families_dropped_no_tech_field},
                    {"families_year_range", report.families_dropped_year_range},
                    {"families_duplicate", report.families_dropped_duplicate},
                    {"citations_dangling", report.citations_dropped_dangling},
                    {"citations_self", report.citations_dropped_self},
                    {"gold_dangling", report.gold_dropped_dangling},
                    {"backref_self_loops", report.backref_self_loops_removed}};
    nlohmann::json errors = nlohmann::json::array();
    for (const auto& e : report.row_errors)
        errors.push_back({{"file", e.file}, {"line", e.line}, {"message", e.message}});
    j["row_errors"] = std::move(errors);
    j["gold_file_missing"] = report.gold_file_missing;
    artifacts::write_json(ws.ingest_report(), std::move(j), stamp);
}

inline Corpus load_corpus(const Workspace& ws, const PipelineConfig& cfg) {
    const auto digest = config_digest(cfg);
    artifacts::require_file(ws.publications(), "ingest");
    artifacts::check_digest(ws.publications(), digest, "ingest");
    io::IngestReport report;
    const io::CorpusPaths paths{
        ws.publications().string(), ws.families().string(), ws.citations().string(),
        std::filesystem::exists(ws.gold_links()) ? ws.gold_links().string() : ""};
    Corpus corpus = io::ingest(paths, cfg.corpus, report);
    corpus.rebuild_indexes();
    return corpus;
}

// ---------------------------------------------------------------------------
// match / eval-match
// ---------------------------------------------------------------------------

inline void run_match(const Workspace& ws, const PipelineConfig& cfg) {
    const auto stamp = make_stamp(cfg);
    const auto corpus = load_corpus(ws, cfg);
    const auto index = match::build_index(corpus.publications);
    auto mcfg = cfg.matching;
    mcfg.threads = cfg.threads;
    const auto result = match::link_references(corpus, index, mcfg);
    artifacts::write_links(ws.links(), result.links, stamp);
    artifacts::write_candidates(ws.candidates(), result.candidates, stamp);
}

inline nlohmann::json eval_point_json(const match::EvalPoint& p) {
    nlohmann::json j;
    j["threshold"] = p.threshold;
    j["n_links"] = p.n_links;
    j["n_correct"] = p.n_correct;
    j["precision"] = p.precision ? nlohmann::json(*p.precision) : nlohmann::json(nullptr);
    j["recall"] = p.recall;
    j["f1"] = p.f1 ? nlohmann::json(*p.f1) : nlohmann::json(nullptr);
    return j;
}

inline void run_eval(const Workspace& ws, const PipelineConfig& cfg) {
    const auto stamp = make_stamp(cfg);
    const auto& digest = stamp.digest;
    artifacts::require_file(ws.candidates(), "match");
    artifacts::check_digest(ws.candidates(), digest, "match");
    const auto candidates = artifacts::read_candidates(ws.candidates());
    const auto corpus = load_corpus(ws, cfg);
    if (corpus.gold_links.empty())
        throw StageError("eval-match requires gold links; the ingested corpus has none");
    const auto eval = match::evaluate_matching(candidates, corpus.gold_links,
                                               cfg.matching.threshold);
    nlohmann::json j;
    j["threshold"] = cfg.matching.threshold;
    j["n_gold"] = eval.n_gold;
    j["at_threshold"] = eval_point_json(eval.at_threshold);
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& p : eval.curve)
        curve.push_back(eval_point_json(p));
    j["curve"] = std::move(curve);
    artifacts::write_json(ws.eval(), std::move(j), stamp);
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

inline void run_metrics(const Workspace& ws, const PipelineConfig& cfg) {
    const auto stamp = make_stamp(cfg);
    const auto& digest = stamp.digest;
    artifacts::require_file(ws.links(), "match");
    artifacts::check_digest(ws.links(), digest, "match");
    const auto corpus = load_corpus(ws, cfg);
    const auto links = artifacts::read_links(ws.links());
    const auto result = metrics::compute_metrics(corpus, links, cfg.metrics);

    std::vector<artifacts::MetricsRow> rows;
    rows.reserve(result.family_metrics.size());
    for (std::size_t f = 0; f < result.family_metrics.size(); ++f) {
        const auto& m = result.family_metrics[f];
        artifacts::MetricsRow r;
        r.family_id = m.profile.family_id;
        r.has_snpl = m.profile.has_snpl;
        r.n_links = m.profile.n_links;
        r.q_max = m.profile.q_max;
        r.q_sum = m.profile.q_sum;
        r.q_avg = m.profile.q_avg;
        r.q_rss = m.profile.q_rss;
        r.uscit5y = m.uscit5y;
        r.epcit5y = m.epcit5y;
        r.claim_scope_us = m.claim_scope_us;
        r.claim_scope_ep = m.claim_scope_ep;
        r.monetary_usd = m.monetary_usd;
        r.monetary_patval_eur = m.monetary_patval_eur;
        r.top_pub_id = m.profile.top_pub_id;
        r.top_inventor_self = m.profile.top_inventor_self;
        r.top_applicant_self = m.profile.top_applicant_self;
        r.top_interdisciplinary = m.profile.top_interdisciplinary;
        r.time_lag_years = m.profile.time_lag_years;
        r.lag_tertile = m.profile.lag_tertile;
        rows.push_back(std::move(r));
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.family_id < b.family_id; });
    artifacts::write_metrics(ws.metrics(), rows, stamp);

    auto quality = result.pub_quality;
    std::sort(quality.begin(), quality.end(),
              [](const auto& a, const auto& b) { return a.pub_id < b.pub_id; });
    artifacts::write_quality(ws.quality(), quality, stamp);
}

// ---------------------------------------------------------------------------
// frontier
// ---------------------------------------------------------------------------

inline void run_frontier(const Workspace& ws, const PipelineConfig& cfg) {
    const auto stamp = make_stamp(cfg);
    const auto& digest = stamp.digest;
    artifacts::require_file(ws.metrics(), "metrics");
    artifacts::check_digest(ws.metrics(), digest, "metrics");
    const auto corpus = load_corpus(ws, cfg);
    const auto rows = artifacts::read_metrics(ws.metrics());

    const auto graph = frontier::build_graph(corpus.families);
    std::vector<bool> is_frontier(corpus.families.size(), false);
    std::vector<std::optional<double>> quality(corpus.families.size());
    for (const auto& m : rows) {
        const auto it = corpus.family_index.find(m.family_id);
        if (it == corpus.family_index.end())
            throw StageError("metrics.tsv references unknown family " + m.family_id);
        const auto q = m.q(cfg.metrics.aggregation);
        if (m.has_snpl && q) {
            is_frontier[it->second] = true;
            quality[it->second] = q;
        }
    }
    auto results = frontier::compute_frontier(graph, is_frontier, quality);
    std::sort(results.begin(), results.end(),
              [](const auto& a, const auto& b) { return a.family_id < b.family_id; });
    artifacts::write_frontier(ws.frontier(), results, stamp);
}

// ---------------------------------------------------------------------------
// residualize
// ---------------------------------------------------------------------------

inline std::optional<double> value_outcome(const artifacts::MetricsRow& m,
                                           const std::string& measure) {
    if (measure == "uscit5y")
        return checked_log1p(m.uscit5y);
    if (measure == "epcit5y")
        return checked_log1p(m.epcit5y);
    if (measure == "claim_us")
        return m.claim_scope_us; // already log-scaled
    if (measure == "claim_ep")
        return m.claim_scope_ep;
    if (measure == "monetary_usd")
        return m.monetary_usd ? std::optional<double>(checked_log1p(*m.monetary_usd))
                              : std::nullopt;
    if (measure == "monetary_patval_eur")
        return m.monetary_patval_eur
                   ? std::optional<double>(checked_log1p(*m.monetary_patval_eur))
                   : std::nullopt;
    throw StageError("unknown value measure '" + measure + "'");
}

inline void run_residualize(const Workspace& ws, const PipelineConfig& cfg) {
    const auto stamp = make_stamp(cfg);
    const auto& digest = stamp.digest;
    artifacts::require_file(ws.metrics(), "metrics");
    artifacts::check_digest(ws.metrics(), digest, "metrics");
    const auto corpus = load_corpus(ws, cfg);
    const auto rows = artifacts::read_metrics(ws.metrics());

    // technology field x first filing year groups over families with a value
    std::vector<double> y;
    std::vector<std::string> group;
    std::vector<std::size_t> row_of;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto v = value_outcome(rows[i], cfg.regression.value_measure);
        if (!v)
            continue;
        const auto it = corpus.family_index.find(rows[i].family_id);
        if (it == corpus.family_index.end())
            throw StageError("metrics.tsv references unknown family " + rows[i].family_id);
        const auto& fam = corpus.families[it->second];
        y.push_back(*v);
        group.push_back(std::to_string(fam.tech_field) + "|" +
                        std::to_string(fam.first_filing_year));
        row_of.push_back(i);
    }
    const auto resid = econ::residualize(y, group);

    std::vector<artifacts::ResidRow> out;
    out.reserve(rows.size());
    for (const auto& m : rows) {
        artifacts::ResidRow r;
        r.family_id = m.family_id;
        r.has_snpl = m.has_snpl;
        if (m.q_max)
            r.q_log_max = checked_log1p(*m.q_max);
        if (m.q_sum)
            r.q_log_sum = checked_log1p(*m.q_sum);
        if (m.q_avg)
            r.q_log_avg = checked_log1p(*m.q_avg);
        if (m.q_rss)
            r.q_log_rss = checked_log1p(*m.q_rss);
        out.push_back(std::move(r));
    }
    for (std::size_t k = 0; k < row_of.size(); ++k)
        out[row_of[k]].value_resid = resid[k];
    artifacts::write_resid(ws.resid(), out, stamp);
}

// ---------------------------------------------------------------------------
// bins
// ---------------------------------------------------------------------------

struct BinnedCurve {
    std::vector<std::string> labels;
    std::vector<econ::BinStats> stats;
};

inline BinnedCurve binned_curve(const std::vector<double>& axis,
                                const std::vector<double>& values,
                                const econ::BinScheme& scheme) {
    const auto assignment = econ::percentile_bins(axis, scheme);
    const auto stats = econ::binned_means_ci(values, assignment.bin_of, assignment.bins.size());
    BinnedCurve curve;
    for (std::size_t b = 0; b < assignment.bins.size(); ++b) {
        curve.labels.push_back(assignment.bins[b].label);
        curve.stats.push_back(stats[b]);
    }
    return curve;
}

inline void write_curve_rows(std::ostream& os, const std::vector<std::string>& prefix,
                             const BinnedCurve& curve) {
    for (std::size_t b = 0; b < curve.labels.size(); ++b) {
        const auto& s = curve.stats[b];
        if (s.n == 0)
            continue;
        for (const auto& p : prefix)
            os << p << '\t';
        os << curve.labels[b] << '\t' << s.n << '\t' << io::detail::format_real(s.mean) << '\t'
           << (s.ci_half_width ? io::detail::format_real(s.mean - *s.ci_half_width)
                               : std::string())
           << '\t'
           << (s.ci_half_width ? io::detail::format_real(s.mean + *s.ci_half_width)
                               : std::string())
           << '\n';
    }
}

inline void run_bins(const Workspace& ws, const PipelineConfig& cfg) {
    const auto stamp = make_stamp(cfg);
    const auto& digest = stamp.digest;
    artifacts::require_file(ws.resid(), "residualize");
    artifacts::check_digest(ws.resid(), digest, "residualize");
    const auto rows = artifacts::read_resid(ws.resid());

    std::vector<double> axis, values;
    for (const auto& r : rows) {
        const auto q = r.q_log(cfg.metrics.aggregation);
        if (r.has_snpl && q && r.value_resid) {
            axis.push_back(*q);
            values.push_back(*r.value_resid);
        }
    }
    if (axis.empty())
        throw StageError("bins: no SNPL families with both quality and value");
    const auto curve = binned_curve(axis, values, cfg.bins);
    auto os = artifacts::open_out(ws.bins());
    io::write_header(os, stamp.lines(), {"bin", "n", "mean", "ci_lo", "ci_hi"});
    write_curve_rows(os, {}, curve);
}

// ---------------------------------------------------------------------------
// regress
// ---------------------------------------------------------------------------

struct FeSpec {
    std::string name;
    const std::vector<int>* levels = nullptr;
};

inline nlohmann::json fit_json(const econ::FitResult& fit,
                               const std::vector<FeSpec>& fe_specs = {}) {
    nlohmann::json j;
    j["names"] = fit.names;
    j["coef"] = fit.coef;
    j["robust_se"] = fit.robust_se;
    j["t_stat"] = fit.t_stat;
    j["dropped"] = fit.dropped;
    j["n_obs"] = fit.n_obs;
    j["dof_k"] = fit.dof_k;
    j["r2_within"] = fit.r2_within;
    j["demean_iterations"] = fit.demean_iterations;
    nlohmann::json fe = nlohmann::json::array();
    for (const auto& spec : fe_specs) {
        std::set<int> distinct(spec.levels->begin(), spec.levels->end());
        fe.push_back({{"name", spec.name}, {"levels", distinct.size()}});
    }
    j["fe_sets"] = std::move(fe);
    return j;
}

namespace detail {

inline std::vector<int> string_levels(const std::vector<std::string>& keys) {
    std::unordered_map<std::string, int> ids;
    std::vector<int> out(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i)
        out[i] = ids.emplace(keys[i], static_cast<int>(ids.size())).first->second;
    return out;
}

// Count FE levels: one level per count up to the winsorization percentile,
// one pooled level above it.
inline std::vector<int> count_fe_levels(const std::vector<double>& counts, double pct) {
    const auto wins = winsorize(counts, 0.0, pct);
    std::vector<int> levels(wins.size());
    for (std::size_t i = 0; i < wins.size(); ++i)
        levels[i] = static_cast<int>(std::llround(wins[i]));
    return levels;
}

} // namespace detail

inline void run_regress(const Workspace& ws, const PipelineConfig& cfg) {
    const auto stamp = make_stamp(cfg);
    const auto& digest = stamp.digest;
    artifacts::require_file(ws.metrics(), "metrics");
    artifacts::check_digest(ws.metrics(), digest, "metrics");
    artifacts::require_file(ws.quality(), "metrics");
    const auto corpus = load_corpus(ws, cfg);
    const auto rows = artifacts::read_metrics(ws.metrics());
    const auto quality = artifacts::read_quality(ws.quality());

    econ::HdfeOptions opts;
    opts.demean_tol = cfg.regression.demean_tol;
    opts.max_iterations = cfg.regression.max_iterations;

    nlohmann::json out;

    // --- selection regressions at the publication level
    {
        std::vector<double> linked01, log_count, log_cit;
        std::vector<std::string> fe_keys;
        for (const auto& q : quality) {
            const auto& pub = corpus.publications[corpus.pub_index.at(q.pub_id)];
            if (pub.field_codes.empty())
                continue; // publications need a field to enter regressions
            const std::string field =
                *std::min_element(pub.field_codes.begin(), pub.field_codes.end());
            fe_keys.push_back(field + "|" + std::to_string(pub.year));
            linked01.push_back(q.n_linking_families > 0 ? 1.0 : 0.0);
            log_count.push_back(checked_log1p(q.n_linking_families));
            log_cit.push_back(checked_log1p(q.cit3y));
        }
        if (!fe_keys.empty()) {
            const auto fe = detail::string_levels(fe_keys);
            const std::vector<FeSpec> specs = {{"science_field_x_year", &fe}};
            const auto fit01 =
                econ::hdfe_ols(linked01, {"log_cit3y"}, {log_cit}, {fe}, opts);
            const auto fitn =
                econ::hdfe_ols(log_count, {"log_cit3y"}, {log_cit}, {fe}, opts);
            out["selection"] = {{"linked01", fit_json(fit01, specs)},
                                {"log_count", fit_json(fitn, specs)}};
        }
    }

    // --- value regressions at the family level
    {
        const bool patval_small = cfg.regression.value_measure == "monetary_patval_eur" &&
                                  cfg.regression.patval_log_backrefs;
        std::vector<double> y, has, logq, log_backrefs;
        std::vector<double> n_backrefs, n_inventors, n_snpl;
        std::vector<std::string> fe_ty, fe_applicant;
        for (const auto& m : rows) {
            const auto v = value_outcome(m, cfg.regression.value_measure);
            if (!v)
                continue;
            const auto& fam = corpus.families[corpus.family_index.at(m.family_id)];
            const auto q = m.q(cfg.metrics.aggregation);
            y.push_back(*v);
            has.push_back(m.has_snpl && q ? 1.0 : 0.0);
            logq.push_back(m.has_snpl && q ? checked_log1p(*q) : 0.0);
            n_backrefs.push_back(static_cast<double>(fam.backward_patent_refs.size()));
            log_backrefs.push_back(checked_log1p(
                static_cast<double>(fam.backward_patent_refs.size())));
            n_inventors.push_back(fam.n_inventors);
            n_snpl.push_back(m.n_links);
            fe_ty.push_back(std::to_string(fam.tech_field) + "|" +
                            std::to_string(fam.first_filing_year));
            fe_applicant.push_back(fam.first_applicant_id);
        }
        if (y.empty())
            throw StageError("regress: no families with value measure " +
                             cfg.regression.value_measure);

        const auto ty = detail::string_levels(fe_ty);
        const auto applicant = detail::string_levels(fe_applicant);
        const double pct = cfg.regression.count_fe_winsor_pct;
        const auto inv_fe = detail::count_fe_levels(n_inventors, pct);
        const auto ref_fe = detail::count_fe_levels(n_backrefs, pct);
        const auto snpl_fe = detail::count_fe_levels(n_snpl, pct);

        std::vector<std::string> names = {"has_snpl", "log_q"};
        std::vector<std::vector<double>> X = {has, logq};
        if (patval_small) {
            names.push_back("log_backrefs");
            X.push_back(log_backrefs);
        }

        auto fit_spec = [&](const char* spec, const std::vector<std::string>& xnames,
                            const std::vector<std::vector<double>>& xcols,
                            const std::vector<std::vector<int>>& fe) {
            try {
                return econ::hdfe_ols(y, xnames, xcols, fe, opts);
            } catch (const std::invalid_argument& e) {
                throw StageError("regress: " + std::string(spec) + " specification failed (" +
                                 e.what() + "; n=" + std::to_string(y.size()) + ")");
            }
        };
        const auto base = fit_spec("base", {"has_snpl", "log_q"}, {has, logq}, {ty});
        std::vector<std::vector<int>> controls_fe = {ty, inv_fe, snpl_fe};
        std::vector<FeSpec> controls_specs = {{"tech_field_x_year", &ty},
                                              {"inventor_count", &inv_fe},
                                              {"snpl_count", &snpl_fe}};
        if (!patval_small) {
            controls_fe.push_back(ref_fe);
            controls_specs.push_back({"backref_count", &ref_fe});
        }
        const auto controls = fit_spec("controls", names, X, controls_fe);
        auto applicant_fe = controls_fe;
        applicant_fe.push_back(applicant);
        auto applicant_specs = controls_specs;
        applicant_specs.push_back({"applicant", &applicant});
        const auto full = fit_spec("applicant", names, X, applicant_fe);

        out["value"] = {{"measure", cfg.regression.value_measure},
                        {"specs",
                         {{"base", fit_json(base, {{"tech_field_x_year", &ty}})},
                          {"controls", fit_json(controls, controls_specs)},
                          {"applicant", fit_json(full, applicant_specs)}}}};

        const auto table = econ::elasticity_report(
            {{"base", &base}, {"controls", &controls}, {"applicant", &full}});
        auto os = artifacts::open_out(ws.elasticities());
        for (const auto& line : stamp.lines())
            os << "# " << line << "\n";
        os << "value measure: " << cfg.regression.value_measure << "\n\n";
        os << table;
    }

    artifacts::write_json(ws.regress(), std::move(out), stamp);
}

// ---------------------------------------------------------------------------
// figures
// ---------------------------------------------------------------------------

inline void run_figures(const Workspace& ws, const PipelineConfig& cfg) {
    const auto stamp = make_stamp(cfg);
    const auto& digest = stamp.digest;
    artifacts::require_file(ws.quality(), "metrics");
    artifacts::check_digest(ws.quality(), digest, "metrics");
    artifacts::require_file(ws.metrics(), "metrics");
    artifacts::require_file(ws.resid(), "residualize");
    artifacts::check_digest(ws.resid(), digest, "residualize");
    artifacts::require_file(ws.frontier(), "frontier");
    artifacts::check_digest(ws.frontier(), digest, "frontier");

    const auto quality = artifacts::read_quality(ws.quality());
    const auto rows = artifacts::read_metrics(ws.metrics());
    const auto resid = artifacts::read_resid(ws.resid());
    const auto front = artifacts::read_frontier(ws.frontier());

    std::unordered_map<std::string, const artifacts::ResidRow*> resid_of;
    for (const auto& r : resid)
        resid_of.emplace(r.family_id, &r);
    std::unordered_map<std::string, const artifacts::MetricsRow*> metrics_of;
    for (const auto& m : rows)
        metrics_of.emplace(m.family_id, &m);

    // fig1b: selection of publications into references, by science quality
    {
        std::vector<double> cit, linked, refs;
        for (const auto& q : quality) {
            cit.push_back(static_cast<double>(q.cit3y));
            linked.push_back(q.n_linking_families > 0 ? 1.0 : 0.0);
            refs.push_back(static_cast<double>(q.n_linking_families));
        }
        const auto assignment = econ::percentile_bins(cit, cfg.bins);
        const auto share = econ::binned_means_ci(linked, assignment.bin_of,
                                                 assignment.bins.size());
        const auto mean_refs =
            econ::binned_means_ci(refs, assignment.bin_of, assignment.bins.size());
        auto os = artifacts::open_out(ws.fig("fig1b_selection"));
        io::write_header(os, stamp.lines(),
                         {"bin", "n_pubs", "share_linked", "share_ci_lo", "share_ci_hi",
                          "mean_refs"});
        for (std::size_t b = 0; b < assignment.bins.size(); ++b) {
            if (share[b].n == 0)
                continue;
            os << assignment.bins[b].label << '\t' << share[b].n << '\t'
               << io::detail::format_real(share[b].mean) << '\t'
               << (share[b].ci_half_width
                       ? io::detail::format_real(share[b].mean - *share[b].ci_half_width)
                       : std::string())
               << '\t'
               << (share[b].ci_half_width
                       ? io::detail::format_real(share[b].mean + *share[b].ci_half_width)
                       : std::string())
               << '\t' << io::detail::format_real(mean_refs[b].mean) << '\n';
        }
    }

    // no-SNPL baseline of residualized value, shared by several figures
    std::vector<double> baseline;
    for (const auto& r : resid)
        if (!r.has_snpl && r.value_resid)
            baseline.push_back(*r.value_resid);
    const auto baseline_stats =
        econ::binned_means_ci(baseline, std::vector<int>(baseline.size(), 0), 1);

    // fig1c: residualized value by quality bins, per aggregation method
    {
        auto os = artifacts::open_out(ws.fig("fig1c_quality_value"));
        io::write_header(os, stamp.lines(), {"method", "bin", "n", "mean", "ci_lo", "ci_hi"});
        using metrics::Aggregation;
        for (const auto method :
             {Aggregation::Max, Aggregation::Sum, Aggregation::Avg, Aggregation::Rss}) {
            std::vector<double> axis, values;
            for (const auto& r : resid) {
                const auto q = r.q_log(method);
                if (r.has_snpl && q && r.value_resid) {
                    axis.push_back(*q);
                    values.push_back(*r.value_resid);
                }
            }
            if (axis.empty())
                continue;
            const auto curve = binned_curve(axis, values, cfg.bins);
            write_curve_rows(os, {metrics::aggregation_name(method)}, curve);
        }
        if (baseline_stats[0].n > 0) {
            const auto& s = baseline_stats[0];
            os << "baseline\tno_snpl\t" << s.n << '\t' << io::detail::format_real(s.mean) << '\t'
               << (s.ci_half_width ? io::detail::format_real(s.mean - *s.ci_half_width)
                                   : std::string())
               << '\t'
               << (s.ci_half_width ? io::detail::format_real(s.mean + *s.ci_half_width)
                                   : std::string())
               << '\n';
        }
    }

    // fig2a: self-references of the top-quality reference
    {
        std::vector<double> axis, values;
        std::vector<int> is_self;
        for (const auto& r : resid) {
            const auto q = r.q_log(cfg.metrics.aggregation);
            if (!(r.has_snpl && q && r.value_resid))
                continue;
            const auto* m = metrics_of.at(r.family_id);
            axis.push_back(*q);
            values.push_back(*r.value_resid);
            is_self.push_back(m->top_inventor_self || m->top_applicant_self ? 1 : 0);
        }
        auto os = artifacts::open_out(ws.fig("fig2a_self_references"));
        io::write_header(os, stamp.lines(), {"group", "bin", "n", "mean", "ci_lo", "ci_hi"});
        if (!axis.empty()) {
            const auto assignment = econ::percentile_bins(axis, cfg.bins);
            for (const int group : {1, 0}) {
                std::vector<int> bins = assignment.bin_of;
                for (std::size_t i = 0; i < bins.size(); ++i)
                    if (is_self[i] != group)
                        bins[i] = -1;
                const auto stats =
                    econ::binned_means_ci(values, bins, assignment.bins.size());
                BinnedCurve curve;
                for (std::size_t b = 0; b < assignment.bins.size(); ++b) {
                    curve.labels.push_back(assignment.bins[b].label);
                    curve.stats.push_back(stats[b]);
                }
                write_curve_rows(os, {group ? "self" : "non_self"}, curve);
            }
        }
    }

    // fig2b: residualized value by distance to the frontier, for all
    // families and for those inheriting top/bottom-decile quality
    {
        std::vector<double> frontier_q;
        for (const auto& m : rows) {
            const auto q = m.q(cfg.metrics.aggregation);
            if (m.has_snpl && q)
                frontier_q.push_back(checked_log1p(*q));
        }
        auto os = artifacts::open_out(ws.fig("fig2b_frontier"));
        io::write_header(os, stamp.lines(), {"distance", "group", "n", "mean", "ci_lo", "ci_hi"});
        if (!frontier_q.empty()) {
            std::sort(frontier_q.begin(), frontier_q.end());
            const double p10 = nearest_rank_sorted(frontier_q, 10.0);
            const double p90 = nearest_rank_sorted(frontier_q, 90.0);
            const int cap = cfg.frontier.distance_cap;

            struct Cell {
                std::vector<double> values;
            };
            std::map<std::pair<int, std::string>, Cell> cells;
            for (const auto& fr : front) {
                if (fr.distance == frontier::kUnreachable || !fr.inherited_quality)
                    continue;
                const auto rit = resid_of.find(fr.family_id);
                if (rit == resid_of.end() || !rit->second->value_resid)
                    continue;
                const double v = *rit->second->value_resid;
                const double iq = checked_log1p(*fr.inherited_quality);
                const int stratum = std::min(fr.distance, cap + 1); // cap+1 pools the tail
                cells[{stratum, "all"}].values.push_back(v);
                if (iq >= p90)
                    cells[{stratum, "top10"}].values.push_back(v);
                if (iq <= p10)
                    cells[{stratum, "bottom10"}].values.push_back(v);
            }
            for (const auto& [key, cell] : cells) {
                const auto stats = econ::binned_means_ci(
                    cell.values, std::vector<int>(cell.values.size(), 0), 1);
                const auto& s = stats[0];
                os << (key.first > cap ? (">" + std::to_string(cap))
                                       : std::to_string(key.first))
                   << '\t' << key.second << '\t' << s.n << '\t'
                   << io::detail::format_real(s.mean) << '\t'
                   << (s.ci_half_width
                           ? io::detail::format_real(s.mean - *s.ci_half_width)
                           : std::string())
                   << '\t'
                   << (s.ci_half_width
                           ? io::detail::format_real(s.mean + *s.ci_half_width)
                           : std::string())
                   << '\n';
            }
        }
    }

    // fig2c: residualized value by quality bins within time-lag tertiles
    {
        auto os = artifacts::open_out(ws.fig("fig2c_time_lag"));
        io::write_header(os, stamp.lines(), {"tertile", "bin", "n", "mean", "ci_lo", "ci_hi"});
        std::vector<double> axis, values;
        std::vector<std::string> tertile;
        for (const auto& r : resid) {
            const auto q = r.q_log(cfg.metrics.aggregation);
            if (!(r.has_snpl && q && r.value_resid))
                continue;
            const auto* m = metrics_of.at(r.family_id);
            if (!m->lag_tertile)
                continue;
            axis.push_back(*q);
            values.push_back(*r.value_resid);
            tertile.push_back(*m->lag_tertile);
        }
        if (!axis.empty()) {
            const auto assignment = econ::percentile_bins(axis, cfg.bins);
            for (const std::string group : {"short", "medium", "long"}) {
                std::vector<int> bins = assignment.bin_of;
                for (std::size_t i = 0; i < bins.size(); ++i)
                    if (tertile[i] != group)
                        bins[i] = -1;
                const auto stats =
                    econ::binned_means_ci(values, bins, assignment.bins.size());
                BinnedCurve curve;
                for (std::size_t b = 0; b < assignment.bins.size(); ++b) {
                    curve.labels.push_back(assignment.bins[b].label);
                    curve.stats.push_back(stats[b]);
                }
                write_curve_rows(os, {group}, curve);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// all
// ---------------------------------------------------------------------------

inline void run_all(const Workspace& ws, const PipelineConfig& cfg) {
    if (!cfg.external_corpus())
        run_synth(ws, cfg);
    run_ingest(ws, cfg);
    run_match(ws, cfg);
    const auto corpus_has_gold = std::filesystem::exists(ws.gold_links());
    if (corpus_has_gold)
        run_eval(ws, cfg);
    run_metrics(ws, cfg);
    run_frontier(ws, cfg);
    run_residualize(ws, cfg);
    run_bins(ws, cfg);
    run_regress(ws, cfg);
    run_figures(ws, cfg);
}

inline void run_stage(const std::string& stage, const Workspace& ws, const PipelineConfig& cfg) {
    if (stage == "synth")
        run_synth(ws, cfg);
    else if (stage == "ingest")
        run_ingest(ws, cfg);
    else if (stage == "match")
        run_match(ws, cfg);
    else if (stage == "eval-match")
        run_eval(ws, cfg);
    else if (stage == "metrics")
        run_metrics(ws, cfg);
    else if (stage == "frontier")
        run_frontier(ws, cfg);
    else if (stage == "residualize")
        run_residualize(ws, cfg);
    else if (stage == "bins")
        run_bins(ws, cfg);
    else if (stage == "regress")
        run_regress(ws, cfg);
    else if (stage == "figures")
        run_figures(ws, cfg);
    else if (stage == "all")
        run_all(ws, cfg);
    else
        throw StageError("unknown stage '" + stage + "'");
}

} // namespace snpl::pipeline

#endif // SNPL_PIPELINE_HPP
