// Pipeline configuration: JSON schema with strict key checking, canonical
// serialization (every field emitted), and a digest that stamps every
// artifact so stages refuse to mix outputs from different runs.

#ifndef SNPL_CONFIG_HPP
#define SNPL_CONFIG_HPP

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "snpl/corpus_io.hpp"
#include "snpl/econometrics.hpp"
#include "snpl/match.hpp"
#include "snpl/metrics.hpp"
#include "snpl/synth.hpp"
#include "snpl/text.hpp"

namespace snpl {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    // Input corpus files; all empty means "use the synth stage outputs".
    std::string publications_path;
    std::string families_path;
    std::string citations_path;
    std::string gold_links_path;

    io::IngestConfig corpus;
    match::MatchConfig matching;
    metrics::MetricsConfig metrics;
    econ::BinScheme bins;

    struct Regression {
        std::string value_measure = "uscit5y";
        double demean_tol = 1e-11;
        int max_iterations = 10000;
        double count_fe_winsor_pct = 95.0;
        // PatVal samples are small: replace reference-count FEs by the
        // log-transformed count in the extended specification.
        bool patval_log_backrefs = true;
    } regression;

    struct Frontier {
        int distance_cap = 7;
    } frontier;

    synth::SynthConfig synth;
    int threads = 0;

    bool external_corpus() const { return !publications_path.empty(); }
};

namespace config_detail {

using nlohmann::json;

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed)
            if (key == a)
                ok = true;
        if (!ok)
            throw ConfigError("unknown config key '" + key + "' in " + where);
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key))
        out = j.at(key).get<T>();
}

inline const std::vector<std::string>& value_measures() {
    static const std::vector<std::string> v = {"uscit5y",      "epcit5y",
                                               "claim_us",     "claim_ep",
                                               "monetary_usd", "monetary_patval_eur"};
    return v;
}

} // namespace config_detail

inline PipelineConfig config_from_json(const nlohmann::json& j) {
    using config_detail::check_keys;
    using config_detail::read;
    PipelineConfig cfg;
    check_keys(j,
               {"paths", "corpus", "matching", "metrics", "bins", "regression", "frontier",
                "synth", "threads"},
               "top level");
    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        check_keys(p, {"publications", "families", "citations", "gold_links"}, "paths");
        read(p, "publications", cfg.publications_path);
        read(p, "families", cfg.families_path);
        read(p, "citations", cfg.citations_path);
        read(p, "gold_links", cfg.gold_links_path);
    }
    if (j.contains("corpus")) {
        const auto& c = j.at("corpus");
        check_keys(c, {"pub_year_range", "filing_year_range", "main_area_map"}, "corpus");
        if (c.contains("pub_year_range")) {
            const auto r = c.at("pub_year_range").get<std::vector<int>>();
            if (r.size() != 2)
                throw ConfigError("pub_year_range must be [min, max]");
            cfg.corpus.pub_year_min = r[0];
            cfg.corpus.pub_year_max = r[1];
        }
        if (c.contains("filing_year_range")) {
            const auto r = c.at("filing_year_range").get<std::vector<int>>();
            if (r.size() != 2)
                throw ConfigError("filing_year_range must be [min, max]");
            cfg.corpus.filing_year_min = r[0];
            cfg.corpus.filing_year_max = r[1];
        }
        if (c.contains("main_area_map")) {
            const auto names = c.at("main_area_map").get<std::vector<std::string>>();
            if (names.size() != 34)
                throw ConfigError("main_area_map must list 34 areas");
            cfg.corpus.main_area_map.clear();
            for (const auto& n : names) {
                if (n == "electrical_engineering")
                    cfg.corpus.main_area_map.push_back(MainArea::Electrical);
                else if (n == "instruments")
                    cfg.corpus.main_area_map.push_back(MainArea::Instruments);
                else if (n == "chemistry")
                    cfg.corpus.main_area_map.push_back(MainArea::Chemistry);
                else if (n == "mechanical_engineering")
                    cfg.corpus.main_area_map.push_back(MainArea::Mechanical);
                else if (n == "other")
                    cfg.corpus.main_area_map.push_back(MainArea::Other);
                else
                    throw ConfigError("unknown main area '" + n + "'");
            }
        }
    }
    if (j.contains("matching")) {
        const auto& m = j.at("matching");
        check_keys(m, {"threshold", "k", "weights"}, "matching");
        read(m, "threshold", cfg.matching.threshold);
        read(m, "k", cfg.matching.k);
        if (m.contains("weights")) {
            const auto& w = m.at("weights");
            check_keys(w, {"title", "journal", "author", "exact"}, "matching.weights");
            read(w, "title", cfg.matching.weight_title);
            read(w, "journal", cfg.matching.weight_journal);
            read(w, "author", cfg.matching.weight_author);
            read(w, "exact", cfg.matching.weight_exact);
        }
        if (cfg.matching.threshold < 0 || cfg.matching.threshold > 6)
            throw ConfigError("matching.threshold must be in 0..6");
        if (cfg.matching.k < 1)
            throw ConfigError("matching.k must be >= 1");
    }
    if (j.contains("metrics")) {
        const auto& m = j.at("metrics");
        check_keys(m,
                   {"sci_window_years", "pat_window_years", "aggregation", "quality_measure",
                    "include_multidisciplinary", "multidisciplinary_codes", "claim_winsor"},
                   "metrics");
        read(m, "sci_window_years", cfg.metrics.sci_window_years);
        read(m, "pat_window_years", cfg.metrics.pat_window_years);
        if (m.contains("aggregation"))
            cfg.metrics.aggregation =
                metrics::aggregation_from_string(m.at("aggregation").get<std::string>());
        if (m.contains("quality_measure")) {
            const auto q = m.at("quality_measure").get<std::string>();
            if (q == "jif")
                cfg.metrics.quality_is_jif = true;
            else if (q == "cit3y")
                cfg.metrics.quality_is_jif = false;
            else
                throw ConfigError("quality_measure must be cit3y or jif");
        }
        read(m, "include_multidisciplinary", cfg.metrics.include_multidisciplinary);
        read(m, "multidisciplinary_codes", cfg.metrics.multidisciplinary_codes);
        if (m.contains("claim_winsor")) {
            const auto r = m.at("claim_winsor").get<std::vector<double>>();
            if (r.size() != 2)
                throw ConfigError("claim_winsor must be [lower, upper]");
            cfg.metrics.claim_winsor_lower = r[0];
            cfg.metrics.claim_winsor_upper = r[1];
        }
    }
    if (j.contains("bins")) {
        const auto& b = j.at("bins");
        check_keys(b, {"percentiles"}, "bins");
        read(b, "percentiles", cfg.bins.percentiles);
    }
    if (j.contains("regression")) {
        const auto& r = j.at("regression");
        check_keys(r,
                   {"value_measure", "demean_tol", "max_iterations", "count_fe_winsor_pct",
                    "patval_log_backrefs"},
                   "regression");
        read(r, "value_measure", cfg.regression.value_measure);
        read(r, "demean_tol", cfg.regression.demean_tol);
        read(r, "max_iterations", cfg.regression.max_iterations);
        read(r, "count_fe_winsor_pct", cfg.regression.count_fe_winsor_pct);
        read(r, "patval_log_backrefs", cfg.regression.patval_log_backrefs);
        const auto& allowed = config_detail::value_measures();
        if (std::find(allowed.begin(), allowed.end(), cfg.regression.value_measure) ==
            allowed.end())
            throw ConfigError("unknown value_measure '" + cfg.regression.value_measure + "'");
    }
    if (j.contains("frontier")) {
        const auto& f = j.at("frontier");
        check_keys(f, {"distance_cap"}, "frontier");
        read(f, "distance_cap", cfg.frontier.distance_cap);
        if (cfg.frontier.distance_cap < 1)
            throw ConfigError("frontier.distance_cap must be >= 1");
    }
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        check_keys(s,
                   {"seed", "n_pubs", "n_families", "pub_year_range", "filing_year_range",
                    "n_tech_fields", "n_applicants", "n_journals", "zero_citation_mass",
                    "citation_skew", "citation_cap", "snpl_share", "max_refs_per_family",
                    "selection_weight_power", "planted_beta", "planted_has_coef", "noise_sd",
                    "fe_tech_year_sd", "fe_applicant_sd", "value_intercept_cit",
                    "value_intercept_money", "backref_mean", "corruption"},
                   "synth");
        read(s, "seed", cfg.synth.seed);
        read(s, "n_pubs", cfg.synth.n_pubs);
        read(s, "n_families", cfg.synth.n_families);
        if (s.contains("pub_year_range")) {
            const auto r = s.at("pub_year_range").get<std::vector<int>>();
            if (r.size() != 2)
                throw ConfigError("synth.pub_year_range must be [min, max]");
            cfg.synth.pub_year_min = r[0];
            cfg.synth.pub_year_max = r[1];
        }
        if (s.contains("filing_year_range")) {
            const auto r = s.at("filing_year_range").get<std::vector<int>>();
            if (r.size() != 2)
                throw ConfigError("synth.filing_year_range must be [min, max]");
            cfg.synth.filing_year_min = r[0];
            cfg.synth.filing_year_max = r[1];
        }
        read(s, "n_tech_fields", cfg.synth.n_tech_fields);
        read(s, "n_applicants", cfg.synth.n_applicants);
        read(s, "n_journals", cfg.synth.n_journals);
        read(s, "zero_citation_mass", cfg.synth.zero_citation_mass);
        read(s, "citation_skew", cfg.synth.citation_skew);
        read(s, "citation_cap", cfg.synth.citation_cap);
        read(s, "snpl_share", cfg.synth.snpl_share);
        read(s, "max_refs_per_family", cfg.synth.max_refs_per_family);
        read(s, "selection_weight_power", cfg.synth.selection_weight_power);
        read(s, "planted_beta", cfg.synth.planted_beta);
        if (s.contains("planted_has_coef") && !s.at("planted_has_coef").is_null())
            cfg.synth.planted_has_coef = s.at("planted_has_coef").get<double>();
        read(s, "noise_sd", cfg.synth.noise_sd);
        read(s, "fe_tech_year_sd", cfg.synth.fe_tech_year_sd);
        read(s, "fe_applicant_sd", cfg.synth.fe_applicant_sd);
        read(s, "value_intercept_cit", cfg.synth.value_intercept_cit);
        read(s, "value_intercept_money", cfg.synth.value_intercept_money);
        read(s, "backref_mean", cfg.synth.backref_mean);
        if (s.contains("corruption")) {
            const auto& c = s.at("corruption");
            check_keys(c, {"drop", "typo"}, "synth.corruption");
            static const char* fields[6] = {"year", "volume", "pages",
                                            "author", "journal", "title"};
            for (const char* which : {"drop", "typo"}) {
                if (!c.contains(which))
                    continue;
                const auto& node = c.at(which);
                auto& target = std::string(which) == "drop" ? cfg.synth.corruption.drop
                                                            : cfg.synth.corruption.typo;
                if (node.is_number()) {
                    target.fill(node.get<double>());
                } else {
                    check_keys(node, {"year", "volume", "pages", "author", "journal", "title"},
                               std::string("synth.corruption.") + which);
                    for (std::size_t f = 0; f < 6; ++f)
                        if (node.contains(fields[f]))
                            target[f] = node.at(fields[f]).get<double>();
                }
            }
        }
    }
    read(j, "threads", cfg.threads);
    return cfg;
}

inline nlohmann::json config_to_json(const PipelineConfig& cfg) {
    nlohmann::json j;
    j["paths"] = {{"publications", cfg.publications_path},
                  {"families", cfg.families_path},
                  {"citations", cfg.citations_path},
                  {"gold_links", cfg.gold_links_path}};
    nlohmann::json areas = nlohmann::json::array();
    for (int f = 1; f <= 34; ++f)
        areas.push_back(main_area_name(cfg.corpus.area_of(f)));
    j["corpus"] = {{"pub_year_range", {cfg.corpus.pub_year_min, cfg.corpus.pub_year_max}},
                   {"filing_year_range",
                    {cfg.corpus.filing_year_min, cfg.corpus.filing_year_max}},
                   {"main_area_map", areas}};
    j["matching"] = {{"threshold", cfg.matching.threshold},
                     {"k", cfg.matching.k},
                     {"weights",
                      {{"title", cfg.matching.weight_title},
                       {"journal", cfg.matching.weight_journal},
                       {"author", cfg.matching.weight_author},
                       {"exact", cfg.matching.weight_exact}}}};
    j["metrics"] = {{"sci_window_years", cfg.metrics.sci_window_years},
                    {"pat_window_years", cfg.metrics.pat_window_years},
                    {"aggregation", metrics::aggregation_name(cfg.metrics.aggregation)},
                    {"quality_measure", cfg.metrics.quality_is_jif ? "jif" : "cit3y"},
                    {"include_multidisciplinary", cfg.metrics.include_multidisciplinary},
                    {"multidisciplinary_codes", cfg.metrics.multidisciplinary_codes},
                    {"claim_winsor",
                     {cfg.metrics.claim_winsor_lower, cfg.metrics.claim_winsor_upper}}};
    j["bins"] = {{"percentiles", cfg.bins.percentiles}};
    j["regression"] = {{"value_measure", cfg.regression.value_measure},
                       {"demean_tol", cfg.regression.demean_tol},
                       {"max_iterations", cfg.regression.max_iterations},
                       {"count_fe_winsor_pct", cfg.regression.count_fe_winsor_pct},
                       {"patval_log_backrefs", cfg.regression.patval_log_backrefs}};
    j["frontier"] = {{"distance_cap", cfg.frontier.distance_cap}};
    nlohmann::json corr;
    static const char* fields[6] = {"year", "volume", "pages", "author", "journal", "title"};
    for (std::size_t f = 0; f < 6; ++f) {
        corr["drop"][fields[f]] = cfg.synth.corruption.drop[f];
        corr["typo"][fields[f]] = cfg.synth.corruption.typo[f];
    }
    // threads is an execution parameter: outputs are pure functions of
    // (inputs, config, seed), so it stays out of the canonical form
    j["synth"] = {{"seed", cfg.synth.seed},
                  {"n_pubs", cfg.synth.n_pubs},
                  {"n_families", cfg.synth.n_families},
                  {"pub_year_range", {cfg.synth.pub_year_min, cfg.synth.pub_year_max}},
                  {"filing_year_range",
                   {cfg.synth.filing_year_min, cfg.synth.filing_year_max}},
                  {"n_tech_fields", cfg.synth.n_tech_fields},
                  {"n_applicants", cfg.synth.n_applicants},
                  {"n_journals", cfg.synth.n_journals},
                  {"zero_citation_mass", cfg.synth.zero_citation_mass},
                  {"citation_skew", cfg.synth.citation_skew},
                  {"citation_cap", cfg.synth.citation_cap},
                  {"snpl_share", cfg.synth.snpl_share},
                  {"max_refs_per_family", cfg.synth.max_refs_per_family},
                  {"selection_weight_power", cfg.synth.selection_weight_power},
                  {"planted_beta", cfg.synth.planted_beta},
                  {"planted_has_coef", cfg.synth.planted_has_coef
                                           ? nlohmann::json(*cfg.synth.planted_has_coef)
                                           : nlohmann::json(nullptr)},
                  {"noise_sd", cfg.synth.noise_sd},
                  {"fe_tech_year_sd", cfg.synth.fe_tech_year_sd},
                  {"fe_applicant_sd", cfg.synth.fe_applicant_sd},
                  {"value_intercept_cit", cfg.synth.value_intercept_cit},
                  {"value_intercept_money", cfg.synth.value_intercept_money},
                  {"backref_mean", cfg.synth.backref_mean},
                  {"corruption", corr}};
    return j;
}

// Canonical form (sorted keys, defaults filled) hashed to a 64-bit digest.
inline std::string config_digest(const PipelineConfig& cfg) {
    return text::hex64(text::fnv1a(config_to_json(cfg).dump()));
}

inline PipelineConfig load_config(const std::string& path) {
    if (path.empty())
        return PipelineConfig{};
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config schema error in " + path + ": " + e.what());
    }
}

} // namespace snpl

#endif // SNPL_CONFIG_HPP
