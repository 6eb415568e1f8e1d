// Science-quality and patent-value measures: windowed citation counts,
// journal impact factors, patent-level aggregation of SNPL quality,
// self-reference and interdisciplinarity flags, and time lags.

#ifndef SNPL_METRICS_HPP
#define SNPL_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "snpl/corpus.hpp"
#include "snpl/match.hpp"

namespace snpl::metrics {

enum class Aggregation { Max, Sum, Avg, Rss };

inline Aggregation aggregation_from_string(const std::string& s) {
    if (s == "max")
        return Aggregation::Max;
    if (s == "sum")
        return Aggregation::Sum;
    if (s == "avg")
        return Aggregation::Avg;
    if (s == "rss")
        return Aggregation::Rss;
    throw std::invalid_argument("unknown aggregation '" + s + "'");
}

inline const char* aggregation_name(Aggregation a) {
    switch (a) {
    case Aggregation::Max: return "max";
    case Aggregation::Sum: return "sum";
    case Aggregation::Avg: return "avg";
    case Aggregation::Rss: return "rss";
    }
    return "max";
}

// Patent-level aggregation of the quality of multiple SNPL references.
// Default in the analyses is the maximum.
inline double aggregate(const std::vector<double>& qualities, Aggregation method) {
    if (qualities.empty())
        throw std::invalid_argument("aggregate: empty quality list");
    switch (method) {
    case Aggregation::Max:
        return *std::max_element(qualities.begin(), qualities.end());
    case Aggregation::Sum: {
        double s = 0;
        for (double q : qualities)
            s += q;
        return s;
    }
    case Aggregation::Avg: {
        double s = 0;
        for (double q : qualities)
            s += q;
        return s / static_cast<double>(qualities.size());
    }
    case Aggregation::Rss: {
        double s = 0;
        for (double q : qualities)
            s += q * q;
        return std::sqrt(s);
    }
    }
    throw std::logic_error("unreachable");
}

struct MetricsConfig {
    int sci_window_years = 3; // citing_year in {Y .. Y+2}
    int pat_window_years = 5; // citing_year in {F .. F+4}
    Aggregation aggregation = Aggregation::Max;
    bool quality_is_jif = false; // default: 3-year citation count
    bool include_multidisciplinary = true;
    std::vector<std::string> multidisciplinary_codes = {"ah", "vj", "wu", "bq", "po", "ev",
                                                        "ui", "dy", "le", "ro", "if", "pm"};
    double claim_winsor_lower = 1.0;
    double claim_winsor_upper = 99.0;
};

// ---------------------------------------------------------------------------
// Windowed citation tallies (one pass over the event list)
// ---------------------------------------------------------------------------

class CitationTallies {
public:
    static CitationTallies build(const Corpus& corpus, const MetricsConfig& cfg) {
        CitationTallies t;
        t.sci_.assign(corpus.publications.size(), 0);
        t.us_.assign(corpus.families.size(), 0);
        t.ep_.assign(corpus.families.size(), 0);
        for (const auto& e : corpus.citations) {
            if (e.kind == CitationKind::SciSci) {
                const auto it = corpus.pub_index.find(e.cited_id);
                if (it == corpus.pub_index.end())
                    continue;
                const auto& pub = corpus.publications[it->second];
                const int lag = e.citing_year - pub.year;
                if (lag >= 0 && lag < cfg.sci_window_years)
                    ++t.sci_[it->second];
            } else {
                const auto cited = corpus.family_index.find(e.cited_id);
                const auto citing = corpus.family_index.find(e.citing_id);
                if (cited == corpus.family_index.end() || citing == corpus.family_index.end())
                    continue;
                const auto& cited_family = corpus.families[cited->second];
                const int lag = e.citing_year - cited_family.first_filing_year;
                if (lag < 0 || lag >= cfg.pat_window_years)
                    continue;
                const auto& citing_family = corpus.families[citing->second];
                if (citing_family.has_office(Office::US))
                    ++t.us_[cited->second];
                if (citing_family.has_office(Office::EP))
                    ++t.ep_[cited->second];
            }
        }
        return t;
    }

    int cit3y(std::size_t pub_index) const { return sci_[pub_index]; }
    int patcit5y(std::size_t family_index, Office office) const {
        return office == Office::US ? us_[family_index] : ep_[family_index];
    }

private:
    std::vector<int> sci_;
    std::vector<int> us_;
    std::vector<int> ep_;
};

// ---------------------------------------------------------------------------
// Journal impact factor
// ---------------------------------------------------------------------------

// JIF of journal j in year t: citations received in t by its articles
// published in t-1 and t-2, divided by the number of those articles.
class JifTable {
public:
    static JifTable build(const Corpus& corpus) {
        JifTable table;
        for (const auto& p : corpus.publications) {
            if (p.journal_title.empty())
                continue;
            ++table.articles_[{text::normalize(p.journal_title), p.year}];
        }
        for (const auto& e : corpus.citations) {
            if (e.kind != CitationKind::SciSci)
                continue;
            const auto it = corpus.pub_index.find(e.cited_id);
            if (it == corpus.pub_index.end())
                continue;
            const auto& cited = corpus.publications[it->second];
            if (cited.journal_title.empty())
                continue;
            const int age = e.citing_year - cited.year;
            if (age == 1 || age == 2)
                ++table.citations_[{text::normalize(cited.journal_title), e.citing_year}];
        }
        return table;
    }

    std::optional<double> jif(const std::string& journal_title, int year) const {
        const std::string j = text::normalize(journal_title);
        const auto a1 = articles_.find({j, year - 1});
        const auto a2 = articles_.find({j, year - 2});
        const long long denom = (a1 == articles_.end() ? 0 : a1->second) +
                                (a2 == articles_.end() ? 0 : a2->second);
        if (denom <= 0)
            return std::nullopt;
        const auto c = citations_.find({j, year});
        const long long num = c == citations_.end() ? 0 : c->second;
        return static_cast<double>(num) / static_cast<double>(denom);
    }

private:
    std::map<std::pair<std::string, int>, long long> articles_;
    std::map<std::pair<std::string, int>, long long> citations_;
};

// ---------------------------------------------------------------------------
// Flags
// ---------------------------------------------------------------------------

// Inventor self-reference: a publication author shares a (normalized) name
// with a patent inventor. Applicant self-reference: an affiliation matches
// an applicant. The two categories may overlap.
inline std::pair<bool, bool> self_ref_flags(const PatentFamily& family, const Publication& pub) {
    return {name_overlap(pub.author_surnames, family.inventor_surnames),
            name_overlap(pub.affiliation_names, family.applicant_names)};
}

// A publication is interdisciplinary when its journal carries at least two
// field codes; journals with explicit multidisciplinary codes are included
// or excluded via config.
inline bool interdisciplinary(const Publication& pub, const MetricsConfig& cfg) {
    if (pub.field_codes.empty())
        throw std::invalid_argument("interdisciplinary: publication has no field codes");
    bool has_multi = false;
    for (const auto& c : pub.field_codes)
        if (std::find(cfg.multidisciplinary_codes.begin(), cfg.multidisciplinary_codes.end(),
                      c) != cfg.multidisciplinary_codes.end())
            has_multi = true;
    const bool two_codes = pub.field_codes.size() >= 2;
    return cfg.include_multidisciplinary ? (two_codes || has_multi)
                                         : (two_codes && !has_multi);
}

// ---------------------------------------------------------------------------
// Per-family SNPL profile
// ---------------------------------------------------------------------------

struct LinkQuality {
    std::string pub_id;
    double quality = 0.0;
    int pub_year = 0;
    bool inventor_self = false;
    bool applicant_self = false;
    bool interdisciplinary = false;
};

struct SnplProfile {
    std::string family_id;
    bool has_snpl = false;
    int n_links = 0;
    std::optional<double> q_max, q_sum, q_avg, q_rss;
    std::optional<std::string> top_pub_id;
    bool top_inventor_self = false;
    bool top_applicant_self = false;
    bool top_interdisciplinary = false;
    std::optional<int> time_lag_years;
    std::optional<std::string> lag_tertile;

    std::optional<double> q(Aggregation a) const {
        switch (a) {
        case Aggregation::Max: return q_max;
        case Aggregation::Sum: return q_sum;
        case Aggregation::Avg: return q_avg;
        case Aggregation::Rss: return q_rss;
        }
        return q_max;
    }
};

// Nearest-rank tertile bounds over the pooled lag distribution.
inline std::pair<double, double> tertile_bounds(std::vector<double> values) {
    if (values.empty())
        throw std::invalid_argument("tertile_bounds: empty sample");
    std::sort(values.begin(), values.end());
    return {nearest_rank_sorted(values, 100.0 / 3.0), nearest_rank_sorted(values, 200.0 / 3.0)};
}

inline const char* tertile_label(double lag, const std::pair<double, double>& bounds) {
    if (lag <= bounds.first)
        return "short";
    if (lag <= bounds.second)
        return "medium";
    return "long";
}

// Aggregates link qualities for one family. The profile flags and the time
// lag are taken from the highest-quality reference; ties break toward the
// smaller pub_id.
inline SnplProfile snpl_profile(const PatentFamily& family, const std::vector<LinkQuality>& links,
                                const std::optional<std::pair<double, double>>& lag_tertiles) {
    SnplProfile p;
    p.family_id = family.family_id;
    p.n_links = static_cast<int>(links.size());
    if (links.empty())
        return p;
    p.has_snpl = true;

    std::vector<double> qs;
    qs.reserve(links.size());
    for (const auto& l : links)
        qs.push_back(l.quality);
    p.q_max = aggregate(qs, Aggregation::Max);
    p.q_sum = aggregate(qs, Aggregation::Sum);
    p.q_avg = aggregate(qs, Aggregation::Avg);
    p.q_rss = aggregate(qs, Aggregation::Rss);

    const LinkQuality* top = &links.front();
    for (const auto& l : links) {
        if (l.quality > top->quality || (l.quality == top->quality && l.pub_id < top->pub_id))
            top = &l;
    }
    p.top_pub_id = top->pub_id;
    p.top_inventor_self = top->inventor_self;
    p.top_applicant_self = top->applicant_self;
    p.top_interdisciplinary = top->interdisciplinary;
    const int lag = family.first_filing_year - top->pub_year;
    p.time_lag_years = lag;
    if (lag_tertiles)
        p.lag_tertile = tertile_label(static_cast<double>(lag), *lag_tertiles);
    return p;
}

// ---------------------------------------------------------------------------
// Corpus-wide tables
// ---------------------------------------------------------------------------

struct PubQuality {
    std::string pub_id;
    int cit3y = 0;
    std::optional<double> jif;
    std::optional<bool> interdisciplinary; // absent when no field codes
    int n_linking_families = 0;            // distinct families linking the pub
};

struct FamilyMetrics {
    SnplProfile profile;
    int uscit5y = 0;
    int epcit5y = 0;
    std::optional<double> claim_scope_us; // log1p of winsorized word count
    std::optional<double> claim_scope_ep;
    std::optional<double> monetary_usd;
    std::optional<double> monetary_patval_eur;
};

struct MetricsResult {
    std::vector<PubQuality> pub_quality;     // corpus publication order
    std::vector<FamilyMetrics> family_metrics; // corpus family order
};

inline MetricsResult compute_metrics(const Corpus& corpus,
                                     const std::vector<match::SnplLink>& links,
                                     const MetricsConfig& cfg) {
    MetricsResult out;
    const auto tallies = CitationTallies::build(corpus, cfg);
    const auto jif_table = JifTable::build(corpus);

    // Per-publication quality.
    std::vector<std::optional<double>> effective_jif(corpus.publications.size());
    out.pub_quality.resize(corpus.publications.size());
    for (std::size_t i = 0; i < corpus.publications.size(); ++i) {
        const auto& pub = corpus.publications[i];
        auto& q = out.pub_quality[i];
        q.pub_id = pub.pub_id;
        q.cit3y = tallies.cit3y(i);
        q.jif = pub.jif ? pub.jif : jif_table.jif(pub.journal_title, pub.year);
        effective_jif[i] = q.jif;
        if (!pub.field_codes.empty())
            q.interdisciplinary = interdisciplinary(pub, cfg);
    }

    // Links grouped per family; count distinct linking families per pub.
    std::vector<std::vector<LinkQuality>> per_family(corpus.families.size());
    std::unordered_map<std::string, std::vector<std::size_t>> pub_linkers;
    for (const auto& link : links) {
        const auto fit = corpus.family_index.find(link.family_id);
        const auto pit = corpus.pub_index.find(link.pub_id);
        if (fit == corpus.family_index.end() || pit == corpus.pub_index.end())
            throw std::runtime_error("metrics: link references unknown id '" + link.family_id +
                                     "'/'" + link.pub_id + "'");
        const auto& pub = corpus.publications[pit->second];
        LinkQuality lq;
        lq.pub_id = link.pub_id;
        if (cfg.quality_is_jif) {
            if (!effective_jif[pit->second])
                continue; // no JIF available: link carries no quality signal
            lq.quality = *effective_jif[pit->second];
        } else {
            lq.quality = static_cast<double>(tallies.cit3y(pit->second));
        }
        lq.pub_year = pub.year;
        lq.inventor_self = link.is_inventor_self_ref;
        lq.applicant_self = link.is_applicant_self_ref;
        lq.interdisciplinary =
            pub.field_codes.empty() ? false : interdisciplinary(pub, cfg);
        per_family[fit->second].push_back(std::move(lq));
        pub_linkers[link.pub_id].push_back(fit->second);
    }
    for (auto& [pub_id, fams] : pub_linkers) {
        std::sort(fams.begin(), fams.end());
        fams.erase(std::unique(fams.begin(), fams.end()), fams.end());
        out.pub_quality[corpus.pub_index.at(pub_id)].n_linking_families =
            static_cast<int>(fams.size());
    }

    // Global lag tertile bounds from the top-reference lags.
    std::vector<double> lags;
    for (std::size_t f = 0; f < corpus.families.size(); ++f) {
        if (per_family[f].empty())
            continue;
        const auto probe = snpl_profile(corpus.families[f], per_family[f], std::nullopt);
        if (probe.time_lag_years)
            lags.push_back(static_cast<double>(*probe.time_lag_years));
    }
    std::optional<std::pair<double, double>> bounds;
    if (!lags.empty())
        bounds = tertile_bounds(lags);

    // Claim-length winsorization across families, per office.
    std::vector<double> us_counts, ep_counts;
    for (const auto& f : corpus.families) {
        if (f.first_claim_wordcount_us)
            us_counts.push_back(*f.first_claim_wordcount_us);
        if (f.first_claim_wordcount_ep)
            ep_counts.push_back(*f.first_claim_wordcount_ep);
    }
    const auto us_wins = us_counts.empty()
                             ? us_counts
                             : winsorize(us_counts, cfg.claim_winsor_lower, cfg.claim_winsor_upper);
    const auto ep_wins = ep_counts.empty()
                             ? ep_counts
                             : winsorize(ep_counts, cfg.claim_winsor_lower, cfg.claim_winsor_upper);

    out.family_metrics.resize(corpus.families.size());
    std::size_t us_i = 0, ep_i = 0;
    for (std::size_t f = 0; f < corpus.families.size(); ++f) {
        const auto& family = corpus.families[f];
        auto& m = out.family_metrics[f];
        m.profile = snpl_profile(family, per_family[f], bounds);
        m.uscit5y = tallies.patcit5y(f, Office::US);
        m.epcit5y = tallies.patcit5y(f, Office::EP);
        if (family.first_claim_wordcount_us)
            m.claim_scope_us = checked_log1p(us_wins[us_i++]);
        if (family.first_claim_wordcount_ep)
            m.claim_scope_ep = checked_log1p(ep_wins[ep_i++]);
        m.monetary_usd = family.monetary_value_usd;
        m.monetary_patval_eur = family.monetary_value_patval_eur;
    }
    return out;
}

} // namespace snpl::metrics

#endif // SNPL_METRICS_HPP
