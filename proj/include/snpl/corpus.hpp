// Canonical data model for linked patent/publication corpora, plus the
// family-level unification and variable-transformation rules applied at
// ingestion time.

#ifndef SNPL_CORPUS_HPP
#define SNPL_CORPUS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "snpl/text.hpp"

namespace snpl {

enum class Office : unsigned { None = 0, US = 1, EP = 2 };

inline unsigned office_mask(Office o) { return static_cast<unsigned>(o); }

enum class CitationKind { SciSci, PatPat };

// The five WIPO main areas derived from the 34 technology fields.
enum class MainArea { Electrical = 0, Instruments, Chemistry, Mechanical, Other };

inline const char* main_area_name(MainArea a) {
    switch (a) {
    case MainArea::Electrical: return "electrical_engineering";
    case MainArea::Instruments: return "instruments";
    case MainArea::Chemistry: return "chemistry";
    case MainArea::Mechanical: return "mechanical_engineering";
    case MainArea::Other: return "other";
    }
    return "other";
}

struct Publication {
    std::string pub_id;
    std::string title;
    std::string first_author_surname;
    std::string journal_title;
    int year = 0;
    std::string volume;
    std::string first_page;
    std::vector<std::string> field_codes;
    std::vector<std::string> author_surnames;      // normalized
    std::vector<std::string> affiliation_names;    // normalized
    std::optional<double> jif;
};

struct PatentFamily {
    std::string family_id;
    int first_filing_year = 0;
    int tech_field = 0; // 1..34, unified over member patents
    MainArea main_area = MainArea::Other;
    unsigned offices = 0; // bitmask of Office
    int n_inventors = 1;
    std::vector<std::string> inventor_surnames;  // normalized
    std::vector<std::string> applicant_names;    // normalized
    std::string first_applicant_id;
    std::vector<std::string> backward_patent_refs;
    std::vector<std::string> npl_strings;
    std::optional<int> first_claim_wordcount_us;
    std::optional<int> first_claim_wordcount_ep;
    std::optional<double> monetary_value_usd;
    std::optional<double> monetary_value_patval_eur;

    bool has_office(Office o) const { return (offices & office_mask(o)) != 0; }
};

struct CitationEvent {
    std::string citing_id;
    std::string cited_id;
    CitationKind kind = CitationKind::SciSci;
    int citing_year = 0;
};

struct GoldLink {
    std::string family_id;
    int npl_index = 0;
    std::string pub_id;

    friend bool operator==(const GoldLink&, const GoldLink&) = default;
    friend auto operator<=>(const GoldLink&, const GoldLink&) = default;
};

// Immutable after ingestion; safe to share read-only across threads.
struct Corpus {
    std::vector<Publication> publications;
    std::vector<PatentFamily> families;
    std::vector<CitationEvent> citations;
    std::vector<GoldLink> gold_links;

    std::unordered_map<std::string, std::size_t> pub_index;
    std::unordered_map<std::string, std::size_t> family_index;

    void rebuild_indexes() {
        pub_index.clear();
        family_index.clear();
        pub_index.reserve(publications.size());
        family_index.reserve(families.size());
        for (std::size_t i = 0; i < publications.size(); ++i)
            pub_index.emplace(publications[i].pub_id, i);
        for (std::size_t i = 0; i < families.size(); ++i)
            family_index.emplace(families[i].family_id, i);
    }

    const Publication* find_pub(const std::string& id) const {
        auto it = pub_index.find(id);
        return it == pub_index.end() ? nullptr : &publications[it->second];
    }
    const PatentFamily* find_family(const std::string& id) const {
        auto it = family_index.find(id);
        return it == family_index.end() ? nullptr : &families[it->second];
    }
};

// ---------------------------------------------------------------------------
// Transformation rules
// ---------------------------------------------------------------------------

// Modal technology field of the member patents; ties broken by the
// numerically lowest field. The empty case signals the drop rule upstream.
inline int unify_tech_field(const std::vector<int>& member_fields) {
    if (member_fields.empty())
        throw std::invalid_argument("unify_tech_field: empty member field list");
    std::map<int, int> counts;
    for (int f : member_fields) {
        if (f < 1 || f > 34)
            throw std::invalid_argument("unify_tech_field: field outside 1..34");
        ++counts[f];
    }
    int best = 0, best_count = 0;
    for (const auto& [field, count] : counts) { // ascending field order
        if (count > best_count) {
            best = field;
            best_count = count;
        }
    }
    return best;
}

// Default WIPO 34-field -> 5-area concordance. Overridable via config.
inline MainArea default_main_area(int tech_field) {
    if (tech_field >= 1 && tech_field <= 8)
        return MainArea::Electrical;
    if (tech_field <= 13)
        return MainArea::Instruments;
    if (tech_field <= 24)
        return MainArea::Chemistry;
    if (tech_field <= 32)
        return MainArea::Mechanical;
    return MainArea::Other;
}

// Nearest-rank percentile on a sorted ascending sample: the value at rank
// ceil(p/100 * n), 1-indexed. p = 0 maps to the minimum.
inline double nearest_rank_sorted(const std::vector<double>& sorted, double pct) {
    if (sorted.empty())
        throw std::invalid_argument("nearest_rank: empty sample");
    if (pct <= 0.0)
        return sorted.front();
    if (pct >= 100.0)
        return sorted.back();
    const auto n = static_cast<double>(sorted.size());
    // epsilon guards exact fractions like 100/3 on multiples-of-three samples
    auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * n - 1e-9));
    if (rank < 1)
        rank = 1;
    if (rank > sorted.size())
        rank = sorted.size();
    return sorted[rank - 1];
}

inline double nearest_rank(std::vector<double> values, double pct) {
    std::sort(values.begin(), values.end());
    return nearest_rank_sorted(values, pct);
}

// Clips values below/above the nearest-rank percentiles. Order and length
// preserved; monotone.
inline std::vector<double> winsorize(const std::vector<double>& values, double lower_pct,
                                     double upper_pct) {
    if (values.empty())
        throw std::invalid_argument("winsorize: empty sample");
    if (!(lower_pct >= 0.0 && lower_pct < upper_pct && upper_pct <= 100.0))
        throw std::invalid_argument("winsorize: need 0 <= lower < upper <= 100");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double lo = lower_pct <= 0.0 ? sorted.front() : nearest_rank_sorted(sorted, lower_pct);
    const double hi = upper_pct >= 100.0 ? sorted.back() : nearest_rank_sorted(sorted, upper_pct);
    std::vector<double> out = values;
    for (double& v : out)
        v = std::clamp(v, lo, hi);
    return out;
}

// log(x+1) transform used for all count-like variables.
inline double checked_log1p(double x) {
    if (x < 0.0)
        throw std::domain_error("log1p transform requires nonnegative input");
    return std::log1p(x);
}

// Nonempty intersection of two normalized name lists.
inline bool name_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    for (const auto& x : a)
        for (const auto& y : b)
            if (x == y && !x.empty())
                return true;
    return false;
}

} // namespace snpl

#endif // SNPL_CORPUS_HPP
