// Synthetic corpora with known ground truth: planted gold links with
// controlled string corruption, planted heavy-tailed citation counts, and a
// planted quality-value elasticity. Field vocabularies are disjoint and the
// numeric ranges are separated (years 4 digits, volumes 1-2, pages 3), so
// the per-field survival record of a corrupted string predicts the matcher's
// indicator bits exactly.

#ifndef SNPL_SYNTH_HPP
#define SNPL_SYNTH_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <optional>
#include <string>
#include <vector>

#include "snpl/corpus.hpp"
#include "snpl/match.hpp"

namespace snpl::synth {

// Per-field drop/typo probabilities, indexed in indicator order
// (year, volume, pages, author, journal, title).
struct Corruption {
    std::array<double, 6> drop{};
    std::array<double, 6> typo{};

    static Corruption uniform_drop(double p) {
        Corruption c;
        c.drop.fill(p);
        return c;
    }
};

struct SynthConfig {
    std::uint64_t seed = 42;
    int n_pubs = 5000;
    int n_families = 1500;
    int pub_year_min = 1982;
    int pub_year_max = 2008;
    int filing_year_min = 1995;
    int filing_year_max = 2008;
    int n_tech_fields = 8; // uses WIPO fields 1..n
    int n_applicants = 60;
    int n_journals = 40;
    double zero_citation_mass = 0.5; // atom at zero science citations
    double citation_skew = 1.3;      // power-law tail exponent (counts above 5)
    int citation_cap = 5000;
    double snpl_share = 0.55;            // families with at least one reference
    int max_refs_per_family = 6;
    double selection_weight_power = 1.5; // reference weight = cit3y^power
    double planted_beta = 0.05;          // elasticity of value in log(1+q_max)
    std::optional<double> planted_has_coef; // null: center the bottom half on zero
    double noise_sd = 0.35;
    double fe_tech_year_sd = 0.25;
    double fe_applicant_sd = 0.20;
    double value_intercept_cit = 1.2;   // log scale of 5y citation counts
    double value_intercept_money = 2.0; // log scale of monetary values
    double backref_mean = 2.0;
    Corruption corruption;
};

struct SurvivalRecord {
    std::string family_id;
    int npl_index = 0;
    std::string pub_id;
    int template_id = 0;
    std::array<bool, 6> survived{}; // indicator order
};

struct SynthResult {
    Corpus corpus; // includes gold_links
    std::vector<SurvivalRecord> survival;
    double planted_beta = 0.0;
    double has_coef = 0.0;
    std::map<std::string, double> fe_tech_year; // "field|year" -> effect
    std::map<std::string, double> fe_applicant; // applicant id -> effect
    std::vector<double> q_max_true;   // per family; -1 when no references
    std::vector<double> value_index;  // per family; exact log1p(monetary_usd)
};

namespace detail {

// Deterministic portable sampling on top of mt19937_64; the standard
// distributions are implementation-defined, these are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    double uniform01() {
        return static_cast<double>(state_() >> 11) * 0x1.0p-53;
    }
    std::size_t index(std::size_t n) {
        return std::min<std::size_t>(n - 1, static_cast<std::size_t>(uniform01() *
                                                                     static_cast<double>(n)));
    }
    int range(int lo, int hi) { // inclusive
        return lo + static_cast<int>(index(static_cast<std::size_t>(hi - lo + 1)));
    }
    bool chance(double p) { return uniform01() < p; }
    double normal(double sd) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_ * sd;
        }
        double u = uniform01(), v = uniform01();
        if (u <= 0.0)
            u = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 6.283185307179586 * v;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a) * sd;
    }

private:
    std::mt19937_64 state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Injective q/x-free consonant-vowel words; disjoint index ranges give
// disjoint vocabularies per field.
inline std::string pool_word(std::size_t k) {
    static const char* cons = "bcdfghjklmnprstvwz"; // 18, no q/x
    static const char* vowels = "aeiou";            // 5
    std::string w;
    for (int s = 0; s < 3; ++s) {
        w.push_back(cons[k % 18]);
        k /= 18;
        w.push_back(vowels[k % 5]);
        k /= 5;
    }
    return w;
}

inline std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z')
        s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

inline constexpr std::size_t kTitleWords = 600;
inline constexpr std::size_t kSurnames = 140;
inline constexpr std::size_t kJournalWords = 90;
inline constexpr std::size_t kOrgWords = 40;

inline std::string title_word(std::size_t i) { return pool_word(i % kTitleWords); }
inline std::string surname(std::size_t i) { return pool_word(kTitleWords + i % kSurnames); }
inline std::string journal_word(std::size_t i) {
    return pool_word(kTitleWords + kSurnames + i % kJournalWords);
}
inline std::string org_word(std::size_t i) {
    return pool_word(kTitleWords + kSurnames + kJournalWords + i % kOrgWords);
}

// Typos keep the field length but break containment: letters become 'q' or
// 'x' (absent from every pool), digits change value within the same width.
inline std::string apply_typo(const std::string& s, Rng& rng) {
    std::string out = s;
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < out.size(); ++i)
        if ((out[i] >= 'a' && out[i] <= 'z') || (out[i] >= 'A' && out[i] <= 'Z') ||
            (out[i] >= '0' && out[i] <= '9'))
            positions.push_back(i);
    if (positions.empty())
        return out;
    const std::size_t p = positions[rng.index(positions.size())];
    if (out[p] >= '0' && out[p] <= '9') {
        out[p] = static_cast<char>('0' + (out[p] - '0' + 1 + static_cast<int>(rng.index(9))) % 10);
        if (p == 0 && out[p] == '0')
            out[p] = '5'; // keep the leading digit nonzero / same width
    } else {
        out[p] = rng.chance(0.5) ? 'q' : 'x';
    }
    return out;
}

} // namespace detail

// Renders one citation string for a publication in one of three styles and
// applies per-field corruption. Returns the string plus the survival bits.
inline std::pair<std::string, std::array<bool, 6>>
corrupt(const Publication& pub, const Corruption& corruption, detail::Rng& rng,
        int template_id) {
    using match::IndAuthor;
    using match::IndJournal;
    using match::IndPages;
    using match::IndTitle;
    using match::IndVolume;
    using match::IndYear;

    std::array<bool, 6> rendered{};  // slot present in the string
    std::array<bool, 6> intact{};    // rendered verbatim (survival bits)
    std::array<std::string, 6> text; // slot text after corruption
    const std::array<std::string, 6> clean = {
        std::to_string(pub.year), pub.volume, pub.first_page,
        pub.first_author_surname, pub.journal_title, pub.title};
    for (std::size_t f = 0; f < 6; ++f) {
        if (rng.chance(corruption.drop[f]))
            continue;
        rendered[f] = true;
        if (rng.chance(corruption.typo[f])) {
            text[f] = detail::apply_typo(clean[f], rng);
            intact[f] = text[f] == clean[f]; // typo may be a no-op on odd input
        } else {
            text[f] = clean[f];
            intact[f] = true;
        }
    }

    const char initial = static_cast<char>('A' + (pub.pub_id.size() * 7 + pub.year) % 26);
    const std::string author_part =
        rendered[IndAuthor] ? detail::capitalize(text[IndAuthor]) + " " + initial + "." : "";

    std::vector<std::string> parts;
    auto add = [&](const std::string& s) {
        if (!s.empty())
            parts.push_back(s);
    };
    std::string out;
    if (template_id == 0) {
        // author-first: Surname I., Title, Journal, vol. V, p. P, Y.
        add(author_part);
        if (rendered[IndTitle])
            add(detail::capitalize(text[IndTitle]));
        if (rendered[IndJournal])
            add(text[IndJournal]);
        if (rendered[IndVolume])
            add("vol. " + text[IndVolume]);
        if (rendered[IndPages])
            add("p. " + text[IndPages]);
        if (rendered[IndYear])
            add(text[IndYear]);
        for (std::size_t i = 0; i < parts.size(); ++i)
            out += (i ? ", " : "") + parts[i];
        if (!out.empty())
            out += ".";
    } else if (template_id == 1) {
        // title-first: "Title", Surname I., Journal Y; V:P.
        if (rendered[IndTitle])
            add("\"" + detail::capitalize(text[IndTitle]) + "\"");
        add(author_part);
        std::string tail;
        if (rendered[IndJournal])
            tail = text[IndJournal];
        if (rendered[IndYear])
            tail += (tail.empty() ? "" : " ") + text[IndYear];
        add(tail);
        if (rendered[IndVolume] && rendered[IndPages])
            add(text[IndVolume] + ":" + text[IndPages]);
        else if (rendered[IndVolume])
            add("vol. " + text[IndVolume]);
        else if (rendered[IndPages])
            add("p. " + text[IndPages]);
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i)
                out += (i == 1 && rendered[IndTitle]) ? ", " : "; ";
            out += parts[i];
        }
        if (!out.empty())
            out += ".";
    } else {
        // terse: Surname I. Journal V (Y) P. Title.
        std::string head = author_part;
        std::string body;
        if (rendered[IndJournal])
            body = text[IndJournal];
        if (rendered[IndVolume] && rendered[IndYear] && rendered[IndPages]) {
            body += " " + text[IndVolume] + " (" + text[IndYear] + ") " + text[IndPages];
        } else {
            if (rendered[IndVolume])
                body += " vol. " + text[IndVolume];
            if (rendered[IndYear])
                body += " (" + text[IndYear] + ")";
            if (rendered[IndPages])
                body += ", p. " + text[IndPages];
        }
        if (!head.empty())
            out = head;
        if (!body.empty() && body != " ")
            out += (out.empty() ? "" : " ") + body;
        if (!out.empty())
            out += ".";
        if (rendered[IndTitle])
            out += (out.empty() ? "" : " ") + detail::capitalize(text[IndTitle]) + ".";
    }
    if (out.empty())
        out = "n.a.";
    return {out, intact};
}

inline SynthResult generate(const SynthConfig& cfg) {
    if (cfg.n_pubs < 1 || cfg.n_families < 1)
        throw std::invalid_argument("generate: counts must be positive");
    for (double p : cfg.corruption.drop)
        if (p < 0 || p > 1)
            throw std::invalid_argument("generate: drop probability outside [0,1]");
    for (double p : cfg.corruption.typo)
        if (p < 0 || p > 1)
            throw std::invalid_argument("generate: typo probability outside [0,1]");

    detail::Rng rng(cfg.seed);
    SynthResult result;
    result.planted_beta = cfg.planted_beta;
    Corpus& corpus = result.corpus;

    // --- journals: cue-word styles around a distinct journal word
    std::vector<std::string> journals;
    for (int j = 0; j < cfg.n_journals; ++j) {
        const std::string w1 = detail::journal_word(static_cast<std::size_t>(2 * j));
        const std::string w2 = detail::journal_word(static_cast<std::size_t>(2 * j + 1));
        switch (j % 5) {
        case 0: journals.push_back("journal of " + w1 + " " + w2); break;
        case 1: journals.push_back("acta " + w1); break;
        case 2: journals.push_back(w1 + " letters"); break;
        case 3: journals.push_back("annalen der " + w1); break;
        default: journals.push_back(w1 + " " + w2 + " review"); break;
        }
    }

    // --- organizations
    std::vector<std::string> orgs;
    static const char* suffixes[4] = {"labs", "institute", "university", "corp"};
    for (int a = 0; a < cfg.n_applicants; ++a)
        orgs.push_back(detail::org_word(static_cast<std::size_t>(a)) + " " +
                       suffixes[a % 4]);

    // --- field codes: two-letter combos avoiding the multidisciplinary list
    static const std::vector<std::string> multi_codes = {"ah", "vj", "wu", "bq", "po", "ev",
                                                         "ui", "dy", "le", "ro", "if", "pm"};
    std::vector<std::string> field_codes;
    for (char a = 'a'; a <= 'z' && field_codes.size() < 30; ++a) {
        for (char b = 'a'; b <= 'z' && field_codes.size() < 30; ++b) {
            if (a == 'q' || a == 'x' || b == 'q' || b == 'x')
                continue;
            std::string code{a, b};
            if (std::find(multi_codes.begin(), multi_codes.end(), code) != multi_codes.end())
                continue;
            field_codes.push_back(code);
            b = static_cast<char>(b + 4); // spread out
        }
        a = static_cast<char>(a + 1);
    }

    // --- publications, sorted by year for prefix-restricted sampling
    corpus.publications.reserve(static_cast<std::size_t>(cfg.n_pubs));
    std::vector<int> cit_count(static_cast<std::size_t>(cfg.n_pubs));
    for (int i = 0; i < cfg.n_pubs; ++i) {
        Publication p;
        p.pub_id = "P" + std::to_string(i);
        p.year = cfg.pub_year_min +
                 static_cast<int>((static_cast<long long>(i) *
                                   (cfg.pub_year_max - cfg.pub_year_min + 1)) /
                                  cfg.n_pubs);
        const std::size_t base = static_cast<std::size_t>(i);
        // two deterministic tag words make every title token set unique
        std::vector<std::string> words;
        words.push_back(detail::title_word(base % detail::kTitleWords));
        words.push_back(detail::title_word((base / detail::kTitleWords + 137) %
                                           detail::kTitleWords));
        const int extra = static_cast<int>(rng.index(3)) + 1;
        for (int w = 0; w < extra; ++w)
            words.push_back(detail::title_word(rng.index(detail::kTitleWords)));
        for (std::size_t w = 0; w < words.size(); ++w)
            p.title += (w ? " " : "") + words[w];
        p.journal_title = journals[rng.index(journals.size())];
        p.volume = std::to_string(rng.range(1, 99));      // 1-2 digits
        p.first_page = std::to_string(rng.range(100, 999)); // 3 digits
        const int n_authors = rng.range(1, 3);
        for (int a = 0; a < n_authors; ++a)
            p.author_surnames.push_back(detail::surname(rng.index(detail::kSurnames)));
        p.first_author_surname = p.author_surnames.front();
        const int n_codes = rng.range(1, 3);
        for (int c = 0; c < n_codes; ++c)
            p.field_codes.push_back(field_codes[rng.index(field_codes.size())]);
        if (rng.chance(0.05))
            p.field_codes.push_back(multi_codes[rng.index(multi_codes.size())]);
        std::sort(p.field_codes.begin(), p.field_codes.end());
        p.field_codes.erase(std::unique(p.field_codes.begin(), p.field_codes.end()),
                            p.field_codes.end());
        const int n_affil = static_cast<int>(rng.index(3)); // 0..2
        for (int a = 0; a < n_affil; ++a)
            p.affiliation_names.push_back(orgs[rng.index(orgs.size())]);

        // planted science quality: atom at zero, a staircase over small
        // counts, and a power-law tail. The staircase keeps the default
        // percentile grid (p50..p99.99) non-degenerate at n >= 1e5: no single
        // count value spans two adjacent percentile cuts.
        int count = 0;
        if (!rng.chance(cfg.zero_citation_mass)) {
            const double u = rng.uniform01();
            if (u < 0.3208) {
                count = 1;
            } else if (u < 0.4528) {
                count = 2;
            } else if (u < 0.5283) {
                count = 3;
            } else if (u < 0.5849) {
                count = 4;
            } else if (u < 0.6321) {
                count = 5;
            } else {
                double v = rng.uniform01();
                if (v <= 0.0)
                    v = 0x1.0p-53;
                count = static_cast<int>(std::min<double>(
                    cfg.citation_cap,
                    std::floor(6.0 * std::pow(v, -1.0 / cfg.citation_skew))));
            }
        }
        cit_count[static_cast<std::size_t>(i)] = count;
        corpus.publications.push_back(std::move(p));
    }

    // selection weights: monotone in citation count, zero at zero
    std::vector<double> weight_prefix(static_cast<std::size_t>(cfg.n_pubs) + 1, 0.0);
    for (int i = 0; i < cfg.n_pubs; ++i)
        weight_prefix[static_cast<std::size_t>(i) + 1] =
            weight_prefix[static_cast<std::size_t>(i)] +
            (cit_count[static_cast<std::size_t>(i)] > 0
                 ? std::pow(cit_count[static_cast<std::size_t>(i)],
                            cfg.selection_weight_power)
                 : 0.0);
    // publications are year-sorted: eligible prefix per filing year
    auto eligible_end = [&](int filing_year) {
        std::size_t lo = 0, hi = corpus.publications.size();
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (corpus.publications[mid].year <= filing_year)
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo;
    };
    auto draw_reference = [&](int filing_year) -> std::optional<std::size_t> {
        const std::size_t end = eligible_end(filing_year);
        const double total = weight_prefix[end];
        if (end == 0 || total <= 0.0)
            return std::nullopt;
        const double target = rng.uniform01() * total;
        std::size_t lo = 0, hi = end;
        while (lo + 1 < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (weight_prefix[mid] <= target)
                lo = mid;
            else
                hi = mid;
        }
        return lo;
    };

    // --- science citation events realize the planted counts exactly
    for (int i = 0; i < cfg.n_pubs; ++i) {
        const auto& pub = corpus.publications[static_cast<std::size_t>(i)];
        for (int c = 0; c < cit_count[static_cast<std::size_t>(i)]; ++c) {
            std::size_t citer = rng.index(corpus.publications.size());
            if (citer == static_cast<std::size_t>(i))
                citer = (citer + 1) % corpus.publications.size();
            corpus.citations.push_back({corpus.publications[citer].pub_id, pub.pub_id,
                                        CitationKind::SciSci,
                                        pub.year + static_cast<int>(rng.index(3))});
        }
    }

    // --- technology-field x filing-year and applicant effects
    for (int tf = 1; tf <= cfg.n_tech_fields; ++tf)
        for (int y = cfg.filing_year_min; y <= cfg.filing_year_max; ++y)
            result.fe_tech_year[std::to_string(tf) + "|" + std::to_string(y)] =
                rng.normal(cfg.fe_tech_year_sd);
    for (int a = 0; a < cfg.n_applicants; ++a)
        result.fe_applicant["A" + std::to_string(a)] = rng.normal(cfg.fe_applicant_sd);

    // --- families with references, values, and corrupted strings
    corpus.families.reserve(static_cast<std::size_t>(cfg.n_families));
    result.q_max_true.assign(static_cast<std::size_t>(cfg.n_families), -1.0);
    result.value_index.assign(static_cast<std::size_t>(cfg.n_families), 0.0);
    struct PlannedRef {
        std::size_t family = 0;
        int npl_index = 0;
        std::size_t pub = 0;
    };
    std::vector<PlannedRef> planned;
    for (int f = 0; f < cfg.n_families; ++f) {
        PatentFamily family;
        family.family_id = "F" + std::to_string(f);
        family.first_filing_year = rng.range(cfg.filing_year_min, cfg.filing_year_max);
        family.tech_field = rng.range(1, cfg.n_tech_fields);
        family.main_area = default_main_area(family.tech_field);
        family.offices = 0;
        const double office_draw = rng.uniform01();
        if (office_draw < 0.4)
            family.offices = office_mask(Office::US);
        else if (office_draw < 0.7)
            family.offices = office_mask(Office::EP);
        else
            family.offices = office_mask(Office::US) | office_mask(Office::EP);
        const int n_inventors = rng.range(1, 6);
        family.n_inventors = n_inventors;
        for (int v = 0; v < n_inventors; ++v)
            family.inventor_surnames.push_back(detail::surname(rng.index(detail::kSurnames)));
        const std::size_t org = rng.index(orgs.size());
        family.applicant_names.push_back(orgs[org]);
        family.first_applicant_id = "A" + std::to_string(org);

        if (rng.chance(cfg.snpl_share)) {
            const int want = rng.range(1, cfg.max_refs_per_family);
            std::vector<std::size_t> chosen;
            for (int r = 0; r < want; ++r) {
                const auto pick = draw_reference(family.first_filing_year);
                if (!pick)
                    break;
                if (std::find(chosen.begin(), chosen.end(), *pick) != chosen.end())
                    continue;
                chosen.push_back(*pick);
            }
            double qmax = -1.0;
            for (const auto pub_idx : chosen) {
                planned.push_back({static_cast<std::size_t>(f),
                                   static_cast<int>(family.npl_strings.size()), pub_idx});
                family.npl_strings.emplace_back(); // rendered below
                qmax = std::max(qmax, static_cast<double>(cit_count[pub_idx]));
            }
            if (!family.npl_strings.empty())
                result.q_max_true[static_cast<std::size_t>(f)] = qmax;
        }
        corpus.families.push_back(std::move(family));
    }

    // hasSNPL level effect: by default centered so that families in the
    // bottom half of q_max are on par with families without references
    double has_coef = 0.0;
    if (cfg.planted_has_coef) {
        has_coef = *cfg.planted_has_coef;
    } else if (cfg.planted_beta != 0.0) {
        std::vector<double> logq;
        for (double q : result.q_max_true)
            if (q >= 0.0)
                logq.push_back(std::log1p(q));
        if (!logq.empty()) {
            std::sort(logq.begin(), logq.end());
            const std::size_t half = std::max<std::size_t>(1, logq.size() / 2);
            double s = 0.0;
            for (std::size_t i = 0; i < half; ++i)
                s += logq[i];
            has_coef = -cfg.planted_beta * (s / static_cast<double>(half));
        }
    }
    result.has_coef = has_coef;

    // --- backward references (to families with earlier or equal filing)
    std::vector<std::size_t> by_filing(corpus.families.size());
    for (std::size_t i = 0; i < by_filing.size(); ++i)
        by_filing[i] = i;
    std::sort(by_filing.begin(), by_filing.end(), [&](std::size_t a, std::size_t b) {
        return corpus.families[a].first_filing_year < corpus.families[b].first_filing_year;
    });
    std::vector<std::size_t> rank_of(corpus.families.size());
    for (std::size_t r = 0; r < by_filing.size(); ++r)
        rank_of[by_filing[r]] = r;
    for (std::size_t f = 0; f < corpus.families.size(); ++f) {
        const int n_refs = static_cast<int>(rng.index(
            static_cast<std::size_t>(2 * cfg.backref_mean) + 1));
        for (int r = 0; r < n_refs && rank_of[f] > 0; ++r) {
            const std::size_t target = by_filing[rng.index(rank_of[f])];
            const auto& id = corpus.families[target].family_id;
            auto& refs = corpus.families[f].backward_patent_refs;
            if (std::find(refs.begin(), refs.end(), id) == refs.end())
                refs.push_back(id);
        }
    }

    // --- values: log-linear in the planted quality index plus FE and noise
    std::vector<std::size_t> us_citers, ep_citers;
    for (std::size_t f = 0; f < corpus.families.size(); ++f) {
        if (corpus.families[f].has_office(Office::US))
            us_citers.push_back(f);
        if (corpus.families[f].has_office(Office::EP))
            ep_citers.push_back(f);
    }
    for (std::size_t f = 0; f < corpus.families.size(); ++f) {
        auto& family = corpus.families[f];
        const bool has = result.q_max_true[f] >= 0.0;
        const double logq = has ? std::log1p(result.q_max_true[f]) : 0.0;
        const double fe =
            result.fe_tech_year.at(std::to_string(family.tech_field) + "|" +
                                   std::to_string(family.first_filing_year)) +
            result.fe_applicant.at(family.first_applicant_id);
        const double signal = (has ? has_coef : 0.0) + cfg.planted_beta * (has ? logq : 0.0) + fe;

        const double z_money = cfg.value_intercept_money + signal + rng.normal(cfg.noise_sd);
        family.monetary_value_usd = std::max(0.0, std::exp(z_money) - 1.0);
        result.value_index[f] = std::log1p(*family.monetary_value_usd);

        const double z_cit = cfg.value_intercept_cit + signal + rng.normal(cfg.noise_sd);
        const int us_count =
            static_cast<int>(std::max(0.0, std::round(std::exp(z_cit) - 1.0)));
        const double z_ep = 0.8 * cfg.value_intercept_cit + signal + rng.normal(cfg.noise_sd);
        const int ep_count =
            static_cast<int>(std::max(0.0, std::round(std::exp(z_ep) - 1.0)));
        auto emit_citers = [&](const std::vector<std::size_t>& pool, int count) {
            if (pool.empty())
                return;
            for (int c = 0; c < count; ++c) {
                std::size_t citer = pool[rng.index(pool.size())];
                if (citer == f)
                    citer = pool[(rng.index(pool.size()) + 1) % pool.size()];
                if (citer == f)
                    continue;
                corpus.citations.push_back(
                    {corpus.families[citer].family_id, family.family_id, CitationKind::PatPat,
                     family.first_filing_year + static_cast<int>(rng.index(5))});
            }
        };
        emit_citers(us_citers, us_count);
        emit_citers(ep_citers, ep_count);

        // claim scope shrinks (longer first claim) for lower-value patents
        if (rng.chance(0.85) && family.has_office(Office::US))
            family.first_claim_wordcount_us = std::max(
                15, static_cast<int>(std::round(std::exp(4.8 - 0.10 * signal +
                                                          rng.normal(0.25)))));
        if (rng.chance(0.85) && family.has_office(Office::EP))
            family.first_claim_wordcount_ep = std::max(
                15, static_cast<int>(std::round(std::exp(4.6 - 0.10 * signal +
                                                          rng.normal(0.25)))));
        if (rng.chance(0.10))
            family.monetary_value_patval_eur =
                std::max(0.0, std::exp(1.5 + signal + rng.normal(cfg.noise_sd)) - 1.0);
    }

    // --- render the reference strings and record gold links + survival
    for (const auto& plan : planned) {
        auto& family = corpus.families[plan.family];
        const auto& pub = corpus.publications[plan.pub];
        const int template_id = static_cast<int>(rng.index(3));
        auto [raw, survived] = corrupt(pub, cfg.corruption, rng, template_id);
        family.npl_strings[static_cast<std::size_t>(plan.npl_index)] = std::move(raw);
        corpus.gold_links.push_back({family.family_id, plan.npl_index, pub.pub_id});
        result.survival.push_back(
            {family.family_id, plan.npl_index, pub.pub_id, template_id, survived});
    }

    corpus.rebuild_indexes();
    return result;
}

} // namespace snpl::synth

#endif // SNPL_SYNTH_HPP
