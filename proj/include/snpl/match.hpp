// Linking of patent NPL reference strings to publications: target selection,
// candidate search over an inverted bibliographic index, quality-controlled
// acceptance of the top-ranked candidate, and the precision/recall harness.

#ifndef SNPL_MATCH_HPP
#define SNPL_MATCH_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "snpl/corpus.hpp"
#include "snpl/parallel.hpp"
#include "snpl/text.hpp"

namespace snpl::match {

// Indicator order used everywhere: year, volume, pages, first author,
// journal title, article title.
enum Indicator : std::size_t {
    IndYear = 0,
    IndVolume,
    IndPages,
    IndAuthor,
    IndJournal,
    IndTitle,
    IndicatorCount
};

using IndicatorBits = std::array<bool, IndicatorCount>;

struct ParsedReference {
    std::string raw;
    std::string raw_normalized; // cached normal form of raw
    std::optional<int> year;
    std::optional<std::string> volume;
    std::optional<std::string> first_page;
    std::optional<std::string> first_author_surname; // normalized
    std::optional<std::string> journal_title;        // normalized
    std::optional<std::string> article_title;        // normalized
    bool is_target = false;
};

struct MatchCandidate {
    std::string pub_id;
    double retrieval_score = 0.0; // ranking only
    int quality_score = 0;        // popcount of indicators
    IndicatorBits indicators{};
};

struct SnplLink {
    std::string family_id;
    int npl_index = 0;
    std::string pub_id;
    int quality_score = 0;
    IndicatorBits indicators{};
    bool is_inventor_self_ref = false;
    bool is_applicant_self_ref = false;
};

struct MatchConfig {
    int threshold = 3; // accept quality >= threshold
    int k = 10;        // retrieval breadth
    double weight_title = 3.0;
    double weight_journal = 2.0;
    double weight_author = 2.0;
    double weight_exact = 1.0; // year / volume / page hits
    int threads = 0;           // 0: hardware concurrency
};

// ---------------------------------------------------------------------------
// parse_npl: best-effort field extraction from a raw citation string
// ---------------------------------------------------------------------------

namespace detail {

inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z')
            c = static_cast<char>(c - 'A' + 'a');
    return out;
}

inline bool is_word(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

struct Token {
    std::string value; // lowercase
    std::size_t begin = 0;
    std::size_t end = 0;
    bool numeric = false;
};

inline std::vector<Token> scan_tokens(const std::string& low) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < low.size()) {
        if (!is_word(low[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        bool numeric = true;
        while (j < low.size() && is_word(low[j])) {
            numeric = numeric && is_digit(low[j]);
            ++j;
        }
        out.push_back({low.substr(i, j - i), i, j, numeric});
        i = j;
    }
    return out;
}

inline bool any_phrase(const std::string& norm, std::initializer_list<const char*> phrases) {
    for (const char* p : phrases)
        if (text::contains_phrase(norm, p))
            return true;
    return false;
}

// Exclusion patterns for the target-selection step: bare URLs, office and
// search artifacts, standards documents. Best-effort list, driven by the
// parser fixture set.
inline bool is_excluded(const std::string& raw, const std::string& norm,
                        const std::vector<Token>& toks) {
    std::string trimmed;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c)))
            trimmed.push_back(c);
    const std::string lowtrim = ascii_lower(trimmed);
    if (lowtrim.rfind("http://", 0) == 0 || lowtrim.rfind("https://", 0) == 0 ||
        lowtrim.rfind("www.", 0) == 0) {
        // URL-only strings carry no bibliographic fields to match on.
        if (raw.find(' ') == std::string::npos || lowtrim.find(' ') == std::string::npos)
            return true;
    }
    if (any_phrase(norm, {"search report", "office action", "examination report",
                          "international search", "supplementary european search"}))
        return true;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (t.value == "3gpp" || t.value == "etsi")
            return true; // standards bodies
        if (i + 1 == toks.size())
            continue;
        const auto& next = toks[i + 1];
        if (t.value == "xp" && next.numeric && next.value.size() >= 6)
            return true; // DOCDB XP accession numbers
        if ((t.value == "iso" || t.value == "iec" || t.value == "din" || t.value == "rfc") &&
            next.numeric)
            return true;
    }
    if (text::contains_phrase(norm, "ieee std"))
        return true;
    return false;
}

inline const std::vector<std::string>& journal_cues() {
    static const std::vector<std::string> cues = {
        "journal", "j",       "rev",     "review",  "phys",    "proc", "proceedings",
        "trans",   "transactions", "lett", "letters", "acta",  "annals", "annalen",
        "nature",  "science", "bull",    "bulletin", "zeitschrift", "arch", "archiv"};
    return cues;
}

inline bool is_journal_cue(const std::string& t) {
    const auto& cues = journal_cues();
    return std::find(cues.begin(), cues.end(), t) != cues.end();
}

inline bool is_stopword(const std::string& t) {
    static const std::vector<std::string> stop = {"the", "a",  "an", "on", "in",
                                                  "of",  "and", "for", "et", "al"};
    return std::find(stop.begin(), stop.end(), t) != stop.end();
}

} // namespace detail

inline ParsedReference parse_npl(const std::string& raw) {
    if (raw.empty())
        throw std::invalid_argument("parse_npl: empty string");

    ParsedReference ref;
    ref.raw = raw;
    ref.raw_normalized = text::normalize(raw);
    const std::string low = detail::ascii_lower(raw);
    const auto toks = detail::scan_tokens(low);

    if (detail::is_excluded(raw, ref.raw_normalized, toks)) {
        ref.is_target = false;
        return ref;
    }

    auto comma_between = [&](std::size_t left_tok, std::size_t right_tok) {
        for (std::size_t p = toks[left_tok].end; p < toks[right_tok].begin; ++p)
            if (raw[p] == ',' || raw[p] == ';')
                return true;
        return false;
    };
    auto parenthesized = [&](std::size_t i) {
        return toks[i].begin > 0 && raw[toks[i].begin - 1] == '(' && toks[i].end < raw.size() &&
               raw[toks[i].end] == ')';
    };

    // --- year: prefer the first parenthesized 4-digit value, else the last
    // in-range 4-digit token.
    std::optional<std::size_t> year_tok;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (!t.numeric || t.value.size() != 4)
            continue;
        const int v = std::stoi(t.value);
        if (v < 1500 || v > 2099)
            continue;
        if (year_tok && parenthesized(*year_tok))
            continue;
        if (parenthesized(i) || !year_tok || i > *year_tok) {
            year_tok = i;
            ref.year = v;
        }
    }

    // --- volume and pages via marker tokens.
    std::optional<std::size_t> vol_tok;
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
        const auto& t = toks[i];
        const auto& next = toks[i + 1];
        if (!ref.volume &&
            (t.value == "vol" || t.value == "volume" ||
             (t.value == "v" && t.end < low.size() && low[t.end] == '.' && next.numeric))) {
            ref.volume = next.value;
            vol_tok = i + 1;
        }
        if (!ref.first_page &&
            (t.value == "p" || t.value == "pp" || t.value == "page" || t.value == "pages") &&
            next.numeric &&
            (t.end >= low.size() || low[t.end] == '.' || low[t.end] == ' ' ||
             low[t.end] == ':')) {
            ref.first_page = next.value;
        }
    }
    // "12:345" style and "57 (1985) 123" style.
    for (std::size_t i = 0; i < toks.size() && !ref.volume; ++i) {
        const auto& t = toks[i];
        if (!t.numeric || t.value.size() > 4)
            continue;
        if (year_tok && *year_tok == i)
            continue;
        if (t.end < low.size() && low[t.end] == ':' && i + 1 < toks.size() &&
            toks[i + 1].numeric) {
            ref.volume = t.value;
            vol_tok = i;
            if (!ref.first_page)
                ref.first_page = toks[i + 1].value;
        } else if (year_tok && i + 2 < toks.size() && *year_tok == i + 1 &&
                   parenthesized(*year_tok) && toks[i + 2].numeric) {
            ref.volume = t.value;
            vol_tok = i;
            if (!ref.first_page)
                ref.first_page = toks[i + 2].value;
        }
    }

    // --- quoted span is the article title if present. An apostrophe after a
    // letter (O'Leary) does not open a quote; one before a letter (don't...)
    // does not close it.
    std::size_t leading_quote_end = 0;
    {
        auto word_at = [&](std::size_t i) { return i < raw.size() && detail::is_word(raw[i]); };
        std::size_t q0 = std::string::npos;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if ((raw[i] == '\'' || raw[i] == '"') && (i == 0 || !detail::is_word(raw[i - 1]))) {
                q0 = i;
                break;
            }
        }
        if (q0 != std::string::npos) {
            std::size_t q1 = std::string::npos;
            for (std::size_t i = q0 + 1; i < raw.size(); ++i) {
                if (raw[i] == raw[q0] && !word_at(i + 1)) {
                    q1 = i;
                    break;
                }
            }
            if (q1 != std::string::npos && q1 > q0 + 3) {
                const std::string norm = text::normalize(raw.substr(q0 + 1, q1 - q0 - 1));
                if (!norm.empty()) {
                    ref.article_title = norm;
                    if (q0 <= 2)
                        leading_quote_end = q1 + 1; // title-first style
                }
            }
        }
    }

    // --- first author: leading surname heuristic on the first short segment
    // (bounded by ','/';'/':' or '. '), after any leading quoted title. A
    // single leading initial ("T. Nishino") is skipped once; the candidate is
    // rejected when it starts an abbreviation chain ("J. Biol. Chem.").
    {
        std::size_t pos = leading_quote_end;
        bool skipped_initial = false;
        for (int attempt = 0; attempt < 2; ++attempt) {
            while (pos < raw.size() &&
                   (raw[pos] == ',' || raw[pos] == ';' || raw[pos] == ' ' || raw[pos] == '.'))
                ++pos;
            const std::string region = raw.substr(pos);
            const std::string region_low = detail::ascii_lower(region);
            const auto rtoks = detail::scan_tokens(region_low);
            std::size_t seg_end = region.size();
            for (std::size_t i = 0; i < region.size(); ++i) {
                if (region[i] == ',' || region[i] == ';' || region[i] == ':' ||
                    (region[i] == '.' && i + 1 < region.size() && region[i + 1] == ' ')) {
                    seg_end = i;
                    break;
                }
            }
            std::size_t seg_tokens = 0, seg_numeric = 0, seg_short = 0;
            for (const auto& t : rtoks) {
                if (t.begin >= seg_end)
                    break;
                if (t.numeric)
                    ++seg_numeric;
                else {
                    ++seg_tokens;
                    if (t.value.size() < 2)
                        ++seg_short;
                }
            }
            if (seg_numeric > 0)
                break; // author segments carry no numbers
            if (seg_tokens >= 1 && seg_tokens == seg_short && !skipped_initial) {
                // all tokens are bare initials: skip this segment once
                pos = std::min(pos + seg_end + 1, raw.size());
                skipped_initial = true;
                continue;
            }
            if (seg_tokens >= 1 && seg_tokens <= 4) {
                for (const auto& t : rtoks) {
                    if (t.begin >= seg_end)
                        break;
                    if (t.numeric || t.value.size() < 2)
                        continue;
                    if (detail::is_stopword(t.value) || detail::is_journal_cue(t.value))
                        continue;
                    if (t.value == "vol" || t.value == "volume")
                        continue;
                    if (skipped_initial && t.end < region.size() && region[t.end] == '.')
                        break; // abbreviation chain, not a surname
                    ref.first_author_surname =
                        text::normalize(region.substr(t.begin, t.end - t.begin));
                    break;
                }
            }
            break;
        }
    }

    // --- journal: expand around a cue token (multi-letter cues first;
    // a bare "j" only counts when an abbreviated journal name follows it);
    // without a cue, fall back to the tokens just before the volume marker.
    std::size_t journal_begin = std::string::npos, journal_end = 0;
    {
        auto author_token = [&](std::size_t i) {
            return ref.first_author_surname &&
                   text::normalize(toks[i].value) == *ref.first_author_surname;
        };
        std::optional<std::size_t> cue;
        for (std::size_t i = 0; i < toks.size() && !cue; ++i)
            if (!toks[i].numeric && toks[i].value.size() >= 2 &&
                detail::is_journal_cue(toks[i].value) && !author_token(i))
                cue = i;
        if (!cue) {
            for (std::size_t i = 0; i + 1 < toks.size() && !cue; ++i)
                if (toks[i].value == "j" && !toks[i + 1].numeric &&
                    toks[i + 1].value.size() >= 3 && !comma_between(i, i + 1) &&
                    !author_token(i + 1))
                    cue = i;
        }
        auto usable = [&](std::size_t i) {
            const auto& t = toks[i];
            if (t.numeric)
                return false;
            if (t.value == "vol" || t.value == "volume" || t.value == "p" || t.value == "pp" ||
                t.value == "no" || t.value == "issue")
                return false;
            if (t.value.size() == 1 && !detail::is_journal_cue(t.value))
                return false;
            return true;
        };
        if (cue) {
            std::size_t lo = *cue, hi = *cue;
            while (lo > 0 && usable(lo - 1) && !comma_between(lo - 1, lo) &&
                   (detail::is_journal_cue(toks[lo - 1].value) || toks[lo - 1].value == "of" ||
                    toks[lo - 1].value.size() >= 3))
                --lo;
            while (hi + 1 < toks.size() && usable(hi + 1) && !comma_between(hi, hi + 1) &&
                   (toks[hi + 1].value == "of" || toks[hi + 1].value.size() >= 2))
                ++hi;
            journal_begin = toks[lo].begin;
            journal_end = toks[hi].end;
        } else if (vol_tok && *vol_tok > 0) {
            // walk left from the volume marker, skipping the year token
            std::size_t i = *vol_tok; // points at the volume value token
            std::size_t stop = i;
            while (stop > 0) {
                const std::size_t prev = stop - 1;
                if (toks[prev].value == "vol" || toks[prev].value == "volume" ||
                    toks[prev].value == "v" || (year_tok && prev == *year_tok)) {
                    --stop;
                    continue;
                }
                break;
            }
            std::size_t first = stop;
            std::size_t collected = 0;
            while (first > 0 && collected < 4) {
                const std::size_t prev = first - 1;
                if (!usable(prev) || author_token(prev))
                    break;
                if (collected > 0 && comma_between(prev, first))
                    break;
                --first;
                ++collected;
            }
            if (collected > 0) {
                journal_begin = toks[first].begin;
                journal_end = toks[stop - 1].end;
            }
        }
        if (journal_begin != std::string::npos && journal_end > journal_begin) {
            const std::string norm =
                text::normalize(raw.substr(journal_begin, journal_end - journal_begin));
            if (!norm.empty())
                ref.journal_title = norm;
        }
    }

    // --- article title fallback: the densest text segment not claimed above.
    if (!ref.article_title) {
        struct Segment {
            std::size_t begin, end;
        };
        std::vector<Segment> segments;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= raw.size(); ++i) {
            const bool cut = i == raw.size() || raw[i] == ',' || raw[i] == ';' ||
                             (raw[i] == ':' && (i + 1 == raw.size() || raw[i + 1] == ' ')) ||
                             (raw[i] == '.' && i + 1 < raw.size() && raw[i + 1] == ' ' &&
                              i >= start + 4);
            if (cut) {
                if (i > start)
                    segments.push_back({start, i});
                start = i + 1;
            }
        }
        std::size_t best_score = 0;
        for (const auto& seg : segments) {
            if (journal_begin != std::string::npos && seg.begin < journal_end &&
                journal_end > seg.begin && seg.end > journal_begin)
                continue; // overlaps the journal span
            std::size_t alpha = 0, numbers = 0;
            bool has_marker = false;
            for (const auto& t : toks) {
                if (t.begin < seg.begin || t.end > seg.end)
                    continue;
                if (t.numeric) {
                    ++numbers;
                    continue;
                }
                if (t.value == "vol" || t.value == "volume" || t.value == "p" ||
                    t.value == "pp" || t.value == "page" || t.value == "pages")
                    has_marker = true;
                if (ref.first_author_surname &&
                    text::normalize(t.value) == *ref.first_author_surname && seg.begin == 0)
                    has_marker = true; // author segment
                if (t.value.size() >= 3 && !detail::is_stopword(t.value))
                    ++alpha;
            }
            if (has_marker || numbers > alpha)
                continue;
            if (alpha >= 2 && alpha > best_score) {
                best_score = alpha;
                const std::string norm =
                    text::normalize(raw.substr(seg.begin, seg.end - seg.begin));
                if (!norm.empty())
                    ref.article_title = norm;
            }
        }
    }

    // Target selection: need at least a year or a usable title.
    bool title_token = false;
    if (ref.article_title)
        for (const auto& t : text::tokens(*ref.article_title))
            if (t.size() >= 3)
                title_token = true;
    ref.is_target = ref.year.has_value() || title_token;
    return ref;
}

// ---------------------------------------------------------------------------
// BiblioIndex
// ---------------------------------------------------------------------------

class BiblioIndex {
public:
    struct PubEntry {
        std::string pub_id;
        int year = 0;
        std::string volume_norm;
        std::string page_norm;
    };

    static BiblioIndex build(const std::vector<Publication>& pubs) {
        BiblioIndex index;
        index.pubs_.reserve(pubs.size());
        std::unordered_map<std::string, std::size_t> seen;
        for (std::size_t i = 0; i < pubs.size(); ++i) {
            const auto& p = pubs[i];
            if (!seen.emplace(p.pub_id, i).second)
                throw std::runtime_error("build_index: duplicate pub_id '" + p.pub_id + "'");
            PubEntry e;
            e.pub_id = p.pub_id;
            e.year = p.year;
            e.volume_norm = text::normalize(p.volume);
            e.page_norm = text::normalize(p.first_page);
            index.pubs_.push_back(std::move(e));

            const auto id = static_cast<std::uint32_t>(i);
            index.add_tokens(index.title_, text::normalize(p.title), id);
            index.add_tokens(index.journal_, text::normalize(p.journal_title), id);
            index.add_tokens(index.author_, text::normalize(p.first_author_surname), id);
        }
        return index;
    }

    std::size_t size() const { return pubs_.size(); }
    const PubEntry& entry(std::uint32_t i) const { return pubs_[i]; }

    const std::vector<std::uint32_t>* title_postings(const std::string& tok) const {
        return find(title_, tok);
    }
    const std::vector<std::uint32_t>* journal_postings(const std::string& tok) const {
        return find(journal_, tok);
    }
    const std::vector<std::uint32_t>* author_postings(const std::string& tok) const {
        return find(author_, tok);
    }

    // Canonical content digest: independent of publication insertion order.
    std::uint64_t digest() const {
        std::uint64_t h = 1469598103934665603ull;
        auto fold_map = [&](const std::unordered_map<std::string, std::vector<std::uint32_t>>& m,
                            const char* tag) {
            std::vector<const std::string*> keys;
            keys.reserve(m.size());
            for (const auto& [k, v] : m)
                keys.push_back(&k);
            std::sort(keys.begin(), keys.end(),
                      [](const auto* a, const auto* b) { return *a < *b; });
            for (const auto* k : keys) {
                h = text::fnv1a(tag, h);
                h = text::fnv1a(*k, h);
                std::vector<std::string> ids;
                ids.reserve(m.at(*k).size());
                for (const auto id : m.at(*k))
                    ids.push_back(pubs_[id].pub_id);
                std::sort(ids.begin(), ids.end());
                for (const auto& id : ids)
                    h = text::fnv1a(id, h);
            }
        };
        fold_map(title_, "t");
        fold_map(journal_, "j");
        fold_map(author_, "a");
        std::vector<const PubEntry*> entries;
        entries.reserve(pubs_.size());
        for (const auto& p : pubs_)
            entries.push_back(&p);
        std::sort(entries.begin(), entries.end(),
                  [](const auto* a, const auto* b) { return a->pub_id < b->pub_id; });
        for (const auto* p : entries) {
            h = text::fnv1a(p->pub_id, h);
            h = text::fnv1a(std::to_string(p->year), h);
            h = text::fnv1a(p->volume_norm, h);
            h = text::fnv1a(p->page_norm, h);
        }
        return h;
    }

private:
    void add_tokens(std::unordered_map<std::string, std::vector<std::uint32_t>>& m,
                    const std::string& normalized, std::uint32_t id) {
        for (const auto& tok : text::tokens(normalized)) {
            auto& postings = m[tok];
            if (postings.empty() || postings.back() != id)
                postings.push_back(id);
        }
    }

    static const std::vector<std::uint32_t>*
    find(const std::unordered_map<std::string, std::vector<std::uint32_t>>& m,
         const std::string& tok) {
        auto it = m.find(tok);
        return it == m.end() ? nullptr : &it->second;
    }

    std::unordered_map<std::string, std::vector<std::uint32_t>> title_;
    std::unordered_map<std::string, std::vector<std::uint32_t>> journal_;
    std::unordered_map<std::string, std::vector<std::uint32_t>> author_;
    std::vector<PubEntry> pubs_;
};

inline BiblioIndex build_index(const std::vector<Publication>& pubs) {
    return BiblioIndex::build(pubs);
}

// ---------------------------------------------------------------------------
// Retrieval and scoring
// ---------------------------------------------------------------------------

// Top-k candidates by weighted token overlap. Text tokens (title 3x,
// journal 2x, author 2x) generate the candidate set; exact year/volume/page
// agreement adds 1 each on top. Ties break by pub_id; quality is unfilled.
inline std::vector<MatchCandidate> query_candidates(const BiblioIndex& index,
                                                    const ParsedReference& parsed, int k,
                                                    const MatchConfig& cfg = MatchConfig{}) {
    if (!parsed.is_target)
        throw std::invalid_argument("query_candidates: parsed reference is not a target");
    if (k < 1)
        throw std::invalid_argument("query_candidates: k must be >= 1");

    // flat per-thread accumulator: queries touch a small slice of the corpus
    thread_local std::vector<double> scores;
    thread_local std::vector<std::uint32_t> touched;
    if (scores.size() < index.size())
        scores.assign(index.size(), 0.0);
    touched.clear();

    auto accumulate = [&](const std::optional<std::string>& field, double weight,
                          auto postings_of) {
        if (!field || weight == 0.0) // zero-weight fields generate no candidates
            return;
        std::vector<std::string> toks = text::tokens(*field);
        std::sort(toks.begin(), toks.end());
        toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
        for (const auto& t : toks) {
            if (const auto* postings = postings_of(t)) {
                for (const auto id : *postings) {
                    if (scores[id] == 0.0)
                        touched.push_back(id);
                    scores[id] += weight;
                }
            }
        }
    };
    accumulate(parsed.article_title, cfg.weight_title,
               [&](const std::string& t) { return index.title_postings(t); });
    accumulate(parsed.journal_title, cfg.weight_journal,
               [&](const std::string& t) { return index.journal_postings(t); });
    accumulate(parsed.first_author_surname, cfg.weight_author,
               [&](const std::string& t) { return index.author_postings(t); });

    const std::optional<std::string> volume_norm =
        parsed.volume ? std::optional<std::string>(text::normalize(*parsed.volume))
                      : std::nullopt;
    const std::optional<std::string> page_norm =
        parsed.first_page ? std::optional<std::string>(text::normalize(*parsed.first_page))
                          : std::nullopt;
    std::vector<std::pair<std::uint32_t, double>> ranked;
    ranked.reserve(touched.size());
    for (const auto id : touched) {
        double s = scores[id];
        scores[id] = 0.0; // reset for the next query
        const auto& e = index.entry(id);
        if (parsed.year && *parsed.year == e.year)
            s += cfg.weight_exact;
        if (volume_norm && !e.volume_norm.empty() && *volume_norm == e.volume_norm)
            s += cfg.weight_exact;
        if (page_norm && !e.page_norm.empty() && *page_norm == e.page_norm)
            s += cfg.weight_exact;
        ranked.emplace_back(id, s);
    }
    const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(want),
                      ranked.end(), [&](const auto& a, const auto& b) {
                          if (a.second != b.second)
                              return a.second > b.second;
                          return index.entry(a.first).pub_id < index.entry(b.first).pub_id;
                      });
    ranked.resize(want);

    std::vector<MatchCandidate> out;
    out.reserve(ranked.size());
    for (const auto& [id, s] : ranked) {
        MatchCandidate c;
        c.pub_id = index.entry(id).pub_id;
        c.retrieval_score = s;
        out.push_back(std::move(c));
    }
    return out;
}

// Six quality indicators: each is true iff the publication's field value can
// be found in the citation string under normalization; the score is their sum.
inline MatchCandidate score_match(const ParsedReference& parsed, const Publication& pub) {
    MatchCandidate c;
    c.pub_id = pub.pub_id;
    const std::string& hay = parsed.raw_normalized;

    c.indicators[IndYear] = text::contains_token(hay, std::to_string(pub.year));
    if (!pub.volume.empty())
        c.indicators[IndVolume] = text::contains_phrase(hay, text::normalize(pub.volume));
    if (!pub.first_page.empty())
        c.indicators[IndPages] = text::contains_phrase(hay, text::normalize(pub.first_page));
    if (!pub.first_author_surname.empty())
        c.indicators[IndAuthor] =
            text::contains_phrase(hay, text::normalize(pub.first_author_surname));
    if (!pub.journal_title.empty())
        c.indicators[IndJournal] = text::contains_phrase(hay, text::normalize(pub.journal_title));
    if (!pub.title.empty())
        c.indicators[IndTitle] = text::contains_phrase(hay, text::normalize(pub.title));

    c.quality_score = static_cast<int>(
        std::count(c.indicators.begin(), c.indicators.end(), true));
    return c;
}

// ---------------------------------------------------------------------------
// Linking
// ---------------------------------------------------------------------------

// Every examined top-ranked candidate, kept regardless of the acceptance
// threshold so the evaluation harness can sweep thresholds 0..6.
struct TopCandidate {
    std::string family_id;
    int npl_index = 0;
    std::string pub_id;
    double retrieval_score = 0.0;
    int quality_score = 0;
    IndicatorBits indicators{};
    bool year_ok = false; // publication year <= first filing year
    bool is_inventor_self_ref = false;
    bool is_applicant_self_ref = false;

    bool accepted_at(int threshold) const { return year_ok && quality_score >= threshold; }
};

struct LinkResult {
    std::vector<SnplLink> links;          // accepted at the configured threshold
    std::vector<TopCandidate> candidates; // all scored top-1 candidates
    std::size_t targets = 0;              // NPL strings selected as targets
    std::size_t non_targets = 0;
};

inline LinkResult link_references(const Corpus& corpus, const BiblioIndex& index,
                                  const MatchConfig& cfg = MatchConfig{}) {
    if (cfg.threshold < 0 || cfg.threshold > 6)
        throw std::invalid_argument("link_references: threshold must be in 0..6");

    struct Task {
        std::size_t family = 0;
        int npl_index = 0;
    };
    std::vector<Task> tasks;
    for (std::size_t fi = 0; fi < corpus.families.size(); ++fi)
        for (std::size_t ni = 0; ni < corpus.families[fi].npl_strings.size(); ++ni)
            tasks.push_back({fi, static_cast<int>(ni)});

    struct Slot {
        bool target = false;
        bool has_candidate = false;
        TopCandidate candidate;
    };
    std::vector<Slot> slots(tasks.size());

    parallel_for(tasks.size(), cfg.threads, [&](std::size_t t) {
        const auto& task = tasks[t];
        const auto& family = corpus.families[task.family];
        const auto parsed =
            parse_npl(family.npl_strings[static_cast<std::size_t>(task.npl_index)]);
        auto& slot = slots[t];
        slot.target = parsed.is_target;
        if (!parsed.is_target)
            return;
        const auto ranked = query_candidates(index, parsed, cfg.k, cfg);
        if (ranked.empty())
            return;
        // Only the topmost candidate is examined.
        const auto& pub =
            corpus.publications[corpus.pub_index.at(ranked.front().pub_id)];
        auto scored = score_match(parsed, pub);

        TopCandidate cand;
        cand.family_id = family.family_id;
        cand.npl_index = task.npl_index;
        cand.pub_id = pub.pub_id;
        cand.retrieval_score = ranked.front().retrieval_score;
        cand.quality_score = scored.quality_score;
        cand.indicators = scored.indicators;
        cand.year_ok = pub.year <= family.first_filing_year;
        cand.is_inventor_self_ref = name_overlap(pub.author_surnames, family.inventor_surnames);
        cand.is_applicant_self_ref =
            name_overlap(pub.affiliation_names, family.applicant_names);
        slot.candidate = std::move(cand);
        slot.has_candidate = true;
    });

    LinkResult result;
    for (auto& slot : slots) {
        if (slot.target)
            ++result.targets;
        else
            ++result.non_targets;
        if (slot.has_candidate)
            result.candidates.push_back(std::move(slot.candidate));
    }
    std::sort(result.candidates.begin(), result.candidates.end(),
              [](const TopCandidate& a, const TopCandidate& b) {
                  return std::tie(a.family_id, a.npl_index) < std::tie(b.family_id, b.npl_index);
              });
    for (const auto& c : result.candidates) {
        if (!c.accepted_at(cfg.threshold))
            continue;
        SnplLink link;
        link.family_id = c.family_id;
        link.npl_index = c.npl_index;
        link.pub_id = c.pub_id;
        link.quality_score = c.quality_score;
        link.indicators = c.indicators;
        link.is_inventor_self_ref = c.is_inventor_self_ref;
        link.is_applicant_self_ref = c.is_applicant_self_ref;
        result.links.push_back(std::move(link));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvalPoint {
    int threshold = 0;
    std::size_t n_links = 0;
    std::size_t n_correct = 0;
    std::optional<double> precision; // null when no links are emitted
    double recall = 0.0;
    std::optional<double> f1;
};

struct EvalResult {
    EvalPoint at_threshold;        // the configured acceptance threshold
    std::array<EvalPoint, 7> curve; // thresholds 0..6
    std::size_t n_gold = 0;
};

inline EvalResult evaluate_matching(const std::vector<TopCandidate>& candidates,
                                    const std::vector<GoldLink>& gold, int configured_threshold) {
    if (gold.empty())
        throw std::invalid_argument("evaluate_matching: gold links required");

    std::vector<GoldLink> sorted_gold = gold;
    std::sort(sorted_gold.begin(), sorted_gold.end());
    auto is_gold = [&](const TopCandidate& c) {
        const GoldLink probe{c.family_id, c.npl_index, c.pub_id};
        return std::binary_search(sorted_gold.begin(), sorted_gold.end(), probe);
    };

    EvalResult result;
    result.n_gold = sorted_gold.size();
    for (int t = 0; t <= 6; ++t) {
        EvalPoint pt;
        pt.threshold = t;
        for (const auto& c : candidates) {
            if (!c.accepted_at(t))
                continue;
            ++pt.n_links;
            if (is_gold(c))
                ++pt.n_correct;
        }
        if (pt.n_links > 0)
            pt.precision = static_cast<double>(pt.n_correct) / static_cast<double>(pt.n_links);
        pt.recall = static_cast<double>(pt.n_correct) / static_cast<double>(result.n_gold);
        if (pt.precision && (*pt.precision + pt.recall) > 0.0)
            pt.f1 = 2.0 * *pt.precision * pt.recall / (*pt.precision + pt.recall);
        result.curve[static_cast<std::size_t>(t)] = pt;
    }
    result.at_threshold = result.curve[static_cast<std::size_t>(
        std::clamp(configured_threshold, 0, 6))];
    return result;
}

} // namespace snpl::match

#endif // SNPL_MATCH_HPP
