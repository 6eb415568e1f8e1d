// Flat-file ingestion and export of corpora. One record per line, UTF-8,
// tab-separated with a header row; list-valued cells use ';' as the inner
// separator (escaped where items contain it). Export is sorted by id, so
// ingest -> export round-trips byte-stable modulo input row order.

#ifndef SNPL_CORPUS_IO_HPP
#define SNPL_CORPUS_IO_HPP

#include <charconv>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "snpl/corpus.hpp"
#include "snpl/text.hpp"

namespace snpl::io {

struct RowError {
    std::string file;
    std::size_t line = 0;
    std::string message;
};

struct IngestReport {
    std::vector<RowError> row_errors;
    std::size_t pubs_read = 0;
    std::size_t families_read = 0;
    std::size_t citations_read = 0;
    std::size_t gold_read = 0;
    std::size_t pubs_dropped_year_range = 0;
    std::size_t pubs_dropped_duplicate = 0;
    std::size_t families_dropped_no_tech_field = 0;
    std::size_t families_dropped_year_range = 0;
    std::size_t families_dropped_duplicate = 0;
    std::size_t citations_dropped_dangling = 0;
    std::size_t citations_dropped_self = 0;
    std::size_t gold_dropped_dangling = 0;
    std::size_t backref_self_loops_removed = 0;
    bool gold_file_missing = false;

    bool clean() const { return row_errors.empty(); }
};

struct IngestConfig {
    int pub_year_min = 1800;
    int pub_year_max = 2100;
    int filing_year_min = 1800;
    int filing_year_max = 2100;
    // 34-entry map tech_field -> main area; empty means the default table.
    std::vector<MainArea> main_area_map;

    MainArea area_of(int tech_field) const {
        if (!main_area_map.empty() && tech_field >= 1 &&
            static_cast<std::size_t>(tech_field) <= main_area_map.size())
            return main_area_map[static_cast<std::size_t>(tech_field) - 1];
        return default_main_area(tech_field);
    }
};

namespace detail {

inline std::optional<long long> parse_int(std::string_view s) {
    long long v = 0;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        return std::nullopt;
    return v;
}

inline std::optional<double> parse_real(std::string_view s) {
    if (s.empty())
        return std::nullopt;
    try {
        std::size_t pos = 0;
        const double v = std::stod(std::string(s), &pos);
        if (pos != s.size())
            return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

inline std::string format_real(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

// Reads a delimited file with a fixed header. Leading '#' lines are
// metadata and are skipped (collected for digest checks).
class TsvReader {
public:
    TsvReader(const std::string& path, const std::vector<std::string>& columns)
        : path_(path), in_(path) {
        if (!in_)
            throw std::runtime_error("cannot open " + path);
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!line.empty() && line[0] == '#') {
                meta_.push_back(line);
                continue;
            }
            break;
        }
        const auto header = text::split(line, '\t');
        if (header.size() != columns.size())
            throw std::runtime_error(path + ": expected " + std::to_string(columns.size()) +
                                     " columns, found " + std::to_string(header.size()));
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (header[i] != columns[i])
                throw std::runtime_error(path + ": column " + std::to_string(i + 1) +
                                         " must be '" + columns[i] + "', found '" + header[i] +
                                         "'");
        width_ = columns.size();
    }

    // Returns false at EOF. Cells are raw (unescaping is per-field).
    bool next(std::vector<std::string>& cells, std::size_t& line_no) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (line.empty())
                continue;
            if (line[0] == '#')
                continue;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            cells = text::split(line, '\t');
            line_no = line_no_;
            return true;
        }
        return false;
    }

    std::size_t width() const { return width_; }
    const std::vector<std::string>& metadata() const { return meta_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ifstream in_;
    std::size_t line_no_ = 0;
    std::size_t width_ = 0;
    std::vector<std::string> meta_;
};

} // namespace detail

inline const std::vector<std::string>& publication_columns() {
    static const std::vector<std::string> cols = {
        "pub_id",      "title",       "first_author_surname", "journal_title",
        "year",        "volume",      "first_page",           "field_codes",
        "author_surnames", "affiliation_names", "jif"};
    return cols;
}

inline const std::vector<std::string>& family_columns() {
    static const std::vector<std::string> cols = {
        "family_id",      "first_filing_year", "tech_fields",        "offices",
        "n_inventors",    "inventor_surnames", "applicant_names",    "first_applicant_id",
        "backward_patent_refs", "npl_strings", "first_claim_wordcount_us",
        "first_claim_wordcount_ep", "monetary_value_usd", "monetary_value_patval_eur"};
    return cols;
}

inline const std::vector<std::string>& citation_columns() {
    static const std::vector<std::string> cols = {"citing_id", "cited_id", "kind", "citing_year"};
    return cols;
}

inline const std::vector<std::string>& gold_link_columns() {
    static const std::vector<std::string> cols = {"family_id", "npl_index", "pub_id"};
    return cols;
}

struct CorpusPaths {
    std::string publications;
    std::string families;
    std::string citations;
    std::string gold_links; // optional; empty or missing file means no gold
};

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

inline Corpus ingest(const CorpusPaths& paths, const IngestConfig& cfg, IngestReport& report) {
    Corpus corpus;

    auto record_error = [&](const std::string& file, std::size_t line, std::string msg) {
        report.row_errors.push_back({file, line, std::move(msg)});
    };

    // Publications.
    {
        detail::TsvReader reader(paths.publications, publication_columns());
        std::vector<std::string> c;
        std::size_t line = 0;
        while (reader.next(c, line)) {
            ++report.pubs_read;
            if (c.size() != reader.width()) {
                record_error(paths.publications, line, "wrong column count");
                continue;
            }
            Publication p;
            p.pub_id = c[0];
            if (p.pub_id.empty()) {
                record_error(paths.publications, line, "empty pub_id");
                continue;
            }
            p.title = text::tsv_unescape(c[1]);
            p.first_author_surname = text::tsv_unescape(c[2]);
            p.journal_title = text::tsv_unescape(c[3]);
            const auto year = detail::parse_int(c[4]);
            if (!year) {
                record_error(paths.publications, line, "bad year '" + c[4] + "'");
                continue;
            }
            p.year = static_cast<int>(*year);
            if (p.year < cfg.pub_year_min || p.year > cfg.pub_year_max) {
                ++report.pubs_dropped_year_range;
                continue;
            }
            p.volume = text::tsv_unescape(c[5]);
            p.first_page = text::tsv_unescape(c[6]);
            if (!c[7].empty())
                p.field_codes = text::split_list(c[7]);
            if (!c[8].empty())
                for (auto& s : text::split_list(c[8]))
                    p.author_surnames.push_back(text::normalize(s));
            if (!c[9].empty())
                for (auto& s : text::split_list(c[9]))
                    p.affiliation_names.push_back(text::normalize(s));
            if (!c[10].empty()) {
                const auto jif = detail::parse_real(c[10]);
                if (!jif || *jif < 0.0) {
                    record_error(paths.publications, line, "bad jif '" + c[10] + "'");
                    continue;
                }
                p.jif = *jif;
            }
            if (corpus.pub_index.count(p.pub_id)) {
                ++report.pubs_dropped_duplicate;
                record_error(paths.publications, line, "duplicate pub_id '" + p.pub_id + "'");
                continue;
            }
            corpus.pub_index.emplace(p.pub_id, corpus.publications.size());
            corpus.publications.push_back(std::move(p));
        }
    }

    // Families.
    {
        detail::TsvReader reader(paths.families, family_columns());
        std::vector<std::string> c;
        std::size_t line = 0;
        while (reader.next(c, line)) {
            ++report.families_read;
            if (c.size() != reader.width()) {
                record_error(paths.families, line, "wrong column count");
                continue;
            }
            PatentFamily f;
            f.family_id = c[0];
            if (f.family_id.empty()) {
                record_error(paths.families, line, "empty family_id");
                continue;
            }
            const auto filing = detail::parse_int(c[1]);
            if (!filing) {
                record_error(paths.families, line, "bad first_filing_year '" + c[1] + "'");
                continue;
            }
            f.first_filing_year = static_cast<int>(*filing);
            if (f.first_filing_year < cfg.filing_year_min ||
                f.first_filing_year > cfg.filing_year_max) {
                ++report.families_dropped_year_range;
                continue;
            }
            if (c[2].empty()) {
                // No technology classification: the family is dropped.
                ++report.families_dropped_no_tech_field;
                continue;
            }
            std::vector<int> member_fields;
            bool fields_ok = true;
            for (const auto& item : text::split_list(c[2])) {
                const auto v = detail::parse_int(item);
                if (!v || *v < 1 || *v > 34) {
                    record_error(paths.families, line, "bad tech field '" + item + "'");
                    fields_ok = false;
                    break;
                }
                member_fields.push_back(static_cast<int>(*v));
            }
            if (!fields_ok)
                continue;
            f.tech_field = unify_tech_field(member_fields);
            f.main_area = cfg.area_of(f.tech_field);
            bool offices_ok = true;
            if (!c[3].empty()) {
                for (const auto& o : text::split_list(c[3])) {
                    if (o == "US")
                        f.offices |= office_mask(Office::US);
                    else if (o == "EP")
                        f.offices |= office_mask(Office::EP);
                    else {
                        record_error(paths.families, line, "unknown office '" + o + "'");
                        offices_ok = false;
                        break;
                    }
                }
            }
            if (!offices_ok)
                continue;
            const auto ninv = detail::parse_int(c[4]);
            if (!ninv || *ninv < 1) {
                record_error(paths.families, line, "bad n_inventors '" + c[4] + "'");
                continue;
            }
            f.n_inventors = static_cast<int>(*ninv);
            if (!c[5].empty())
                for (auto& s : text::split_list(c[5]))
                    f.inventor_surnames.push_back(text::normalize(s));
            if (!c[6].empty())
                for (auto& s : text::split_list(c[6]))
                    f.applicant_names.push_back(text::normalize(s));
            f.first_applicant_id = c[7];
            if (!c[8].empty()) {
                for (auto& r : text::split_list(c[8])) {
                    if (r == f.family_id) {
                        ++report.backref_self_loops_removed;
                        continue;
                    }
                    f.backward_patent_refs.push_back(std::move(r));
                }
            }
            if (!c[9].empty())
                f.npl_strings = text::split_list(c[9]);
            auto parse_claim = [&](const std::string& cell,
                                   std::optional<int>& out) -> bool {
                if (cell.empty())
                    return true;
                const auto v = detail::parse_int(cell);
                if (!v || *v < 1) {
                    record_error(paths.families, line, "bad claim word count '" + cell + "'");
                    return false;
                }
                out = static_cast<int>(*v);
                return true;
            };
            if (!parse_claim(c[10], f.first_claim_wordcount_us))
                continue;
            if (!parse_claim(c[11], f.first_claim_wordcount_ep))
                continue;
            // Multiple monetary estimates in one cell: keep the highest.
            auto parse_money = [&](const std::string& cell,
                                   std::optional<double>& out) -> bool {
                if (cell.empty())
                    return true;
                double best = -1.0;
                for (const auto& item : text::split_list(cell)) {
                    const auto v = detail::parse_real(item);
                    if (!v || *v < 0.0) {
                        record_error(paths.families, line, "bad monetary value '" + item + "'");
                        return false;
                    }
                    best = std::max(best, *v);
                }
                if (best >= 0.0)
                    out = best;
                return true;
            };
            if (!parse_money(c[12], f.monetary_value_usd))
                continue;
            if (!parse_money(c[13], f.monetary_value_patval_eur))
                continue;
            if (corpus.family_index.count(f.family_id)) {
                ++report.families_dropped_duplicate;
                record_error(paths.families, line, "duplicate family_id '" + f.family_id + "'");
                continue;
            }
            corpus.family_index.emplace(f.family_id, corpus.families.size());
            corpus.families.push_back(std::move(f));
        }
    }

    // Citations: endpoints must resolve within the matching namespace.
    {
        detail::TsvReader reader(paths.citations, citation_columns());
        std::vector<std::string> c;
        std::size_t line = 0;
        while (reader.next(c, line)) {
            ++report.citations_read;
            if (c.size() != reader.width()) {
                record_error(paths.citations, line, "wrong column count");
                continue;
            }
            CitationEvent e;
            e.citing_id = c[0];
            e.cited_id = c[1];
            if (c[2] == "sci_sci")
                e.kind = CitationKind::SciSci;
            else if (c[2] == "pat_pat")
                e.kind = CitationKind::PatPat;
            else {
                record_error(paths.citations, line, "unknown citation kind '" + c[2] + "'");
                continue;
            }
            const auto year = detail::parse_int(c[3]);
            if (!year) {
                record_error(paths.citations, line, "bad citing_year '" + c[3] + "'");
                continue;
            }
            e.citing_year = static_cast<int>(*year);
            if (e.citing_id == e.cited_id) {
                ++report.citations_dropped_self;
                continue;
            }
            const bool resolves =
                e.kind == CitationKind::SciSci
                    ? corpus.pub_index.count(e.citing_id) && corpus.pub_index.count(e.cited_id)
                    : corpus.family_index.count(e.citing_id) &&
                          corpus.family_index.count(e.cited_id);
            if (!resolves) {
                ++report.citations_dropped_dangling;
                continue;
            }
            corpus.citations.push_back(std::move(e));
        }
    }

    // Gold links are optional.
    if (!paths.gold_links.empty()) {
        std::ifstream probe(paths.gold_links);
        if (!probe) {
            report.gold_file_missing = true;
        } else {
            probe.close();
            detail::TsvReader reader(paths.gold_links, gold_link_columns());
            std::vector<std::string> c;
            std::size_t line = 0;
            while (reader.next(c, line)) {
                ++report.gold_read;
                if (c.size() != reader.width()) {
                    record_error(paths.gold_links, line, "wrong column count");
                    continue;
                }
                GoldLink g;
                g.family_id = c[0];
                const auto idx = detail::parse_int(c[1]);
                if (!idx || *idx < 0) {
                    record_error(paths.gold_links, line, "bad npl_index '" + c[1] + "'");
                    continue;
                }
                g.npl_index = static_cast<int>(*idx);
                g.pub_id = c[2];
                const auto* fam = corpus.find_family(g.family_id);
                if (!fam || !corpus.pub_index.count(g.pub_id) ||
                    g.npl_index >= static_cast<int>(fam->npl_strings.size())) {
                    ++report.gold_dropped_dangling;
                    continue;
                }
                corpus.gold_links.push_back(std::move(g));
            }
        }
    }

    return corpus;
}

// ---------------------------------------------------------------------------
// Export (canonical: rows sorted by id)
// ---------------------------------------------------------------------------

inline void write_header(std::ostream& os, const std::vector<std::string>& meta,
                         const std::vector<std::string>& columns) {
    for (const auto& m : meta)
        os << "# " << m << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        os << (i ? "\t" : "") << columns[i];
    os << "\n";
}

inline void write_publications(std::ostream& os, const Corpus& corpus,
                               const std::vector<std::string>& meta = {}) {
    write_header(os, meta, publication_columns());
    std::vector<const Publication*> rows;
    rows.reserve(corpus.publications.size());
    for (const auto& p : corpus.publications)
        rows.push_back(&p);
    std::sort(rows.begin(), rows.end(),
              [](const auto* a, const auto* b) { return a->pub_id < b->pub_id; });
    for (const auto* p : rows) {
        os << p->pub_id << '\t' << text::tsv_escape(p->title) << '\t'
           << text::tsv_escape(p->first_author_surname) << '\t'
           << text::tsv_escape(p->journal_title) << '\t' << p->year << '\t'
           << text::tsv_escape(p->volume) << '\t' << text::tsv_escape(p->first_page) << '\t'
           << text::join_list(p->field_codes) << '\t' << text::join_list(p->author_surnames)
           << '\t' << text::join_list(p->affiliation_names) << '\t'
           << (p->jif ? detail::format_real(*p->jif) : std::string()) << '\n';
    }
}

inline void write_families(std::ostream& os, const Corpus& corpus,
                           const std::vector<std::string>& meta = {}) {
    write_header(os, meta, family_columns());
    std::vector<const PatentFamily*> rows;
    rows.reserve(corpus.families.size());
    for (const auto& f : corpus.families)
        rows.push_back(&f);
    std::sort(rows.begin(), rows.end(),
              [](const auto* a, const auto* b) { return a->family_id < b->family_id; });
    for (const auto* f : rows) {
        std::string offices;
        if (f->has_office(Office::US))
            offices = "US";
        if (f->has_office(Office::EP))
            offices += offices.empty() ? "EP" : ";EP";
        os << f->family_id << '\t' << f->first_filing_year << '\t' << f->tech_field << '\t'
           << offices << '\t' << f->n_inventors << '\t' << text::join_list(f->inventor_surnames)
           << '\t' << text::join_list(f->applicant_names) << '\t' << f->first_applicant_id
           << '\t' << text::join_list(f->backward_patent_refs) << '\t'
           << text::join_list(f->npl_strings) << '\t'
           << (f->first_claim_wordcount_us ? std::to_string(*f->first_claim_wordcount_us)
                                           : std::string())
           << '\t'
           << (f->first_claim_wordcount_ep ? std::to_string(*f->first_claim_wordcount_ep)
                                           : std::string())
           << '\t'
           << (f->monetary_value_usd ? detail::format_real(*f->monetary_value_usd)
                                     : std::string())
           << '\t'
           << (f->monetary_value_patval_eur ? detail::format_real(*f->monetary_value_patval_eur)
                                            : std::string())
           << '\n';
    }
}

inline void write_citations(std::ostream& os, const Corpus& corpus,
                            const std::vector<std::string>& meta = {}) {
    write_header(os, meta, citation_columns());
    std::vector<const CitationEvent*> rows;
    rows.reserve(corpus.citations.size());
    for (const auto& e : corpus.citations)
        rows.push_back(&e);
    std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
        return std::tie(a->citing_id, a->cited_id, a->kind, a->citing_year) <
               std::tie(b->citing_id, b->cited_id, b->kind, b->citing_year);
    });
    for (const auto* e : rows)
        os << e->citing_id << '\t' << e->cited_id << '\t'
           << (e->kind == CitationKind::SciSci ? "sci_sci" : "pat_pat") << '\t'
           << e->citing_year << '\n';
}

inline void write_gold_links(std::ostream& os, const Corpus& corpus,
                             const std::vector<std::string>& meta = {}) {
    write_header(os, meta, gold_link_columns());
    std::vector<GoldLink> rows = corpus.gold_links;
    std::sort(rows.begin(), rows.end());
    for (const auto& g : rows)
        os << g.family_id << '\t' << g.npl_index << '\t' << g.pub_id << '\n';
}

inline void write_corpus_files(const CorpusPaths& paths, const Corpus& corpus,
                               const std::vector<std::string>& meta = {}) {
    auto open = [](const std::string& path) {
        std::ofstream os(path);
        if (!os)
            throw std::runtime_error("cannot write " + path);
        return os;
    };
    {
        auto os = open(paths.publications);
        write_publications(os, corpus, meta);
    }
    {
        auto os = open(paths.families);
        write_families(os, corpus, meta);
    }
    {
        auto os = open(paths.citations);
        write_citations(os, corpus, meta);
    }
    if (!paths.gold_links.empty()) {
        auto os = open(paths.gold_links);
        write_gold_links(os, corpus, meta);
    }
}

// First '#' metadata line of a file, if any (used for config-digest checks).
inline std::vector<std::string> read_metadata(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::vector<std::string> meta;
    std::string line;
    while (std::getline(in, line) && !line.empty() && line[0] == '#')
        meta.push_back(line);
    return meta;
}

} // namespace snpl::io

#endif // SNPL_CORPUS_IO_HPP
