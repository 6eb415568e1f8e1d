// Readers and writers for the staged workspace artifacts. Every file starts
// with a "# snpl-config <digest>" line; readers refuse artifacts whose
// digest does not match the active configuration.

#ifndef SNPL_ARTIFACTS_HPP
#define SNPL_ARTIFACTS_HPP

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "snpl/corpus_io.hpp"
#include "snpl/frontier.hpp"
#include "snpl/match.hpp"
#include "snpl/metrics.hpp"

namespace snpl::artifacts {

struct StageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string meta_line(const std::string& digest) { return "snpl-config " + digest; }

// Digest plus the full canonical config, embedded in every artifact header.
struct Stamp {
    std::string digest;
    std::string config_json;

    std::vector<std::string> lines() const {
        return {meta_line(digest), "snpl-config-json " + config_json};
    }
};

inline std::optional<std::string> digest_of_meta(const std::vector<std::string>& meta) {
    for (const auto& line : meta) {
        std::string body = line;
        while (!body.empty() && (body.front() == '#' || body.front() == ' '))
            body.erase(body.begin());
        if (body.rfind("snpl-config ", 0) == 0)
            return body.substr(std::string("snpl-config ").size());
    }
    return std::nullopt;
}

inline void require_file(const std::filesystem::path& path, const std::string& produced_by) {
    if (!std::filesystem::exists(path))
        throw StageError("missing artifact " + path.string() + "; run `snpl " + produced_by +
                         "` first");
}

inline void check_digest(const std::filesystem::path& path, const std::string& digest,
                         const std::string& produced_by) {
    const auto meta = io::read_metadata(path.string());
    const auto found = digest_of_meta(meta);
    if (!found)
        return; // externally produced input without a stamp
    if (*found != digest)
        throw StageError("artifact " + path.string() + " was produced with config digest " +
                         *found + " but the active config digest is " + digest + "; re-run `snpl " +
                         produced_by + "`");
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os)
        throw StageError("cannot write " + path.string());
    return os;
}

inline std::string opt_real(const std::optional<double>& v) {
    return v ? io::detail::format_real(*v) : std::string();
}

inline std::optional<double> parse_opt_real(const std::string& cell) {
    if (cell.empty())
        return std::nullopt;
    const auto v = io::detail::parse_real(cell);
    if (!v)
        throw StageError("bad numeric cell '" + cell + "'");
    return v;
}

// --- links.tsv / candidates.tsv -------------------------------------------

inline const std::vector<std::string>& link_columns() {
    static const std::vector<std::string> cols = {
        "family_id",  "npl_index",  "pub_id",     "quality_score", "ind_year",
        "ind_volume", "ind_pages",  "ind_author", "ind_journal",   "ind_title",
        "inventor_self", "applicant_self"};
    return cols;
}

inline void write_links(const std::filesystem::path& path,
                        const std::vector<match::SnplLink>& links, const Stamp& stamp) {
    auto os = open_out(path);
    io::write_header(os, stamp.lines(), link_columns());
    for (const auto& l : links) {
        os << l.family_id << '\t' << l.npl_index << '\t' << l.pub_id << '\t' << l.quality_score;
        for (const auto b : l.indicators)
            os << '\t' << (b ? 1 : 0);
        os << '\t' << (l.is_inventor_self_ref ? 1 : 0) << '\t'
           << (l.is_applicant_self_ref ? 1 : 0) << '\n';
    }
}

inline std::vector<match::SnplLink> read_links(const std::filesystem::path& path) {
    io::detail::TsvReader reader(path.string(), link_columns());
    std::vector<match::SnplLink> out;
    std::vector<std::string> c;
    std::size_t line = 0;
    while (reader.next(c, line)) {
        if (c.size() != reader.width())
            throw StageError(path.string() + ":" + std::to_string(line) + ": bad row");
        match::SnplLink l;
        l.family_id = c[0];
        l.npl_index = static_cast<int>(*io::detail::parse_int(c[1]));
        l.pub_id = c[2];
        l.quality_score = static_cast<int>(*io::detail::parse_int(c[3]));
        for (std::size_t f = 0; f < 6; ++f)
            l.indicators[f] = c[4 + f] == "1";
        l.is_inventor_self_ref = c[10] == "1";
        l.is_applicant_self_ref = c[11] == "1";
        out.push_back(std::move(l));
    }
    return out;
}

inline const std::vector<std::string>& candidate_columns() {
    static const std::vector<std::string> cols = {
        "family_id",  "npl_index", "pub_id",     "retrieval_score", "quality_score",
        "ind_year",   "ind_volume", "ind_pages", "ind_author",      "ind_journal",
        "ind_title",  "year_ok",   "inventor_self", "applicant_self"};
    return cols;
}

inline void write_candidates(const std::filesystem::path& path,
                             const std::vector<match::TopCandidate>& candidates,
                             const Stamp& stamp) {
    auto os = open_out(path);
    io::write_header(os, stamp.lines(), candidate_columns());
    for (const auto& c : candidates) {
        os << c.family_id << '\t' << c.npl_index << '\t' << c.pub_id << '\t'
           << io::detail::format_real(c.retrieval_score) << '\t' << c.quality_score;
        for (const auto b : c.indicators)
            os << '\t' << (b ? 1 : 0);
        os << '\t' << (c.year_ok ? 1 : 0) << '\t' << (c.is_inventor_self_ref ? 1 : 0) << '\t'
           << (c.is_applicant_self_ref ? 1 : 0) << '\n';
    }
}

inline std::vector<match::TopCandidate> read_candidates(const std::filesystem::path& path) {
    io::detail::TsvReader reader(path.string(), candidate_columns());
    std::vector<match::TopCandidate> out;
    std::vector<std::string> c;
    std::size_t line = 0;
    while (reader.next(c, line)) {
        if (c.size() != reader.width())
            throw StageError(path.string() + ":" + std::to_string(line) + ": bad row");
        match::TopCandidate t;
        t.family_id = c[0];
        t.npl_index = static_cast<int>(*io::detail::parse_int(c[1]));
        t.pub_id = c[2];
        t.retrieval_score = *io::detail::parse_real(c[3]);
        t.quality_score = static_cast<int>(*io::detail::parse_int(c[4]));
        for (std::size_t f = 0; f < 6; ++f)
            t.indicators[f] = c[5 + f] == "1";
        t.year_ok = c[11] == "1";
        t.is_inventor_self_ref = c[12] == "1";
        t.is_applicant_self_ref = c[13] == "1";
        out.push_back(std::move(t));
    }
    return out;
}

// --- metrics.tsv / quality.tsv ---------------------------------------------

struct MetricsRow {
    std::string family_id;
    bool has_snpl = false;
    int n_links = 0;
    std::optional<double> q_max, q_sum, q_avg, q_rss;
    int uscit5y = 0;
    int epcit5y = 0;
    std::optional<double> claim_scope_us, claim_scope_ep;
    std::optional<double> monetary_usd, monetary_patval_eur;
    std::optional<std::string> top_pub_id;
    bool top_inventor_self = false;
    bool top_applicant_self = false;
    bool top_interdisciplinary = false;
    std::optional<int> time_lag_years;
    std::optional<std::string> lag_tertile;

    std::optional<double> q(metrics::Aggregation a) const {
        switch (a) {
        case metrics::Aggregation::Max: return q_max;
        case metrics::Aggregation::Sum: return q_sum;
        case metrics::Aggregation::Avg: return q_avg;
        case metrics::Aggregation::Rss: return q_rss;
        }
        return q_max;
    }
};

inline const std::vector<std::string>& metrics_columns() {
    static const std::vector<std::string> cols = {
        "family_id", "has_snpl", "n_links", "q_max", "q_sum", "q_avg", "q_rss",
        "uscit5y", "epcit5y", "claim_scope_us", "claim_scope_ep", "monetary_usd",
        "monetary_patval_eur", "top_pub_id", "top_inventor_self", "top_applicant_self",
        "top_interdisciplinary", "time_lag_years", "lag_tertile"};
    return cols;
}

inline void write_metrics(const std::filesystem::path& path,
                          const std::vector<MetricsRow>& rows, const Stamp& stamp) {
    auto os = open_out(path);
    io::write_header(os, stamp.lines(), metrics_columns());
    for (const auto& m : rows) {
        os << m.family_id << '\t' << (m.has_snpl ? 1 : 0) << '\t' << m.n_links << '\t'
           << opt_real(m.q_max) << '\t' << opt_real(m.q_sum) << '\t' << opt_real(m.q_avg) << '\t'
           << opt_real(m.q_rss) << '\t' << m.uscit5y << '\t' << m.epcit5y << '\t'
           << opt_real(m.claim_scope_us) << '\t' << opt_real(m.claim_scope_ep) << '\t'
           << opt_real(m.monetary_usd) << '\t' << opt_real(m.monetary_patval_eur) << '\t'
           << (m.top_pub_id ? *m.top_pub_id : std::string()) << '\t'
           << (m.top_inventor_self ? 1 : 0) << '\t' << (m.top_applicant_self ? 1 : 0) << '\t'
           << (m.top_interdisciplinary ? 1 : 0) << '\t'
           << (m.time_lag_years ? std::to_string(*m.time_lag_years) : std::string()) << '\t'
           << (m.lag_tertile ? *m.lag_tertile : std::string()) << '\n';
    }
}

inline std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
    io::detail::TsvReader reader(path.string(), metrics_columns());
    std::vector<MetricsRow> out;
    std::vector<std::string> c;
    std::size_t line = 0;
    while (reader.next(c, line)) {
        if (c.size() != reader.width())
            throw StageError(path.string() + ":" + std::to_string(line) + ": bad row");
        MetricsRow m;
        m.family_id = c[0];
        m.has_snpl = c[1] == "1";
        m.n_links = static_cast<int>(*io::detail::parse_int(c[2]));
        m.q_max = parse_opt_real(c[3]);
        m.q_sum = parse_opt_real(c[4]);
        m.q_avg = parse_opt_real(c[5]);
        m.q_rss = parse_opt_real(c[6]);
        m.uscit5y = static_cast<int>(*io::detail::parse_int(c[7]));
        m.epcit5y = static_cast<int>(*io::detail::parse_int(c[8]));
        m.claim_scope_us = parse_opt_real(c[9]);
        m.claim_scope_ep = parse_opt_real(c[10]);
        m.monetary_usd = parse_opt_real(c[11]);
        m.monetary_patval_eur = parse_opt_real(c[12]);
        if (!c[13].empty())
            m.top_pub_id = c[13];
        m.top_inventor_self = c[14] == "1";
        m.top_applicant_self = c[15] == "1";
        m.top_interdisciplinary = c[16] == "1";
        if (!c[17].empty())
            m.time_lag_years = static_cast<int>(*io::detail::parse_int(c[17]));
        if (!c[18].empty())
            m.lag_tertile = c[18];
        out.push_back(std::move(m));
    }
    return out;
}

inline const std::vector<std::string>& quality_columns() {
    static const std::vector<std::string> cols = {"pub_id", "cit3y", "jif", "interdisciplinary",
                                                  "n_linking_families"};
    return cols;
}

inline void write_quality(const std::filesystem::path& path,
                          const std::vector<metrics::PubQuality>& rows, const Stamp& stamp) {
    auto os = open_out(path);
    io::write_header(os, stamp.lines(), quality_columns());
    for (const auto& q : rows) {
        os << q.pub_id << '\t' << q.cit3y << '\t' << opt_real(q.jif) << '\t'
           << (q.interdisciplinary ? (*q.interdisciplinary ? "1" : "0") : "") << '\t'
           << q.n_linking_families << '\n';
    }
}

inline std::vector<metrics::PubQuality> read_quality(const std::filesystem::path& path) {
    io::detail::TsvReader reader(path.string(), quality_columns());
    std::vector<metrics::PubQuality> out;
    std::vector<std::string> c;
    std::size_t line = 0;
    while (reader.next(c, line)) {
        if (c.size() != reader.width())
            throw StageError(path.string() + ":" + std::to_string(line) + ": bad row");
        metrics::PubQuality q;
        q.pub_id = c[0];
        q.cit3y = static_cast<int>(*io::detail::parse_int(c[1]));
        q.jif = parse_opt_real(c[2]);
        if (!c[3].empty())
            q.interdisciplinary = c[3] == "1";
        q.n_linking_families = static_cast<int>(*io::detail::parse_int(c[4]));
        out.push_back(std::move(q));
    }
    return out;
}

// --- frontier.tsv -----------------------------------------------------------

inline const std::vector<std::string>& frontier_columns() {
    static const std::vector<std::string> cols = {"family_id", "distance", "inherited_quality"};
    return cols;
}

inline void write_frontier(const std::filesystem::path& path,
                           const std::vector<frontier::FrontierResult>& rows,
                           const Stamp& stamp) {
    auto os = open_out(path);
    io::write_header(os, stamp.lines(), frontier_columns());
    for (const auto& r : rows) {
        os << r.family_id << '\t';
        if (r.distance == frontier::kUnreachable)
            os << "inf";
        else
            os << r.distance;
        os << '\t' << opt_real(r.inherited_quality) << '\n';
    }
}

inline std::vector<frontier::FrontierResult> read_frontier(const std::filesystem::path& path) {
    io::detail::TsvReader reader(path.string(), frontier_columns());
    std::vector<frontier::FrontierResult> out;
    std::vector<std::string> c;
    std::size_t line = 0;
    while (reader.next(c, line)) {
        if (c.size() != reader.width())
            throw StageError(path.string() + ":" + std::to_string(line) + ": bad row");
        frontier::FrontierResult r;
        r.family_id = c[0];
        r.distance = c[1] == "inf" ? frontier::kUnreachable
                                   : static_cast<int>(*io::detail::parse_int(c[1]));
        r.inherited_quality = parse_opt_real(c[2]);
        out.push_back(std::move(r));
    }
    return out;
}

// --- resid.tsv ---------------------------------------------------------------

struct ResidRow {
    std::string family_id;
    bool has_snpl = false;
    std::optional<double> value_resid;
    // log1p of the quality aggregates (raw, not residualized): bin axes
    std::optional<double> q_log_max, q_log_sum, q_log_avg, q_log_rss;

    std::optional<double> q_log(metrics::Aggregation a) const {
        switch (a) {
        case metrics::Aggregation::Max: return q_log_max;
        case metrics::Aggregation::Sum: return q_log_sum;
        case metrics::Aggregation::Avg: return q_log_avg;
        case metrics::Aggregation::Rss: return q_log_rss;
        }
        return q_log_max;
    }
};

inline const std::vector<std::string>& resid_columns() {
    static const std::vector<std::string> cols = {"family_id", "has_snpl",  "value_resid",
                                                  "q_log_max", "q_log_sum", "q_log_avg",
                                                  "q_log_rss"};
    return cols;
}

inline void write_resid(const std::filesystem::path& path, const std::vector<ResidRow>& rows,
                        const Stamp& stamp) {
    auto os = open_out(path);
    io::write_header(os, stamp.lines(), resid_columns());
    for (const auto& r : rows)
        os << r.family_id << '\t' << (r.has_snpl ? 1 : 0) << '\t' << opt_real(r.value_resid)
           << '\t' << opt_real(r.q_log_max) << '\t' << opt_real(r.q_log_sum) << '\t'
           << opt_real(r.q_log_avg) << '\t' << opt_real(r.q_log_rss) << '\n';
}

inline std::vector<ResidRow> read_resid(const std::filesystem::path& path) {
    io::detail::TsvReader reader(path.string(), resid_columns());
    std::vector<ResidRow> out;
    std::vector<std::string> c;
    std::size_t line = 0;
    while (reader.next(c, line)) {
        if (c.size() != reader.width())
            throw StageError(path.string() + ":" + std::to_string(line) + ": bad row");
        ResidRow r;
        r.family_id = c[0];
        r.has_snpl = c[1] == "1";
        r.value_resid = parse_opt_real(c[2]);
        r.q_log_max = parse_opt_real(c[3]);
        r.q_log_sum = parse_opt_real(c[4]);
        r.q_log_avg = parse_opt_real(c[5]);
        r.q_log_rss = parse_opt_real(c[6]);
        out.push_back(std::move(r));
    }
    return out;
}

// --- JSON artifacts ----------------------------------------------------------

inline void write_json(const std::filesystem::path& path, nlohmann::json j,
                       const Stamp& stamp) {
    j["_meta"] = {{"config_digest", stamp.digest},
                  {"config", nlohmann::json::parse(stamp.config_json)}};
    auto os = open_out(path);
    os << j.dump(2) << '\n';
}

inline nlohmann::json read_json(const std::filesystem::path& path, const std::string& digest,
                                const std::string& produced_by) {
    std::ifstream in(path);
    if (!in)
        throw StageError("cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    if (j.contains("_meta") && j["_meta"].contains("config_digest")) {
        const auto found = j["_meta"]["config_digest"].get<std::string>();
        if (found != digest)
            throw StageError("artifact " + path.string() + " was produced with config digest " +
                             found + " but the active config digest is " + digest +
                             "; re-run `snpl " + produced_by + "`");
    }
    return j;
}

} // namespace snpl::artifacts

#endif // SNPL_ARTIFACTS_HPP
