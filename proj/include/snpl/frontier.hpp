// Patent reference graph and distance to the science frontier: multi-source
// BFS from the SNPL-linked families over backward references, plus
// max-quality propagation along shortest paths.

#ifndef SNPL_FRONTIER_HPP
#define SNPL_FRONTIER_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "snpl/corpus.hpp"

namespace snpl::frontier {

inline constexpr int kUnreachable = -1;

struct CitGraph {
    std::vector<std::string> ids; // family ids in corpus order
    std::vector<std::vector<std::uint32_t>> cites;   // citing -> cited
    std::vector<std::vector<std::uint32_t>> cited_by; // reverse adjacency
    std::unordered_map<std::string, std::uint32_t> index;
    std::size_t dangling_dropped = 0;
    std::size_t self_loops_dropped = 0;
    std::size_t duplicate_edges_dropped = 0;
    std::size_t edge_count = 0;
};

inline CitGraph build_graph(const std::vector<PatentFamily>& families) {
    CitGraph g;
    g.ids.reserve(families.size());
    for (std::size_t i = 0; i < families.size(); ++i) {
        g.ids.push_back(families[i].family_id);
        g.index.emplace(families[i].family_id, static_cast<std::uint32_t>(i));
    }
    g.cites.resize(families.size());
    g.cited_by.resize(families.size());
    for (std::size_t i = 0; i < families.size(); ++i) {
        auto& out = g.cites[i];
        for (const auto& ref : families[i].backward_patent_refs) {
            const auto it = g.index.find(ref);
            if (it == g.index.end()) {
                ++g.dangling_dropped;
                continue;
            }
            if (it->second == i) {
                ++g.self_loops_dropped;
                continue;
            }
            if (std::find(out.begin(), out.end(), it->second) != out.end()) {
                ++g.duplicate_edges_dropped;
                continue;
            }
            out.push_back(it->second);
        }
        std::sort(out.begin(), out.end());
        g.edge_count += out.size();
    }
    for (std::size_t i = 0; i < families.size(); ++i)
        for (const auto cited : g.cites[i])
            g.cited_by[cited].push_back(static_cast<std::uint32_t>(i));
    return g;
}

// Shortest distance from each node to the frontier set, following backward
// references (a patent reaches the frontier through the patents it cites).
// Frontier members are at distance 0; unreachable nodes get kUnreachable.
inline std::vector<int> frontier_distance(const CitGraph& g,
                                          const std::vector<bool>& is_frontier) {
    if (is_frontier.size() != g.ids.size())
        throw std::invalid_argument("frontier_distance: frontier mask size mismatch");
    std::vector<int> dist(g.ids.size(), kUnreachable);
    std::deque<std::uint32_t> queue;
    for (std::size_t i = 0; i < g.ids.size(); ++i) {
        if (is_frontier[i]) {
            dist[i] = 0;
            queue.push_back(static_cast<std::uint32_t>(i));
        }
    }
    while (!queue.empty()) {
        const auto u = queue.front();
        queue.pop_front();
        for (const auto citer : g.cited_by[u]) {
            if (dist[citer] == kUnreachable) {
                dist[citer] = dist[u] + 1;
                queue.push_back(citer);
            }
        }
    }
    return dist;
}

// Inherited quality: the maximum frontier quality reachable along some
// shortest path. Computed level-by-level; a frontier family inherits its own
// quality.
inline std::vector<std::optional<double>>
propagate_quality(const CitGraph& g, const std::vector<int>& dist,
                  const std::vector<std::optional<double>>& frontier_quality) {
    if (dist.size() != g.ids.size() || frontier_quality.size() != g.ids.size())
        throw std::invalid_argument("propagate_quality: size mismatch");
    std::vector<std::optional<double>> inherited(g.ids.size());
    std::vector<std::uint32_t> order;
    order.reserve(g.ids.size());
    for (std::size_t i = 0; i < g.ids.size(); ++i)
        if (dist[i] != kUnreachable)
            order.push_back(static_cast<std::uint32_t>(i));
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return dist[a] < dist[b]; });
    for (const auto v : order) {
        if (dist[v] == 0) {
            if (!frontier_quality[v])
                throw std::invalid_argument(
                    "propagate_quality: frontier family without quality: " + g.ids[v]);
            inherited[v] = frontier_quality[v];
            continue;
        }
        std::optional<double> best;
        for (const auto cited : g.cites[v]) {
            if (dist[cited] != dist[v] - 1 || !inherited[cited])
                continue;
            if (!best || *inherited[cited] > *best)
                best = inherited[cited];
        }
        inherited[v] = best; // reachable nodes always have a predecessor
    }
    return inherited;
}

struct FrontierResult {
    std::string family_id;
    int distance = kUnreachable; // kUnreachable encodes "inf"
    std::optional<double> inherited_quality;
};

inline std::vector<FrontierResult>
compute_frontier(const CitGraph& g, const std::vector<bool>& is_frontier,
                 const std::vector<std::optional<double>>& frontier_quality) {
    const auto dist = frontier_distance(g, is_frontier);
    const auto inherited = propagate_quality(g, dist, frontier_quality);
    std::vector<FrontierResult> out(g.ids.size());
    for (std::size_t i = 0; i < g.ids.size(); ++i) {
        out[i].family_id = g.ids[i];
        out[i].distance = dist[i];
        out[i].inherited_quality = inherited[i];
    }
    return out;
}

} // namespace snpl::frontier

#endif // SNPL_FRONTIER_HPP
