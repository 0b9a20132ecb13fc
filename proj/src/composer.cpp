#include "racer/composer.hpp"

#include <unordered_map>

namespace racer {

ComposedDraft compose(TokenId next_token, const Automaton& automaton,
                      const MatchState& state, const TopKAdjacency& adj,
                      const ComposerConfig& cfg) {
    cfg.validate();
    DraftTree tree;
    tree.capacity = cfg.capacity;
    tree.nodes.push_back({0, kRootParent, next_token, 0, NodeOrigin::Root, 0, -1});

    // (parent id << 32 | token) -> node id, for trie union.
    std::unordered_map<std::uint64_t, std::uint32_t> edges;
    const auto edge_key = [](std::uint32_t parent, TokenId tok) {
        return (static_cast<std::uint64_t>(parent) << 32) | tok;
    };

    if (cfg.use_retrieval && cfg.retrieval_budget > 0) {
        const auto candidates = automaton.expand_candidates(
            state, static_cast<int>(cfg.retrieval_budget), cfg.depth_constrained);
        // The candidate set is prefix-closed and prefixes are emitted before
        // their extensions, so each path adds exactly one node.
        for (const auto& cand : candidates) {
            std::uint32_t parent = 0;
            for (std::size_t i = 0; i + 1 < cand.continuation.size(); ++i)
                parent = edges.at(edge_key(parent, cand.continuation[i]));
            const TokenId tok = cand.continuation.back();
            const auto id = static_cast<std::uint32_t>(tree.nodes.size());
            tree.nodes.push_back({id, parent, tok, tree.nodes[parent].depth + 1,
                                  NodeOrigin::Retrieval, 0, -1});
            edges.emplace(edge_key(parent, tok), id);
        }
    }

    if (cfg.use_logits) {
        const auto used = static_cast<int>(tree.nodes.size());
        const int budget = static_cast<int>(cfg.capacity) - used;
        if (budget > 0) {
            // +1: the logits tree's root is the shared draft root.
            const LogitsTree lt =
                build_logits_tree(next_token, budget + 1, adj, cfg.root_breadth);
            if (!lt.nodes.empty()) tree.nodes[0].breadth = lt.nodes[0].breadth;
            std::vector<std::uint32_t> mapped(lt.nodes.size(), 0);
            for (std::size_t v = 1; v < lt.nodes.size(); ++v) {
                const auto& ln = lt.nodes[v];
                const std::uint32_t parent = mapped[ln.parent];
                const auto it = edges.find(edge_key(parent, ln.token));
                if (it != edges.end()) {
                    // Union collision: keep the retrieval label, annotate the
                    // logits breadth so deeper logits children expand from it.
                    mapped[v] = it->second;
                    tree.nodes[it->second].breadth = ln.breadth;
                    if (tree.nodes[it->second].rank < 0)
                        tree.nodes[it->second].rank = ln.rank;
                } else {
                    const auto id = static_cast<std::uint32_t>(tree.nodes.size());
                    tree.nodes.push_back({id, parent, ln.token,
                                          tree.nodes[parent].depth + 1,
                                          NodeOrigin::Logits, ln.breadth, ln.rank});
                    edges.emplace(edge_key(parent, ln.token), id);
                    mapped[v] = id;
                }
            }
        }
    }

    ComposedDraft out;
    out.layout = build_layout(tree);
    out.tree = std::move(tree);
    return out;
}

}  // namespace racer
