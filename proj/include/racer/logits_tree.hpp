#pragma once

#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "racer/types.hpp"

namespace racer {

// Breadth for the j-th child of a node with breadth `parent_breadth`:
// max(1, floor(b / 2^(j + [non-root]))).
int child_breadth(int parent_breadth, int child_index, bool is_root);

// Closed form for the maximum number of nodes in any single layer of an
// unbounded logits tree with root breadth k. The maximum first occurs at
// depth floor(log2 k) + 1.
long long max_layer_breadth(int k);

// Token -> ordered top-k successor list, refreshed from the most recent
// distribution observed for each token (copy-logit reuse). Rank order only,
// no probabilities. Dense rows for small vocabularies, hashed above a
// threshold.
class TopKAdjacency {
public:
    explicit TopKAdjacency(std::uint32_t vocab_size, int k = 8,
                           std::uint32_t dense_threshold = 1u << 16);

    [[nodiscard]] int k() const { return k_; }
    [[nodiscard]] std::uint32_t vocab_size() const { return vocab_; }

    // Each observation: (token, its top-k successor list, best first).
    // Processed in order; last write wins.
    void refresh(std::span<const std::pair<TokenId, std::vector<TokenId>>> observations);
    void refresh_one(TokenId token, std::vector<TokenId> successors);

    // nullptr when the token has never been observed (dead end).
    [[nodiscard]] const std::vector<TokenId>* lookup(TokenId token) const;
    [[nodiscard]] bool has(TokenId token) const { return lookup(token) != nullptr; }
    [[nodiscard]] std::size_t coverage() const { return covered_; }

private:
    std::uint32_t vocab_;
    int k_;
    bool dense_;
    std::size_t covered_ = 0;
    std::vector<std::vector<TokenId>> rows_;  // dense path
    std::vector<char> present_;
    std::unordered_map<TokenId, std::vector<TokenId>> map_;  // sparse path
};

struct LogitsNode {
    TokenId token;
    int parent;   // index into LogitsTree::nodes, -1 for root
    int breadth;  // breadth allocated to this node's children
    int rank;     // child index in the parent's successor list, -1 for root
    int depth;
};

struct LogitsTree {
    std::vector<LogitsNode> nodes;  // BFS order, root first; empty when budget = 0

    // Root-to-leaf token paths (the backtracking phase of the BFS build).
    [[nodiscard]] std::vector<std::vector<TokenId>> paths() const;
};

// BFS expansion: the root consumes one slot, children of each node are taken
// from the adjacency entry in rank order with breadths per child_breadth,
// stopping once `budget` slots are used. Tokens without an adjacency entry
// are dead ends.
LogitsTree build_logits_tree(TokenId next_token, int budget, const TopKAdjacency& adj,
                             int root_breadth);

}  // namespace racer
