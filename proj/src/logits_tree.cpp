#include "racer/logits_tree.hpp"

#include <algorithm>
#include <deque>

namespace racer {

int child_breadth(int parent_breadth, int child_index, bool is_root) {
    if (parent_breadth < 1) throw std::invalid_argument("child_breadth: breadth < 1");
    if (child_index < 0 || child_index >= parent_breadth)
        throw std::invalid_argument("child_breadth: child index out of range");
    const int shift = child_index + (is_root ? 0 : 1);
    const int v = shift >= 31 ? 0 : (parent_breadth >> shift);
    return std::max(1, v);
}

long long max_layer_breadth(int k) {
    if (k < 1) throw std::invalid_argument("max_layer_breadth: k must be >= 1");
    if (k == 1) return 1;
    int m = 0;
    while ((1 << (m + 1)) <= k) ++m;  // m = floor(log2 k)
    long long sum = 0;
    for (int i = 0; i < m; ++i) {
        if (k & (1 << i)) sum += static_cast<long long>(i + 2) << i;
    }
    return sum + (static_cast<long long>(1) << m) * m + 1;
}

TopKAdjacency::TopKAdjacency(std::uint32_t vocab_size, int k, std::uint32_t dense_threshold)
    : vocab_(vocab_size), k_(k), dense_(vocab_size <= dense_threshold) {
    if (k_ < 1) throw std::invalid_argument("TopKAdjacency: k must be >= 1");
    if (dense_) {
        rows_.resize(vocab_);
        present_.assign(vocab_, 0);
    }
}

void TopKAdjacency::refresh_one(TokenId token, std::vector<TokenId> successors) {
    if (token >= vocab_) throw std::invalid_argument("refresh: token out of vocabulary");
    if (successors.size() > static_cast<std::size_t>(k_))
        throw std::invalid_argument("refresh: successor list longer than k");
    if (dense_) {
        if (!present_[token]) {
            present_[token] = 1;
            ++covered_;
        }
        rows_[token] = std::move(successors);
    } else {
        auto [it, inserted] = map_.insert_or_assign(token, std::move(successors));
        (void)it;
        if (inserted) ++covered_;
    }
}

void TopKAdjacency::refresh(
    std::span<const std::pair<TokenId, std::vector<TokenId>>> observations) {
    for (const auto& [token, succ] : observations) refresh_one(token, succ);
}

const std::vector<TokenId>* TopKAdjacency::lookup(TokenId token) const {
    if (dense_) {
        if (token >= vocab_ || !present_[token]) return nullptr;
        return &rows_[token];
    }
    auto it = map_.find(token);
    return it == map_.end() ? nullptr : &it->second;
}

LogitsTree build_logits_tree(TokenId next_token, int budget, const TopKAdjacency& adj,
                             int root_breadth) {
    if (root_breadth < 1 || root_breadth > adj.k())
        throw std::invalid_argument("build_logits_tree: root breadth must be in [1, k]");
    LogitsTree tree;
    if (budget <= 0) return tree;

    tree.nodes.push_back({next_token, -1, root_breadth, -1, 0});
    int remaining = budget - 1;
    std::deque<int> queue{0};
    while (!queue.empty() && remaining > 0) {
        const int u = queue.front();
        queue.pop_front();
        const auto* succ = adj.lookup(tree.nodes[u].token);
        if (succ == nullptr) continue;
        const int bu = tree.nodes[u].breadth;
        const bool is_root = (u == 0);
        const int width = std::min<int>(bu, static_cast<int>(succ->size()));
        for (int j = 0; j < width && remaining > 0; ++j) {
            const int bc = child_breadth(bu, j, is_root);
            tree.nodes.push_back(
                {(*succ)[j], u, bc, j, tree.nodes[u].depth + 1});
            queue.push_back(static_cast<int>(tree.nodes.size()) - 1);
            --remaining;
        }
    }
    return tree;
}

std::vector<std::vector<TokenId>> LogitsTree::paths() const {
    std::vector<std::vector<TokenId>> result;
    if (nodes.empty()) return result;
    std::vector<char> has_child(nodes.size(), 0);
    for (const auto& n : nodes) {
        if (n.parent >= 0) has_child[n.parent] = 1;
    }
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
        if (has_child[i]) continue;
        std::vector<TokenId> path;
        for (int v = i; v >= 0; v = nodes[v].parent) path.push_back(nodes[v].token);
        std::reverse(path.begin(), path.end());
        result.push_back(std::move(path));
    }
    return result;
}

}  // namespace racer
