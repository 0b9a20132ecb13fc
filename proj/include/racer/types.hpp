#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace racer {

using TokenId = std::uint32_t;

// Explicit parent sentinel for the root; never a valid node index.
inline constexpr std::uint32_t kRootParent = std::numeric_limits<std::uint32_t>::max();

enum class NodeOrigin : std::uint8_t { Root, Logits, Retrieval };

struct DraftNode {
    std::uint32_t node_id = 0;
    std::uint32_t parent_id = kRootParent;
    TokenId token = 0;
    std::uint32_t depth = 0;
    NodeOrigin origin = NodeOrigin::Root;
    // Breadth allocated to this node's children; meaningful for logits nodes.
    int breadth = 0;
    // Index of this token in the parent's top-k successor list; -1 for
    // root/retrieval nodes. Used for accepted-rank bookkeeping.
    int rank = -1;
};

// A speculative draft: a trie of candidate continuations rooted at the
// committed next token. Nodes are stored parent-before-child.
struct DraftTree {
    std::vector<DraftNode> nodes;
    std::uint32_t capacity = 64;

    [[nodiscard]] bool empty() const { return nodes.empty(); }
    [[nodiscard]] std::size_t size() const { return nodes.size(); }

    [[nodiscard]] std::uint32_t max_depth() const {
        std::uint32_t d = 0;
        for (const auto& n : nodes) d = std::max(d, n.depth);
        return d;
    }

    // Throws std::logic_error if structural invariants are violated.
    void validate() const;
};

// Position offsets and ancestor masks for parallel tree verification.
struct TreeLayout {
    std::vector<std::uint32_t> positions;           // positions[i] = depth of node i
    std::vector<std::vector<bool>> ancestor_mask;   // mask[i][j]: j == i or j ancestor of i
};

TreeLayout build_layout(const DraftTree& tree);

struct VerifyOutcome {
    std::vector<std::uint32_t> accepted_node_ids;  // contiguous root path, root first
    std::uint32_t accepted_count = 0;              // includes the root
    TokenId bonus_token = 0;
    std::vector<int> accepted_ranks;               // one entry per accepted logits node
};

}  // namespace racer
