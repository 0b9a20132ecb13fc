#include "racer/types.hpp"

#include <unordered_map>
#include <unordered_set>

namespace racer {

void DraftTree::validate() const {
    if (nodes.empty()) return;
    if (nodes.size() > capacity) throw std::logic_error("draft tree exceeds capacity");
    if (nodes[0].parent_id != kRootParent || nodes[0].origin != NodeOrigin::Root ||
        nodes[0].depth != 0) {
        throw std::logic_error("node 0 must be the root");
    }
    std::unordered_map<std::uint64_t, std::uint32_t> edge_seen;  // (parent, token)
    for (std::uint32_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        if (n.node_id != i) throw std::logic_error("node_id out of order");
        if (i == 0) continue;
        if (n.origin == NodeOrigin::Root) throw std::logic_error("duplicate root origin");
        if (n.parent_id >= i) throw std::logic_error("parent does not precede child");
        if (n.depth != nodes[n.parent_id].depth + 1) throw std::logic_error("bad depth");
        const std::uint64_t key =
            (static_cast<std::uint64_t>(n.parent_id) << 32) | n.token;
        if (!edge_seen.emplace(key, i).second) {
            throw std::logic_error("duplicate (parent, token) edge");
        }
    }
}

TreeLayout build_layout(const DraftTree& tree) {
    const std::size_t n = tree.nodes.size();
    TreeLayout layout;
    layout.positions.resize(n);
    layout.ancestor_mask.assign(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& node = tree.nodes[i];
        if (i == 0) {
            if (node.parent_id != kRootParent)
                throw std::invalid_argument("build_layout: node 0 is not a root");
            layout.positions[0] = 0;
        } else {
            if (node.parent_id >= i)
                throw std::invalid_argument("build_layout: malformed parent reference");
            layout.positions[i] = layout.positions[node.parent_id] + 1;
            layout.ancestor_mask[i] = layout.ancestor_mask[node.parent_id];
        }
        layout.ancestor_mask[i][i] = true;
    }
    return layout;
}

}  // namespace racer
