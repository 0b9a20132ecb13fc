#include <random>

#include "doctest.h"
#include "racer/composer.hpp"

using namespace racer;

namespace {

TopKAdjacency full_adjacency(std::uint32_t vocab, int k) {
    TopKAdjacency adj(vocab, k);
    for (TokenId t = 0; t < vocab; ++t) {
        std::vector<TokenId> succ;
        for (int j = 0; j < k; ++j) succ.push_back((t + 1 + j) % vocab);
        adj.refresh_one(t, succ);
    }
    return adj;
}

bool has_path(const DraftTree& tree, const std::vector<TokenId>& continuation) {
    std::uint32_t cur = 0;
    for (const TokenId t : continuation) {
        bool found = false;
        for (const auto& n : tree.nodes) {
            if (n.parent_id == cur && n.token == t && n.node_id != 0) {
                cur = n.node_id;
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("config validation") {
    ComposerConfig cfg;
    cfg.capacity = 8;
    cfg.retrieval_budget = 8;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.retrieval_budget = 7;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("without borders the composed tree equals the pure logits tree") {
    const auto adj = full_adjacency(64, 8);
    Automaton automaton(64, 10);  // empty: no borders anywhere
    ComposerConfig cfg;
    cfg.capacity = 64;
    cfg.retrieval_budget = 16;

    const auto draft = compose(5, automaton, automaton.state(), adj, cfg);
    draft.tree.validate();
    const LogitsTree ref = build_logits_tree(5, 64, adj, 8);
    REQUIRE(draft.tree.nodes.size() == ref.nodes.size());
    for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
        CHECK(draft.tree.nodes[i].token == ref.nodes[i].token);
        const auto expect_parent =
            ref.nodes[i].parent < 0 ? kRootParent
                                    : static_cast<std::uint32_t>(ref.nodes[i].parent);
        CHECK(draft.tree.nodes[i].parent_id == expect_parent);
        CHECK(draft.tree.nodes[i].breadth == ref.nodes[i].breadth);
    }
    CHECK(draft.layout.positions.size() == draft.tree.nodes.size());
}

TEST_CASE("with R = C - 1 and a rich context retrieval fills the draft") {
    Automaton automaton(4096, 10);
    std::vector<TokenId> stream;
    for (int rep = 0; rep < 20; ++rep)
        for (TokenId t = 0; t < 30; ++t) stream.push_back(t);
    for (std::size_t i = 0; i + 10 <= stream.size(); ++i)
        automaton.insert_tokens(std::span(stream.data() + i, 10), 1);
    automaton.rebuild_failure_links();
    automaton.reset_state();
    automaton.trans_tokens(std::vector<TokenId>{0, 1, 2});

    TopKAdjacency adj(64, 8);  // empty coverage: logits contribute nothing
    ComposerConfig cfg;
    cfg.capacity = 10;
    cfg.retrieval_budget = 9;
    const auto draft = compose(2, automaton, automaton.state(), adj, cfg);
    draft.tree.validate();
    // The unique continuation chain 3,4,...,11 (nine tokens below the
    // shallowest border) fills every slot.
    CHECK(draft.tree.nodes.size() == 10);
    for (std::size_t i = 1; i < draft.tree.nodes.size(); ++i)
        CHECK(draft.tree.nodes[i].origin == NodeOrigin::Retrieval);
    // The top continuation chain after [0,1,2] is 3,4,5,...
    CHECK(has_path(draft.tree, {3, 4, 5}));
}

TEST_CASE("trie union merges colliding retrieval and logits nodes") {
    Automaton automaton(64, 4);
    // After consuming token 9, continuations [7] and [7,8] are retrievable.
    automaton.insert_tokens(std::vector<TokenId>{1, 9, 7, 8}, 5);
    automaton.rebuild_failure_links();
    automaton.reset_state();
    automaton.trans_tokens(std::vector<TokenId>{1, 9});
    REQUIRE(automaton.state().matched_depth == 2);

    TopKAdjacency adj(16, 2);
    adj.refresh_one(9, {7, 3});  // logits also proposes 7 under the root
    ComposerConfig cfg;
    cfg.capacity = 8;
    cfg.retrieval_budget = 2;
    cfg.root_breadth = 2;
    const auto draft = compose(9, automaton, automaton.state(), adj, cfg);
    draft.tree.validate();

    // Nodes: root(9), retrieval 7, retrieval 8, logits 3; the colliding 7
    // keeps its retrieval origin but carries the logits breadth annotation.
    int sevens = 0;
    for (const auto& n : draft.tree.nodes) {
        if (n.node_id != 0 && n.token == 7 && n.parent_id == 0) {
            ++sevens;
            CHECK(n.origin == NodeOrigin::Retrieval);
            CHECK(n.breadth == 2);  // first logits child of a root with breadth 2
            CHECK(n.rank == 0);
        }
    }
    CHECK(sevens == 1);
    CHECK(has_path(draft.tree, {7, 8}));
    CHECK(has_path(draft.tree, {3}));
}

TEST_CASE("unused retrieval budget rolls over to the logits tree") {
    Automaton automaton(64, 4);
    automaton.insert_tokens(std::vector<TokenId>{1, 9, 7}, 1);
    automaton.rebuild_failure_links();
    automaton.reset_state();
    automaton.trans_tokens(std::vector<TokenId>{1, 9});

    const auto adj = full_adjacency(16, 4);
    ComposerConfig cfg;
    cfg.capacity = 16;
    cfg.retrieval_budget = 8;  // only one retrieval candidate exists
    cfg.root_breadth = 4;
    const auto draft = compose(9, automaton, automaton.state(), adj, cfg);
    draft.tree.validate();
    CHECK(draft.tree.nodes.size() == 16);  // logits filled the slack
    std::size_t retrieval = 0;
    for (const auto& n : draft.tree.nodes)
        if (n.origin == NodeOrigin::Retrieval) ++retrieval;
    CHECK(retrieval == 1);
}

TEST_CASE("composition is deterministic") {
    Automaton automaton(256, 6);
    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        std::vector<TokenId> gram;
        for (int j = 0; j < 4; ++j) gram.push_back(static_cast<TokenId>(rng() % 6));
        automaton.insert_tokens(gram, 1 + rng() % 4);
    }
    automaton.rebuild_failure_links();
    automaton.reset_state();
    automaton.trans_tokens(std::vector<TokenId>{2, 3});
    const auto adj = full_adjacency(8, 4);
    ComposerConfig cfg;
    cfg.capacity = 32;
    cfg.retrieval_budget = 10;
    cfg.root_breadth = 4;

    const auto a = compose(3, automaton, automaton.state(), adj, cfg);
    const auto b = compose(3, automaton, automaton.state(), adj, cfg);
    REQUIRE(a.tree.nodes.size() == b.tree.nodes.size());
    for (std::size_t i = 0; i < a.tree.nodes.size(); ++i) {
        CHECK(a.tree.nodes[i].token == b.tree.nodes[i].token);
        CHECK(a.tree.nodes[i].parent_id == b.tree.nodes[i].parent_id);
        CHECK(a.tree.nodes[i].origin == b.tree.nodes[i].origin);
    }
}

TEST_CASE("every selected retrieval candidate survives the union") {
    Automaton automaton(256, 6);
    std::mt19937_64 rng(29);
    for (int i = 0; i < 80; ++i) {
        std::vector<TokenId> gram;
        for (int j = 0; j < 5; ++j) gram.push_back(static_cast<TokenId>(rng() % 5));
        automaton.insert_tokens(gram, 1 + rng() % 3);
    }
    automaton.rebuild_failure_links();
    automaton.reset_state();
    const std::vector<TokenId> probe{1, 2};
    automaton.trans_tokens(probe);
    const auto state = automaton.state();
    const auto adj = full_adjacency(8, 4);
    ComposerConfig cfg;
    cfg.capacity = 24;
    cfg.retrieval_budget = 8;
    cfg.root_breadth = 4;

    const auto cands = automaton.expand_candidates(state, 8, false);
    const auto draft = compose(2, automaton, state, adj, cfg);
    draft.tree.validate();
    CHECK(draft.tree.nodes.size() <= cfg.capacity);
    for (const auto& c : cands) CHECK(has_path(draft.tree, c.continuation));
}
