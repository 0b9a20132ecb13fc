#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "racer/session.hpp"

namespace py = pybind11;
using namespace racer;

namespace {

py::dict report_to_dict(const SessionReport& r) {
    py::dict d;
    d["steps"] = r.steps;
    d["tokens"] = r.tokens;
    d["mat"] = r.mat;
    d["accepted_len_hist"] = r.accepted_len_hist;
    d["accepted_len_hist_no_root"] = r.accepted_len_hist_no_root;
    d["accepted_rank_hist"] = r.accepted_rank_hist;
    d["logits_accepted"] = r.logits_accepted;
    d["retrieval_accepted"] = r.retrieval_accepted;
    d["max_tree_depth"] = r.max_tree_depth;
    d["output"] = r.output;
    py::dict timing;
    timing["draft_us"] = r.draft_us;
    timing["model_forward_us"] = r.forward_us;
    timing["logits_update_us"] = r.logits_update_us;
    timing["retrieval_update_us"] = r.retrieval_update_us;
    d["timing"] = timing;
    return d;
}

py::list tree_to_list(const DraftTree& tree) {
    py::list nodes;
    for (const auto& n : tree.nodes) {
        py::dict d;
        d["node_id"] = n.node_id;
        d["parent_id"] = n.parent_id == kRootParent ? py::int_(-1) : py::int_(n.parent_id);
        d["token"] = n.token;
        d["depth"] = n.depth;
        d["origin"] = n.origin == NodeOrigin::Root      ? "root"
                      : n.origin == NodeOrigin::Logits ? "logits"
                                                       : "retrieval";
        d["breadth"] = n.breadth;
        d["rank"] = n.rank;
        nodes.append(d);
    }
    return nodes;
}

}  // namespace

PYBIND11_MODULE(_racer, m) {
    m.doc() = "training-free speculative decoding drafting engine";

    m.def("child_breadth", &child_breadth, py::arg("parent_breadth"),
          py::arg("child_index"), py::arg("is_root"));
    m.def("max_layer_breadth", &max_layer_breadth, py::arg("k"));

    py::class_<TopKAdjacency>(m, "TopKAdjacency")
        .def(py::init<std::uint32_t, int>(), py::arg("vocab_size"), py::arg("k") = 8)
        .def("refresh_one", &TopKAdjacency::refresh_one, py::arg("token"),
             py::arg("successors"))
        .def("lookup",
             [](const TopKAdjacency& adj, TokenId token) -> py::object {
                 const auto* row = adj.lookup(token);
                 if (row == nullptr) return py::none();
                 return py::cast(*row);
             })
        .def_property_readonly("coverage", &TopKAdjacency::coverage)
        .def_property_readonly("k", &TopKAdjacency::k);

    m.def(
        "logits_tree_paths",
        [](TokenId next_token, int budget, const TopKAdjacency& adj, int root_breadth) {
            return build_logits_tree(next_token, budget, adj, root_breadth).paths();
        },
        py::arg("next_token"), py::arg("budget"), py::arg("adjacency"),
        py::arg("root_breadth") = 8);

    py::class_<MatchState>(m, "MatchState")
        .def_readonly("matched_depth", &MatchState::matched_depth);

    py::class_<Automaton>(m, "Automaton")
        .def(py::init<std::uint32_t, int>(), py::arg("capacity"), py::arg("ngram_len"))
        .def("trans_tokens",
             [](Automaton& a, const std::vector<TokenId>& tokens) {
                 return a.trans_tokens(std::span(tokens));
             })
        .def("insert_tokens",
             [](Automaton& a, const std::vector<TokenId>& tokens,
                std::uint64_t freq_delta) { a.insert_tokens(std::span(tokens), freq_delta); },
             py::arg("tokens"), py::arg("freq_delta") = 1)
        .def("rebuild_failure_links", &Automaton::rebuild_failure_links)
        .def("expand_candidates",
             [](const Automaton& a, int max_candidates, bool depth_constrained) {
                 py::list out;
                 for (const auto& c :
                      a.expand_candidates(a.state(), max_candidates, depth_constrained)) {
                     out.append(py::make_tuple(c.continuation, c.pooled_freq));
                 }
                 return out;
             },
             py::arg("max_candidates"), py::arg("depth_constrained") = false)
        .def("reset_state", &Automaton::reset_state)
        .def("state", &Automaton::state)
        .def("debug_dump", &Automaton::debug_dump)
        .def("self_check", &Automaton::self_check)
        .def_property_readonly("node_count", &Automaton::node_count)
        .def_property_readonly("eviction_count", &Automaton::eviction_count)
        .def_property_readonly("capacity", &Automaton::capacity);

    m.def(
        "run_session",
        [](const std::vector<TokenId>& corpus, const std::vector<TokenId>& prompt,
           const std::string& mode, int order, double alpha, std::uint32_t vocab_size,
           int draft_size, int retrieval_budget, int root_breadth, int ngram_len,
           std::uint32_t capacity, const std::string& decode, std::uint64_t seed,
           std::size_t max_new_tokens) {
            const auto model = train_markov(corpus, order, alpha, vocab_size);
            SessionConfig cfg;
            cfg.mode = parse_mode(mode);
            cfg.composer.capacity = static_cast<std::uint32_t>(draft_size);
            cfg.composer.retrieval_budget = static_cast<std::uint32_t>(retrieval_budget);
            cfg.composer.root_breadth = root_breadth;
            cfg.ngram_len = ngram_len;
            cfg.automaton_capacity = capacity;
            cfg.decode = decode == "sampled" ? DecodeMode::Sampled : DecodeMode::Greedy;
            cfg.seed = seed;
            cfg.max_new_tokens = max_new_tokens;
            return report_to_dict(run_session(cfg, model, prompt));
        },
        py::arg("corpus"), py::arg("prompt"), py::arg("mode") = "racer",
        py::arg("order") = 3, py::arg("alpha") = 0.2, py::arg("vocab_size") = 256,
        py::arg("draft_size") = 64, py::arg("retrieval_budget") = 16,
        py::arg("root_breadth") = 8, py::arg("ngram_len") = 10,
        py::arg("capacity") = 10000, py::arg("decode") = "greedy", py::arg("seed") = 0,
        py::arg("max_new_tokens") = 256);

    m.def(
        "compose_draft",
        [](TokenId next_token, Automaton& automaton, const TopKAdjacency& adj,
           int capacity, int retrieval_budget, int root_breadth, bool depth_constrained) {
            ComposerConfig cfg;
            cfg.capacity = static_cast<std::uint32_t>(capacity);
            cfg.retrieval_budget = static_cast<std::uint32_t>(retrieval_budget);
            cfg.root_breadth = root_breadth;
            cfg.depth_constrained = depth_constrained;
            const auto draft = compose(next_token, automaton, automaton.state(), adj, cfg);
            py::dict d;
            d["nodes"] = tree_to_list(draft.tree);
            d["positions"] = draft.layout.positions;
            return d;
        },
        py::arg("next_token"), py::arg("automaton"), py::arg("adjacency"),
        py::arg("capacity") = 64, py::arg("retrieval_budget") = 16,
        py::arg("root_breadth") = 8, py::arg("depth_constrained") = false);

    m.def("autoregressive_reference",
          [](const std::vector<TokenId>& corpus, const std::vector<TokenId>& prompt,
             std::size_t length, int order, double alpha, std::uint32_t vocab_size) {
              const auto model = train_markov(corpus, order, alpha, vocab_size);
              return autoregressive_reference(model, prompt, length, DecodeMode::Greedy);
          },
          py::arg("corpus"), py::arg("prompt"), py::arg("length"), py::arg("order") = 3,
          py::arg("alpha") = 0.2, py::arg("vocab_size") = 256);
}
