// Decode-session driver: trains a byte-level n-gram model on a corpus, runs
// one speculative decoding session per prompt, and emits newline-delimited
// report records.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "racer/session.hpp"

namespace {

std::vector<racer::TokenId> bytes_of(const std::string& text) {
    std::vector<racer::TokenId> tokens;
    tokens.reserve(text.size());
    for (const unsigned char c : text) tokens.push_back(c);
    return tokens;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CLI::ValidationError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"training-free speculative decoding sessions over byte corpora"};
    app.set_config("--config")->description("key=value config file; CLI flags win");

    std::string mode = "racer";
    int draft_size = 64;
    int topk_breadth = 8;
    int ngram_len = 10;
    int capacity = 10000;
    int retrieval_budget = 16;
    std::string rebuild = "prefill";
    std::string decode = "greedy";
    std::uint64_t seed = 0;
    int max_new_tokens = 1024;
    std::string corpus_path;
    std::string prompts_path;
    std::string report_path;
    std::string format = "json";
    int order = 3;
    double alpha = 0.2;
    bool depth_constrained = false;

    app.add_option("--mode", mode,
                   "racer|logits_only|retrieval_only|half|hard|autoregressive")
        ->capture_default_str();
    app.add_option("--draft-size", draft_size, "draft tree capacity per step")
        ->capture_default_str();
    app.add_option("--topk-breadth", topk_breadth, "root breadth of the logits tree")
        ->capture_default_str();
    app.add_option("--ngram-len", ngram_len, "max n-gram length in the automaton")
        ->capture_default_str();
    app.add_option("--capacity", capacity, "automaton node capacity")
        ->capture_default_str();
    app.add_option("--retrieval-budget", retrieval_budget,
                   "draft slots reserved for retrieval candidates")
        ->capture_default_str();
    app.add_option("--rebuild", rebuild, "failure-link rebuild: prefill or everyN:<N>")
        ->capture_default_str();
    app.add_option("--decode", decode, "greedy|sampled")->capture_default_str();
    app.add_option("--seed", seed, "rng seed for sampled decoding")
        ->capture_default_str();
    app.add_option("--max-new-tokens", max_new_tokens, "tokens to generate per prompt")
        ->capture_default_str();
    app.add_option("--corpus", corpus_path, "byte corpus used to train the model")
        ->required();
    app.add_option("--prompts", prompts_path,
                   "newline-delimited prompts; default: first 64 corpus bytes");
    app.add_option("--report", report_path, "report sink; default: stdout");
    app.add_option("--format", format, "json|csv")->capture_default_str();
    app.add_option("--order", order, "model n-gram order")->capture_default_str();
    app.add_option("--alpha", alpha, "model smoothing constant")->capture_default_str();
    app.add_flag("--depth-constrained", depth_constrained,
                 "expand only the deepest automaton border");

    CLI11_PARSE(app, argc, argv);

    try {
        racer::SessionConfig cfg;
        cfg.mode = racer::parse_mode(mode);
        cfg.composer.capacity = static_cast<std::uint32_t>(draft_size);
        cfg.composer.retrieval_budget = static_cast<std::uint32_t>(retrieval_budget);
        cfg.composer.root_breadth = topk_breadth;
        cfg.composer.depth_constrained = depth_constrained;
        cfg.composer.validate();
        cfg.automaton_capacity = static_cast<std::uint32_t>(capacity);
        cfg.ngram_len = ngram_len;
        cfg.seed = seed;
        cfg.max_new_tokens = static_cast<std::size_t>(max_new_tokens);

        if (rebuild == "prefill") {
            cfg.rebuild.after_prefill_only = true;
        } else if (rebuild.rfind("everyN:", 0) == 0) {
            cfg.rebuild.after_prefill_only = false;
            cfg.rebuild.every_n = std::stoi(rebuild.substr(7));
            if (cfg.rebuild.every_n < 1)
                throw CLI::ValidationError("--rebuild everyN needs N >= 1");
        } else {
            throw CLI::ValidationError("--rebuild must be prefill or everyN:<N>");
        }

        if (decode == "greedy")
            cfg.decode = racer::DecodeMode::Greedy;
        else if (decode == "sampled")
            cfg.decode = racer::DecodeMode::Sampled;
        else
            throw CLI::ValidationError("--decode must be greedy or sampled");

        racer::ReportFormat report_format;
        if (format == "json")
            report_format = racer::ReportFormat::Json;
        else if (format == "csv")
            report_format = racer::ReportFormat::Csv;
        else
            throw CLI::ValidationError("--format must be json or csv");

        const auto corpus = bytes_of(read_file(corpus_path));
        const auto model = racer::train_markov(corpus, order, alpha, 256);

        std::vector<std::vector<racer::TokenId>> prompts;
        if (prompts_path.empty()) {
            prompts.push_back({corpus.begin(),
                               corpus.begin() + std::min<std::size_t>(64, corpus.size())});
        } else {
            std::istringstream lines(read_file(prompts_path));
            std::string line;
            while (std::getline(lines, line))
                if (!line.empty()) prompts.push_back(bytes_of(line));
            if (prompts.empty())
                throw CLI::ValidationError("prompts file has no usable lines");
        }

        std::ofstream file_sink;
        if (!report_path.empty()) {
            file_sink.open(report_path, std::ios::binary);
            if (!file_sink)
                throw CLI::ValidationError("cannot open report sink: " + report_path);
        }
        std::ostream& sink = report_path.empty() ? std::cout : file_sink;

        if (report_format == racer::ReportFormat::Csv) sink << racer::csv_header();
        for (const auto& prompt : prompts) {
            const auto report = racer::run_session(cfg, model, prompt);
            sink << racer::emit_report(report, report_format);
        }
        sink.flush();
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
