#pragma once

// The `pqa` command: ingest, pair, diagnose, eval, stats, serve, export.
//
// stdout carries only the payload (JSON by default, --table for the human
// layout); warnings and skip reports go to stderr. Exit codes: 0 success,
// 2 usage or input error, 1 internal error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pqa/corpus_io.hpp"
#include "pqa/dataset.hpp"
#include "pqa/diagnostics.hpp"
#include "pqa/error.hpp"
#include "pqa/evaluation.hpp"
#include "pqa/journal.hpp"
#include "pqa/pairing.hpp"
#include "pqa/service.hpp"

namespace pqa {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

namespace cli_detail {

inline DatasetFormat parse_format(const std::string& s) {
    if (s == "auto") return DatasetFormat::automatic;
    if (s == "squad") return DatasetFormat::squad;
    return DatasetFormat::pqa;
}

inline std::string dataset_label(const std::filesystem::path& p) { return p.stem().string(); }

inline void write_payload(std::ostream& out, const std::string& payload,
                          const std::string& out_file) {
    if (out_file.empty()) {
        out << payload;
        return;
    }
    std::ofstream f(out_file, std::ios::binary);
    if (!f) throw IoError("cannot write " + out_file);
    f << payload;
    if (!f) throw IoError("write failed: " + out_file);
}

inline std::string store_dir_or_env(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("PQA_STORE"); env != nullptr && *env != '\0') return env;
    throw InputError("no store directory: pass --store or set PQA_STORE");
}

/// News/wiki pairs as a ParallelQA dataset with no questions yet, ready to
/// seed an annotation store.
inline ParallelQADataset pairs_to_dataset(const std::vector<RawDocument>& news,
                                          const PairingResult& r) {
    ParallelQADataset ds;
    for (const auto& c : r.pairs) {
        const auto it = std::find_if(news.begin(), news.end(),
                                     [&](const RawDocument& d) { return d.id == c.news_id; });
        PassagePair p;
        p.id = c.news_id;
        p.passage_a = {SourceKind::news, "news:" + c.news_id, it->text};
        p.passage_b = {SourceKind::wiki, "wiki:" + c.wiki_fragment.id(), c.wiki_fragment.text};
        ds.pairs.push_back(std::move(p));
    }
    return ds;
}

}  // namespace cli_detail

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Parallel-passage QA toolkit", "pqa"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    const std::vector<std::string> metric_names{"jaccard", "tfidf", "bm25"};
    const std::vector<std::string> format_names{"auto", "squad", "pqa"};

    // ingest
    std::string ingest_input;
    std::string ingest_source = "news";
    std::string ingest_out;
    auto* ingest = app.add_subcommand("ingest", "Normalize a local corpus into JSON-lines documents");
    ingest->add_option("--input", ingest_input, "Directory of .txt/.jsonl files or a .jsonl file")
        ->required()
        ->check(CLI::ExistingPath);
    ingest->add_option("--source", ingest_source, "Source kind of the documents")
        ->check(CLI::IsMember({"news", "wiki", "other"}));
    ingest->add_option("--out", ingest_out, "Write here instead of stdout");

    // pair
    std::string news_dir;
    std::string wiki_dir;
    std::string manifest_path;
    std::string pairs_dataset_out;
    PairingConfig pcfg;
    LdaConfig lcfg;
    double alpha = -1.0;
    auto* pair = app.add_subcommand("pair", "Pair news articles with wiki passages");
    pair->add_option("--news", news_dir, "News corpus")->required()->check(CLI::ExistingPath);
    pair->add_option("--wiki", wiki_dir, "Wiki corpus")->required()->check(CLI::ExistingPath);
    pair->add_option("--manifest", manifest_path, "Entity -> wiki file manifest (JSON)")
        ->check(CLI::ExistingFile);
    pair->add_option("--entities-per-article", pcfg.entities_per_article)
        ->capture_default_str()->check(CLI::PositiveNumber);
    pair->add_option("--k", pcfg.k_neighbors, "Neighbors kept per article")
        ->capture_default_str()->check(CLI::PositiveNumber);
    pair->add_option("--lambda", pcfg.lambda, "Weight of tf-idf vs. topic similarity")
        ->capture_default_str()->check(CLI::Range(0.0, 1.0));
    pair->add_option("--max-words", pcfg.max_words, "Fragment length in words")
        ->capture_default_str()->check(CLI::PositiveNumber);
    pair->add_option("--min-score", pcfg.min_score)->capture_default_str();
    pair->add_option("--infer-iterations", pcfg.infer_iterations)
        ->capture_default_str()->check(CLI::PositiveNumber);
    pair->add_option("--topics", lcfg.num_topics)->capture_default_str()->check(CLI::PositiveNumber);
    pair->add_option("--alpha", alpha, "Dirichlet prior on document topics (default 50/K)");
    pair->add_option("--beta", lcfg.beta)->capture_default_str()->check(CLI::PositiveNumber);
    pair->add_option("--iterations", lcfg.iterations)->capture_default_str()->check(CLI::PositiveNumber);
    std::uint64_t seed = 7;
    pair->add_option("--seed", seed)->capture_default_str();
    pair->add_option("--dataset-out", pairs_dataset_out,
                     "Also write the pairs as a question-less ParallelQA dataset");

    // diagnose
    std::string diag_dataset;
    std::string diag_metric = "jaccard";
    std::string diag_format = "auto";
    std::string diag_out;
    Bm25Params bm25;
    bool diag_table = false;
    auto* diagnose = app.add_subcommand("diagnose", "Sentence-retrieval diagnostic");
    diagnose->add_option("--dataset", diag_dataset)->required()->check(CLI::ExistingFile);
    diagnose->add_option("--metric", diag_metric, "jaccard, tfidf, bm25 or all")
        ->capture_default_str()
        ->check(CLI::IsMember({"jaccard", "tfidf", "bm25", "all"}));
    diagnose->add_option("--format", diag_format)->capture_default_str()->check(CLI::IsMember(format_names));
    diagnose->add_option("--k1", bm25.k1)->capture_default_str();
    diagnose->add_option("--b", bm25.b)->capture_default_str()->check(CLI::Range(0.0, 1.0));
    diagnose->add_option("--out", diag_out, "Write here instead of stdout");
    diagnose->add_flag("--table", diag_table, "Human-readable table");

    // eval
    std::string eval_dataset;
    std::string eval_predictions;
    std::string eval_format = "auto";
    std::string eval_metric = "jaccard";
    bool eval_table = false;
    auto* eval = app.add_subcommand("eval", "Exact match / F1 with error categories");
    eval->add_option("--dataset", eval_dataset)->required()->check(CLI::ExistingFile);
    eval->add_option("--predictions", eval_predictions, "JSON object qa_id -> answer")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--format", eval_format)->capture_default_str()->check(CLI::IsMember(format_names));
    eval->add_option("--metric", eval_metric, "Metric used to pick the top sentence when categorizing")
        ->capture_default_str()
        ->check(CLI::IsMember(metric_names));
    eval->add_flag("--table", eval_table, "Human-readable table");

    // stats
    std::string stats_dataset;
    std::string stats_format = "auto";
    bool stats_table = false;
    auto* stats = app.add_subcommand("stats", "Dataset statistics");
    stats->add_option("--dataset", stats_dataset)->required()->check(CLI::ExistingFile);
    stats->add_option("--format", stats_format)->capture_default_str()->check(CLI::IsMember(format_names));
    stats->add_flag("--table", stats_table, "Human-readable table");

    // serve
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string serve_store;
    std::string serve_dataset;
    std::string guidelines_path;
    std::string ui_dir;
    auto* serve = app.add_subcommand("serve", "Run the annotation service");
    serve->add_option("--port", port)->capture_default_str()->check(CLI::Range(0, 65535));
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--store", serve_store, "Store directory (default: $PQA_STORE)");
    serve->add_option("--dataset", serve_dataset, "ParallelQA file used to initialize the store")
        ->check(CLI::ExistingFile);
    serve->add_option("--guidelines", guidelines_path, "Annotation guidelines text")
        ->check(CLI::ExistingFile);
    serve->add_option("--ui", ui_dir, "Directory of static UI files")->check(CLI::ExistingDirectory);

    // export
    std::string export_store;
    std::string export_out;
    auto* exp = app.add_subcommand("export", "Write the store's current dataset");
    exp->add_option("--store", export_store, "Store directory (default: $PQA_STORE)");
    exp->add_option("--out", export_out, "Write here instead of stdout");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "pqa: " << e.what() << "\n";
        err << "run 'pqa --help' for usage\n";
        return kExitUsage;
    }

    try {
        if (*ingest) {
            SourceKind kind = SourceKind::news;
            parse_source_kind(ingest_source, kind);
            const auto docs = load_corpus(ingest_input, kind);
            std::string payload;
            std::size_t sentences = 0;
            std::size_t tokens = 0;
            for (const auto& d : docs) {
                payload += to_json(d).dump() + "\n";
                sentences += split_sentences(d.text).size();
                tokens += tokenize(d.text).size();
            }
            cli_detail::write_payload(out, payload, ingest_out);
            err << "ingested " << docs.size() << " documents, " << sentences << " sentences, "
                << tokens << " tokens\n";
        } else if (*pair) {
            PipelineOptions opts;
            pcfg.seed = seed;
            lcfg.seed = seed;
            if (alpha > 0.0) lcfg.alpha = alpha;
            opts.pairing = pcfg;
            opts.lda = lcfg;
            if (!manifest_path.empty()) opts.manifest = load_entity_manifest(manifest_path);
            const auto news = load_corpus(news_dir, SourceKind::news);
            const auto wiki = load_corpus(wiki_dir, SourceKind::wiki);
            if (wiki.empty()) throw InputError("empty wiki pool");
            if (news.empty()) throw InputError("empty news corpus");
            const PipelineResult r = run_pairing_pipeline(news, wiki, opts);
            for (const auto& c : r.pairing.pairs) out << to_json(c).dump() << "\n";
            for (const auto& m : r.missing_entities) err << "warning: no wiki file for entity " << m << "\n";
            for (const auto& s : r.pairing.skipped) {
                err << "skipped " << s.news_id << ": " << s.reason << " (best score " << s.best_score
                    << ")\n";
            }
            if (!pairs_dataset_out.empty()) {
                save_pqa(cli_detail::pairs_to_dataset(news, r.pairing), pairs_dataset_out);
            }
        } else if (*diagnose) {
            const QASet set = load_qaset(diag_dataset, cli_detail::parse_format(diag_format));
            for (const auto& w : set.warnings) err << "warning: " << w << "\n";
            std::vector<Metric> metrics;
            if (diag_metric == "all") {
                metrics = {Metric::jaccard, Metric::tfidf, Metric::bm25};
            } else {
                Metric m;
                parse_metric(diag_metric, m);
                metrics = {m};
            }
            std::vector<RetrievalReport> reports;
            for (auto m : metrics) reports.push_back(retrieval_rate(set, m, bm25));
            std::string payload;
            if (diag_table) {
                payload = format_retrieval_table(reports, cli_detail::dataset_label(diag_dataset));
            } else if (reports.size() == 1) {
                payload = to_json(reports.front()).dump(2) + "\n";
            } else {
                nlohmann::json arr = nlohmann::json::array();
                for (const auto& r : reports) arr.push_back(to_json(r));
                payload = arr.dump(2) + "\n";
            }
            cli_detail::write_payload(out, payload, diag_out);
        } else if (*eval) {
            const QASet set = load_qaset(eval_dataset, cli_detail::parse_format(eval_format));
            for (const auto& w : set.warnings) err << "warning: " << w << "\n";
            const PredictionSet preds = load_predictions(eval_predictions);
            Metric m;
            parse_metric(eval_metric, m);
            const EvalReport r = evaluate_with_categories(set, preds, m);
            for (const auto& id : r.missing_ids) err << "warning: no prediction for " << id << "; scored 0\n";
            out << (eval_table ? format_eval_table(r, cli_detail::dataset_label(eval_dataset))
                               : to_json(r).dump(2) + "\n");
        } else if (*stats) {
            const QASet set = load_qaset(stats_dataset, cli_detail::parse_format(stats_format));
            for (const auto& w : set.warnings) err << "warning: " << w << "\n";
            const DatasetStats s = compute_stats(set);
            if (stats_table) {
                char line[160];
                std::snprintf(line, sizeof line,
                              "pairs %zu\nqas %zu\nanswers %zu\nmean answer length %.2f tokens\n"
                              "named-entity answers %.2f%% (approximate)\n"
                              "answers in passage 0/1 %zu/%zu\n",
                              s.num_pairs, s.num_qas, s.num_answers, s.mean_answer_len_tokens,
                              100.0 * s.named_entity_answer_rate, s.answers_per_passage_index[0],
                              s.answers_per_passage_index[1]);
                out << line;
            } else {
                out << to_json(s).dump(2) << "\n";
            }
        } else if (*serve) {
            std::optional<ParallelQADataset> initial;
            if (!serve_dataset.empty()) initial = load_pqa(serve_dataset);
            AnnotationStore store(cli_detail::store_dir_or_env(serve_store), initial);
            ServiceOptions sopts;
            if (!guidelines_path.empty()) sopts.guidelines = read_file(guidelines_path);
            if (!ui_dir.empty()) sopts.ui_dir = ui_dir;
            AnnotationService service(store, sopts);
            httplib::Server server;
            service.mount(server);
            if (store.recovered_bytes() > 0) {
                err << "recovered: dropped " << store.recovered_bytes() << " bytes of torn journal tail\n";
            }
            if (!server.bind_to_port(host, port)) throw InputError("cannot bind " + host + ":" + std::to_string(port));
            err << "listening on http://" << host << ":" << port << "\n";
            err.flush();
            server.listen_after_bind();
        } else if (*exp) {
            AnnotationStore store(cli_detail::store_dir_or_env(export_store));
            cli_detail::write_payload(out, to_json(*store.snapshot()).dump(2) + "\n", export_out);
        }
    } catch (const InputError& e) {
        err << "pqa: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "pqa: internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitOk;
}

inline int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(std::move(args), out, err);
}

}  // namespace pqa
