#pragma once

// JSON-over-HTTP annotation service.
//
//   GET  /api/pairs/next?annotator=ID   next pair for an annotator (204 when done)
//   POST /api/annotations               {pair_id, qa} -> 201 receipt | 404 | 422
//   GET  /api/export                    current ParallelQA dataset
//   GET  /api/reports/retrieval?metric=M
//   POST /api/reports/eval[?metric=M]   body: predictions object (GET with body also accepted)
//
// Handlers are plain member functions returning HttpReply so they can be
// exercised without a socket; mount() wires them into a cpp-httplib server.

#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "pqa/dataset.hpp"
#include "pqa/diagnostics.hpp"
#include "pqa/evaluation.hpp"
#include "pqa/journal.hpp"

namespace pqa {

struct HttpReply {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

struct SessionState {
    std::string annotator_id;
    std::deque<std::string> assigned;
    std::set<std::string> completed;
};

struct InferenceTypeInfo {
    InferenceType type;
    std::string_view description;
    std::string_view example;
};

inline constexpr InferenceTypeInfo kInferenceTaxonomy[] = {
    {InferenceType::referential, "link a name, noun phrase or pronoun to the entity it denotes",
     "\"the former governor\" -> the person named earlier"},
    {InferenceType::figurative, "interpret metaphor or idiom", "\"a lion in battle\" -> brave"},
    {InferenceType::part_whole, "use inclusion or hierarchy between concepts",
     "a sedan is a car"},
    {InferenceType::numeric, "convert units or do simple arithmetic", "two dozen is 24"},
    {InferenceType::lexical, "pick the sense a word has in context",
     "\"bank\" as river side vs. lender"},
    {InferenceType::denotation, "recognize what an expression conventionally stands for",
     "a white flag signals surrender"},
    {InferenceType::spatial, "reason about location and containment",
     "Lyon is in France, so it is in Europe"},
    {InferenceType::temporal, "reason about order and duration of events",
     "a 1990 event precedes a 1995 one"},
};

inline constexpr std::string_view kDefaultGuidelines =
    "Read both passages. Write a question whose answer is a contiguous span of one passage and "
    "which can only be answered by connecting information from both passages. Avoid copying "
    "wording from the sentence that holds the answer; refer to entities indirectly (by role, "
    "description or a fact stated in the other passage). Select the answer span by highlighting "
    "it, tag the kind of inference the question needs, and end the question with '?'.";

inline nlohmann::json taxonomy_json() {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& t : kInferenceTaxonomy) {
        out.push_back({{"name", to_string(t.type)},
                       {"description", t.description},
                       {"example", t.example}});
    }
    return out;
}

struct ServiceOptions {
    std::string guidelines{kDefaultGuidelines};
    std::optional<std::filesystem::path> ui_dir;
    Bm25Params bm25;
};

inline nlohmann::json violations_json(const std::vector<Violation>& vs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& v : vs) arr.push_back({{"field", v.field}, {"message", v.message}});
    return {{"violations", std::move(arr)}};
}

/// Parses a POST /api/annotations body, collecting every schema problem.
inline std::optional<std::pair<std::string, QAItem>> parse_annotation_request(
    const std::string& body, std::vector<Violation>& problems) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error&) {
        problems.push_back({"$", "body is not valid JSON"});
        return std::nullopt;
    }
    if (!j.is_object()) {
        problems.push_back({"$", "body must be an object"});
        return std::nullopt;
    }
    auto need = [&](const nlohmann::json& obj, const std::string& prefix, const char* key,
                    nlohmann::json::value_t type) -> const nlohmann::json* {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) {
            problems.push_back({prefix + key, std::string("missing field ") + key});
            return nullptr;
        }
        const bool ok = type == nlohmann::json::value_t::number_integer
                            ? it->is_number_integer()
                            : it->type() == type;
        if (!ok) {
            problems.push_back({prefix + key, std::string("wrong type for ") + key});
            return nullptr;
        }
        return &*it;
    };
    using vt = nlohmann::json::value_t;
    const auto* pair_id = need(j, "", "pair_id", vt::string);
    const auto* qaj = need(j, "", "qa", vt::object);
    if (qaj == nullptr) return std::nullopt;

    QAItem qa;
    if (const auto* v = need(*qaj, "qa.", "id", vt::string)) qa.id = v->get<std::string>();
    if (const auto* v = need(*qaj, "qa.", "question", vt::string)) qa.question = v->get<std::string>();
    if (const auto* v = need(*qaj, "qa.", "annotator_id", vt::string)) {
        qa.annotator_id = v->get<std::string>();
    }
    if (const auto* v = need(*qaj, "qa.", "inference_type", vt::string)) {
        if (!parse_inference_type(v->get<std::string>(), qa.inference_type)) {
            problems.push_back({"qa.inference_type", "unknown inference_type " + v->get<std::string>()});
        }
    }
    if (const auto* answers = need(*qaj, "qa.", "answers", vt::array)) {
        for (std::size_t i = 0; i < answers->size(); ++i) {
            const auto& aj = (*answers)[i];
            const std::string prefix = "qa.answers[" + std::to_string(i) + "].";
            if (!aj.is_object()) {
                problems.push_back({prefix, "answer must be an object"});
                continue;
            }
            Answer a;
            if (const auto* v = need(aj, prefix, "text", vt::string)) a.text = v->get<std::string>();
            if (const auto* v = need(aj, prefix, "passage_index", vt::number_integer)) {
                a.passage_index = v->get<int>();
            }
            if (const auto* v = need(aj, prefix, "char_start", vt::number_integer)) {
                if (v->get<long long>() < 0) problems.push_back({prefix + "char_start", "must be >= 0"});
                else a.char_start = v->get<std::size_t>();
            }
            qa.answers.push_back(std::move(a));
        }
    }
    if (!problems.empty() || pair_id == nullptr) return std::nullopt;
    return std::make_pair(pair_id->get<std::string>(), std::move(qa));
}

class AnnotationService {
public:
    explicit AnnotationService(AnnotationStore& store, ServiceOptions opts = {})
        : store_(store), opts_(std::move(opts)) {}

    /// Least-annotated pair this annotator has not been given yet; ties go to
    /// dataset order. Each pair goes to each annotator at most once.
    HttpReply next_pair(const std::string& annotator) {
        if (annotator.empty()) return error(400, "annotator", "missing annotator parameter");
        const auto ds = store_.snapshot();
        std::lock_guard lock(sessions_mu_);
        auto& session = sessions_[annotator];
        session.annotator_id = annotator;
        const PassagePair* best = nullptr;
        for (const auto& p : ds->pairs) {
            const bool seen = session.completed.contains(p.id) ||
                              std::find(session.assigned.begin(), session.assigned.end(), p.id) !=
                                  session.assigned.end();
            if (seen) continue;
            if (best == nullptr || p.qas.size() < best->qas.size()) best = &p;
        }
        if (best == nullptr) return {204, "", "application/json"};
        session.assigned.push_back(best->id);
        nlohmann::json body = {{"pair", to_json(*best)},
                               {"guidelines", opts_.guidelines},
                               {"inference_types", taxonomy_json()}};
        return {200, body.dump(2) + "\n"};
    }

    HttpReply post_annotation(const std::string& body) {
        std::vector<Violation> problems;
        auto parsed = parse_annotation_request(body, problems);
        if (!parsed) return {422, violations_json(problems).dump(2) + "\n"};
        auto& [pair_id, qa] = *parsed;
        const AppendResult r = store_.append(pair_id, qa);
        switch (r.status) {
            case AppendStatus::unknown_pair:
                return {404, violations_json(r.violations).dump(2) + "\n"};
            case AppendStatus::duplicate_id:
            case AppendStatus::invalid:
                return {422, violations_json(r.violations).dump(2) + "\n"};
            case AppendStatus::accepted:
                break;
        }
        {
            std::lock_guard lock(sessions_mu_);
            auto& session = sessions_[qa.annotator_id];
            session.annotator_id = qa.annotator_id;
            std::erase(session.assigned, pair_id);
            session.completed.insert(pair_id);
        }
        return {201, to_json(*r.receipt).dump(2) + "\n"};
    }

    HttpReply export_dataset() const {
        return {200, to_json(*store_.snapshot()).dump(2) + "\n"};
    }

    HttpReply retrieval_report(const std::string& metric_name) const {
        Metric metric;
        if (!parse_metric(metric_name, metric)) {
            return error(400, "metric", "unknown metric " + metric_name);
        }
        const auto ds = store_.snapshot();
        if (ds->num_qas() == 0) return error(409, "store", "store holds no annotations");
        return {200, to_json(retrieval_rate(to_qaset(*ds), metric, opts_.bm25)).dump(2) + "\n"};
    }

    HttpReply eval_report(const std::string& predictions_body, const std::string& metric_name) const {
        Metric metric;
        if (!parse_metric(metric_name, metric)) {
            return error(400, "metric", "unknown metric " + metric_name);
        }
        const auto ds = store_.snapshot();
        if (ds->num_qas() == 0) return error(409, "store", "store holds no annotations");
        PredictionSet preds;
        try {
            preds = predictions_from_json(nlohmann::json::parse(predictions_body));
        } catch (const nlohmann::json::parse_error&) {
            return error(422, "$", "predictions body is not valid JSON");
        } catch (const ParseError& e) {
            return error(422, "$", e.what());
        }
        return {200,
                to_json(evaluate_with_categories(to_qaset(*ds), preds, metric, opts_.bm25)).dump(2) +
                    "\n"};
    }

    const SessionState* session(const std::string& annotator) const {
        std::lock_guard lock(sessions_mu_);
        auto it = sessions_.find(annotator);
        return it == sessions_.end() ? nullptr : &it->second;
    }

    void mount(httplib::Server& server) {
        auto send = [](httplib::Response& res, const HttpReply& r) {
            res.status = r.status;
            if (r.status != 204) res.set_content(r.body, r.content_type);
        };
        server.Get("/api/pairs/next", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, next_pair(req.get_param_value("annotator")));
        });
        server.Post("/api/annotations", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, post_annotation(req.body));
        });
        server.Get("/api/export", [this, send](const httplib::Request&, httplib::Response& res) {
            send(res, export_dataset());
        });
        server.Get("/api/reports/retrieval", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, retrieval_report(req.has_param("metric") ? req.get_param_value("metric") : "jaccard"));
        });
        auto eval = [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, eval_report(req.body.empty() ? "{}" : req.body,
                                  req.has_param("metric") ? req.get_param_value("metric") : "jaccard"));
        };
        server.Get("/api/reports/eval", eval);
        server.Post("/api/reports/eval", eval);
        if (opts_.ui_dir) server.set_mount_point("/", opts_.ui_dir->string());
        server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string what = "internal error";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                what = e.what();
            } catch (...) {
            }
            res.status = 500;
            res.set_content(violations_json({{"$", what}}).dump(2) + "\n", "application/json");
        });
    }

private:
    static HttpReply error(int status, std::string field, std::string message) {
        return {status, violations_json({{std::move(field), std::move(message)}}).dump(2) + "\n"};
    }

    AnnotationStore& store_;
    ServiceOptions opts_;
    mutable std::mutex sessions_mu_;
    std::map<std::string, SessionState> sessions_;
};

}  // namespace pqa
