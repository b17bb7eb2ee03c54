#pragma once

// Local-file ingestion of raw documents. A corpus is either a directory
// holding one UTF-8 .txt file per document (id = file stem) and/or .jsonl
// files, or a single .jsonl file. JSON-lines records are
// {"id", "source", "title", "text"}.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pqa/error.hpp"
#include "pqa/textproc.hpp"

namespace pqa {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline nlohmann::json to_json(const RawDocument& d) {
    return {{"id", d.id}, {"source", to_string(d.source)}, {"title", d.title}, {"text", d.text}};
}

inline RawDocument raw_document_from_json(const nlohmann::json& j, const std::string& where,
                                          SourceKind default_source) {
    if (!j.is_object()) throw ParseError(where + ": expected object");
    RawDocument d;
    d.source = default_source;
    try {
        d.id = j.at("id").get<std::string>();
        d.text = j.at("text").get<std::string>();
        if (j.contains("title") && !j["title"].is_null()) d.title = j["title"].get<std::string>();
        if (j.contains("source")) {
            const auto s = j["source"].get<std::string>();
            if (!parse_source_kind(s, d.source)) {
                throw ParseError(where + ".source: unknown source kind \"" + s + "\"");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(where + ": " + e.what());
    }
    if (d.id.empty()) throw ParseError(where + ".id: empty id");
    if (d.text.empty()) throw ParseError(where + ".text: empty text");
    return d;
}

inline std::vector<RawDocument> read_jsonl_documents(const std::filesystem::path& path,
                                                     SourceKind default_source) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<RawDocument> docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(where + ": " + e.what());
        }
        docs.push_back(raw_document_from_json(j, where, default_source));
    }
    return docs;
}

/// Loads a corpus from a directory or a .jsonl file. Documents are returned
/// sorted by id; duplicate ids and empty texts are errors.
inline std::vector<RawDocument> load_corpus(const std::filesystem::path& path,
                                            SourceKind default_source) {
    namespace fs = std::filesystem;
    std::vector<RawDocument> docs;
    if (fs::is_regular_file(path)) {
        if (path.extension() == ".jsonl") {
            docs = read_jsonl_documents(path, default_source);
        } else {
            docs.push_back(RawDocument{path.stem().string(), default_source, "", read_file(path)});
        }
    } else if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            if (f.extension() == ".txt") {
                docs.push_back(RawDocument{f.stem().string(), default_source, "", read_file(f)});
            } else if (f.extension() == ".jsonl") {
                auto more = read_jsonl_documents(f, default_source);
                docs.insert(docs.end(), more.begin(), more.end());
            }
        }
    } else {
        throw IoError("no such file or directory: " + path.string());
    }

    std::set<std::string> ids;
    for (const auto& d : docs) {
        if (d.text.find_first_not_of(" \t\r\n") == std::string::npos) {
            throw InputError("document " + d.id + ": empty text");
        }
        if (!ids.insert(d.id).second) throw InputError("duplicate document id: " + d.id);
    }
    std::sort(docs.begin(), docs.end(),
              [](const RawDocument& a, const RawDocument& b) { return a.id < b.id; });
    return docs;
}

/// Entity manifest: JSON object mapping entity name -> path relative to the
/// manifest's directory.
inline std::map<std::string, std::filesystem::path> load_entity_manifest(
    const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ParseError(path.string() + ": expected object");
    std::map<std::string, std::filesystem::path> out;
    for (const auto& [entity, rel] : j.items()) {
        if (!rel.is_string()) throw ParseError(path.string() + "." + entity + ": expected string");
        out.emplace(entity, path.parent_path() / rel.get<std::string>());
    }
    return out;
}

}  // namespace pqa
