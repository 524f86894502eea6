// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/dataset.h"

#include "gkd/binary_io.h"
#include "gkd/errors.h"

#include "json.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace gkd {

using nlohmann::json;

std::string to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

Split parse_split(std::string_view text) {
    if (text == "train") return Split::train;
    if (text == "val") return Split::val;
    if (text == "test") return Split::test;
    throw VocabularyError("unknown split '" + std::string(text) + "' (expected train, val or test)");
}

std::string to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::question: return "question";
        case NodeKind::language_context: return "language-context";
        case NodeKind::visual_context: return "visual-context";
        case NodeKind::vision_language: return "vl";
        case NodeKind::commonsense: return "commonsense";
    }
    return "?";
}

NodeKind parse_node_kind(std::string_view text) {
    for (NodeKind k : {NodeKind::question, NodeKind::language_context, NodeKind::visual_context,
                       NodeKind::vision_language, NodeKind::commonsense})
        if (to_string(k) == text) return k;
    throw VocabularyError("unknown node kind '" + std::string(text) + "'");
}

std::string content_embedding_id(std::string_view sample_id, NodeKind kind) {
    std::string id(sample_id);
    switch (kind) {
        case NodeKind::question: return id + "/question";
        case NodeKind::language_context: return id + "/context";
        case NodeKind::visual_context: return id + "/visual";
        case NodeKind::vision_language: return id + "/vl";
        case NodeKind::commonsense: break;
    }
    throw ConfigError("commonsense nodes have no content embedding id");
}

std::size_t Dataset::label_index(std::string_view label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw VocabularyError("unknown label '" + std::string(label) + "'");
    return static_cast<std::size_t>(it - labels.begin());
}

std::array<std::size_t, 3> Dataset::split_counts() const {
    std::array<std::size_t, 3> counts{};
    for (const auto& r : records) ++counts[static_cast<std::size_t>(r.split)];
    return counts;
}

std::vector<std::string> Dataset::groups() const {
    std::set<std::string> g;
    for (const auto& r : records) g.insert(r.group);
    return {g.begin(), g.end()};
}

namespace {

std::string required_string(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'", line);
    if (!it->is_string()) throw ParseError(std::string("field '") + key + "' must be a string", line);
    return it->get<std::string>();
}

std::string optional_string(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) return {};
    if (!it->is_string()) throw ParseError(std::string("field '") + key + "' must be a string", line);
    return it->get<std::string>();
}

ManifestRecord parse_record(const json& obj, std::size_t line) {
    ManifestRecord r;
    r.id = required_string(obj, "id", line);
    if (r.id.empty()) throw ParseError("empty sample id", line);
    r.question = required_string(obj, "question", line);
    r.context = optional_string(obj, "context", line);
    if (auto it = obj.find("visual"); it != obj.end()) {
        if (!it->is_object()) throw ParseError("field 'visual' must be an object", line);
        const bool has_text = it->contains("text"), has_ref = it->contains("embedding");
        if (has_text == has_ref) throw ParseError("field 'visual' needs exactly one of 'text' or 'embedding'", line);
        if (has_ref) {
            r.visual.embedding_id = required_string(*it, "embedding", line);
        } else {
            r.visual.text = required_string(*it, "text", line);
        }
    }
    r.label = required_string(obj, "label", line);
    r.group = optional_string(obj, "group", line);
    const std::string split = required_string(obj, "split", line);
    try {
        r.split = parse_split(split);
    } catch (const VocabularyError& e) {
        throw VocabularyError("line " + std::to_string(line) + ": " + e.what());
    }
    return r;
}

}  // namespace

Dataset parse_manifest(std::string_view text) {
    Dataset ds;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 0;
    bool first = true;
    while (!text.empty()) {
        ++line_no;
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
        }
        if (!obj.is_object()) throw ParseError("record must be a JSON object", line_no);

        if (obj.contains("labels") && !obj.contains("id")) {
            if (!first) throw ParseError("label header must be the first record", line_no);
            if (!obj["labels"].is_array() || obj["labels"].empty())
                throw ParseError("'labels' must be a non-empty array of strings", line_no);
            for (const auto& l : obj["labels"]) {
                if (!l.is_string()) throw ParseError("'labels' must be a non-empty array of strings", line_no);
                ds.labels.push_back(l.get<std::string>());
            }
            if (std::set<std::string>(ds.labels.begin(), ds.labels.end()).size() != ds.labels.size())
                throw ParseError("duplicate entries in 'labels'", line_no);
            ds.declared_labels = true;
            first = false;
            continue;
        }
        first = false;

        ManifestRecord r = parse_record(obj, line_no);
        if (!seen.insert(r.id).second) {
            throw InputError("line " + std::to_string(line_no) + ": duplicate sample id '" + r.id + "'");
        }
        if (ds.declared_labels && std::find(ds.labels.begin(), ds.labels.end(), r.label) == ds.labels.end()) {
            throw VocabularyError("line " + std::to_string(line_no) + ": unknown label '" + r.label + "'");
        }
        ds.records.push_back(std::move(r));
    }
    if (!ds.declared_labels) {
        std::set<std::string> labels;
        for (const auto& r : ds.records) labels.insert(r.label);
        ds.labels.assign(labels.begin(), labels.end());
    }
    return ds;
}

Dataset read_manifest(const std::filesystem::path& path) { return parse_manifest(read_file(path)); }

std::string encode_manifest(const Dataset& dataset) {
    std::string out;
    if (dataset.declared_labels) out += json{{"labels", dataset.labels}}.dump() + "\n";
    for (const auto& r : dataset.records) {
        json visual = r.visual.embedding_id ? json{{"embedding", *r.visual.embedding_id}} : json{{"text", r.visual.text}};
        json obj = {{"id", r.id},       {"question", r.question}, {"context", r.context}, {"visual", visual},
                    {"label", r.label}, {"group", r.group},       {"split", to_string(r.split)}};
        out += obj.dump() + "\n";
    }
    return out;
}

void write_manifest(const Dataset& dataset, const std::filesystem::path& path) {
    write_file(path, encode_manifest(dataset));
}

void validate_references(const Dataset& dataset, const EmbeddingStore& store) {
    for (const auto& r : dataset.records) {
        if (r.visual.embedding_id && !store.contains(*r.visual.embedding_id)) {
            throw MissingError("sample '" + r.id + "' references missing embedding '" + *r.visual.embedding_id + "'");
        }
    }
}

Dataset ingest_manifest(const std::filesystem::path& path, const EmbeddingStore* store) {
    Dataset ds = read_manifest(path);
    if (store) validate_references(ds, *store);
    return ds;
}

EmbeddingStore embed_manifest(const Dataset& dataset, std::size_t dim, std::uint64_t seed) {
    EmbeddingStore store(dim);
    for (const auto& r : dataset.records) {
        store.add(content_embedding_id(r.id, NodeKind::question), toy_embed(r.question, dim, seed));
        store.add(content_embedding_id(r.id, NodeKind::language_context), toy_embed(r.context, dim, seed));
        if (!r.visual.embedding_id) {
            store.add(content_embedding_id(r.id, NodeKind::visual_context), toy_embed(r.visual.text, dim, seed));
        }
    }
    return store;
}

}  // namespace gkd
