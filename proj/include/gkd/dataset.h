// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dataset manifests: one JSON object per line.
//
//   {"labels": ["a", "b", ...]}                       optional first line
//   {"id": "s1", "question": "...", "context": "...",
//    "visual": {"text": "..."} | {"embedding": "<id>"},
//    "label": "a", "group": "g0", "split": "train"}
//
// Without a header line the label vocabulary is the sorted set of labels seen.

#pragma once

#include "gkd/embedding.h"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gkd {

enum class Split { train, val, test };

std::string to_string(Split split);
/// Throws VocabularyError for anything other than train/val/test.
Split parse_split(std::string_view text);

enum class NodeKind { question, language_context, visual_context, vision_language, commonsense };

std::string to_string(NodeKind kind);
NodeKind parse_node_kind(std::string_view text);

/// The four content kinds in fixed node order.
inline constexpr std::array<NodeKind, 4> kContentKinds = {NodeKind::question, NodeKind::language_context,
                                                          NodeKind::visual_context, NodeKind::vision_language};

/// Conventional content-store id for a sample's node: "<sample>/question",
/// "<sample>/context", "<sample>/visual" or "<sample>/vl".
std::string content_embedding_id(std::string_view sample_id, NodeKind kind);

struct VisualContext {
    std::string text;
    std::optional<std::string> embedding_id;
    friend bool operator==(const VisualContext&, const VisualContext&) = default;
};

struct ManifestRecord {
    std::string id;
    std::string question;
    std::string context;
    VisualContext visual;
    std::string label;
    std::string group;
    Split split = Split::train;
    friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct Dataset {
    std::vector<std::string> labels;
    bool declared_labels = false;
    std::vector<ManifestRecord> records;

    /// Throws VocabularyError for an unknown label.
    std::size_t label_index(std::string_view label) const;
    /// Records per split, indexed by Split.
    std::array<std::size_t, 3> split_counts() const;
    std::vector<std::string> groups() const;
};

Dataset parse_manifest(std::string_view text);
Dataset read_manifest(const std::filesystem::path& path);
std::string encode_manifest(const Dataset& dataset);
void write_manifest(const Dataset& dataset, const std::filesystem::path& path);

/// Reads and validates a manifest. When `store` is given, every visual
/// embedding reference must resolve in it (MissingError otherwise).
Dataset ingest_manifest(const std::filesystem::path& path, const EmbeddingStore* store = nullptr);
void validate_references(const Dataset& dataset, const EmbeddingStore& store);

/// Embeds each record's question, context and (text) visual context with
/// toy_embed under the conventional content ids.
EmbeddingStore embed_manifest(const Dataset& dataset, std::size_t dim, std::uint64_t seed);

}  // namespace gkd
