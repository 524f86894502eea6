// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Per-sample heterogeneous subgraphs: four content nodes, retrieved
// commonsense nodes, weighted edges, and the GCN-normalised adjacency.

#pragma once

#include "gkd/dataset.h"
#include "gkd/embedding.h"
#include "gkd/tensor.h"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gkd {

struct Node {
    NodeKind kind = NodeKind::question;
    std::string id;
    Vector embedding;
    std::size_t triplet = 0;  // triplet index, commonsense nodes only
    friend bool operator==(const Node&, const Node&) = default;
};

struct Subgraph {
    std::string sample_id;
    Split split = Split::train;
    std::size_t label = 0;
    std::string group;
    /// Content nodes in kContentKinds order, then commonsense nodes by ascending triplet index.
    std::vector<Node> nodes;
    /// Symmetric, hollow, entries in [0, 1].
    Tensor adjacency;

    std::size_t dim() const { return nodes.empty() ? 0 : nodes.front().embedding.size(); }
    /// All node embeddings stacked, N x dim.
    Tensor features() const;
    /// The four content-node embeddings, 4 x dim.
    Tensor content_features() const;

    friend bool operator==(const Subgraph&, const Subgraph&) = default;
};

/// Question, language-context, visual-context and V-L nodes for one record.
/// Visual embeddings come from the record's reference when present; the V-L
/// node uses "<sample>/vl" from the store if supplied, else the normalised mean
/// of the visual and language vectors (e1 if that mean is zero).
std::array<Node, 4> build_content_nodes(const ManifestRecord& record, const EmbeddingStore& content);

struct RetrievalLink {
    std::size_t content_slot;  // 0..3, index into kContentKinds
    std::size_t triplet;
    double similarity;
    friend bool operator==(const RetrievalLink&, const RetrievalLink&) = default;
};

struct CommonsenseAttachment {
    std::vector<Node> nodes;         // deduplicated, ascending triplet index
    std::vector<RetrievalLink> log;  // every (content node, retrieved triplet) pair
};

CommonsenseAttachment attach_commonsense(std::span<const Node> content, const TripletStore& store, std::size_t k = 3);

/// Triplet retrieval and co-retrieval counts over a set of samples (the
/// training split), used to estimate PMI between commonsense nodes.
class CooccurrenceStats {
public:
    explicit CooccurrenceStats(std::size_t triplet_count = 0) : counts_(triplet_count, 0) {}

    /// Registers one sample's distinct retrieved triplets.
    void add_sample(std::span<const std::size_t> triplets);

    std::uint64_t samples() const noexcept { return samples_; }
    std::size_t triplet_count() const noexcept { return counts_.size(); }
    /// Throws MissingError for an index outside the triplet universe.
    std::uint64_t count(std::size_t triplet) const;
    std::uint64_t pair_count(std::size_t a, std::size_t b) const;

private:
    std::uint64_t samples_ = 0;
    std::vector<std::uint64_t> counts_;
    std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> pairs_;
};

/// Normalised PMI, ln(c12 M / (c1 c2)) / -ln(c12 / M), in (0, 1]; nullopt
/// when the pair never co-occurs or PMI <= 0.
std::optional<double> pmi_weight(const CooccurrenceStats& stats, std::size_t a, std::size_t b);

enum class EdgeMode { cosine, pmi, hybrid };

std::string to_string(EdgeMode mode);
EdgeMode parse_edge_mode(std::string_view text);

struct EdgeConfig {
    EdgeMode mode = EdgeMode::hybrid;
    double tau = 0.0;
};

/// Weighted adjacency for one subgraph. Content-content pairs use cosine
/// similarity above tau (cosine and hybrid modes); content-commonsense pairs
/// use the retrieval similarity clamped to [0, 1]; commonsense-commonsense
/// pairs use pmi_weight (pmi and hybrid modes).
Tensor build_edges(std::span<const Node> nodes, std::span<const RetrievalLink> log, const CooccurrenceStats& stats,
                   const EdgeConfig& config);

/// D^-1/2 (A + I) D^-1/2. Throws InvariantError for non-square, asymmetric,
/// negative or non-hollow input.
Tensor normalize_adjacency(const Tensor& adjacency);

struct GraphConfig {
    std::size_t k = 3;
    EdgeConfig edges;
    std::size_t threads = 1;
};

struct GraphSet {
    std::vector<std::string> labels;
    std::size_t dim = 0;
    nlohmann::json config;
    std::vector<Subgraph> graphs;
};

/// Two passes: retrieval for every sample (PMI statistics gathered over the
/// training split only), then edge construction.
GraphSet build_graphs(const Dataset& dataset, const EmbeddingStore& content, const TripletStore& triplets,
                      const GraphConfig& config);

std::vector<Subgraph> filter_split(std::span<const Subgraph> graphs, Split split);

// Graph dump: JSON lines. A header object (format, version, dim, labels,
// config) followed by one object per sample with id, split, label, group,
// nodes [{kind, id, x}] and the row-major adjacency.
std::string encode_graphs(const GraphSet& set);
GraphSet decode_graphs(std::string_view text);
void write_graphs(const GraphSet& set, const std::filesystem::path& path);
GraphSet read_graphs(const std::filesystem::path& path);

}  // namespace gkd
