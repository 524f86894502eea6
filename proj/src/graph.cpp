// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/graph.h"

#include "gkd/binary_io.h"
#include "gkd/errors.h"
#include "gkd/parallel.h"

#include <algorithm>
#include <cmath>

namespace gkd {

using nlohmann::json;

Tensor Subgraph::features() const {
    const std::size_t d = dim();
    Tensor out(nodes.size(), d);
    for (std::size_t i = 0; i < nodes.size(); ++i) std::copy(nodes[i].embedding.begin(), nodes[i].embedding.end(), out.row(i).begin());
    return out;
}

Tensor Subgraph::content_features() const {
    if (nodes.size() < kContentKinds.size()) throw InvariantError("subgraph '" + sample_id + "' has fewer than 4 nodes");
    const std::size_t d = dim();
    Tensor out(kContentKinds.size(), d);
    for (std::size_t i = 0; i < kContentKinds.size(); ++i)
        std::copy(nodes[i].embedding.begin(), nodes[i].embedding.end(), out.row(i).begin());
    return out;
}

namespace {

Vector normalized_or_e1(Vector v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        if (!v.empty()) v[0] = 1.0;
        return v;
    }
    for (double& x : v) x /= norm;
    return v;
}

Vector copy_vector(std::span<const double> v) { return {v.begin(), v.end()}; }

}  // namespace

std::array<Node, 4> build_content_nodes(const ManifestRecord& record, const EmbeddingStore& content) {
    const std::string visual_id = record.visual.embedding_id.value_or(content_embedding_id(record.id, NodeKind::visual_context));
    const std::string question_id = content_embedding_id(record.id, NodeKind::question);
    const std::string context_id = content_embedding_id(record.id, NodeKind::language_context);
    const std::string vl_id = content_embedding_id(record.id, NodeKind::vision_language);

    Vector visual = copy_vector(content.at(visual_id));
    Vector language = copy_vector(content.at(context_id));
    Vector vl;
    if (auto supplied = content.find(vl_id)) {
        vl = copy_vector(content.vector(*supplied));
    } else {
        vl.resize(visual.size());
        for (std::size_t i = 0; i < vl.size(); ++i) vl[i] = 0.5 * (visual[i] + language[i]);
        vl = normalized_or_e1(std::move(vl));
    }
    return {Node{NodeKind::question, question_id, copy_vector(content.at(question_id)), 0},
            Node{NodeKind::language_context, context_id, std::move(language), 0},
            Node{NodeKind::visual_context, visual_id, std::move(visual), 0},
            Node{NodeKind::vision_language, vl_id, std::move(vl), 0}};
}

CommonsenseAttachment attach_commonsense(std::span<const Node> content, const TripletStore& store, std::size_t k) {
    CommonsenseAttachment out;
    std::vector<std::size_t> distinct;
    for (std::size_t slot = 0; slot < content.size(); ++slot) {
        for (const RetrievalHit& hit : top_k_triplets(content[slot].embedding, store, k)) {
            out.log.push_back({slot, hit.index, hit.similarity});
            distinct.push_back(hit.index);
        }
    }
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (std::size_t t : distinct) {
        out.nodes.push_back(Node{NodeKind::commonsense, triplet_id(t), copy_vector(store.embedding(t)), t});
    }
    return out;
}

void CooccurrenceStats::add_sample(std::span<const std::size_t> triplets) {
    std::vector<std::size_t> distinct(triplets.begin(), triplets.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (std::size_t t : distinct) {
        if (t >= counts_.size()) throw MissingError("triplet " + triplet_id(t) + " outside the statistics universe");
    }
    ++samples_;
    for (std::size_t i = 0; i < distinct.size(); ++i) {
        ++counts_[distinct[i]];
        for (std::size_t j = i + 1; j < distinct.size(); ++j) ++pairs_[{distinct[i], distinct[j]}];
    }
}

std::uint64_t CooccurrenceStats::count(std::size_t triplet) const {
    if (triplet >= counts_.size()) throw MissingError("no co-occurrence statistics for triplet " + triplet_id(triplet));
    return counts_[triplet];
}

std::uint64_t CooccurrenceStats::pair_count(std::size_t a, std::size_t b) const {
    count(a);
    count(b);
    if (a == b) return counts_[a];
    auto it = pairs_.find({std::min(a, b), std::max(a, b)});
    return it == pairs_.end() ? 0 : it->second;
}

std::optional<double> pmi_weight(const CooccurrenceStats& stats, std::size_t a, std::size_t b) {
    const auto joint = static_cast<double>(stats.pair_count(a, b));
    if (joint == 0.0) return std::nullopt;
    const auto m = static_cast<double>(stats.samples());
    const auto ca = static_cast<double>(stats.count(a));
    const auto cb = static_cast<double>(stats.count(b));
    const double pmi = std::log(joint * m / (ca * cb));
    if (!(pmi > 0.0)) return std::nullopt;
    return std::min(1.0, pmi / -std::log(joint / m));
}

std::string to_string(EdgeMode mode) {
    switch (mode) {
        case EdgeMode::cosine: return "cosine";
        case EdgeMode::pmi: return "pmi";
        case EdgeMode::hybrid: return "hybrid";
    }
    return "?";
}

EdgeMode parse_edge_mode(std::string_view text) {
    if (text == "cosine") return EdgeMode::cosine;
    if (text == "pmi") return EdgeMode::pmi;
    if (text == "hybrid") return EdgeMode::hybrid;
    throw ConfigError("unknown edge mode '" + std::string(text) + "' (expected cosine, pmi or hybrid)");
}

Tensor build_edges(std::span<const Node> nodes, std::span<const RetrievalLink> log, const CooccurrenceStats& stats,
                   const EdgeConfig& config) {
    if (!(config.tau >= -1.0 && config.tau < 1.0)) throw ConfigError("edge threshold tau must lie in [-1, 1)");
    const std::size_t n = nodes.size();
    const std::size_t n_content = std::min<std::size_t>(n, kContentKinds.size());
    Tensor adj(n, n);
    auto set = [&adj](std::size_t i, std::size_t j, double w) {
        adj(i, j) = w;
        adj(j, i) = w;
    };

    if (config.mode != EdgeMode::pmi) {
        for (std::size_t i = 0; i < n_content; ++i)
            for (std::size_t j = i + 1; j < n_content; ++j) {
                const double w = cosine_sim(nodes[i].embedding, nodes[j].embedding);
                if (w > config.tau) set(i, j, w);
            }
    }

    auto position_of = [&](std::size_t triplet) -> std::size_t {
        for (std::size_t p = n_content; p < n; ++p)
            if (nodes[p].triplet == triplet) return p;
        throw InvariantError("retrieval log references triplet " + triplet_id(triplet) + " absent from the subgraph");
    };
    for (const RetrievalLink& link : log) {
        if (link.content_slot >= n_content) throw InvariantError("retrieval log references a missing content node");
        const double w = std::clamp(link.similarity, 0.0, 1.0);
        if (w > 0.0) set(link.content_slot, position_of(link.triplet), w);
    }

    if (config.mode != EdgeMode::cosine) {
        for (std::size_t i = n_content; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (auto w = pmi_weight(stats, nodes[i].triplet, nodes[j].triplet)) set(i, j, *w);
    }
    return adj;
}

Tensor normalize_adjacency(const Tensor& a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw InvariantError("adjacency must be square, got " + a.shape_string());
    for (std::size_t i = 0; i < n; ++i) {
        if (a(i, i) != 0.0) throw InvariantError("adjacency must have a zero diagonal");
        for (std::size_t j = 0; j < n; ++j) {
            if (a(i, j) < 0.0) throw InvariantError("adjacency has a negative weight");
            if (a(i, j) != a(j, i)) throw InvariantError("adjacency is not symmetric");
        }
    }
    std::vector<double> inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) {
        double degree = 1.0;
        for (std::size_t j = 0; j < n; ++j) degree += a(i, j);
        inv_sqrt[i] = 1.0 / std::sqrt(degree);
    }
    Tensor out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        out(i, i) = inv_sqrt[i] * inv_sqrt[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            out(i, j) = inv_sqrt[i] * a(i, j) * inv_sqrt[j];
            out(j, i) = out(i, j);
        }
    }
    return out;
}

GraphSet build_graphs(const Dataset& dataset, const EmbeddingStore& content, const TripletStore& triplets,
                      const GraphConfig& config) {
    if (config.k == 0) throw ConfigError("k must be at least 1");
    if (content.dim() != triplets.dim()) {
        throw ConfigError("content embeddings have dimension " + std::to_string(content.dim()) +
                          " but triplet embeddings have " + std::to_string(triplets.dim()));
    }
    if (!(config.edges.tau >= -1.0 && config.edges.tau < 1.0)) throw ConfigError("edge threshold tau must lie in [-1, 1)");

    const std::size_t n = dataset.records.size();
    struct Pass1 {
        std::array<Node, 4> content;
        CommonsenseAttachment commonsense;
    };
    std::vector<std::optional<Pass1>> retrieved(n);
    parallel_for(n, config.threads, [&](std::size_t i) {
        auto nodes = build_content_nodes(dataset.records[i], content);
        auto cs = attach_commonsense(nodes, triplets, config.k);
        retrieved[i] = Pass1{std::move(nodes), std::move(cs)};
    });

    CooccurrenceStats stats(triplets.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (dataset.records[i].split != Split::train) continue;
        std::vector<std::size_t> ids;
        for (const Node& node : retrieved[i]->commonsense.nodes) ids.push_back(node.triplet);
        stats.add_sample(ids);
    }

    GraphSet set;
    set.labels = dataset.labels;
    set.dim = content.dim();
    set.config = {{"k", config.k},
                  {"edge_mode", to_string(config.edges.mode)},
                  {"tau", config.edges.tau},
                  {"train_samples_for_pmi", stats.samples()}};
    set.graphs.resize(n);
    parallel_for(n, config.threads, [&](std::size_t i) {
        const ManifestRecord& rec = dataset.records[i];
        Pass1& p = *retrieved[i];
        Subgraph g;
        g.sample_id = rec.id;
        g.split = rec.split;
        g.label = dataset.label_index(rec.label);
        g.group = rec.group;
        g.nodes.assign(std::make_move_iterator(p.content.begin()), std::make_move_iterator(p.content.end()));
        for (Node& node : p.commonsense.nodes) g.nodes.push_back(std::move(node));
        g.adjacency = build_edges(g.nodes, p.commonsense.log, stats, config.edges);
        set.graphs[i] = std::move(g);
    });
    return set;
}

std::vector<Subgraph> filter_split(std::span<const Subgraph> graphs, Split split) {
    std::vector<Subgraph> out;
    for (const Subgraph& g : graphs)
        if (g.split == split) out.push_back(g);
    return out;
}

namespace {

constexpr const char* kGraphFormat = "gkd-graphs";
constexpr int kGraphVersion = 1;

}  // namespace

std::string encode_graphs(const GraphSet& set) {
    std::string out;
    json header = {{"format", kGraphFormat}, {"version", kGraphVersion}, {"dim", set.dim},
                   {"labels", set.labels},   {"config", set.config},     {"count", set.graphs.size()}};
    out += header.dump() + "\n";
    for (const Subgraph& g : set.graphs) {
        json nodes = json::array();
        for (const Node& node : g.nodes) nodes.push_back({{"kind", to_string(node.kind)}, {"id", node.id}, {"x", node.embedding}});
        json rec = {{"id", g.sample_id},   {"split", to_string(g.split)}, {"label", g.label},
                    {"group", g.group},    {"nodes", nodes},
                    {"adjacency", std::vector<double>(g.adjacency.data().begin(), g.adjacency.data().end())}};
        out += rec.dump() + "\n";
    }
    return out;
}

GraphSet decode_graphs(std::string_view text) {
    GraphSet set;
    std::size_t line_no = 0;
    bool have_header = false;
    try {
        while (!text.empty()) {
            ++line_no;
            const std::size_t nl = text.find('\n');
            std::string_view line = text.substr(0, nl);
            text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
            if (line.empty()) continue;
            const json obj = json::parse(line);
            if (!have_header) {
                if (obj.value("format", "") != kGraphFormat) throw ParseError("not a graph dump (bad format tag)", line_no);
                if (obj.at("version").get<int>() != kGraphVersion) throw ParseError("unsupported graph dump version", line_no);
                set.dim = obj.at("dim").get<std::size_t>();
                set.labels = obj.at("labels").get<std::vector<std::string>>();
                set.config = obj.at("config");
                have_header = true;
                continue;
            }
            Subgraph g;
            g.sample_id = obj.at("id").get<std::string>();
            g.split = parse_split(obj.at("split").get<std::string>());
            g.label = obj.at("label").get<std::size_t>();
            if (g.label >= set.labels.size()) throw ParseError("label index out of range", line_no);
            g.group = obj.at("group").get<std::string>();
            for (const auto& nj : obj.at("nodes")) {
                Node node;
                node.kind = parse_node_kind(nj.at("kind").get<std::string>());
                node.id = nj.at("id").get<std::string>();
                node.embedding = nj.at("x").get<Vector>();
                if (node.embedding.size() != set.dim) throw ParseError("node embedding has the wrong dimension", line_no);
                if (node.kind == NodeKind::commonsense) {
                    if (node.id.size() < 2 || node.id[0] != 't') throw ParseError("bad commonsense node id '" + node.id + "'", line_no);
                    node.triplet = std::stoull(node.id.substr(1));
                }
                g.nodes.push_back(std::move(node));
            }
            if (g.nodes.size() < kContentKinds.size()) throw ParseError("subgraph has fewer than 4 nodes", line_no);
            for (std::size_t i = 0; i < kContentKinds.size(); ++i)
                if (g.nodes[i].kind != kContentKinds[i]) throw ParseError("content nodes out of order", line_no);
            const std::size_t nn = g.nodes.size();
            auto adj = obj.at("adjacency").get<std::vector<double>>();
            if (adj.size() != nn * nn) throw ParseError("adjacency size does not match node count", line_no);
            g.adjacency = Tensor(nn, nn, std::move(adj));
            set.graphs.push_back(std::move(g));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed graph record: ") + e.what(), line_no);
    }
    if (!have_header) throw ParseError("graph dump is empty", 1);
    return set;
}

void write_graphs(const GraphSet& set, const std::filesystem::path& path) { write_file(path, encode_graphs(set)); }

GraphSet read_graphs(const std::filesystem::path& path) { return decode_graphs(read_file(path)); }

}  // namespace gkd
