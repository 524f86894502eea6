// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Id-keyed embedding tables, the deterministic stand-in text embedder, cosine
// similarity, and exact top-k triplet retrieval.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gkd {

using Vector = std::vector<double>;

class EmbeddingStore {
public:
    explicit EmbeddingStore(std::size_t dim = 0) : dim_(dim) {}

    /// Throws InputError on duplicate ids, wrong dimension or non-finite entries.
    void add(std::string id, Vector vector);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }

    const std::string& id(std::size_t i) const { return ids_.at(i); }
    std::span<const double> vector(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

    std::optional<std::size_t> find(std::string_view id) const;
    bool contains(std::string_view id) const { return find(id).has_value(); }
    /// Throws MissingError naming the id when absent.
    std::span<const double> at(std::string_view id) const;

    friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
        return a.dim_ == b.dim_ && a.ids_ == b.ids_ && a.data_ == b.data_;
    }

private:
    std::size_t dim_;
    std::vector<std::string> ids_;
    std::vector<double> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

// .gemb container: "GEMB", u32 version = 1, u32 dim, u64 count, then per entry
// u16 id length, id bytes, dim x f32. All little-endian.
std::string encode_embedding_store(const EmbeddingStore& store);
EmbeddingStore decode_embedding_store(std::string_view bytes);
void write_embedding_store(const EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore read_embedding_store(const std::filesystem::path& path);

/// Rounds every component through f32, matching what a .gemb file can hold.
Vector to_f32_precision(std::span<const double> v);

struct Triplet {
    std::string head;
    std::string relation;
    std::string tail;

    /// "head relation tail", single-space separated; this is what gets embedded.
    std::string surface() const { return head + " " + relation + " " + tail; }
    friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Embedding id of the i-th triplet: "t{i}".
std::string triplet_id(std::size_t index);

/// Triplets aligned by index with their embeddings (ids "t0", "t1", ...).
class TripletStore {
public:
    TripletStore(std::vector<Triplet> triplets, EmbeddingStore embeddings);

    std::size_t size() const noexcept { return triplets_.size(); }
    std::size_t dim() const noexcept { return embeddings_.dim(); }
    const Triplet& triplet(std::size_t i) const { return triplets_.at(i); }
    std::span<const double> embedding(std::size_t i) const { return embeddings_.vector(i); }
    const EmbeddingStore& embeddings() const noexcept { return embeddings_; }

private:
    std::vector<Triplet> triplets_;
    EmbeddingStore embeddings_;
};

/// TSV: one triplet per line, exactly three tab-separated fields.
std::vector<Triplet> read_triplets_tsv(const std::filesystem::path& path);
std::vector<Triplet> parse_triplets_tsv(std::string_view text);
void write_triplets_tsv(std::span<const Triplet> triplets, const std::filesystem::path& path);

/// Lowercase, split on non-alphanumeric bytes.
std::vector<std::string> tokenize(std::string_view text);

/// Deterministic stand-in embedder: each token seeds a Gaussian projection
/// row; the result is the L2-normalised sum of token rows. Text with no tokens
/// (or rows that cancel exactly) maps to the first basis vector e1.
Vector toy_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

/// Cosine similarity clamped to [-1, 1]. Throws ShapeError on a dimension
/// mismatch and InvariantError on a zero-norm input.
double cosine_sim(std::span<const double> u, std::span<const double> v);

struct RetrievalHit {
    std::size_t index;  // triplet index; its embedding id is triplet_id(index)
    double similarity;
    friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

/// Exact top-k by cosine similarity, descending; ties by ascending index.
/// Returns every triplet when the store holds fewer than k.
std::vector<RetrievalHit> top_k_triplets(std::span<const double> query, const TripletStore& store, std::size_t k = 3);

}  // namespace gkd
