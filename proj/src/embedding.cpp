// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/embedding.h"

#include "gkd/binary_io.h"
#include "gkd/errors.h"
#include "gkd/rng.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace gkd {

namespace {

constexpr std::string_view kEmbeddingMagic = "GEMB";
constexpr std::uint32_t kEmbeddingVersion = 1;

}  // namespace

void EmbeddingStore::add(std::string id, Vector vector) {
    if (vector.size() != dim_) {
        throw InputError("embedding '" + id + "' has dimension " + std::to_string(vector.size()) + ", store expects " +
                         std::to_string(dim_));
    }
    for (double v : vector)
        if (!std::isfinite(v)) throw InputError("embedding '" + id + "' has a non-finite component");
    if (index_.contains(id)) throw InputError("duplicate embedding id '" + id + "'");
    index_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    data_.insert(data_.end(), vector.begin(), vector.end());
}

std::optional<std::size_t> EmbeddingStore::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const double> EmbeddingStore::at(std::string_view id) const {
    auto i = find(id);
    if (!i) throw MissingError("missing embedding '" + std::string(id) + "'");
    return vector(*i);
}

std::string encode_embedding_store(const EmbeddingStore& store) {
    ByteWriter w;
    w.bytes(kEmbeddingMagic);
    w.u32(kEmbeddingVersion);
    w.u32(static_cast<std::uint32_t>(store.dim()));
    w.u64(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        const std::string& id = store.id(i);
        if (id.size() > std::numeric_limits<std::uint16_t>::max()) throw InputError("embedding id too long: " + id);
        w.u16(static_cast<std::uint16_t>(id.size()));
        w.bytes(id);
        for (double v : store.vector(i)) w.f32(static_cast<float>(v));
    }
    return w.take();
}

EmbeddingStore decode_embedding_store(std::string_view bytes) {
    ByteReader r(bytes, "embedding store");
    r.expect_magic(kEmbeddingMagic);
    const std::size_t version_at = r.offset();
    if (const auto version = r.u32(); version != kEmbeddingVersion) {
        r.fail_at("unsupported version " + std::to_string(version), version_at);
    }
    const std::uint32_t dim = r.u32();
    const std::uint64_t count = r.u64();
    EmbeddingStore store(dim);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::size_t record_at = r.offset();
        const std::uint16_t len = r.u16();
        std::string id(r.bytes(len));
        Vector v(dim);
        for (auto& x : v) x = r.f32();
        try {
            store.add(std::move(id), std::move(v));
        } catch (const InputError& e) {
            r.fail_at(e.what(), record_at);
        }
    }
    if (!r.at_end()) r.fail("trailing bytes after " + std::to_string(count) + " records");
    return store;
}

void write_embedding_store(const EmbeddingStore& store, const std::filesystem::path& path) {
    write_file(path, encode_embedding_store(store));
}

EmbeddingStore read_embedding_store(const std::filesystem::path& path) {
    return decode_embedding_store(read_file(path));
}

Vector to_f32_precision(std::span<const double> v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(static_cast<float>(v[i]));
    return out;
}

std::string triplet_id(std::size_t index) { return "t" + std::to_string(index); }

TripletStore::TripletStore(std::vector<Triplet> triplets, EmbeddingStore embeddings)
    : triplets_(std::move(triplets)), embeddings_(std::move(embeddings)) {
    if (triplets_.size() != embeddings_.size()) {
        throw InputError("triplet store has " + std::to_string(triplets_.size()) + " triplets but " +
                         std::to_string(embeddings_.size()) + " embeddings");
    }
    for (std::size_t i = 0; i < triplets_.size(); ++i) {
        if (embeddings_.id(i) != triplet_id(i)) {
            throw InputError("triplet embedding " + std::to_string(i) + " has id '" + embeddings_.id(i) +
                             "', expected '" + triplet_id(i) + "'");
        }
    }
}

std::vector<Triplet> parse_triplets_tsv(std::string_view text) {
    std::vector<Triplet> out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) throw ParseError("empty triplet line", line_no);
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t tab = line.find('\t', start);
            fields.emplace_back(line.substr(start, tab - start));
            if (tab == std::string_view::npos) break;
            start = tab + 1;
        }
        if (fields.size() != 3) {
            throw ParseError("expected 3 tab-separated fields, found " + std::to_string(fields.size()), line_no);
        }
        out.push_back({fields[0], fields[1], fields[2]});
    }
    return out;
}

std::vector<Triplet> read_triplets_tsv(const std::filesystem::path& path) { return parse_triplets_tsv(read_file(path)); }

void write_triplets_tsv(std::span<const Triplet> triplets, const std::filesystem::path& path) {
    std::string out;
    for (const Triplet& t : triplets) {
        for (const std::string* f : {&t.head, &t.relation, &t.tail})
            if (f->find_first_of("\t\n") != std::string::npos) throw InputError("triplet field contains a tab or newline");
        out += t.head + '\t' + t.relation + '\t' + t.tail + '\n';
    }
    write_file(path, out);
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

Vector toy_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
    if (dim < 2) throw ConfigError("toy_embed dimension must be at least 2");
    Vector acc(dim, 0.0);
    for (const std::string& token : tokenize(text)) {
        Rng row(hash_text(token, seed));
        for (double& a : acc) a += row.normal();
    }
    double norm = 0.0;
    for (double a : acc) norm += a * a;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
        Vector e1(dim, 0.0);
        e1[0] = 1.0;
        return e1;
    }
    for (double& a : acc) a /= norm;
    return acc;
}

double cosine_sim(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw ShapeError("cosine_sim dimension mismatch: " + std::to_string(u.size()) + " vs " + std::to_string(v.size()));
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw InvariantError("cosine_sim of a zero-norm vector");
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::vector<RetrievalHit> top_k_triplets(std::span<const double> query, const TripletStore& store, std::size_t k) {
    if (store.size() == 0) throw InputError("retrieval from an empty triplet store");
    if (k == 0) throw ConfigError("retrieval k must be at least 1");
    if (query.size() != store.dim()) {
        throw ShapeError("query dimension " + std::to_string(query.size()) + " does not match store dimension " +
                         std::to_string(store.dim()));
    }
    std::vector<RetrievalHit> hits;
    hits.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) hits.push_back({i, cosine_sim(query, store.embedding(i))});
    const std::size_t take = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(take), hits.end(),
                      [](const RetrievalHit& a, const RetrievalHit& b) {
                          if (a.similarity != b.similarity) return a.similarity > b.similarity;
                          return a.index < b.index;
                      });
    hits.resize(take);
    return hits;
}

}  // namespace gkd
