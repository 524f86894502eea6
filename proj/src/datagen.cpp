// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/datagen.h"

#include "gkd/binary_io.h"
#include "gkd/errors.h"
#include "gkd/rng.h"

#include <cmath>

namespace gkd {

using nlohmann::json;

void validate(const SynthConfig& c) {
    if (c.classes < 2) throw ConfigError("synthetic data needs at least 2 classes");
    if (c.samples < c.classes) throw ConfigError("synthetic data needs at least one sample per class");
    if (c.dim < 2) throw ConfigError("synthetic dimension must be at least 2");
    if (c.triplets_per_class == 0) throw ConfigError("triplets per class must be positive");
    if (!(c.noise >= 0.0) || !(c.knowledge_noise >= 0.0)) throw ConfigError("noise scales must be non-negative");
    if (!(c.mask_prob >= 0.0 && c.mask_prob <= 1.0)) throw ConfigError("mask probability must lie in [0, 1]");
    for (double f : {c.train_fraction, c.val_fraction, c.test_fraction})
        if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("split fractions must lie in [0, 1]");
    if (std::abs(c.train_fraction + c.val_fraction + c.test_fraction - 1.0) > 1e-9) {
        throw ConfigError("split fractions must sum to 1");
    }
}

json to_json(const SynthConfig& c) {
    return {{"samples", c.samples},
            {"classes", c.classes},
            {"dim", c.dim},
            {"noise", c.noise},
            {"mask_prob", c.mask_prob},
            {"triplets_per_class", c.triplets_per_class},
            {"knowledge_noise", c.knowledge_noise},
            {"train_fraction", c.train_fraction},
            {"val_fraction", c.val_fraction},
            {"test_fraction", c.test_fraction},
            {"seed", c.seed}};
}

namespace {

constexpr std::uint64_t kPrototypeStream = 21;
constexpr std::uint64_t kLayoutStream = 22;
constexpr std::uint64_t kSampleStream = 23;
constexpr std::uint64_t kKnowledgeStream = 24;

Vector normalized(Vector v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
}

Vector gaussian(Rng& rng, std::size_t dim) {
    Vector v(dim);
    for (double& x : v) x = rng.normal();
    return v;
}

/// normalize(center + scale * g), g ~ N(0, I).
Vector perturbed(std::span<const double> center, double scale, Rng& rng) {
    Vector v(center.begin(), center.end());
    for (double& x : v) x += scale * rng.normal();
    return normalized(std::move(v));
}

}  // namespace

SynthDataset generate_synthetic(const SynthConfig& config) {
    validate(config);
    const std::size_t C = config.classes, d = config.dim, M = config.samples;
    SynthDataset out;
    out.config = config;

    Rng proto_rng(derive_seed(config.seed, kPrototypeStream));
    out.truth.prototypes = Tensor(C, d);
    for (std::size_t c = 0; c < C; ++c) {
        const Vector p = normalized(gaussian(proto_rng, d));
        std::copy(p.begin(), p.end(), out.truth.prototypes.row(c).begin());
    }

    for (std::size_t c = 0; c < C; ++c) out.dataset.labels.push_back("class" + std::to_string(c));
    out.dataset.declared_labels = true;

    // Knowledge triplets: class-major order, each near its class prototype.
    Rng knowledge_rng(derive_seed(config.seed, kKnowledgeStream));
    out.triplet_embeddings = EmbeddingStore(d);
    const double kscale = config.knowledge_noise / std::sqrt(static_cast<double>(d));
    for (std::size_t c = 0; c < C; ++c) {
        const std::string& label = out.dataset.labels[c];
        for (std::size_t j = 0; j < config.triplets_per_class; ++j) {
            out.triplets.push_back({label + " concept", "HasProperty", "trait " + std::to_string(j) + " of " + label});
            out.triplet_embeddings.add(triplet_id(out.triplets.size() - 1),
                                       to_f32_precision(perturbed(out.truth.prototypes.row(c), kscale, knowledge_rng)));
        }
    }

    // Split layout: positions shuffled, then balanced labels within each split.
    Rng layout_rng(derive_seed(config.seed, kLayoutStream));
    const auto n_train = static_cast<std::size_t>(std::llround(config.train_fraction * static_cast<double>(M)));
    const auto n_val = std::min(M - n_train, static_cast<std::size_t>(std::llround(config.val_fraction * static_cast<double>(M))));
    std::vector<Split> splits(M, Split::test);
    std::fill(splits.begin(), splits.begin() + static_cast<std::ptrdiff_t>(n_train), Split::train);
    std::fill(splits.begin() + static_cast<std::ptrdiff_t>(n_train),
              splits.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), Split::val);
    layout_rng.shuffle(splits);
    std::vector<std::size_t> labels(M);
    for (Split s : {Split::train, Split::val, Split::test}) {
        std::vector<std::size_t> positions;
        for (std::size_t i = 0; i < M; ++i)
            if (splits[i] == s) positions.push_back(i);
        std::vector<std::size_t> pool(positions.size());
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i % C;
        layout_rng.shuffle(pool);
        for (std::size_t i = 0; i < positions.size(); ++i) labels[positions[i]] = pool[i];
    }

    Rng sample_rng(derive_seed(config.seed, kSampleStream));
    out.content = EmbeddingStore(d);
    out.truth.masked.resize(M);
    const double nscale = config.noise;
    const Vector zero(d, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
        const std::size_t y = labels[i];
        const bool masked = sample_rng.uniform() < config.mask_prob;
        out.truth.masked[i] = masked;
        const auto proto = out.truth.prototypes.row(y);
        const std::string sid = "s" + std::to_string(i);

        Vector question = masked ? normalized(gaussian(sample_rng, d)) : perturbed(proto, nscale, sample_rng);
        Vector context = masked ? normalized(gaussian(sample_rng, d)) : perturbed(proto, nscale, sample_rng);
        Vector visual = perturbed(proto, nscale, sample_rng);

        ManifestRecord rec;
        rec.id = sid;
        rec.question = "what does sample " + std::to_string(i) + " show";
        rec.context = "context for sample " + std::to_string(i);
        rec.visual.embedding_id = content_embedding_id(sid, NodeKind::visual_context);
        rec.label = out.dataset.labels[y];
        rec.group = "g" + std::to_string(i % 3);
        rec.split = splits[i];
        out.content.add(content_embedding_id(sid, NodeKind::question), to_f32_precision(question));
        out.content.add(content_embedding_id(sid, NodeKind::language_context), to_f32_precision(context));
        out.content.add(*rec.visual.embedding_id, to_f32_precision(visual));
        out.dataset.records.push_back(std::move(rec));
    }
    return out;
}

void write_synthetic(const SynthDataset& data, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_manifest(data.dataset, dir / "manifest.jsonl");
    write_embedding_store(data.content, dir / "content.gemb");
    write_triplets_tsv(data.triplets, dir / "triplets.tsv");
    write_embedding_store(data.triplet_embeddings, dir / "triplets.gemb");

    json prototypes = json::array();
    for (std::size_t c = 0; c < data.truth.prototypes.rows(); ++c) {
        auto row = data.truth.prototypes.row(c);
        prototypes.push_back(std::vector<double>(row.begin(), row.end()));
    }
    std::vector<int> masked(data.truth.masked.begin(), data.truth.masked.end());
    write_file(dir / "truth.json", json{{"prototypes", prototypes}, {"masked", masked}}.dump() + "\n");
    write_file(dir / "config.json", to_json(data.config).dump(2) + "\n");
}

}  // namespace gkd
