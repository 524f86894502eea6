// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic multimodal dataset with a planted class signal that is partly
// masked in the content embeddings but always present in the triplet store.

#pragma once

#include "gkd/dataset.h"
#include "gkd/embedding.h"
#include "gkd/tensor.h"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace gkd {

struct SynthConfig {
    std::size_t samples = 2000;
    std::size_t classes = 4;
    std::size_t dim = 64;
    double noise = 0.5;  // per-coordinate content noise
    double mask_prob = 0.5;
    std::size_t triplets_per_class = 8;
    double knowledge_noise = 0.1;  // expected norm of the triplet perturbation
    double train_fraction = 0.7;
    double val_fraction = 0.1;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
};

/// Throws ConfigError for fractions that do not sum to 1, C < 2, M < C, etc.
void validate(const SynthConfig& config);
nlohmann::json to_json(const SynthConfig& config);

struct GroundTruth {
    Tensor prototypes;         // classes x dim
    std::vector<bool> masked;  // per sample
};

struct SynthDataset {
    SynthConfig config;
    Dataset dataset;
    EmbeddingStore content;
    std::vector<Triplet> triplets;
    EmbeddingStore triplet_embeddings;
    GroundTruth truth;
};

SynthDataset generate_synthetic(const SynthConfig& config);

/// Writes manifest.jsonl, content.gemb, triplets.tsv, triplets.gemb,
/// truth.json and config.json into `dir`.
void write_synthetic(const SynthDataset& data, const std::filesystem::path& dir);

}  // namespace gkd
