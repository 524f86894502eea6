// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gkd/datagen.h"
#include "gkd/graph.h"

namespace gkd::test {

inline SynthConfig small_synth(std::uint64_t seed = 0) {
    SynthConfig c;
    c.samples = 240;
    c.dim = 16;
    c.seed = seed;
    return c;
}

inline GraphSet synthetic_graphs(const SynthConfig& config) {
    const SynthDataset data = generate_synthetic(config);
    const TripletStore store(data.triplets, data.triplet_embeddings);
    return build_graphs(data.dataset, data.content, store, GraphConfig{});
}

}  // namespace gkd::test
