// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small seeded models and subgraphs for gradient checking.

#pragma once

#include "gkd/graph.h"

#include <cstdint>
#include <string>
#include <vector>

namespace gkd {

/// Random subgraph with 4 content nodes followed by `commonsense` knowledge
/// nodes; unit embeddings, symmetric hollow adjacency with weights in [0, 1].
Subgraph fixture_subgraph(std::uint64_t seed, std::size_t commonsense = 2, std::size_t dim = 5,
                          std::size_t classes = 3);

struct GradcheckResult {
    std::string name;
    double max_rel_error = 0.0;
};

/// Full teacher loss on a 6-node subgraph, then the combined distillation
/// loss for the mlp and transformer students.
std::vector<GradcheckResult> model_gradchecks(std::uint64_t seed, double eps = 1e-5);

}  // namespace gkd
