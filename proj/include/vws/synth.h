// Copyright 2026-present the vwsearch project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vws/codebook.h"
#include "vws/eval.h"
#include "vws/feature_matrix.h"
#include "vws/index.h"
#include "vws/tensor_io.h"

namespace vws {

/// Tensor with values uniform in [-1, 1), fully determined by the seed.
FeatureTensor gen_random_tensor(std::uint64_t seed, std::uint32_t depth, std::uint32_t rows, std::uint32_t cols,
                                std::uint32_t width, std::uint32_t height, std::string image_id = "random");

struct ClusteredFeatures {
    FeatureMatrix features;
    FeatureMatrix centers;
    std::vector<std::uint32_t> labels;
};

/// `per_cluster` isotropic Gaussian points (stddev `spread`) around each of
/// `clusters` centers drawn uniformly from [-separation, separation]^dim.
ClusteredFeatures gen_clustered_features(std::uint64_t seed, std::uint32_t dim, std::uint32_t clusters,
                                         std::uint32_t per_cluster, double spread, double separation);

struct PlantedCorpusOptions {
    std::uint64_t seed = 1;
    std::uint32_t corpus_size = 100;
    double plant_fraction = 0.1;
    std::uint32_t map_rows = 16;
    std::uint32_t map_cols = 16;
    std::uint32_t pattern_rows = 4;
    std::uint32_t pattern_cols = 4;
    std::uint32_t vocabulary_size = 64;
    // Words [0, pattern_words) form the pattern vocabulary, the rest are
    // background words.
    std::uint32_t pattern_words = 16;
    std::uint32_t cell_pixels = 32;
    // Fraction of planted pattern cells replaced by background words.
    double contamination = 0.0;
};

struct PlantedInstance {
    std::string doc_id;
    MapRegion window;
};

struct PlantedCorpus {
    std::vector<AssignmentMap> maps;
    QuerySpec query;  // local search: box around the query's pattern
    GroundTruth truth;
    std::vector<PlantedInstance> planted;
};

/// Assignment maps with a query pattern planted in a known subset of
/// documents at positions on the half-pattern stride grid. Throws
/// ValidationError if the pattern does not fit or the fractions are out of
/// range.
PlantedCorpus gen_planted_corpus(const PlantedCorpusOptions& options);

/// One random Gaussian prototype feature per visual word (K x depth).
FeatureMatrix gen_word_prototypes(std::uint64_t seed, std::uint32_t vocabulary_size, std::uint32_t depth);

/// Tensor whose feature at each cell is the prototype of the map's word plus
/// Gaussian noise of stddev `noise`.
FeatureTensor render_tensor(const AssignmentMap& map, const FeatureMatrix& prototypes, double noise,
                            std::uint64_t seed);

}  // namespace vws
