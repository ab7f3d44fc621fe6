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

#include "vws/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "vws/errors.h"
#include "vws/random.h"

namespace vws {
namespace {

std::string doc_name(std::uint32_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "doc%04u", i);
    return buf;
}

// Positions 0, stride, 2*stride, ... that keep a pattern of `size` cells
// inside `extent`.
std::vector<std::uint32_t> grid_positions(std::uint32_t extent, std::uint32_t size) {
    const std::uint32_t stride = std::max(1u, size / 2);
    std::vector<std::uint32_t> out;
    for (std::uint32_t s = 0; s + size <= extent; s += stride) {
        out.push_back(s);
    }
    return out;
}

}  // namespace

FeatureTensor gen_random_tensor(std::uint64_t seed, std::uint32_t depth, std::uint32_t rows, std::uint32_t cols,
                                std::uint32_t width, std::uint32_t height, std::string image_id) {
    FeatureTensor t;
    t.image_id = std::move(image_id);
    t.depth = depth;
    t.rows = rows;
    t.cols = cols;
    t.width = width;
    t.height = height;
    validate_tensor({t.image_id, depth, rows, cols, width, height,
                     std::vector<float>(std::size_t{depth} * rows * cols)});
    Rng rng(seed);
    t.data.resize(std::size_t{depth} * rows * cols);
    for (auto& v : t.data) {
        v = static_cast<float>(rng.uniform(-1.0, 1.0));
    }
    return t;
}

ClusteredFeatures gen_clustered_features(std::uint64_t seed, std::uint32_t dim, std::uint32_t clusters,
                                         std::uint32_t per_cluster, double spread, double separation) {
    if (dim == 0 || clusters == 0 || per_cluster == 0) {
        throw ValidationError("gen_clustered_features: dimensions and counts must be >= 1");
    }
    Rng rng(seed);
    ClusteredFeatures out{FeatureMatrix(dim), FeatureMatrix(dim), {}};
    std::vector<float> v(dim);
    for (std::uint32_t c = 0; c < clusters; ++c) {
        for (auto& x : v) {
            x = static_cast<float>(rng.uniform(-separation, separation));
        }
        out.centers.append(v);
    }
    out.features.reserve_rows(std::size_t{clusters} * per_cluster);
    for (std::uint32_t c = 0; c < clusters; ++c) {
        const auto center = out.centers.row(c);
        for (std::uint32_t i = 0; i < per_cluster; ++i) {
            for (std::uint32_t d = 0; d < dim; ++d) {
                v[d] = static_cast<float>(center[d] + spread * rng.normal());
            }
            out.features.append(v);
            out.labels.push_back(c);
        }
    }
    return out;
}

PlantedCorpus gen_planted_corpus(const PlantedCorpusOptions& o) {
    if (o.pattern_rows == 0 || o.pattern_cols == 0 || o.pattern_rows > o.map_rows || o.pattern_cols > o.map_cols) {
        throw ValidationError("gen_planted_corpus: pattern does not fit in the map");
    }
    if (!(o.plant_fraction > 0.0 && o.plant_fraction < 1.0)) {
        throw ValidationError("gen_planted_corpus: plant_fraction must lie in (0, 1)");
    }
    if (!(o.contamination >= 0.0 && o.contamination <= 1.0)) {
        throw ValidationError("gen_planted_corpus: contamination must lie in [0, 1]");
    }
    if (o.pattern_words == 0 || o.pattern_words >= o.vocabulary_size) {
        throw ValidationError("gen_planted_corpus: need at least one pattern and one background word");
    }
    if (o.corpus_size == 0 || o.cell_pixels == 0) {
        throw ValidationError("gen_planted_corpus: corpus size and cell size must be >= 1");
    }

    Rng rng(o.seed);
    const std::uint32_t background = o.vocabulary_size - o.pattern_words;
    auto background_word = [&] { return o.pattern_words + static_cast<WordId>(rng.below(background)); };
    auto blank_map = [&](std::string id) {
        AssignmentMap m;
        m.image_id = std::move(id);
        m.rows = o.map_rows;
        m.cols = o.map_cols;
        m.width = o.map_cols * o.cell_pixels;
        m.height = o.map_rows * o.cell_pixels;
        m.vocabulary_size = o.vocabulary_size;
        m.words.resize(std::size_t{m.rows} * m.cols);
        for (auto& w : m.words) {
            w = background_word();
        }
        return m;
    };

    std::vector<WordId> pattern(std::size_t{o.pattern_rows} * o.pattern_cols);
    for (auto& w : pattern) {
        w = static_cast<WordId>(rng.below(o.pattern_words));
    }
    const auto row_pos = grid_positions(o.map_rows, o.pattern_rows);
    const auto col_pos = grid_positions(o.map_cols, o.pattern_cols);
    auto random_window = [&] {
        const std::uint32_t r = row_pos[rng.below(row_pos.size())];
        const std::uint32_t c = col_pos[rng.below(col_pos.size())];
        return MapRegion{r, r + o.pattern_rows, c, c + o.pattern_cols};
    };
    auto stamp = [&](AssignmentMap& m, const MapRegion& w) {
        for (std::uint32_t i = 0; i < o.pattern_rows; ++i) {
            for (std::uint32_t j = 0; j < o.pattern_cols; ++j) {
                m.at(w.row_start + i, w.col_start + j) = pattern[std::size_t{i} * o.pattern_cols + j];
            }
        }
    };

    PlantedCorpus corpus;
    corpus.query.query_id = "query";
    corpus.query.map = blank_map("query");
    const MapRegion qwin = random_window();
    stamp(corpus.query.map, qwin);
    corpus.query.box = map_region_to_pixel_box(corpus.query.map, qwin);
    corpus.truth.query_id = corpus.query.query_id;

    const auto n_planted = static_cast<std::uint32_t>(
        std::clamp<long>(std::lround(o.corpus_size * o.plant_fraction), 1, static_cast<long>(o.corpus_size)));
    std::vector<std::uint32_t> ids(o.corpus_size);
    std::iota(ids.begin(), ids.end(), 0u);
    rng.shuffle(ids.begin(), ids.end());
    std::vector<char> planted_flag(o.corpus_size, 0);
    for (std::uint32_t i = 0; i < n_planted; ++i) {
        planted_flag[ids[i]] = 1;
    }

    const std::size_t pattern_cells = pattern.size();
    const auto n_contaminated = static_cast<std::size_t>(std::lround(o.contamination * pattern_cells));
    for (std::uint32_t d = 0; d < o.corpus_size; ++d) {
        AssignmentMap m = blank_map(doc_name(d));
        if (planted_flag[d]) {
            const MapRegion w = random_window();
            stamp(m, w);
            std::vector<std::size_t> cells(pattern_cells);
            std::iota(cells.begin(), cells.end(), std::size_t{0});
            rng.shuffle(cells.begin(), cells.end());
            for (std::size_t k = 0; k < n_contaminated; ++k) {
                const auto i = static_cast<std::uint32_t>(cells[k] / o.pattern_cols);
                const auto j = static_cast<std::uint32_t>(cells[k] % o.pattern_cols);
                m.at(w.row_start + i, w.col_start + j) = background_word();
            }
            corpus.truth.positives.insert(m.image_id);
            corpus.planted.push_back({m.image_id, w});
        }
        corpus.maps.push_back(std::move(m));
    }
    return corpus;
}

FeatureMatrix gen_word_prototypes(std::uint64_t seed, std::uint32_t vocabulary_size, std::uint32_t depth) {
    if (vocabulary_size == 0 || depth == 0) {
        throw ValidationError("gen_word_prototypes: sizes must be >= 1");
    }
    Rng rng(seed);
    FeatureMatrix protos(depth);
    std::vector<float> v(depth);
    for (std::uint32_t k = 0; k < vocabulary_size; ++k) {
        for (auto& x : v) {
            x = static_cast<float>(rng.normal());
        }
        protos.append(v);
    }
    return protos;
}

FeatureTensor render_tensor(const AssignmentMap& map, const FeatureMatrix& prototypes, double noise,
                            std::uint64_t seed) {
    validate_assignment_map(map);
    Rng rng(seed);
    FeatureTensor t;
    t.image_id = map.image_id;
    t.depth = static_cast<std::uint32_t>(prototypes.dim());
    t.rows = map.rows;
    t.cols = map.cols;
    t.width = map.width;
    t.height = map.height;
    t.data.resize(std::size_t{t.depth} * t.rows * t.cols);
    for (std::uint32_t n = 0; n < t.rows; ++n) {
        for (std::uint32_t m = 0; m < t.cols; ++m) {
            const WordId w = map.at(n, m);
            if (w >= prototypes.rows()) {
                throw ValidationError("render_tensor: no prototype for word " + std::to_string(w));
            }
            const auto p = prototypes.row(w);
            for (std::uint32_t d = 0; d < t.depth; ++d) {
                t.at(d, n, m) = static_cast<float>(p[d] + noise * rng.normal());
            }
        }
    }
    return t;
}

}  // namespace vws
