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

// Reference implementations used as oracles by the tests. Each one is
// written from the definition, without reusing library internals.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "vws/bow.h"
#include "vws/codebook.h"
#include "vws/eval.h"
#include "vws/index.h"

namespace vws::testing {

inline AssignmentMap random_map(std::mt19937_64& gen, std::uint32_t rows, std::uint32_t cols, std::uint32_t k,
                                std::string id = "m") {
    AssignmentMap m;
    m.image_id = std::move(id);
    m.rows = rows;
    m.cols = cols;
    m.width = cols * 10;
    m.height = rows * 10;
    m.vocabulary_size = k;
    std::uniform_int_distribution<std::uint32_t> w(0, k - 1);
    m.words.resize(std::size_t{rows} * cols);
    for (auto& x : m.words) {
        x = w(gen);
    }
    return m;
}

inline AssignmentMap uniform_map(std::uint32_t rows, std::uint32_t cols, std::uint32_t k, WordId word,
                                 std::uint32_t cell_pixels = 10, std::string id = "u") {
    AssignmentMap m;
    m.image_id = std::move(id);
    m.rows = rows;
    m.cols = cols;
    m.width = cols * cell_pixels;
    m.height = rows * cell_pixels;
    m.vocabulary_size = k;
    m.words.assign(std::size_t{rows} * cols, word);
    return m;
}

// Dense histogram of a rectangle of a map, optionally weighted.
inline std::vector<double> dense_histogram(const AssignmentMap& m, const MapRegion& r,
                                           const std::vector<double>* weights = nullptr) {
    std::vector<double> h(m.vocabulary_size, 0.0);
    for (std::uint32_t i = r.row_start; i < r.row_end; ++i) {
        for (std::uint32_t j = r.col_start; j < r.col_end; ++j) {
            h[m.words[std::size_t{i} * m.cols + j]] += weights ? (*weights)[std::size_t{i} * m.cols + j] : 1.0;
        }
    }
    return h;
}

inline std::vector<double> to_dense(const BowVector& v) {
    std::vector<double> d(v.vocabulary_size(), 0.0);
    for (const auto& e : v.entries()) {
        d[e.word] = e.weight;
    }
    return d;
}

inline double dense_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0.0;
    double aa = 0.0;
    double bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) {
        return 0.0;
    }
    return ab / (std::sqrt(aa) * std::sqrt(bb));
}

struct DenseHit {
    std::string doc;
    double score;
};

// Brute-force cosine ranking over dense vectors: positive scores only,
// descending score, ties by ascending doc id.
inline std::vector<DenseHit> dense_rank(const std::vector<std::string>& ids,
                                        const std::vector<std::vector<double>>& docs, const std::vector<double>& q,
                                        std::size_t top_k) {
    std::vector<DenseHit> hits;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        const double s = dense_cosine(docs[d], q);
        if (s > 0.0) {
            hits.push_back({ids[d], s});
        }
    }
    std::sort(hits.begin(), hits.end(), [](const DenseHit& a, const DenseHit& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.doc < b.doc;
    });
    if (hits.size() > top_k) {
        hits.resize(top_k);
    }
    return hits;
}

// Exhaustive nearest centroid, ties to the lowest id.
inline WordId scan_nearest(const std::vector<std::vector<double>>& centroids, const std::vector<double>& x) {
    WordId best = 0;
    double best_d = INFINITY;
    for (std::size_t k = 0; k < centroids.size(); ++k) {
        double d = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double t = x[i] - centroids[k][i];
            d += t * t;
        }
        if (d < best_d) {
            best_d = d;
            best = static_cast<WordId>(k);
        }
    }
    return best;
}

// Every window of height in {N, ceil(N/2), ceil(N/4)} and width in the
// analogous set, at every position p with p % stride == 0 or p flush with
// the far edge, stride = max(1, floor(size / 2)).
inline std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t>> brute_windows(
    std::uint32_t n, std::uint32_t m) {
    std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t>> out;
    const std::set<std::uint32_t> hs = {n, (n + 1) / 2, (n + 3) / 4};
    const std::set<std::uint32_t> ws = {m, (m + 1) / 2, (m + 3) / 4};
    for (std::uint32_t h : hs) {
        const std::uint32_t sh = h / 2 == 0 ? 1 : h / 2;
        for (std::uint32_t w : ws) {
            const std::uint32_t sw = w / 2 == 0 ? 1 : w / 2;
            for (std::uint32_t r = 0; r + h <= n; ++r) {
                if (r % sh != 0 && r + h != n) {
                    continue;
                }
                for (std::uint32_t c = 0; c + w <= m; ++c) {
                    if (c % sw != 0 && c + w != m) {
                        continue;
                    }
                    out.insert({r, r + h, c, c + w});
                }
            }
        }
    }
    return out;
}

// Non-interpolated AP from the definition: drop ignored docs, then average
// precision@k over the ranks k holding a positive, dividing by |positives|.
inline double ap_oracle(const std::vector<std::string>& ranking, const std::set<std::string>& pos,
                        const std::set<std::string>& ign) {
    double sum = 0.0;
    std::size_t k = 0;
    std::size_t hits = 0;
    for (const auto& d : ranking) {
        if (ign.count(d) != 0) {
            continue;
        }
        ++k;
        if (pos.count(d) != 0) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(k);
        }
    }
    return sum / static_cast<double>(pos.size());
}

inline RankedList make_ranking(std::string qid, const std::vector<std::string>& docs) {
    RankedList r;
    r.query_id = std::move(qid);
    double s = 1.0;
    for (const auto& d : docs) {
        r.items.push_back({d, s});
        s *= 0.9;
    }
    return r;
}

// Scratch directory removed on scope exit.
class TempDir {
 public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("vws_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

 private:
    std::filesystem::path path_;
};

}  // namespace vws::testing
