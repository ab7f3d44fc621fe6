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
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vws/bow.h"
#include "vws/index.h"

namespace vws {

// Sliding windows over an N x M assignment map.
struct WindowSet {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<MapRegion> windows;  // sorted, unique
};

/// Windows of height {N, ceil(N/2), ceil(N/4)} x width {M, ceil(M/2),
/// ceil(M/4)}, slid with half-size strides (at least 1). A window flush with
/// the far edge is added when the last stride stops short of it.
WindowSet enumerate_windows(std::uint32_t rows, std::uint32_t cols);

/// min(AR_w, AR_q) / max(AR_w, AR_q), with both aspect ratios measured in
/// pixels. `geometry` supplies the cell size of the window's map.
double aspect_ratio_score(const PixelBox& query_box, const MapRegion& window, const AssignmentMap& geometry);

// How pyramid levels are weighted. kFormula uses 1 / 2^(L - l): the full
// window (l = 1) weighs 1/2 and each quadrant (l = 2) weighs 1. kInverted
// swaps that so the coarse level dominates.
enum class SpmWeighting { kFormula, kInverted };

double spm_level_weight(int level, SpmWeighting weighting);

struct PyramidBow {
    BowVector bow;
    int level = 1;
    int slot = 0;
};

/// BoW of each spm_regions() cell of `region`, without center prior.
std::vector<PyramidBow> build_pyramid(const AssignmentMap& map, const MapRegion& region);

/// Weighted mean of slot-wise cosines between the query pyramid and the
/// window's pyramid. Slots missing on either side are skipped.
double spm_score(std::span<const PyramidBow> query, const AssignmentMap& map, const MapRegion& window,
                 SpmWeighting weighting = SpmWeighting::kFormula);

struct Localization {
    std::string doc_id;
    MapRegion window;
    double score = 0.0;
    PixelBox pixel_box;
};

// Assignment maps keyed by image id. An optional loader is consulted for
// ids that were not added explicitly; loaded maps are cached. Lookups are
// thread-safe.
class MapStore {
 public:
    using Loader = std::function<std::optional<AssignmentMap>(std::string_view id)>;

    MapStore() = default;
    explicit MapStore(Loader loader) : loader_(std::move(loader)) {}

    void add(AssignmentMap map);
    const AssignmentMap* find(std::string_view id) const;
    /// Throws DataError naming the id when absent.
    const AssignmentMap& get(std::string_view id) const;
    std::size_t size() const;

 private:
    Loader loader_;
    mutable std::mutex mu_;
    // Node-based, so references stay valid as the cache grows.
    mutable std::unordered_map<std::string, AssignmentMap> maps_;
};

inline constexpr std::size_t kDefaultRerankDepth = 100;
inline constexpr double kDefaultAspectThreshold = 0.4;

struct RerankOptions {
    std::size_t depth = kDefaultRerankDepth;  // T
    double aspect_threshold = kDefaultAspectThreshold;  // th
    SpmWeighting weighting = SpmWeighting::kFormula;
    unsigned jobs = 1;
};

struct RerankResult {
    RankedList ranking;
    // One per reranked document, in the new ranking order.
    std::vector<Localization> localizations;
};

/// Best-window localization for one document.
Localization localize(std::span<const PyramidBow> query_pyramid, const PixelBox& query_box,
                      const AssignmentMap& map, const RerankOptions& options);

/// Rescores the first min(T, size) documents by their best window and
/// re-sorts that head (ties keep the prior order). The tail keeps its order
/// and stays behind the head; tail scores are capped at the lowest head
/// score so the list stays non-increasing.
RerankResult rerank_top(const RankedList& ranking, const QuerySpec& query, const MapStore& maps,
                        const RerankOptions& options = {});

/// One tab-separated row per localization:
/// query_id, doc_id, x0 y0 x1 y1, score.
void write_localizations(std::ostream& out, std::string_view query_id, std::span<const Localization> locs);

}  // namespace vws
