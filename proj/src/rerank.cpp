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

#include "vws/rerank.h"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "vws/errors.h"
#include "vws/parallel.h"

namespace vws {
namespace {

std::uint32_t ceil_div(std::uint32_t a, std::uint32_t b) {
    return (a + b - 1) / b;
}

// Start offsets for one axis: 0, stride, 2*stride, ... plus a flush start
// when the last one does not reach the edge.
std::vector<std::uint32_t> starts(std::uint32_t extent, std::uint32_t size) {
    const std::uint32_t stride = std::max(1u, size / 2);
    std::vector<std::uint32_t> out;
    std::uint32_t s = 0;
    for (; s + size <= extent; s += stride) {
        out.push_back(s);
    }
    if (out.back() + size < extent) {
        out.push_back(extent - size);
    }
    return out;
}

}  // namespace

WindowSet enumerate_windows(std::uint32_t rows, std::uint32_t cols) {
    if (rows == 0 || cols == 0) {
        throw ValidationError("enumerate_windows: map dimensions must be >= 1");
    }
    WindowSet set{rows, cols, {}};
    const std::uint32_t heights[3] = {rows, ceil_div(rows, 2), ceil_div(rows, 4)};
    const std::uint32_t widths[3] = {cols, ceil_div(cols, 2), ceil_div(cols, 4)};
    for (std::uint32_t h : heights) {
        for (std::uint32_t w : widths) {
            for (std::uint32_t r : starts(rows, h)) {
                for (std::uint32_t c : starts(cols, w)) {
                    set.windows.push_back({r, r + h, c, c + w});
                }
            }
        }
    }
    std::sort(set.windows.begin(), set.windows.end());
    set.windows.erase(std::unique(set.windows.begin(), set.windows.end()), set.windows.end());
    return set;
}

double aspect_ratio_score(const PixelBox& query_box, const MapRegion& window, const AssignmentMap& geometry) {
    if (!(query_box.width() > 0.0) || !(query_box.height() > 0.0)) {
        throw ValidationError("aspect_ratio_score: degenerate query box");
    }
    if (window.empty()) {
        throw ValidationError("aspect_ratio_score: empty window");
    }
    const double cell_w = static_cast<double>(geometry.width) / geometry.cols;
    const double cell_h = static_cast<double>(geometry.height) / geometry.rows;
    const double ar_q = query_box.width() / query_box.height();
    const double ar_w = (window.cols() * cell_w) / (window.rows() * cell_h);
    return std::min(ar_q, ar_w) / std::max(ar_q, ar_w);
}

double spm_level_weight(int level, SpmWeighting weighting) {
    if (level < 1 || level > kPyramidLevels) {
        throw ValidationError("spm: level out of range");
    }
    const int exponent = weighting == SpmWeighting::kFormula ? kPyramidLevels - level : level - 1;
    return 1.0 / static_cast<double>(1 << exponent);
}

std::vector<PyramidBow> build_pyramid(const AssignmentMap& map, const MapRegion& region) {
    std::vector<PyramidBow> out;
    for (const auto& pr : spm_regions(region)) {
        out.push_back({encode_region(map, pr.region), pr.level, pr.slot});
    }
    return out;
}

double spm_score(std::span<const PyramidBow> query, const AssignmentMap& map, const MapRegion& window,
                 SpmWeighting weighting) {
    const PyramidBow* by_slot[5] = {};
    for (const auto& q : query) {
        const bool slot_ok = q.slot >= 0 && q.slot <= 4 && q.level == (q.slot == 0 ? 1 : 2);
        if (!slot_ok || by_slot[q.slot] != nullptr) {
            throw ValidationError("spm_score: malformed query pyramid");
        }
        by_slot[q.slot] = &q;
    }
    if (by_slot[0] == nullptr) {
        throw ValidationError("spm_score: query pyramid lacks the full region");
    }
    double num = 0.0;
    double den = 0.0;
    for (const auto& pr : spm_regions(window)) {
        const PyramidBow* q = by_slot[pr.slot];
        if (q == nullptr) {
            continue;
        }
        const double w = spm_level_weight(pr.level, weighting);
        num += w * cosine(q->bow, encode_region(map, pr.region));
        den += w;
    }
    return std::clamp(num / den, 0.0, 1.0);
}

void MapStore::add(AssignmentMap map) {
    std::lock_guard lock(mu_);
    std::string id = map.image_id;
    maps_.insert_or_assign(std::move(id), std::move(map));
}

const AssignmentMap* MapStore::find(std::string_view id) const {
    std::lock_guard lock(mu_);
    const std::string key(id);
    if (const auto it = maps_.find(key); it != maps_.end()) {
        return &it->second;
    }
    if (!loader_) {
        return nullptr;
    }
    std::optional<AssignmentMap> loaded = loader_(id);
    if (!loaded) {
        return nullptr;
    }
    return &maps_.emplace(key, std::move(*loaded)).first->second;
}

std::size_t MapStore::size() const {
    std::lock_guard lock(mu_);
    return maps_.size();
}

const AssignmentMap& MapStore::get(std::string_view id) const {
    const AssignmentMap* m = find(id);
    if (m == nullptr) {
        throw DataError("no assignment map for document '" + std::string(id) + "'");
    }
    return *m;
}

Localization localize(std::span<const PyramidBow> query_pyramid, const PixelBox& query_box,
                      const AssignmentMap& map, const RerankOptions& options) {
    const WindowSet set = enumerate_windows(map.rows, map.cols);
    std::vector<const MapRegion*> kept;
    const MapRegion* best_ar_window = nullptr;
    double best_ar = -1.0;
    for (const auto& w : set.windows) {
        const double ar = aspect_ratio_score(query_box, w, map);
        if (ar >= options.aspect_threshold) {
            kept.push_back(&w);
        }
        if (ar > best_ar) {
            best_ar = ar;
            best_ar_window = &w;
        }
    }
    if (kept.empty()) {
        kept.push_back(best_ar_window);
    }
    Localization loc;
    loc.doc_id = map.image_id;
    loc.score = -1.0;
    for (const MapRegion* w : kept) {
        const double s = spm_score(query_pyramid, map, *w, options.weighting);
        if (s > loc.score) {
            loc.score = s;
            loc.window = *w;
        }
    }
    loc.pixel_box = map_region_to_pixel_box(map, loc.window);
    return loc;
}

RerankResult rerank_top(const RankedList& ranking, const QuerySpec& query, const MapStore& maps,
                        const RerankOptions& options) {
    const std::size_t head = std::min(options.depth, ranking.items.size());
    const std::vector<PyramidBow> pyramid = build_pyramid(query.map, query_region(query));
    const PixelBox qbox = query_pixel_box(query);

    // Resolve every map up front so a missing one fails before any work.
    std::vector<const AssignmentMap*> head_maps(head);
    for (std::size_t i = 0; i < head; ++i) {
        head_maps[i] = &maps.get(ranking.items[i].doc_id);
        if (head_maps[i]->vocabulary_size != query.map.vocabulary_size) {
            throw ValidationError("rerank_top: map '" + ranking.items[i].doc_id +
                                  "' uses a different vocabulary than the query");
        }
    }
    std::vector<Localization> locs(head);
    parallel_for(head, options.jobs, [&](std::size_t i) {
        locs[i] = localize(pyramid, qbox, *head_maps[i], options);
        locs[i].doc_id = ranking.items[i].doc_id;
    });

    std::vector<std::size_t> order(head);
    for (std::size_t i = 0; i < head; ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return locs[a].score > locs[b].score; });

    RerankResult out;
    out.ranking.query_id = ranking.query_id;
    out.ranking.items.reserve(ranking.items.size());
    out.localizations.reserve(head);
    double floor_score = 1.0;
    for (std::size_t i : order) {
        out.ranking.items.push_back({ranking.items[i].doc_id, locs[i].score});
        out.localizations.push_back(std::move(locs[i]));
        floor_score = std::min(floor_score, out.ranking.items.back().score);
    }
    for (std::size_t i = head; i < ranking.items.size(); ++i) {
        const double s = head > 0 ? std::min(ranking.items[i].score, floor_score) : ranking.items[i].score;
        out.ranking.items.push_back({ranking.items[i].doc_id, s});
    }
    return out;
}

void write_localizations(std::ostream& out, std::string_view query_id, std::span<const Localization> locs) {
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << std::setprecision(10);
    for (const auto& l : locs) {
        out << query_id << '\t' << l.doc_id << '\t' << l.pixel_box.x0 << ' ' << l.pixel_box.y0 << ' '
            << l.pixel_box.x1 << ' ' << l.pixel_box.y1 << '\t' << l.score << '\n';
    }
    out.flags(flags);
    out.precision(prec);
}

}  // namespace vws
