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

#include "vws/bow.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "vws/errors.h"

namespace vws {
namespace {

double norm_of(const std::vector<BowEntry>& entries) {
    double sq = 0.0;
    for (const auto& e : entries) {
        sq += e.weight * e.weight;
    }
    return std::sqrt(sq);
}

void check_entries(std::uint32_t k, const std::vector<BowEntry>& entries) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.word >= k) {
            throw ValidationError("bow: word id " + std::to_string(e.word) + " >= K=" + std::to_string(k));
        }
        if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
            throw ValidationError("bow: weights must be positive and finite");
        }
        if (i > 0 && entries[i - 1].word >= e.word) {
            throw ValidationError("bow: word ids must be strictly increasing");
        }
    }
}

void require_same_vocabulary(const BowVector& a, const BowVector& b) {
    if (a.vocabulary_size() != b.vocabulary_size()) {
        throw ValidationError("bow: vocabulary size mismatch (" + std::to_string(a.vocabulary_size()) +
                              " vs " + std::to_string(b.vocabulary_size()) + ")");
    }
}

// Snaps values within rounding noise of an integer onto it so that exact
// cell boundaries survive the pixel <-> cell scaling.
double snap(double v) {
    const double r = std::round(v);
    return std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v)) ? r : v;
}

}  // namespace

BowVector::BowVector(std::uint32_t vocabulary_size) : vocabulary_size_(vocabulary_size) {
    if (vocabulary_size == 0) {
        throw ValidationError("bow: vocabulary size must be >= 1");
    }
}

BowVector BowVector::from_sorted(std::uint32_t k, std::vector<BowEntry> entries) {
    if (k == 0) {
        throw ValidationError("bow: vocabulary size must be >= 1");
    }
    check_entries(k, entries);
    const double n = norm_of(entries);
    return BowVector(k, std::move(entries), n);
}

BowVector BowVector::from_unsorted(std::uint32_t k, std::vector<BowEntry> entries) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const BowEntry& a, const BowEntry& b) { return a.word < b.word; });
    std::vector<BowEntry> merged;
    merged.reserve(entries.size());
    for (const auto& e : entries) {
        if (!merged.empty() && merged.back().word == e.word) {
            merged.back().weight += e.weight;
        } else {
            merged.push_back(e);
        }
    }
    std::erase_if(merged, [](const BowEntry& e) { return !(e.weight > 0.0); });
    return from_sorted(k, std::move(merged));
}

double BowVector::total_weight() const {
    double s = 0.0;
    for (const auto& e : entries_) {
        s += e.weight;
    }
    return s;
}

double BowVector::weight(WordId word) const {
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), word,
                                     [](const BowEntry& e, WordId w) { return e.word < w; });
    return it != entries_.end() && it->word == word ? it->weight : 0.0;
}

BowVector BowVector::normalized() const {
    if (norm_ == 0.0) {
        return *this;
    }
    return scaled(1.0 / norm_);
}

BowVector BowVector::scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw ValidationError("bow: scale factor must be positive");
    }
    std::vector<BowEntry> out = entries_;
    for (auto& e : out) {
        e.weight *= factor;
    }
    std::erase_if(out, [](const BowEntry& e) { return !(e.weight > 0.0); });
    const double n = norm_of(out);
    return BowVector(vocabulary_size_, std::move(out), n);
}

void BowVector::check_invariants() const {
    check_entries(vocabulary_size_, entries_);
    if (std::abs(norm_of(entries_) - norm_) > 1e-9 * std::max(1.0, norm_)) {
        throw ValidationError("bow: cached norm is stale");
    }
}

BowVector add(const BowVector& a, const BowVector& b) {
    require_same_vocabulary(a, b);
    std::vector<BowEntry> out;
    out.reserve(a.nonzeros() + b.nonzeros());
    auto ia = a.entries().begin();
    auto ib = b.entries().begin();
    while (ia != a.entries().end() || ib != b.entries().end()) {
        if (ib == b.entries().end() || (ia != a.entries().end() && ia->word < ib->word)) {
            out.push_back(*ia++);
        } else if (ia == a.entries().end() || ib->word < ia->word) {
            out.push_back(*ib++);
        } else {
            out.push_back({ia->word, ia->weight + ib->weight});
            ++ia;
            ++ib;
        }
    }
    return BowVector::from_sorted(a.vocabulary_size(), std::move(out));
}

double dot(const BowVector& a, const BowVector& b) {
    require_same_vocabulary(a, b);
    double s = 0.0;
    auto ia = a.entries().begin();
    auto ib = b.entries().begin();
    while (ia != a.entries().end() && ib != b.entries().end()) {
        if (ia->word == ib->word) {
            s += ia->weight * ib->weight;
            ++ia;
            ++ib;
        } else if (ia->word < ib->word) {
            ++ia;
        } else {
            ++ib;
        }
    }
    return s;
}

double cosine(const BowVector& a, const BowVector& b) {
    const double d = dot(a, b);
    if (a.norm() == 0.0 || b.norm() == 0.0) {
        return 0.0;
    }
    return std::clamp(d / (a.norm() * b.norm()), 0.0, 1.0);
}

MapRegion full_region(const AssignmentMap& map) {
    return {0, map.rows, 0, map.cols};
}

void validate_region(const AssignmentMap& map, const MapRegion& r) {
    if (r.empty() || r.row_end > map.rows || r.col_end > map.cols) {
        throw ValidationError("region [" + std::to_string(r.row_start) + "," + std::to_string(r.row_end) +
                              ")x[" + std::to_string(r.col_start) + "," + std::to_string(r.col_end) +
                              ") is empty or outside the " + std::to_string(map.rows) + "x" +
                              std::to_string(map.cols) + " map");
    }
}

BowVector encode_region(const AssignmentMap& map, const MapRegion& region, const CenterPriorGrid* prior) {
    validate_region(map, region);
    if (prior != nullptr && (prior->rows != map.rows || prior->cols != map.cols)) {
        throw ValidationError("encode_region: prior grid dimensions differ from the map");
    }
    // Dense per-thread accumulator; only the touched words are visited when
    // building the result.
    thread_local std::vector<double> acc;
    thread_local std::vector<WordId> touched;
    if (acc.size() < map.vocabulary_size) {
        acc.assign(map.vocabulary_size, 0.0);
    }
    touched.clear();
    for (std::uint32_t i = region.row_start; i < region.row_end; ++i) {
        for (std::uint32_t j = region.col_start; j < region.col_end; ++j) {
            const WordId w = map.at(i, j);
            if (w >= map.vocabulary_size) {
                throw ValidationError("encode_region: word id out of range in map '" + map.image_id + "'");
            }
            const double weight = prior != nullptr ? prior->at(i, j) : 1.0;
            if (!(weight > 0.0)) {
                continue;
            }
            if (acc[w] == 0.0) {
                touched.push_back(w);
            }
            acc[w] += weight;
        }
    }
    std::sort(touched.begin(), touched.end());
    std::vector<BowEntry> entries;
    entries.reserve(touched.size());
    for (WordId w : touched) {
        entries.push_back({w, acc[w]});
        acc[w] = 0.0;
    }
    return BowVector::from_sorted(map.vocabulary_size, std::move(entries));
}

MapRegion pixel_region_to_map_region(const AssignmentMap& map, const PixelBox& box) {
    const double w = map.width;
    const double h = map.height;
    if (!(box.x0 >= 0.0 && box.x0 < box.x1 && box.x1 <= w && box.y0 >= 0.0 && box.y0 < box.y1 &&
          box.y1 <= h)) {
        throw ValidationError("pixel box is degenerate or outside the " + std::to_string(map.width) + "x" +
                              std::to_string(map.height) + " image");
    }
    auto lo = [](double v, std::uint32_t extent) {
        const double c = std::floor(snap(v));
        return static_cast<std::uint32_t>(std::clamp(c, 0.0, extent - 1.0));
    };
    auto hi = [](double v, std::uint32_t extent) {
        const double c = std::ceil(snap(v));
        return static_cast<std::uint32_t>(std::clamp(c, 1.0, static_cast<double>(extent)));
    };
    MapRegion r;
    r.col_start = lo(box.x0 * map.cols / w, map.cols);
    r.col_end = hi(box.x1 * map.cols / w, map.cols);
    r.row_start = lo(box.y0 * map.rows / h, map.rows);
    r.row_end = hi(box.y1 * map.rows / h, map.rows);
    if (r.col_end <= r.col_start) {
        r.col_end = r.col_start + 1;
    }
    if (r.row_end <= r.row_start) {
        r.row_end = r.row_start + 1;
    }
    return r;
}

PixelBox map_region_to_pixel_box(const AssignmentMap& map, const MapRegion& r) {
    validate_region(map, r);
    // Multiply before dividing so the far edge lands exactly on W and H.
    auto x = [&](std::uint32_t c) { return static_cast<double>(c) * map.width / map.cols; };
    auto y = [&](std::uint32_t r) { return static_cast<double>(r) * map.height / map.rows; };
    return {x(r.col_start), y(r.row_start), x(r.col_end), y(r.row_end)};
}

double iou(const MapRegion& a, const MapRegion& b) {
    const auto r0 = std::max(a.row_start, b.row_start);
    const auto r1 = std::min(a.row_end, b.row_end);
    const auto c0 = std::max(a.col_start, b.col_start);
    const auto c1 = std::min(a.col_end, b.col_end);
    const double inter = (r1 > r0 && c1 > c0) ? static_cast<double>(r1 - r0) * (c1 - c0) : 0.0;
    const double uni = static_cast<double>(a.cells()) + static_cast<double>(b.cells()) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<PyramidRegion> spm_regions(const MapRegion& r) {
    std::vector<PyramidRegion> out;
    out.push_back({r, 1, 0});
    const std::uint32_t row_mid = r.row_start + r.rows() / 2;
    const std::uint32_t col_mid = r.col_start + r.cols() / 2;
    const MapRegion quads[4] = {
        {r.row_start, row_mid, r.col_start, col_mid},
        {r.row_start, row_mid, col_mid, r.col_end},
        {row_mid, r.row_end, r.col_start, col_mid},
        {row_mid, r.row_end, col_mid, r.col_end},
    };
    for (int q = 0; q < 4; ++q) {
        if (!quads[q].empty()) {
            out.push_back({quads[q], 2, q + 1});
        }
    }
    return out;
}

}  // namespace vws
