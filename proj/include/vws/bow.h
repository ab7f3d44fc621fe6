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

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "vws/codebook.h"
#include "vws/preprocess.h"

namespace vws {

struct BowEntry {
    WordId word = 0;
    double weight = 0.0;

    bool operator==(const BowEntry&) const = default;
};

// Sparse K-dimensional histogram. Entries are sorted by strictly increasing
// word id, every weight is positive, and the L2 norm is cached.
class BowVector {
 public:
    BowVector() = default;
    explicit BowVector(std::uint32_t vocabulary_size);

    // Takes entries that already satisfy the ordering/positivity invariants;
    // throws ValidationError otherwise.
    static BowVector from_sorted(std::uint32_t vocabulary_size, std::vector<BowEntry> entries);
    // Sorts, merges duplicate words by summing and drops non-positive weights.
    static BowVector from_unsorted(std::uint32_t vocabulary_size, std::vector<BowEntry> entries);

    std::uint32_t vocabulary_size() const { return vocabulary_size_; }
    const std::vector<BowEntry>& entries() const { return entries_; }
    std::size_t nonzeros() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    double norm() const { return norm_; }
    double total_weight() const;
    // 0 when the word is absent.
    double weight(WordId word) const;

    // Unit-norm copy; an empty vector stays empty.
    BowVector normalized() const;
    BowVector scaled(double factor) const;

    // Re-checks ordering, positivity and the cached norm.
    void check_invariants() const;

    bool operator==(const BowVector&) const = default;

 private:
    BowVector(std::uint32_t vocabulary_size, std::vector<BowEntry> entries, double norm)
        : vocabulary_size_(vocabulary_size), entries_(std::move(entries)), norm_(norm) {}

    std::uint32_t vocabulary_size_ = 0;
    std::vector<BowEntry> entries_;
    double norm_ = 0.0;
};

BowVector add(const BowVector& a, const BowVector& b);
double dot(const BowVector& a, const BowVector& b);

/// dot(a, b) / (|a| |b|), or 0 when either norm is zero. Throws
/// ValidationError when the vocabularies differ.
double cosine(const BowVector& a, const BowVector& b);

// Half-open rectangle of assignment-map cells.
struct MapRegion {
    std::uint32_t row_start = 0;
    std::uint32_t row_end = 0;
    std::uint32_t col_start = 0;
    std::uint32_t col_end = 0;

    std::uint32_t rows() const { return row_end - row_start; }
    std::uint32_t cols() const { return col_end - col_start; }
    std::size_t cells() const { return std::size_t{rows()} * cols(); }
    bool empty() const { return row_end <= row_start || col_end <= col_start; }

    auto operator<=>(const MapRegion&) const = default;
};

// Rectangle in source-image pixel coordinates, [x0, x1) x [y0, y1).
struct PixelBox {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }

    bool operator==(const PixelBox&) const = default;
};

MapRegion full_region(const AssignmentMap& map);
void validate_region(const AssignmentMap& map, const MapRegion& region);

/// Weight of word w = sum over cells of the region holding w of the prior
/// weight at that cell (1 without a prior).
BowVector encode_region(const AssignmentMap& map, const MapRegion& region,
                        const CenterPriorGrid* prior = nullptr);

inline BowVector encode_full(const AssignmentMap& map, const CenterPriorGrid* prior = nullptr) {
    return encode_region(map, full_region(map), prior);
}

/// Smallest cell region covering every cell the box touches.
MapRegion pixel_region_to_map_region(const AssignmentMap& map, const PixelBox& box);

/// Pixel footprint of a map region.
PixelBox map_region_to_pixel_box(const AssignmentMap& map, const MapRegion& region);

double iou(const MapRegion& a, const MapRegion& b);

// One region of a two-level spatial pyramid. slot 0 is the full region
// (level 1); slots 1..4 are the top-left, top-right, bottom-left and
// bottom-right quadrants (level 2).
struct PyramidRegion {
    MapRegion region;
    int level = 1;
    int slot = 0;
};

inline constexpr int kPyramidLevels = 2;

/// Full region plus its 2x2 split at floor midpoints; empty quadrants are
/// omitted.
std::vector<PyramidRegion> spm_regions(const MapRegion& region);

}  // namespace vws
