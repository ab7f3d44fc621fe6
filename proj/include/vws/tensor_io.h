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
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace vws {

// Dense grid of local features for one image: `depth` feature maps of
// rows x cols, stored depth-major as data[d][n][m]. `width`/`height` are
// the pixel dimensions of the source image, which fix how map cells map
// back to image regions.
struct FeatureTensor {
    std::string image_id;
    std::uint32_t depth = 0;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<float> data;

    std::size_t cell_count() const { return std::size_t{rows} * cols; }

    float at(std::uint32_t d, std::uint32_t n, std::uint32_t m) const {
        return data[(std::size_t{d} * rows + n) * cols + m];
    }
    float& at(std::uint32_t d, std::uint32_t n, std::uint32_t m) {
        return data[(std::size_t{d} * rows + n) * cols + m];
    }

    // Gathers the depth-long local descriptor at cell (n, m).
    std::vector<float> local_feature(std::uint32_t n, std::uint32_t m) const;

    bool operator==(const FeatureTensor&) const = default;
};

// Throws ValidationError if any FeatureTensor invariant is violated.
void validate_tensor(const FeatureTensor& tensor);

inline constexpr std::uint32_t kTensorFormatVersion = 1;

void write_tensor(const FeatureTensor& tensor, std::ostream& out);
void write_tensor(const FeatureTensor& tensor, const std::filesystem::path& path);

FeatureTensor read_tensor(std::istream& in);
FeatureTensor read_tensor(const std::filesystem::path& path);

}  // namespace vws
