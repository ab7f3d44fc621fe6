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

#include <cstddef>
#include <span>
#include <vector>

#include "vws/errors.h"

namespace vws {

// Row-major set of equal-length feature vectors.
class FeatureMatrix {
 public:
    FeatureMatrix() = default;
    explicit FeatureMatrix(std::size_t dim) : dim_(dim) {}
    FeatureMatrix(std::size_t dim, std::vector<float> values) : dim_(dim), values_(std::move(values)) {
        if (dim_ == 0 || values_.size() % dim_ != 0) {
            throw ValidationError("feature matrix payload is not a multiple of its dimension");
        }
    }

    std::size_t dim() const { return dim_; }
    std::size_t rows() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
    bool empty() const { return values_.empty(); }

    std::span<const float> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
    std::span<float> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }

    void append(std::span<const float> v) {
        if (v.size() != dim_) {
            throw ValidationError("feature dimension mismatch on append");
        }
        values_.insert(values_.end(), v.begin(), v.end());
    }

    void reserve_rows(std::size_t n) { values_.reserve(n * dim_); }
    const std::vector<float>& values() const { return values_; }

 private:
    std::size_t dim_ = 0;
    std::vector<float> values_;
};

}  // namespace vws
