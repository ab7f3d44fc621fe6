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

#include "vws/feature_matrix.h"
#include "vws/preprocess.h"
#include "vws/tensor_io.h"

namespace vws {

using WordId = std::uint32_t;

// K visual words in the transformed feature space.
struct Codebook {
    std::uint32_t size = 0;  // K
    std::uint32_t dim = 0;
    std::int64_t seed = 0;
    std::vector<float> centroids;  // K x dim, row-major

    std::span<const float> centroid(WordId k) const {
        return {centroids.data() + std::size_t{k} * dim, dim};
    }

    bool operator==(const Codebook&) const = default;
};

struct KMeansOptions {
    std::uint32_t k = 0;
    std::int64_t seed = 0;
    std::uint32_t max_iters = 50;
    unsigned jobs = 1;  // threads for the assignment step; 0 = all cores
};

// Quantization error (sum of squared distances) observed while fitting.
struct KMeansReport {
    double initial_error = 0.0;
    // Error after every assignment step, in iteration order. The last entry
    // is the error of the returned centroids.
    std::vector<double> errors;
    std::uint32_t iterations = 0;
    bool converged = false;
};

/// Lloyd's algorithm with k-means++ seeding. Deterministic for a given
/// (features, options). Throws ValidationError for K = 0 and FitError when
/// the sample has fewer than K (distinct) points.
Codebook fit_codebook(const FeatureMatrix& features, const KMeansOptions& options,
                      KMeansReport* report = nullptr);

/// Nearest centroid by squared Euclidean distance; ties go to the lowest id.
WordId assign(const Codebook& codebook, std::span<const float> feature);

/// Sum over rows of the squared distance to the assigned centroid.
double quantization_error(const Codebook& codebook, const FeatureMatrix& features);

void validate_codebook(const Codebook& codebook);

void save_codebook(const Codebook& codebook, std::ostream& out);
void save_codebook(const Codebook& codebook, const std::filesystem::path& path);
Codebook load_codebook(std::istream& in);
Codebook load_codebook(const std::filesystem::path& path);

// N x M grid of visual words for one image, plus the pixel geometry of the
// source image. `vocabulary_size` is the K of the codebook that produced it;
// it is not part of the persisted format and is supplied when loading.
struct AssignmentMap {
    std::string image_id;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t vocabulary_size = 0;
    std::vector<WordId> words;  // rows x cols, row-major

    WordId at(std::uint32_t i, std::uint32_t j) const { return words[std::size_t{i} * cols + j]; }
    WordId& at(std::uint32_t i, std::uint32_t j) { return words[std::size_t{i} * cols + j]; }

    bool operator==(const AssignmentMap&) const = default;
};

void validate_assignment_map(const AssignmentMap& map);

/// upsample -> apply_transform -> assign for every cell of the tensor.
AssignmentMap build_assignment_map(const Codebook& codebook, const FeatureTensor& tensor,
                                   const TransformModel& model, std::uint32_t upsample_factor);

void save_assignment_map(const AssignmentMap& map, std::ostream& out);
void save_assignment_map(const AssignmentMap& map, const std::filesystem::path& path);
AssignmentMap load_assignment_map(std::istream& in, std::uint32_t vocabulary_size);
AssignmentMap load_assignment_map(const std::filesystem::path& path, std::uint32_t vocabulary_size);

}  // namespace vws
