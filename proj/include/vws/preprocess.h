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
#include <vector>

#include "vws/feature_matrix.h"
#include "vws/tensor_io.h"

namespace vws {

/// Returns v scaled to unit L2 norm. A zero vector is returned unchanged.
/// Throws ValidationError on non-finite input.
std::vector<float> l2_normalize(std::span<const float> v);

/// Fitted L2 -> PCA -> whitening -> L2 transform.
///
/// `components` holds output_dim rows of length input_dim (row-major) that
/// are orthonormal eigenvectors of the training covariance, ordered by
/// descending eigenvalue.
struct TransformModel {
    std::uint32_t input_dim = 0;
    std::uint32_t output_dim = 0;
    double epsilon = 1e-8;
    std::vector<double> mean;
    std::vector<double> eigenvalues;
    std::vector<double> components;
    // Sum of all covariance eigenvalues at fit time; not persisted.
    double total_variance = 0.0;

    std::span<const double> component(std::size_t k) const {
        return {components.data() + k * input_dim, input_dim};
    }

    double retained_variance_ratio() const;
};

inline constexpr double kDefaultWhiteningEpsilon = 1e-8;

/// Fits mean, top-`output_dim` covariance eigenvectors and eigenvalues.
/// The samples are expected to be L2-normalized already; the fit uses them
/// as given. Throws FitError when there are fewer samples than output_dim
/// or the covariance rank is below output_dim.
TransformModel fit_transform_model(const FeatureMatrix& samples, std::uint32_t output_dim,
                                   double epsilon = kDefaultWhiteningEpsilon);

/// Whitened projection of l2_normalize(v) before the final normalization.
std::vector<double> whiten(const TransformModel& model, std::span<const float> v);

/// Full transform: l2_normalize(whiten(model, v)). Output norm is 1, or 0
/// when the whitened projection vanishes.
std::vector<float> apply_transform(const TransformModel& model, std::span<const float> v);

/// Throws ValidationError if orthonormality or eigenvalue ordering fails.
void validate_transform_model(const TransformModel& model);

void save_transform_model(const TransformModel& model, std::ostream& out);
void save_transform_model(const TransformModel& model, const std::filesystem::path& path);
TransformModel load_transform_model(std::istream& in);
TransformModel load_transform_model(const std::filesystem::path& path);

/// Corner-aligned bilinear interpolation of every feature map to
/// (factor*N) x (factor*M). Pixel geometry (W, H) is carried unchanged.
FeatureTensor bilinear_upsample(const FeatureTensor& tensor, std::uint32_t factor);

/// Gaussian spatial prior, peak-normalized to 1.
struct CenterPriorGrid {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<double> weights;

    double at(std::uint32_t i, std::uint32_t j) const { return weights[std::size_t{i} * cols + j]; }
};

inline constexpr double kDefaultCenterPriorSigmaFraction = 1.0 / 3.0;

/// weight(i, j) = exp(-d^2 / (2 sigma^2)), d measured in cells from the grid
/// center, sigma = sigma_fraction * min(rows, cols), rescaled so max = 1.
CenterPriorGrid center_prior_grid(std::uint32_t rows, std::uint32_t cols,
                                  double sigma_fraction = kDefaultCenterPriorSigmaFraction);

/// Sum-pooled (then L2-normalized) depth-vector of a tensor. Only used as a
/// dense comparison baseline.
std::vector<float> sum_pool(const FeatureTensor& tensor);

}  // namespace vws
