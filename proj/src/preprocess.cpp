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

#include "vws/preprocess.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "vws/binary_io.h"
#include "vws/errors.h"

namespace vws {
namespace {

constexpr char kModelMagic[5] = "PCA1";
constexpr std::uint32_t kModelVersion = 1;

// Eigenvalues at or below this fraction of the largest are treated as zero
// when measuring covariance rank.
constexpr double kRankTolerance = 1e-10;

}  // namespace

std::vector<float> l2_normalize(std::span<const float> v) {
    double sq = 0.0;
    for (float x : v) {
        if (!std::isfinite(x)) {
            throw ValidationError("l2_normalize: non-finite component");
        }
        sq += double{x} * x;
    }
    std::vector<float> out(v.begin(), v.end());
    if (sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sq);
        for (auto& x : out) {
            x = static_cast<float>(x * inv);
        }
    }
    return out;
}

double TransformModel::retained_variance_ratio() const {
    if (total_variance <= 0.0) {
        return 0.0;
    }
    return std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0) / total_variance;
}

TransformModel fit_transform_model(const FeatureMatrix& samples, std::uint32_t output_dim,
                                   double epsilon) {
    const std::size_t dim = samples.dim();
    const std::size_t n = samples.rows();
    if (dim == 0) {
        throw ValidationError("fit_transform_model: empty feature dimension");
    }
    if (output_dim == 0 || output_dim > dim) {
        throw ValidationError("fit_transform_model: output_dim must lie in [1, " +
                              std::to_string(dim) + "]");
    }
    if (!(epsilon > 0.0)) {
        throw ValidationError("fit_transform_model: epsilon must be positive");
    }
    if (n < output_dim) {
        throw FitError("fit_transform_model: " + std::to_string(n) + " samples for output_dim " +
                       std::to_string(output_dim));
    }

    Eigen::MatrixXd x(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = samples.row(i);
        for (std::size_t d = 0; d < dim; ++d) {
            x(i, d) = r[d];
        }
    }
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw FitError("fit_transform_model: eigendecomposition failed");
    }
    // Eigen sorts ascending.
    const Eigen::VectorXd& evals = solver.eigenvalues();
    const Eigen::MatrixXd& evecs = solver.eigenvectors();
    const double largest = evals(static_cast<Eigen::Index>(dim) - 1);
    std::size_t rank = 0;
    if (largest > 0.0) {
        for (Eigen::Index k = 0; k < evals.size(); ++k) {
            if (evals(k) > largest * kRankTolerance) {
                ++rank;
            }
        }
    }
    if (rank < output_dim) {
        throw FitError("fit_transform_model: covariance rank " + std::to_string(rank) +
                       " is below output_dim " + std::to_string(output_dim));
    }

    TransformModel model;
    model.input_dim = static_cast<std::uint32_t>(dim);
    model.output_dim = output_dim;
    model.epsilon = epsilon;
    model.mean.assign(mean.data(), mean.data() + dim);
    model.total_variance = std::max(0.0, evals.sum());
    model.eigenvalues.reserve(output_dim);
    model.components.reserve(std::size_t{output_dim} * dim);
    for (std::uint32_t k = 0; k < output_dim; ++k) {
        const Eigen::Index col = static_cast<Eigen::Index>(dim) - 1 - k;
        Eigen::VectorXd v = evecs.col(col);
        // Sign convention: the entry of largest magnitude is positive.
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) {
            v = -v;
        }
        model.eigenvalues.push_back(evals(col));
        model.components.insert(model.components.end(), v.data(), v.data() + dim);
    }
    return model;
}

std::vector<double> whiten(const TransformModel& model, std::span<const float> v) {
    if (v.size() != model.input_dim) {
        throw ValidationError("apply_transform: expected dimension " +
                              std::to_string(model.input_dim) + ", got " +
                              std::to_string(v.size()));
    }
    const std::vector<float> unit = l2_normalize(v);
    std::vector<double> centered(model.input_dim);
    for (std::size_t d = 0; d < centered.size(); ++d) {
        centered[d] = double{unit[d]} - model.mean[d];
    }
    std::vector<double> out(model.output_dim);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto c = model.component(k);
        double dot = 0.0;
        for (std::size_t d = 0; d < centered.size(); ++d) {
            dot += c[d] * centered[d];
        }
        out[k] = dot / std::sqrt(model.eigenvalues[k] + model.epsilon);
    }
    return out;
}

std::vector<float> apply_transform(const TransformModel& model, std::span<const float> v) {
    const std::vector<double> w = whiten(model, v);
    double sq = 0.0;
    for (double x : w) {
        sq += x * x;
    }
    std::vector<float> out(w.size(), 0.0f);
    if (sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sq);
        for (std::size_t k = 0; k < w.size(); ++k) {
            out[k] = static_cast<float>(w[k] * inv);
        }
    }
    return out;
}

void validate_transform_model(const TransformModel& m) {
    if (m.input_dim == 0 || m.output_dim == 0 || m.output_dim > m.input_dim) {
        throw ValidationError("transform model: invalid dimensions");
    }
    if (m.mean.size() != m.input_dim || m.eigenvalues.size() != m.output_dim ||
        m.components.size() != std::size_t{m.output_dim} * m.input_dim) {
        throw ValidationError("transform model: array sizes disagree with dimensions");
    }
    if (!(m.epsilon > 0.0)) {
        throw ValidationError("transform model: epsilon must be positive");
    }
    for (std::size_t k = 0; k < m.output_dim; ++k) {
        if (!(m.eigenvalues[k] > 0.0)) {
            throw ValidationError("transform model: eigenvalues must be positive");
        }
        if (k > 0 && m.eigenvalues[k] > m.eigenvalues[k - 1]) {
            throw ValidationError("transform model: eigenvalues must be sorted descending");
        }
    }
    for (std::size_t a = 0; a < m.output_dim; ++a) {
        for (std::size_t b = a; b < m.output_dim; ++b) {
            const auto ca = m.component(a);
            const auto cb = m.component(b);
            double dot = 0.0;
            for (std::size_t d = 0; d < m.input_dim; ++d) {
                dot += ca[d] * cb[d];
            }
            const double expected = a == b ? 1.0 : 0.0;
            if (std::abs(dot - expected) > 1e-5) {
                throw ValidationError("transform model: components are not orthonormal");
            }
        }
    }
}

void save_transform_model(const TransformModel& m, std::ostream& out) {
    validate_transform_model(m);
    binio::put_magic(out, kModelMagic);
    binio::put_u32(out, kModelVersion);
    binio::put_u32(out, m.input_dim);
    binio::put_u32(out, m.output_dim);
    binio::put_f64(out, m.epsilon);
    for (double v : m.mean) binio::put_f64(out, v);
    for (double v : m.eigenvalues) binio::put_f64(out, v);
    for (double v : m.components) binio::put_f64(out, v);
    if (!out) {
        throw IoError("failed writing transform model");
    }
}

void save_transform_model(const TransformModel& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    save_transform_model(m, out);
    out.flush();
    if (!out) {
        throw IoError(path.string() + ": write failed");
    }
}

TransformModel load_transform_model(std::istream& in) {
    binio::expect_magic(in, kModelMagic);
    binio::expect_version(in, kModelVersion, "transform model");
    TransformModel m;
    m.input_dim = binio::get_u32(in, "transform model header");
    m.output_dim = binio::get_u32(in, "transform model header");
    if (m.input_dim == 0 || m.output_dim == 0 || m.output_dim > m.input_dim ||
        m.input_dim > (1u << 16)) {
        throw FormatError("transform model: invalid dimensions in header");
    }
    m.epsilon = binio::get_f64(in, "transform model header");
    m.mean.resize(m.input_dim);
    m.eigenvalues.resize(m.output_dim);
    m.components.resize(std::size_t{m.output_dim} * m.input_dim);
    for (auto& v : m.mean) v = binio::get_f64(in, "transform model mean");
    for (auto& v : m.eigenvalues) v = binio::get_f64(in, "transform model eigenvalues");
    for (auto& v : m.components) v = binio::get_f64(in, "transform model components");
    m.total_variance = std::accumulate(m.eigenvalues.begin(), m.eigenvalues.end(), 0.0);
    validate_transform_model(m);
    return m;
}

TransformModel load_transform_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return load_transform_model(in);
}

FeatureTensor bilinear_upsample(const FeatureTensor& t, std::uint32_t factor) {
    if (factor == 0) {
        throw ValidationError("bilinear_upsample: factor must be >= 1");
    }
    validate_tensor(t);
    if (factor == 1) {
        return t;
    }
    FeatureTensor out;
    out.image_id = t.image_id;
    out.depth = t.depth;
    out.rows = t.rows * factor;
    out.cols = t.cols * factor;
    out.width = t.width;
    out.height = t.height;
    out.data.resize(std::size_t{out.depth} * out.rows * out.cols);

    // Corner alignment: output index o samples source coordinate
    // o * (in - 1) / (out - 1).
    struct Tap {
        std::uint32_t lo;
        std::uint32_t hi;
        double frac;
    };
    auto taps = [](std::uint32_t in, std::uint32_t outn) {
        std::vector<Tap> v(outn);
        for (std::uint32_t o = 0; o < outn; ++o) {
            if (in == 1) {
                v[o] = {0, 0, 0.0};
                continue;
            }
            const double src = static_cast<double>(o) * (in - 1) / (outn - 1);
            auto lo = static_cast<std::uint32_t>(std::floor(src));
            lo = std::min(lo, in - 1);
            const std::uint32_t hi = std::min(lo + 1, in - 1);
            v[o] = {lo, hi, src - lo};
        }
        return v;
    };
    const auto row_taps = taps(t.rows, out.rows);
    const auto col_taps = taps(t.cols, out.cols);

    for (std::uint32_t d = 0; d < t.depth; ++d) {
        for (std::uint32_t i = 0; i < out.rows; ++i) {
            const Tap& r = row_taps[i];
            for (std::uint32_t j = 0; j < out.cols; ++j) {
                const Tap& c = col_taps[j];
                const double top = (1.0 - c.frac) * t.at(d, r.lo, c.lo) + c.frac * t.at(d, r.lo, c.hi);
                const double bottom = (1.0 - c.frac) * t.at(d, r.hi, c.lo) + c.frac * t.at(d, r.hi, c.hi);
                out.at(d, i, j) = static_cast<float>((1.0 - r.frac) * top + r.frac * bottom);
            }
        }
    }
    return out;
}

CenterPriorGrid center_prior_grid(std::uint32_t rows, std::uint32_t cols, double sigma_fraction) {
    if (rows == 0 || cols == 0) {
        throw ValidationError("center_prior_grid: rows and cols must be >= 1");
    }
    if (!(sigma_fraction > 0.0) || !std::isfinite(sigma_fraction)) {
        throw ValidationError("center_prior_grid: sigma_fraction must be positive");
    }
    const double sigma = sigma_fraction * std::min(rows, cols);
    CenterPriorGrid grid{rows, cols, std::vector<double>(std::size_t{rows} * cols)};
    // Offsets are kept in half-cell integer units so mirrored cells get
    // bit-identical weights.
    double peak = 0.0;
    for (std::uint32_t i = 0; i < rows; ++i) {
        const long long di = 2LL * i - (rows - 1LL);
        for (std::uint32_t j = 0; j < cols; ++j) {
            const long long dj = 2LL * j - (cols - 1LL);
            const double d2 = static_cast<double>(di * di + dj * dj) / 4.0;
            const double w = std::exp(-d2 / (2.0 * sigma * sigma));
            grid.weights[std::size_t{i} * cols + j] = w;
            peak = std::max(peak, w);
        }
    }
    for (auto& w : grid.weights) {
        w /= peak;
    }
    return grid;
}

std::vector<float> sum_pool(const FeatureTensor& t) {
    validate_tensor(t);
    std::vector<float> pooled(t.depth);
    const std::size_t cells = t.cell_count();
    for (std::uint32_t d = 0; d < t.depth; ++d) {
        double s = 0.0;
        for (std::size_t c = 0; c < cells; ++c) {
            s += t.data[d * cells + c];
        }
        pooled[d] = static_cast<float>(s);
    }
    return l2_normalize(pooled);
}

}  // namespace vws
