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

#include "vws/codebook.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "vws/binary_io.h"
#include "vws/errors.h"
#include "vws/parallel.h"
#include "vws/random.h"

namespace vws {
namespace {

constexpr char kCodebookMagic[5] = "CBK1";
constexpr char kMapMagic[5] = "AMP1";
constexpr std::uint32_t kCodebookVersion = 1;
constexpr std::uint32_t kMapVersion = 1;

template <typename A, typename B>
double squared_distance(std::span<const A> a, std::span<const B> b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = static_cast<double>(a[d]) - static_cast<double>(b[d]);
        s += diff * diff;
    }
    return s;
}

// Working state of one k-means run; centroids are kept in double until the
// fit completes.
class Lloyd {
 public:
    Lloyd(const FeatureMatrix& x, std::uint32_t k, unsigned jobs)
        : x_(x), k_(k), dim_(x.dim()), jobs_(jobs), centroids_(std::size_t{k} * x.dim()),
          labels_(x.rows(), 0), dist_(x.rows(), 0.0) {}

    void seed_plus_plus(Rng& rng) {
        const std::size_t n = x_.rows();
        std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
        std::size_t pick = rng.below(n);
        for (std::uint32_t c = 0; c < k_; ++c) {
            if (c > 0) {
                const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
                if (!(total > 0.0)) {
                    throw FitError("fit_codebook: sample has fewer than K=" + std::to_string(k_) +
                                   " distinct points");
                }
                const double target = rng.uniform() * total;
                double acc = 0.0;
                pick = n;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += nearest[i];
                    if (acc > target && nearest[i] > 0.0) {
                        pick = i;
                        break;
                    }
                }
                if (pick == n) {
                    // Rounding left target past the running sum; take the
                    // last point that still has positive mass.
                    for (std::size_t i = n; i-- > 0;) {
                        if (nearest[i] > 0.0) {
                            pick = i;
                            break;
                        }
                    }
                }
            }
            const auto src = x_.row(pick);
            std::copy(src.begin(), src.end(), centroids_.begin() + std::size_t{c} * dim_);
            const std::span<const double> cen(centroids_.data() + std::size_t{c} * dim_, dim_);
            for (std::size_t i = 0; i < n; ++i) {
                nearest[i] = std::min(nearest[i], squared_distance(x_.row(i), cen));
            }
        }
    }

    // Returns the number of labels that changed and the total error.
    std::pair<std::size_t, double> assign_all() {
        const std::size_t n = x_.rows();
        std::vector<char> changed(n, 0);
        parallel_for(n, jobs_, [&](std::size_t i) {
            const auto row = x_.row(i);
            std::uint32_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::uint32_t c = 0; c < k_; ++c) {
                const double d = squared_distance(row, centroid(c));
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            changed[i] = labels_[i] != best;
            labels_[i] = best;
            dist_[i] = best_d;
        });
        const std::size_t n_changed = static_cast<std::size_t>(std::count(changed.begin(), changed.end(), 1));
        return {n_changed, std::accumulate(dist_.begin(), dist_.end(), 0.0)};
    }

    void update() {
        const std::size_t n = x_.rows();
        std::vector<double> sums(centroids_.size(), 0.0);
        std::vector<std::size_t> counts(k_, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = x_.row(i);
            double* s = sums.data() + std::size_t{labels_[i]} * dim_;
            for (std::size_t d = 0; d < dim_; ++d) {
                s[d] += row[d];
            }
            ++counts[labels_[i]];
        }
        std::vector<std::uint32_t> empty;
        for (std::uint32_t c = 0; c < k_; ++c) {
            if (counts[c] == 0) {
                empty.push_back(c);
                continue;
            }
            for (std::size_t d = 0; d < dim_; ++d) {
                centroids_[std::size_t{c} * dim_ + d] = sums[std::size_t{c} * dim_ + d] / counts[c];
            }
        }
        // An empty cluster takes over the point lying farthest from its
        // nearest live centroid, which therefore duplicates no centroid.
        for (std::uint32_t c : empty) {
            std::size_t far = n;
            double far_d = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[labels_[i]] <= 1) {
                    continue;  // don't empty another cluster
                }
                double nd = std::numeric_limits<double>::infinity();
                for (std::uint32_t o = 0; o < k_; ++o) {
                    if (o != c) {
                        nd = std::min(nd, squared_distance(x_.row(i), centroid(o)));
                    }
                }
                if (nd > far_d) {
                    far_d = nd;
                    far = i;
                }
            }
            if (far == n) {
                continue;  // keep the stale centroid
            }
            const auto src = x_.row(far);
            std::copy(src.begin(), src.end(), centroids_.begin() + std::size_t{c} * dim_);
            --counts[labels_[far]];
            labels_[far] = c;
            counts[c] = 1;
        }
    }

    std::span<const double> centroid(std::uint32_t c) const {
        return {centroids_.data() + std::size_t{c} * dim_, dim_};
    }
    const std::vector<double>& centroids() const { return centroids_; }

 private:
    const FeatureMatrix& x_;
    std::uint32_t k_;
    std::size_t dim_;
    unsigned jobs_;
    std::vector<double> centroids_;
    std::vector<std::uint32_t> labels_;
    std::vector<double> dist_;
};

}  // namespace

Codebook fit_codebook(const FeatureMatrix& features, const KMeansOptions& opt, KMeansReport* report) {
    if (opt.k == 0) {
        throw ValidationError("fit_codebook: K must be >= 1");
    }
    if (features.dim() == 0) {
        throw ValidationError("fit_codebook: empty feature dimension");
    }
    if (features.rows() < opt.k) {
        throw FitError("fit_codebook: sample of " + std::to_string(features.rows()) +
                       " features is smaller than K=" + std::to_string(opt.k));
    }
    Rng rng(static_cast<std::uint64_t>(opt.seed));
    Lloyd lloyd(features, opt.k, opt.jobs);
    lloyd.seed_plus_plus(rng);

    KMeansReport rep;
    auto [changed, error] = lloyd.assign_all();
    rep.initial_error = error;
    rep.errors.push_back(error);
    for (std::uint32_t it = 0; it < opt.max_iters; ++it) {
        lloyd.update();
        ++rep.iterations;
        std::tie(changed, error) = lloyd.assign_all();
        rep.errors.push_back(error);
        if (changed == 0) {
            rep.converged = true;
            break;
        }
    }

    Codebook cb;
    cb.size = opt.k;
    cb.dim = static_cast<std::uint32_t>(features.dim());
    cb.seed = opt.seed;
    cb.centroids.assign(lloyd.centroids().begin(), lloyd.centroids().end());
    try {
        validate_codebook(cb);
    } catch (const ValidationError& e) {
        throw FitError(std::string("fit_codebook: ") + e.what());
    }
    if (report != nullptr) {
        *report = std::move(rep);
    }
    return cb;
}

WordId assign(const Codebook& cb, std::span<const float> feature) {
    if (feature.size() != cb.dim) {
        throw ValidationError("assign: feature dimension " + std::to_string(feature.size()) +
                              " does not match codebook dimension " + std::to_string(cb.dim));
    }
    WordId best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (WordId k = 0; k < cb.size; ++k) {
        const double d = squared_distance(feature, cb.centroid(k));
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

double quantization_error(const Codebook& cb, const FeatureMatrix& features) {
    double total = 0.0;
    for (std::size_t i = 0; i < features.rows(); ++i) {
        total += squared_distance(features.row(i), cb.centroid(assign(cb, features.row(i))));
    }
    return total;
}

void validate_codebook(const Codebook& cb) {
    if (cb.size == 0 || cb.dim == 0) {
        throw ValidationError("codebook: K and dimension must be >= 1");
    }
    if (cb.centroids.size() != std::size_t{cb.size} * cb.dim) {
        throw ValidationError("codebook: centroid array size disagrees with K x dim");
    }
    for (float v : cb.centroids) {
        if (!std::isfinite(v)) {
            throw ValidationError("codebook: non-finite centroid entry");
        }
    }
    std::vector<WordId> order(cb.size);
    std::iota(order.begin(), order.end(), WordId{0});
    auto less = [&](WordId a, WordId b) {
        const auto ca = cb.centroid(a);
        const auto cbk = cb.centroid(b);
        return std::lexicographical_compare(ca.begin(), ca.end(), cbk.begin(), cbk.end());
    };
    std::sort(order.begin(), order.end(), less);
    for (std::size_t i = 1; i < order.size(); ++i) {
        const auto a = cb.centroid(order[i - 1]);
        const auto b = cb.centroid(order[i]);
        if (std::equal(a.begin(), a.end(), b.begin())) {
            throw ValidationError("codebook: centroids " + std::to_string(order[i - 1]) + " and " +
                                  std::to_string(order[i]) + " are identical");
        }
    }
}

void save_codebook(const Codebook& cb, std::ostream& out) {
    validate_codebook(cb);
    binio::put_magic(out, kCodebookMagic);
    binio::put_u32(out, kCodebookVersion);
    binio::put_u32(out, cb.size);
    binio::put_u32(out, cb.dim);
    binio::put_i64(out, cb.seed);
    for (float v : cb.centroids) {
        binio::put_f32(out, v);
    }
    if (!out) {
        throw IoError("failed writing codebook");
    }
}

void save_codebook(const Codebook& cb, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    save_codebook(cb, out);
    out.flush();
    if (!out) {
        throw IoError(path.string() + ": write failed");
    }
}

Codebook load_codebook(std::istream& in) {
    binio::expect_magic(in, kCodebookMagic);
    binio::expect_version(in, kCodebookVersion, "codebook");
    Codebook cb;
    cb.size = binio::get_u32(in, "codebook header");
    cb.dim = binio::get_u32(in, "codebook header");
    if (std::uint64_t{cb.size} * cb.dim > (std::uint64_t{1} << 30)) {
        throw FormatError("codebook header declares an implausible size");
    }
    cb.seed = binio::get_i64(in, "codebook header");
    cb.centroids.resize(std::size_t{cb.size} * cb.dim);
    for (auto& v : cb.centroids) {
        v = binio::get_f32(in, "codebook centroids");
    }
    validate_codebook(cb);
    return cb;
}

Codebook load_codebook(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return load_codebook(in);
}

void validate_assignment_map(const AssignmentMap& map) {
    if (map.rows == 0 || map.cols == 0 || map.width == 0 || map.height == 0) {
        throw ValidationError("assignment map '" + map.image_id + "': N, M, W, H must be >= 1");
    }
    if (map.words.size() != std::size_t{map.rows} * map.cols) {
        throw ValidationError("assignment map '" + map.image_id + "': word grid size mismatch");
    }
    if (map.vocabulary_size == 0) {
        throw ValidationError("assignment map '" + map.image_id + "': vocabulary size unset");
    }
    for (WordId w : map.words) {
        if (w >= map.vocabulary_size) {
            throw ValidationError("assignment map '" + map.image_id + "': word id " +
                                  std::to_string(w) + " >= K=" + std::to_string(map.vocabulary_size));
        }
    }
}

AssignmentMap build_assignment_map(const Codebook& cb, const FeatureTensor& tensor,
                                   const TransformModel& model, std::uint32_t upsample_factor) {
    if (tensor.depth != model.input_dim) {
        throw ValidationError("build_assignment_map: tensor depth " + std::to_string(tensor.depth) +
                              " does not match transform input dimension " +
                              std::to_string(model.input_dim));
    }
    if (model.output_dim != cb.dim) {
        throw ValidationError("build_assignment_map: transform output dimension does not match codebook");
    }
    const FeatureTensor up = bilinear_upsample(tensor, upsample_factor);
    AssignmentMap map;
    map.image_id = up.image_id;
    map.rows = up.rows;
    map.cols = up.cols;
    map.width = up.width;
    map.height = up.height;
    map.vocabulary_size = cb.size;
    map.words.resize(up.cell_count());
    for (std::uint32_t n = 0; n < up.rows; ++n) {
        for (std::uint32_t m = 0; m < up.cols; ++m) {
            const std::vector<float> local = up.local_feature(n, m);
            map.at(n, m) = assign(cb, apply_transform(model, local));
        }
    }
    return map;
}

void save_assignment_map(const AssignmentMap& map, std::ostream& out) {
    validate_assignment_map(map);
    binio::put_magic(out, kMapMagic);
    binio::put_u32(out, kMapVersion);
    binio::put_u32(out, map.rows);
    binio::put_u32(out, map.cols);
    binio::put_u32(out, map.width);
    binio::put_u32(out, map.height);
    binio::put_string(out, map.image_id);
    for (WordId w : map.words) {
        binio::put_u32(out, w);
    }
    if (!out) {
        throw IoError("failed writing assignment map '" + map.image_id + "'");
    }
}

void save_assignment_map(const AssignmentMap& map, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    save_assignment_map(map, out);
    out.flush();
    if (!out) {
        throw IoError(path.string() + ": write failed");
    }
}

AssignmentMap load_assignment_map(std::istream& in, std::uint32_t vocabulary_size) {
    binio::expect_magic(in, kMapMagic);
    binio::expect_version(in, kMapVersion, "assignment map");
    AssignmentMap map;
    map.rows = binio::get_u32(in, "assignment map header");
    map.cols = binio::get_u32(in, "assignment map header");
    map.width = binio::get_u32(in, "assignment map header");
    map.height = binio::get_u32(in, "assignment map header");
    map.image_id = binio::get_string(in, "assignment map image id");
    map.vocabulary_size = vocabulary_size;
    if (std::uint64_t{map.rows} * map.cols > (std::uint64_t{1} << 30)) {
        throw FormatError("assignment map header declares an implausible size");
    }
    map.words.resize(std::size_t{map.rows} * map.cols);
    for (auto& w : map.words) {
        w = binio::get_u32(in, "assignment map words");
    }
    validate_assignment_map(map);
    return map;
}

AssignmentMap load_assignment_map(const std::filesystem::path& path, std::uint32_t vocabulary_size) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return load_assignment_map(in, vocabulary_size);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace vws
