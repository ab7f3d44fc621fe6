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


#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.h"
#include "vws/codebook.h"
#include "vws/errors.h"
#include "vws/preprocess.h"
#include "vws/synth.h"

using namespace vws;

namespace {

Codebook grid_codebook(std::uint32_t k, std::uint32_t dim) {
    Codebook cb;
    cb.size = k;
    cb.dim = dim;
    cb.centroids.resize(std::size_t{k} * dim);
    for (std::uint32_t i = 0; i < k; ++i) {
        for (std::uint32_t d = 0; d < dim; ++d) {
            cb.centroids[std::size_t{i} * dim + d] = static_cast<float>((i * 7 + d * 3) % 11) - 5.0f;
        }
    }
    return cb;
}

std::vector<std::vector<double>> as_double(const Codebook& cb) {
    std::vector<std::vector<double>> out(cb.size);
    for (std::uint32_t k = 0; k < cb.size; ++k) {
        const auto c = cb.centroid(k);
        out[k].assign(c.begin(), c.end());
    }
    return out;
}

TransformModel identity_model(std::uint32_t dim) {
    TransformModel m;
    m.input_dim = dim;
    m.output_dim = dim;
    m.epsilon = 1e-12;
    m.mean.assign(dim, 0.0);
    m.eigenvalues.assign(dim, 1.0);
    m.components.assign(std::size_t{dim} * dim, 0.0);
    for (std::uint32_t d = 0; d < dim; ++d) {
        m.components[std::size_t{d} * dim + d] = 1.0;
    }
    return m;
}

}  // namespace

TEST(FitCodebook, RecoversSeparatedClusters) {
    const ClusteredFeatures data = gen_clustered_features(3, 4, 3, 300, 0.05, 4.0);
    KMeansOptions opt;
    opt.k = 3;
    opt.seed = 17;
    const Codebook cb = fit_codebook(data.features, opt);
    ASSERT_EQ(cb.size, 3u);
    for (std::size_t c = 0; c < 3; ++c) {
        double best = INFINITY;
        for (std::uint32_t k = 0; k < 3; ++k) {
            double worst = 0.0;
            for (std::size_t d = 0; d < 4; ++d) {
                worst = std::max(worst, std::abs(double{cb.centroid(k)[d]} - data.centers.row(c)[d]));
            }
            best = std::min(best, worst);
        }
        EXPECT_LT(best, 0.05) << "cluster " << c;
    }
}

TEST(FitCodebook, KEqualsSampleSize) {
    const ClusteredFeatures data = gen_clustered_features(4, 3, 10, 1, 0.5, 1.0);
    KMeansOptions opt;
    opt.k = 10;
    opt.seed = 1;
    const Codebook cb = fit_codebook(data.features, opt);
    EXPECT_EQ(quantization_error(cb, data.features), 0.0);
    std::vector<bool> used(10, false);
    for (std::uint32_t k = 0; k < 10; ++k) {
        bool found = false;
        for (std::size_t i = 0; i < 10; ++i) {
            const auto row = data.features.row(i);
            if (std::equal(row.begin(), row.end(), cb.centroid(k).begin())) {
                EXPECT_FALSE(used[i]);
                used[i] = true;
                found = true;
            }
        }
        EXPECT_TRUE(found) << "centroid " << k << " is not a sample";
    }
}

TEST(FitCodebook, DeterministicForSeed) {
    const ClusteredFeatures data = gen_clustered_features(8, 6, 5, 80, 0.3, 1.5);
    KMeansOptions opt;
    opt.k = 7;
    opt.seed = 99;
    const Codebook a = fit_codebook(data.features, opt);
    opt.jobs = 4;
    const Codebook b = fit_codebook(data.features, opt);
    EXPECT_EQ(a, b);
    std::ostringstream sa;
    std::ostringstream sb;
    save_codebook(a, sa);
    save_codebook(b, sb);
    EXPECT_EQ(sa.str(), sb.str());
    opt.seed = 100;
    EXPECT_NE(fit_codebook(data.features, opt).centroids, a.centroids);
}

TEST(FitCodebook, ErrorNeverIncreases) {
    const ClusteredFeatures data = gen_clustered_features(12, 5, 12, 40, 0.6, 1.0);
    KMeansOptions opt;
    opt.k = 16;
    opt.seed = 5;
    KMeansReport report;
    const Codebook cb = fit_codebook(data.features, opt, &report);
    ASSERT_FALSE(report.errors.empty());
    EXPECT_LE(report.errors.front(), report.initial_error + 1e-9);
    for (std::size_t i = 1; i < report.errors.size(); ++i) {
        EXPECT_LE(report.errors[i], report.errors[i - 1] + 1e-9);
    }
    EXPECT_NEAR(report.errors.back(), quantization_error(cb, data.features), 1e-6 * report.errors.back() + 1e-12);
    EXPECT_NO_THROW(validate_codebook(cb));

    KMeansOptions one = opt;
    one.k = 1;
    EXPECT_LT(quantization_error(cb, data.features), quantization_error(fit_codebook(data.features, one), data.features));
}

TEST(FitCodebook, Errors) {
    const ClusteredFeatures data = gen_clustered_features(1, 2, 2, 3, 0.1, 1.0);
    KMeansOptions opt;
    opt.k = 0;
    EXPECT_THROW(fit_codebook(data.features, opt), ValidationError);
    opt.k = 7;
    EXPECT_THROW(fit_codebook(data.features, opt), FitError);

    FeatureMatrix dup(2);
    for (int i = 0; i < 10; ++i) {
        dup.append(std::vector<float>{static_cast<float>(i % 2), 0.0f});
    }
    opt.k = 3;
    EXPECT_THROW(fit_codebook(dup, opt), FitError);
}

TEST(Assign, ExactMatchAndTieBreak) {
    const Codebook cb = grid_codebook(12, 4);
    EXPECT_EQ(assign(cb, cb.centroid(7)), 7u);

    Codebook tie;
    tie.size = 6;
    tie.dim = 1;
    tie.centroids = {10.0f, 20.0f, -1.0f, 30.0f, 40.0f, 1.0f};
    const std::vector<float> zero{0.0f};
    EXPECT_EQ(assign(tie, zero), 2u);

    const std::vector<float> wrong(5, 0.0f);
    EXPECT_THROW(assign(cb, wrong), ValidationError);
}

TEST(Assign, MatchesExhaustiveScan) {
    std::mt19937_64 gen(21);
    std::normal_distribution<float> z(0.0f, 1.0f);
    Codebook cb;
    cb.size = 64;
    cb.dim = 16;
    cb.centroids.resize(64 * 16);
    for (auto& v : cb.centroids) {
        v = z(gen);
    }
    const auto oracle = as_double(cb);
    std::vector<float> x(16);
    for (int i = 0; i < 1000; ++i) {
        for (auto& v : x) {
            v = z(gen);
        }
        ASSERT_EQ(assign(cb, x), vws::testing::scan_nearest(oracle, std::vector<double>(x.begin(), x.end())));
    }
}

TEST(CodebookIo, RoundTripAndValidation) {
    Codebook cb = grid_codebook(5, 3);
    cb.seed = -42;
    std::stringstream buf;
    save_codebook(cb, buf);
    EXPECT_EQ(buf.str().size(), 4u + 4 + 4 + 4 + 8 + 4 * 15);
    EXPECT_EQ(load_codebook(buf), cb);

    Codebook dup = cb;
    std::copy_n(dup.centroids.begin(), 3, dup.centroids.begin() + 6);
    EXPECT_THROW(validate_codebook(dup), ValidationError);
    std::ostringstream sink;
    EXPECT_THROW(save_codebook(dup, sink), ValidationError);

    Codebook nan = cb;
    nan.centroids[4] = std::nanf("");
    EXPECT_THROW(validate_codebook(nan), ValidationError);

    std::ostringstream ok;
    save_codebook(cb, ok);
    std::istringstream cut(ok.str().substr(0, ok.str().size() - 1));
    EXPECT_THROW(load_codebook(cut), TruncationError);
}

TEST(AssignmentMap, UniformTensorGivesUniformMap) {
    const Codebook cb = grid_codebook(8, 4);
    const TransformModel m = identity_model(4);
    // The transform normalizes, so plant a direction the codebook holds.
    Codebook unit = cb;
    for (std::uint32_t k = 0; k < unit.size; ++k) {
        const auto n = l2_normalize(cb.centroid(k));
        std::copy(n.begin(), n.end(), unit.centroids.begin() + std::size_t{k} * 4);
    }
    FeatureTensor t;
    t.image_id = "u";
    t.depth = 4;
    t.rows = 3;
    t.cols = 5;
    t.width = 50;
    t.height = 30;
    t.data.resize(4 * 15);
    for (std::uint32_t d = 0; d < 4; ++d) {
        for (std::size_t c = 0; c < 15; ++c) {
            t.data[d * 15 + c] = 2.5f * cb.centroid(3)[d];
        }
    }
    const AssignmentMap map = build_assignment_map(unit, t, m, 1);
    EXPECT_EQ(map.rows, 3u);
    EXPECT_EQ(map.cols, 5u);
    EXPECT_EQ(map.width, 50u);
    EXPECT_EQ(map.vocabulary_size, 8u);
    for (WordId w : map.words) {
        EXPECT_EQ(w, 3u);
    }
}

TEST(AssignmentMap, CompositionOracle) {
    const FeatureTensor raw = gen_random_tensor(2, 6, 4, 4, 64, 64);
    FeatureMatrix train(6);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const FeatureTensor t = gen_random_tensor(100 + s, 6, 4, 4, 64, 64);
        for (std::uint32_t n = 0; n < 4; ++n) {
            for (std::uint32_t m = 0; m < 4; ++m) {
                train.append(l2_normalize(t.local_feature(n, m)));
            }
        }
    }
    const TransformModel model = fit_transform_model(train, 4);
    FeatureMatrix projected(4);
    for (std::size_t i = 0; i < train.rows(); ++i) {
        projected.append(apply_transform(model, train.row(i)));
    }
    KMeansOptions opt;
    opt.k = 10;
    opt.seed = 3;
    const Codebook cb = fit_codebook(projected, opt);

    // factor 1: plain per-feature composition.
    const AssignmentMap direct = build_assignment_map(cb, raw, model, 1);
    for (std::uint32_t n = 0; n < 4; ++n) {
        for (std::uint32_t m = 0; m < 4; ++m) {
            EXPECT_EQ(direct.at(n, m), assign(cb, apply_transform(model, raw.local_feature(n, m))));
        }
    }

    // factor 2: upsample, transform, assign, cell by cell.
    const AssignmentMap map = build_assignment_map(cb, raw, model, 2);
    const FeatureTensor up = bilinear_upsample(raw, 2);
    ASSERT_EQ(map.rows, 8u);
    ASSERT_EQ(map.cols, 8u);
    const auto centroids = as_double(cb);
    for (std::uint32_t n = 0; n < 8; ++n) {
        for (std::uint32_t m = 0; m < 8; ++m) {
            const auto f = apply_transform(model, up.local_feature(n, m));
            EXPECT_EQ(map.at(n, m), vws::testing::scan_nearest(centroids, std::vector<double>(f.begin(), f.end())));
        }
    }
    EXPECT_THROW(build_assignment_map(cb, gen_random_tensor(1, 5, 2, 2, 8, 8), model, 1), ValidationError);
}

TEST(AssignmentMap, IoRoundTrip) {
    std::mt19937_64 gen(4);
    AssignmentMap m = vws::testing::random_map(gen, 5, 7, 30, "doc/7");
    std::stringstream buf;
    save_assignment_map(m, buf);
    EXPECT_EQ(load_assignment_map(buf, 30), m);

    std::stringstream again;
    save_assignment_map(m, again);
    EXPECT_THROW(load_assignment_map(again, 10), ValidationError);

    m.words[3] = 30;
    EXPECT_THROW(validate_assignment_map(m), ValidationError);
}
