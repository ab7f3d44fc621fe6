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

// Acceptance suite: one PASS/FAIL line per acceptance criterion. Exits
// non-zero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../test_util.h"
#include "vws/bow.h"
#include "vws/codebook.h"
#include "vws/eval.h"
#include "vws/index.h"
#include "vws/parallel.h"
#include "vws/pipeline.h"
#include "vws/preprocess.h"
#include "vws/rerank.h"
#include "vws/synth.h"

namespace fs = std::filesystem;
using namespace vws;
namespace vt = vws::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// ---------------------------------------------------------------------------

Outcome index_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 gen(20240601);
    std::size_t queries = 0;
    std::size_t mismatches = 0;
    double worst = 0.0;
    for (int corpus = 0; corpus < 20; ++corpus) {
        const auto docs = static_cast<std::uint32_t>(200 + gen() % 801);
        const auto k = static_cast<std::uint32_t>(16 + gen() % 241);
        InvertedIndex index(k);
        std::vector<std::string> ids;
        std::vector<std::vector<double>> dense;
        for (std::uint32_t d = 0; d < docs; ++d) {
            const AssignmentMap m = vt::random_map(gen, 1 + gen() % 8, 1 + gen() % 8, k);
            ids.push_back("c" + std::to_string(corpus) + "_" + std::to_string((d * 7919u) % docs));
            dense.push_back(vt::dense_histogram(m, full_region(m)));
            index.add_document(ids.back(), encode_full(m));
        }
        for (int q = 0; q < 20; ++q) {
            const AssignmentMap qm = vt::random_map(gen, 1 + gen() % 5, 1 + gen() % 5, k);
            const std::size_t top = q % 2 == 0 ? docs : 10;
            const RankedList got = index.search(encode_full(qm), top);
            const auto want = vt::dense_rank(ids, dense, vt::dense_histogram(qm, full_region(qm)), top);
            ++queries;
            if (got.size() != want.size()) {
                ++mismatches;
                continue;
            }
            for (std::size_t i = 0; i < want.size(); ++i) {
                worst = std::max(worst, std::abs(got.items[i].score - want[i].score));
                if (got.items[i].doc_id != want[i].doc || std::abs(got.items[i].score - want[i].score) > 1e-6) {
                    ++mismatches;
                    break;
                }
            }
        }
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < 30.0,
            std::to_string(queries) + " queries, " + std::to_string(mismatches) + " mismatched, max |dscore| " +
                fmt("%.2e, %.2fs", worst, secs)};
}

Outcome nearest_centroid_oracle() {
    std::mt19937_64 gen(77);
    std::normal_distribution<float> z(0.0f, 1.0f);
    std::size_t mismatches = 0;
    std::size_t total = 0;
    for (int book = 0; book < 10; ++book) {
        Codebook cb;
        cb.size = 16 + static_cast<std::uint32_t>(gen() % 240);
        cb.dim = 4 + static_cast<std::uint32_t>(gen() % 60);
        cb.centroids.resize(std::size_t{cb.size} * cb.dim);
        for (auto& v : cb.centroids) {
            v = z(gen);
        }
        std::vector<std::vector<double>> oracle(cb.size);
        for (std::uint32_t k = 0; k < cb.size; ++k) {
            oracle[k].assign(cb.centroid(k).begin(), cb.centroid(k).end());
        }
        std::vector<float> x(cb.dim);
        for (int i = 0; i < 1000; ++i) {
            // Every tenth feature is a centroid itself.
            if (i % 10 == 0) {
                const auto c = cb.centroid(static_cast<WordId>(gen() % cb.size));
                x.assign(c.begin(), c.end());
            } else {
                for (auto& v : x) {
                    v = z(gen);
                }
            }
            ++total;
            mismatches += assign(cb, x) != vt::scan_nearest(oracle, std::vector<double>(x.begin(), x.end()));
        }
    }
    return {mismatches == 0 && total == 10000,
            std::to_string(total) + " assignments, " + std::to_string(mismatches) + " mismatches"};
}

Outcome bow_additivity() {
    std::mt19937_64 gen(5150);
    std::size_t failures = 0;
    double worst_prior = 0.0;
    for (int t = 0; t < 500; ++t) {
        const auto rows = static_cast<std::uint32_t>(2 + gen() % 15);
        const auto cols = static_cast<std::uint32_t>(2 + gen() % 15);
        const AssignmentMap m = vt::random_map(gen, rows, cols, 8 + static_cast<std::uint32_t>(gen() % 120));
        const std::uint32_t r0 = gen() % (rows - 1);
        const std::uint32_t c0 = gen() % (cols - 1);
        const std::uint32_t r1 = r0 + 2 + gen() % (rows - r0 - 1);
        const std::uint32_t c1 = c0 + 2 + gen() % (cols - c0 - 1);
        const MapRegion region{r0, std::min(r1, rows), c0, std::min(c1, cols)};
        const std::uint32_t rs = region.row_start + 1 + gen() % (region.rows() - 1);
        const std::uint32_t cs = region.col_start + 1 + gen() % (region.cols() - 1);
        std::vector<MapRegion> parts;
        switch (t % 3) {
            case 0:  // 2-way horizontal cut
                parts = {{region.row_start, rs, region.col_start, region.col_end},
                         {rs, region.row_end, region.col_start, region.col_end}};
                break;
            case 1:  // 2-way vertical cut
                parts = {{region.row_start, region.row_end, region.col_start, cs},
                         {region.row_start, region.row_end, cs, region.col_end}};
                break;
            default:  // 4-way
                parts = {{region.row_start, rs, region.col_start, cs},
                         {region.row_start, rs, cs, region.col_end},
                         {rs, region.row_end, region.col_start, cs},
                         {rs, region.row_end, cs, region.col_end}};
        }
        const CenterPriorGrid prior = center_prior_grid(rows, cols);
        BowVector sum(m.vocabulary_size);
        BowVector sum_prior(m.vocabulary_size);
        for (const auto& p : parts) {
            sum = add(sum, encode_region(m, p));
            sum_prior = add(sum_prior, encode_region(m, p, &prior));
        }
        const BowVector whole = encode_region(m, region);
        const BowVector whole_prior = encode_region(m, region, &prior);
        if (!(sum == whole)) {
            ++failures;
        }
        if (sum_prior.nonzeros() != whole_prior.nonzeros()) {
            ++failures;
            continue;
        }
        for (std::size_t i = 0; i < whole_prior.nonzeros(); ++i) {
            const auto& a = sum_prior.entries()[i];
            const auto& b = whole_prior.entries()[i];
            const double diff = a.word == b.word ? std::abs(a.weight - b.weight) : INFINITY;
            worst_prior = std::max(worst_prior, diff);
        }
    }
    return {failures == 0 && worst_prior <= 1e-9,
            "500 maps, " + std::to_string(failures) + " count mismatches, max prior diff " + fmt("%.2e", worst_prior)};
}

Outcome whitening_property() {
    const std::size_t dim = 12;
    const std::size_t n = 10000;
    std::mt19937_64 gen(404);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> mix(dim * dim);
    for (auto& v : mix) {
        v = z(gen);
    }
    FeatureMatrix train(dim);
    std::vector<float> row(dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < dim; ++a) {
            double s = 0.3;
            for (std::size_t b = 0; b < dim; ++b) {
                s += mix[a * dim + b] * z(gen) * (0.2 + 0.3 * static_cast<double>(b));
            }
            row[a] = static_cast<float>(s);
        }
        train.append(l2_normalize(row));
    }
    const TransformModel model = fit_transform_model(train, static_cast<std::uint32_t>(dim - 2));
    const std::size_t out = model.output_dim;
    std::vector<double> mean(out, 0.0);
    std::vector<double> cross(out * out, 0.0);
    double worst_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto w = whiten(model, train.row(i));
        for (std::size_t a = 0; a < out; ++a) {
            mean[a] += w[a];
            for (std::size_t b = 0; b < out; ++b) {
                cross[a * out + b] += w[a] * w[b];
            }
        }
        const auto y = apply_transform(model, train.row(i));
        double s = 0.0;
        for (float v : y) {
            s += double{v} * v;
        }
        const double norm = std::sqrt(s);
        worst_norm = std::max(worst_norm, std::min(std::abs(norm), std::abs(norm - 1.0)));
    }
    // Also feed inputs with a zero projection: they must map to norm 0.
    TransformModel line;
    line.input_dim = 2;
    line.output_dim = 1;
    line.mean = {1.0, 0.0};
    line.eigenvalues = {1.0};
    line.components = {0.0, 1.0};
    const auto zero = apply_transform(line, std::vector<float>{3.0f, 0.0f});
    worst_norm = std::max(worst_norm, double{std::abs(zero[0])});

    double worst_cov = 0.0;
    for (std::size_t a = 0; a < out; ++a) {
        for (std::size_t b = 0; b < out; ++b) {
            const double cov = cross[a * out + b] / n - (mean[a] / n) * (mean[b] / n);
            worst_cov = std::max(worst_cov, std::abs(cov - (a == b ? 1.0 : 0.0)));
        }
    }
    return {worst_cov <= 0.05 && worst_norm <= 1e-6,
            fmt("max |cov - I| %.2e, max norm deviation %.2e", worst_cov, worst_norm)};
}

Outcome window_oracle() {
    std::size_t bad = 0;
    std::size_t total = 0;
    for (std::uint32_t n = 1; n <= 16; ++n) {
        for (std::uint32_t m = 1; m <= 16; ++m) {
            const WindowSet ws = enumerate_windows(n, m);
            std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t>> got;
            for (const auto& w : ws.windows) {
                got.insert({w.row_start, w.row_end, w.col_start, w.col_end});
            }
            bad += got != vt::brute_windows(n, m) || got.size() != ws.windows.size();
            total += ws.windows.size();
        }
    }
    return {bad == 0, "256 grids, " + std::to_string(total) + " windows, " + std::to_string(bad) + " differing sets"};
}

Outcome aspect_ratio_filter() {
    const AssignmentMap geo = vt::uniform_map(4, 4, 2, 0, 10);
    const double a = aspect_ratio_score({0, 0, 40, 40}, {0, 2, 0, 2}, geo);
    const double b = aspect_ratio_score({0, 0, 80, 40}, {0, 2, 0, 2}, geo);
    const double c = aspect_ratio_score({0, 0, 30, 10}, {0, 2, 0, 1}, geo);
    const bool formulas =
        std::abs(a - 1.0) <= 1e-12 && std::abs(b - 0.5) <= 1e-12 && std::abs(c - 1.0 / 6.0) <= 1e-12;

    // Fixture: square query on a 4x4 grid of square cells. At th = 0.4
    // exactly the 4x1 and 1x4 windows (AR score 1/4) are discarded.
    std::size_t kept = 0;
    std::size_t wrong = 0;
    for (const auto& w : enumerate_windows(4, 4).windows) {
        const bool keep = aspect_ratio_score({0, 0, 40, 40}, w, geo) >= kDefaultAspectThreshold;
        const bool thin = (w.rows() == 4 && w.cols() == 1) || (w.rows() == 1 && w.cols() == 4);
        wrong += keep == thin;
        kept += keep;
    }
    return {formulas && wrong == 0 && kept == 56,
            fmt("scores %.15g, %.15g, %.15g; ", a, b, c) + std::to_string(kept) + "/64 kept at th=0.4"};
}

Outcome spm_scoring() {
    std::mt19937_64 gen(9);
    const AssignmentMap q = vt::random_map(gen, 6, 6, 30);
    AssignmentMap d = vt::random_map(gen, 12, 12, 30);
    for (std::uint32_t i = 0; i < 4; ++i) {
        for (std::uint32_t j = 0; j < 5; ++j) {
            d.at(3 + i, 6 + j) = q.at(1 + i, 1 + j);
        }
    }
    const double same = spm_score(build_pyramid(q, {1, 5, 1, 6}), d, {3, 7, 6, 11});

    AssignmentMap qa = vt::uniform_map(2, 2, 8, 0);
    qa.words = {1, 2, 3, 4};
    AssignmentMap da = vt::uniform_map(2, 2, 8, 0);
    da.words = {4, 3, 2, 1};
    const double miss = spm_score(build_pyramid(qa, full_region(qa)), da, full_region(da), SpmWeighting::kFormula);
    return {std::abs(same - 1.0) <= 1e-9 && std::abs(miss - 1.0 / 9.0) <= 1e-9,
            fmt("identical %.12f, quadrant miss %.12f", same, miss)};
}

struct PlantedRun {
    double base_map = 0.0;
    double lqe_map = 0.0;
    std::size_t localized = 0;
    std::size_t planted = 0;
};

PlantedRun run_planted(const PlantedCorpusOptions& o) {
    const PlantedCorpus pc = gen_planted_corpus(o);
    InvertedIndex index(o.vocabulary_size);
    MapStore maps;
    for (const auto& m : pc.maps) {
        index.add_document(m.image_id, encode_full(m));
        maps.add(m);
    }
    auto score = [&](const RankedList& r) {
        return mean_average_precision(std::span(&r, 1), std::span(&pc.truth, 1));
    };
    PipelineOptions opt;
    opt.jobs = default_jobs();
    PlantedRun out;
    out.planted = pc.planted.size();
    opt.stages = Stages::kBaseline;
    out.base_map = score(run_query(index, maps, pc.query, opt).ranking);
    opt.stages = Stages::kRerankLqe;
    opt.expansion_depth = 10;
    const PipelineResult lqe = run_query(index, maps, pc.query, opt);
    out.lqe_map = score(lqe.ranking);
    for (const auto& p : pc.planted) {
        for (const auto& l : lqe.localizations) {
            if (l.doc_id == p.doc_id && iou(l.window, p.window) >= 0.5) {
                ++out.localized;
                break;
            }
        }
    }
    return out;
}

Outcome planted_end_to_end() {
    const auto t0 = Clock::now();
    PlantedCorpusOptions o;
    o.seed = 1;
    o.corpus_size = 100;
    o.plant_fraction = 0.1;
    const PlantedRun r = run_planted(o);
    const double secs = seconds_since(t0);
    const bool pass = r.planted == 10 && r.base_map == 1.0 && r.localized * 10 >= r.planted * 9 &&
                      r.lqe_map == 1.0 && secs < 10.0;
    return {pass, fmt("baseline mAP %.4f, R+LQE mAP %.4f, ", r.base_map, r.lqe_map) + std::to_string(r.localized) +
                      "/" + std::to_string(r.planted) + fmt(" localized at IoU>=0.5, %.2fs", secs)};
}

Outcome noisy_planted_ordering() {
    std::string detail;
    bool pass = true;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        PlantedCorpusOptions o;
        o.seed = seed;
        o.contamination = 0.3;
        const PlantedRun r = run_planted(o);
        pass &= r.lqe_map >= r.base_map;
        detail += fmt("%.3f>=%.3f ", r.lqe_map, r.base_map);
    }
    return {pass, "per seed R+LQE vs baseline: " + detail};
}

Outcome ap_fixture() {
    RankedList r = vt::make_ranking("q", {"P1", "J", "P2", "N", "P3"});
    GroundTruth gt;
    gt.query_id = "q";
    gt.positives = {"P1", "P2", "P3"};
    gt.ignores = {"J"};
    const double ap = average_precision(r, gt);
    return {std::abs(ap - 0.9167) <= 1e-4, fmt("AP %.6f", ap)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome cli_determinism() {
    vt::TempDir dir("accept");
    auto vws = [&](const std::string& args) {
        const std::string cmd = std::string(VWS_BIN) + " " + args + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    const fs::path root = dir.path();
    if (vws("synth --out " + (root / "demo").string() + " --docs 40 --seed 3") != 0) {
        return {false, "synth failed"};
    }
    const std::string feats = " --features " + (root / "demo" / "corpus").string();
    std::vector<std::string> compared;
    for (const char* tag : {"a", "b"}) {
        const fs::path run = root / tag;
        fs::create_directories(run);
        // Different thread counts must not change any byte.
        const std::string jobs = std::string(" --jobs ") + (tag[0] == 'a' ? "1" : "3");
        const int rc1 = vws(jobs + " fit-pca" + feats + " --dim 16 --sample 5000 --seed 11 --out " +
                            (run / "m.pca").string());
        const int rc2 = vws(jobs + " fit-codebook" + feats + " --pca " + (run / "m.pca").string() +
                            " --k 64 --seed 12 --sample 5000 --out " + (run / "k.cbk").string());
        const int rc3 = vws(jobs + " index" + feats + " --pca " + (run / "m.pca").string() + " --codebook " +
                            (run / "k.cbk").string() + " --out " + (run / "idx").string());
        if (rc1 != 0 || rc2 != 0 || rc3 != 0) {
            return {false, std::string("CLI run ") + tag + " failed"};
        }
    }
    std::size_t differing = 0;
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
        if (!e.is_regular_file()) {
            continue;
        }
        const fs::path rel = fs::relative(e.path(), root / "a");
        ++files;
        differing += slurp(e.path()) != slurp(root / "b" / rel);
    }
    return {files > 40 && differing == 0,
            std::to_string(files) + " artifact files compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"Inverted-index oracle equivalence", index_oracle},
        {"Nearest-centroid oracle", nearest_centroid_oracle},
        {"BoW additivity", bow_additivity},
        {"Whitening property", whitening_property},
        {"Window-enumeration oracle", window_oracle},
        {"Aspect-ratio filter", aspect_ratio_filter},
        {"SPM scoring", spm_scoring},
        {"Planted-instance end-to-end", planted_end_to_end},
        {"Noisy planted-instance ordering", noisy_planted_ordering},
        {"AP fixture", ap_fixture},
        {"Determinism", cli_determinism},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
