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

// vws: command-line driver for fitting, indexing, searching and scoring.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vws/bow.h"
#include "vws/codebook.h"
#include "vws/errors.h"
#include "vws/eval.h"
#include "vws/index.h"
#include "vws/parallel.h"
#include "vws/pipeline.h"
#include "vws/preprocess.h"
#include "vws/random.h"
#include "vws/rerank.h"
#include "vws/synth.h"
#include "vws/tensor_io.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

constexpr const char* kIndexFile = "index.idx";
constexpr const char* kModelFile = "model.pca";
constexpr const char* kCodebookFile = "codebook.cbk";
constexpr const char* kConfigFile = "index.json";
constexpr const char* kMapDir = "maps";

// Bad flag values that CLI11 cannot check on its own.
class UsageError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

std::vector<fs::path> list_tensors(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw vws::IoError("not a directory: " + dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".lft") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

// Reads every tensor in `dir`, warning about and skipping unreadable ones.
std::vector<vws::FeatureTensor> read_corpus(const fs::path& dir, std::size_t* skipped) {
    std::vector<vws::FeatureTensor> out;
    std::size_t bad = 0;
    for (const auto& p : list_tensors(dir)) {
        try {
            out.push_back(vws::read_tensor(p));
        } catch (const vws::Error& e) {
            std::cerr << "warning: skipping " << p.string() << ": " << e.what() << '\n';
            ++bad;
        }
    }
    if (skipped != nullptr) {
        *skipped = bad;
    }
    if (out.empty()) {
        throw vws::DataError("no readable .lft tensors in " + dir.string());
    }
    return out;
}

// Keeps `sample` of `total` row indices chosen uniformly without
// replacement, in ascending order. sample == 0 keeps everything.
std::vector<std::size_t> subsample(std::size_t total, std::size_t sample, std::uint64_t seed) {
    std::vector<std::size_t> idx(total);
    for (std::size_t i = 0; i < total; ++i) {
        idx[i] = i;
    }
    if (sample == 0 || sample >= total) {
        return idx;
    }
    vws::Rng rng(seed);
    for (std::size_t i = 0; i < sample; ++i) {
        std::swap(idx[i], idx[i + rng.below(total - i)]);
    }
    idx.resize(sample);
    std::sort(idx.begin(), idx.end());
    return idx;
}

vws::FeatureMatrix gather_features(const std::vector<vws::FeatureTensor>& corpus, const vws::TransformModel* model,
                                   std::uint32_t upsample) {
    const std::uint32_t depth = corpus.front().depth;
    vws::FeatureMatrix out(model != nullptr ? model->output_dim : depth);
    for (const auto& raw : corpus) {
        if (raw.depth != depth) {
            throw vws::ValidationError("tensor '" + raw.image_id + "' has depth " + std::to_string(raw.depth) +
                                       ", expected " + std::to_string(depth));
        }
        const vws::FeatureTensor t = vws::bilinear_upsample(raw, upsample);
        for (std::uint32_t n = 0; n < t.rows; ++n) {
            for (std::uint32_t m = 0; m < t.cols; ++m) {
                const auto local = t.local_feature(n, m);
                out.append(model != nullptr ? vws::apply_transform(*model, local) : vws::l2_normalize(local));
            }
        }
    }
    return out;
}

vws::FeatureMatrix pick_rows(const vws::FeatureMatrix& all, std::size_t sample, std::uint64_t seed) {
    const auto rows = subsample(all.rows(), sample, seed);
    if (rows.size() == all.rows()) {
        return all;
    }
    vws::FeatureMatrix out(all.dim());
    out.reserve_rows(rows.size());
    for (std::size_t r : rows) {
        out.append(all.row(r));
    }
    return out;
}

std::optional<double> parse_center_prior(const std::string& s) {
    if (s == "off") {
        return std::nullopt;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || !(v > 0.0)) {
        throw UsageError("--center-prior expects a positive number or 'off', got '" + s + "'");
    }
    return v;
}

vws::PixelBox parse_box(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        try {
            v.push_back(std::stod(tok, &used));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tok.size()) {
            throw UsageError("--box expects x0,y0,x1,y1, got '" + s + "'");
        }
    }
    if (v.size() != 4 || !(v[0] < v[2]) || !(v[1] < v[3])) {
        throw UsageError("--box expects x0,y0,x1,y1 with x0 < x1 and y0 < y1, got '" + s + "'");
    }
    return {v[0], v[1], v[2], v[3]};
}

std::string map_file_name(std::uint32_t ordinal) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06u.amp", ordinal);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out || !(out << text) || !out.flush()) {
        throw vws::IoError("cannot write " + path.string());
    }
}

// ---------------------------------------------------------------------------

struct FitPcaArgs {
    fs::path features;
    fs::path out;
    std::uint32_t dim = 0;
    double epsilon = vws::kDefaultWhiteningEpsilon;
    std::size_t sample = 0;
    std::int64_t seed = 0;
};

int run_fit_pca(const FitPcaArgs& a) {
    const auto corpus = read_corpus(a.features, nullptr);
    const vws::FeatureMatrix all = gather_features(corpus, nullptr, 1);
    const vws::FeatureMatrix sample = pick_rows(all, a.sample, static_cast<std::uint64_t>(a.seed));
    const std::uint32_t dim = a.dim == 0 ? static_cast<std::uint32_t>(all.dim()) : a.dim;
    if (dim > all.dim()) {
        throw UsageError("--dim " + std::to_string(dim) + " exceeds feature depth " + std::to_string(all.dim()));
    }
    const vws::TransformModel model = vws::fit_transform_model(sample, dim, a.epsilon);
    vws::save_transform_model(model, a.out);
    std::cout << "samples: " << sample.rows() << '\n'
              << "dims: " << model.input_dim << " -> " << model.output_dim << '\n'
              << "retained variance: " << std::fixed << std::setprecision(4) << model.retained_variance_ratio()
              << '\n';
    return kExitOk;
}

struct FitCodebookArgs {
    fs::path features;
    fs::path pca;
    std::uint32_t k = 0;
    std::int64_t seed = 0;
    std::size_t sample = 0;
    std::uint32_t max_iters = 50;
    std::uint32_t upsample = 1;
    fs::path out;
};

int run_fit_codebook(const FitCodebookArgs& a, unsigned jobs) {
    const vws::TransformModel model = vws::load_transform_model(a.pca);
    const auto corpus = read_corpus(a.features, nullptr);
    const vws::FeatureMatrix all = gather_features(corpus, &model, a.upsample);
    const vws::FeatureMatrix sample = pick_rows(all, a.sample, static_cast<std::uint64_t>(a.seed));
    vws::KMeansOptions opt;
    opt.k = a.k;
    opt.seed = a.seed;
    opt.max_iters = a.max_iters;
    opt.jobs = jobs;
    vws::KMeansReport report;
    const vws::Codebook cb = vws::fit_codebook(sample, opt, &report);
    vws::save_codebook(cb, a.out);
    std::cout << "samples: " << sample.rows() << '\n'
              << "words: " << cb.size << '\n'
              << "iterations: " << report.iterations << (report.converged ? " (converged)" : "") << '\n'
              << "quantization error: " << std::setprecision(8) << report.errors.back() << '\n';
    return kExitOk;
}

struct IndexArgs {
    fs::path features;
    fs::path pca;
    fs::path codebook;
    std::uint32_t upsample = 2;
    std::string center_prior = "0.3333333333333333";
    fs::path out;
};

int run_index(const IndexArgs& a, unsigned jobs) {
    const std::optional<double> sigma = parse_center_prior(a.center_prior);
    const vws::TransformModel model = vws::load_transform_model(a.pca);
    const vws::Codebook cb = vws::load_codebook(a.codebook);
    std::size_t skipped = 0;
    const auto corpus = read_corpus(a.features, &skipped);

    std::vector<vws::AssignmentMap> maps(corpus.size());
    vws::parallel_for(corpus.size(), jobs, [&](std::size_t i) {
        maps[i] = vws::build_assignment_map(cb, corpus[i], model, a.upsample);
    });

    fs::create_directories(a.out / kMapDir);
    vws::InvertedIndex index(cb.size);
    for (std::size_t i = 0; i < maps.size(); ++i) {
        std::optional<vws::CenterPriorGrid> prior;
        if (sigma) {
            prior = vws::center_prior_grid(maps[i].rows, maps[i].cols, *sigma);
        }
        index.add_document(maps[i].image_id, vws::encode_full(maps[i], prior ? &*prior : nullptr));
        vws::save_assignment_map(maps[i], a.out / kMapDir / map_file_name(static_cast<std::uint32_t>(i)));
    }
    index.save(a.out / kIndexFile);
    vws::save_transform_model(model, a.out / kModelFile);
    vws::save_codebook(cb, a.out / kCodebookFile);

    json config;
    config["upsample"] = a.upsample;
    config["center_prior"] = sigma ? json(*sigma) : json("off");
    config["vocabulary_size"] = cb.size;
    config["doc_count"] = index.doc_count();
    write_text(a.out / kConfigFile, config.dump(2) + "\n");

    // Round-trip check of what was just written.
    const vws::InvertedIndex reloaded = vws::InvertedIndex::load(a.out / kIndexFile);
    reloaded.check_invariants();
    std::cout << "documents: " << reloaded.doc_count() << '\n'
              << "nonzeros: " << reloaded.total_postings() << '\n'
              << "skipped: " << skipped << '\n';
    return kExitOk;
}

struct SearchArgs {
    fs::path index;
    fs::path query;
    std::string box;
    std::string stages = "baseline";
    std::size_t depth = vws::kDefaultRerankDepth;
    double threshold = vws::kDefaultAspectThreshold;
    std::size_t qe_n = vws::kDefaultExpansionDepth;
    std::size_t top = 0;
    std::string weighting = "formula";
    std::string averaging = "normalized";
    fs::path out;
    fs::path loc_out;
};

// Everything a query needs from an index directory.
struct LoadedIndex {
    std::uint32_t upsample = 1;
    vws::InvertedIndex index{1};
    vws::TransformModel model;
    vws::Codebook codebook;
};

LoadedIndex load_index_dir(const fs::path& dir) {
    std::ifstream cfg_in(dir / kConfigFile);
    if (!cfg_in) {
        throw vws::IoError("cannot open " + (dir / kConfigFile).string());
    }
    LoadedIndex out;
    try {
        out.upsample = json::parse(cfg_in).at("upsample").get<std::uint32_t>();
    } catch (const json::exception& e) {
        throw vws::FormatError((dir / kConfigFile).string() + ": " + e.what());
    }
    out.index = vws::InvertedIndex::load(dir / kIndexFile);
    out.model = vws::load_transform_model(dir / kModelFile);
    out.codebook = vws::load_codebook(dir / kCodebookFile);
    return out;
}

vws::QuerySpec make_query(const LoadedIndex& li, const fs::path& lft, const std::optional<vws::PixelBox>& box) {
    const vws::FeatureTensor qt = vws::read_tensor(lft);
    vws::QuerySpec spec;
    spec.query_id = qt.image_id;
    spec.map = vws::build_assignment_map(li.codebook, qt, li.model, li.upsample);
    if (box) {
        if (box->x0 < 0 || box->y0 < 0 || box->x1 > spec.map.width || box->y1 > spec.map.height) {
            throw UsageError("box lies outside the " + std::to_string(spec.map.width) + "x" +
                             std::to_string(spec.map.height) + " image " + lft.string());
        }
        spec.box = box;
    }
    return spec;
}

std::optional<vws::PixelBox> read_box_file(const fs::path& path) {
    if (!fs::exists(path)) {
        return std::nullopt;
    }
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
        line.pop_back();
    }
    return parse_box(line);
}

int run_search(const SearchArgs& a, unsigned jobs) {
    const auto stages = vws::parse_stages(a.stages);
    if (!stages) {
        throw UsageError("--stages must be one of baseline, R, GQE, R+GQE, R+LQE");
    }
    const bool batch = fs::is_directory(a.query);
    std::optional<vws::PixelBox> box;
    if (!a.box.empty()) {
        if (batch) {
            throw UsageError("--box applies to a single query; use <stem>.box files with a query directory");
        }
        box = parse_box(a.box);
    }
    if (batch && a.out.empty()) {
        throw UsageError("a query directory needs --out <dir>");
    }
    vws::PipelineOptions opt;
    opt.stages = *stages;
    opt.rerank_depth = a.depth;
    opt.aspect_threshold = a.threshold;
    opt.expansion_depth = a.qe_n;
    opt.top = a.top;
    opt.weighting = a.weighting == "inverted" ? vws::SpmWeighting::kInverted : vws::SpmWeighting::kFormula;
    opt.averaging = a.averaging == "raw" ? vws::QeAveraging::kRaw : vws::QeAveraging::kNormalized;

    const LoadedIndex li = load_index_dir(a.index);
    const fs::path map_dir = a.index / kMapDir;
    const std::uint32_t k = li.codebook.size;
    vws::MapStore maps([&](std::string_view id) -> std::optional<vws::AssignmentMap> {
        const auto ord = li.index.ordinal(id);
        if (!ord) {
            return std::nullopt;
        }
        return vws::load_assignment_map(map_dir / map_file_name(*ord), k);
    });

    auto emit = [&](const vws::QuerySpec& spec, const vws::PipelineResult& result, const fs::path& out,
                    fs::path loc_path) {
        std::ostringstream ranking;
        vws::write_ranking(ranking, result.ranking);
        if (out.empty()) {
            std::cout << ranking.str();
        } else {
            write_text(out, ranking.str());
        }
        if (!vws::has_rerank(opt.stages)) {
            return;
        }
        std::ostringstream locs;
        vws::write_localizations(locs, spec.query_id, result.localizations);
        if (loc_path.empty() && !out.empty()) {
            loc_path = out;
            loc_path.replace_extension(".loc");
        }
        if (loc_path.empty()) {
            std::cerr << locs.str();
        } else {
            write_text(loc_path, locs.str());
        }
    };

    if (!batch) {
        opt.jobs = jobs;
        const vws::QuerySpec spec = make_query(li, a.query, box);
        emit(spec, vws::run_query(li.index, maps, spec, opt), a.out, a.loc_out);
        return kExitOk;
    }

    // Query directory: one ranking file per query, queries in parallel.
    const auto queries = list_tensors(a.query);
    if (queries.empty()) {
        throw vws::DataError("no .lft queries in " + a.query.string());
    }
    std::vector<vws::QuerySpec> specs;
    for (const auto& q : queries) {
        fs::path box_path = q;
        box_path.replace_extension(".box");
        specs.push_back(make_query(li, q, read_box_file(box_path)));
    }
    fs::create_directories(a.out);
    opt.jobs = 1;
    vws::parallel_for(specs.size(), jobs, [&](std::size_t i) {
        const vws::PipelineResult result = vws::run_query(li.index, maps, specs[i], opt);
        emit(specs[i], result, a.out / (specs[i].query_id + ".txt"), {});
    });
    std::cout << "queries: " << specs.size() << '\n';
    return kExitOk;
}

struct EvalArgs {
    fs::path rankings;
    fs::path gt;
};

int run_eval(const EvalArgs& a) {
    const auto truths = vws::read_ground_truth(a.gt);
    if (!fs::is_directory(a.rankings)) {
        throw vws::IoError("not a directory: " + a.rankings.string());
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.rankings)) {
        if (e.is_regular_file() && e.path().extension() != ".loc") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw vws::DataError("no ranking files in " + a.rankings.string());
    }
    std::vector<vws::RankedList> rankings;
    for (const auto& f : files) {
        std::ifstream in(f);
        if (!in) {
            throw vws::IoError("cannot open " + f.string());
        }
        rankings.push_back(vws::read_ranking(in, f.stem().string()));
    }
    const double map = vws::mean_average_precision(rankings, truths);
    std::map<std::string, const vws::GroundTruth*> by_query;
    for (const auto& t : truths) {
        by_query[t.query_id] = &t;
    }
    std::cout << std::fixed << std::setprecision(4);
    for (const auto& r : rankings) {
        std::cout << r.query_id << '\t' << vws::average_precision(r, *by_query.at(r.query_id)) << '\n';
    }
    std::cout << "mAP\t" << map << '\n';
    return kExitOk;
}

struct SynthArgs {
    std::string kind = "planted";
    fs::path out;
    std::uint64_t seed = 1;
    std::uint32_t docs = 100;
    double fraction = 0.1;
    std::uint32_t rows = 16;
    std::uint32_t cols = 16;
    std::uint32_t pattern_rows = 4;
    std::uint32_t pattern_cols = 4;
    std::uint32_t words = 64;
    std::uint32_t pattern_words = 16;
    std::uint32_t depth = 32;
    double noise = 0.01;
    double contamination = 0.0;
};

int run_synth(const SynthArgs& a) {
    fs::create_directories(a.out / "corpus");
    if (a.kind == "random") {
        for (std::uint32_t i = 0; i < a.docs; ++i) {
            char id[32];
            std::snprintf(id, sizeof id, "img%04u", i);
            const auto t = vws::gen_random_tensor(a.seed + i, a.depth, a.rows, a.cols, a.cols * 32, a.rows * 32, id);
            vws::write_tensor(t, a.out / "corpus" / (std::string(id) + ".lft"));
        }
        std::cout << "tensors: " << a.docs << '\n';
        return kExitOk;
    }
    if (a.kind != "planted") {
        throw UsageError("--kind must be 'planted' or 'random'");
    }
    vws::PlantedCorpusOptions o;
    o.seed = a.seed;
    o.corpus_size = a.docs;
    o.plant_fraction = a.fraction;
    o.map_rows = a.rows;
    o.map_cols = a.cols;
    o.pattern_rows = a.pattern_rows;
    o.pattern_cols = a.pattern_cols;
    o.vocabulary_size = a.words;
    o.pattern_words = a.pattern_words;
    o.contamination = a.contamination;
    const vws::PlantedCorpus corpus = vws::gen_planted_corpus(o);
    const vws::FeatureMatrix protos = vws::gen_word_prototypes(a.seed ^ 0x5eedu, a.words, a.depth);
    std::uint64_t tensor_seed = a.seed * 7919u;
    for (const auto& m : corpus.maps) {
        vws::write_tensor(vws::render_tensor(m, protos, a.noise, ++tensor_seed),
                          a.out / "corpus" / (m.image_id + ".lft"));
    }
    vws::write_tensor(vws::render_tensor(corpus.query.map, protos, a.noise, ++tensor_seed), a.out / "query.lft");
    const vws::PixelBox& b = *corpus.query.box;
    std::ostringstream box;
    box << b.x0 << ',' << b.y0 << ',' << b.x1 << ',' << b.y1 << '\n';
    write_text(a.out / "query.box", box.str());
    std::ostringstream gt;
    vws::write_ground_truth(gt, std::span(&corpus.truth, 1));
    write_text(a.out / "gt.txt", gt.str());
    std::cout << "documents: " << corpus.maps.size() << '\n'
              << "planted: " << corpus.planted.size() << '\n'
              << "query box: " << box.str();
    return kExitOk;
}

unsigned default_jobs_from_env() {
    if (const char* env = std::getenv("VWS_JOBS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    return vws::default_jobs();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Visual-word instance search: fit, index, search and evaluate"};
    app.set_config("--config", "", "INI/TOML file supplying option defaults");
    app.require_subcommand(1);
    unsigned jobs = default_jobs_from_env();
    app.add_option("--jobs", jobs, "Worker threads (default: $VWS_JOBS or all cores)")
        ->check(CLI::PositiveNumber);

    FitPcaArgs pca;
    auto* fit_pca = app.add_subcommand("fit-pca", "Fit the L2-PCA-whitening transform");
    fit_pca->add_option("--features", pca.features, "Directory of .lft tensors")->required();
    fit_pca->add_option("--out", pca.out, "Output model file")->required();
    fit_pca->add_option("--dim", pca.dim, "Output dimension (default: input depth)");
    fit_pca->add_option("--epsilon", pca.epsilon, "Whitening regularizer")->check(CLI::PositiveNumber);
    fit_pca->add_option("--sample", pca.sample, "Max local features to fit on (0 = all)");
    fit_pca->add_option("--seed", pca.seed, "Subsampling seed");

    FitCodebookArgs cbk;
    auto* fit_cb = app.add_subcommand("fit-codebook", "Fit the k-means visual codebook");
    fit_cb->add_option("--features", cbk.features, "Directory of .lft tensors")->required();
    fit_cb->add_option("--pca", cbk.pca, "Transform model file")->required();
    fit_cb->add_option("--k", cbk.k, "Number of visual words")->required()->check(CLI::PositiveNumber);
    fit_cb->add_option("--seed", cbk.seed, "k-means++ and subsampling seed");
    fit_cb->add_option("--sample", cbk.sample, "Max local features to fit on (0 = all)");
    fit_cb->add_option("--max-iters", cbk.max_iters, "Lloyd iteration cap");
    fit_cb->add_option("--upsample", cbk.upsample, "Upsampling factor for training features")
        ->check(CLI::PositiveNumber);
    fit_cb->add_option("--out", cbk.out, "Output codebook file")->required();

    IndexArgs idx;
    auto* index = app.add_subcommand("index", "Build assignment maps and the inverted index");
    index->add_option("--features", idx.features, "Directory of .lft tensors")->required();
    index->add_option("--pca", idx.pca, "Transform model file")->required();
    index->add_option("--codebook", idx.codebook, "Codebook file")->required();
    index->add_option("--upsample", idx.upsample, "Bilinear upsampling factor")->check(CLI::PositiveNumber);
    index->add_option("--center-prior", idx.center_prior, "Center prior sigma fraction, or 'off'");
    index->add_option("--out", idx.out, "Output index directory")->required();

    SearchArgs srch;
    auto* search = app.add_subcommand("search", "Run queries through the retrieval pipeline");
    search->add_option("--index", srch.index, "Index directory")->required();
    search->add_option("--query", srch.query, "Query .lft tensor, or a directory of them")->required();
    search->add_option("--box", srch.box, "Query box x0,y0,x1,y1 in pixels (local search)");
    search->add_option("--stages", srch.stages, "baseline | R | GQE | R+GQE | R+LQE");
    search->add_option("--T", srch.depth, "Documents to rerank");
    search->add_option("--th", srch.threshold, "Aspect-ratio threshold")->check(CLI::Range(0.0, 1.0));
    search->add_option("--qe-n", srch.qe_n, "Documents used for query expansion");
    search->add_option("--top", srch.top, "Ranking length (0 = all matches)");
    search->add_option("--spm-weighting", srch.weighting, "formula | inverted")
        ->check(CLI::IsMember({"formula", "inverted"}));
    search->add_option("--qe-averaging", srch.averaging, "normalized | raw")
        ->check(CLI::IsMember({"normalized", "raw"}));
    search->add_option("--out", srch.out, "Ranking output file (default: stdout); a directory in batch mode");
    search->add_option("--loc-out", srch.loc_out, "Localization output file (default: <out> with a .loc extension)");

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Score rankings against ground truth");
    eval->add_option("--rankings", ev.rankings, "Directory of <query_id>.* ranking files")->required();
    eval->add_option("--gt", ev.gt, "Ground-truth file")->required();

    SynthArgs syn;
    auto* synth = app.add_subcommand("synth", "Write a synthetic demo corpus");
    synth->add_option("--kind", syn.kind, "planted | random");
    synth->add_option("--out", syn.out, "Output directory")->required();
    synth->add_option("--seed", syn.seed, "Generator seed");
    synth->add_option("--docs", syn.docs, "Number of documents")->check(CLI::PositiveNumber);
    synth->add_option("--fraction", syn.fraction, "Fraction of planted documents");
    synth->add_option("--rows", syn.rows, "Feature map rows")->check(CLI::PositiveNumber);
    synth->add_option("--cols", syn.cols, "Feature map cols")->check(CLI::PositiveNumber);
    synth->add_option("--pattern-rows", syn.pattern_rows, "Planted pattern rows");
    synth->add_option("--pattern-cols", syn.pattern_cols, "Planted pattern cols");
    synth->add_option("--words", syn.words, "Synthetic vocabulary size");
    synth->add_option("--pattern-words", syn.pattern_words, "Words reserved for the pattern");
    synth->add_option("--depth", syn.depth, "Feature depth")->check(CLI::PositiveNumber);
    synth->add_option("--noise", syn.noise, "Per-cell feature noise stddev");
    synth->add_option("--contamination", syn.contamination, "Fraction of pattern cells replaced by background");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (fit_pca->parsed()) return run_fit_pca(pca);
        if (fit_cb->parsed()) return run_fit_codebook(cbk, jobs);
        if (index->parsed()) return run_index(idx, jobs);
        if (search->parsed()) return run_search(srch, jobs);
        if (eval->parsed()) return run_eval(ev);
        if (synth->parsed()) return run_synth(syn);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
