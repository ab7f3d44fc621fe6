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

#include "vws/pipeline.h"

#include <algorithm>
#include <array>
#include <utility>

namespace vws {
namespace {

constexpr std::array<std::pair<Stages, std::string_view>, 5> kStageNames{{
    {Stages::kBaseline, "baseline"},
    {Stages::kRerank, "R"},
    {Stages::kGqe, "GQE"},
    {Stages::kRerankGqe, "R+GQE"},
    {Stages::kRerankLqe, "R+LQE"},
}};

}  // namespace

std::optional<Stages> parse_stages(std::string_view name) {
    for (const auto& [s, n] : kStageNames) {
        if (n == name) {
            return s;
        }
    }
    return std::nullopt;
}

std::string_view stages_name(Stages stages) {
    for (const auto& [s, n] : kStageNames) {
        if (s == stages) {
            return n;
        }
    }
    return "?";
}

bool has_rerank(Stages stages) {
    return stages == Stages::kRerank || stages == Stages::kRerankGqe || stages == Stages::kRerankLqe;
}

PipelineResult run_query(const InvertedIndex& index, const MapStore& maps, const QuerySpec& query,
                         const PipelineOptions& options) {
    // Stages see every match; only the returned lists are cut to `top`.
    const std::size_t all = std::max<std::size_t>(1, index.doc_count());
    const BowVector q = build_query(query);
    auto finish = [&](PipelineResult& r) {
        if (options.top != 0) {
            if (r.initial.items.size() > options.top) r.initial.items.resize(options.top);
            if (r.ranking.items.size() > options.top) r.ranking.items.resize(options.top);
        }
        return std::move(r);
    };

    PipelineResult out;
    out.initial = index.search(q, all, query.query_id);
    out.ranking = out.initial;

    if (has_rerank(options.stages)) {
        RerankOptions ro;
        ro.depth = options.rerank_depth;
        ro.aspect_threshold = options.aspect_threshold;
        ro.weighting = options.weighting;
        ro.jobs = options.jobs;
        RerankResult rr = rerank_top(out.ranking, query, maps, ro);
        out.ranking = std::move(rr.ranking);
        out.localizations = std::move(rr.localizations);
    }

    if (options.expansion_depth == 0) {
        return finish(out);
    }
    if (options.stages == Stages::kGqe || options.stages == Stages::kRerankGqe) {
        const BowVector expanded = global_expand(q, out.ranking, index, options.expansion_depth, options.averaging);
        out.ranking = index.search(expanded, all, query.query_id);
    } else if (options.stages == Stages::kRerankLqe) {
        const BowVector expanded =
            local_expand(q, out.ranking, out.localizations, maps, options.expansion_depth, options.averaging);
        out.ranking = index.search(expanded, all, query.query_id);
    }
    return finish(out);
}

}  // namespace vws
