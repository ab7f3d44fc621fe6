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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vws/index.h"
#include "vws/qe.h"
#include "vws/rerank.h"

namespace vws {

// Stage combinations: initial search, then optional reranking (R), then
// optional global or local query expansion with a second search.
enum class Stages { kBaseline, kRerank, kGqe, kRerankGqe, kRerankLqe };

std::optional<Stages> parse_stages(std::string_view name);
std::string_view stages_name(Stages stages);

bool has_rerank(Stages stages);

struct PipelineOptions {
    Stages stages = Stages::kBaseline;
    std::size_t rerank_depth = kDefaultRerankDepth;
    double aspect_threshold = kDefaultAspectThreshold;
    std::size_t expansion_depth = kDefaultExpansionDepth;
    std::size_t top = 0;  // 0 = every document with a nonzero score
    SpmWeighting weighting = SpmWeighting::kFormula;
    QeAveraging averaging = QeAveraging::kNormalized;
    unsigned jobs = 1;
};

struct PipelineResult {
    RankedList initial;
    RankedList ranking;
    std::vector<Localization> localizations;  // empty unless R ran
};

/// Query expansion with depth 0 is a no-op: the ranking from the previous
/// stage is returned without a second search.
PipelineResult run_query(const InvertedIndex& index, const MapStore& maps, const QuerySpec& query,
                         const PipelineOptions& options);

}  // namespace vws
