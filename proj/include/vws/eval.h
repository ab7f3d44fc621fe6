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

#include <filesystem>
#include <istream>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vws/index.h"

namespace vws {

// Relevance judgments for one query. Ignored (junk) documents are dropped
// from a ranking before it is scored.
struct GroundTruth {
    std::string query_id;
    std::set<std::string> positives;
    std::set<std::string> ignores;

    void validate() const;
};

/// Non-interpolated AP over the ranking with ignores removed. Positives that
/// never appear count as misses.
double average_precision(const RankedList& ranking, const GroundTruth& truth);

/// Mean AP over rankings, each matched to the ground truth with the same
/// query id. Throws ValidationError when a ranking has no ground truth.
double mean_average_precision(std::span<const RankedList> rankings, std::span<const GroundTruth> truths);

/// `<query_id>\t<doc_id>\t<pos|ignore>` per line; blank lines and lines
/// starting with '#' are skipped.
std::vector<GroundTruth> read_ground_truth(std::istream& in);
std::vector<GroundTruth> read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(std::ostream& out, std::span<const GroundTruth> truths);

/// `<rank>\t<doc_id>\t<score>` per line, rank starting at 1.
void write_ranking(std::ostream& out, const RankedList& ranking);
RankedList read_ranking(std::istream& in, std::string query_id);

}  // namespace vws
