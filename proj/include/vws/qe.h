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
#include <span>

#include "vws/bow.h"
#include "vws/index.h"
#include "vws/rerank.h"

namespace vws {

inline constexpr std::size_t kDefaultExpansionDepth = 10;

// kNormalized scales every contributor to unit norm before averaging;
// kRaw averages the vectors as they are.
enum class QeAveraging { kNormalized, kRaw };

/// Mean of the query BoW and the full-image BoWs of the top-min(n, size)
/// ranked documents.
BowVector global_expand(const BowVector& query, const RankedList& ranking, const InvertedIndex& index,
                        std::size_t n, QeAveraging averaging = QeAveraging::kNormalized);

/// Mean of the query-box BoW and the BoWs of the localized windows of the
/// top-min(n, size) ranked documents. Throws DataError when one of those
/// documents has no localization or no assignment map.
BowVector local_expand(const BowVector& query_box_bow, const RankedList& ranking,
                       std::span<const Localization> localizations, const MapStore& maps, std::size_t n,
                       QeAveraging averaging = QeAveraging::kNormalized);

}  // namespace vws
