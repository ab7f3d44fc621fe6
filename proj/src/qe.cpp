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

#include "vws/qe.h"

#include <algorithm>

#include "vws/errors.h"

namespace vws {
namespace {

class Averager {
 public:
    Averager(const BowVector& first, QeAveraging mode) : mode_(mode), sum_(prepare(first)), count_(1) {}

    void add(const BowVector& v) {
        sum_ = vws::add(sum_, prepare(v));
        ++count_;
    }

    BowVector mean() const {
        if (sum_.empty()) {
            return sum_;
        }
        return sum_.scaled(1.0 / static_cast<double>(count_));
    }

 private:
    BowVector prepare(const BowVector& v) const {
        return mode_ == QeAveraging::kNormalized ? v.normalized() : v;
    }

    QeAveraging mode_;
    BowVector sum_;
    std::size_t count_;
};

}  // namespace

BowVector global_expand(const BowVector& query, const RankedList& ranking, const InvertedIndex& index,
                        std::size_t n, QeAveraging averaging) {
    Averager avg(query, averaging);
    const std::size_t top = std::min(n, ranking.items.size());
    for (std::size_t i = 0; i < top; ++i) {
        avg.add(index.document(ranking.items[i].doc_id));
    }
    return avg.mean();
}

BowVector local_expand(const BowVector& query_box_bow, const RankedList& ranking,
                       std::span<const Localization> localizations, const MapStore& maps, std::size_t n,
                       QeAveraging averaging) {
    Averager avg(query_box_bow, averaging);
    const std::size_t top = std::min(n, ranking.items.size());
    for (std::size_t i = 0; i < top; ++i) {
        const std::string& id = ranking.items[i].doc_id;
        const auto it = std::find_if(localizations.begin(), localizations.end(),
                                     [&](const Localization& l) { return l.doc_id == id; });
        if (it == localizations.end()) {
            throw DataError("local_expand: no localization for document '" + id + "'");
        }
        avg.add(encode_region(maps.get(id), it->window));
    }
    return avg.mean();
}

}  // namespace vws
