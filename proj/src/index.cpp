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

#include "vws/index.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "vws/binary_io.h"
#include "vws/errors.h"

namespace vws {
namespace {

constexpr char kIndexMagic[5] = "IDX1";
constexpr std::uint32_t kIndexVersion = 1;

bool ranks_before(const RankedItem& a, const RankedItem& b) {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.doc_id < b.doc_id;
}

}  // namespace

void RankedList::check_invariants() const {
    std::unordered_set<std::string_view> seen;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0 && items[i].score > items[i - 1].score) {
            throw ValidationError("ranked list '" + query_id + "': scores increase at rank " +
                                  std::to_string(i + 1));
        }
        if (!seen.insert(items[i].doc_id).second) {
            throw ValidationError("ranked list '" + query_id + "': duplicate doc '" + items[i].doc_id + "'");
        }
    }
}

MapRegion query_region(const QuerySpec& spec) {
    if (spec.box) {
        return pixel_region_to_map_region(spec.map, *spec.box);
    }
    return full_region(spec.map);
}

PixelBox query_pixel_box(const QuerySpec& spec) {
    if (spec.box) {
        return *spec.box;
    }
    return {0.0, 0.0, static_cast<double>(spec.map.width), static_cast<double>(spec.map.height)};
}

BowVector build_query(const QuerySpec& spec) {
    return encode_region(spec.map, query_region(spec));
}

InvertedIndex::InvertedIndex(std::uint32_t vocabulary_size)
    : vocabulary_size_(vocabulary_size), postings_(vocabulary_size) {
    if (vocabulary_size == 0) {
        throw ValidationError("inverted index: vocabulary size must be >= 1");
    }
}

std::optional<std::uint32_t> InvertedIndex::ordinal(std::string_view doc_id) const {
    const auto it = by_id_.find(std::string(doc_id));
    if (it == by_id_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void InvertedIndex::add_document(std::string doc_id, const BowVector& bow) {
    if (bow.vocabulary_size() != vocabulary_size_) {
        throw ValidationError("add_document '" + doc_id + "': BoW has K=" +
                              std::to_string(bow.vocabulary_size()) + ", index has K=" +
                              std::to_string(vocabulary_size_));
    }
    if (by_id_.contains(doc_id)) {
        throw ConflictError("add_document: duplicate doc id '" + doc_id + "'");
    }
    const auto ord = static_cast<std::uint32_t>(doc_ids_.size());
    for (const auto& e : bow.entries()) {
        postings_[e.word].push_back({ord, e.weight});
    }
    total_postings_ += bow.nonzeros();
    by_id_.emplace(doc_id, ord);
    doc_ids_.push_back(std::move(doc_id));
    doc_norms_.push_back(bow.norm());
    docs_.push_back(bow);
}

const BowVector& InvertedIndex::document(std::string_view doc_id) const {
    const auto ord = ordinal(doc_id);
    if (!ord) {
        throw DataError("index has no document '" + std::string(doc_id) + "'");
    }
    return docs_[*ord];
}

RankedList InvertedIndex::search(const BowVector& query, std::size_t top_k, std::string query_id) const {
    if (query.vocabulary_size() != vocabulary_size_) {
        throw ValidationError("search: query has K=" + std::to_string(query.vocabulary_size()) +
                              ", index has K=" + std::to_string(vocabulary_size_));
    }
    if (top_k == 0) {
        throw ValidationError("search: top_k must be >= 1");
    }
    RankedList out;
    out.query_id = std::move(query_id);
    if (query.norm() == 0.0) {
        return out;
    }
    // Term-at-a-time accumulation keyed by doc ordinal.
    std::vector<double> acc(doc_ids_.size(), 0.0);
    std::vector<std::uint32_t> touched;
    for (const auto& qe : query.entries()) {
        for (const Posting& p : postings_[qe.word]) {
            if (acc[p.doc] == 0.0) {
                touched.push_back(p.doc);
            }
            acc[p.doc] += qe.weight * p.weight;
        }
    }
    std::vector<RankedItem> items;
    items.reserve(touched.size());
    for (std::uint32_t d : touched) {
        if (acc[d] > 0.0 && doc_norms_[d] > 0.0) {
            const double s = std::min(1.0, acc[d] / (query.norm() * doc_norms_[d]));
            items.push_back({doc_ids_[d], s});
        }
    }
    const std::size_t k = std::min(top_k, items.size());
    std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(k), items.end(), ranks_before);
    items.resize(k);
    out.items = std::move(items);
    return out;
}

void InvertedIndex::check_invariants() const {
    std::vector<double> sq(doc_ids_.size(), 0.0);
    std::size_t count = 0;
    for (const auto& list : postings_) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (i > 0 && list[i - 1].doc >= list[i].doc) {
                throw ValidationError("inverted index: postings not strictly sorted by doc ordinal");
            }
            if (list[i].doc >= doc_ids_.size()) {
                throw ValidationError("inverted index: posting references an unknown document");
            }
            sq[list[i].doc] += list[i].weight * list[i].weight;
        }
        count += list.size();
    }
    if (count != total_postings_) {
        throw ValidationError("inverted index: posting count " + std::to_string(count) +
                              " disagrees with counter " + std::to_string(total_postings_));
    }
    std::size_t nnz = 0;
    for (const auto& d : docs_) {
        nnz += d.nonzeros();
    }
    if (nnz != total_postings_) {
        throw ValidationError("inverted index: document nonzeros disagree with postings");
    }
    for (std::size_t d = 0; d < sq.size(); ++d) {
        if (std::abs(std::sqrt(sq[d]) - doc_norms_[d]) > 1e-6 * std::max(1.0, doc_norms_[d])) {
            throw ValidationError("inverted index: stored norm of '" + doc_ids_[d] + "' is inconsistent");
        }
    }
}

void InvertedIndex::save(std::ostream& out) const {
    binio::put_magic(out, kIndexMagic);
    binio::put_u32(out, kIndexVersion);
    binio::put_u32(out, vocabulary_size_);
    binio::put_u32(out, static_cast<std::uint32_t>(doc_ids_.size()));
    for (const auto& id : doc_ids_) {
        binio::put_string(out, id);
    }
    for (double n : doc_norms_) {
        binio::put_f32(out, static_cast<float>(n));
    }
    for (WordId w = 0; w < vocabulary_size_; ++w) {
        const auto& list = postings_[w];
        if (list.empty()) {
            continue;
        }
        binio::put_u32(out, w);
        binio::put_u32(out, static_cast<std::uint32_t>(list.size()));
        for (const Posting& p : list) {
            binio::put_u32(out, p.doc);
            binio::put_f32(out, static_cast<float>(p.weight));
        }
    }
    if (!out) {
        throw IoError("failed writing inverted index");
    }
}

void InvertedIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    save(out);
    out.flush();
    if (!out) {
        throw IoError(path.string() + ": write failed");
    }
}

InvertedIndex InvertedIndex::load(std::istream& in) {
    binio::expect_magic(in, kIndexMagic);
    binio::expect_version(in, kIndexVersion, "inverted index");
    const std::uint32_t k = binio::get_u32(in, "index header");
    const std::uint32_t n = binio::get_u32(in, "index header");
    if (k == 0 || k > (1u << 28)) {
        throw FormatError("inverted index: implausible vocabulary size");
    }
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        ids.push_back(binio::get_string(in, "index doc id"));
    }
    std::vector<float> stored_norms(n);
    for (auto& v : stored_norms) {
        v = binio::get_f32(in, "index doc norms");
    }
    std::vector<std::vector<BowEntry>> forward(n);
    std::int64_t prev_word = -1;
    while (in.peek() != std::char_traits<char>::eof()) {
        const WordId w = binio::get_u32(in, "index postings");
        if (w >= k || static_cast<std::int64_t>(w) <= prev_word) {
            throw FormatError("inverted index: posting words out of range or out of order");
        }
        prev_word = w;
        const std::uint32_t len = binio::get_u32(in, "index postings");
        if (len > n) {
            throw FormatError("inverted index: postings list longer than the corpus");
        }
        for (std::uint32_t i = 0; i < len; ++i) {
            const std::uint32_t doc = binio::get_u32(in, "index postings");
            const float weight = binio::get_f32(in, "index postings");
            if (doc >= n) {
                throw FormatError("inverted index: posting references unknown document");
            }
            forward[doc].push_back({w, weight});
        }
    }
    InvertedIndex index(k);
    for (std::uint32_t d = 0; d < n; ++d) {
        index.add_document(std::move(ids[d]), BowVector::from_sorted(k, std::move(forward[d])));
        if (std::abs(index.doc_norms_[d] - stored_norms[d]) > 1e-5 * std::max(1.0, index.doc_norms_[d])) {
            throw FormatError("inverted index: stored norm disagrees with postings for '" +
                              index.doc_ids_[d] + "'");
        }
    }
    return index;
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return load(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace vws
