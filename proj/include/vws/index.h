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

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vws/bow.h"

namespace vws {

struct RankedItem {
    std::string doc_id;
    double score = 0.0;

    bool operator==(const RankedItem&) const = default;
};

// Documents ordered by non-increasing score; doc ids are unique.
struct RankedList {
    std::string query_id;
    std::vector<RankedItem> items;

    std::size_t size() const { return items.size(); }
    void check_invariants() const;
};

// A query image: its assignment map and, for local search, the pixel box
// of the object. Without a box the whole image is the query (global search).
struct QuerySpec {
    std::string query_id;
    AssignmentMap map;
    std::optional<PixelBox> box;

    bool is_local() const { return box.has_value(); }
};

/// Map region the query BoW is built from: the box cells (LS) or the whole
/// map (GS).
MapRegion query_region(const QuerySpec& spec);
/// Pixel box of the query object: the given box, or the whole image.
PixelBox query_pixel_box(const QuerySpec& spec);
/// BoW of query_region(spec), never center-prior weighted.
BowVector build_query(const QuerySpec& spec);

struct Posting {
    std::uint32_t doc = 0;  // ordinal
    double weight = 0.0;
};

/// Word -> postings index over document BoWs with exact cosine retrieval.
/// Append-only. add_document needs exclusive access; const members are safe
/// to call concurrently.
class InvertedIndex {
 public:
    explicit InvertedIndex(std::uint32_t vocabulary_size);

    std::uint32_t vocabulary_size() const { return vocabulary_size_; }
    std::size_t doc_count() const { return doc_ids_.size(); }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    std::optional<std::uint32_t> ordinal(std::string_view doc_id) const;

    /// Throws ConflictError on a duplicate id, ValidationError on K mismatch.
    void add_document(std::string doc_id, const BowVector& bow);

    const BowVector& document(std::uint32_t ordinal) const { return docs_.at(ordinal); }
    /// Throws DataError for an unknown id.
    const BowVector& document(std::string_view doc_id) const;
    double doc_norm(std::uint32_t ordinal) const { return doc_norms_.at(ordinal); }
    const std::vector<Posting>& postings(WordId word) const { return postings_.at(word); }
    std::size_t total_postings() const { return total_postings_; }

    /// Exact cosine top-k, traversing only the postings of the query's words.
    /// Zero-score documents are omitted; ties go to the smaller doc id.
    RankedList search(const BowVector& query, std::size_t top_k,
                      std::string query_id = {}) const;

    /// Rebuilds norms and the posting count from the postings and throws
    /// ValidationError on any disagreement.
    void check_invariants() const;

    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
    static InvertedIndex load(std::istream& in);
    static InvertedIndex load(const std::filesystem::path& path);

 private:
    std::uint32_t vocabulary_size_;
    std::vector<std::string> doc_ids_;
    std::unordered_map<std::string, std::uint32_t> by_id_;
    std::vector<std::vector<Posting>> postings_;
    std::vector<double> doc_norms_;
    std::vector<BowVector> docs_;
    std::size_t total_postings_ = 0;
};

}  // namespace vws
