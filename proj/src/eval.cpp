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

#include "vws/eval.h"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "vws/errors.h"

namespace vws {

void GroundTruth::validate() const {
    if (positives.empty()) {
        throw ValidationError("ground truth '" + query_id + "': no positives");
    }
    for (const auto& p : positives) {
        if (ignores.contains(p)) {
            throw ValidationError("ground truth '" + query_id + "': '" + p + "' is both positive and ignored");
        }
    }
}

double average_precision(const RankedList& ranking, const GroundTruth& truth) {
    truth.validate();
    std::size_t rank = 0;
    std::size_t hits = 0;
    double sum = 0.0;
    for (const auto& item : ranking.items) {
        if (truth.ignores.contains(item.doc_id)) {
            continue;
        }
        ++rank;
        if (truth.positives.contains(item.doc_id)) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(rank);
        }
    }
    return sum / static_cast<double>(truth.positives.size());
}

double mean_average_precision(std::span<const RankedList> rankings, std::span<const GroundTruth> truths) {
    if (rankings.empty()) {
        throw ValidationError("mean_average_precision: no rankings");
    }
    std::map<std::string_view, const GroundTruth*> by_query;
    for (const auto& t : truths) {
        by_query[t.query_id] = &t;
    }
    double sum = 0.0;
    for (const auto& r : rankings) {
        const auto it = by_query.find(r.query_id);
        if (it == by_query.end()) {
            throw ValidationError("mean_average_precision: no ground truth for query '" + r.query_id + "'");
        }
        sum += average_precision(r, *it->second);
    }
    return sum / static_cast<double>(rankings.size());
}

std::vector<GroundTruth> read_ground_truth(std::istream& in) {
    std::map<std::string, GroundTruth> by_query;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream fields(line);
        std::string query, doc, label, extra;
        if (!std::getline(fields, query, '\t') || !std::getline(fields, doc, '\t') ||
            !std::getline(fields, label, '\t') || std::getline(fields, extra, '\t') || query.empty() ||
            doc.empty()) {
            throw FormatError("ground truth line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
        }
        auto& gt = by_query[query];
        gt.query_id = query;
        if (label == "pos") {
            gt.positives.insert(doc);
        } else if (label == "ignore") {
            gt.ignores.insert(doc);
        } else {
            throw FormatError("ground truth line " + std::to_string(line_no) + ": unknown label '" + label + "'");
        }
    }
    std::vector<GroundTruth> out;
    for (auto& [q, gt] : by_query) {
        gt.validate();
        out.push_back(std::move(gt));
    }
    return out;
}

std::vector<GroundTruth> read_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return read_ground_truth(in);
}

void write_ground_truth(std::ostream& out, std::span<const GroundTruth> truths) {
    for (const auto& t : truths) {
        for (const auto& p : t.positives) {
            out << t.query_id << '\t' << p << "\tpos\n";
        }
        for (const auto& i : t.ignores) {
            out << t.query_id << '\t' << i << "\tignore\n";
        }
    }
}

void write_ranking(std::ostream& out, const RankedList& ranking) {
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << std::setprecision(10);
    std::size_t rank = 0;
    for (const auto& item : ranking.items) {
        out << ++rank << '\t' << item.doc_id << '\t' << item.score << '\n';
    }
    out.flags(flags);
    out.precision(prec);
}

RankedList read_ranking(std::istream& in, std::string query_id) {
    RankedList r;
    r.query_id = std::move(query_id);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::istringstream fields(line);
        std::string rank, doc, score;
        if (!std::getline(fields, rank, '\t') || !std::getline(fields, doc, '\t') || !std::getline(fields, score)) {
            throw FormatError("ranking '" + r.query_id + "' line " + std::to_string(line_no) +
                              ": expected <rank>\\t<doc_id>\\t<score>");
        }
        try {
            r.items.push_back({doc, std::stod(score)});
        } catch (const std::exception&) {
            throw FormatError("ranking '" + r.query_id + "' line " + std::to_string(line_no) + ": bad score");
        }
    }
    r.check_invariants();
    return r;
}

}  // namespace vws
