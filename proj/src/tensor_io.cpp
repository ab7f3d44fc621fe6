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

#include "vws/tensor_io.h"

#include <cmath>
#include <fstream>
#include <limits>

#include "vws/binary_io.h"
#include "vws/errors.h"

namespace vws {
namespace {

constexpr char kMagic[5] = "LFT1";
// Refuse headers that would need more than 4 GiB of payload.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 30;

}  // namespace

std::vector<float> FeatureTensor::local_feature(std::uint32_t n, std::uint32_t m) const {
    std::vector<float> v(depth);
    for (std::uint32_t d = 0; d < depth; ++d) {
        v[d] = at(d, n, m);
    }
    return v;
}

void validate_tensor(const FeatureTensor& t) {
    if (t.depth == 0 || t.rows == 0 || t.cols == 0 || t.width == 0 || t.height == 0) {
        throw ValidationError("tensor '" + t.image_id + "': all of D, N, M, W, H must be >= 1");
    }
    const std::uint64_t expected = std::uint64_t{t.depth} * t.rows * t.cols;
    if (t.data.size() != expected) {
        throw ValidationError("tensor '" + t.image_id + "': payload has " +
                              std::to_string(t.data.size()) + " values, header implies " +
                              std::to_string(expected));
    }
    for (float v : t.data) {
        if (!std::isfinite(v)) {
            throw ValidationError("tensor '" + t.image_id + "': non-finite value in payload");
        }
    }
}

void write_tensor(const FeatureTensor& t, std::ostream& out) {
    validate_tensor(t);
    binio::put_magic(out, kMagic);
    binio::put_u32(out, kTensorFormatVersion);
    binio::put_u32(out, t.depth);
    binio::put_u32(out, t.rows);
    binio::put_u32(out, t.cols);
    binio::put_u32(out, t.width);
    binio::put_u32(out, t.height);
    binio::put_string(out, t.image_id);
    for (float v : t.data) {
        binio::put_f32(out, v);
    }
    if (!out) {
        throw IoError("failed writing tensor '" + t.image_id + "'");
    }
}

void write_tensor(const FeatureTensor& t, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    try {
        write_tensor(t, out);
        out.flush();
        if (!out) {
            throw IoError("write failed");
        }
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

FeatureTensor read_tensor(std::istream& in) {
    binio::expect_magic(in, kMagic);
    binio::expect_version(in, kTensorFormatVersion, "tensor format");
    FeatureTensor t;
    t.depth = binio::get_u32(in, "tensor header");
    t.rows = binio::get_u32(in, "tensor header");
    t.cols = binio::get_u32(in, "tensor header");
    t.width = binio::get_u32(in, "tensor header");
    t.height = binio::get_u32(in, "tensor header");
    t.image_id = binio::get_string(in, "tensor image id");
    const std::uint64_t count = std::uint64_t{t.depth} * t.rows * t.cols;
    if (count > kMaxElements) {
        throw FormatError("tensor header declares an implausible payload size");
    }
    t.data.resize(count);
    for (auto& v : t.data) {
        v = binio::get_f32(in, "tensor payload");
    }
    validate_tensor(t);
    return t;
}

FeatureTensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return read_tensor(in);
    } catch (const TruncationError& e) {
        throw TruncationError(path.string() + ": " + e.what());
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

}  // namespace vws
