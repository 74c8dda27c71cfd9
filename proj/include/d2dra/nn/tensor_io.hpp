// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "d2dra/nn/layers.hpp"

namespace d2dra::nn {

/// Row-major named tensor as stored in parameter files.
struct NamedTensor {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::vector<double> data;

    bool operator==(const NamedTensor&) const = default;
};

NamedTensor to_named(const std::string& name, const Matrix& m);
/// Copies a rank-2 (or rank-1 column) tensor into `m`; throws FormatError on
/// a shape mismatch.
void assign_from(const NamedTensor& t, Matrix& m);

/// Parameter file: magic "D2DNN\0\1\0" followed by the tensors, each as
/// {u16 name length, utf-8 name, u8 rank, u32 dims, f64 data}, all
/// little-endian.
void write_tensors(std::ostream& out, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_tensors(std::istream& in);

}  // namespace d2dra::nn
