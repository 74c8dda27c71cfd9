// SPDX-License-Identifier: Apache-2.0
#include "d2dra/nn/tensor_io.hpp"

#include <istream>
#include <ostream>

#include "d2dra/binary_io.hpp"

namespace d2dra::nn {

namespace {
constexpr char kMagic[8] = {'D', '2', 'D', 'N', 'N', '\x00', '\x01', '\x00'};
}

NamedTensor to_named(const std::string& name, const Matrix& m)
{
    NamedTensor t;
    t.name = name;
    t.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
    t.data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            t.data.push_back(m(r, c));
    return t;
}

void assign_from(const NamedTensor& t, Matrix& m)
{
    const Eigen::Index rows = t.dims.empty() ? 1 : t.dims[0];
    const Eigen::Index cols = t.dims.size() >= 2 ? t.dims[1] : 1;
    if (t.dims.size() > 2 || rows != m.rows() || cols != m.cols())
        throw FormatError("tensor '" + t.name + "' has an unexpected shape");
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = t.data[static_cast<std::size_t>(r * cols + c)];
}

void write_tensors(std::ostream& out, const std::vector<NamedTensor>& tensors)
{
    binary::write_magic(out, kMagic);
    for (const auto& t : tensors) {
        binary::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(t.name.size()));
        out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        binary::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.dims.size()));
        for (auto d : t.dims)
            binary::write_le<std::uint32_t>(out, d);
        for (double v : t.data)
            binary::write_f64(out, v);
    }
}

std::vector<NamedTensor> read_tensors(std::istream& in)
{
    binary::expect_magic(in, kMagic, "parameter file");
    std::vector<NamedTensor> tensors;
    while (in.peek() != std::char_traits<char>::eof()) {
        NamedTensor t;
        const auto len = binary::read_le<std::uint16_t>(in);
        t.name.resize(len);
        if (!in.read(t.name.data(), len))
            throw FormatError("truncated tensor name");
        const auto rank = binary::read_le<std::uint8_t>(in);
        std::size_t count = 1;
        for (int r = 0; r < rank; ++r) {
            t.dims.push_back(binary::read_le<std::uint32_t>(in));
            count *= t.dims.back();
        }
        t.data.resize(count);
        for (auto& v : t.data)
            v = binary::read_f64(in);
        tensors.push_back(std::move(t));
    }
    return tensors;
}

}  // namespace d2dra::nn
