// SPDX-License-Identifier: Apache-2.0
#include "d2dra/binary_io.hpp"

#include <fstream>
#include <vector>

namespace d2dra::binary {

std::uint64_t file_checksum(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h = fnv1a(std::span<const char>(buf.data(), static_cast<std::size_t>(in.gcount())), h);
    }
    return h;
}

void atomic_write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw FormatError("cannot write " + tmp.string());
        writer(out);
        out.flush();
        if (!out)
            throw FormatError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace d2dra::binary
