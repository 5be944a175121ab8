// SPDX-License-Identifier: Apache-2.0
#include "fsdet/params_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fsdet {

namespace {

constexpr char kMagic[4] = {'F', 'S', 'D', 'P'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "parameter blob writer assumes a little-endian host");

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    if (!is) throw std::runtime_error("parameter blob truncated");
    return v;
}

}  // namespace

void save_params(std::ostream& os, const ParamSet& params) {
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    write_u32(os, static_cast<std::uint32_t>(params.items.size()));
    for (const auto& p : params.items) {
        write_u32(os, static_cast<std::uint32_t>(p->name.size()));
        os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
        write_u32(os, static_cast<std::uint32_t>(p->value.rank()));
        for (int d : p->value.shape) write_u32(os, static_cast<std::uint32_t>(d));
        os.write(reinterpret_cast<const char*>(p->value.data.data()),
                 static_cast<std::streamsize>(p->value.data.size() * sizeof(float)));
    }
    if (!os) throw std::runtime_error("parameter blob write failed");
}

ParamSet load_params(std::istream& is) {
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("parameter blob: bad magic");
    const std::uint32_t version = read_u32(is);
    if (version != kVersion)
        throw std::runtime_error("parameter blob: unsupported version " +
                                 std::to_string(version));
    const std::uint32_t count = read_u32(is);
    ParamSet out;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t name_len = read_u32(is);
        if (name_len > 4096) throw std::runtime_error("parameter blob: absurd name length");
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const std::uint32_t rank = read_u32(is);
        if (rank > 8) throw std::runtime_error("parameter blob: absurd rank");
        std::vector<int> shape;
        for (std::uint32_t d = 0; d < rank; ++d)
            shape.push_back(static_cast<int>(read_u32(is)));
        Tensor value = Tensor::zeros(shape);
        is.read(reinterpret_cast<char*>(value.data.data()),
                static_cast<std::streamsize>(value.data.size() * sizeof(float)));
        if (!is) throw std::runtime_error("parameter blob truncated");
        out.add(std::move(name), std::move(value));
    }
    return out;
}

void save_params_file(const std::string& path, const ParamSet& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    save_params(os, params);
}

ParamSet load_params_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    return load_params(is);
}

}  // namespace fsdet
