#include "dwrom/artifacts.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

namespace dwrom {

namespace {

constexpr char kMagic[8] = {'D', 'W', 'R', 'O', 'M', '0', '0', '1'};
constexpr uint32_t kVersion = 1;

static_assert(sizeof(double) == 8, "artifact format assumes 64-bit doubles");

// Multi-byte fields are written little-endian regardless of host order.
template <typename T>
void write_le(std::ostream& os, T value) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(std::begin(buf), std::end(buf));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!is) throw IntegrityError("artifact truncated");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(std::begin(buf), std::end(buf));
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

}  // namespace

const Mat& Artifact::tensor(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw FormatError("artifact has no tensor '" + name + "'");
    return it->second;
}

Vec Artifact::vector(const std::string& name) const {
    const Mat& m = tensor(name);
    if (m.cols() != 1) throw FormatError("tensor '" + name + "' is not a vector");
    return m.col(0);
}

void save_artifact(const std::string& path, const Artifact& art) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os.write(kMagic, sizeof(kMagic));
    write_le<uint32_t>(os, kVersion);
    write_le<uint64_t>(os, art.tensors.size());
    for (const auto& [name, m] : art.tensors) {
        write_le<uint64_t>(os, name.size());
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_le<uint64_t>(os, 2);  // rank
        write_le<uint64_t>(os, static_cast<uint64_t>(m.rows()));
        write_le<uint64_t>(os, static_cast<uint64_t>(m.cols()));
        for (Eigen::Index r = 0; r < m.rows(); ++r)  // row-major payload
            for (Eigen::Index c = 0; c < m.cols(); ++c) write_le<double>(os, m(r, c));
    }
    const std::string meta = art.meta.dump();
    write_le<uint64_t>(os, meta.size());
    os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

Artifact load_artifact(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw FormatError("bad artifact magic in '" + path + "'");
    const auto version = read_le<uint32_t>(is);
    if (version != kVersion)
        throw FormatError("unsupported artifact version " + std::to_string(version));

    Artifact art;
    const auto n_tensors = read_le<uint64_t>(is);
    for (uint64_t t = 0; t < n_tensors; ++t) {
        const auto name_len = read_le<uint64_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), static_cast<std::streamsize>(name_len));
        if (!is) throw IntegrityError("artifact truncated in tensor name");
        const auto rank = read_le<uint64_t>(is);
        if (rank != 2) throw FormatError("unsupported tensor rank " + std::to_string(rank));
        const auto rows = read_le<uint64_t>(is);
        const auto cols = read_le<uint64_t>(is);
        Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (uint64_t r = 0; r < rows; ++r)
            for (uint64_t c = 0; c < cols; ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    read_le<double>(is);
        art.tensors.emplace(std::move(name), std::move(m));
    }
    const auto meta_len = read_le<uint64_t>(is);
    std::string meta(meta_len, '\0');
    is.read(meta.data(), static_cast<std::streamsize>(meta_len));
    if (!is) throw IntegrityError("artifact truncated in metadata");
    try {
        art.meta = json::parse(meta);
    } catch (const json::parse_error& e) {
        throw IntegrityError(std::string("artifact metadata is not valid JSON: ") + e.what());
    }
    return art;
}

}  // namespace dwrom
