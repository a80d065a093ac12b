#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dwrom/common.hpp"

namespace dwrom {

using json = nlohmann::json;

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};
struct IntegrityError : std::runtime_error {
    explicit IntegrityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Binary artifact: magic "DWROM001", u32 version, named tensors with
// little-endian u64 dims and row-major 64-bit floats, then a length-prefixed
// JSON metadata block. Round-trips are bit-exact.
struct Artifact {
    std::map<std::string, Mat> tensors;  // vectors stored as n x 1
    json meta;

    const Mat& tensor(const std::string& name) const;
    Vec vector(const std::string& name) const;
};

void save_artifact(const std::string& path, const Artifact& art);
Artifact load_artifact(const std::string& path);

}  // namespace dwrom
