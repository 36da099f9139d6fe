#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace genuq {

// Binary artifact container shared by model checkpoints (magic "GQUQ") and
// reducers (magic "GQRD"):
//
//   magic[4] | version u32 LE | header_len u64 LE | header JSON (UTF-8)
//   | tensor payloads, f64 LE, in declaration order | crc32 u32 LE
//
// The CRC covers everything before it. Tensor names and shapes live in the
// header under "tensors"; payloads carry raw values only. No timestamps or
// other machine state are written, so identical inputs produce identical
// bytes.
struct ContainerTensor {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> data;  // row-major

    std::size_t element_count() const;
};

struct Container {
    std::uint32_t version = 1;
    nlohmann::json header;
    std::vector<ContainerTensor> tensors;
};

void write_container(const std::string& path, const std::string& magic,
                     const Container& container);

// Verifies magic, version, and checksum; reads tensors per the header
// manifest.
Container read_container(const std::string& path, const std::string& magic);

}  // namespace genuq
