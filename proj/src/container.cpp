#include "genuq/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <zlib.h>

#include "genuq/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "container format assumes a little-endian host");

namespace genuq {

std::size_t ContainerTensor::element_count() const {
    std::size_t n = 1;
    for (std::size_t s : shape) n *= s;
    return n;
}

namespace {

void append_bytes(std::string& buf, const void* p, std::size_t n) {
    buf.append(static_cast<const char*>(p), n);
}

std::uint32_t crc_of(const std::string& buf) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(buf.data()),
              static_cast<uInt>(buf.size())));
}

}  // namespace

void write_container(const std::string& path, const std::string& magic,
                     const Container& container) {
    if (magic.size() != 4) throw data_error("container: magic must be 4 bytes");

    nlohmann::json header = container.header;
    auto& manifest = header["tensors"] = nlohmann::json::array();
    for (const auto& t : container.tensors)
        manifest.push_back({{"name", t.name}, {"shape", t.shape}});

    std::string buf;
    buf.reserve(1024);
    append_bytes(buf, magic.data(), 4);
    std::uint32_t version = container.version;
    append_bytes(buf, &version, 4);
    const std::string header_text = header.dump();
    std::uint64_t header_len = header_text.size();
    append_bytes(buf, &header_len, 8);
    buf += header_text;
    for (const auto& t : container.tensors) {
        if (t.data.size() != t.element_count())
            throw data_error("container: tensor '" + t.name + "' size does not match shape");
        append_bytes(buf, t.data.data(), t.data.size() * sizeof(double));
    }
    std::uint32_t crc = crc_of(buf);
    append_bytes(buf, &crc, 4);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw data_error("write failed: " + path);
}

Container read_container(const std::string& path, const std::string& magic) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open file: " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < 20) throw data_error(path + ": truncated container file");
    if (buf.compare(0, 4, magic) != 0)
        throw data_error(path + ": wrong magic bytes (expected " + magic + ")");

    std::uint32_t stored_crc;
    std::memcpy(&stored_crc, buf.data() + buf.size() - 4, 4);
    std::string payload = buf.substr(0, buf.size() - 4);
    if (crc_of(payload) != stored_crc) throw data_error(path + ": checksum mismatch");

    Container c;
    std::memcpy(&c.version, buf.data() + 4, 4);
    if (c.version != 1)
        throw data_error(path + ": unsupported format version " + std::to_string(c.version));

    std::uint64_t header_len;
    std::memcpy(&header_len, buf.data() + 8, 8);
    std::size_t pos = 16;
    if (pos + header_len > payload.size()) throw data_error(path + ": truncated header");
    try {
        c.header = nlohmann::json::parse(buf.substr(pos, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw data_error(path + ": malformed header: " + e.what());
    }
    pos += header_len;

    if (!c.header.contains("tensors") || !c.header["tensors"].is_array())
        throw data_error(path + ": header missing tensor manifest");
    for (const auto& entry : c.header["tensors"]) {
        ContainerTensor t;
        t.name = entry.at("name").get<std::string>();
        t.shape = entry.at("shape").get<std::vector<std::size_t>>();
        const std::size_t n = t.element_count();
        if (pos + n * sizeof(double) > payload.size())
            throw data_error(path + ": truncated tensor '" + t.name + "'");
        t.data.resize(n);
        std::memcpy(t.data.data(), buf.data() + pos, n * sizeof(double));
        pos += n * sizeof(double);
        c.tensors.push_back(std::move(t));
    }
    if (pos != payload.size()) throw data_error(path + ": trailing bytes after tensors");
    return c;
}

}  // namespace genuq
