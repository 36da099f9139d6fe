#include <doctest.h>

#include <string>

#include "genuq/container.hpp"
#include "genuq/errors.hpp"
#include "helpers.hpp"

using genuq::Container;
using genuq::ContainerTensor;

namespace {

Container sample_container() {
    Container c;
    c.header = {{"kind", "test"}, {"note", 7}};
    ContainerTensor t1;
    t1.name = "a";
    t1.shape = {2, 3};
    t1.data = {1.0, -2.5, 3.25, 0.0, 1e-300, 4e17};
    ContainerTensor t2;
    t2.name = "b";
    t2.shape = {4};
    t2.data = {0.1, 0.2, 0.3, 0.4};
    c.tensors = {t1, t2};
    return c;
}

}  // namespace

TEST_SUITE("container") {

TEST_CASE("round trip preserves header and tensors exactly") {
    testutil::TempDir tmp("container");
    auto path = tmp.file("c.bin");
    Container c = sample_container();
    genuq::write_container(path, "GQUQ", c);
    Container back = genuq::read_container(path, "GQUQ");
    CHECK(back.version == c.version);
    // The writer appends the tensor manifest to the stored header.
    nlohmann::json hdr = back.header;
    hdr.erase("tensors");
    CHECK(hdr == c.header);
    REQUIRE(back.tensors.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back.tensors[i].name == c.tensors[i].name);
        CHECK(back.tensors[i].shape == c.tensors[i].shape);
        CHECK(back.tensors[i].data == c.tensors[i].data);
    }
}

TEST_CASE("writing twice produces identical bytes") {
    testutil::TempDir tmp("container");
    Container c = sample_container();
    genuq::write_container(tmp.file("a.bin"), "GQRD", c);
    genuq::write_container(tmp.file("b.bin"), "GQRD", c);
    CHECK(testutil::read_file(tmp.file("a.bin")) == testutil::read_file(tmp.file("b.bin")));
}

TEST_CASE("wrong magic is rejected") {
    testutil::TempDir tmp("container");
    auto path = tmp.file("c.bin");
    genuq::write_container(path, "GQUQ", sample_container());
    CHECK_THROWS_AS(genuq::read_container(path, "GQRD"), genuq::data_error);

    std::string raw = testutil::read_file(path);
    raw[2] = 'Z';
    testutil::write_file(path, raw);
    CHECK_THROWS_AS(genuq::read_container(path, "GQUQ"), genuq::data_error);
}

TEST_CASE("unsupported version is rejected") {
    testutil::TempDir tmp("container");
    auto path = tmp.file("c.bin");
    Container c = sample_container();
    c.version = 9;  // valid CRC, unknown version
    genuq::write_container(path, "GQUQ", c);
    CHECK_THROWS_AS(genuq::read_container(path, "GQUQ"), genuq::data_error);
}

TEST_CASE("truncation at any boundary is rejected") {
    testutil::TempDir tmp("container");
    auto path = tmp.file("c.bin");
    genuq::write_container(path, "GQUQ", sample_container());
    std::string raw = testutil::read_file(path);
    for (std::size_t keep : {std::size_t{0}, std::size_t{3}, std::size_t{9},
                             raw.size() / 2, raw.size() - 1}) {
        auto cut = tmp.file("cut.bin");
        testutil::write_file(cut, raw.substr(0, keep));
        CHECK_THROWS_AS(genuq::read_container(cut, "GQUQ"), genuq::data_error);
    }
}

TEST_CASE("bit flips fail the checksum") {
    testutil::TempDir tmp("container");
    auto path = tmp.file("c.bin");
    genuq::write_container(path, "GQUQ", sample_container());
    std::string raw = testutil::read_file(path);
    // Flip one byte in the tensor payload region (near the end, before CRC).
    const std::size_t pos = raw.size() - 12;
    raw[pos] = static_cast<char>(raw[pos] ^ 0x01);
    testutil::write_file(path, raw);
    CHECK_THROWS_AS(genuq::read_container(path, "GQUQ"), genuq::data_error);
}

TEST_CASE("trailing bytes are rejected") {
    testutil::TempDir tmp("container");
    auto path = tmp.file("c.bin");
    genuq::write_container(path, "GQUQ", sample_container());
    std::string raw = testutil::read_file(path) + std::string("junk");
    testutil::write_file(path, raw);
    CHECK_THROWS_AS(genuq::read_container(path, "GQUQ"), genuq::data_error);
}

TEST_CASE("missing file is reported") {
    testutil::TempDir tmp("container");
    CHECK_THROWS_AS(genuq::read_container(tmp.file("nope.bin"), "GQUQ"), genuq::data_error);
}

}  // TEST_SUITE
