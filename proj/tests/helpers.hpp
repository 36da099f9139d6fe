#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "genuq/flow.hpp"
#include "genuq/rng.hpp"

namespace testutil {

// Fresh scratch directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0; i < 10000; ++i) {
            auto candidate = base / ("genuq_" + tag + "_" + std::to_string(i));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("cannot create temp dir");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Triples following x = a*y + b*z + c with Gaussian y, z.
inline std::vector<genuq::LabeledTriple> linear_triples(std::size_t n, double a, double b,
                                                        double c, std::uint64_t seed) {
    genuq::RngStream rng(seed, 0);
    std::vector<genuq::LabeledTriple> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        genuq::LabeledTriple t;
        t.y = Eigen::VectorXd::Constant(1, rng.normal());
        t.z = Eigen::VectorXd::Constant(1, rng.normal());
        t.x = Eigen::VectorXd::Constant(1, a * t.y[0] + b * t.z[0] + c);
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace testutil
