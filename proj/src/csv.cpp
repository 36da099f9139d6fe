#include "genuq/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "genuq/errors.hpp"

namespace genuq {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col,
                  const std::string& path) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw data_error(path + ": non-numeric cell at data row " + std::to_string(row + 1) +
                         ", column " + std::to_string(col + 1) + ": '" + cell + "'");
    }
    if (!std::isfinite(v)) {
        throw data_error(path + ": non-finite cell at data row " + std::to_string(row + 1) +
                         ", column " + std::to_string(col + 1) + ": '" + cell + "'");
    }
    return v;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw data_error(path + ": empty file, header row required");
    CsvTable table;
    table.header = split_line(line);
    const std::size_t ncols = table.header.size();
    if (ncols == 0) throw data_error(path + ": empty header row");

    std::vector<double> cells;
    std::size_t nrows = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != ncols) {
            throw data_error(path + ": data row " + std::to_string(nrows + 1) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(ncols));
        }
        for (std::size_t c = 0; c < ncols; ++c) {
            cells.push_back(parse_cell(fields[c], nrows, c, path));
        }
        ++nrows;
    }

    table.values.resize(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(ncols));
    for (std::size_t r = 0; r < nrows; ++r)
        for (std::size_t c = 0; c < ncols; ++c)
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                cells[r * ncols + c];
    return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values) {
    if (header.size() != static_cast<std::size_t>(values.cols()))
        throw data_error("write_csv: header length does not match column count");
    std::ofstream out(path);
    if (!out) throw data_error("cannot write file: " + path);

    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) out << ',';
        out << header[c];
    }
    out << '\n';

    char buf[64];
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            if (c) out << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", values(r, c));
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw data_error("write failed: " + path);
}

}  // namespace genuq
