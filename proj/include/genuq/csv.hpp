#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace genuq {

struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;  // rows x columns, file order
};

// Comma-separated, '.'-decimal, required header row, UTF-8; scientific
// notation accepted. Non-numeric or non-finite cells are rejected with the
// offending row and column named.
CsvTable read_csv(const std::string& path);

// Writes with 17 significant digits so a read round-trips every double
// exactly.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values);

}  // namespace genuq
