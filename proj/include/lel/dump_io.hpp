#pragma once

#include "lel/model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lel {

// On-disk layout of a dump directory:
//
//   meta.json      {"source", "n", "d", "has_sigma", "seed"?, "hyper_params"?}
//   mu.csv         header dim_0..dim_{d-1}, N data rows
//   sigma_sq.csv   optional, same shape as mu.csv
//   labels.csv     optional, header "label", N integer rows
//
// Reals are written with 17 significant digits so a save/load cycle is exact.

LatentDump load_dump(const std::filesystem::path& dir);

// Creates dir if needed. Throws DataError for an invalid dump and IoError when
// the directory or a file cannot be written.
void save_dump(const LatentDump& dump, const std::filesystem::path& dir);

// Empty iff every LatentDump invariant holds. Never throws.
std::vector<std::string> validate(const LatentDump& dump);

// Lower-level CSV helpers shared with the CLI.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& file);
void write_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& file,
                      const std::vector<std::string>& header);
std::string format_real(double v);

}  // namespace lel
