#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "qjm/model.hpp"
#include "qjm/sample.hpp"

namespace qjm {

// CSV formats (UTF-8, comma separated, '.' decimal point, header required):
//   longitudinal: id,time,y[,<covariate>...]
//   survival:     id,entry,exit,event[,<covariate>...]   with event in {0,1}
// Parse failures throw DataError naming the file line.

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// 64-bit FNV-1a of `text` as 16 lowercase hex digits.
std::string fingerprint(std::string_view text);

void read_longitudinal_csv(std::istream& in, JointDataset& out);
void read_survival_csv(std::istream& in, JointDataset& out);
void write_longitudinal_csv(std::ostream& out, const JointDataset& data);
void write_survival_csv(std::ostream& out, const JointDataset& data);

/// Reads both tables (survival optional) and validates the result.
JointDataset read_dataset(const std::filesystem::path& longitudinal,
                          const std::optional<std::filesystem::path>& survival);

/// Header `iteration,<parameter>...`, one row per stored draw.
void write_posterior_csv(std::ostream& out, const PosteriorSample& sample);
PosteriorSample read_posterior_csv(std::istream& in);

}  // namespace qjm
