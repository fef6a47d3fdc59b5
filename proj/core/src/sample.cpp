#include "qjm/sample.hpp"

#include <algorithm>
#include <stdexcept>

namespace qjm {

PosteriorSample::PosteriorSample(std::vector<std::string> names)
    : names_(std::move(names)), columns_(names_.size()) {}

bool PosteriorSample::contains(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<double>& PosteriorSample::column(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

void PosteriorSample::reserve(std::size_t draws) {
  iterations_.reserve(draws);
  for (auto& c : columns_) c.reserve(draws);
}

void PosteriorSample::append(long iteration, std::span<const double> row) {
  if (row.size() != names_.size()) {
    throw std::invalid_argument("posterior row has the wrong number of parameters");
  }
  iterations_.push_back(iteration);
  for (std::size_t j = 0; j < row.size(); ++j) columns_[j].push_back(row[j]);
}

}  // namespace qjm
