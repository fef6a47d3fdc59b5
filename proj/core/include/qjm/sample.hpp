#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qjm {

struct SampleMetadata {
  std::string mode;
  std::optional<double> tau;
  std::uint64_t seed = 0;
  std::string spec_hash;
  // Wall-clock stamps; kept in memory only so written outputs stay
  // reproducible.
  std::string started_at;
  std::string finished_at;
};

/// Thinned post-burn-in draws, stored column-wise by parameter name.
class PosteriorSample {
 public:
  PosteriorSample() = default;
  explicit PosteriorSample(std::vector<std::string> names);

  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t parameters() const noexcept { return names_.size(); }
  std::size_t draws() const noexcept { return iterations_.size(); }
  const std::vector<long>& iterations() const noexcept { return iterations_; }

  bool contains(const std::string& name) const;
  /// Throws std::out_of_range for an unknown name.
  const std::vector<double>& column(const std::string& name) const;
  const std::vector<double>& column(std::size_t j) const { return columns_.at(j); }

  void reserve(std::size_t draws);
  /// Throws std::invalid_argument unless row.size() == parameters().
  void append(long iteration, std::span<const double> row);

  SampleMetadata metadata;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::vector<long> iterations_;
};

}  // namespace qjm
