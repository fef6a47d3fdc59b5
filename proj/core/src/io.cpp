#include "qjm/io.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

#include "qjm/error.hpp"

namespace qjm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    const std::string_view field =
        trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                : comma - start));
    out.emplace_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

class CsvReader {
 public:
  CsvReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

  // Returns false at end of input; skips blank lines.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line_no_ == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
      }
      if (trim(line).empty()) continue;
      fields = split(line);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(name_ + " line " + std::to_string(line_no_) + ": " + what);
  }

  double number(const std::string& field, const char* column) const {
    double v = 0.0;
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (field.empty() || ec != std::errc() || ptr != end) {
      fail(std::string("missing or malformed value in column '") + column + "': '" + field + "'");
    }
    return v;
  }

 private:
  std::istream& in_;
  std::string name_;
  long line_no_ = 0;
};

void expect_header(CsvReader& reader, const std::vector<std::string>& header,
                   const std::vector<std::string>& required) {
  if (header.size() < required.size()) reader.fail("header too short");
  for (std::size_t i = 0; i < required.size(); ++i) {
    if (header[i] != required[i]) {
      reader.fail("expected header column '" + required[i] + "', found '" + header[i] + "'");
    }
  }
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

std::string fingerprint(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void read_longitudinal_csv(std::istream& in, JointDataset& out) {
  CsvReader reader(in, "longitudinal CSV");
  std::vector<std::string> fields;
  if (!reader.next(fields)) reader.fail("empty file");
  expect_header(reader, fields, {"id", "time", "y"});
  out.covariate_names.assign(fields.begin() + 3, fields.end());
  const std::size_t width = fields.size();
  out.longitudinal.clear();
  while (reader.next(fields)) {
    if (fields.size() != width) reader.fail("expected " + std::to_string(width) + " fields");
    LongitudinalRecord r;
    r.subject_id = fields[0];
    if (r.subject_id.empty()) reader.fail("empty subject id");
    r.time = reader.number(fields[1], "time");
    r.response = reader.number(fields[2], "y");
    for (std::size_t j = 3; j < width; ++j) {
      r.covariates.push_back(reader.number(fields[j], out.covariate_names[j - 3].c_str()));
    }
    out.longitudinal.push_back(std::move(r));
  }
}

void read_survival_csv(std::istream& in, JointDataset& out) {
  CsvReader reader(in, "survival CSV");
  std::vector<std::string> fields;
  if (!reader.next(fields)) reader.fail("empty file");
  expect_header(reader, fields, {"id", "entry", "exit", "event"});
  out.survival_covariate_names.assign(fields.begin() + 4, fields.end());
  const std::size_t width = fields.size();
  out.survival.clear();
  while (reader.next(fields)) {
    if (fields.size() != width) reader.fail("expected " + std::to_string(width) + " fields");
    SurvivalRecord s;
    s.subject_id = fields[0];
    if (s.subject_id.empty()) reader.fail("empty subject id");
    s.entry = reader.number(fields[1], "entry");
    s.exit = reader.number(fields[2], "exit");
    if (fields[3] == "1") {
      s.event = true;
    } else if (fields[3] == "0") {
      s.event = false;
    } else {
      reader.fail("event must be 0 or 1, got '" + fields[3] + "'");
    }
    for (std::size_t j = 4; j < width; ++j) {
      s.covariates.push_back(
          reader.number(fields[j], out.survival_covariate_names[j - 4].c_str()));
    }
    out.survival.push_back(std::move(s));
  }
}

void write_longitudinal_csv(std::ostream& out, const JointDataset& data) {
  out << "id,time,y";
  for (const auto& name : data.covariate_names) out << ',' << name;
  out << '\n';
  for (const auto& r : data.longitudinal) {
    out << r.subject_id << ',' << format_double(r.time) << ',' << format_double(r.response);
    for (double c : r.covariates) out << ',' << format_double(c);
    out << '\n';
  }
}

void write_survival_csv(std::ostream& out, const JointDataset& data) {
  out << "id,entry,exit,event";
  for (const auto& name : data.survival_covariate_names) out << ',' << name;
  out << '\n';
  for (const auto& s : data.survival) {
    out << s.subject_id << ',' << format_double(s.entry) << ',' << format_double(s.exit) << ','
        << (s.event ? '1' : '0');
    for (double c : s.covariates) out << ',' << format_double(c);
    out << '\n';
  }
}

JointDataset read_dataset(const std::filesystem::path& longitudinal,
                          const std::optional<std::filesystem::path>& survival) {
  JointDataset data;
  {
    std::ifstream in(longitudinal);
    if (!in) throw DataError("cannot open longitudinal CSV " + longitudinal.string());
    read_longitudinal_csv(in, data);
  }
  if (survival) {
    std::ifstream in(*survival);
    if (!in) throw DataError("cannot open survival CSV " + survival->string());
    read_survival_csv(in, data);
  }
  data.validate();
  return data;
}

void write_posterior_csv(std::ostream& out, const PosteriorSample& sample) {
  out << "iteration";
  for (const auto& name : sample.names()) out << ',' << name;
  out << '\n';
  for (std::size_t d = 0; d < sample.draws(); ++d) {
    out << sample.iterations()[d];
    for (std::size_t j = 0; j < sample.parameters(); ++j) {
      out << ',' << format_double(sample.column(j)[d]);
    }
    out << '\n';
  }
}

PosteriorSample read_posterior_csv(std::istream& in) {
  CsvReader reader(in, "posterior CSV");
  std::vector<std::string> fields;
  if (!reader.next(fields)) reader.fail("empty file");
  if (fields.empty() || fields[0] != "iteration") reader.fail("first column must be 'iteration'");
  PosteriorSample sample(std::vector<std::string>(fields.begin() + 1, fields.end()));
  const std::size_t width = fields.size();
  std::vector<double> row(width - 1);
  while (reader.next(fields)) {
    if (fields.size() != width) reader.fail("expected " + std::to_string(width) + " fields");
    const double it = reader.number(fields[0], "iteration");
    for (std::size_t j = 1; j < width; ++j) {
      row[j - 1] = reader.number(fields[j], sample.names()[j - 1].c_str());
    }
    sample.append(static_cast<long>(it), row);
  }
  return sample;
}

}  // namespace qjm
