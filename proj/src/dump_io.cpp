#include "lel/dump_io.hpp"

#include "lel/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace fs = std::filesystem;

namespace lel {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Lines of a text file with CR stripped and blank lines dropped.
std::vector<std::string> read_lines(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

double parse_real(std::string_view field, const fs::path& file, std::size_t row) {
  double value = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec == std::errc::result_out_of_range) {
    throw DataError(file.filename().string() + " row " + std::to_string(row) +
                    ": value out of range '" + std::string(field) + "'");
  }
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw FormatError(file.filename().string() + " row " + std::to_string(row) +
                      ": cannot parse '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw DataError(file.filename().string() + " row " + std::to_string(row) +
                    ": non-finite entry '" + std::string(field) + "'");
  }
  return value;
}

std::vector<std::string> dim_header(Eigen::Index d) {
  std::vector<std::string> h;
  h.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) h.push_back("dim_" + std::to_string(j));
  return h;
}

std::vector<int> read_labels(const fs::path& file) {
  const auto lines = read_lines(file);
  if (lines.empty() || split_fields(lines.front()).front() != "label") {
    throw FormatError("labels.csv must start with the header 'label'");
  }
  std::vector<int> labels;
  labels.reserve(lines.size() - 1);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_fields(lines[r]);
    int v = 0;
    const auto f = fields.front();
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (fields.size() != 1 || ec != std::errc{} || ptr != f.data() + f.size()) {
      throw FormatError("labels.csv row " + std::to_string(r) + ": expected one integer");
    }
    labels.push_back(v);
  }
  return labels;
}

template <typename Fn>
void write_file(const fs::path& file, Fn&& fill) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  fill(out);
  out.flush();
  if (!out) throw IoError("write failed for " + file.string());
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc{}) throw Error("format_real: buffer too small");
  return std::string(buf, ptr);
}

Eigen::MatrixXd read_matrix_csv(const fs::path& file) {
  const auto lines = read_lines(file);
  if (lines.empty()) throw FormatError(file.filename().string() + " is empty");
  const auto header = split_fields(lines.front());
  const auto expected = dim_header(static_cast<Eigen::Index>(header.size()));
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] != expected[j]) {
      throw FormatError(file.filename().string() + ": header column " + std::to_string(j) +
                        " is '" + std::string(header[j]) + "', expected '" + expected[j] + "'");
    }
  }
  const auto d = static_cast<Eigen::Index>(header.size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(lines.size() - 1), d);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_fields(lines[r]);
    if (static_cast<Eigen::Index>(fields.size()) != d) {
      throw FormatError(file.filename().string() + " row " + std::to_string(r) + ": expected " +
                        std::to_string(d) + " fields, found " + std::to_string(fields.size()));
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      m(static_cast<Eigen::Index>(r - 1), j) = parse_real(fields[static_cast<std::size_t>(j)], file, r);
    }
  }
  return m;
}

void write_matrix_csv(const Eigen::MatrixXd& m, const fs::path& file,
                      const std::vector<std::string>& header) {
  write_file(file, [&](std::ofstream& out) {
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_real(m(i, j));
      out << '\n';
    }
  });
}

std::vector<std::string> validate(const LatentDump& dump) {
  std::vector<std::string> v;
  if (dump.n() < 2) v.emplace_back("N >= 2 violated");
  if (dump.d() < 1) v.emplace_back("d >= 1 violated");
  if (!dump.mu.allFinite()) v.emplace_back("mu contains non-finite entries");
  if (dump.sigma_sq) {
    const auto& s = *dump.sigma_sq;
    if (s.rows() != dump.n() || s.cols() != dump.d()) {
      v.emplace_back("sigma_sq shape " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()) +
                     " differs from mu shape " + std::to_string(dump.n()) + "x" +
                     std::to_string(dump.d()));
    }
    if (!s.allFinite()) v.emplace_back("sigma_sq contains non-finite entries");
    if (s.size() > 0 && !(s.array() > 0.0).all()) {
      v.emplace_back("sigma_sq positivity violated (entry <= 0)");
    }
  }
  if (dump.labels && static_cast<Eigen::Index>(dump.labels->size()) != dump.n()) {
    v.emplace_back("labels length " + std::to_string(dump.labels->size()) + " differs from N = " +
                   std::to_string(dump.n()));
  }
  return v;
}

LatentDump load_dump(const fs::path& dir) {
  const auto meta_file = dir / "meta.json";
  const auto mu_file = dir / "mu.csv";
  if (!fs::is_directory(dir)) throw FormatError(dir.string() + " is not a dump directory");
  if (!fs::exists(mu_file)) throw FormatError("missing mu.csv in " + dir.string());
  if (!fs::exists(meta_file)) throw FormatError("missing meta.json in " + dir.string());

  nlohmann::json meta;
  {
    std::ifstream in(meta_file);
    if (!in) throw IoError("cannot open " + meta_file.string());
    try {
      in >> meta;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("meta.json: " + std::string(e.what()));
    }
  }
  if (!meta.is_object()) throw FormatError("meta.json must hold an object");

  LatentDump dump;
  dump.mu = read_matrix_csv(mu_file);

  try {
    dump.meta.source = meta.value("source", std::string("unknown"));
    if (meta.contains("seed") && !meta["seed"].is_null()) {
      dump.meta.seed = meta["seed"].get<std::uint64_t>();
    }
    if (meta.contains("hyper_params")) dump.meta.hyper_params = meta["hyper_params"];
    if (meta.contains("n") && meta["n"].get<long long>() != dump.n()) {
      throw ConsistencyError("meta.json n = " + meta["n"].dump() + " but mu.csv has " +
                             std::to_string(dump.n()) + " rows");
    }
    if (meta.contains("d") && meta["d"].get<long long>() != dump.d()) {
      throw ConsistencyError("meta.json d = " + meta["d"].dump() + " but mu.csv has " +
                             std::to_string(dump.d()) + " columns");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("meta.json: " + std::string(e.what()));
  }

  const auto sigma_file = dir / "sigma_sq.csv";
  if (meta.contains("has_sigma")) {
    const bool declared = meta["has_sigma"].is_boolean() && meta["has_sigma"].get<bool>();
    if (declared != fs::exists(sigma_file)) {
      throw ConsistencyError(declared ? "meta.json declares has_sigma but sigma_sq.csv is missing"
                                      : "sigma_sq.csv present but meta.json has_sigma is false");
    }
  }
  if (fs::exists(sigma_file)) {
    auto s = read_matrix_csv(sigma_file);
    if (s.rows() != dump.n()) {
      throw ConsistencyError("sigma_sq.csv has " + std::to_string(s.rows()) + " rows, mu.csv has " +
                             std::to_string(dump.n()));
    }
    if (s.cols() != dump.d()) {
      throw ConsistencyError("sigma_sq.csv has " + std::to_string(s.cols()) +
                             " columns, mu.csv has " + std::to_string(dump.d()));
    }
    if (!(s.array() > 0.0).all()) throw DataError("sigma_sq.csv holds an entry <= 0");
    dump.sigma_sq = std::move(s);
  }

  const auto labels_file = dir / "labels.csv";
  if (fs::exists(labels_file)) {
    auto labels = read_labels(labels_file);
    if (static_cast<Eigen::Index>(labels.size()) != dump.n()) {
      throw ConsistencyError("labels.csv has " + std::to_string(labels.size()) +
                             " rows, mu.csv has " + std::to_string(dump.n()));
    }
    dump.labels = std::move(labels);
  }

  if (const auto problems = validate(dump); !problems.empty()) {
    throw DataError("invalid dump: " + problems.front());
  }
  return dump;
}

void save_dump(const LatentDump& dump, const fs::path& dir) {
  if (const auto problems = validate(dump); !problems.empty()) {
    throw DataError("refusing to save invalid dump: " + problems.front());
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create dump directory " + dir.string() + ": " + ec.message());
  }

  nlohmann::json meta;
  meta["source"] = dump.meta.source;
  meta["n"] = dump.n();
  meta["d"] = dump.d();
  meta["has_sigma"] = dump.has_sigma();
  if (dump.meta.seed) meta["seed"] = *dump.meta.seed;
  if (!dump.meta.hyper_params.empty()) meta["hyper_params"] = dump.meta.hyper_params;
  write_file(dir / "meta.json", [&](std::ofstream& out) { out << meta.dump(2) << '\n'; });

  const auto header = dim_header(dump.d());
  write_matrix_csv(dump.mu, dir / "mu.csv", header);
  if (dump.sigma_sq) {
    write_matrix_csv(*dump.sigma_sq, dir / "sigma_sq.csv", header);
  } else if (fs::exists(dir / "sigma_sq.csv")) {
    fs::remove(dir / "sigma_sq.csv");
  }
  if (dump.labels) {
    write_file(dir / "labels.csv", [&](std::ofstream& out) {
      out << "label\n";
      for (int l : *dump.labels) out << l << '\n';
    });
  } else if (fs::exists(dir / "labels.csv")) {
    fs::remove(dir / "labels.csv");
  }
}

}  // namespace lel
