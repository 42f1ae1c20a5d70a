#include "ucahrpe/cli/codec.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ucahrpe/errors.hpp"

namespace uca::cli {
namespace {

constexpr std::uint32_t kFormatVersion = 1;
constexpr std::array<char, 4> kArrayMagic{'U', 'C', 'A', 'H'};
constexpr std::array<char, 4> kSpectrumMagic{'U', 'C', 'A', 'S'};

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <typename T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const char* what) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ParseError(std::string("truncated file reading ") + what);
  return to_little(v);
}

void expect_magic(std::istream& is, const std::array<char, 4>& magic) {
  std::array<char, 4> got{};
  if (!is.read(got.data(), 4)) throw ParseError("truncated file reading magic");
  if (got != magic)
    throw ParseError("bad magic bytes: expected " + std::string(magic.data(), 4));
  const auto version = get<std::uint32_t>(is, "version");
  if (version != kFormatVersion) throw ParseError("unsupported format version " + std::to_string(version));
}

struct Header {
  std::uint32_t rows, cols;
  double a, b, c;
};

Header read_header(std::istream& is) {
  Header h{};
  h.rows = get<std::uint32_t>(is, "row count");
  h.cols = get<std::uint32_t>(is, "column count");
  h.a = get<double>(is, "header");
  h.b = get<double>(is, "header");
  h.c = get<double>(is, "header");
  return h;
}

void expect_end(std::istream& is) {
  if (is.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes after payload");
}

double parse_double(const std::string& s, std::size_t line, std::size_t column) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError("not a number: '" + s + "'", line, column);
  return v;
}

std::size_t parse_index(const std::string& s, std::size_t line, std::size_t column) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("not an index: '" + s + "'", line, column);
  return v;
}

// Reads data rows of a CSV with a fixed header; returns fields per row with the line number.
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_table(std::istream& is, const std::string& header) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty CSV, expected header '" + header + "'", 1, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw ParseError("unexpected CSV header, expected '" + header + "'", 1, 1);
  const std::size_t width = split_csv_line(header).size();
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::size_t number = 1;
  while (std::getline(is, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != width)
      throw ParseError("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()), number, 1);
    rows.emplace_back(number, std::move(fields));
  }
  return rows;
}

// 1-based column of field i in a comma-separated line without quoting.
std::size_t column_of(const std::vector<std::string>& fields, std::size_t i) {
  std::size_t col = 1;
  for (std::size_t j = 0; j < i; ++j) col += fields[j].size() + 1;
  return col;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_array_output(std::ostream& os, const ArrayOutput& out) {
  out.validate();
  os.write(kArrayMagic.data(), 4);
  put<std::uint32_t>(os, kFormatVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(out.geometry.num_elements));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(out.grid.num_points));
  put<double>(os, out.grid.f_start);
  put<double>(os, out.grid.f_stop);
  put<double>(os, out.geometry.radius);
  for (const Complex& v : out.matrix.values()) {
    put<double>(os, v.real());
    put<double>(os, v.imag());
  }
}

ArrayOutput read_array_output(std::istream& is) {
  expect_magic(is, kArrayMagic);
  const auto h = read_header(is);
  ArrayOutput out;
  out.geometry.num_elements = h.rows;
  out.geometry.radius = h.c;
  out.grid.num_points = h.cols;
  out.grid.f_start = h.a;
  out.grid.f_stop = h.b;
  out.geometry.validate();
  out.grid.validate();
  out.matrix = ComplexMatrix(h.rows, h.cols);
  for (Complex& v : out.matrix.values()) {
    const double re = get<double>(is, "matrix");
    const double im = get<double>(is, "matrix");
    v = {re, im};
  }
  expect_end(is);
  return out;
}

void save_array_output(const std::filesystem::path& path, const ArrayOutput& out) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_array_output(os, out);
}

ArrayOutput load_array_output(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_array_output(is);
}

void write_spectrum(std::ostream& os, const DelayAzimuthSpectrum& spec) {
  os.write(kSpectrumMagic.data(), 4);
  put<std::uint32_t>(os, kFormatVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(spec.power.rows()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(spec.power.cols()));
  put<double>(os, spec.delay_axis.size() > 1 ? spec.delay_axis[1] - spec.delay_axis[0] : 0.0);
  put<double>(os, spec.azimuth_axis.size() > 1 ? spec.azimuth_axis[1] - spec.azimuth_axis[0] : 0.0);
  put<double>(os, 0.0);
  for (double v : spec.power.values()) put<double>(os, v);
}

DelayAzimuthSpectrum read_spectrum(std::istream& is) {
  expect_magic(is, kSpectrumMagic);
  const auto h = read_header(is);
  DelayAzimuthSpectrum spec;
  spec.power = RealMatrix(h.rows, h.cols);
  for (double& v : spec.power.values()) v = get<double>(is, "spectrum");
  expect_end(is);
  spec.delay_axis.resize(h.cols);
  spec.azimuth_axis.resize(h.rows);
  for (std::size_t i = 0; i < h.cols; ++i) spec.delay_axis[i] = static_cast<double>(i) * h.a;
  for (std::size_t i = 0; i < h.rows; ++i) spec.azimuth_axis[i] = static_cast<double>(i) * h.b;
  return spec;
}

void write_cpdp_csv(std::ostream& os, const Cpdp& c) {
  os << "element_index";
  for (double t : c.delay_axis) os << ',' << format_double(t);
  os << '\n';
  for (std::size_t p = 0; p < c.power.rows(); ++p) {
    os << p;
    for (double v : c.power.row(p)) os << ',' << format_double(v);
    os << '\n';
  }
}

void write_spectrum_csv(std::ostream& os, const DelayAzimuthSpectrum& spec) {
  os << "delay_s";
  for (double a : spec.azimuth_axis) os << ',' << format_double(rad2deg(a));
  os << '\n';
  for (std::size_t k = 0; k < spec.power.cols(); ++k) {
    os << format_double(spec.delay_axis[k]);
    for (std::size_t a = 0; a < spec.power.rows(); ++a) os << ',' << format_double(spec.power(a, k));
    os << '\n';
  }
}

void write_estimates_csv(std::ostream& os, const ElementEstimateSet& set) {
  os << "element_index,path_rank,delay_s,amp_real,amp_imag\n";
  for (std::size_t p = 0; p < set.per_element.size(); ++p)
    for (std::size_t l = 0; l < set.per_element[p].size(); ++l) {
      const auto& e = set.per_element[p][l];
      os << p << ',' << l << ',' << format_double(e.delay) << ',' << format_double(e.amplitude.real()) << ','
         << format_double(e.amplitude.imag()) << '\n';
    }
}

ElementEstimateSet read_estimates_csv(std::istream& is, const ArrayGeometry& geom, const FrequencyGrid& grid) {
  ElementEstimateSet set;
  set.geometry = geom;
  set.grid = grid;
  set.per_element.resize(geom.num_elements);
  for (const auto& [line, f] : read_table(is, "element_index,path_rank,delay_s,amp_real,amp_imag")) {
    const std::size_t p = parse_index(f[0], line, column_of(f, 0));
    if (p >= geom.num_elements) throw ParseError("element index out of range", line, 1);
    const std::size_t rank = parse_index(f[1], line, column_of(f, 1));
    if (rank != set.per_element[p].size()) throw ParseError("path ranks must be consecutive per element", line, column_of(f, 1));
    set.per_element[p].push_back({parse_double(f[2], line, column_of(f, 2)),
                                  {parse_double(f[3], line, column_of(f, 3)), parse_double(f[4], line, column_of(f, 4))}});
  }
  return set;
}

void write_trajectories_csv(std::ostream& os, const std::vector<Trajectory>& trajectories) {
  os << "element_index,delay_s,amp_real,amp_imag,trajectory_id\n";
  for (std::size_t t = 0; t < trajectories.size(); ++t)
    for (std::size_t p = 0; p < trajectories[t].selections.size(); ++p) {
      const auto& sel = trajectories[t].selections[p];
      if (!sel) continue;
      os << p << ',' << format_double(sel->delay) << ',' << format_double(sel->amplitude.real()) << ','
         << format_double(sel->amplitude.imag()) << ',' << t << '\n';
    }
}

void write_paths_csv(std::ostream& os, const std::vector<EstimatedPath>& paths) {
  os << "path_id,delay_s,azimuth_deg,elevation_deg,distance_m,amp_real,amp_imag,support_C,score\n";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& p = paths[i].params;
    os << i << ',' << format_double(p.delay) << ',' << format_double(rad2deg(p.azimuth)) << ','
       << format_double(rad2deg(p.elevation)) << ',' << format_double(p.source_distance) << ','
       << format_double(p.amplitude.real()) << ',' << format_double(p.amplitude.imag()) << ',' << paths[i].support
       << ',' << format_double(paths[i].score) << '\n';
  }
}

std::vector<EstimatedPath> read_paths_csv(std::istream& is) {
  std::vector<EstimatedPath> paths;
  for (const auto& [line, f] :
       read_table(is, "path_id,delay_s,azimuth_deg,elevation_deg,distance_m,amp_real,amp_imag,support_C,score")) {
    const std::size_t id = parse_index(f[0], line, 1);
    if (id != paths.size()) throw ParseError("path ids must be consecutive from 0", line, 1);
    auto num = [&](std::size_t i) { return parse_double(f[i], line, column_of(f, i)); };
    EstimatedPath p;
    p.params = {num(1), deg2rad(num(2)), deg2rad(num(3)), num(4), {num(5), num(6)}};
    p.support = parse_index(f[7], line, column_of(f, 7));
    p.score = num(8);
    paths.push_back(p);
  }
  return paths;
}

void write_diagnostics_csv(std::ostream& os, const std::vector<IterationDiagnostics>& diags) {
  os << "iteration,peak_delay_s,peak_azimuth_deg,peak_power,init_delay_s,init_azimuth_deg,elevation_deg,support_C,"
        "plateau_low_deg,plateau_high_deg,accepted\n";
  for (std::size_t i = 0; i < diags.size(); ++i) {
    const auto& d = diags[i];
    os << i << ',' << format_double(d.peak_delay) << ',' << format_double(rad2deg(d.peak_azimuth)) << ','
       << format_double(d.peak_power) << ',' << format_double(d.init_delay) << ','
       << format_double(rad2deg(d.init_azimuth)) << ',' << format_double(rad2deg(d.elevation)) << ',' << d.support
       << ',' << format_double(rad2deg(d.plateau_low)) << ',' << format_double(rad2deg(d.plateau_high)) << ','
       << (d.accepted ? 1 : 0) << '\n';
  }
}

void write_report_csv(std::ostream& os, const EvaluationReport& report, const FrequencyGrid& grid) {
  os << "truth_index,estimate_index,delay_error_s,delay_error_bins,azimuth_error_deg,elevation_error_deg,"
        "distance_error_m,amplitude_error_db\n";
  for (const auto& m : report.matches)
    os << m.truth_index << ',' << m.estimate_index << ',' << format_double(m.delay_error) << ','
       << format_double(m.delay_error * grid.bandwidth()) << ',' << format_double(rad2deg(m.azimuth_error)) << ','
       << format_double(rad2deg(m.elevation_error)) << ',' << format_double(m.distance_error) << ','
       << format_double(m.amplitude_error_db) << '\n';
  for (std::size_t t : report.missed) os << t << ",missed,,,,,,\n";
  for (std::size_t e : report.false_alarms) os << "false_alarm," << e << ",,,,,,\n";
}

}  // namespace uca::cli
