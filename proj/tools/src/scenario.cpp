#include "ucahrpe/cli/scenario.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ucahrpe/cli/codec.hpp"
#include "ucahrpe/errors.hpp"

namespace uca::cli {
namespace {

struct Token {
  std::string text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ',')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != ',') ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

double to_double(const std::string& s, std::size_t line, std::size_t column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("expected a number, got '" + s + "'", line, column);
  return v;
}

std::uint64_t to_unsigned(const std::string& s, std::size_t line, std::size_t column) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("expected a non-negative integer, got '" + s + "'", line, column);
  return v;
}

bool to_bool(const std::string& s, std::size_t line, std::size_t column) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ParseError("expected true or false, got '" + s + "'", line, column);
}

std::string strip_comment(std::string line) {
  if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

struct Assignment {
  std::string key;
  std::string value;
  std::size_t value_column;
};

// "key = value" with surrounding blanks; nullopt for blank lines.
std::optional<Assignment> parse_assignment(const std::string& line, std::size_t number) {
  const auto eq = line.find('=');
  if (eq == std::string::npos) {
    if (line.find_first_not_of(" \t") == std::string::npos) return std::nullopt;
    throw ParseError("expected 'key = value'", number, line.find_first_not_of(" \t") + 1);
  }
  auto trim = [](const std::string& s, std::size_t& offset) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t");
    offset += b;
    return s.substr(b, e - b + 1);
  };
  std::size_t key_offset = 0, value_offset = eq + 1;
  Assignment a{trim(line.substr(0, eq), key_offset), trim(line.substr(eq + 1), value_offset), value_offset + 1};
  if (a.key.empty()) throw ParseError("missing key before '='", number, 1);
  if (a.value.empty()) throw ParseError("missing value for '" + a.key + "'", number, eq + 2);
  return a;
}

using Setter = std::function<void(const Assignment&, std::size_t line)>;

void apply(const std::map<std::string, Setter>& setters, const Assignment& a, std::size_t line) {
  const auto it = setters.find(a.key);
  if (it == setters.end()) throw ParseError("unknown key '" + a.key + "'", line, 1);
  it->second(a, line);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

void Scenario::validate() const {
  geometry.validate();
  grid.validate();
  if (masks.size() != paths.size()) throw InvariantError("one gain mask per path is required");
  for (std::size_t i = 0; i < paths.size(); ++i) {
    try {
      paths[i].validate(geometry);
      masks[i].validate(geometry.num_elements);
    } catch (const InvariantError& e) {
      throw InvariantError("path " + std::to_string(i) + ": " + e.what());
    }
  }
  if (!(noise_variance >= 0.0)) throw InvariantError("noise variance must be non-negative");
}

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  enum class Section { header, paths, masks } section = Section::header;
  struct MaskRow {
    std::size_t path, first, last;
    double gain;
    std::size_t line;
  };
  std::vector<MaskRow> mask_rows;
  bool have_snr = false, have_variance = false;

  const std::map<std::string, Setter> setters{
      {"radius", [&](const Assignment& a, std::size_t l) { s.geometry.radius = to_double(a.value, l, a.value_column); }},
      {"elements",
       [&](const Assignment& a, std::size_t l) { s.geometry.num_elements = to_unsigned(a.value, l, a.value_column); }},
      {"f_start", [&](const Assignment& a, std::size_t l) { s.grid.f_start = to_double(a.value, l, a.value_column); }},
      {"f_stop", [&](const Assignment& a, std::size_t l) { s.grid.f_stop = to_double(a.value, l, a.value_column); }},
      {"points", [&](const Assignment& a, std::size_t l) { s.grid.num_points = to_unsigned(a.value, l, a.value_column); }},
      {"snr_db",
       [&](const Assignment& a, std::size_t l) {
         s.snr_db = to_double(a.value, l, a.value_column);
         have_snr = true;
       }},
      {"noise_variance",
       [&](const Assignment& a, std::size_t l) {
         s.noise_variance = to_double(a.value, l, a.value_column);
         have_variance = true;
       }},
      {"noise_seed", [&](const Assignment& a, std::size_t l) { s.noise_seed = to_unsigned(a.value, l, a.value_column); }},
  };

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::string line = strip_comment(raw);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string::npos) throw ParseError("unterminated section header", number, first + 1);
      const std::string name = line.substr(first + 1, close - first - 1);
      if (name == "paths") section = Section::paths;
      else if (name == "masks") section = Section::masks;
      else throw ParseError("unknown section '" + name + "'", number, first + 2);
      continue;
    }
    if (section == Section::header) {
      if (auto a = parse_assignment(line, number)) apply(setters, *a, number);
      continue;
    }
    const auto tokens = tokenize(line);
    if (section == Section::paths) {
      if (tokens.size() != 6)
        throw ParseError("path rows need 6 fields (delay_s azimuth_deg elevation_deg distance_m amp_re amp_im)",
                         number, tokens.empty() ? 1 : tokens.back().column);
      double v[6];
      for (int i = 0; i < 6; ++i) v[i] = to_double(tokens[i].text, number, tokens[i].column);
      s.paths.push_back({v[0], deg2rad(v[1]), deg2rad(v[2]), v[3], {v[4], v[5]}});
    } else {
      if (tokens.size() != 4)
        throw ParseError("mask rows need 4 fields (path first_element last_element gain)", number,
                         tokens.empty() ? 1 : tokens.back().column);
      mask_rows.push_back({to_unsigned(tokens[0].text, number, tokens[0].column),
                           to_unsigned(tokens[1].text, number, tokens[1].column),
                           to_unsigned(tokens[2].text, number, tokens[2].column),
                           to_double(tokens[3].text, number, tokens[3].column), number});
    }
  }
  if (have_snr && have_variance) throw ParseError("give either snr_db or noise_variance, not both");

  const std::size_t p_count = s.geometry.num_elements;
  s.masks.assign(s.paths.size(), GainMask::all_visible(p_count));
  for (const auto& row : mask_rows) {
    if (row.path >= s.paths.size()) throw ParseError("mask refers to undefined path " + std::to_string(row.path), row.line, 1);
    if (row.first >= p_count || row.last >= p_count) throw ParseError("mask element index out of range", row.line, 1);
    for (std::size_t p = row.first;; p = (p + 1) % p_count) {
      s.masks[row.path].gain[p] = row.gain;
      if (p == row.last) break;
    }
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path)); }

double effective_noise_variance(const Scenario& s) {
  if (!s.snr_db) return s.noise_variance;
  const auto clean = synthesize_channel(s.geometry, s.grid, s.paths, s.masks, NoiseSpec{0.0, s.noise_seed});
  return noise_variance_for_snr(clean.matrix, *s.snr_db);
}

ArrayOutput synthesize(const Scenario& s) {
  s.validate();
  return synthesize_channel(s.geometry, s.grid, s.paths, s.masks, NoiseSpec{effective_noise_variance(s), s.noise_seed});
}

PipelineConfig parse_pipeline_config(std::string_view text) {
  PipelineConfig cfg;
  auto real = [](double& field) {
    return [&field](const Assignment& a, std::size_t l) { field = to_double(a.value, l, a.value_column); };
  };
  auto degrees = [](double& field) {
    return [&field](const Assignment& a, std::size_t l) { field = deg2rad(to_double(a.value, l, a.value_column)); };
  };
  auto count = [](std::size_t& field) {
    return [&field](const Assignment& a, std::size_t l) { field = to_unsigned(a.value, l, a.value_column); };
  };
  auto flag = [](bool& field) {
    return [&field](const Assignment& a, std::size_t l) { field = to_bool(a.value, l, a.value_column); };
  };
  const std::map<std::string, Setter> setters{
      {"sage.max_paths", count(cfg.sage.max_paths)},
      {"sage.dynamic_range_db", real(cfg.sage.dynamic_range_db)},
      {"sage.refinement_cycles", count(cfg.sage.refinement_cycles)},
      {"sage.delay_oversample", count(cfg.sage.delay_oversample)},
      {"sage.noise_variance", real(cfg.sage.noise_variance)},
      {"sage.noise_gate", real(cfg.sage.noise_gate)},
      {"sage.joint_polish", flag(cfg.sage.joint_polish)},
      {"sage.polish_iterations", count(cfg.sage.polish_iterations)},
      {"pad_azimuth", count(cfg.pad_azimuth)},
      {"pad_delay", count(cfg.pad_delay)},
      {"half_width", real(cfg.half_width)},
      {"elevation_step_deg", real(cfg.elevation_step_deg)},
      {"support_threshold",
       [&cfg](const Assignment& a, std::size_t l) { cfg.support_threshold = to_unsigned(a.value, l, a.value_column); }},
      {"max_iterations", count(cfg.max_iterations)},
      {"snap_initialization", flag(cfg.snap_initialization)},
      {"refine.azimuth_window_deg", degrees(cfg.refine.azimuth_window)},
      {"refine.azimuth_step_deg", degrees(cfg.refine.azimuth_step)},
      {"refine.elevation_window_deg", degrees(cfg.refine.elevation_window)},
      {"refine.elevation_step_deg", degrees(cfg.refine.elevation_step)},
      {"refine.distance_points", count(cfg.refine.distance_points)},
      {"refine.delay_window", real(cfg.refine.delay_window)},
      {"refine.delay_step", real(cfg.refine.delay_step)},
      {"refine.frequency_index",
       [&cfg](const Assignment& a, std::size_t l) {
         cfg.refine.frequency_index = to_unsigned(a.value, l, a.value_column);
       }},
      {"refine.stages", count(cfg.refine.stages)},
      {"refine.shrink", real(cfg.refine.shrink)},
  };
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (auto a = parse_assignment(strip_comment(raw), number)) apply(setters, *a, number);
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return parse_pipeline_config(read_file(path));
}

std::string format_pipeline_config(const PipelineConfig& cfg, const ArrayGeometry& geom) {
  std::ostringstream os;
  auto line = [&os](const char* key, const std::string& value) { os << key << " = " << value << '\n'; };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  line("sage.max_paths", std::to_string(cfg.sage.max_paths));
  line("sage.dynamic_range_db", format_double(cfg.sage.dynamic_range_db));
  line("sage.refinement_cycles", std::to_string(cfg.sage.refinement_cycles));
  line("sage.delay_oversample", std::to_string(cfg.sage.delay_oversample));
  line("sage.noise_variance", format_double(cfg.sage.noise_variance));
  line("sage.noise_gate", format_double(cfg.sage.noise_gate));
  line("sage.joint_polish", b(cfg.sage.joint_polish));
  line("sage.polish_iterations", std::to_string(cfg.sage.polish_iterations));
  line("pad_azimuth", std::to_string(cfg.pad_azimuth));
  line("pad_delay", std::to_string(cfg.pad_delay));
  line("half_width", format_double(cfg.half_width));
  line("elevation_step_deg", format_double(cfg.elevation_step_deg));
  line("support_threshold", std::to_string(cfg.support_threshold_for(geom)));
  line("max_iterations", std::to_string(cfg.max_iterations));
  line("snap_initialization", b(cfg.snap_initialization));
  line("refine.azimuth_window_deg", format_double(rad2deg(cfg.refine.azimuth_window)));
  line("refine.azimuth_step_deg", format_double(rad2deg(cfg.refine.azimuth_step)));
  line("refine.elevation_window_deg", format_double(rad2deg(cfg.refine.elevation_window)));
  line("refine.elevation_step_deg", format_double(rad2deg(cfg.refine.elevation_step)));
  line("refine.distance_points", std::to_string(cfg.refine.distance_points));
  line("refine.delay_window", format_double(cfg.refine.delay_window));
  line("refine.delay_step", format_double(cfg.refine.delay_step));
  if (cfg.refine.frequency_index) line("refine.frequency_index", std::to_string(*cfg.refine.frequency_index));
  line("refine.stages", std::to_string(cfg.refine.stages));
  line("refine.shrink", format_double(cfg.refine.shrink));
  return os.str();
}

}  // namespace uca::cli
