#include "spf/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "spf/init.hpp"
#include "spf/rng.hpp"
#include "spf/theory.hpp"

namespace spf {

double resolve_success_threshold(double configured, double nu) {
  if (configured > 0.0) return configured;
  return nu == 0.0 ? 1e-4 : 8.3 * nu + 1e-2;
}

TrialRecord run_trial(const CellParams& cell, std::uint64_t seed,
                      const ExperimentConfig& cfg) {
  TrialRecord rec;
  rec.cell = cell;
  rec.seed = seed;
  const auto start = std::chrono::steady_clock::now();

  try {
    const auto op = make_gaussian_operator(cell.n1, cell.n2, cell.m,
                                           derive_seed(seed, 10));
    InstanceParams params;
    params.n1 = cell.n1;
    params.n2 = cell.n2;
    params.m = cell.m;
    params.s1 = cell.s1;
    params.s2 = cell.s2;
    params.k = cell.k;
    params.xi = cell.xi;
    params.mu = cell.mu;
    params.nu = cell.nu;
    params.seed = derive_seed(seed, 11);
    const ProblemInstance inst = generate_instance(op, params);

    if (cfg.measure_rip) {
      rec.delta_hat = estimate_rip_constant(
          op, std::min<Index>(3 * cell.s1, cell.n1),
          std::min<Index>(3 * cell.s2, cell.n2), 2, cfg.rip_trials,
          derive_seed(seed, 12));
    }

    const InitResult init = thresholding_init(op, inst.b, cell.s1, cell.s2);
    rec.sin_angle_v0 = sin_angle(init.v0, inst.v);

    SpfConfig solver;
    solver.s1 = cell.s1;
    solver.s2 = cell.s2;
    solver.max_outer_iter = cfg.max_outer_iter;
    solver.max_htp_iter = cfg.max_htp_iter;
    solver.rel_change_tol = cfg.rel_change_tol;
    const RecoveryResult result =
        sparse_power_factorization(op, inst.b, solver, init.v0,
                                   GroundTruth{inst.u, inst.v});

    rec.rel_error = rel_error(result.u_hat, result.v_hat, inst.u, inst.v);
    rec.iterations = result.iterations;
    rec.converged = result.converged;
    const double threshold =
        resolve_success_threshold(cfg.success_threshold, cell.nu);
    rec.success = *rec.rel_error <= threshold;
  } catch (const std::invalid_argument&) {
    rec.generation_failed = true;
  } catch (const DegenerateInputError&) {
    rec.generation_failed = true;
  } catch (const SingularSystemError&) {
    // Solver hit a numerically singular support: a failed trial, but the
    // cell itself was feasible.
    rec.converged = false;
    rec.success = false;
  }

  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return rec;
}

namespace {

std::vector<CellParams> expand_cells(const ExperimentConfig& cfg) {
  std::vector<CellParams> cells;
  for (const auto n1 : cfg.n1)
    for (const auto n2 : cfg.n2)
      for (const auto m : cfg.m)
        for (const auto s1 : cfg.s1)
          for (const auto s2 : cfg.s2)
            for (const auto k : cfg.k)
              for (const auto xi : cfg.xi)
                for (const auto mu : cfg.mu)
                  for (const auto nu : cfg.nu) {
                    CellParams cell;
                    cell.n1 = n1;
                    cell.n2 = n2;
                    cell.m = m;
                    cell.s1 = s1;
                    cell.s2 = s2;
                    cell.k = k;
                    cell.xi = xi;
                    cell.mu = mu;
                    cell.nu = nu;
                    cells.push_back(cell);
                  }
  return cells;
}

void validate(const ExperimentConfig& cfg) {
  const bool empty_axis = cfg.n1.empty() || cfg.n2.empty() || cfg.m.empty() ||
                          cfg.s1.empty() || cfg.s2.empty() || cfg.k.empty() ||
                          cfg.xi.empty() || cfg.mu.empty() || cfg.nu.empty();
  if (empty_axis) throw std::invalid_argument("config: empty grid axis");
  if (cfg.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (cfg.success_threshold == 0.0) {
    throw std::invalid_argument("config: success_threshold must be positive");
  }
  if (cfg.rip_trials < 1) {
    throw std::invalid_argument("config: rip_trials must be >= 1");
  }
  if (cfg.max_outer_iter < 1 || cfg.max_htp_iter < 1 ||
      cfg.rel_change_tol < 0.0) {
    throw std::invalid_argument("config: bad iteration caps or tolerance");
  }
}

}  // namespace

std::vector<TrialRecord> run_grid(const ExperimentConfig& cfg, int workers) {
  validate(cfg);
  const std::vector<CellParams> cells = expand_cells(cfg);
  const std::size_t total = cells.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<TrialRecord> records(total);

  // Job i is pure in (cell, derived seed) and writes only slot i, so the
  // record sequence is canonical for any worker count.
  std::atomic<std::size_t> cursor{0};
  const auto worker = [&] {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= total) break;
      const std::size_t cell_index = i / static_cast<std::size_t>(cfg.trials);
      const int trial = static_cast<int>(i % static_cast<std::size_t>(cfg.trials));
      const std::uint64_t seed =
          derive_seed(cfg.base_seed, static_cast<std::uint64_t>(cell_index),
                      static_cast<std::uint64_t>(trial));
      records[i] = run_trial(cells[cell_index], seed, cfg);
      records[i].trial = trial;
    }
  };

  const int thread_count =
      std::max(1, std::min<int>(workers, static_cast<int>(total)));
  if (thread_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return records;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

// RFC 4180: quote only when the field contains a comma, quote, or newline.
std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

constexpr const char* kCsvHeader =
    "n1,n2,m,s1,s2,k,xi,mu,nu,trial,seed,delta_hat,sin_angle_v0,rel_error,"
    "iterations,converged,success,generation_failed,wall_time_ms";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

double parse_double_field(const std::string& s, const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument(std::string("csv: bad number in ") + what);
  }
  return v;
}

std::int64_t parse_int_field(const std::string& s, const char* what) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument(std::string("csv: bad integer in ") + what);
  }
  return v;
}

}  // namespace

void write_csv(const std::vector<TrialRecord>& records,
               const std::string& path, bool with_timings) {
  if (records.empty()) {
    throw std::invalid_argument("write_csv: no records");
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_csv: cannot open " + path);
  os << kCsvHeader << "\n";
  for (const auto& r : records) {
    os << r.cell.n1 << ',' << r.cell.n2 << ',' << r.cell.m << ',' << r.cell.s1
       << ',' << r.cell.s2 << ',' << r.cell.k << ','
       << csv_escape(format_double(r.cell.xi)) << ','
       << csv_escape(format_double(r.cell.mu)) << ','
       << csv_escape(format_double(r.cell.nu)) << ',' << r.trial << ','
       << r.seed << ',' << csv_escape(format_optional(r.delta_hat)) << ','
       << csv_escape(format_optional(r.sin_angle_v0)) << ','
       << csv_escape(format_optional(r.rel_error)) << ',' << r.iterations
       << ',' << (r.converged ? 1 : 0) << ',' << (r.success ? 1 : 0) << ','
       << (r.generation_failed ? 1 : 0) << ','
       << csv_escape(format_double(with_timings ? r.wall_ms : 0.0)) << "\n";
  }
  if (!os) throw std::runtime_error("write_csv: write failed for " + path);
}

std::vector<TrialRecord> read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) {
    throw std::invalid_argument("read_csv: unexpected header in " + path);
  }
  std::vector<TrialRecord> records;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 19) {
      throw std::invalid_argument("read_csv: wrong field count in " + path);
    }
    TrialRecord r;
    r.cell.n1 = parse_int_field(f[0], "n1");
    r.cell.n2 = parse_int_field(f[1], "n2");
    r.cell.m = parse_int_field(f[2], "m");
    r.cell.s1 = parse_int_field(f[3], "s1");
    r.cell.s2 = parse_int_field(f[4], "s2");
    r.cell.k = parse_int_field(f[5], "k");
    r.cell.xi = parse_double_field(f[6], "xi");
    r.cell.mu = parse_double_field(f[7], "mu");
    r.cell.nu = parse_double_field(f[8], "nu");
    r.trial = static_cast<int>(parse_int_field(f[9], "trial"));
    {
      std::uint64_t seed = 0;
      const auto res =
          std::from_chars(f[10].data(), f[10].data() + f[10].size(), seed);
      if (res.ec != std::errc{} || res.ptr != f[10].data() + f[10].size()) {
        throw std::invalid_argument("read_csv: bad seed");
      }
      r.seed = seed;
    }
    r.delta_hat = f[11].empty()
                      ? std::nullopt
                      : std::optional<double>(parse_double_field(f[11], "delta_hat"));
    r.sin_angle_v0 =
        f[12].empty()
            ? std::nullopt
            : std::optional<double>(parse_double_field(f[12], "sin_angle_v0"));
    r.rel_error = f[13].empty()
                      ? std::nullopt
                      : std::optional<double>(parse_double_field(f[13], "rel_error"));
    r.iterations = static_cast<int>(parse_int_field(f[14], "iterations"));
    r.converged = parse_int_field(f[15], "converged") != 0;
    r.success = parse_int_field(f[16], "success") != 0;
    r.generation_failed = parse_int_field(f[17], "generation_failed") != 0;
    r.wall_ms = parse_double_field(f[18], "wall_time_ms");
    records.push_back(std::move(r));
  }
  return records;
}

namespace {

double axis_value(const TrialRecord& r, const std::string& axis) {
  if (axis == "n1") return static_cast<double>(r.cell.n1);
  if (axis == "n2") return static_cast<double>(r.cell.n2);
  if (axis == "m") return static_cast<double>(r.cell.m);
  if (axis == "s1") return static_cast<double>(r.cell.s1);
  if (axis == "s2") return static_cast<double>(r.cell.s2);
  if (axis == "k") return static_cast<double>(r.cell.k);
  if (axis == "xi") return r.cell.xi;
  if (axis == "mu") return r.cell.mu;
  if (axis == "nu") return r.cell.nu;
  throw std::invalid_argument("heatmap: unknown axis '" + axis + "'");
}

std::string trim_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

int gray_level(double rate) {
  // success rate 0 -> black, 1 -> white
  const int g = static_cast<int>(std::lround(255.0 * rate));
  return std::clamp(g, 0, 255);
}

}  // namespace

void render_heatmap(const std::vector<TrialRecord>& records,
                    const std::string& x_axis, const std::string& y_axis,
                    const std::string& path) {
  if (records.empty()) {
    throw std::invalid_argument("render_heatmap: no records");
  }
  std::set<double> xs_set, ys_set;
  for (const auto& r : records) {
    xs_set.insert(axis_value(r, x_axis));
    ys_set.insert(axis_value(r, y_axis));
  }
  const std::vector<double> xs(xs_set.begin(), xs_set.end());
  const std::vector<double> ys(ys_set.begin(), ys_set.end());

  std::map<std::pair<double, double>, std::pair<int, int>> tally;  // success, total
  for (const auto& r : records) {
    auto& cell = tally[{axis_value(r, x_axis), axis_value(r, y_axis)}];
    cell.first += r.success ? 1 : 0;
    cell.second += 1;
  }

  constexpr int kCellW = 56;
  constexpr int kCellH = 40;
  constexpr int kLeft = 72;
  constexpr int kTop = 48;
  constexpr int kBottom = 64;
  constexpr int kLegendW = 96;
  const int grid_w = kCellW * static_cast<int>(xs.size());
  const int grid_h = kCellH * static_cast<int>(ys.size());
  const int width = kLeft + grid_w + kLegendW + 24;
  const int height = kTop + grid_h + kBottom;

  std::ofstream os(path);
  if (!os) throw std::runtime_error("render_heatmap: cannot open " + path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"" << width << "\" height=\"" << height
     << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"15\">success rate: "
     << y_axis << " vs " << x_axis << "</text>\n";

  for (std::size_t yi = 0; yi < ys.size(); ++yi) {
    // y grows upward: last row at the top
    const int ypix = kTop + grid_h - kCellH * static_cast<int>(yi + 1);
    for (std::size_t xi = 0; xi < xs.size(); ++xi) {
      const int xpix = kLeft + kCellW * static_cast<int>(xi);
      const auto it = tally.find({xs[xi], ys[yi]});
      if (it == tally.end() || it->second.second == 0) {
        os << "<rect x=\"" << xpix << "\" y=\"" << ypix << "\" width=\""
           << kCellW << "\" height=\"" << kCellH
           << "\" fill=\"white\" stroke=\"#999\"/>\n";
        continue;
      }
      const double rate = static_cast<double>(it->second.first) /
                          static_cast<double>(it->second.second);
      const int g = gray_level(rate);
      char rate_txt[16];
      std::snprintf(rate_txt, sizeof(rate_txt), "%.2f", rate);
      os << "<rect x=\"" << xpix << "\" y=\"" << ypix << "\" width=\""
         << kCellW << "\" height=\"" << kCellH << "\" fill=\"rgb(" << g << ","
         << g << "," << g << ")\" stroke=\"#999\"/>\n";
      os << "<text x=\"" << xpix + kCellW / 2 << "\" y=\""
         << ypix + kCellH / 2 + 4 << "\" font-size=\"12\" text-anchor=\"middle\""
         << " fill=\"" << (g < 128 ? "white" : "black") << "\">" << rate_txt
         << "</text>\n";
    }
  }

  // axis labels
  for (std::size_t xi = 0; xi < xs.size(); ++xi) {
    os << "<text x=\"" << kLeft + kCellW * static_cast<int>(xi) + kCellW / 2
       << "\" y=\"" << kTop + grid_h + 18
       << "\" font-size=\"12\" text-anchor=\"middle\">" << trim_number(xs[xi])
       << "</text>\n";
  }
  os << "<text x=\"" << kLeft + grid_w / 2 << "\" y=\"" << kTop + grid_h + 40
     << "\" font-size=\"13\" text-anchor=\"middle\">" << x_axis << "</text>\n";
  for (std::size_t yi = 0; yi < ys.size(); ++yi) {
    const int ypix = kTop + grid_h - kCellH * static_cast<int>(yi) - kCellH / 2;
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << ypix + 4
       << "\" font-size=\"12\" text-anchor=\"end\">" << trim_number(ys[yi])
       << "</text>\n";
  }
  os << "<text x=\"16\" y=\"" << kTop + grid_h / 2
     << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << kTop + grid_h / 2 << ")\">" << y_axis << "</text>\n";

  // grayscale legend
  const int lx = kLeft + grid_w + 28;
  constexpr int kLegendSteps = 32;
  const double band = static_cast<double>(grid_h) / kLegendSteps;
  for (int i = 0; i < kLegendSteps; ++i) {
    const double rate = 1.0 - (i + 0.5) / kLegendSteps;
    const int g = gray_level(rate);
    os << "<rect x=\"" << lx << "\" y=\"" << kTop + i * band << "\" width=\"16\""
       << " height=\"" << band + 0.5 << "\" fill=\"rgb(" << g << "," << g << ","
       << g << ")\"/>\n";
  }
  os << "<rect x=\"" << lx << "\" y=\"" << kTop << "\" width=\"16\" height=\""
     << grid_h << "\" fill=\"none\" stroke=\"#555\"/>\n";
  os << "<text x=\"" << lx + 22 << "\" y=\"" << kTop + 10
     << "\" font-size=\"11\">1.0</text>\n";
  os << "<text x=\"" << lx + 22 << "\" y=\"" << kTop + grid_h / 2 + 4
     << "\" font-size=\"11\">0.5</text>\n";
  os << "<text x=\"" << lx + 22 << "\" y=\"" << kTop + grid_h
     << "\" font-size=\"11\">0.0</text>\n";
  os << "</svg>\n";
  if (!os) throw std::runtime_error("render_heatmap: write failed for " + path);
}

namespace {

std::string strip(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : s) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<Index> parse_index_list(const std::string& s, const std::string& key) {
  std::vector<Index> out;
  for (const auto& tok : split_values(s)) {
    out.push_back(parse_int_field(tok, key.c_str()));
  }
  if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
  return out;
}

std::vector<double> parse_double_list(const std::string& s,
                                      const std::string& key) {
  std::vector<double> out;
  for (const auto& tok : split_values(s)) {
    out.push_back(parse_double_field(tok, key.c_str()));
  }
  if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
  return out;
}

double parse_scalar(const std::string& s, const std::string& key) {
  const auto vals = split_values(s);
  if (vals.size() != 1) {
    throw std::invalid_argument("config: expected one value for " + key);
  }
  return parse_double_field(vals[0], key.c_str());
}

bool parse_flag(const std::string& s, const std::string& key) {
  const auto vals = split_values(s);
  if (vals.size() == 1) {
    if (vals[0] == "true" || vals[0] == "1") return true;
    if (vals[0] == "false" || vals[0] == "0") return false;
  }
  throw std::invalid_argument("config: expected true/false for " + key);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = strip(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: missing '=' on line " +
                                  std::to_string(line_no));
    }
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (value.empty()) {
      throw std::invalid_argument("config: empty value for " + key);
    }

    if (key == "n1") cfg.n1 = parse_index_list(value, key);
    else if (key == "n2") cfg.n2 = parse_index_list(value, key);
    else if (key == "m") cfg.m = parse_index_list(value, key);
    else if (key == "s1") cfg.s1 = parse_index_list(value, key);
    else if (key == "s2") cfg.s2 = parse_index_list(value, key);
    else if (key == "k") cfg.k = parse_index_list(value, key);
    else if (key == "xi") cfg.xi = parse_double_list(value, key);
    else if (key == "mu") cfg.mu = parse_double_list(value, key);
    else if (key == "nu") cfg.nu = parse_double_list(value, key);
    else if (key == "trials") cfg.trials = static_cast<int>(parse_scalar(value, key));
    else if (key == "success_threshold") {
      cfg.success_threshold = value == "auto" ? -1.0 : parse_scalar(value, key);
    } else if (key == "base_seed") {
      std::uint64_t seed = 0;
      const auto vals = split_values(value);
      if (vals.size() != 1 ||
          std::from_chars(vals[0].data(), vals[0].data() + vals[0].size(), seed)
                  .ec != std::errc{}) {
        throw std::invalid_argument("config: bad base_seed");
      }
      cfg.base_seed = seed;
    } else if (key == "max_outer_iter") {
      cfg.max_outer_iter = static_cast<int>(parse_scalar(value, key));
    } else if (key == "max_htp_iter") {
      cfg.max_htp_iter = static_cast<int>(parse_scalar(value, key));
    } else if (key == "rel_change_tol") {
      cfg.rel_change_tol = parse_scalar(value, key);
    } else if (key == "measure_rip") {
      cfg.measure_rip = parse_flag(value, key);
    } else if (key == "rip_trials") {
      cfg.rip_trials = static_cast<int>(parse_scalar(value, key));
    } else if (key == "out_csv") {
      cfg.out_csv = value;
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream buffer;
  buffer << is.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace spf
