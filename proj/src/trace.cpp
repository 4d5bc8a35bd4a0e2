#include "fcsize/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "fcsize/error.hpp"

namespace fcsize {

namespace {

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(Trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void RowError(const std::string& source, long line, const std::string& what) {
  std::ostringstream os;
  os << source << ":" << line << ": " << what;
  Fail(ErrorCode::kParse, os.str());
}

double ParseNumber(const std::string& field, const std::string& source, long line) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    RowError(source, line, "malformed number '" + field + "'");
  }
  return value;
}

// Strips a UTF-8 byte order mark and CR line endings.
bool NextLine(std::istream& in, std::string& line, long& line_no) {
  if (!std::getline(in, line)) return false;
  ++line_no;
  if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
    line.erase(0, 3);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

double Interpolate(const PowerTrace& trace, double t, std::size_t& cursor, double snap) {
  const auto& ts = trace.t_s;
  while (cursor + 1 < ts.size() && ts[cursor + 1] <= t + snap) ++cursor;
  if (std::abs(t - ts[cursor]) <= snap) return trace.demand_W[cursor];
  if (cursor + 1 >= ts.size()) return trace.demand_W.back();
  const double t0 = ts[cursor];
  const double t1 = ts[cursor + 1];
  const double w = (t - t0) / (t1 - t0);
  return trace.demand_W[cursor] + w * (trace.demand_W[cursor + 1] - trace.demand_W[cursor]);
}

}  // namespace

double PowerTrace::sample_period_s() const {
  if (size() < 2) return 0.0;
  return (t_s.back() - t_s.front()) / static_cast<double>(size() - 1);
}

void PowerTrace::Validate(double rated_W) const {
  if (empty()) Fail(ErrorCode::kInvalidArgument, "trace is empty");
  if (t_s.size() != demand_W.size()) Fail(ErrorCode::kInvalidArgument, "trace columns differ in length");
  for (std::size_t k = 0; k < size(); ++k) {
    std::ostringstream os;
    os << "trace sample " << k << ": ";
    if (!std::isfinite(t_s[k]) || !std::isfinite(demand_W[k])) {
      Fail(ErrorCode::kInvalidArgument, os.str() + "non-finite value");
    }
    if (demand_W[k] < 0.0) Fail(ErrorCode::kInvalidArgument, os.str() + "negative demand");
    if (rated_W > 0.0 && demand_W[k] > rated_W * (1.0 + 1e-9)) {
      Fail(ErrorCode::kInvalidArgument, os.str() + "demand exceeds rated plant power");
    }
    if (k > 0 && !(t_s[k] > t_s[k - 1])) {
      Fail(ErrorCode::kInvalidArgument, os.str() + "time is not strictly increasing");
    }
  }
}

PowerTrace Resample(const PowerTrace& trace, double dt_s) {
  trace.Validate();
  if (!(dt_s > 0.0)) Fail(ErrorCode::kInvalidArgument, "resample: dt must be positive");
  PowerTrace out;
  const double t0 = trace.t_s.front();
  const double span = trace.duration_s();
  const auto steps = static_cast<long>(std::floor(span / dt_s + 1e-9));
  const double period = trace.size() > 1 ? trace.sample_period_s() : dt_s;
  const double snap = 1e-9 * std::min(period, dt_s);
  std::size_t cursor = 0;
  out.t_s.reserve(steps + 1);
  out.demand_W.reserve(steps + 1);
  for (long k = 0; k <= steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt_s;
    out.t_s.push_back(t);
    out.demand_W.push_back(Interpolate(trace, t, cursor, snap));
  }
  return out;
}

std::vector<double> ResampleDemand(const PowerTrace& trace, double dt_s) {
  return Resample(trace, dt_s).demand_W;
}

void SurgeSpec::Validate() const {
  if (!(slope_W_per_s > 0.0)) Fail(ErrorCode::kInvalidArgument, "surge: slope must be > 0");
  if (!(magnitude_W >= 0.0)) Fail(ErrorCode::kInvalidArgument, "surge: magnitude must be >= 0");
  if (!(base_W >= 0.0)) Fail(ErrorCode::kInvalidArgument, "surge: base must be >= 0");
  if (!(pre_s >= 0.0 && post_s >= 0.0)) Fail(ErrorCode::kInvalidArgument, "surge: dwell times must be >= 0");
  if (!(width_s >= 2.0 * ramp_s() - 1e-9)) {
    Fail(ErrorCode::kInvalidArgument, "surge: width must fit both ramps (width >= 2*magnitude/slope)");
  }
}

double SurgeOffset(const SurgeSpec& spec, double t) {
  if (t <= 0.0 || t >= spec.width_s) return 0.0;
  const double ramp = spec.ramp_s();
  if (t < ramp) return spec.slope_W_per_s * t;
  if (t <= spec.width_s - ramp) return spec.magnitude_W;
  return spec.slope_W_per_s * (spec.width_s - t);
}

PowerTrace GenSurge(const SurgeSpec& spec, double dt_s) {
  spec.Validate();
  if (!(dt_s > 0.0)) Fail(ErrorCode::kInvalidArgument, "surge: dt must be positive");
  const double total = spec.pre_s + spec.width_s + spec.post_s;
  const auto steps = static_cast<long>(std::floor(total / dt_s + 1e-9));
  PowerTrace out;
  out.t_s.reserve(steps + 1);
  out.demand_W.reserve(steps + 1);
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt_s;
    out.t_s.push_back(t);
    out.demand_W.push_back(spec.base_W + SurgeOffset(spec, t - spec.pre_s));
  }
  return out;
}

PowerTrace ComposeSurges(double base_W, double duration_s, std::span<const PlacedSurge> surges,
                         double dt_s, double cap_W) {
  if (!(dt_s > 0.0) || !(duration_s > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "compose: dt and duration must be positive");
  }
  for (const auto& s : surges) {
    SurgeSpec shape = s.shape;
    shape.pre_s = shape.post_s = 0.0;
    shape.base_W = base_W;
    shape.Validate();
  }
  const auto steps = static_cast<long>(std::floor(duration_s / dt_s + 1e-9));
  PowerTrace out;
  out.t_s.reserve(steps + 1);
  out.demand_W.reserve(steps + 1);
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt_s;
    double demand = base_W;
    for (const auto& s : surges) demand += SurgeOffset(s.shape, t - s.start_s);
    if (cap_W > 0.0) demand = std::min(demand, cap_W);
    out.t_s.push_back(t);
    out.demand_W.push_back(demand);
  }
  return out;
}

PowerTrace SingleSurgeDayTrace(double dt_s) {
  SurgeSpec shape;
  const PlacedSurge surge{4.0 * 3600.0, shape};
  return ComposeSurges(5600.0, 8.0 * 3600.0, std::span(&surge, 1), dt_s);
}

PowerTrace FrequentSurgeDayTrace(double dt_s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gap_s(12.0 * 60.0, 30.0 * 60.0);
  std::uniform_real_distribution<double> slope(20.0, 160.0);
  std::uniform_real_distribution<double> magnitude(1500.0, 5000.0);
  std::uniform_real_distribution<double> plateau_s(2.0 * 60.0, 10.0 * 60.0);
  const double duration = 8.0 * 3600.0;
  std::vector<PlacedSurge> surges;
  double t = 10.0 * 60.0;
  while (t < duration - 20.0 * 60.0) {
    PlacedSurge s;
    s.start_s = t;
    s.shape.magnitude_W = magnitude(rng);
    s.shape.slope_W_per_s = slope(rng);
    s.shape.width_s = 2.0 * s.shape.ramp_s() + plateau_s(rng);
    surges.push_back(s);
    t += s.shape.width_s + gap_s(rng);
  }
  return ComposeSurges(5600.0, duration, surges, dt_s, 12500.0);
}

PowerTrace ReadTraceCsv(std::istream& in, const std::string& source) {
  std::string line;
  long line_no = 0;
  if (!NextLine(in, line, line_no)) Fail(ErrorCode::kParse, source + ": empty file");
  const auto header = SplitCsv(line);
  if (header.size() != 2 || Lower(header[0]) != "t_s" || Lower(header[1]) != "demand_w") {
    RowError(source, line_no, "expected header 't_s,demand_w'");
  }
  PowerTrace trace;
  while (NextLine(in, line, line_no)) {
    if (Trim(line).empty()) continue;
    const auto fields = SplitCsv(line);
    if (fields.size() != 2) RowError(source, line_no, "expected 2 columns");
    const double t = ParseNumber(fields[0], source, line_no);
    const double w = ParseNumber(fields[1], source, line_no);
    if (!std::isfinite(t) || !std::isfinite(w)) RowError(source, line_no, "non-finite value");
    if (w < 0.0) RowError(source, line_no, "negative demand");
    if (!trace.empty() && !(t > trace.t_s.back())) {
      RowError(source, line_no, "time is not strictly increasing");
    }
    trace.t_s.push_back(t);
    trace.demand_W.push_back(w);
  }
  if (trace.empty()) Fail(ErrorCode::kParse, source + ": no data rows");
  return trace;
}

PowerTrace LoadTrace(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open trace '" + path + "'");
  return ReadTraceCsv(in, path);
}

void WriteTraceCsv(std::ostream& out, const PowerTrace& trace) {
  out << "t_s,demand_w\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << trace.t_s[k] << ',' << trace.demand_W[k] << '\n';
  }
}

void SaveTrace(const std::string& path, const PowerTrace& trace) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot write trace '" + path + "'");
  WriteTraceCsv(out, trace);
}

ServerIntensityTrace ReadServerIntensityCsv(std::istream& in, const std::string& source) {
  std::string line;
  long line_no = 0;
  if (!NextLine(in, line, line_no)) Fail(ErrorCode::kParse, source + ": empty file");
  const auto header = SplitCsv(line);
  if (header.size() != 3 || Lower(header[0]) != "t_s" || Lower(header[1]) != "server_id" ||
      Lower(header[2]) != "intensity") {
    RowError(source, line_no, "expected header 't_s,server_id,intensity'");
  }
  std::map<double, std::map<long, double>> rows;
  long max_server = -1;
  double last_t = -INFINITY;
  while (NextLine(in, line, line_no)) {
    if (Trim(line).empty()) continue;
    const auto fields = SplitCsv(line);
    if (fields.size() != 3) RowError(source, line_no, "expected 3 columns");
    const double t = ParseNumber(fields[0], source, line_no);
    const double id = ParseNumber(fields[1], source, line_no);
    const double lambda = ParseNumber(fields[2], source, line_no);
    if (!std::isfinite(t) || !std::isfinite(lambda)) RowError(source, line_no, "non-finite value");
    if (t < last_t) RowError(source, line_no, "time is decreasing");
    if (id < 0 || id != std::floor(id)) RowError(source, line_no, "server_id must be a non-negative integer");
    if (lambda < 0.0 || lambda > 1.0) RowError(source, line_no, "intensity must lie in [0, 1]");
    last_t = t;
    const long server = static_cast<long>(id);
    if (!rows[t].emplace(server, lambda).second) RowError(source, line_no, "duplicate server sample");
    max_server = std::max(max_server, server);
  }
  if (rows.empty()) Fail(ErrorCode::kParse, source + ": no data rows");
  ServerIntensityTrace out;
  for (const auto& [t, servers] : rows) {
    if (static_cast<long>(servers.size()) != max_server + 1) {
      std::ostringstream os;
      os << source << ": time " << t << " lists " << servers.size() << " of " << max_server + 1
         << " servers";
      Fail(ErrorCode::kParse, os.str());
    }
    out.t_s.push_back(t);
    std::vector<double> row;
    for (const auto& [id, lambda] : servers) row.push_back(lambda);
    out.intensity.push_back(std::move(row));
  }
  return out;
}

ServerIntensityTrace LoadServerIntensity(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open intensity trace '" + path + "'");
  return ReadServerIntensityCsv(in, path);
}

}  // namespace fcsize
