#include "dcda/trace_io.hpp"

#include "dcda/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace dcda {

namespace {

std::string number(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double to_double(const std::string& s, long line) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (...) {
    used = 0;
  }
  if (used != s.size()) throw ConfigError("trace line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols = {"t",         "node",   "f_gap",    "dual_consensus",
                                                "primal_spread", "gbar_norm", "alpha", "accuracy",
                                                "grad_norm", "x_norm", "y_norm",   "transmissions"};
  return cols;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  const auto& cols = trace_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << '\n';
  for (const TraceRow& r : trace.rows) {
    os << r.t << ',' << r.node << ',' << number(r.f_gap) << ',' << number(r.dual_consensus) << ','
       << number(r.primal_spread) << ',' << number(r.gbar_norm) << ',' << number(r.alpha) << ','
       << number(r.accuracy) << ',' << number(r.grad_norm) << ',' << number(r.x_norm) << ',' << number(r.y_norm)
       << ',' << r.transmissions << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  write_trace_csv(os, trace);
}

RunTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read trace " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("trace " + path.string() + " is empty");
  if (split_csv_line(line) != trace_columns()) throw ConfigError("trace " + path.string() + ": unexpected header");
  RunTrace trace;
  long line_no = 1;
  std::vector<long> times;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != trace_columns().size())
      throw ConfigError("trace line " + std::to_string(line_no) + ": expected " +
                        std::to_string(trace_columns().size()) + " fields");
    TraceRow r;
    r.t = static_cast<long>(to_double(f[0], line_no));
    r.node = static_cast<int>(to_double(f[1], line_no));
    r.f_gap = to_double(f[2], line_no);
    r.dual_consensus = to_double(f[3], line_no);
    r.primal_spread = to_double(f[4], line_no);
    r.gbar_norm = to_double(f[5], line_no);
    r.alpha = to_double(f[6], line_no);
    r.accuracy = to_double(f[7], line_no);
    r.grad_norm = to_double(f[8], line_no);
    r.x_norm = to_double(f[9], line_no);
    r.y_norm = to_double(f[10], line_no);
    r.transmissions = static_cast<long long>(to_double(f[11], line_no));
    if (!trace.rows.empty() && (r.t < trace.rows.back().t ||
                                (r.t == trace.rows.back().t && r.node <= trace.rows.back().node)))
      throw ConfigError("trace line " + std::to_string(line_no) + ": rows must be ordered by (t, node)");
    if (times.empty() || times.back() != r.t) times.push_back(r.t);
    trace.n = std::max(trace.n, r.node + 1);
    trace.rows.push_back(r);
  }
  if (trace.rows.empty()) throw ConfigError("trace " + path.string() + " has no rows");
  trace.T = times.back();
  trace.metric_every = times.size() > 1 ? static_cast<int>(times[1] - times[0]) : static_cast<int>(times[0]);
  return trace;
}

void write_metadata(const std::filesystem::path& path, const std::string& config_text,
                    const std::vector<std::pair<std::string, std::string>>& metadata) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << config_text;
  for (const auto& [key, value] : metadata) os << "meta." << key << " = " << value << '\n';
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace dcda
