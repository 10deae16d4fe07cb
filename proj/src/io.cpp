#include "incpose/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace incpose {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto p = line.find(sep, start);
    out.push_back(trim(std::string_view(line).substr(start, p - start)));
    if (p == std::string::npos) break;
    start = p + 1;
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ParseError(line, "not a number: '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ParseError(line, "not a nonnegative integer: '" + s + "'");
  return v;
}

bool skip_line(const std::string& t) { return t.empty() || t[0] == '#'; }

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string pose_str(const Pose& p) {
  return num(p.x) + "," + num(p.y) + "," + num(p.z) + "," + num(p.kappa);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidConfig("cannot open " + path);
  return f;
}

}  // namespace

Correspondence Normalization::apply(const Correspondence& c) const {
  return {(c.w1 - offset[0]) * scale, (c.w2 - offset[1]) * scale, (c.w3 - offset[2]) * scale, c.xi, c.eta};
}

Pose Normalization::to_original(const Pose& p) const {
  return {p.x / scale + offset[0], p.y / scale + offset[1], p.z / scale + offset[2], p.kappa};
}

std::vector<Correspondence> parse_correspondences(std::istream& in) {
  std::vector<Correspondence> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const std::string t = trim(line);
    if (skip_line(t)) continue;
    const auto f = split(t, ',');
    if (f.size() != 5) throw ParseError(no, "expected 5 comma-separated fields, got " + std::to_string(f.size()));
    out.push_back({parse_double(f[0], no), parse_double(f[1], no), parse_double(f[2], no),
                   parse_double(f[3], no), parse_double(f[4], no)});
  }
  if (out.empty()) throw EmptyInput("no correspondences in input");
  return out;
}

std::vector<Correspondence> parse_correspondences(const std::string& path) {
  auto f = open_in(path);
  return parse_correspondences(f);
}

void write_correspondences(std::ostream& out, std::span<const Correspondence> cs) {
  out << "# w1,w2,w3,xi,eta\n";
  for (const auto& c : cs)
    out << full(c.w1) << ',' << full(c.w2) << ',' << full(c.w3) << ',' << full(c.xi) << ',' << full(c.eta)
        << '\n';
}

void write_correspondences(const std::string& path, std::span<const Correspondence> cs) {
  std::ofstream f(path);
  if (!f) throw InvalidConfig("cannot write " + path);
  write_correspondences(f, cs);
}

Normalization normalize(std::vector<Correspondence>& cs) {
  Normalization n;
  if (cs.empty()) return n;
  std::array<double, 3> lo{cs[0].w1, cs[0].w2, cs[0].w3}, hi = lo;
  for (const auto& c : cs) {
    const double w[3] = {c.w1, c.w2, c.w3};
    for (int a = 0; a < 3; ++a) {
      lo[std::size_t(a)] = std::min(lo[std::size_t(a)], w[a]);
      hi[std::size_t(a)] = std::max(hi[std::size_t(a)], w[a]);
    }
  }
  bool inside = true;
  for (int a = 0; a < 3; ++a) inside = inside && lo[std::size_t(a)] >= 0 && hi[std::size_t(a)] <= 1;
  if (inside) return n;
  double extent = 0;
  for (int a = 0; a < 3; ++a) extent = std::max(extent, hi[std::size_t(a)] - lo[std::size_t(a)]);
  n.scale = extent > 0 ? 1.0 / extent : 1.0;
  n.offset = lo;
  for (auto& c : cs) c = n.apply(c);
  return n;
}

std::size_t ingest_filter(std::vector<Correspondence>& cs, const AnalyticConstants& k) {
  const auto before = cs.size();
  std::erase_if(cs, [&](const Correspondence& c) {
    const double v[5] = {c.w1, c.w2, c.w3, c.xi, c.eta};
    for (double x : v)
      if (!std::isfinite(x)) return true;
    return std::abs(c.xi) > k.image_bound || std::abs(c.eta) > k.image_bound;
  });
  return before - cs.size();
}

void RunConfig::validate() const {
  if (!(epsilon > 0 && epsilon < 0.5)) throw InvalidConfig("epsilon must lie in (0, 0.5)");
  if (top_k < 1) throw InvalidConfig("top_k must be >= 1");
  constants.validate();
}

std::string format_result(const IncidenceResult& r, const RunConfig& cfg, const RunInfo& info) {
  std::ostringstream o;
  const AnalyticConstants& k = cfg.constants;
  o << "# incpose result\n";
  o << "version=" << kVersion << '\n';
  o << "method=" << r.method << '\n';
  o << "seed=" << cfg.seed << '\n';
  o << "epsilon.requested=" << num(r.epsilon_requested) << '\n';
  o << "epsilon.effective=" << num(r.epsilon_effective) << '\n';
  o << "top_k=" << cfg.top_k << '\n';
  o << "early_exit=" << (cfg.early_exit ? "true" : "false") << '\n';
  o << "n.input=" << info.n_input << '\n';
  o << "n.filtered=" << info.n_filtered << '\n';
  o << "constants.a=" << num(k.a) << '\n';
  o << "constants.c1=" << num(k.c1) << '\n';
  o << "constants.c2=" << num(k.c2) << '\n';
  o << "constants.c_kappa=" << num(k.c_kappa) << '\n';
  o << "constants.c_grid=" << num(k.c_grid) << '\n';
  o << "constants.gamma=" << num(k.gamma) << '\n';
  o << "constants.alpha=" << num(k.alpha) << '\n';
  o << "constants.beta=" << num(k.beta) << '\n';
  o << "constants.image_bound=" << num(k.image_bound) << '\n';
  if (!info.normalization.identity()) {
    o << "normalization.scale=" << full(info.normalization.scale) << '\n';
    o << "normalization.offset=" << full(info.normalization.offset[0]) << ','
      << full(info.normalization.offset[1]) << ',' << full(info.normalization.offset[2]) << '\n';
  }
  o << "candidates=" << r.candidates.size() << '\n';
  for (std::size_t i = 0; i < r.candidates.size(); ++i) {
    const Candidate& c = r.candidates[i];
    const std::string p = "candidate." + std::to_string(i) + ".";
    o << p << "count=" << c.count << '\n';
    o << p << "pose=" << pose_str(c.pose) << '\n';
    if (!info.normalization.identity())
      o << p << "pose_original=" << pose_str(info.normalization.to_original(c.pose)) << '\n';
    o << p << "cell=" << c.cell[0] << ',' << c.cell[1] << ',' << c.cell[2] << ',' << c.cell[3] << '\n';
  }
  for (const auto& [key, v] : r.diagnostics) o << "diag." << key << '=' << num(v) << '\n';
  o << "timing.wall_seconds=" << num(info.wall_seconds) << '\n';
  return o.str();
}

std::string strip_timing(const std::string& doc) {
  std::istringstream in(doc);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind("timing.", 0) != 0) out += line + '\n';
  return out;
}

std::string format_error(const std::string& kind, const std::string& message) {
  return "error.kind=" + kind + "\nerror.message=" + message + "\n";
}

std::vector<BenchConfig> parse_sweep(std::istream& in) {
  std::vector<BenchConfig> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const std::string t = trim(line);
    if (skip_line(t)) continue;
    const auto f = split(t, ',');
    if (f.size() != 6) throw ParseError(no, "expected method,n,epsilon,inlier_ratio,noise_sigma,seed");
    BenchConfig c;
    try {
      c.method = parse_method(f[0]);
    } catch (const InvalidConfig& e) {
      throw ParseError(no, e.what());
    }
    c.n = std::size_t(parse_u64(f[1], no));
    c.epsilon = parse_double(f[2], no);
    c.inlier_ratio = parse_double(f[3], no);
    c.noise_sigma = parse_double(f[4], no);
    c.seed = parse_u64(f[5], no);
    out.push_back(c);
  }
  return out;
}

std::vector<BenchConfig> parse_sweep(const std::string& path) {
  auto f = open_in(path);
  return parse_sweep(f);
}

void write_bench_records(std::ostream& out, std::span<const BenchRecord> records) {
  out << "# method\tn\tepsilon\tinlier_ratio\tnoise_sigma\tseed\tstatus\tmedian_seconds\t"
         "x\ty\tz\tkappa\terr_x\terr_y\terr_z\terr_kappa\tcount\terror\n";
  for (const auto& r : records) {
    const auto& c = r.config;
    out << method_name(c.method) << '\t' << c.n << '\t' << full(c.epsilon) << '\t' << full(c.inlier_ratio) << '\t'
        << full(c.noise_sigma) << '\t' << c.seed << '\t' << (r.ok ? "ok" : "failed") << '\t'
        << full(r.median_seconds);
    for (int a = 0; a < 4; ++a) out << '\t' << full(r.recovered[a]);
    for (double e : r.pose_error) out << '\t' << full(e);
    std::string err = r.error;
    for (char& ch : err)
      if (ch == '\t' || ch == '\n') ch = ' ';
    out << '\t' << r.count << '\t' << err << '\n';
  }
}

std::vector<BenchRecord> read_bench_records(std::istream& in) {
  std::vector<BenchRecord> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (skip_line(trim(line))) continue;
    auto f = split(line, '\t');
    if (f.size() < 17) throw ParseError(no, "bench record has too few fields");
    BenchRecord r;
    try {
      r.config.method = parse_method(f[0]);
    } catch (const InvalidConfig& e) {
      throw ParseError(no, e.what());
    }
    r.config.n = std::size_t(parse_u64(f[1], no));
    r.config.epsilon = parse_double(f[2], no);
    r.config.inlier_ratio = parse_double(f[3], no);
    r.config.noise_sigma = parse_double(f[4], no);
    r.config.seed = parse_u64(f[5], no);
    r.ok = f[6] == "ok";
    r.median_seconds = parse_double(f[7], no);
    r.recovered = {parse_double(f[8], no), parse_double(f[9], no), parse_double(f[10], no), parse_double(f[11], no)};
    for (int a = 0; a < 4; ++a) r.pose_error[std::size_t(a)] = parse_double(f[std::size_t(12 + a)], no);
    r.count = parse_u64(f[16], no);
    if (f.size() > 17) r.error = f[17];
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_comparison(std::span<const ComparisonRow> rows) {
  std::ostringstream o;
  o << "# n\tepsilon\tinlier_ratio\tnoise_sigma\tseed\tmethod\tmedian_seconds\tspeedup\t"
       "err_x\terr_y\terr_z\terr_kappa\tfastest\n";
  for (const auto& row : rows)
    for (const auto& [m, s] : row.seconds) {
      const auto& e = row.pose_error.at(m);
      o << row.n << '\t' << num(row.epsilon) << '\t' << num(row.inlier_ratio) << '\t' << num(row.noise_sigma)
        << '\t' << row.seed << '\t' << m << '\t' << num(s) << '\t' << num(row.speedup.at(m)) << '\t' << num(e[0])
        << '\t' << num(e[1]) << '\t' << num(e[2]) << '\t' << num(e[3]) << '\t' << (m == row.fastest ? "yes" : "no")
        << '\n';
    }
  return o.str();
}

}  // namespace incpose
