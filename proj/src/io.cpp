#include "lnoise/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace lnoise {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write " + path);
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot read " + path);
  return f;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\r')) --e;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) throw ValidationError("not a number: '" + s + "'");
  return v;
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header, const Mat& rows) {
  auto f = open_out(path);
  for (std::size_t j = 0; j < header.size(); ++j) f << (j ? "," : "") << header[j];
  f << '\n';
  for (Index i = 0; i < rows.rows(); ++i) {
    for (Index j = 0; j < rows.cols(); ++j) f << (j ? "," : "") << format_double(rows(i, j));
    f << '\n';
  }
}

Mat read_csv(const std::string& path, std::vector<std::string>* header) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw ValidationError(path + " is empty");
  if (header) *header = split(line, ',');
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> r;
    for (const auto& cell : split(line, ',')) r.push_back(parse_double(cell));
    if (!rows.empty() && r.size() != rows.front().size()) throw ValidationError(path + ": ragged rows");
    rows.push_back(std::move(r));
  }
  const Index cols = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
  Mat m(static_cast<Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (Index j = 0; j < cols; ++j) m(static_cast<Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  return m;
}

void write_key_values(const std::string& path, const KeyValues& kv) {
  auto f = open_out(path);
  for (const auto& [k, v] : kv) f << k << '=' << v << '\n';
}

KeyValues read_key_values(const std::string& path) {
  auto f = open_in(path);
  KeyValues kv;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(path + ": expected key=value, got '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

void save_problem(const std::string& dir, const Problem& p, const GroundTruth* gt, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> hx;
  for (Index k = 0; k < p.d; ++k) hx.push_back("x" + std::to_string(k + 1));
  write_csv(dir + "/X.csv", hx, p.X);
  write_csv(dir + "/y.csv", {"y"}, p.y);
  KeyValues kv{{"n", std::to_string(p.n)}, {"d", std::to_string(p.d)}, {"seed", std::to_string(seed)}};
  if (gt) {
    kv["s"] = std::to_string(gt->support.size());
    std::string sup, bs;
    for (std::size_t j = 0; j < gt->support.size(); ++j) sup += (j ? "," : "") + std::to_string(gt->support[j] + 1);
    for (Index k = 0; k < p.d; ++k) bs += (k ? "," : "") + format_double(gt->beta_star[k]);
    kv["support"] = sup;
    kv["beta_star"] = bs;
  }
  write_key_values(dir + "/meta.txt", kv);
}

StoredProblem load_problem(const std::string& dir) {
  StoredProblem out;
  Mat X = read_csv(dir + "/X.csv");
  Mat y = read_csv(dir + "/y.csv");
  if (y.cols() != 1) throw ValidationError("y.csv must have one column");
  out.problem = build_problem(std::move(X), y.col(0));
  const std::string meta = dir + "/meta.txt";
  if (std::filesystem::exists(meta)) {
    KeyValues kv = read_key_values(meta);
    if (kv.count("seed")) out.seed = std::stoull(kv["seed"]);
    if (kv.count("n") && std::stol(kv["n"]) != out.problem.n) throw ValidationError("meta.txt n disagrees with X.csv");
    if (kv.count("d") && std::stol(kv["d"]) != out.problem.d) throw ValidationError("meta.txt d disagrees with X.csv");
    if (kv.count("support")) {
      Support S;
      for (const auto& tok : split(kv["support"], ','))
        if (!tok.empty()) S.push_back(static_cast<Index>(std::stol(tok)) - 1);
      out.truth = ground_truth(out.problem, S);
    }
  }
  return out;
}

void write_trajectory_csv(const std::string& path, const Trajectory& tr) {
  auto f = open_out(path);
  f << "step,t";
  for (Index k = 0; k < tr.d; ++k) f << ",beta_" << (k + 1);
  f << '\n';
  for (Index i = 0; i < tr.records(); ++i) {
    f << tr.steps[static_cast<std::size_t>(i)] << ',' << format_double(tr.times[static_cast<std::size_t>(i)]);
    for (Index k = 0; k < tr.d; ++k) f << ',' << format_double(tr.beta(i, k));
    f << '\n';
  }
}

TrajectoryTable read_trajectory_csv(const std::string& path) {
  std::vector<std::string> header;
  Mat m = read_csv(path, &header);
  if (m.cols() < 3 || header.size() < 3 || header[0] != "step" || header[1] != "t") {
    throw ValidationError(path + ": expected columns step,t,beta_1..");
  }
  TrajectoryTable t;
  for (Index i = 0; i < m.rows(); ++i) {
    t.steps.push_back(static_cast<long>(std::llround(m(i, 0))));
    t.times.push_back(m(i, 1));
  }
  t.beta = m.rightCols(m.cols() - 2);
  return t;
}

void write_noise_bin(const std::string& path, const std::vector<double>& values) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path);
  for (double v : values) {
    std::uint64_t u = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    f.write(reinterpret_cast<const char*>(&u), sizeof u);
  }
}

std::vector<double> read_noise_bin(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot read " + path);
  std::vector<double> out;
  std::uint64_t u = 0;
  while (f.read(reinterpret_cast<char*>(&u), sizeof u)) {
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
    out.push_back(std::bit_cast<double>(u));
  }
  if (f.gcount() != 0) throw ValidationError(path + ": truncated float64 record");
  return out;
}

}  // namespace lnoise
