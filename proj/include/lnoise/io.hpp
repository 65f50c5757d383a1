#pragma once

#include "lnoise/dynamics.hpp"
#include "lnoise/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lnoise {

/// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

void write_csv(const std::string& path, const std::vector<std::string>& header, const Mat& rows);
/// Reads a numeric CSV with one header line.
Mat read_csv(const std::string& path, std::vector<std::string>* header = nullptr);

using KeyValues = std::map<std::string, std::string>;
void write_key_values(const std::string& path, const KeyValues& kv);
KeyValues read_key_values(const std::string& path);

struct StoredProblem {
  Problem problem;
  std::optional<GroundTruth> truth;
  std::uint64_t seed = 0;
};

/// X.csv, y.csv and meta.txt in dir. Support indices in the metadata are 1-based.
void save_problem(const std::string& dir, const Problem& p, const GroundTruth* gt, std::uint64_t seed);
StoredProblem load_problem(const std::string& dir);

/// Columns step, t, beta_1..beta_d at the recorded steps.
void write_trajectory_csv(const std::string& path, const Trajectory& tr);

struct TrajectoryTable {
  std::vector<long> steps;
  std::vector<double> times;
  Mat beta;
};
TrajectoryTable read_trajectory_csv(const std::string& path);

/// Raw little-endian float64 values.
void write_noise_bin(const std::string& path, const std::vector<double>& values);
std::vector<double> read_noise_bin(const std::string& path);

}  // namespace lnoise
