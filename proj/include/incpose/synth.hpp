#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "incpose/geometry.hpp"
#include "incpose/result.hpp"

namespace incpose {

inline constexpr Pose kDefaultTruePose{0.3, 0.2, 0.1, 0.6};

struct SceneConfig {
  std::size_t n = 1000;
  double inlier_ratio = 0.1;
  double noise_sigma = 0.02;
  Pose true_pose = kDefaultTruePose;
  std::uint64_t seed = 1;
  double image_bound = 3.0;
  // Optional extra filter; a rejected draw is redrawn like an out-of-frame one.
  std::function<bool(const Correspondence&, bool inlier)> accept;
};

struct Scene {
  std::vector<Correspondence> correspondences;
  std::vector<std::uint8_t> inlier;  // parallel to correspondences; inliers come first
  Pose true_pose;
  std::uint64_t redraws = 0;
};

// Deterministic in cfg (including seed). Throws RejectionOverflow past 1000 n redraws.
Scene generate_scene(const SceneConfig& cfg);

enum class Method { Naive, PrimalDual, Canonical, Oracle };

std::string method_name(Method m);
// Throws InvalidConfig for unknown names.
Method parse_method(const std::string& s);

struct SolveOptions {
  Method method = Method::Naive;
  double epsilon = 0.03;
  AnalyticConstants constants;
  std::size_t top_k = 1;
  bool early_exit = false;
  bool parallel = true;
};

IncidenceResult solve(std::span<const Correspondence> surfaces, const SolveOptions& opt);

struct BenchConfig {
  Method method = Method::Naive;
  std::size_t n = 8000;
  double epsilon = 0.03;
  double inlier_ratio = 0.1;
  double noise_sigma = 0.02;
  std::uint64_t seed = 1;
  Pose true_pose = kDefaultTruePose;
};

struct BenchRecord {
  BenchConfig config;
  bool ok = false;
  std::string error;
  double median_seconds = 0;
  std::vector<double> seconds;  // timed repetitions, warm-up excluded
  double epsilon_effective = 0;
  Pose recovered;
  std::uint64_t count = 0;
  std::array<double, 4> pose_error{};  // |recovered - truth| per coordinate
  std::map<std::string, double> counters;
};

struct BenchOptions {
  int repeats = 5;
  bool warmup = true;
  bool early_exit = true;
  AnalyticConstants constants;
};

// One record per config; a failing config is recorded and the sweep continues.
std::vector<BenchRecord> run_benchmark(std::span<const BenchConfig> configs,
                                       const BenchOptions& opt = {});

struct ComparisonRow {
  std::size_t n = 0;
  double epsilon = 0;
  double inlier_ratio = 0;
  double noise_sigma = 0;
  std::uint64_t seed = 0;
  std::string fastest;
  // Per method: median seconds, speedup over the slowest method, pose errors.
  std::map<std::string, double> seconds;
  std::map<std::string, double> speedup;
  std::map<std::string, std::array<double, 4>> pose_error;
};

// Groups successful records by scene config. Throws MismatchedConfigs when no
// config has records from two or more methods.
std::vector<ComparisonRow> compare_methods(std::span<const BenchRecord> records);

// Writes <dir>/<method>.dat per method; returns the paths written.
std::vector<std::string> write_plot_data(const std::string& dir,
                                         std::span<const BenchRecord> records);

}  // namespace incpose
