#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "incpose/geometry.hpp"
#include "incpose/result.hpp"
#include "incpose/synth.hpp"

namespace incpose {

inline constexpr const char* kVersion = "1.0.0";

// Uniform scale plus offset taking scene coordinates into [0,1]^3. Uniform so that
// image coordinates, being ratios, stay valid.
struct Normalization {
  double scale = 1;
  std::array<double, 3> offset{};

  bool identity() const { return scale == 1 && offset == std::array<double, 3>{}; }
  Correspondence apply(const Correspondence& c) const;
  Pose to_original(const Pose& p) const;
};

// "w1,w2,w3,xi,eta" per line; '#' starts a comment line; blank lines skipped.
// Throws ParseError (with line number) or EmptyInput.
std::vector<Correspondence> parse_correspondences(std::istream& in);
std::vector<Correspondence> parse_correspondences(const std::string& path);
void write_correspondences(std::ostream& out, std::span<const Correspondence> cs);
void write_correspondences(const std::string& path, std::span<const Correspondence> cs);

// Rescales in place when any scene coordinate lies outside [0,1]; identity otherwise.
Normalization normalize(std::vector<Correspondence>& cs);

// Drops non-finite entries and those with |xi| or |eta| above the image bound.
// Returns how many were dropped.
std::size_t ingest_filter(std::vector<Correspondence>& cs, const AnalyticConstants& k);

struct RunConfig {
  Method method = Method::Naive;
  double epsilon = 0.03;
  AnalyticConstants constants;
  std::size_t top_k = 1;
  std::uint64_t seed = 1;
  std::string input;
  std::string output;
  bool early_exit = false;

  // Throws InvalidConfig.
  void validate() const;
};

struct RunInfo {
  std::size_t n_input = 0;
  std::size_t n_filtered = 0;
  Normalization normalization;
  double wall_seconds = 0;
};

// key=value document; lines starting with "timing." carry the only run-dependent values.
std::string format_result(const IncidenceResult& r, const RunConfig& cfg, const RunInfo& info);
// The document with timing lines removed.
std::string strip_timing(const std::string& doc);
std::string format_error(const std::string& kind, const std::string& message);

// "method,n,epsilon,inlier_ratio,noise_sigma,seed" per line; '#' comments.
std::vector<BenchConfig> parse_sweep(std::istream& in);
std::vector<BenchConfig> parse_sweep(const std::string& path);

// Tab-separated records with a '#' header.
void write_bench_records(std::ostream& out, std::span<const BenchRecord> records);
std::vector<BenchRecord> read_bench_records(std::istream& in);
std::string format_comparison(std::span<const ComparisonRow> rows);

}  // namespace incpose
