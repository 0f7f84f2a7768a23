#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lff {

// Flat feature vector in R^N. All public operations keep entries finite.
using Vec = std::vector<double>;

// NaN/Inf reached a place that requires finite values.
struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A gradient vanished identically; callers must handle a flat oracle explicitly.
struct ZeroGradientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A combined step direction is zero in every coordinate.
struct ZeroDirectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Norm { L1, L2, LInf };

// L-infinity budget around the clean point plus the valid data box.
// epsilon is the total budget, alpha the per-step update rate.
struct Budget {
  double epsilon = 0.15;
  double alpha = 0.015;
  double box_lo = 0.0;
  double box_hi = 1.0;

  void validate() const;
};

bool all_finite(const Vec& v);
void require_finite(const Vec& v, const char* what);

// Entrywise sign with sign(0) = 0.
Vec sign(const Vec& v);

double lp_norm(const Vec& v, Norm p);

// v / ||v||_1. Throws ZeroGradientError on the all-zero vector.
Vec l1_normalize(const Vec& v);

// Clamp x_adv into [x_clean - eps, x_clean + eps] intersected with the data box.
Vec project(const Vec& x_adv, const Vec& x_clean, const Budget& b);

Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(const Vec& v, double c);
void axpy(double a, const Vec& x, Vec& y);  // y += a * x
double dot(const Vec& a, const Vec& b);

// FNV-1a over raw bytes; stable across runs, used for trace records.
std::uint64_t hash_bytes(const void* data, std::size_t n);
std::uint64_t hash_vec(const Vec& v);
std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v);

// splitmix64-style mix for deriving per-example / per-step seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Full-precision decimal text for doubles; round-trips bitwise via strtod.
std::string format_double(double v);

}  // namespace lff
