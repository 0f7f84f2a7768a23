#include "lff/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace lff {

void Budget::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("budget: epsilon must be > 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("budget: alpha must be > 0");
  if (!(alpha <= epsilon)) throw std::invalid_argument("budget: alpha must be <= epsilon");
  if (!(box_lo < box_hi)) throw std::invalid_argument("budget: box_lo must be < box_hi");
}

bool all_finite(const Vec& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void require_finite(const Vec& v, const char* what) {
  if (!all_finite(v)) throw NonFiniteError(std::string(what) + ": non-finite entry");
}

Vec sign(const Vec& v) {
  require_finite(v, "sign");
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = v[i] > 0.0 ? 1.0 : (v[i] < 0.0 ? -1.0 : 0.0);
  }
  return out;
}

double lp_norm(const Vec& v, Norm p) {
  require_finite(v, "lp_norm");
  double acc = 0.0;
  switch (p) {
    case Norm::L1:
      for (double x : v) acc += std::fabs(x);
      return acc;
    case Norm::L2:
      for (double x : v) acc += x * x;
      return std::sqrt(acc);
    case Norm::LInf:
      for (double x : v) acc = std::max(acc, std::fabs(x));
      return acc;
  }
  return acc;
}

Vec l1_normalize(const Vec& v) {
  const double n = lp_norm(v, Norm::L1);
  if (n == 0.0) throw ZeroGradientError("l1_normalize: zero vector (flat oracle?)");
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

Vec project(const Vec& x_adv, const Vec& x_clean, const Budget& b) {
  if (x_adv.size() != x_clean.size()) {
    throw std::invalid_argument("project: dimension mismatch");
  }
  require_finite(x_adv, "project");
  Vec out(x_adv.size());
  for (std::size_t i = 0; i < x_adv.size(); ++i) {
    const double lo = std::max(x_clean[i] - b.epsilon, b.box_lo);
    const double hi = std::min(x_clean[i] + b.epsilon, b.box_hi);
    out[i] = std::min(std::max(x_adv[i], lo), hi);
  }
  return out;
}

Vec add(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vec sub(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vec scale(const Vec& v, double c) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * c;
  return out;
}

void axpy(double a, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

double dot(const Vec& a, const Vec& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

std::uint64_t hash_bytes(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_vec(const Vec& v) {
  return hash_bytes(v.data(), v.size() * sizeof(double));
}

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  unsigned char buf[8];
  std::memcpy(buf, &v, 8);
  for (unsigned char b : buf) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace lff
