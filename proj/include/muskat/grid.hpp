#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "muskat/errors.hpp"

namespace muskat {

constexpr double kPi = 3.14159265358979323846;

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
  friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend Vec3 operator*(Vec3 a, double s) { return a *= s; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Uniform periodic grid on [-L, L)^2 with n nodes per axis. Node (i1, i2)
// sits at alpha = (-L + i1*h, -L + i2*h) and is stored at index i2*n + i1
// (alpha_1 is the fast axis).
class ParamGrid {
public:
  ParamGrid() = default;
  ParamGrid(int n, double L) : n_(n), L_(L) {
    if (n < 8 || n % 2 != 0)
      throw InvalidInput("grid: n must be even and >= 8, got " + std::to_string(n));
    if (!(L > 0) || !std::isfinite(L))
      throw InvalidInput("grid: L must be positive and finite");
  }

  int n() const { return n_; }
  double L() const { return L_; }
  double h() const { return 2.0 * L_ / n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t index(int i1, int i2) const { return static_cast<std::size_t>(i2) * n_ + i1; }
  double alpha(int i) const { return -L_ + i * h(); }
  // Centered integer lattice index for FFT bin k: k for k < n/2, k - n otherwise.
  int centered(int k) const { return k < n_ / 2 ? k : k - n_; }
  double wavenumber(int k) const { return (kPi / L_) * centered(k); }
  bool is_nyquist(int k) const { return k == n_ / 2; }
  // Nearest-image lattice offset in [-n/2, n/2).
  int wrap(int d) const {
    d %= n_;
    if (d < -n_ / 2) d += n_;
    if (d >= n_ / 2) d -= n_;
    return d;
  }

  friend bool operator==(const ParamGrid& a, const ParamGrid& b) {
    return a.n_ == b.n_ && a.L_ == b.L_;
  }

private:
  int n_ = 8;
  double L_ = 1.0;
};

struct ScalarField {
  ParamGrid grid;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const ParamGrid& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}
  ScalarField(const ParamGrid& g, std::vector<double> values) : grid(g), v(std::move(values)) {
    if (v.size() != g.size()) throw InvalidInput("scalar field: length does not match grid");
  }

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  std::size_t size() const { return v.size(); }
  std::span<const double> span() const { return v; }
};

struct VecField3 {
  std::array<ScalarField, 3> c;

  VecField3() = default;
  explicit VecField3(const ParamGrid& g) : c{ScalarField(g), ScalarField(g), ScalarField(g)} {}
  VecField3(ScalarField a, ScalarField b, ScalarField d) : c{std::move(a), std::move(b), std::move(d)} {
    if (!(c[0].grid == c[1].grid) || !(c[0].grid == c[2].grid))
      throw InvalidInput("vector field: components on different grids");
  }

  const ParamGrid& grid() const { return c[0].grid; }
  std::size_t size() const { return c[0].size(); }
  Vec3 at(std::size_t i) const { return {c[0][i], c[1][i], c[2][i]}; }
  void set(std::size_t i, const Vec3& a) { c[0][i] = a.x; c[1][i] = a.y; c[2][i] = a.z; }
  ScalarField& operator[](int k) { return c[k]; }
  const ScalarField& operator[](int k) const { return c[k]; }
};

// Small field helpers used across modules.
double max_abs(const ScalarField& f);
double max_abs(const VecField3& f);
// max over nodes of the Euclidean norm of the vector.
double max_norm(const VecField3& f);
double mean(const ScalarField& f);
// Trapezoid (uniform) rule over the periodic box.
double integrate(const ScalarField& f);
bool all_finite(const ScalarField& f);
bool all_finite(const VecField3& f);
ScalarField dot(const VecField3& a, const VecField3& b);

// Deterministic pairwise summation.
double pairwise_sum(std::span<const double> x);

}  // namespace muskat
