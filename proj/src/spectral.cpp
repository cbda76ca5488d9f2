#include "muskat/spectral.hpp"

#include <fftw3.h>

#include <atomic>
#include <map>
#include <mutex>
#include <numeric>

namespace muskat {

double max_abs(const ScalarField& f) {
  double m = 0;
  for (double x : f.v) m = std::max(m, std::abs(x));
  return m;
}

double max_abs(const VecField3& f) {
  return std::max({max_abs(f[0]), max_abs(f[1]), max_abs(f[2])});
}

double max_norm(const VecField3& f) {
  double m = 0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, norm(f.at(i)));
  return m;
}

double mean(const ScalarField& f) { return pairwise_sum(f.v) / static_cast<double>(f.size()); }

double integrate(const ScalarField& f) {
  const double h = f.grid.h();
  return pairwise_sum(f.v) * h * h;
}

bool all_finite(const ScalarField& f) {
  for (double x : f.v)
    if (!std::isfinite(x)) return false;
  return true;
}

bool all_finite(const VecField3& f) { return all_finite(f[0]) && all_finite(f[1]) && all_finite(f[2]); }

ScalarField dot(const VecField3& a, const VecField3& b) {
  ScalarField out(a.grid());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = a[0][i] * b[0][i] + a[1][i] * b[1][i] + a[2][i] * b[2][i];
  return out;
}

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 16) {
    double s = 0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

namespace spectral {

namespace {

std::atomic<bool> g_riesz_mutation{false};

struct Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

// FFTW's planner is not thread-safe; plans are created once per size and
// only executed (new-array interface) afterwards.
const Plans& plans_for(int n) {
  static std::mutex mu;
  static std::map<int, Plans> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const std::size_t nh = static_cast<std::size_t>(n) * (n / 2 + 1);
  double* in = fftw_alloc_real(static_cast<std::size_t>(n) * n);
  fftw_complex* out = fftw_alloc_complex(nh);
  Plans p;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p.r2c = fftw_plan_dft_r2c_2d(n, n, in, out, flags);
  p.c2r = fftw_plan_dft_c2r_2d(n, n, out, in, flags);
  fftw_free(in);
  fftw_free(out);
  return cache.emplace(n, p).first->second;
}

void check_finite(const ScalarField& f) {
  if (!all_finite(f)) throw InvalidInput("spectral: non-finite input field");
}

template <class Mult>
ScalarField apply(const ScalarField& f, Mult mult) {
  check_finite(f);
  const ParamGrid& g = f.grid;
  Spectrum s = forward(f);
  const int n = g.n();
  const int nc = n / 2 + 1;
  for (int k2 = 0; k2 < n; ++k2) {
    const double xi2 = g.wavenumber(k2);
    const bool nyq2 = g.is_nyquist(k2);
    for (int k1 = 0; k1 < nc; ++k1) {
      const double xi1 = g.wavenumber(k1);
      const bool nyq1 = g.is_nyquist(k1);
      s[static_cast<std::size_t>(k2) * nc + k1] *= mult(xi1, xi2, nyq1, nyq2);
    }
  }
  return inverse(g, std::move(s));
}

using cd = std::complex<double>;

}  // namespace

Spectrum forward(const ScalarField& f) {
  const int n = f.grid.n();
  const Plans& p = plans_for(n);
  Spectrum s(static_cast<std::size_t>(n) * (n / 2 + 1));
  std::vector<double> in(f.v);
  fftw_execute_dft_r2c(p.r2c, in.data(), reinterpret_cast<fftw_complex*>(s.data()));
  return s;
}

ScalarField inverse(const ParamGrid& g, Spectrum s) {
  const int n = g.n();
  const Plans& p = plans_for(n);
  ScalarField out(g);
  fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(s.data()), out.v.data());
  const double scale = 1.0 / static_cast<double>(g.size());
  for (double& x : out.v) x *= scale;
  return out;
}

ScalarField derivative(const ScalarField& f, int axis) {
  return apply(f, [axis](double xi1, double xi2, bool n1, bool n2) -> cd {
    if (axis == 1) return n1 ? cd{0, 0} : cd{0, xi1};
    return n2 ? cd{0, 0} : cd{0, xi2};
  });
}

ScalarField second_derivative(const ScalarField& f, int a, int b) {
  return apply(f, [a, b](double xi1, double xi2, bool n1, bool n2) -> cd {
    const double xa = a == 1 ? xi1 : xi2;
    const double xb = b == 1 ? xi1 : xi2;
    const bool za = a == 1 ? n1 : n2;
    const bool zb = b == 1 ? n1 : n2;
    if (za || zb) return {0, 0};
    return {-xa * xb, 0};
  });
}

VecField3 derivative(const VecField3& f, int axis) {
  return VecField3(derivative(f[0], axis), derivative(f[1], axis), derivative(f[2], axis));
}

ScalarField riesz(const ScalarField& f, int axis) {
  const double sign = g_riesz_mutation.load() ? -1.0 : 1.0;
  return apply(f, [axis, sign](double xi1, double xi2, bool n1, bool n2) -> cd {
    const double r = std::hypot(xi1, xi2);
    if (r == 0) return {0, 0};
    if (axis == 1) return n1 ? cd{0, 0} : cd{0, -sign * xi1 / r};
    return n2 ? cd{0, 0} : cd{0, -sign * xi2 / r};
  });
}

ScalarField lambda_op(const ScalarField& f) {
  return apply(f, [](double xi1, double xi2, bool, bool) -> cd { return {std::hypot(xi1, xi2), 0}; });
}

ScalarField inv_lap_grad(const ScalarField& f, int axis) {
  return apply(f, [axis](double xi1, double xi2, bool n1, bool n2) -> cd {
    const double r2 = xi1 * xi1 + xi2 * xi2;
    if (r2 == 0) return {0, 0};
    if (axis == 1) return n1 ? cd{0, 0} : cd{0, -xi1 / r2};
    return n2 ? cd{0, 0} : cd{0, -xi2 / r2};
  });
}

ScalarField laplacian(const ScalarField& f) {
  return apply(f, [](double xi1, double xi2, bool, bool) -> cd { return {-(xi1 * xi1 + xi2 * xi2), 0}; });
}

ScalarField inv_neg_laplacian(const ScalarField& f) {
  return apply(f, [](double xi1, double xi2, bool, bool) -> cd {
    const double r2 = xi1 * xi1 + xi2 * xi2;
    return r2 == 0 ? cd{0, 0} : cd{1.0 / r2, 0};
  });
}

std::vector<double> interpolate(const ScalarField& f, std::span<const double> a1,
                                std::span<const double> a2) {
  if (a1.size() != a2.size()) throw InvalidInput("interpolate: coordinate arrays differ in length");
  check_finite(f);
  const ParamGrid& g = f.grid;
  const int n = g.n();
  const int nc = n / 2 + 1;
  Spectrum s = forward(f);
  const double scale = 1.0 / static_cast<double>(g.size());
  for (int k2 = 0; k2 < n; ++k2)
    for (int k1 = 0; k1 < nc; ++k1) {
      const double w = (k1 == 0 || k1 == n / 2) ? 1.0 : 2.0;
      s[static_cast<std::size_t>(k2) * nc + k1] *= w * scale;
    }

  std::vector<double> out(a1.size());
  std::vector<cd> e1(nc), e2(n);
  for (std::size_t p = 0; p < a1.size(); ++p) {
    const double x1 = a1[p] + g.L();
    const double x2 = a2[p] + g.L();
    for (int k1 = 0; k1 < nc; ++k1) {
      const double ph = g.wavenumber(k1) * x1;
      e1[k1] = {std::cos(ph), std::sin(ph)};
    }
    for (int k2 = 0; k2 < n; ++k2) {
      const double ph = g.wavenumber(k2) * x2;
      e2[k2] = {std::cos(ph), std::sin(ph)};
    }
    double acc = 0;
    for (int k2 = 0; k2 < n; ++k2) {
      const cd* row = s.data() + static_cast<std::size_t>(k2) * nc;
      double re = 0, im = 0;
      for (int k1 = 0; k1 < nc; ++k1) {
        re += row[k1].real() * e1[k1].real() - row[k1].imag() * e1[k1].imag();
        im += row[k1].real() * e1[k1].imag() + row[k1].imag() * e1[k1].real();
      }
      acc += re * e2[k2].real() - im * e2[k2].imag();
    }
    out[p] = acc;
  }
  return out;
}

namespace testing {
void set_riesz_sign_mutation(bool on) { g_riesz_mutation.store(on); }
bool riesz_sign_mutation() { return g_riesz_mutation.load(); }
}  // namespace testing

}  // namespace spectral
}  // namespace muskat
