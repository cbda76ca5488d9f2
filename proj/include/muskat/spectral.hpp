#pragma once

#include <complex>
#include <span>
#include <vector>

#include "muskat/grid.hpp"

namespace muskat::spectral {

// Fourier multiplier operators on periodic fields over the parameter box.
// Forward transform uses e^{-i xi.alpha}; d/dalpha_j has multiplier i xi_j.
// The zero mode of every singular multiplier (R_j, Lambda, grad Delta^{-1})
// maps to 0, and the Nyquist mode of odd multipliers is zeroed.

ScalarField derivative(const ScalarField& f, int axis);              // axis in {1, 2}
ScalarField second_derivative(const ScalarField& f, int a, int b);
ScalarField riesz(const ScalarField& f, int axis);                   // -i xi_j / |xi|
ScalarField lambda_op(const ScalarField& f);                         // |xi|
ScalarField inv_lap_grad(const ScalarField& f, int axis);            // -i xi_j / |xi|^2
ScalarField laplacian(const ScalarField& f);
// Applies the multiplier 1/|xi|^2 (zero mode to 0), i.e. -Delta^{-1}.
ScalarField inv_neg_laplacian(const ScalarField& f);

VecField3 derivative(const VecField3& f, int axis);

// Half-spectrum (r2c layout: n rows in xi_2, n/2+1 columns in xi_1).
using Spectrum = std::vector<std::complex<double>>;
Spectrum forward(const ScalarField& f);
ScalarField inverse(const ParamGrid& g, Spectrum s);

// Trigonometric interpolant of f evaluated at arbitrary parameter points
// (periodic in both coordinates). Points are given as (a1, a2) pairs.
std::vector<double> interpolate(const ScalarField& f, std::span<const double> a1,
                                std::span<const double> a2);

namespace testing {
// Flips the sign convention of the Riesz multiplier. Only for negative-control
// tests of the validation harness.
void set_riesz_sign_mutation(bool on);
bool riesz_sign_mutation();
}  // namespace testing

}  // namespace muskat::spectral
