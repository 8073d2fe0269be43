#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "grushin/model.hpp"
#include "grushin/profile.hpp"
#include "grushin/scaling.hpp"
#include "grushin/sturm1d.hpp"

namespace grushin::testing {

/// J_ν(x) by its power series; fine for the moderate arguments used here.
double bessel_j_series(double nu, double x);

/// First positive zero of J_ν by a sign scan followed by bisection.
double first_bessel_zero(double nu);

/// Random symmetric tridiagonal matrix with entries in [-scale, scale].
TridiagonalOperator random_jacobi(std::mt19937_64& rng, std::size_t n, double scale = 10.0);

/// Shared (n=1, β=3) reference with 200 eigenpairs; computed once per process.
const ReferenceSpectrum& reference_n1_beta3();

/// Shared B profile on the default grid for the reference above.
const BoundaryProfile& profile_n1_beta3();

/// Relative difference |a/b − 1|.
inline double rel(double a, double b) { return std::abs(a / b - 1.0); }

}  // namespace grushin::testing
