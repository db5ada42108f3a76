#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace csm {

// Exact arithmetic currency for the polytope solver and for kernels that
// were built from exact data (constructors, decimal literals in files).
using Rational = mpq_class;

// Every double is an exact binary rational; this conversion is lossless.
Rational rational_from_double(double x);

// Parses a decimal literal ("0.25", "-3", "1e-3") into the exact rational
// it denotes, independent of binary rounding.
Rational rational_from_decimal(const std::string& text);

double to_double(const Rational& q);

std::string to_string(const Rational& q);

std::vector<Rational> rationalize(const std::vector<double>& v);

}  // namespace csm
