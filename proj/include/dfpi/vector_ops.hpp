#pragma once

#include <span>

#include "dfpi/dense_matrix.hpp"

namespace dfpi {

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
/// y += alpha x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

Vector add(std::span<const double> x, std::span<const double> y);
Vector subtract(std::span<const double> x, std::span<const double> y);
Vector scaled(double alpha, std::span<const double> x);

bool all_finite(std::span<const double> x);

/// Throws std::invalid_argument naming `what` when sizes differ.
void require_same_size(std::size_t a, std::size_t b, const char* what);

}  // namespace dfpi
