#include "dfpi/vector_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dfpi/kernels.hpp"

namespace dfpi {

double dot(std::span<const double> x, std::span<const double> y) {
  require_same_size(x.size(), y.size(), "dot");
  return kernels::dot(x, y);
}

double norm2(std::span<const double> x) { return kernels::norm2(x); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), y.size(), "axpy");
  kernels::axpy(alpha, x, y);
}

Vector add(std::span<const double> x, std::span<const double> y) {
  require_same_size(x.size(), y.size(), "add");
  Vector out(y.begin(), y.end());
  kernels::axpy(1.0, x, out);
  return out;
}

Vector subtract(std::span<const double> x, std::span<const double> y) {
  require_same_size(x.size(), y.size(), "subtract");
  Vector out(x.begin(), x.end());
  kernels::axpy(-1.0, y, out);
  return out;
}

Vector scaled(double alpha, std::span<const double> x) {
  Vector out(x.begin(), x.end());
  kernels::scale(alpha, out);
  return out;
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
}

}  // namespace dfpi
