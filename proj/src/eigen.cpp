#include "dfpi/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace dfpi {

namespace {

using std::abs;
using std::max;
using std::min;
using std::sqrt;

Complex cdiv(double xr, double xi, double yr, double yi) {
  if (abs(yr) > abs(yi)) {
    const double r = yi / yr, d = yr + r * yi;
    return {(xr + r * xi) / d, (xi - r * xr) / d};
  }
  const double r = yr / yi, d = yi + r * yr;
  return {(r * xr + xi) / d, (r * xi - xr) / d};
}

// Orthogonal reduction to upper Hessenberg form; v accumulates the transform.
void reduce_to_hessenberg(DenseMatrix& h, DenseMatrix& v) {
  const int n = static_cast<int>(h.rows());
  const int low = 0, high = n - 1;
  std::vector<double> ort(static_cast<std::size_t>(n), 0.0);
  auto H = [&](int i, int j) -> double& { return h(static_cast<std::size_t>(i), static_cast<std::size_t>(j)); };
  auto V = [&](int i, int j) -> double& { return v(static_cast<std::size_t>(i), static_cast<std::size_t>(j)); };
  auto O = [&](int i) -> double& { return ort[static_cast<std::size_t>(i)]; };

  for (int m = low + 1; m <= high - 1; ++m) {
    double scale = 0.0;
    for (int i = m; i <= high; ++i) scale += abs(H(i, m - 1));
    if (scale == 0.0) continue;
    double hh = 0.0;
    for (int i = high; i >= m; --i) {
      O(i) = H(i, m - 1) / scale;
      hh += O(i) * O(i);
    }
    double g = sqrt(hh);
    if (O(m) > 0) g = -g;
    hh -= O(m) * g;
    O(m) -= g;
    for (int j = m; j < n; ++j) {
      double f = 0.0;
      for (int i = high; i >= m; --i) f += O(i) * H(i, j);
      f /= hh;
      for (int i = m; i <= high; ++i) H(i, j) -= f * O(i);
    }
    for (int i = 0; i <= high; ++i) {
      double f = 0.0;
      for (int j = high; j >= m; --j) f += O(j) * H(i, j);
      f /= hh;
      for (int j = m; j <= high; ++j) H(i, j) -= f * O(j);
    }
    O(m) = scale * O(m);
    H(m, m - 1) = scale * g;
  }

  v = DenseMatrix::identity(static_cast<std::size_t>(n));
  for (int m = high - 1; m >= low + 1; --m) {
    if (H(m, m - 1) == 0.0) continue;
    for (int i = m + 1; i <= high; ++i) O(i) = H(i, m - 1);
    for (int j = m; j <= high; ++j) {
      double g = 0.0;
      for (int i = m; i <= high; ++i) g += O(i) * V(i, j);
      g = (g / O(m)) / H(m, m - 1);
      for (int i = m; i <= high; ++i) V(i, j) += g * O(i);
    }
  }
}

struct SchurResult {
  std::vector<double> re, im;
  std::vector<bool> converged;
  bool ok = true;
};

// Francis double-shift QR on the Hessenberg matrix h, accumulating into v.
// When vectors are wanted, h and v are turned into the eigenvector matrix
// (real/imaginary column pairs for complex eigenvalues).
SchurResult hessenberg_qr(DenseMatrix& h, DenseMatrix& v, bool want_vectors) {
  const int nn = static_cast<int>(h.rows());
  auto H = [&](int i, int j) -> double& { return h(static_cast<std::size_t>(i), static_cast<std::size_t>(j)); };
  auto V = [&](int i, int j) -> double& { return v(static_cast<std::size_t>(i), static_cast<std::size_t>(j)); };
  SchurResult res;
  res.re.assign(static_cast<std::size_t>(nn), 0.0);
  res.im.assign(static_cast<std::size_t>(nn), 0.0);
  res.converged.assign(static_cast<std::size_t>(nn), true);
  auto d = [&](int i) -> double& { return res.re[static_cast<std::size_t>(i)]; };
  auto e = [&](int i) -> double& { return res.im[static_cast<std::size_t>(i)]; };

  int n = nn - 1;
  const int low = 0, high = nn - 1;
  const double eps = std::numeric_limits<double>::epsilon();
  double exshift = 0.0;
  double p = 0, q = 0, r = 0, s = 0, z = 0, t, w, x, y;

  double norm = 0.0;
  for (int i = 0; i < nn; ++i)
    for (int j = max(i - 1, 0); j < nn; ++j) norm += abs(H(i, j));

  int iter = 0;
  const int max_iter_per_value = 60;
  while (n >= low) {
    int l = n;
    while (l > low) {
      s = abs(H(l - 1, l - 1)) + abs(H(l, l));
      if (s == 0.0) s = norm;
      if (abs(H(l, l - 1)) < eps * s) break;
      --l;
    }

    if (l == n) {
      H(n, n) = H(n, n) + exshift;
      d(n) = H(n, n);
      e(n) = 0.0;
      --n;
      iter = 0;
    } else if (l == n - 1) {
      w = H(n, n - 1) * H(n - 1, n);
      p = (H(n - 1, n - 1) - H(n, n)) / 2.0;
      q = p * p + w;
      z = sqrt(abs(q));
      H(n, n) = H(n, n) + exshift;
      H(n - 1, n - 1) = H(n - 1, n - 1) + exshift;
      x = H(n, n);
      if (q >= 0) {
        z = p >= 0 ? p + z : p - z;
        d(n - 1) = x + z;
        d(n) = d(n - 1);
        if (z != 0.0) d(n) = x - w / z;
        e(n - 1) = 0.0;
        e(n) = 0.0;
        x = H(n, n - 1);
        s = abs(x) + abs(z);
        p = x / s;
        q = z / s;
        r = sqrt(p * p + q * q);
        p /= r;
        q /= r;
        for (int j = n - 1; j < nn; ++j) {
          z = H(n - 1, j);
          H(n - 1, j) = q * z + p * H(n, j);
          H(n, j) = q * H(n, j) - p * z;
        }
        for (int i = 0; i <= n; ++i) {
          z = H(i, n - 1);
          H(i, n - 1) = q * z + p * H(i, n);
          H(i, n) = q * H(i, n) - p * z;
        }
        for (int i = low; i <= high; ++i) {
          z = V(i, n - 1);
          V(i, n - 1) = q * z + p * V(i, n);
          V(i, n) = q * V(i, n) - p * z;
        }
      } else {
        d(n - 1) = x + p;
        d(n) = x + p;
        e(n - 1) = z;
        e(n) = -z;
      }
      n -= 2;
      iter = 0;
    } else {
      x = H(n, n);
      y = 0.0;
      w = 0.0;
      if (l < n) {
        y = H(n - 1, n - 1);
        w = H(n, n - 1) * H(n - 1, n);
      }
      // Exceptional shifts.
      if (iter == 10) {
        exshift += x;
        for (int i = low; i <= n; ++i) H(i, i) -= x;
        s = abs(H(n, n - 1)) + abs(H(n - 1, n - 2));
        x = y = 0.75 * s;
        w = -0.4375 * s * s;
      }
      if (iter == 30) {
        s = (y - x) / 2.0;
        s = s * s + w;
        if (s > 0) {
          s = sqrt(s);
          if (y < x) s = -s;
          s = x - w / ((y - x) / 2.0 + s);
          for (int i = low; i <= n; ++i) H(i, i) -= s;
          exshift += s;
          x = y = w = 0.964;
        }
      }
      ++iter;
      if (iter > max_iter_per_value) {
        // Give up: report the remaining diagonal as unconverged estimates.
        for (int i = low; i <= n; ++i) {
          d(i) = H(i, i) + exshift;
          e(i) = 0.0;
          res.converged[static_cast<std::size_t>(i)] = false;
        }
        res.ok = false;
        return res;
      }

      int m = n - 2;
      while (m >= l) {
        z = H(m, m);
        r = x - z;
        s = y - z;
        p = (r * s - w) / H(m + 1, m) + H(m, m + 1);
        q = H(m + 1, m + 1) - z - r - s;
        r = H(m + 2, m + 1);
        s = abs(p) + abs(q) + abs(r);
        p /= s;
        q /= s;
        r /= s;
        if (m == l) break;
        if (abs(H(m, m - 1)) * (abs(q) + abs(r)) <
            eps * (abs(p) * (abs(H(m - 1, m - 1)) + abs(z) + abs(H(m + 1, m + 1)))))
          break;
        --m;
      }
      for (int i = m + 2; i <= n; ++i) {
        H(i, i - 2) = 0.0;
        if (i > m + 2) H(i, i - 3) = 0.0;
      }

      for (int k = m; k <= n - 1; ++k) {
        const bool notlast = (k != n - 1);
        if (k != m) {
          p = H(k, k - 1);
          q = H(k + 1, k - 1);
          r = notlast ? H(k + 2, k - 1) : 0.0;
          x = abs(p) + abs(q) + abs(r);
          if (x == 0.0) continue;
          p /= x;
          q /= x;
          r /= x;
        }
        s = sqrt(p * p + q * q + r * r);
        if (p < 0) s = -s;
        if (s != 0) {
          if (k != m)
            H(k, k - 1) = -s * x;
          else if (l != m)
            H(k, k - 1) = -H(k, k - 1);
          p += s;
          x = p / s;
          y = q / s;
          z = r / s;
          q /= p;
          r /= p;
          for (int j = k; j < nn; ++j) {
            p = H(k, j) + q * H(k + 1, j);
            if (notlast) {
              p += r * H(k + 2, j);
              H(k + 2, j) -= p * z;
            }
            H(k, j) -= p * x;
            H(k + 1, j) -= p * y;
          }
          for (int i = 0; i <= min(n, k + 3); ++i) {
            p = x * H(i, k) + y * H(i, k + 1);
            if (notlast) {
              p += z * H(i, k + 2);
              H(i, k + 2) -= p * r;
            }
            H(i, k) -= p;
            H(i, k + 1) -= p * q;
          }
          for (int i = low; i <= high; ++i) {
            p = x * V(i, k) + y * V(i, k + 1);
            if (notlast) {
              p += z * V(i, k + 2);
              V(i, k + 2) -= p * r;
            }
            V(i, k) -= p;
            V(i, k + 1) -= p * q;
          }
        }
      }
    }
  }

  if (!want_vectors || norm == 0.0) return res;

  // Back-substitution for the eigenvectors of the quasi-triangular form.
  for (n = nn - 1; n >= 0; --n) {
    p = d(n);
    q = e(n);
    if (q == 0) {
      int l = n;
      H(n, n) = 1.0;
      for (int i = n - 1; i >= 0; --i) {
        w = H(i, i) - p;
        r = 0.0;
        for (int j = l; j <= n; ++j) r += H(i, j) * H(j, n);
        if (e(i) < 0.0) {
          z = w;
          s = r;
        } else {
          l = i;
          if (e(i) == 0.0) {
            H(i, n) = w != 0.0 ? -r / w : -r / (eps * norm);
          } else {
            x = H(i, i + 1);
            y = H(i + 1, i);
            q = (d(i) - p) * (d(i) - p) + e(i) * e(i);
            t = (x * s - z * r) / q;
            H(i, n) = t;
            H(i + 1, n) = abs(x) > abs(z) ? (-r - w * t) / x : (-s - y * t) / z;
          }
          t = abs(H(i, n));
          if ((eps * t) * t > 1)
            for (int j = i; j <= n; ++j) H(j, n) /= t;
        }
      }
    } else if (q < 0) {
      int l = n - 1;
      if (abs(H(n, n - 1)) > abs(H(n - 1, n))) {
        H(n - 1, n - 1) = q / H(n, n - 1);
        H(n - 1, n) = -(H(n, n) - p) / H(n, n - 1);
      } else {
        const Complex c = cdiv(0.0, -H(n - 1, n), H(n - 1, n - 1) - p, q);
        H(n - 1, n - 1) = c.real();
        H(n - 1, n) = c.imag();
      }
      H(n, n - 1) = 0.0;
      H(n, n) = 1.0;
      for (int i = n - 2; i >= 0; --i) {
        double ra = 0.0, sa = 0.0;
        for (int j = l; j <= n; ++j) {
          ra += H(i, j) * H(j, n - 1);
          sa += H(i, j) * H(j, n);
        }
        w = H(i, i) - p;
        if (e(i) < 0.0) {
          z = w;
          r = ra;
          s = sa;
        } else {
          l = i;
          if (e(i) == 0) {
            const Complex c = cdiv(-ra, -sa, w, q);
            H(i, n - 1) = c.real();
            H(i, n) = c.imag();
          } else {
            x = H(i, i + 1);
            y = H(i + 1, i);
            double vr = (d(i) - p) * (d(i) - p) + e(i) * e(i) - q * q;
            const double vi = (d(i) - p) * 2.0 * q;
            if (vr == 0.0 && vi == 0.0)
              vr = eps * norm * (abs(w) + abs(q) + abs(x) + abs(y) + abs(z));
            const Complex c = cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi);
            H(i, n - 1) = c.real();
            H(i, n) = c.imag();
            if (abs(x) > (abs(z) + abs(q))) {
              H(i + 1, n - 1) = (-ra - w * H(i, n - 1) + q * H(i, n)) / x;
              H(i + 1, n) = (-sa - w * H(i, n) - q * H(i, n - 1)) / x;
            } else {
              const Complex c2 = cdiv(-r - y * H(i, n - 1), -s - y * H(i, n), z, q);
              H(i + 1, n - 1) = c2.real();
              H(i + 1, n) = c2.imag();
            }
          }
          t = max(abs(H(i, n - 1)), abs(H(i, n)));
          if ((eps * t) * t > 1)
            for (int j = i; j <= n; ++j) {
              H(j, n - 1) /= t;
              H(j, n) /= t;
            }
        }
      }
    }
  }

  for (int j = nn - 1; j >= low; --j)
    for (int i = low; i <= high; ++i) {
      z = 0.0;
      for (int k = low; k <= min(j, high); ++k) z += V(i, k) * H(k, j);
      V(i, j) = z;
    }
  return res;
}

void normalize(ComplexVector& v) {
  double s = 0.0;
  for (const auto& c : v) s += std::norm(c);
  s = std::sqrt(s);
  if (s > 0.0)
    for (auto& c : v) c /= s;
}

}  // namespace

bool Eigendecomposition::all_converged() const {
  return std::all_of(converged.begin(), converged.end(), [](bool b) { return b; });
}

Eigendecomposition dense_eig(const DenseMatrix& a, bool want_vectors) {
  if (!a.square()) throw std::invalid_argument("dense_eig: matrix not square");
  if (a.rows() > dense_eig_max_dim)
    throw std::invalid_argument("dense_eig: dimension exceeds the dense eigensolver cap");
  if (!a.all_finite()) throw std::invalid_argument("dense_eig: non-finite entries");
  const std::size_t n = a.rows();
  Eigendecomposition out;
  if (n == 0) return out;

  DenseMatrix h = a;
  DenseMatrix v;
  reduce_to_hessenberg(h, v);
  const SchurResult schur = hessenberg_qr(h, v, want_vectors);

  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = {schur.re[i], schur.im[i]};
  out.converged = schur.converged;
  if (!want_vectors) return out;
  if (!schur.ok) {
    out.vectors.assign(n, ComplexVector(n, Complex{}));
    std::fill(out.converged.begin(), out.converged.end(), false);
    return out;
  }

  out.vectors.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    ComplexVector vec(n);
    if (schur.im[j] == 0.0) {
      for (std::size_t i = 0; i < n; ++i) vec[i] = v(i, j);
    } else if (schur.im[j] > 0.0) {
      for (std::size_t i = 0; i < n; ++i) vec[i] = {v(i, j), v(i, j + 1)};
    } else {
      for (std::size_t i = 0; i < n; ++i) vec[i] = {v(i, j - 1), -v(i, j)};
    }
    normalize(vec);
    out.vectors[j] = std::move(vec);
  }

  const double anorm = a.frobenius_norm();
  for (std::size_t j = 0; j < n; ++j) {
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex s = -out.values[j] * out.vectors[j][i];
      for (std::size_t k = 0; k < n; ++k) s += a(i, k) * out.vectors[j][k];
      res += std::norm(s);
    }
    if (std::sqrt(res) > eig_residual_tol * anorm) out.converged[j] = false;
  }
  return out;
}

Spectrum sorted_spectrum(Spectrum s) {
  std::sort(s.begin(), s.end(), [](const Complex& a, const Complex& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return s;
}

double spectral_radius(std::span<const Complex> s) {
  double r = 0.0;
  for (const auto& c : s) r = std::max(r, std::abs(c));
  return r;
}

double hausdorff_distance(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  auto directed = [](std::span<const Complex> x, std::span<const Complex> y) {
    double worst = 0.0;
    for (const auto& p : x) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : y) best = std::min(best, std::abs(p - q));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

namespace {

// Greedy closest-pair-first matching; returns (pairs as (ia, ib, dist)).
std::vector<std::tuple<std::size_t, std::size_t, double>> greedy_pairs(std::span<const Complex> a,
                                                                       std::span<const Complex> b) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> all;
  all.reserve(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) all.emplace_back(std::abs(a[i] - b[j]), i, j);
  std::sort(all.begin(), all.end());
  std::vector<bool> used_a(a.size(), false), used_b(b.size(), false);
  std::vector<std::tuple<std::size_t, std::size_t, double>> pairs;
  for (const auto& [dist, i, j] : all) {
    if (used_a[i] || used_b[j]) continue;
    used_a[i] = used_b[j] = true;
    pairs.emplace_back(i, j, dist);
    if (pairs.size() == std::min(a.size(), b.size())) break;
  }
  return pairs;
}

}  // namespace

double matching_distance(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& pr : greedy_pairs(a, b)) worst = std::max(worst, std::get<2>(pr));
  return worst;
}

Spectrum remove_matched(std::span<const Complex> from, std::span<const Complex> remove) {
  std::vector<bool> drop(from.size(), false);
  for (const auto& pr : greedy_pairs(remove, from)) drop[std::get<1>(pr)] = true;
  Spectrum rest;
  for (std::size_t i = 0; i < from.size(); ++i)
    if (!drop[i]) rest.push_back(from[i]);
  return rest;
}

}  // namespace dfpi
