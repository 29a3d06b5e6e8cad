#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "momlab/rng.hpp"

namespace momlab {

using Vector = std::vector<double>;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Vector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline void require_finite(const Vector& v, const char* what) {
  if (!all_finite(v)) throw ValidationError(std::string(what) + ": non-finite entry");
}

// All reductions use a fixed sequential summation order so repeated runs are
// bitwise identical.
inline double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ValidationError("dot: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm_sq(const Vector& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

inline double norm(const Vector& v) { return std::sqrt(norm_sq(v)); }

inline void scale_inplace(Vector& v, double s) {
  for (double& x : v) x *= s;
}

// y += s * x
inline void add_scaled(Vector& y, double s, const Vector& x) {
  if (y.size() != x.size()) throw ValidationError("add_scaled: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

// Dense symmetric matrix. Full storage; symmetry enforced on construction and
// by set().
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(int order) : n_(order), a_(static_cast<std::size_t>(order) * order, 0.0) {
    if (order <= 0) throw ValidationError("SymMatrix: order must be positive");
  }

  static SymMatrix diag(const Vector& d) {
    SymMatrix m(static_cast<int>(d.size()));
    for (int i = 0; i < m.n_; ++i) m.a_[static_cast<std::size_t>(i) * m.n_ + i] = d[i];
    require_finite(d, "SymMatrix::diag");
    return m;
  }

  // Builds from a full row-major dense buffer, averaging the two triangles.
  static SymMatrix from_dense(int order, const Vector& entries) {
    if (order <= 0) throw ValidationError("SymMatrix: order must be positive");
    if (entries.size() != static_cast<std::size_t>(order) * order)
      throw ValidationError("SymMatrix::from_dense: size mismatch");
    require_finite(entries, "SymMatrix::from_dense");
    SymMatrix m(order);
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j) {
        const double v = 0.5 * (entries[static_cast<std::size_t>(i) * order + j] +
                                entries[static_cast<std::size_t>(j) * order + i]);
        m.a_[static_cast<std::size_t>(i) * order + j] = v;
      }
    return m;
  }

  int order() const { return n_; }

  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

  void set(int i, int j, double v) {
    if (!std::isfinite(v)) throw ValidationError("SymMatrix::set: non-finite value");
    a_[static_cast<std::size_t>(i) * n_ + j] = v;
    a_[static_cast<std::size_t>(j) * n_ + i] = v;
  }

  const Vector& data() const { return a_; }

  double max_abs() const {
    double m = 0.0;
    for (double x : a_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  int n_ = 0;
  Vector a_;
};

inline Vector matvec(const SymMatrix& A, const Vector& x) {
  const int n = A.order();
  if (static_cast<int>(x.size()) != n) throw ValidationError("matvec: dimension mismatch");
  Vector y(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += A(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

// Eigen-structure of a symmetric matrix: descending eigenvalues, orthonormal
// eigenvectors, and the multiplicities of the extreme eigenvalues. The top
// eigenspace (span of the first top_multiplicity eigenvectors) is the target
// set of the alignment predicates.
struct Spectrum {
  Vector eigenvalues;           // descending
  std::vector<double> vectors;  // row-major n x n, column j = eigenvector j
  int top_multiplicity = 0;
  int bottom_multiplicity = 0;

  int order() const { return static_cast<int>(eigenvalues.size()); }
  double lambda_max() const { return eigenvalues.front(); }
  double lambda_min() const { return eigenvalues.back(); }

  Vector eigenvector(int j) const {
    const int n = order();
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = vectors[static_cast<std::size_t>(i) * n + j];
    return v;
  }
};

// Angle in radians between a nonzero vector and the top eigenspace. Uses the
// projection norm, so degenerate top eigenvalues (multiplicity > 1) are
// handled as a subspace, not a single direction.
inline double top_subspace_angle(const Spectrum& s, const Vector& v) {
  const int n = s.order();
  if (static_cast<int>(v.size()) != n)
    throw ValidationError("top_subspace_angle: dimension mismatch");
  const double nv = norm(v);
  if (nv == 0.0) throw ValidationError("top_subspace_angle: zero vector");
  double proj_sq = 0.0;
  for (int j = 0; j < s.top_multiplicity; ++j) {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += s.vectors[static_cast<std::size_t>(i) * n + j] * v[i];
    proj_sq += c * c;
  }
  const double cosine = std::min(1.0, std::sqrt(proj_sq) / nv);
  return std::acos(cosine);
}

struct EigenOptions {
  double off_diag_tol = 1e-14;     // relative to the Frobenius norm of A
  int max_sweeps = 60;
  double multiplicity_tol = 1e-9;  // relative to the eigenvalue scale
};

// Symmetric eigendecomposition via cyclic Jacobi rotations. Deterministic
// (fixed sweep order) and dependency-free; fine for dense orders up to a few
// thousand.
inline Spectrum sym_eigen(const SymMatrix& A, const EigenOptions& opts = {}) {
  const int n = A.order();
  require_finite(A.data(), "sym_eigen");

  std::vector<double> B(A.data());
  std::vector<double> V(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) V[static_cast<std::size_t>(i) * n + i] = 1.0;
  auto b = [&](int i, int j) -> double& { return B[static_cast<std::size_t>(i) * n + j]; };

  double frob = 0.0;
  for (double x : B) frob += x * x;
  frob = std::sqrt(frob);
  const double stop = opts.off_diag_tol * std::max(frob, 1e-300);

  auto off_norm = [&]() {
    double s = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) s += b(p, q) * b(p, q);
    return std::sqrt(2.0 * s);
  };

  int sweep = 0;
  double off = off_norm();
  while (off > stop) {
    if (sweep++ >= opts.max_sweeps)
      throw ConvergenceError("sym_eigen: sweep cap exceeded, off-diagonal residual " +
                             std::to_string(off));
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = b(p, q);
        if (apq == 0.0) continue;
        const double theta = (b(q, q) - b(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        const double app = b(p, p), aqq = b(q, q);
        b(p, p) = app - t * apq;
        b(q, q) = aqq + t * apq;
        b(p, q) = 0.0;
        b(q, p) = 0.0;
        for (int r = 0; r < n; ++r) {
          if (r != p && r != q) {
            const double arp = b(r, p), arq = b(r, q);
            b(r, p) = arp - s * (arq + tau * arp);
            b(p, r) = b(r, p);
            b(r, q) = arq + s * (arp - tau * arq);
            b(q, r) = b(r, q);
          }
          const double vrp = V[static_cast<std::size_t>(r) * n + p];
          const double vrq = V[static_cast<std::size_t>(r) * n + q];
          V[static_cast<std::size_t>(r) * n + p] = vrp - s * (vrq + tau * vrp);
          V[static_cast<std::size_t>(r) * n + q] = vrq + s * (vrp - tau * vrq);
        }
      }
    }
    off = off_norm();
  }

  // Sort descending; stable on ties so the output is deterministic.
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int i, int j) { return b(i, i) > b(j, j); });

  Spectrum out;
  out.eigenvalues.resize(n);
  out.vectors.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j) {
    out.eigenvalues[j] = b(idx[j], idx[j]);
    for (int i = 0; i < n; ++i)
      out.vectors[static_cast<std::size_t>(i) * n + j] = V[static_cast<std::size_t>(i) * n + idx[j]];
  }

  const double scale =
      std::max({std::abs(out.eigenvalues.front()), std::abs(out.eigenvalues.back()), 1e-300});
  const double tol = opts.multiplicity_tol * scale;
  out.top_multiplicity = 0;
  while (out.top_multiplicity < n &&
         out.eigenvalues.front() - out.eigenvalues[out.top_multiplicity] <= tol)
    ++out.top_multiplicity;
  out.bottom_multiplicity = 0;
  while (out.bottom_multiplicity < n &&
         out.eigenvalues[n - 1 - out.bottom_multiplicity] - out.eigenvalues.back() <= tol)
    ++out.bottom_multiplicity;
  return out;
}

using LinearOp = std::function<Vector(const Vector&)>;

struct PowerResult {
  double value = 0.0;
  Vector vector;
  bool converged = false;
  int iterations = 0;
};

// Power iteration for the largest-|lambda| eigenvalue of a symmetric operator.
// Starts from a seeded unit-norm random vector; the caller shifts the operator
// when the most negative eigenvalue may dominate in magnitude.
inline PowerResult power_iteration(const LinearOp& apply, int dim, double tol, int max_iter,
                                   std::uint64_t seed) {
  if (dim < 1) throw ValidationError("power_iteration: dim must be >= 1");
  Rng rng(mix_seed(seed, 0x70776974ULL));
  Vector v(dim);
  double nv = 0.0;
  do {
    for (double& x : v) x = rng.normal();
    nv = norm(v);
  } while (nv == 0.0);
  scale_inplace(v, 1.0 / nv);

  PowerResult res;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < max_iter; ++k) {
    Vector w = apply(v);
    if (static_cast<int>(w.size()) != dim)
      throw ValidationError("power_iteration: operator changed dimension");
    const double est = dot(v, w);  // Rayleigh quotient (v is unit norm)
    const double nw = norm(w);
    res.value = est;
    res.iterations = k + 1;
    if (nw == 0.0) {  // v is in the kernel; 0 is an exact eigenvalue for it
      res.vector = v;
      res.converged = true;
      return res;
    }
    v = std::move(w);
    scale_inplace(v, 1.0 / nw);
    if (std::abs(est - prev) <= tol * (1.0 + std::abs(est))) {
      res.vector = v;
      res.converged = true;
      return res;
    }
    prev = est;
  }
  res.vector = v;
  res.converged = false;
  return res;
}

inline LinearOp matrix_op(const SymMatrix& A) {
  return [&A](const Vector& x) { return matvec(A, x); };
}

}  // namespace momlab
