// Independent reference implementations used only by tests.
#pragma once

#include "budgetmix/core.hpp"
#include "budgetmix/topology.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

using budgetmix::Matrix;
using budgetmix::Vector;

/// Cyclic Jacobi rotations until the off-diagonal mass vanishes; ascending.
inline std::vector<double> jacobi_eigenvalues(Matrix a) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) ev[static_cast<std::size_t>(k)] = a(k, k);
  std::sort(ev.begin(), ev.end());
  return ev;
}

inline double jacobi_norm(const Matrix& a) {
  const auto ev = jacobi_eigenvalues(a);
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

/// Metropolis weights written out from the definition, entry by entry.
inline Matrix metropolis_reference(const budgetmix::Topology& t, unsigned mask) {
  const int m = t.size();
  auto in = [&](int i) { return ((mask >> i) & 1u) != 0; };
  auto active_degree = [&](int i) {
    int d = 1;
    for (int j : t.neighbors(i)) d += in(j) ? 1 : 0;
    return d;
  };
  Matrix w = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    if (!in(i)) continue;
    for (int j : t.neighbors(i))
      if (in(j)) w(i, j) = 1.0 / std::max(active_degree(i), active_degree(j));
  }
  for (int i = 0; i < m; ++i) w(i, i) = 1.0 - (w.row(i).sum() - w(i, i));
  return w;
}

/// ρ of the broadcast design by enumerating all 2^m activation sets.
inline double broadcast_rho_enumerated(const budgetmix::Topology& t, const Vector& omega) {
  const int m = t.size();
  Matrix second = Matrix::Zero(m, m);
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    double pr = 1;
    for (int i = 0; i < m; ++i) pr *= ((mask >> i) & 1u) ? omega(i) : 1.0 - omega(i);
    const Matrix w = metropolis_reference(t, mask);
    second += pr * w.transpose() * w;
  }
  return jacobi_norm(second - Matrix::Constant(m, m, 1.0 / m));
}

/// π_j as the truncated series Σ_n Π_{k=j}^{j+n−1} (1 − p_k/2), p_k from `p_of`.
template <class F>
double pi_series(F p_of, long j, long terms) {
  double total = 0, prod = 1;
  for (long n = 0; n < terms; ++n) {
    total += prod;
    prod *= 1.0 - p_of(j + n) / 2.0;
  }
  return total;
}

}  // namespace oracle
