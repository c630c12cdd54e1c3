// SPDX-License-Identifier: Apache-2.0
//
// Truncated Taylor coefficient algebras used to propagate input derivatives
// through the networks. A value carries the coefficients of a polynomial in
// one spatial direction s and/or the time direction t, truncated to exactly
// the monomials the loss needs:
//
//   Tay7  : 1, s, s^2, t, s*t, s^2*t, t^2   (interior points: u_t, u_tt,
//           d^2/ds^2 and the mixed d^3/(ds^2 dt) term)
//   Tay3s : 1, s, s^2                        (spatial-only: Laplacian terms)
//   Tay3t : 1, t, t^2                        (boundary points: u_t, u_tt)
//
// Multiplication is the polynomial product modulo the dropped monomials
// (a monomial ideal, so the quotient is a well-defined algebra and the
// retained coefficients equal the analytic derivatives). Coefficient update
// order is fixed so results are bitwise reproducible.

#pragma once

#include <array>
#include <cmath>
#include <type_traits>

namespace invpot::taylor {

struct Tay7 {
  // index: 0:1  1:s  2:s^2  3:t  4:st  5:s^2 t  6:t^2
  static constexpr int kSize = 7;
  static constexpr int kNilpotency = 3;  // w^4 == 0 for w with no constant part
  std::array<double, 7> c{};
};

struct Tay3s {
  static constexpr int kSize = 3;
  static constexpr int kNilpotency = 2;
  std::array<double, 3> c{};  // 1, s, s^2
};

struct Tay3t {
  static constexpr int kSize = 3;
  static constexpr int kNilpotency = 2;
  std::array<double, 3> c{};  // 1, t, t^2
};

template <class P>
inline P constant(double v) {
  if constexpr (std::is_same_v<P, double>) {
    return v;
  } else {
    P p{};
    p.c[0] = v;
    return p;
  }
}

// ---- multiplication -------------------------------------------------------

inline Tay7 mul(const Tay7& a, const Tay7& b) {
  const auto& x = a.c;
  const auto& y = b.c;
  Tay7 r;
  r.c[0] = x[0] * y[0];
  r.c[1] = x[0] * y[1] + x[1] * y[0];
  r.c[2] = x[0] * y[2] + x[1] * y[1] + x[2] * y[0];
  r.c[3] = x[0] * y[3] + x[3] * y[0];
  r.c[4] = x[0] * y[4] + x[1] * y[3] + x[3] * y[1] + x[4] * y[0];
  r.c[5] = x[0] * y[5] + x[1] * y[4] + x[2] * y[3] + x[3] * y[2] + x[4] * y[1] + x[5] * y[0];
  r.c[6] = x[0] * y[6] + x[3] * y[3] + x[6] * y[0];
  return r;
}

template <class P3>
inline P3 mul3(const P3& a, const P3& b) {
  const auto& x = a.c;
  const auto& y = b.c;
  P3 r;
  r.c[0] = x[0] * y[0];
  r.c[1] = x[0] * y[1] + x[1] * y[0];
  r.c[2] = x[0] * y[2] + x[1] * y[1] + x[2] * y[0];
  return r;
}
inline Tay3s mul(const Tay3s& a, const Tay3s& b) { return mul3(a, b); }
inline Tay3t mul(const Tay3t& a, const Tay3t& b) { return mul3(a, b); }

// Transpose of the multiplication-by-b map: accumulates into abar the
// adjoint contribution of cbar through c = a*b.
inline void mul_adjoint(Tay7& abar, const Tay7& cbar, const Tay7& b) {
  const auto& cb = cbar.c;
  const auto& y = b.c;
  abar.c[0] += cb[0] * y[0] + cb[1] * y[1] + cb[2] * y[2] + cb[3] * y[3] + cb[4] * y[4] +
               cb[5] * y[5] + cb[6] * y[6];
  abar.c[1] += cb[1] * y[0] + cb[2] * y[1] + cb[4] * y[3] + cb[5] * y[4];
  abar.c[2] += cb[2] * y[0] + cb[5] * y[3];
  abar.c[3] += cb[3] * y[0] + cb[4] * y[1] + cb[5] * y[2] + cb[6] * y[3];
  abar.c[4] += cb[4] * y[0] + cb[5] * y[1];
  abar.c[5] += cb[5] * y[0];
  abar.c[6] += cb[6] * y[0];
}

template <class P3>
inline void mul_adjoint3(P3& abar, const P3& cbar, const P3& b) {
  const auto& cb = cbar.c;
  const auto& y = b.c;
  abar.c[0] += cb[0] * y[0] + cb[1] * y[1] + cb[2] * y[2];
  abar.c[1] += cb[1] * y[0] + cb[2] * y[1];
  abar.c[2] += cb[2] * y[0];
}
inline void mul_adjoint(Tay3s& abar, const Tay3s& cbar, const Tay3s& b) { mul_adjoint3(abar, cbar, b); }
inline void mul_adjoint(Tay3t& abar, const Tay3t& cbar, const Tay3t& b) { mul_adjoint3(abar, cbar, b); }

// ---- elementwise helpers --------------------------------------------------

template <class P>
inline void axpy(P& y, double a, const P& x) {
  for (int i = 0; i < P::kSize; ++i) y.c[i] += a * x.c[i];
}

template <class P>
inline double dot(const P& a, const P& b) {
  double s = 0.0;
  for (int i = 0; i < P::kSize; ++i) s += a.c[i] * b.c[i];
  return s;
}

// ---- tanh and its derivative in the algebra -------------------------------

// First five derivatives of tanh expressed through y = tanh(x).
struct TanhDerivs {
  double s0, s1, s2, s3, s4;
};
inline TanhDerivs tanh_derivs(double x) {
  const double y = std::tanh(x);
  const double y1 = 1.0 - y * y;
  const double y2 = -2.0 * y * y1;
  const double y3 = -2.0 * y1 * y1 - 2.0 * y * y2;
  const double y4 = -6.0 * y1 * y2 - 2.0 * y * y3;
  return {y, y1, y2, y3, y4};
}

// sigma(p) = s0 + s1 w + s2/2 w^2 + s3/6 w^3, w = p - p0 (nilpotent part).
template <class P>
inline P tanh_poly(const P& p) {
  const TanhDerivs d = tanh_derivs(p.c[0]);
  P w = p;
  w.c[0] = 0.0;
  const P w2 = mul(w, w);
  P r = constant<P>(d.s0);
  axpy(r, d.s1, w);
  axpy(r, 0.5 * d.s2, w2);
  if constexpr (P::kNilpotency >= 3) {
    const P w3 = mul(w2, w);
    axpy(r, d.s3 / 6.0, w3);
  }
  return r;
}

// sigma'(p) in the algebra, needed by the reverse pass.
template <class P>
inline P tanh_prime_poly(const P& p) {
  const TanhDerivs d = tanh_derivs(p.c[0]);
  P w = p;
  w.c[0] = 0.0;
  const P w2 = mul(w, w);
  P r = constant<P>(d.s1);
  axpy(r, d.s2, w);
  axpy(r, 0.5 * d.s3, w2);
  if constexpr (P::kNilpotency >= 3) {
    const P w3 = mul(w2, w);
    axpy(r, d.s4 / 6.0, w3);
  }
  return r;
}

// ---- scalar (plain double) instantiation ----------------------------------
// forward_pass<double> evaluates the network itself; the operations below
// make the template read identically for the degenerate one-coefficient case.

struct ScalarOps {
  static constexpr int kSize = 1;
};

inline double mul(double a, double b) { return a * b; }
inline void mul_adjoint(double& abar, double cbar, double b) { abar += cbar * b; }
inline void axpy(double& y, double a, double x) { y += a * x; }
inline double dot(double a, double b) { return a * b; }
inline double tanh_poly(double x) { return std::tanh(x); }
inline double tanh_prime_poly(double x) {
  const double y = std::tanh(x);
  return 1.0 - y * y;
}

template <class P>
inline double value_of(const P& p) {
  return p.c[0];
}
inline double value_of(double p) { return p; }

template <class P>
inline void add_to_constant(P& p, double v) {
  p.c[0] += v;
}
inline void add_to_constant(double& p, double v) { p += v; }

}  // namespace invpot::taylor
