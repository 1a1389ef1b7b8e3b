// Copyright 2026 The rdl Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rdl/fpcore.hpp"

#include <mpfr.h>

#include <cassert>
#include <cmath>
#include <cstdint>
#include <cstring>

// Implementation notes.
//
// The transcendental fast path evaluates in binary64 using fixed
// constants checked in below; it never calls the platform math library
// (std::fma / std::sqrt / std::copysign are IEEE-754 operations with a
// single bit-exact answer, not library approximations). The total
// relative error of each binary64 kernel is well below 2^-38; when the
// kernel result lies within that bound of a binary32 rounding boundary,
// the input is re-evaluated through the MPFR interval path, which
// escalates precision until the rounding is decided.
//
// The build must keep IEEE semantics on this translation unit:
// no -ffast-math, -ffp-contract=off, FLT_EVAL_METHOD == 0.

namespace rdl::fpcore {
namespace {

constexpr double kFastPathRelErr = 0x1p-38;

inline std::uint32_t f2u(float x) { return std::bit_cast<std::uint32_t>(x); }
inline std::uint64_t d2u(double x) { return std::bit_cast<std::uint64_t>(x); }
inline double u2d(std::uint64_t u) { return std::bit_cast<double>(u); }

// Exact power-of-two double, k in [-1022, 1023].
inline double pow2d(long k) {
  return u2d(static_cast<std::uint64_t>(1023 + k) << 52);
}

// ---------------------------------------------------------------------------
// Polynomial kernels (binary64, fixed literals).
// ---------------------------------------------------------------------------

// Cody-Waite split of ln 2: LN2_HI carries 33 significant bits so that
// k * LN2_HI is exact for |k| <= 2^19.
constexpr double kLog2E = 0x1.71547652b82fep+0;
constexpr double kLn2Hi = 0x1.62e42fee00000p-1;
constexpr double kLn2Lo = 0x1.a39ef35793c76p-33;

// 1/k! for k = 2..13.
constexpr double kExpC[12] = {
    0x1.0000000000000p-1, 0x1.5555555555555p-3, 0x1.5555555555555p-5,
    0x1.1111111111111p-7, 0x1.6c16c16c16c17p-10, 0x1.a01a01a01a01ap-13,
    0x1.a01a01a01a01ap-16, 0x1.71de3a556c734p-19, 0x1.27e4fb7789f5cp-22,
    0x1.ae64567f544e4p-26, 0x1.1eed8eff8d898p-29, 0x1.6124613a86d09p-33,
};

inline long round_to_long(double z) {
  return static_cast<long>(z + (z >= 0.0 ? 0.5 : -0.5));
}

// exp(x) for x in [-106, 90]; relative error < 2^-49.
double exp_kernel(double x) {
  const long k = round_to_long(x * kLog2E);
  const double kd = static_cast<double>(k);
  double r = x - kd * kLn2Hi;  // exact (Sterbenz; kd * kLn2Hi is exact)
  r = std::fma(-kd, kLn2Lo, r);
  double p = kExpC[11];
  for (int i = 10; i >= 0; --i) p = std::fma(p, r, kExpC[i]);
  const double y = std::fma(r * r, p, r) + 1.0;
  return y * pow2d(k);
}

// expm1(y) for y in [-0.36, 0]; relative error < 2^-50.
double expm1_small(double y) {
  double p = kExpC[11];
  for (int i = 10; i >= 0; --i) p = std::fma(p, y, kExpC[i]);
  return std::fma(y * y, p, y);
}

// 1/(2k+1) for k = 1..9: atanh series for log((1+s)/(1-s)).
constexpr double kLogC[9] = {
    0x1.5555555555555p-2, 0x1.999999999999ap-3, 0x1.2492492492492p-3,
    0x1.c71c71c71c71cp-4, 0x1.745d1745d1746p-4, 0x1.3b13b13b13b14p-4,
    0x1.1111111111111p-4, 0x1.e1e1e1e1e1e1ep-5, 0x1.af286bca1af28p-5,
};

constexpr double kSqrt2D = 0x1.6a09e667f3bcdp+0;

// log(x) for positive finite x; relative error < 2^-48.
double log_kernel(double x) {
  const std::uint64_t b = d2u(x);
  long ke = static_cast<long>(b >> 52) - 1023;
  double m = u2d((b & 0x000FFFFFFFFFFFFFull) | (1023ull << 52));  // [1, 2)
  if (m >= kSqrt2D) {
    m *= 0.5;
    ke += 1;
  }
  const double f = m - 1.0;        // exact, m in [sqrt2/2, sqrt2)
  const double s = f / (2.0 + f);  // |s| <= 0.1716
  const double z = s * s;
  double q = kLogC[8];
  for (int i = 7; i >= 0; --i) q = std::fma(q, z, kLogC[i]);
  const double s2 = 2.0 * s;
  const double logm = std::fma(s2 * z, q, s2);
  const double kd = static_cast<double>(ke);
  return std::fma(kd, kLn2Hi, logm + kd * kLn2Lo);
}

// (-1)^k/(2k+1)! for k = 1..7 and (-1)^k/(2k)! for k = 1..8.
constexpr double kSinC[7] = {
    -0x1.5555555555555p-3, 0x1.1111111111111p-7,  -0x1.a01a01a01a01ap-13,
    0x1.71de3a556c734p-19, -0x1.ae64567f544e4p-26, 0x1.6124613a86d09p-33,
    -0x1.ae7f3e733b81fp-41,
};
constexpr double kCosC[8] = {
    -0x1.0000000000000p-1, 0x1.5555555555555p-5,  -0x1.6c16c16c16c17p-10,
    0x1.a01a01a01a01ap-16, -0x1.27e4fb7789f5cp-22, 0x1.1eed8eff8d898p-29,
    -0x1.93974a8c07c9dp-37, 0x1.ae7f3e733b81fp-45,
};

// sin/cos of r_hi + r_lo with |r_hi| <= pi/4 + eps, |r_lo| <= ulp(r_hi).
double sin_poly(double rh, double rl) {
  const double v = rh * rh;
  double p = kSinC[6];
  for (int i = 5; i >= 0; --i) p = std::fma(p, v, kSinC[i]);
  return std::fma(rh * v, p, rh) + rl;
}

double cos_poly(double rh, double rl) {
  const double v = rh * rh;
  double p = kCosC[7];
  for (int i = 6; i >= 0; --i) p = std::fma(p, v, kCosC[i]);
  return std::fma(v, p, 1.0) - rh * rl;
}

// ---------------------------------------------------------------------------
// Argument reduction mod pi/2 (integer Payne-Hanek over the float32 range).
// ---------------------------------------------------------------------------

// 2/pi as a binary fraction: bit i of the table (MSB of word 0 first) has
// weight 2^-(1+i). 448 bits cover every float32 exponent with margin.
constexpr std::uint64_t kTwoOverPi[7] = {
    0xA2F9836E4E441529ull, 0xFC2757D1F534DDC0ull, 0xDB6295993C439041ull,
    0xFE5163ABDEBBC561ull, 0xB7246E3A424DD2E0ull, 0x06492EEA09D1921Cull,
    0xFE1DEB1CB129A73Eull,
};

constexpr double kPio2Hi = 0x1.921fb54442d18p+0;
constexpr double kPio2Lo = 0x1.1a62633145c07p-54;

// 64 bits of 2/pi starting at bit index `s` (negative indices read as 0).
std::uint64_t two_over_pi_window(int s) {
  const int q = s >> 6;       // floor division
  const int r = s & 63;
  const auto word = [](int i) -> std::uint64_t {
    return (i >= 0 && i < 7) ? kTwoOverPi[i] : 0;
  };
  const std::uint64_t hi = word(q);
  const std::uint64_t lo = word(q + 1);
  return r == 0 ? hi : (hi << r) | (lo >> (64 - r));
}

struct Reduced {
  int quadrant;  // n mod 4
  double rh;     // r = rh + rl, |r| <= pi/4 + eps
  double rl;
};

// Reduces |x| (a finite float32 with |x| > pi/4) to r = |x| - n*pi/2.
// Pure integer/IEEE arithmetic; identical bits on every platform.
Reduced reduce_pio2(float ax) {
  const std::uint32_t bits = f2u(ax);
  const std::uint64_t m = (bits & 0x007FFFFFu) | 0x00800000u;  // 24-bit
  const int E = static_cast<int>(bits >> 23) - 150;            // |x| = m * 2^E

  // 192-bit window of 2/pi * 2^E covering weights 2^1 .. 2^-190.
  const int i0 = E - 2;
  const std::uint64_t w0 = two_over_pi_window(i0);
  const std::uint64_t w1 = two_over_pi_window(i0 + 64);
  const std::uint64_t w2 = two_over_pi_window(i0 + 128);

  // u = |x| * 2/pi mod 4, with 190 fraction bits: U = m * (w0:w1:w2).
  using u128 = unsigned __int128;
  const u128 p2 = static_cast<u128>(m) * w2;
  const u128 p1 = static_cast<u128>(m) * w1 + static_cast<std::uint64_t>(p2 >> 64);
  const u128 p0 = static_cast<u128>(m) * w0 + static_cast<std::uint64_t>(p1 >> 64);
  std::uint64_t u0 = static_cast<std::uint64_t>(p2);
  std::uint64_t u1 = static_cast<std::uint64_t>(p1);
  std::uint64_t u2 = static_cast<std::uint64_t>(p0);  // bit 63 has weight 2^1

  int n = static_cast<int>(u2 >> 62);  // integer part mod 4
  const bool round_up = (u2 & (1ull << 61)) != 0;  // fraction >= 1/2
  u2 &= 0x3FFFFFFFFFFFFFFFull;                      // keep 190 fraction bits

  double sign = 1.0;
  if (round_up) {  // g = f - 1: negate the fraction, bump the quadrant
    n = (n + 1) & 3;
    sign = -1.0;
    u0 = ~u0 + 1;
    u1 = ~u1 + (u0 == 0 ? 1 : 0);
    u2 = (~u2 + ((u0 == 0 && u1 == 0) ? 1 : 0)) & 0x3FFFFFFFFFFFFFFFull;
  }

  // g = fraction * 2^-190 via exact 32-bit chunks, summed high to low.
  const double chunk[6] = {
      static_cast<double>(u2 >> 32) * 0x1p-30,
      static_cast<double>(u2 & 0xFFFFFFFFull) * 0x1p-62,
      static_cast<double>(u1 >> 32) * 0x1p-94,
      static_cast<double>(u1 & 0xFFFFFFFFull) * 0x1p-126,
      static_cast<double>(u0 >> 32) * 0x1p-158,
      static_cast<double>(u0 & 0xFFFFFFFFull) * 0x1p-190,
  };
  double gh = 0.0, gl = 0.0;
  for (double c : chunk) {  // Fast2Sum: terms arrive in decreasing weight
    const double s = gh + c;
    gl += (gh - s) + c;
    gh = s;
  }
  const double t = gh + gl;
  gl = gl - (t - gh);
  gh = t;

  // r = sign * g * pi/2 as a double-double product.
  gh *= sign;
  gl *= sign;
  const double rh0 = gh * kPio2Hi;
  const double rlo =
      std::fma(gh, kPio2Hi, -rh0) + (gh * kPio2Lo + gl * kPio2Hi);
  const double rh = rh0 + rlo;
  return Reduced{n, rh, rlo - (rh - rh0)};
}

constexpr double kPio4 = 0x1.921fb54442d18p-1;

// sin or cos of a finite float32, evaluated in binary64.
double sincos_kernel(float x, bool want_cos) {
  const float ax = std::fabs(x);
  int quadrant = 0;
  double rh = static_cast<double>(ax), rl = 0.0;
  if (static_cast<double>(ax) > kPio4) {
    const Reduced red = reduce_pio2(ax);
    quadrant = red.quadrant;
    rh = red.rh;
    rl = red.rl;
  }
  if (want_cos) quadrant = (quadrant + 1) & 3;  // cos(t) = sin(t + pi/2)
  double y;
  switch (quadrant) {
    case 0: y = sin_poly(rh, rl); break;
    case 1: y = cos_poly(rh, rl); break;
    case 2: y = -sin_poly(rh, rl); break;
    default: y = -cos_poly(rh, rl); break;
  }
  if (!want_cos && x < 0.0f) y = -y;  // sin is odd, cos is even
  return y;
}

// tanh(x) for |x| < 10; relative error < 2^-47.
double tanh_kernel(double x) {
  const double a = std::fabs(x);
  const double y2 = -2.0 * a;
  const double em = y2 >= -0.36 ? expm1_small(y2) : exp_kernel(y2) - 1.0;
  const double t = -em / (em + 2.0);
  return std::copysign(t, x);
}

// ---------------------------------------------------------------------------
// Rounding decision and the arbitrary-precision fallback.
// ---------------------------------------------------------------------------

// True (and sets `out`) when every real within the kernel's error bound
// of y rounds to the same float32. Monotonicity of round-to-nearest makes
// the two endpoint conversions a complete test.
bool round_decided(double y, float& out) {
  const double e = std::fabs(y) * kFastPathRelErr;
  const float lo = static_cast<float>(y - e);
  const float hi = static_cast<float>(y + e);
  if (f2u(lo) != f2u(hi)) return false;
  out = lo;
  return true;
}

int apply_mpfr(UnaryFn fn, mpfr_t rop, const mpfr_t op, mpfr_rnd_t rnd) {
  switch (fn) {
    case UnaryFn::kExp: return mpfr_exp(rop, op, rnd);
    case UnaryFn::kLog: return mpfr_log(rop, op, rnd);
    case UnaryFn::kSin: return mpfr_sin(rop, op, rnd);
    case UnaryFn::kCos: return mpfr_cos(rop, op, rnd);
    case UnaryFn::kTanh: return mpfr_tanh(rop, op, rnd);
    case UnaryFn::kSqrt: return mpfr_sqrt(rop, op, rnd);
  }
  return 0;
}

// Encloses the exact result in [down, up] at `prec` bits and reports the
// float32 both endpoints round to. False when the enclosure straddles a
// binary32 rounding boundary.
bool mpfr_interval_round(UnaryFn fn, float x, int prec, float& out) {
  mpfr_t xm, down, up;
  mpfr_init2(xm, 32);
  mpfr_init2(down, prec);
  mpfr_init2(up, prec);
  mpfr_set_flt(xm, x, MPFR_RNDN);  // exact
  apply_mpfr(fn, down, xm, MPFR_RNDD);
  apply_mpfr(fn, up, xm, MPFR_RNDU);
  const float fd = canonicalize(mpfr_get_flt(down, MPFR_RNDN));
  const float fu = canonicalize(mpfr_get_flt(up, MPFR_RNDN));
  mpfr_clear(xm);
  mpfr_clear(down);
  mpfr_clear(up);
  if (f2u(fd) != f2u(fu)) return false;
  out = fd;
  return true;
}

// Ziv-style escalation for inputs the fast path could not decide.
float mpfr_round_unary(UnaryFn fn, float x) {
  float out = 0.0f;
  for (int prec : {96, 256, 1024, 4096}) {
    if (mpfr_interval_round(fn, x, prec, out)) return out;
  }
  assert(false && "rounding undecided at 4096 bits");
  return out;
}

float finish(UnaryFn fn, float x, double y) {
  float out;
  if (round_decided(y, out)) return canonicalize(out);
  return mpfr_round_unary(fn, x);
}

float cr_exp(float x) {
  const std::uint32_t b = f2u(x);
  if (is_nan_bits(b)) return canonical_nan();
  if (b == 0x7F800000u) return x;     // +inf
  if (b == 0xFF800000u) return 0.0f;  // -inf
  if (x > 89.0f) return from_bits(0x7F800000u);   // exp(89) already overflows
  if (x < -104.0f) return 0.0f;                   // below half the min subnormal
  return finish(UnaryFn::kExp, x, exp_kernel(static_cast<double>(x)));
}

float cr_log(float x) {
  const std::uint32_t b = f2u(x);
  if (is_nan_bits(b)) return canonical_nan();
  if ((b & 0x7FFFFFFFu) == 0) return from_bits(0xFF800000u);  // log(+-0) = -inf
  if (b & 0x80000000u) return canonical_nan();                // negative
  if (b == 0x7F800000u) return x;                             // +inf
  return finish(UnaryFn::kLog, x, log_kernel(static_cast<double>(x)));
}

float cr_sincos(UnaryFn fn, float x) {
  const std::uint32_t b = f2u(x);
  if (is_nan_bits(b) || (b & 0x7FFFFFFFu) == 0x7F800000u) return canonical_nan();
  const double y = sincos_kernel(x, fn == UnaryFn::kCos);
  if (y == 0.0) return static_cast<float>(y);  // exact at x = +-0 only
  return finish(fn, x, y);
}

float cr_tanh(float x) {
  const std::uint32_t b = f2u(x);
  if (is_nan_bits(b)) return canonical_nan();
  const std::uint32_t mag = b & 0x7FFFFFFFu;
  if (mag == 0) return x;  // +-0
  if (mag >= 0x41200000u)  // |x| >= 10: within 2^-28 of +-1, rounds to +-1
    return from_bits(0x3F800000u | (b & 0x80000000u));
  return finish(UnaryFn::kTanh, x, tanh_kernel(static_cast<double>(x)));
}

float cr_sqrt(float x) {
  const std::uint32_t b = f2u(x);
  if (is_nan_bits(b)) return canonical_nan();
  // IEEE-754 mandates correct rounding for sqrt; the hardware op is the
  // single code path. Negative inputs produce the canonical NaN.
  return canonicalize(std::sqrt(x));
}

}  // namespace

std::string_view unary_fn_name(UnaryFn fn) {
  switch (fn) {
    case UnaryFn::kExp: return "exp";
    case UnaryFn::kLog: return "log";
    case UnaryFn::kSin: return "sin";
    case UnaryFn::kCos: return "cos";
    case UnaryFn::kTanh: return "tanh";
    case UnaryFn::kSqrt: return "sqrt";
  }
  return "?";
}

bool unary_fn_from_name(std::string_view name, UnaryFn& fn) {
  for (UnaryFn f : kAllUnaryFns) {
    if (unary_fn_name(f) == name) {
      fn = f;
      return true;
    }
  }
  return false;
}

float cr_unary(UnaryFn fn, float x) {
  switch (fn) {
    case UnaryFn::kExp: return cr_exp(x);
    case UnaryFn::kLog: return cr_log(x);
    case UnaryFn::kSin: return cr_sincos(UnaryFn::kSin, x);
    case UnaryFn::kCos: return cr_sincos(UnaryFn::kCos, x);
    case UnaryFn::kTanh: return cr_tanh(x);
    case UnaryFn::kSqrt: return cr_sqrt(x);
  }
  return canonical_nan();
}

float cr_div(float a, float b) { return canonicalize(a / b); }

float cr_fma(float a, float b, float c) { return canonicalize(std::fmaf(a, b, c)); }

float rsqrt_composed(float x) { return cr_div(1.0f, cr_unary(UnaryFn::kSqrt, x)); }

RoundingVerdict oracle_check_at(UnaryFn fn, float x, int precision_bits) {
  RoundingVerdict v;
  v.input = to_bits(x);
  v.produced = to_bits(cr_unary(fn, x));
  float oracle = 0.0f;
  v.ambiguous = !mpfr_interval_round(fn, x, precision_bits, oracle);
  v.oracle_rounded = v.ambiguous ? F32Bits{0} : to_bits(oracle);
  return v;
}

RoundingVerdict oracle_check(UnaryFn fn, float x) {
  return oracle_check_at(fn, x, 96);
}

bool verify_fp_environment(std::string_view* reason) {
  const auto fail = [&](std::string_view r) {
    if (reason) *reason = r;
    return false;
  };
  // Subnormals must survive arithmetic (no FTZ/DAZ).
  volatile float sub = from_bits(0x00000001u);
  volatile float sub2 = sub * 1.0f;
  if (f2u(sub2) != 0x00000001u) return fail("flush-to-zero is enabled");
  // Round-to-nearest-even must be active.
  volatile float one = 1.0f;
  volatile float tie = one + 0x1p-24f;
  if (tie != 1.0f) return fail("rounding mode is not round-to-nearest-even");
  volatile float up = one + 0x1.8p-24f;
  if (up != 1.0f + 0x1p-23f) return fail("rounding mode is not round-to-nearest-even");
  // std::fmaf must be fused.
  const float a = from_bits(0x3F800800u);  // 1 + 2^-12
  const float fused = std::fmaf(a, a, -1.0f);
  if (fused != 0x1p-11f + 0x1p-24f) return fail("std::fmaf is not fused");
  if (reason) *reason = "";
  return true;
}

}  // namespace rdl::fpcore
