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

#ifndef RDL_FPCORE_HPP_
#define RDL_FPCORE_HPP_

#include <bit>
#include <cstdint>
#include <string_view>

// Correctly rounded float32 scalar operations.
//
// Every function here is a pure function of its input bit patterns: same
// bits in, same bits out, on every conforming platform, at any thread
// count. Transcendentals run a binary64 kernel (fixed constants, no libm
// on that path) and fall back to an arbitrary-precision evaluation when
// the binary64 result lies too close to a float32 rounding boundary to
// decide the rounding.
//
// All NaNs are canonicalized to the single quiet pattern 0x7FC00000 at
// every operation boundary, so NaN payload propagation (which differs
// between CPU vendors) can never leak into results.

namespace rdl::fpcore {

inline constexpr std::uint32_t kCanonicalNanBits = 0x7FC00000u;

// IEEE-754 binary32 bit pattern. Bijective with float values; the helpers
// below are the only sanctioned float<->bits conversions in this library.
struct F32Bits {
  std::uint32_t bits = 0;

  friend constexpr bool operator==(F32Bits, F32Bits) = default;
};

constexpr F32Bits to_bits(float x) {
  return F32Bits{std::bit_cast<std::uint32_t>(x)};
}

constexpr float from_bits(F32Bits b) { return std::bit_cast<float>(b.bits); }

constexpr float from_bits(std::uint32_t b) { return std::bit_cast<float>(b); }

constexpr bool is_nan_bits(std::uint32_t b) {
  return (b & 0x7F800000u) == 0x7F800000u && (b & 0x007FFFFFu) != 0;
}

// NaN -> 0x7FC00000, everything else unchanged.
constexpr float canonicalize(float x) {
  return is_nan_bits(std::bit_cast<std::uint32_t>(x))
             ? std::bit_cast<float>(kCanonicalNanBits)
             : x;
}

constexpr float canonical_nan() { return std::bit_cast<float>(kCanonicalNanBits); }

// The correctly rounded unary operations. Each member has exactly one
// implementation; there is no runtime algorithm selection.
enum class UnaryFn { kExp, kLog, kSin, kCos, kTanh, kSqrt };

inline constexpr UnaryFn kAllUnaryFns[] = {UnaryFn::kExp,  UnaryFn::kLog,
                                           UnaryFn::kSin,  UnaryFn::kCos,
                                           UnaryFn::kTanh, UnaryFn::kSqrt};

std::string_view unary_fn_name(UnaryFn fn);
// Returns false when the name is not a known function.
bool unary_fn_from_name(std::string_view name, UnaryFn& fn);

// Correctly rounded (round-to-nearest-even) float32 value of the exact
// real function at x. Domain violations return the IEEE-mandated special
// (log of a negative -> canonical NaN, log(0) -> -inf, ...).
float cr_unary(UnaryFn fn, float x);

// IEEE-754 correctly rounded quotient. This is the hardware divide; the
// function exists to pin one code path and forbid reciprocal-multiply
// rewrites. 0/0 -> canonical NaN, x/0 -> signed infinity.
float cr_div(float a, float b);

// a*b + c with a single rounding. The only multiply-add form kernels may
// use for accumulation; unfused mul-then-add is forbidden inside
// reductions.
float cr_fma(float a, float b, float c);

// 1 / sqrt(x) as the fixed two-node graph cr_div(1, cr_unary(Sqrt, x)).
// Reproducible by construction, not claimed correctly rounded as a
// single operation.
float rsqrt_composed(float x);

// Verdict of checking cr_unary against the arbitrary-precision oracle.
// `ambiguous` is set when the oracle's enclosing interval at its working
// precision straddles a binary32 rounding boundary; if it is false the
// check is decided and `produced` must equal `oracle_rounded`.
struct RoundingVerdict {
  F32Bits input;
  F32Bits produced;
  F32Bits oracle_rounded;
  bool ambiguous = false;

  bool decided_correct() const {
    return !ambiguous && produced == oracle_rounded;
  }
};

// Checks cr_unary(fn, x) against an MPFR evaluation whose relative error
// is below 2^-64 (default working precision 96 bits). Reentrant; may
// allocate.
RoundingVerdict oracle_check(UnaryFn fn, float x);

// Same check at an explicit working precision (used to re-resolve
// ambiguous verdicts, e.g. at 256 bits).
RoundingVerdict oracle_check_at(UnaryFn fn, float x, int precision_bits);

// Sanity probe for the floating-point environment this library assumes:
// round-to-nearest-even, no flush-to-zero / denormals-are-zero, fused
// std::fma. Returns false (and a reason) if the process is misconfigured.
bool verify_fp_environment(std::string_view* reason = nullptr);

}  // namespace rdl::fpcore

#endif  // RDL_FPCORE_HPP_
