#pragma once

// Test-side reference computations.  Nothing here calls into the library:
// every quantity is recomputed from first principles with plain loops and
// long double arithmetic so that a shared bug cannot hide.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using ld = long double;

inline ld pi() { return 3.141592653589793238462643383279502884L; }

inline ld normal_pdf(ld z) { return std::exp(-z * z / 2) / std::sqrt(2 * pi()); }

/// Q(x) through erfc.
inline double q_erfc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Composite Simpson rule for E{f(sqrt(F) z + E)} over z in [-L, L].
inline ld simpson_gauss(const std::function<ld(ld)>& f, ld E, ld F,
                        int intervals = 20000, ld L = 12) {
  if (intervals % 2) ++intervals;
  const ld h = 2 * L / intervals;
  const ld s = std::sqrt(F);
  ld acc = 0;
  for (int i = 0; i <= intervals; ++i) {
    const ld z = -L + i * h;
    const ld w = (i == 0 || i == intervals) ? 1 : (i % 2 ? 4 : 2);
    acc += w * f(s * z + E) * normal_pdf(z);
  }
  return acc * h / 3;
}

/// Trapezoid rule on [a, b], doubling until successive estimates agree.
inline ld adaptive_trapezoid(const std::function<ld(ld)>& g, ld a, ld b,
                             ld tol = 1e-14L) {
  int n = 64;
  ld h = (b - a) / n;
  ld sum = (g(a) + g(b)) / 2;
  for (int i = 1; i < n; ++i) sum += g(a + i * h);
  ld prev = sum * h;
  for (int level = 0; level < 16; ++level) {
    ld mid = 0;
    for (int i = 0; i < n; ++i) mid += g(a + (i + 0.5L) * h);
    sum += mid;
    n *= 2;
    h /= 2;
    const ld cur = sum * h;
    if (std::fabs(cur - prev) < tol) return cur;
    prev = cur;
  }
  return prev;
}

inline ld tanh_l(ld x) { return std::tanh(x); }
inline ld tanh_sq_l(ld x) {
  const ld t = std::tanh(x);
  return t * t;
}
inline ld log_cosh_l(ld x) {
  const ld a = std::fabs(x);
  return a + std::log1p(std::exp(-2 * a)) - std::log(2.0L);
}

/// Bisection for a sign change of f on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo,
                     double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Larger root of a x^2 + b x + c = 0 (a > 0, c < 0), cancellation free.
inline double positive_root(double a, double b, double c) {
  const ld disc = static_cast<ld>(b) * b - 4.0L * a * c;
  const ld sq = std::sqrt(disc);
  if (b >= 0) return static_cast<double>((2.0L * c) / (-b - sq));
  return static_cast<double>((-b + sq) / (2.0L * a));
}

// ---------------------------------------------------------------------------
// Binary-prior replica equations written in the (B, B0) notation: B = beta /
// sigma^2, B0 = beta / sigma_n^2.

enum class Variant { kPerfect, kDirectMl, kDirectMmse, kCompMl, kCompMmse, kCompMmsePrinted };

struct Sys {
  ld beta;
  ld sn2;
  ld d;       // estimation error variance
  ld sigma2;  // control parameter (ignored by compensated variants)
};

struct EF {
  ld E;
  ld F;
};

inline EF conjugates(Variant v, const Sys& s, ld m, ld q) {
  const ld B0 = s.beta / s.sn2;
  const ld B = s.beta / s.sigma2;
  const ld d = s.d;
  const ld ib = 1 / s.beta;
  switch (v) {
    case Variant::kPerfect: {
      const ld den = 1 + B * (1 - q);
      return {ib * B / den, ib * B * B * (1 / B0 + 1 - 2 * m + q) / (den * den)};
    }
    case Variant::kDirectMl: {
      const ld den = 1 + B * (1 - q) * (1 + d);
      return {ib * B / den,
              (1 + d) * ib * B * B * (1 / B0 + 1 - 2 * m + (1 + d) * q) / (den * den)};
    }
    case Variant::kDirectMmse: {
      const ld den = 1 + B * (1 - q) * (1 - d);
      return {ib * B * (1 - d) / den,
              ib * B * B * (1 - d) * (1 / B0 + 1 - (1 - d) * (2 * m - q)) / (den * den)};
    }
    case Variant::kCompMl: {
      const ld den = 1 + d + B0 * (1 + d - q);
      return {ib * B0 / den,
              ib * B0 * B0 * ((1 / B0 + 1) * (1 + d) - 2 * m + q) / (den * den)};
    }
    case Variant::kCompMmse:
    case Variant::kCompMmsePrinted: {
      const ld den = 1 + B0 * (1 - (1 - d) * q);
      const ld one = v == Variant::kCompMmse ? 1 : 0;
      return {ib * B0 * (1 - d) / den,
              ib * B0 * B0 * (1 - d) * (1 / B0 + one - (2 * m - q) * (1 - d)) / (den * den)};
    }
  }
  return {0, 0};
}

/// Fixed Simpson nodes for repeated Gaussian expectations.
struct GaussNodes {
  std::vector<ld> z;
  std::vector<ld> w;

  explicit GaussNodes(int intervals, ld L = 12) {
    if (intervals % 2) ++intervals;
    const ld h = 2 * L / intervals;
    for (int i = 0; i <= intervals; ++i) {
      const ld zi = -L + i * h;
      const ld c = (i == 0 || i == intervals) ? 1 : (i % 2 ? 4 : 2);
      z.push_back(zi);
      w.push_back(c * h / 3 * normal_pdf(zi));
    }
  }

  std::array<ld, 2> tanh_moments(ld E, ld F) const {
    const ld s = std::sqrt(std::max<ld>(F, 0));
    ld m = 0, q = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const ld t = std::tanh(s * z[i] + E);
      m += w[i] * t;
      q += w[i] * t * t;
    }
    return {m, q};
  }
};

struct Zero {
  double m, q, E, F;
  double residual;
};

/// (m, q) -> (m', q') - (m, q).
inline std::array<ld, 2> replica_gap(Variant v, const Sys& s, const GaussNodes& g,
                                     ld m, ld q) {
  const EF ef = conjugates(v, s, m, q);
  if (!(ef.F >= 0)) return {1e3L, 1e3L};
  const auto t = g.tanh_moments(ef.E, ef.F);
  return {t[0] - m, t[1] - q};
}

/// Exhaustive grid over (m, q) in [0, 1]^2 at spacing `step`, local minima of
/// the residual followed by Newton refinement with a dense Simpson rule.
inline std::vector<Zero> grid_search_zeros(Variant v, const Sys& s,
                                           double step = 1e-3) {
  const GaussNodes coarse(160, 8);
  const GaussNodes fine(24000, 12);
  const int n = static_cast<int>(std::lround(1.0 / step)) + 1;
  std::vector<float> r(static_cast<std::size_t>(n) * n);
  auto at = [&](int i, int j) -> float& { return r[static_cast<std::size_t>(i) * n + j]; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto gap = replica_gap(v, s, coarse, i * step, j * step);
      at(i, j) = static_cast<float>(std::max(std::fabs(gap[0]), std::fabs(gap[1])));
    }
  }

  std::vector<Zero> zeros;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const float here = at(i, j);
      if (here > 2e-2f) continue;
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          const int a = i + di, b = j + dj;
          if ((di || dj) && a >= 0 && a < n && b >= 0 && b < n && at(a, b) < here) {
            is_min = false;
            break;
          }
        }
      }
      if (!is_min) continue;

      // Newton with a central-difference Jacobian.
      ld m = i * step, q = j * step;
      bool ok = false;
      for (int it = 0; it < 60; ++it) {
        const auto g0 = replica_gap(v, s, fine, m, q);
        const ld h = 1e-7L;
        const auto gm1 = replica_gap(v, s, fine, m + h, q);
        const auto gm0 = replica_gap(v, s, fine, m - h, q);
        const auto gq1 = replica_gap(v, s, fine, m, q + h);
        const auto gq0 = replica_gap(v, s, fine, m, q - h);
        const ld a11 = (gm1[0] - gm0[0]) / (2 * h), a12 = (gq1[0] - gq0[0]) / (2 * h);
        const ld a21 = (gm1[1] - gm0[1]) / (2 * h), a22 = (gq1[1] - gq0[1]) / (2 * h);
        const ld det = a11 * a22 - a12 * a21;
        if (std::fabs(det) < 1e-300L) break;
        const ld dm = (g0[0] * a22 - g0[1] * a12) / det;
        const ld dq = (a11 * g0[1] - a21 * g0[0]) / det;
        m -= dm;
        q -= dq;
        if (std::fabs(dm) + std::fabs(dq) < 1e-15L) {
          ok = true;
          break;
        }
      }
      if (!ok) continue;
      const auto g = replica_gap(v, s, fine, m, q);
      const ld res = std::max(std::fabs(g[0]), std::fabs(g[1]));
      if (res > 1e-10L) continue;
      const EF ef = conjugates(v, s, m, q);
      Zero z{static_cast<double>(m), static_cast<double>(q), static_cast<double>(ef.E),
             static_cast<double>(ef.F), static_cast<double>(res)};
      const bool seen = std::any_of(zeros.begin(), zeros.end(), [&](const Zero& o) {
        return std::fabs(o.m - z.m) < 1e-6 && std::fabs(o.q - z.q) < 1e-6;
      });
      if (!seen) zeros.push_back(z);
    }
  }
  return zeros;
}

/// Direct-ML free energy evaluated term by term.
inline ld direct_ml_free_energy(const Sys& s, ld m, ld q, ld E, ld F) {
  const ld B0 = s.beta / s.sn2;
  const ld B = s.beta / s.sigma2;
  const ld d = s.d;
  const ld integral = simpson_gauss(log_cosh_l, E, F, 40000);
  const ld den = 1 + B * (1 - q) * (1 + d);
  const ld last = std::log(1 + (1 + d) * (1 - q) * B) +
                  B * (1 / B0 + 1 - 2 * m + (1 + d) * q) / den;
  return integral - E * m - F * (1 - q) / 2 - last / (2 * s.beta);
}

// ---------------------------------------------------------------------------
// Exact posterior by naive enumeration.  codes is N x K column-major in a
// flat vector, already scaled as the receiver uses them (including 1/sqrt(N)).

inline std::vector<double> naive_posterior(const std::vector<double>& codes, int N,
                                           int K, const std::vector<double>& r,
                                           double sigma2) {
  const std::uint32_t total = 1u << K;
  std::vector<ld> energy(total);
  ld best = std::numeric_limits<ld>::infinity();
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    ld e = 0;
    for (int i = 0; i < N; ++i) {
      ld y = r[i];
      for (int k = 0; k < K; ++k) {
        const ld b = (mask >> k) & 1u ? 1 : -1;
        y -= codes[static_cast<std::size_t>(k) * N + i] * b;
      }
      e += y * y;
    }
    energy[mask] = e / (2 * static_cast<ld>(sigma2));
    best = std::min(best, energy[mask]);
  }
  std::vector<ld> plus(K, 0), all(K, 0);
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    const ld w = std::exp(-(energy[mask] - best));
    for (int k = 0; k < K; ++k) {
      all[k] += w;
      if ((mask >> k) & 1u) plus[k] += w;
    }
  }
  std::vector<double> out(K);
  for (int k = 0; k < K; ++k) out[k] = static_cast<double>((2 * plus[k] - all[k]) / all[k]);
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian-prior (PIC) system over a discrete power law.

struct PowerAtom {
  ld p;      // true power
  ld p_hat;  // assumed power
  ld w;
};

struct Lin {
  ld m, q, p, E, F, G;
};

/// Direct-ML channel block with (p - q) in the denominators.
inline std::array<ld, 3> pic_conjugates(const Sys& s, ld m, ld q, ld p) {
  const ld B0 = s.beta / s.sn2;
  const ld B = s.beta / s.sigma2;
  const ld d = s.d;
  const ld den = 1 + B * (p - q) * (1 + d);
  const ld E = B / s.beta / den;
  const ld F = (1 + d) * B * B / s.beta * (1 / B0 + 1 - 2 * m + (1 + d) * q) / (den * den);
  return {E, F, F - (1 + d) * E};
}

inline std::array<ld, 3> pic_moments(const std::vector<PowerAtom>& law, ld E, ld F, ld G) {
  ld m = 0, q = 0, p = 0;
  for (const auto& a : law) {
    const ld A = 1 + a.p_hat * (F - G);
    m += a.w * a.p * a.p_hat * E / A;
    q += a.w * a.p_hat * a.p_hat * (a.p * E * E + F) / (A * A);
    p += a.w * a.p_hat * (a.p_hat * a.p * E * E + 2 * a.p_hat * F + 1 - a.p_hat * G) / (A * A);
  }
  return {m, q, p};
}

inline std::array<ld, 3> pic_gap(const Sys& s, const std::vector<PowerAtom>& law,
                                 ld m, ld q, ld p) {
  if (!(p > q)) return {1e3L, 1e3L, 1e3L};
  const auto c = pic_conjugates(s, m, q, p);
  const auto t = pic_moments(law, c[0], c[1], c[2]);
  return {t[0] - m, t[1] - q, t[2] - p};
}

/// Dense 3-D grid over (m, q, p) followed by Newton refinement.
inline std::vector<Lin> pic_grid_zeros(const Sys& s, const std::vector<PowerAtom>& law,
                                       double step = 0.01, double p_max = 2.0) {
  const int nm = static_cast<int>(std::lround(1.0 / step)) + 1;
  const int np = static_cast<int>(std::lround(p_max / step)) + 1;
  struct Cand {
    ld r;
    int i, j, k;
  };
  std::vector<Cand> cands;
  for (int i = 0; i < nm; ++i)
    for (int j = 0; j < nm; ++j)
      for (int k = 0; k < np; ++k) {
        const auto g = pic_gap(s, law, i * step, j * step, k * step);
        const ld r = std::max({std::fabs(g[0]), std::fabs(g[1]), std::fabs(g[2])});
        if (r < 0.05L) cands.push_back({r, i, j, k});
      }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.r < b.r; });

  std::vector<Lin> zeros;
  for (std::size_t c = 0; c < std::min<std::size_t>(cands.size(), 50); ++c) {
    ld x[3] = {cands[c].i * step, cands[c].j * step, cands[c].k * step};
    bool ok = false;
    for (int it = 0; it < 100; ++it) {
      const auto g0 = pic_gap(s, law, x[0], x[1], x[2]);
      ld J[3][3];
      for (int col = 0; col < 3; ++col) {
        ld xp[3] = {x[0], x[1], x[2]}, xm[3] = {x[0], x[1], x[2]};
        const ld h = 1e-8L;
        xp[col] += h;
        xm[col] -= h;
        const auto gp = pic_gap(s, law, xp[0], xp[1], xp[2]);
        const auto gm = pic_gap(s, law, xm[0], xm[1], xm[2]);
        for (int row = 0; row < 3; ++row) J[row][col] = (gp[row] - gm[row]) / (2 * h);
      }
      // Cramer's rule.
      auto det3 = [](ld M[3][3]) {
        return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
               M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
               M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
      };
      const ld det = det3(J);
      if (std::fabs(det) < 1e-300L) break;
      ld dx[3];
      for (int col = 0; col < 3; ++col) {
        ld Jc[3][3];
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) Jc[a][b] = (b == col) ? g0[a] : J[a][b];
        dx[col] = det3(Jc) / det;
      }
      for (int a = 0; a < 3; ++a) x[a] -= dx[a];
      if (std::fabs(dx[0]) + std::fabs(dx[1]) + std::fabs(dx[2]) < 1e-16L) {
        ok = true;
        break;
      }
    }
    if (!ok) continue;
    const auto g = pic_gap(s, law, x[0], x[1], x[2]);
    if (std::max({std::fabs(g[0]), std::fabs(g[1]), std::fabs(g[2])}) > 1e-12L) continue;
    const auto e = pic_conjugates(s, x[0], x[1], x[2]);
    Lin z{x[0], x[1], x[2], e[0], e[1], e[2]};
    const bool seen = std::any_of(zeros.begin(), zeros.end(), [&](const Lin& o) {
      return std::fabs(o.m - z.m) + std::fabs(o.q - z.q) + std::fabs(o.p - z.p) < 1e-8L;
    });
    if (!seen) zeros.push_back(z);
  }
  return zeros;
}

// ---------------------------------------------------------------------------
// Philox4x32-10 known-answer vectors (Random123 kat_vectors).

struct PhiloxKat {
  std::array<std::uint32_t, 4> ctr;
  std::array<std::uint32_t, 2> key;
  std::array<std::uint32_t, 4> expected;
};

inline std::array<PhiloxKat, 3> philox_kats() {
  return {{
      {{0u, 0u, 0u, 0u}, {0u, 0u}, {0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}},
      {{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
       {0xffffffffu, 0xffffffffu},
       {0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}},
      {{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
       {0xa4093822u, 0x299f31d0u},
       {0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}},
  }};
}

}  // namespace oracle
