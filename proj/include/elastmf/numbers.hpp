// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0

#ifndef ELASTMF_NUMBERS_HPP
#define ELASTMF_NUMBERS_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <type_traits>

namespace emf {

// Width of the widest vector register of the build target, in bytes.
#if defined(__AVX512F__)
inline constexpr int simd_bytes = 64;
#elif defined(__AVX__)
inline constexpr int simd_bytes = 32;
#else
inline constexpr int simd_bytes = 16;
#endif

template <typename T>
inline constexpr int natural_width = simd_bytes / static_cast<int>(sizeof(T));

/// Fixed-width batch of scalars processed in lockstep. All arithmetic is
/// elementwise with the same operation order as the plain scalar type, so a
/// lane of a batched computation is bit-identical to the unbatched one.
template <typename T, int W = natural_width<T>>
struct Batch {
  using value_type = T;
  static constexpr int width = W;

  std::array<T, W> lane{};

  constexpr Batch() = default;
  constexpr Batch(T broadcast) {
    for (int i = 0; i < W; ++i) lane[i] = broadcast;
  }

  constexpr T& operator[](int i) { return lane[i]; }
  constexpr const T& operator[](int i) const { return lane[i]; }

  friend Batch operator-(const Batch& a) {
    Batch r;
    for (int i = 0; i < W; ++i) r.lane[i] = -a.lane[i];
    return r;
  }

#define EMF_BATCH_OP(op)                                        \
  friend Batch operator op(const Batch& a, const Batch& b) {    \
    Batch r;                                                    \
    for (int i = 0; i < W; ++i) r.lane[i] = a.lane[i] op b.lane[i]; \
    return r;                                                   \
  }                                                             \
  Batch& operator op##=(const Batch& b) {                       \
    for (int i = 0; i < W; ++i) lane[i] op##= b.lane[i];        \
    return *this;                                               \
  }
  EMF_BATCH_OP(+)
  EMF_BATCH_OP(-)
  EMF_BATCH_OP(*)
  EMF_BATCH_OP(/)
#undef EMF_BATCH_OP
};

template <typename T, int W>
struct BatchMask {
  std::array<bool, W> lane{};
};

template <typename T, int W>
inline BatchMask<T, W> operator<(const Batch<T, W>& a, const Batch<T, W>& b) {
  BatchMask<T, W> m;
  for (int i = 0; i < W; ++i) m.lane[i] = a.lane[i] < b.lane[i];
  return m;
}
template <typename T, int W>
inline BatchMask<T, W> operator>(const Batch<T, W>& a, const Batch<T, W>& b) {
  BatchMask<T, W> m;
  for (int i = 0; i < W; ++i) m.lane[i] = a.lane[i] > b.lane[i];
  return m;
}
template <typename T, int W>
inline BatchMask<T, W> operator<=(const Batch<T, W>& a, const Batch<T, W>& b) {
  BatchMask<T, W> m;
  for (int i = 0; i < W; ++i) m.lane[i] = a.lane[i] <= b.lane[i];
  return m;
}

template <typename T, int W>
inline Batch<T, W> select(const BatchMask<T, W>& m, const Batch<T, W>& a,
                          const Batch<T, W>& b) {
  Batch<T, W> r;
  for (int i = 0; i < W; ++i) r.lane[i] = m.lane[i] ? a.lane[i] : b.lane[i];
  return r;
}
template <typename T>
inline T select(bool m, T a, T b) {
  return m ? a : b;
}

template <typename T, int W>
inline bool any(const BatchMask<T, W>& m) {
  for (int i = 0; i < W; ++i)
    if (m.lane[i]) return true;
  return false;
}
inline bool any(bool m) { return m; }

// --- number traits -------------------------------------------------------

template <typename N>
struct number_traits {
  using scalar = N;
  static constexpr int width = 1;
  static constexpr bool batched = false;
  static scalar get(const N& x, int) { return x; }
  static void set(N& x, int, scalar v) { x = v; }
};

template <typename T, int W>
struct number_traits<Batch<T, W>> {
  using scalar = T;
  static constexpr int width = W;
  static constexpr bool batched = true;
  static T get(const Batch<T, W>& x, int i) { return x.lane[i]; }
  static void set(Batch<T, W>& x, int i, T v) { x.lane[i] = v; }
};

template <typename N>
using scalar_of = typename number_traits<N>::scalar;

template <typename N>
inline N broadcast(scalar_of<N> v) {
  return N(v);
}

template <typename N>
inline scalar_of<N> get_lane(const N& x, int i) {
  return number_traits<N>::get(x, i);
}
template <typename N>
inline void set_lane(N& x, int i, scalar_of<N> v) {
  number_traits<N>::set(x, i, v);
}

template <typename N>
inline scalar_of<N> min_lane(const N& x) {
  scalar_of<N> m = get_lane(x, 0);
  for (int i = 1; i < number_traits<N>::width; ++i)
    m = std::min(m, get_lane(x, i));
  return m;
}
template <typename N>
inline scalar_of<N> max_abs_lane(const N& x) {
  using std::abs;
  scalar_of<N> m = abs(get_lane(x, 0));
  for (int i = 1; i < number_traits<N>::width; ++i)
    m = std::max(m, abs(get_lane(x, i)));
  return m;
}
template <typename N>
inline scalar_of<N> min_abs_lane(const N& x) {
  using std::abs;
  scalar_of<N> m = abs(get_lane(x, 0));
  for (int i = 1; i < number_traits<N>::width; ++i)
    m = std::min(m, abs(get_lane(x, i)));
  return m;
}

// Lockstep transcendentals. Batched variants apply the scalar routine per
// lane, preserving the per-lane bit pattern of the unbatched evaluation.
template <typename N>
inline N abs_number(const N& x) {
  if constexpr (number_traits<N>::batched) {
    N r;
    for (int i = 0; i < number_traits<N>::width; ++i)
      set_lane(r, i, std::abs(get_lane(x, i)));
    return r;
  } else {
    return std::abs(x);
  }
}

template <typename N>
inline N log1p_number(const N& x) {
  if constexpr (number_traits<N>::batched) {
    N r;
    for (int i = 0; i < number_traits<N>::width; ++i)
      set_lane(r, i, std::log1p(get_lane(x, i)));
    return r;
  } else {
    return std::log1p(x);
  }
}

template <typename N>
inline N log_number(const N& x) {
  if constexpr (number_traits<N>::batched) {
    N r;
    for (int i = 0; i < number_traits<N>::width; ++i)
      set_lane(r, i, std::log(get_lane(x, i)));
    return r;
  } else {
    return std::log(x);
  }
}

template <typename N>
inline N exp_number(const N& x) {
  if constexpr (number_traits<N>::batched) {
    N r;
    for (int i = 0; i < number_traits<N>::width; ++i)
      set_lane(r, i, std::exp(get_lane(x, i)));
    return r;
  } else {
    return std::exp(x);
  }
}

template <typename N>
inline N expm1_number(const N& x) {
  if constexpr (number_traits<N>::batched) {
    N r;
    for (int i = 0; i < number_traits<N>::width; ++i)
      set_lane(r, i, std::expm1(get_lane(x, i)));
    return r;
  } else {
    return std::expm1(x);
  }
}

template <typename N>
inline N pow_number(const N& x, scalar_of<N> e) {
  if constexpr (number_traits<N>::batched) {
    N r;
    for (int i = 0; i < number_traits<N>::width; ++i)
      set_lane(r, i, std::pow(get_lane(x, i), e));
    return r;
  } else {
    return std::pow(x, e);
  }
}

}  // namespace emf

#endif
