// OpenMP kernels. Elementwise kernels are pure gathers, so threading them is
// free of ordering effects; reductions reuse the serial block grid and only
// parallelize the (independent) per-block partial sums. Built without
// OpenMP, every flavor falls through to the serial reference.

#include "kernels.hpp"

namespace qoc::detail {

namespace {
inline bool on_fiber(ControlFiber cf, std::uint64_t b) {
  return (b & cf.mask) == cf.value;
}
}  // namespace

void pauli_apply_parallel(const std::vector<cplx>& in, std::vector<cplx>& out,
                          const PauliMasks& m, cplx coeff, ControlFiber cf) {
#ifdef _OPENMP
  const std::int64_t dim = static_cast<std::int64_t>(in.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < dim; ++b) {
    if (!on_fiber(cf, b)) { out[b] = in[b]; continue; }
    const std::uint64_t src = std::uint64_t(b) ^ m.x_mask;
    out[b] = coeff * pauli_factor(m, src) * in[src];
  }
#else
  pauli_apply_serial(in, out, m, coeff, cf);
#endif
}

void pauli_exp_parallel(const std::vector<cplx>& in, std::vector<cplx>& out,
                        const PauliMasks& m, double angle, ControlFiber cf) {
#ifdef _OPENMP
  const double c = std::cos(angle), s = std::sin(angle);
  const cplx mis(0.0, -s);
  const std::int64_t dim = static_cast<std::int64_t>(in.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < dim; ++b) {
    if (!on_fiber(cf, b)) { out[b] = in[b]; continue; }
    const std::uint64_t src = std::uint64_t(b) ^ m.x_mask;
    out[b] = c * in[b] + mis * pauli_factor(m, src) * in[src];
  }
#else
  pauli_exp_serial(in, out, m, angle, cf);
#endif
}

void hadamard_parallel(const std::vector<cplx>& in, std::vector<cplx>& out, std::uint64_t bit) {
#ifdef _OPENMP
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  const std::int64_t dim = static_cast<std::int64_t>(in.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < dim; ++b) {
    const cplx lo = in[b & ~bit], hi = in[b | bit];
    out[b] = (b & bit) ? kInvSqrt2 * (lo - hi) : kInvSqrt2 * (lo + hi);
  }
#else
  hadamard_serial(in, out, bit);
#endif
}

void cswap_parallel(const std::vector<cplx>& in, std::vector<cplx>& out,
                    std::uint64_t cbit, const std::vector<std::uint64_t>& pair_bits) {
#ifdef _OPENMP
  const std::int64_t dim = static_cast<std::int64_t>(in.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < dim; ++b) {
    std::uint64_t src = static_cast<std::uint64_t>(b);
    if (b & cbit) {
      for (std::size_t k = 0; k + 1 < pair_bits.size(); k += 2) {
        const std::uint64_t ba = pair_bits[k], bb = pair_bits[k + 1];
        const bool va = src & ba, vb = src & bb;
        if (va != vb) src ^= (ba | bb);
      }
    }
    out[b] = in[src];
  }
#else
  cswap_serial(in, out, cbit, pair_bits);
#endif
}

void dense_register_parallel(const std::vector<cplx>& in, std::vector<cplx>& out,
                             const std::vector<std::uint64_t>& sub_bits,
                             const std::vector<cplx>& matrix) {
#ifdef _OPENMP
  const std::int64_t dim = static_cast<std::int64_t>(in.size());
  const std::size_t w = sub_bits.size();
  const std::uint64_t sub_dim = std::uint64_t(1) << w;
  std::uint64_t sub_mask = 0;
  for (std::uint64_t bit : sub_bits) sub_mask |= bit;
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < dim; ++b) {
    std::uint64_t row = 0;
    for (std::size_t k = 0; k < w; ++k)
      if (b & sub_bits[k]) row |= sub_dim >> (k + 1);
    const std::uint64_t outer = b & ~sub_mask;
    cplx acc = 0;
    for (std::uint64_t col = 0; col < sub_dim; ++col) {
      std::uint64_t src = outer;
      for (std::size_t k = 0; k < w; ++k)
        if (col & (sub_dim >> (k + 1))) src |= sub_bits[k];
      acc += matrix[row * sub_dim + col] * in[src];
    }
    out[b] = acc;
  }
#else
  dense_register_serial(in, out, sub_bits, matrix);
#endif
}

void fiber_extract_parallel(const std::vector<cplx>& in, std::vector<cplx>& out,
                            const BitSpread& bs) {
#ifdef _OPENMP
  const std::int64_t dim = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < dim; ++r) out[r] = in[bs.spread(r)];
#else
  fiber_extract_serial(in, out, bs);
#endif
}

void fiber_embed_parallel(const std::vector<cplx>& in, const std::vector<cplx>& fiber,
                          std::vector<cplx>& out, const BitSpread& bs) {
#ifdef _OPENMP
  out = in;
  const std::int64_t fdim = static_cast<std::int64_t>(fiber.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < fdim; ++r) out[bs.spread(r)] = fiber[r];
#else
  fiber_embed_serial(in, fiber, out, bs);
#endif
}

double norm2_parallel(const std::vector<cplx>& v) {
#ifdef _OPENMP
  const std::uint64_t dim = v.size();
  const std::int64_t nblocks = static_cast<std::int64_t>((dim + kReduceBlock - 1) / kReduceBlock);
  std::vector<double> parts(nblocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t blk = 0; blk < nblocks; ++blk) {
    const std::uint64_t lo = blk * kReduceBlock;
    const std::uint64_t hi = std::min(dim, lo + kReduceBlock);
    double part = 0.0;
    for (std::uint64_t i = lo; i < hi; ++i) part += std::norm(v[i]);
    parts[blk] = part;
  }
  double total = 0.0;
  for (double p : parts) total += p;  // serial combine, block order
  return total;
#else
  return norm2_serial(v);
#endif
}

cplx dot_parallel(const std::vector<cplx>& a, const std::vector<cplx>& b) {
#ifdef _OPENMP
  const std::uint64_t dim = a.size();
  const std::int64_t nblocks = static_cast<std::int64_t>((dim + kReduceBlock - 1) / kReduceBlock);
  std::vector<cplx> parts(nblocks, cplx(0.0));
#pragma omp parallel for schedule(static)
  for (std::int64_t blk = 0; blk < nblocks; ++blk) {
    const std::uint64_t lo = blk * kReduceBlock;
    const std::uint64_t hi = std::min(dim, lo + kReduceBlock);
    cplx part = 0.0;
    for (std::uint64_t i = lo; i < hi; ++i) part += std::conj(a[i]) * b[i];
    parts[blk] = part;
  }
  cplx total = 0.0;
  for (const cplx& p : parts) total += p;
  return total;
#else
  return dot_serial(a, b);
#endif
}

double bit_mass_parallel(const std::vector<cplx>& v, std::uint64_t bit) {
#ifdef _OPENMP
  const std::uint64_t dim = v.size();
  const std::int64_t nblocks = static_cast<std::int64_t>((dim + kReduceBlock - 1) / kReduceBlock);
  std::vector<double> parts(nblocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t blk = 0; blk < nblocks; ++blk) {
    const std::uint64_t lo = blk * kReduceBlock;
    const std::uint64_t hi = std::min(dim, lo + kReduceBlock);
    double part = 0.0;
    for (std::uint64_t i = lo; i < hi; ++i)
      if (i & bit) part += std::norm(v[i]);
    parts[blk] = part;
  }
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
#else
  return bit_mass_serial(v, bit);
#endif
}

}  // namespace qoc::detail
