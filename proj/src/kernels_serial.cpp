// Serial reference kernels: straight loops, no tricks. These define the
// semantics the OpenMP flavors must reproduce bit-for-bit.

#include "kernels.hpp"

namespace qoc::detail {

namespace {
inline bool on_fiber(ControlFiber cf, std::uint64_t b) {
  return (b & cf.mask) == cf.value;
}
}  // namespace

void pauli_apply_serial(const std::vector<cplx>& in, std::vector<cplx>& out,
                        const PauliMasks& m, cplx coeff, ControlFiber cf) {
  const std::uint64_t dim = in.size();
  for (std::uint64_t b = 0; b < dim; ++b) {
    if (!on_fiber(cf, b)) { out[b] = in[b]; continue; }
    const std::uint64_t src = b ^ m.x_mask;
    out[b] = coeff * pauli_factor(m, src) * in[src];
  }
}

void pauli_exp_serial(const std::vector<cplx>& in, std::vector<cplx>& out,
                      const PauliMasks& m, double angle, ControlFiber cf) {
  const double c = std::cos(angle), s = std::sin(angle);
  const cplx mis(0.0, -s);  // -i*sin
  const std::uint64_t dim = in.size();
  for (std::uint64_t b = 0; b < dim; ++b) {
    if (!on_fiber(cf, b)) { out[b] = in[b]; continue; }
    const std::uint64_t src = b ^ m.x_mask;
    out[b] = c * in[b] + mis * pauli_factor(m, src) * in[src];
  }
}

void hadamard_serial(const std::vector<cplx>& in, std::vector<cplx>& out, std::uint64_t bit) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  const std::uint64_t dim = in.size();
  for (std::uint64_t b = 0; b < dim; ++b) {
    const cplx lo = in[b & ~bit], hi = in[b | bit];
    out[b] = (b & bit) ? kInvSqrt2 * (lo - hi) : kInvSqrt2 * (lo + hi);
  }
}

void cswap_serial(const std::vector<cplx>& in, std::vector<cplx>& out,
                  std::uint64_t cbit, const std::vector<std::uint64_t>& pair_bits) {
  const std::uint64_t dim = in.size();
  for (std::uint64_t b = 0; b < dim; ++b) {
    std::uint64_t src = b;
    if (b & cbit) {
      for (std::size_t k = 0; k + 1 < pair_bits.size(); k += 2) {
        const std::uint64_t ba = pair_bits[k], bb = pair_bits[k + 1];
        const bool va = src & ba, vb = src & bb;
        if (va != vb) src ^= (ba | bb);
      }
    }
    out[b] = in[src];
  }
}

void dense_register_serial(const std::vector<cplx>& in, std::vector<cplx>& out,
                           const std::vector<std::uint64_t>& sub_bits,
                           const std::vector<cplx>& matrix) {
  const std::uint64_t dim = in.size();
  const std::size_t w = sub_bits.size();
  const std::uint64_t sub_dim = std::uint64_t(1) << w;
  std::uint64_t sub_mask = 0;
  for (std::uint64_t bit : sub_bits) sub_mask |= bit;
  for (std::uint64_t b = 0; b < dim; ++b) {
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
}

void fiber_extract_serial(const std::vector<cplx>& in, std::vector<cplx>& out,
                          const BitSpread& bs) {
  const std::uint64_t dim = out.size();
  for (std::uint64_t r = 0; r < dim; ++r) out[r] = in[bs.spread(r)];
}

void fiber_embed_serial(const std::vector<cplx>& in, const std::vector<cplx>& fiber,
                        std::vector<cplx>& out, const BitSpread& bs) {
  out = in;
  const std::uint64_t fdim = fiber.size();
  for (std::uint64_t r = 0; r < fdim; ++r) out[bs.spread(r)] = fiber[r];
}

// Blocked reductions: partial sums per kReduceBlock entries, combined in
// block order. The OpenMP flavor computes the same partials concurrently and
// combines them in the same order, so results match bitwise.

double norm2_serial(const std::vector<cplx>& v) {
  const std::uint64_t dim = v.size();
  const std::uint64_t nblocks = (dim + kReduceBlock - 1) / kReduceBlock;
  double total = 0.0;
  for (std::uint64_t blk = 0; blk < nblocks; ++blk) {
    const std::uint64_t lo = blk * kReduceBlock;
    const std::uint64_t hi = std::min(dim, lo + kReduceBlock);
    double part = 0.0;
    for (std::uint64_t i = lo; i < hi; ++i) part += std::norm(v[i]);
    total += part;
  }
  return total;
}

cplx dot_serial(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  const std::uint64_t dim = a.size();
  const std::uint64_t nblocks = (dim + kReduceBlock - 1) / kReduceBlock;
  cplx total = 0.0;
  for (std::uint64_t blk = 0; blk < nblocks; ++blk) {
    const std::uint64_t lo = blk * kReduceBlock;
    const std::uint64_t hi = std::min(dim, lo + kReduceBlock);
    cplx part = 0.0;
    for (std::uint64_t i = lo; i < hi; ++i) part += std::conj(a[i]) * b[i];
    total += part;
  }
  return total;
}

double bit_mass_serial(const std::vector<cplx>& v, std::uint64_t bit) {
  const std::uint64_t dim = v.size();
  const std::uint64_t nblocks = (dim + kReduceBlock - 1) / kReduceBlock;
  double total = 0.0;
  for (std::uint64_t blk = 0; blk < nblocks; ++blk) {
    const std::uint64_t lo = blk * kReduceBlock;
    const std::uint64_t hi = std::min(dim, lo + kReduceBlock);
    double part = 0.0;
    for (std::uint64_t i = lo; i < hi; ++i)
      if (i & bit) part += std::norm(v[i]);
    total += part;
  }
  return total;
}

}  // namespace qoc::detail
