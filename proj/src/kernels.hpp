#pragma once
// Internal kernels behind the public state operations. Every kernel comes in
// a serial reference flavor and an OpenMP flavor; the two must produce
// bit-identical output. To make that hold by construction:
//   - elementwise kernels are pure gathers (each output element is computed
//     from inputs only, no scatter, no accumulation across elements), and
//   - reductions are computed over a fixed block grid whose partial sums are
//     combined serially in block order in both flavors.

#include <cstdint>
#include <vector>

#include "qoc/state.hpp"

namespace qoc::detail {

// Reduction block size (amplitudes per partial sum). Part of the numeric
// definition of every reduction: changing it changes low-order bits.
inline constexpr std::uint64_t kReduceBlock = 4096;

// Bit masks describing a Pauli string embedded in an index space.
//   x_mask: bits flipped by the string (X and Y positions)
//   zy_mask: bits contributing a (-1)^bit phase (Z and Y positions)
//   y_count: number of Y positions (global i^y_count phase)
struct PauliMasks {
  std::uint64_t x_mask = 0;
  std::uint64_t zy_mask = 0;
  int y_count = 0;
};

// Restriction of a kernel to basis states where (index & mask) == value;
// mask == 0 means unrestricted.
struct ControlFiber {
  std::uint64_t mask = 0;
  std::uint64_t value = 0;
};

// Builds masks for `axes` acting on qubits [offset, offset+len) of an
// `n`-qubit register (qubit 0 = most significant bit).
PauliMasks make_masks(const std::string& axes, int offset, int num_qubits);

inline bool parity64(std::uint64_t v) { return __builtin_parityll(v); }

// i^{y_count} * (-1)^{parity(b & zy_mask)}
inline cplx pauli_factor(const PauliMasks& m, std::uint64_t b) {
  static constexpr cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  cplx f = kIPow[m.y_count & 3];
  return parity64(b & m.zy_mask) ? -f : f;
}

// out[b] = coeff * factor(b^x) * in[b^x] on the fiber, identity elsewhere.
void pauli_apply_serial(const std::vector<cplx>& in, std::vector<cplx>& out,
                        const PauliMasks& m, cplx coeff, ControlFiber cf);
void pauli_apply_parallel(const std::vector<cplx>& in, std::vector<cplx>& out,
                          const PauliMasks& m, cplx coeff, ControlFiber cf);

// out = exp(-i*angle*P) in = cos(angle)*in - i*sin(angle)*P in, on the fiber.
void pauli_exp_serial(const std::vector<cplx>& in, std::vector<cplx>& out,
                      const PauliMasks& m, double angle, ControlFiber cf);
void pauli_exp_parallel(const std::vector<cplx>& in, std::vector<cplx>& out,
                        const PauliMasks& m, double angle, ControlFiber cf);

// Hadamard butterfly on the qubit whose index bit is `bit`.
void hadamard_serial(const std::vector<cplx>& in, std::vector<cplx>& out, std::uint64_t bit);
void hadamard_parallel(const std::vector<cplx>& in, std::vector<cplx>& out, std::uint64_t bit);

// out[b] = in[pi(b)] for an involutive index permutation pi given as:
// if (b & cbit) swap the bit fields at masks a/b (equal population, disjoint).
void cswap_serial(const std::vector<cplx>& in, std::vector<cplx>& out,
                  std::uint64_t cbit, const std::vector<std::uint64_t>& pair_bits);
void cswap_parallel(const std::vector<cplx>& in, std::vector<cplx>& out,
                    std::uint64_t cbit, const std::vector<std::uint64_t>& pair_bits);

// Dense matrix on a qubit subset. `sub_bits[k]` is the index bit of subset
// qubit k (subset qubit 0 most significant in the sub-index). Gathers the
// 2^w-vector for each outer index and applies the row-major matrix.
void dense_register_serial(const std::vector<cplx>& in, std::vector<cplx>& out,
                           const std::vector<std::uint64_t>& sub_bits,
                           const std::vector<cplx>& matrix);
void dense_register_parallel(const std::vector<cplx>& in, std::vector<cplx>& out,
                             const std::vector<std::uint64_t>& sub_bits,
                             const std::vector<cplx>& matrix);

// Gather map: out[i] = in[map(i)] with map given by (stride decomposition of
// the narrower fiber space into the wider one); used for fiber extraction,
// zero-register insertion, and projection assembly. The map is supplied as a
// callable-free structure: out[i] = in[base[i]] is too big to tabulate at
// n=12? 2^12 entries is fine, but keep it mask-math instead:
// fiber extract: out[r] = in[spread(r)] where spread inserts fixed bits.
struct BitSpread {
  // Sorted positions (as bit values) of removed bits, and the value forced
  // into each removed position.
  std::vector<std::uint64_t> removed_bits;
  std::uint64_t forced_value = 0;  // bits at removed positions
  std::uint64_t spread(std::uint64_t r) const {
    std::uint64_t b = r;
    for (std::uint64_t bit : removed_bits) {  // ascending bit values
      std::uint64_t low = b & (bit - 1);
      b = ((b ^ low) << 1) | low;
    }
    return b | forced_value;
  }
};

void fiber_extract_serial(const std::vector<cplx>& in, std::vector<cplx>& out,
                          const BitSpread& bs);
void fiber_extract_parallel(const std::vector<cplx>& in, std::vector<cplx>& out,
                            const BitSpread& bs);

// out[spread(r)] = fiber[r]; all other entries copied from in.
void fiber_embed_serial(const std::vector<cplx>& in, const std::vector<cplx>& fiber,
                        std::vector<cplx>& out, const BitSpread& bs);
void fiber_embed_parallel(const std::vector<cplx>& in, const std::vector<cplx>& fiber,
                          std::vector<cplx>& out, const BitSpread& bs);

// Blocked reductions (partials combined serially in block order).
double norm2_serial(const std::vector<cplx>& v);
double norm2_parallel(const std::vector<cplx>& v);
cplx dot_serial(const std::vector<cplx>& a, const std::vector<cplx>& b);
cplx dot_parallel(const std::vector<cplx>& a, const std::vector<cplx>& b);
// Probability mass where (index & bit) != 0.
double bit_mass_serial(const std::vector<cplx>& v, std::uint64_t bit);
double bit_mass_parallel(const std::vector<cplx>& v, std::uint64_t bit);

}  // namespace qoc::detail
