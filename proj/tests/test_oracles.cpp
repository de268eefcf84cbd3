// Self-checks of the dense oracles: these must be trustworthy on their own
// terms (closed forms and algebraic identities only) before anything else is
// judged against them.

#include <doctest.h>

#include "oracles.hpp"

using namespace oracle;
using qoc::cplx;

TEST_CASE("pauli matrices and kron") {
  const Mat xz = kron(pauli2('X'), pauli2('Z'));
  CHECK(xz(0, 2) == cplx(1.0));   // X(x)Z maps |00> -> |10>
  CHECK(xz(1, 3) == cplx(-1.0));  // and |01> -> -|11>
  CHECK(xz(2, 0) == cplx(1.0));
  CHECK(xz.cwiseAbs().sum() == doctest::Approx(4.0));

  qoc::PauliTerm t{0.5, "XZ"};
  const Mat m = dense_pauli(t);
  CHECK(m(2, 0) == cplx(0.5));
}

TEST_CASE("hermitian exponential closed forms") {
  const Mat z = pauli2('Z');
  const Mat u = expm_hermitian(z, M_PI);  // exp(-i pi Z) = -I
  CHECK((u + Mat::Identity(2, 2)).norm() == doctest::Approx(0.0).epsilon(1e-12));

  std::mt19937_64 rng(7);
  const qoc::PauliSum h = random_pauli_sum(rng, 2, 3);
  const Mat hm = dense_sum(h);
  const Mat v = expm_hermitian(hm, 0.37);
  CHECK((v * v.adjoint() - Mat::Identity(4, 4)).norm() < 1e-12);   // unitary
  CHECK((v * hm - hm * v).norm() < 1e-10);                         // commutes with H
}

TEST_CASE("power iteration norm") {
  qoc::PauliSum s1{{{3.0, "Z"}}};
  CHECK(power_iteration_norm(dense_sum(s1)) == doctest::Approx(3.0).epsilon(1e-10));

  qoc::PauliSum s2{{{1.0, "X"}, {1.0, "Z"}}};
  CHECK(power_iteration_norm(dense_sum(s2)) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
}

TEST_CASE("gram-schmidt completion is unitary with the given first column") {
  std::mt19937_64 rng(11);
  const auto zeta = random_state(rng, 2);
  const Mat c = gram_schmidt_completion(to_vec(zeta));
  CHECK((c * c.adjoint() - Mat::Identity(4, 4)).norm() < 1e-12);
  CHECK((c.col(0) - to_vec(zeta)).norm() < 1e-12);
}

TEST_CASE("central finite difference") {
  auto f = [](double x) { return x * x; };
  CHECK(central_fd(f, 1.0, 1e-5) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("controlled embedding") {
  // Control qubit 0, X on qubit 1: the CNOT truth table.
  const Mat cx = controlled(embed(pauli2('X'), 1, 2), 0, 2);
  CHECK(cx(0, 0) == cplx(1.0));
  CHECK(cx(1, 1) == cplx(1.0));
  CHECK(cx(3, 2) == cplx(1.0));
  CHECK(cx(2, 3) == cplx(1.0));
  // Anti-controlled: acts on the control=0 fiber instead.
  const Mat ax = controlled(embed(pauli2('X'), 1, 2), 0, 2, 0);
  CHECK(ax(1, 0) == cplx(1.0));
  CHECK(ax(2, 2) == cplx(1.0));
}

TEST_CASE("dense piecewise evolution composes left to right") {
  qoc::PauliSum h0{{{1.0, "Z"}}};
  qoc::PauliSum mu{{{1.0, "X"}}};
  // One interval of xi=0 must equal exp(-i*dt*Z).
  const Mat u = dense_evolution(h0, mu, {0.0}, 0.3);
  CHECK((u - expm_hermitian(pauli2('Z'), 0.3)).norm() < 1e-13);
  // Later intervals multiply on the left.
  const Mat u2 = dense_evolution(h0, mu, {0.2, 0.7}, 0.3);
  const Mat a = expm_hermitian(pauli2('Z') + 0.2 * pauli2('X'), 0.3);
  const Mat b = expm_hermitian(pauli2('Z') + 0.7 * pauli2('X'), 0.3);
  CHECK((u2 - b * a).norm() < 1e-13);
}
