// Solves a small three-point problem for a random Hermitian Hamiltonian and
// compares the two ways of inverting B.

#include <iostream>
#include <random>

#include "nonlocal/nonlocal.hpp"

using namespace nonlocal;

int main() {
  const double d = kPi / 40;
  const auto spec = NonlocalSpec::rational({{1, 1}, {2, 1}}, {Complex(0.4, 0.1), Complex(-0.3)}, d);
  const auto verdict = decide(spec);
  std::cout << "verdict " << to_json(verdict).dump() << "\n";

  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  Matrix a(6, 6);
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 6; ++j) a(i, j) = Complex(g(rng), g(rng));
  const FiniteHamiltonian h(Matrix((a + a.adjoint()) / 2.0), d);
  State psi1(6);
  for (Eigen::Index i = 0; i < 6; ++i) psi1(i) = Complex(g(rng), g(rng));

  const Matrix direct = assemble_B(h, spec).inverse();
  for (int n : {16, 32, 64}) {
    ContourSpec c;
    c.nodes_per_side = n;
    const double e = (invert_B_contour(h, spec, c) - direct).norm() / direct.norm();
    std::cout << "contour nodes/side " << n << "  relative error " << format_double(e) << "\n";
  }

  const auto sol = solve_nonlocal(h, spec, psi1, ExponentialSource{Complex(-0.5, 1.0), psi1}, 3.0);
  std::cout << "nonlocal residual " << format_double(sol.residual()) << "\n";
  std::cout << "|psi(0)| " << format_double(sol.evaluate(0.0).norm()) << "  |psi(3)| "
            << format_double(sol.evaluate(3.0).norm()) << "\n";
}
