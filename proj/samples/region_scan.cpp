// Writes the (alpha1, alpha2) classification for t = (1, 2), d = pi/40 as
// CSV: region_scan [n] > regions.csv

#include <cstdlib>
#include <iostream>

#include "nonlocal/nonlocal.hpp"

int main(int argc, char** argv) {
  using namespace nonlocal;
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 201;
  if (n == 0) {
    std::cerr << "usage: region_scan [points-per-axis]\n";
    return 64;
  }
  const Axis axis{-3.0, 3.0, n};
  const auto scan = run_scan(axis, axis, {{1, 1}, {2, 1}}, kPi / 40);
  write_csv(std::cout, scan);

  std::size_t exact = 0, classical = 0;
  for (const auto& l : scan.labels) {
    exact += l.exact == Decision::WellPosed;
    classical += l.classical;
  }
  std::cerr << "well-posed " << exact << " of " << scan.labels.size() << ", classical " << classical << "\n";
}
