// Prints the Euclidean lens diameter against its closed form and the
// diam/h blow-up as h shrinks.

#include <cstdio>

#include "treelens/treelens.hpp"

int main() {
  const double r1 = 1.0;
  std::printf("%10s %14s %14s %12s\n", "h", "closed_form", "sampled", "diam/h");
  for (double h : {0.5, 0.05, 0.005}) {
    const auto demo = treelens::euclidean_lens_diameter(r1, h);
    std::printf("%10.4f %14.8f %14.8f %12.4f\n", h, demo.closed_form, demo.sampled,
                demo.closed_form / h);
  }
  return 0;
}
