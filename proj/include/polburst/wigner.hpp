// wigner.hpp — Wigner 3j/6j symbols and Clebsch-Gordan coefficients

#pragma once

namespace polburst::wigner {

// All angular momenta are half-integers passed as doubles; inputs where
// 2j is not integral, or where j+m is not integral, throw.

double wigner3j(double j1, double j2, double j3,
                double m1, double m2, double m3);

double wigner6j(double j1, double j2, double j3,
                double j4, double j5, double j6);

// <j1 m1; j2 m2 | j3 m3> in the Condon-Shortley convention.
double clebsch_gordan(double j1, double m1, double j2, double m2,
                      double j3, double m3);

} // namespace polburst::wigner
